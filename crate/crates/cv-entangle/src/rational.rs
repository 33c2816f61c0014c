//! Pole-residue algebra for proper rational functions with simple poles,
//! plus an optional constant part. This is the working representation for
//! the frequency-domain Wiener-Hopf machinery: products are expanded by
//! partial fractions, half-plane splits select poles by the sign of the
//! imaginary part, and inner products close contours with residue sums.
//!
//! Fourier convention: g~(W) = int e^{+iWu} g(u) du. A function supported
//! on u > 0 is analytic in the upper half-plane with all poles below the
//! real axis; taking the causal part of a rational function keeps exactly
//! those lower-half-plane poles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::linalg;

/// Minimum pole separation, relative to the pole scale, below which a
/// partial-fraction split is refused.
pub const POLE_COLLISION_TOL: f64 = 1e-9;
/// Poles closer to the real axis than this (relative) are degenerate.
pub const REAL_AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub residue: Complex64,
}

/// constant + sum_k residue_k / (W - pole_k)
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rational {
    pub constant: Complex64,
    pub terms: Vec<PoleTerm>,
}

impl Rational {
    pub fn zero() -> Self {
        Rational::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Rational { constant: c, terms: Vec::new() }
    }

    /// Fourier transform of a decaying exponential sum on u >= 0: each term
    /// amp * e^{z u} maps to a pole at i z with residue i * amp.
    pub fn from_expsum(f: &ExpSum) -> Self {
        let i = Complex64::i();
        Rational {
            constant: Complex64::new(0.0, 0.0),
            terms: f
                .0
                .iter()
                .map(|t| PoleTerm { pole: i * t.rate, residue: i * t.amp })
                .collect(),
        }
    }

    /// Mirror W -> -W: poles and residues negate.
    pub fn flip(&self) -> Self {
        Rational {
            constant: self.constant,
            terms: self
                .terms
                .iter()
                .map(|t| PoleTerm { pole: -t.pole, residue: -t.residue })
                .collect(),
        }
    }

    /// Pointwise complex conjugate on the real axis, continued off it:
    /// poles and residues conjugate. For a plus function this produces the
    /// minus-type transform of the conjugated, time-mirrored signal.
    pub fn conj_flip(&self) -> Self {
        Rational {
            constant: self.constant.conj(),
            terms: self
                .terms
                .iter()
                .map(|t| PoleTerm { pole: t.pole.conj(), residue: t.residue.conj() })
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Rational {
            constant: self.constant * s,
            terms: self
                .terms
                .iter()
                .map(|t| PoleTerm { pole: t.pole, residue: t.residue * s })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Rational { constant: self.constant + other.constant, terms }
    }

    /// Merge terms at coinciding poles, drop negligible residues.
    pub fn consolidate(&self) -> Self {
        let scale: f64 =
            self.terms.iter().map(|t| t.residue.norm()).sum::<f64>().max(1e-300);
        let mut out: Vec<PoleTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if let Some(e) = out
                .iter_mut()
                .find(|e| (e.pole - t.pole).norm() < 1e-12 * (1.0 + e.pole.norm()))
            {
                e.residue += t.residue;
            } else {
                out.push(*t);
            }
        }
        out.retain(|t| t.residue.norm() > 1e-16 * scale);
        Rational { constant: self.constant, terms: out }
    }

    /// Product via pairwise partial fractions. Fails on pole collisions
    /// between the factors (the caller retries with a perturbed parameter).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms: Vec<PoleTerm> = Vec::new();
        for t in &self.terms {
            terms.push(PoleTerm { pole: t.pole, residue: t.residue * other.constant });
        }
        for s in &other.terms {
            terms.push(PoleTerm { pole: s.pole, residue: s.residue * self.constant });
        }
        for t in &self.terms {
            for s in &other.terms {
                let d = t.pole - s.pole;
                let scale = t.pole.norm().max(s.pole.norm()).max(1.0);
                if d.norm() < POLE_COLLISION_TOL * scale {
                    return Err(Error::Degenerate(format!(
                        "pole collision at {} in rational product",
                        t.pole
                    )));
                }
                let r = t.residue * s.residue / d;
                terms.push(PoleTerm { pole: t.pole, residue: r });
                terms.push(PoleTerm { pole: s.pole, residue: -r });
            }
        }
        Ok(Rational { constant: self.constant * other.constant, terms }.consolidate())
    }

    /// Keep exactly the terms with poles in the lower half-plane (the part
    /// supported on u > 0 under the e^{+iWu} convention). The constant part
    /// does not belong to either half and is dropped.
    pub fn causal_part(&self) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let scale = t.pole.norm().max(1.0);
            if t.pole.im.abs() < REAL_AXIS_TOL * scale {
                return Err(Error::Degenerate(format!(
                    "pole on the real axis at {}",
                    t.pole
                )));
            }
            if t.pole.im < 0.0 {
                terms.push(*t);
            }
        }
        Ok(Rational { constant: Complex64::new(0.0, 0.0), terms })
    }

    /// Complement of [`causal_part`] (poles in the upper half-plane).
    pub fn anticausal_part(&self) -> Result<Self> {
        let mut terms = Vec::new();
        for t in &self.terms {
            let scale = t.pole.norm().max(1.0);
            if t.pole.im.abs() < REAL_AXIS_TOL * scale {
                return Err(Error::Degenerate(format!(
                    "pole on the real axis at {}",
                    t.pole
                )));
            }
            if t.pole.im > 0.0 {
                terms.push(*t);
            }
        }
        Ok(Rational { constant: Complex64::new(0.0, 0.0), terms })
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = self.constant;
        for t in &self.terms {
            acc += t.residue / (w - t.pole);
        }
        acc
    }
}

/// int_0^inf conj(f(u)) g(u) du for half-line functions given by their
/// transforms (all poles in the lower half-plane). Equal to
/// (1/2pi) int f~*(W) g~(W) dW, closed in the upper half-plane:
/// i * sum over poles p* of f~* of residue* . g~(p*).
pub fn half_line_inner(f: &Rational, g: &Rational) -> Result<Complex64> {
    if f.constant.norm() > 1e-14 || g.constant.norm() > 1e-14 {
        return Err(Error::Structural(
            "half_line_inner expects proper rational transforms".into(),
        ));
    }
    let fc = f.conj_flip();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &fc.terms {
        if t.pole.im <= 0.0 {
            return Err(Error::Structural(format!(
                "half_line_inner: conjugated pole {} not in the upper half-plane",
                t.pole
            )));
        }
        acc += t.residue * g.eval(t.pole);
    }
    Ok(Complex64::i() * acc)
}

/// Roots of a polynomial with complex coefficients (highest degree first)
/// via the companion matrix.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let lead = coeffs
        .first()
        .ok_or_else(|| Error::Structural("empty polynomial".into()))?;
    if lead.norm() == 0.0 {
        return Err(Error::Degenerate("vanishing leading coefficient".into()));
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut comp = ndarray::Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        comp[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    linalg::eig_complex(&comp)
}

/// Evaluate a real-coefficient polynomial (highest degree first).
pub fn poly_eval(coeffs: &[f64], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::{inner_conj, ExpSum};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn causal_part_trivial_cases() {
        let lower = Rational {
            constant: c(0.0, 0.0),
            terms: vec![PoleTerm { pole: c(1.0, -0.5), residue: c(2.0, 0.0) }],
        };
        assert_eq!(lower.causal_part().unwrap(), lower);
        let upper = Rational {
            constant: c(0.0, 0.0),
            terms: vec![PoleTerm { pole: c(1.0, 0.5), residue: c(2.0, 0.0) }],
        };
        assert!(upper.causal_part().unwrap().terms.is_empty());
        let real_pole = Rational {
            constant: c(0.0, 0.0),
            terms: vec![PoleTerm { pole: c(1.0, 0.0), residue: c(1.0, 0.0) }],
        };
        assert!(real_pole.causal_part().is_err());
    }

    #[test]
    fn causal_plus_anticausal_is_identity() {
        let f = Rational {
            constant: c(0.0, 0.0),
            terms: vec![
                PoleTerm { pole: c(1.0, -0.5), residue: c(2.0, 1.0) },
                PoleTerm { pole: c(-0.3, 0.8), residue: c(0.5, -0.2) },
                PoleTerm { pole: c(0.2, -1.5), residue: c(-1.0, 0.4) },
            ],
        };
        let sum = f.causal_part().unwrap().add(&f.anticausal_part().unwrap());
        for k in 0..20 {
            let w = c(-3.0 + 0.33 * k as f64, 0.0);
            assert!((sum.eval(w) - f.eval(w)).norm() < 1e-12);
        }
    }

    #[test]
    fn causal_part_idempotent_and_linear() {
        let f = Rational {
            constant: c(0.0, 0.0),
            terms: vec![
                PoleTerm { pole: c(1.0, -0.5), residue: c(2.0, 1.0) },
                PoleTerm { pole: c(-0.3, 0.8), residue: c(0.5, -0.2) },
            ],
        };
        let g = Rational {
            constant: c(0.0, 0.0),
            terms: vec![PoleTerm { pole: c(0.4, 1.2), residue: c(1.0, 0.0) }],
        };
        let cf = f.causal_part().unwrap();
        assert_eq!(cf.causal_part().unwrap(), cf);
        let lin = f.add(&g.scale(c(2.0, 0.0))).causal_part().unwrap();
        let rhs = f.causal_part().unwrap().add(&g.causal_part().unwrap().scale(c(2.0, 0.0)));
        for k in 0..10 {
            let w = c(-2.0 + 0.5 * k as f64, 0.0);
            assert!((lin.eval(w) - rhs.eval(w)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let f = Rational {
            constant: c(0.3, 0.0),
            terms: vec![
                PoleTerm { pole: c(1.0, -0.5), residue: c(2.0, 1.0) },
                PoleTerm { pole: c(-0.3, 0.8), residue: c(0.5, -0.2) },
            ],
        };
        let g = Rational {
            constant: c(0.0, -0.1),
            terms: vec![PoleTerm { pole: c(0.4, 1.2), residue: c(1.0, 0.7) }],
        };
        let prod = f.mul(&g).unwrap();
        for k in 0..20 {
            let w = c(-4.0 + 0.41 * k as f64, 0.0);
            assert!((prod.eval(w) - f.eval(w) * g.eval(w)).norm() < 1e-11);
        }
    }

    #[test]
    fn product_rejects_collisions() {
        let f = Rational {
            constant: c(0.0, 0.0),
            terms: vec![PoleTerm { pole: c(1.0, -0.5), residue: c(1.0, 0.0) }],
        };
        assert!(f.mul(&f).is_err());
    }

    #[test]
    fn inner_product_matches_time_domain() {
        // derived oracle: the residue-sum inner product equals the
        // closed-form time-domain integral of the exponential sums
        let f = ExpSum::damped_cosine(1.1, 0.4, 2.0, 0.3);
        let g = ExpSum::damped_cosine(0.9, 0.7, 1.1, -0.5);
        let time = inner_conj(&f, &g);
        let freq =
            half_line_inner(&Rational::from_expsum(&f), &Rational::from_expsum(&g)).unwrap();
        assert!((time - freq).norm() < 1e-12, "{time} vs {freq}");
    }

    #[test]
    fn quartic_roots() {
        // (z-1)(z-2)(z-3)(z-4)
        let coeffs: Vec<Complex64> =
            [1.0, -10.0, 35.0, -50.0, 24.0].iter().map(|&x| c(x, 0.0)).collect();
        let mut roots = poly_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((r - c(want, 0.0)).norm() < 1e-9);
        }
    }
}
