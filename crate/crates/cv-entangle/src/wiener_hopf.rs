//! Semi-analytic evaluation of the minimal symplectic eigenvalue of the
//! oscillator-continuum partial transpose: spectral factorization of the
//! field symbol plus root finding on the characteristic determinant.
//!
//! The candidate eigenvalue lambda enters through the operator
//! lambda*sigma_y + B on the two-component field; its Schur complement
//! M = B22 - Blam^dag Blam (Blam = B12 - i lambda) is a half-line
//! convolution operator inverted by Wiener-Hopf factorization of its
//! rational symbol. All inner products reduce to residue sums.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expsum::inner_conj;
use crate::gaussian::EntanglementResult;
use crate::kernels::{cross_kernels, gx_expsum, osc_steady_covariance};
use crate::params::SystemParams;
use crate::rational::{half_line_inner, poly_eval, poly_roots, PoleTerm, Rational};

/// The factorization symbol: a real quartic numerator over |D(W)|^2 with
/// D(W) = omega_m^2 + gamma_m^2 - W^2 - 2 i gamma_m W.
#[derive(Debug, Clone)]
pub struct SpectralSymbol {
    pub lambda: f64,
    /// Quartic coefficients, highest degree first:
    /// P(W) = L W^4 + L (2 g^2 - 2 w^2) W^2 - 4 lambda a_f a_r g W
    ///        + [L (w^2 + g^2)^2 + a_r^2 S_F], with L = 1 - lambda^2.
    pub quartic: [f64; 5],
    /// Roots of D(W): +-omega_m - i gamma_m (the poles of the position
    /// response); the conjugates complete |D|^2.
    pub d_roots: [Complex64; 2],
    params: SystemParams,
}

impl SpectralSymbol {
    /// Evaluate P(W)/|D(W)|^2 at real W.
    pub fn eval(&self, w: f64) -> f64 {
        let wc = Complex64::new(w, 0.0);
        let num = poly_eval(&self.quartic, wc).re;
        let d = self.d(wc);
        num / (d * d.conj()).re
    }

    fn d(&self, w: Complex64) -> Complex64 {
        let p = &self.params;
        Complex64::new(p.omega0_sq(), 0.0) - w * w
            - Complex64::i() * 2.0 * p.gamma_m * w
    }
}

/// Build the spectral symbol at a candidate eigenvalue lambda in (0, 1).
pub fn symbol_polynomial(p: &SystemParams, lambda: f64) -> Result<SpectralSymbol> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda = {lambda} outside (0, 1)")));
    }
    let big_l = 1.0 - lambda * lambda;
    let (w, g) = (p.omega_m, p.gamma_m);
    let (af, ar) = (p.force_amp(), p.readout_gain());
    let quartic = [
        big_l,
        0.0,
        big_l * (2.0 * g * g - 2.0 * w * w),
        -4.0 * lambda * af * ar * g,
        big_l * p.omega0_sq().powi(2) + ar * ar * p.s_thermal(),
    ];
    Ok(SpectralSymbol {
        lambda,
        quartic,
        d_roots: [Complex64::new(w, -g), Complex64::new(-w, -g)],
        params: *p,
    })
}

/// Rational factors of the symbol split by half-plane, as root lists with a
/// common normalization constant sqrt(1 - lambda^2).
#[derive(Debug, Clone)]
pub struct Factorization {
    /// Quartic roots in the upper half-plane (zeros of psi_plus).
    pub psi_plus_roots: [Complex64; 2],
    /// Quartic roots in the lower half-plane (zeros of psi_minus).
    pub psi_minus_roots: [Complex64; 2],
    /// sqrt(Lambda); psi_plus * psi_minus reproduces the quartic.
    pub norm: f64,
}

impl Factorization {
    pub fn psi_plus(&self, w: Complex64) -> Complex64 {
        self.norm * (w - self.psi_plus_roots[0]) * (w - self.psi_plus_roots[1])
    }

    pub fn psi_minus(&self, w: Complex64) -> Complex64 {
        self.norm * (w - self.psi_minus_roots[0]) * (w - self.psi_minus_roots[1])
    }
}

/// Split the quartic roots by half-plane via the companion matrix.
pub fn factorize(symbol: &SpectralSymbol) -> Result<Factorization> {
    let coeffs: Vec<Complex64> =
        symbol.quartic.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let roots = poly_roots(&coeffs)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0f64, f64::max);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in &roots {
        if r.im.abs() < 1e-9 * scale {
            return Err(Error::Degenerate(format!(
                "quartic root {r} on the real axis; factorization degenerate"
            )));
        }
        if r.im > 0.0 {
            upper.push(*r);
        } else {
            lower.push(*r);
        }
    }
    if upper.len() != 2 || lower.len() != 2 {
        return Err(Error::Degenerate(format!(
            "quartic roots do not split evenly across the real axis: {roots:?}"
        )));
    }
    // conditioning guard: nearly coincident roots
    for pair in [&upper, &lower] {
        if (pair[0] - pair[1]).norm() < 1e-7 * scale {
            return Err(Error::Degenerate(format!(
                "near-degenerate quartic roots {} and {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(Factorization {
        psi_plus_roots: [upper[0], upper[1]],
        psi_minus_roots: [lower[0], lower[1]],
        norm: (1.0 - symbol.lambda * symbol.lambda).sqrt(),
    })
}

/// Evaluate D(W) exactly.
fn d_eval(p: &SystemParams, w: Complex64) -> Complex64 {
    Complex64::new(p.omega0_sq(), 0.0) - w * w - Complex64::i() * 2.0 * p.gamma_m * w
}

/// The 2x2 matrix of field-weighted inner products T_ij = (c_i | W | c_j)
/// entering the characteristic determinant.
fn t_matrix(p: &SystemParams, lambda: f64) -> Result<[[Complex64; 2]; 2]> {
    let symbol = symbol_polynomial(p, lambda)?;
    let fac = factorize(&symbol)?;

    // Work in the age variable u = -t: the working quartic is P(-W), whose
    // roots are the mirrored quartic roots. The plus-factor of the working
    // symbol carries the lower-half-plane roots together with D's own roots.
    let mirror = |r: [Complex64; 2]| [-r[0], -r[1]];
    let zl = mirror(fac.psi_plus_roots); // lower half-plane after mirroring
    let zu = mirror(fac.psi_minus_roots); // upper half-plane
    let inv_psi_plus = inverse_factor_working(p, zl, fac.norm, false);
    let inv_psi_minus = inverse_factor_working(p, zu, fac.norm, true);

    let ck = cross_kernels(p);
    let c_rat: Vec<[Rational; 2]> = (0..2)
        .map(|i| {
            [
                Rational::from_expsum(&ck.c[i][0]),
                Rational::from_expsum(&ck.c[i][1]),
            ]
        })
        .collect();

    // B21 in the age variable: anticausal convolution with symbol
    // a_f a_r * Gx~(-W): poles in the upper half-plane.
    let k21 = Rational::from_expsum(&gx_expsum(p))
        .scale(Complex64::new(p.force_amp() * p.readout_gain(), 0.0))
        .flip();

    let ilam = Complex64::i() * lambda;
    let dvec: Vec<Rational> = (0..2)
        .map(|i| -> Result<Rational> {
            let t = k21.mul(&c_rat[i][0])?.causal_part()?;
            Ok(t
                .add(&c_rat[i][0].scale(ilam))
                .add(&c_rat[i][1].scale(Complex64::new(-1.0, 0.0)))
                .consolidate())
        })
        .collect::<Result<_>>()?;

    let gvec: Vec<Rational> = dvec
        .iter()
        .map(|d| -> Result<Rational> {
            let inner = d.mul(&inv_psi_minus)?.causal_part()?;
            inner.mul(&inv_psi_plus).map(|r| r.consolidate())
        })
        .collect::<Result<_>>()?;

    let mut t = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let direct = inner_conj(&ck.c[i][0], &ck.c[j][0]);
            let schur = half_line_inner(&dvec[i], &gvec[j])?;
            t[i][j] = direct + schur;
        }
    }
    Ok(t)
}

/// 1/Psi for the working (age-variable) factors: the plus factor divides by
/// D(W) (roots in the lower half-plane), the minus factor by D(-W).
fn inverse_factor_working(
    p: &SystemParams,
    roots: [Complex64; 2],
    norm: f64,
    minus: bool,
) -> Rational {
    let dv = |w: Complex64| if minus { d_eval(p, -w) } else { d_eval(p, w) };
    let (r1, r2) = (roots[0], roots[1]);
    Rational {
        constant: Complex64::new(-1.0 / norm, 0.0),
        terms: vec![
            PoleTerm { pole: r1, residue: dv(r1) / (norm * (r1 - r2)) },
            PoleTerm { pole: r2, residue: dv(r2) / (norm * (r2 - r1)) },
        ],
    }
}

/// The characteristic determinant whose roots in (0, 1) are the below-unity
/// symplectic eigenvalues of the partial transpose.
pub fn characteristic_det(p: &SystemParams, lambda: f64) -> Result<f64> {
    // near-degenerate factorization triggers one perturbed retry
    let attempt = |lam: f64| -> Result<f64> {
        let t = t_matrix(p, lam)?;
        let a = osc_steady_covariance(p);
        let ilam = Complex64::i() * lam;
        let m00 = Complex64::new(a[(0, 0)], 0.0) - t[0][0];
        let m11 = Complex64::new(a[(1, 1)], 0.0) - t[1][1];
        let m01 = -ilam + t[0][1];
        let m10 = ilam + t[1][0];
        let det = m00 * m11 - m01 * m10;
        Ok(det.re)
    };
    match attempt(lambda) {
        Err(Error::Degenerate(_)) => attempt(lambda + 1e-9),
        other => other,
    }
}

/// Root-solve the characteristic determinant on lambda in (0, 1).
///
/// Scans a log-spaced grid (dense near 0 where the determinant can be
/// steep) augmented with a linear grid near 1, brackets sign changes and
/// bisects to 1e-10. Regions where the factorization degenerates (the
/// symbol loses positivity) are skipped. Multiple roots raise an ambiguity
/// error carrying all of them.
pub fn solve_lambda(p: &SystemParams) -> Result<EntanglementResult> {
    if p.omega_q <= 0.0 {
        return Err(Error::NoEntanglement("omega_q = 0 is separable".into()));
    }
    let lo = 1e-6_f64;
    let hi = 1.0_f64 - 1e-6;
    let mut grid: Vec<f64> = (0..64)
        .map(|k| lo * (hi / lo).powf(k as f64 / 63.0))
        .collect();
    grid.extend((0..64).map(|k| 0.5 + (hi - 0.5) * k as f64 / 63.0));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let eval = |lam: f64| -> Option<f64> { characteristic_det(p, lam).ok() };

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &lam in &grid {
        if let Some(v) = eval(lam) {
            if let Some((pl, pv)) = prev {
                if pv * v < 0.0 {
                    brackets.push((pl, lam));
                }
            }
            prev = Some((lam, v));
        } else {
            prev = None;
        }
    }

    if brackets.is_empty() {
        return Ok(EntanglementResult {
            symplectic_spectrum: vec![],
            e_n: 0.0,
            below_unity_count: 0,
            convergence_trace: vec![],
            converged: true,
        });
    }

    let mut roots = Vec::new();
    for (mut a, mut b) in brackets.clone() {
        let mut fa = eval(a).ok_or_else(|| Error::Degenerate("bracket endpoint".into()))?;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if b - a < 1e-10 {
                break;
            }
            match eval(mid) {
                Some(fm) => {
                    if fa * fm <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                None => break,
            }
        }
        roots.push(0.5 * (a + b));
    }

    if roots.len() > 1 {
        return Err(Error::AmbiguousRoots(roots));
    }
    let lambda = roots[0];
    Ok(EntanglementResult {
        symplectic_spectrum: vec![lambda],
        e_n: -lambda.ln(),
        below_unity_count: 1,
        convergence_trace: vec![],
        converged: true,
    })
}

/// Direct evaluation of the symbol from the position response (test oracle):
/// Lambda + i lambda a_f a_r (Gx~ - Gx~*) + a_r^2 S_F |Gx~|^2 at real W.
pub fn symbol_direct(p: &SystemParams, lambda: f64, w: f64) -> f64 {
    let wc = Complex64::new(w, 0.0);
    let gx = 1.0 / d_eval(p, wc);
    let gxc = gx.conj();
    let big_l = 1.0 - lambda * lambda;
    let v = Complex64::new(big_l, 0.0)
        + Complex64::i() * lambda * p.force_amp() * p.readout_gain() * (gx - gxc)
        + p.readout_gain().powi(2) * p.s_thermal() * gx * gxc;
    v.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, Thermal};
    use approx::assert_abs_diff_eq;

    fn params(qm: f64, wq: f64, wf: f64) -> SystemParams {
        build_params(1.0, qm, wq, Thermal::OmegaF(wf)).unwrap()
    }

    #[test]
    fn symbol_matches_direct_evaluation() {
        // build-time verified identity: P(W)/|D|^2 against the response form
        let p = params(30.0, 0.4, 0.3);
        let sym = symbol_polynomial(&p, 0.6).unwrap();
        let mut state = 0x12345678u64;
        for _ in 0..100 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let w = ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 20.0;
            let a = sym.eval(w);
            let b = symbol_direct(&p, 0.6, w);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "W={w}: {a} vs {b}");
        }
    }

    #[test]
    fn symbol_rejects_bad_lambda() {
        let p = params(30.0, 0.4, 0.3);
        assert!(symbol_polynomial(&p, 0.0).is_err());
        assert!(symbol_polynomial(&p, 1.0).is_err());
    }

    #[test]
    fn uncoupled_symbol_factorization_trivial() {
        // Omega_q = 0: P = Lambda |D|^2, psi_plus carries the conjugated
        // D roots in the upper half-plane
        let p = params(30.0, 0.0, 0.3);
        let sym = symbol_polynomial(&p, 0.5).unwrap();
        let fac = factorize(&sym).unwrap();
        let mut ups = fac.psi_plus_roots.to_vec();
        ups.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_abs_diff_eq!(ups[0].re, -p.omega_m, epsilon = 1e-9);
        assert_abs_diff_eq!(ups[0].im, p.gamma_m, epsilon = 1e-9);
        assert_abs_diff_eq!(ups[1].re, p.omega_m, epsilon = 1e-9);
    }

    #[test]
    fn factorization_residual_and_conjugate_pairing() {
        let p = params(100.0, 0.25, 0.2);
        for &lam in &[0.2, 0.5, 0.8] {
            let sym = symbol_polynomial(&p, lam).unwrap();
            let fac = factorize(&sym).unwrap();
            // roots pair by conjugation between the half-planes
            for r in fac.psi_plus_roots {
                assert!(
                    fac.psi_minus_roots.iter().any(|s| (s.conj() - r).norm() < 1e-8),
                    "unpaired root {r}"
                );
            }
            // |psi+ psi- - P| small at random real frequencies
            let mut state = 7u64;
            for _ in 0..100 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
                let w = Complex64::new(
                    ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 12.0,
                    0.0,
                );
                let prod = fac.psi_plus(w) * fac.psi_minus(w);
                let pv = poly_eval(&sym.quartic, w);
                assert!((prod - pv).norm() <= 1e-10 * pv.norm().max(1.0));
            }
        }
    }

    #[test]
    fn uncoupled_determinant_has_thermal_root() {
        // C = 0: det reduces to A11 A22 - lambda^2 with root 2 n_th + 1 > 1
        let p = params(200.0, 0.0, 0.4);
        let a = osc_steady_covariance(&p);
        for &lam in &[0.3, 0.6, 0.9] {
            let d = characteristic_det(&p, lam).unwrap();
            assert_abs_diff_eq!(
                d,
                a[(0, 0)] * a[(1, 1)] - lam * lam,
                epsilon = 1e-10 * a[(0, 0)] * a[(1, 1)]
            );
        }
        assert!(solve_lambda(&p).is_err()); // separable guard
    }

    #[test]
    fn high_q_universal_law() {
        // Qm = 1e5: the root obeys E_N = (1/2) ln(1 + 25/8 r^2) to O(1/Qm)
        for &r in &[0.5, 1.0, 4.0] {
            let p = params(1e5, 0.1 * r, 0.1);
            let res = solve_lambda(&p).unwrap();
            let want = 0.5 * (1.0 + 25.0 / 8.0 * r * r).ln();
            assert!(
                (res.e_n - want).abs() < 3e-4 + 1e-3 * want,
                "r={r}: {} vs {want}",
                res.e_n
            );
        }
    }

    #[test]
    fn ratio_universality_at_fixed_qm() {
        let p1 = params(1e3, 0.3, 0.3);
        let p2 = params(1e3, 0.6, 0.6);
        let e1 = solve_lambda(&p1).unwrap().e_n;
        let e2 = solve_lambda(&p2).unwrap().e_n;
        assert!((e1 - e2).abs() < 1e-3, "{e1} vs {e2}");
    }
}
