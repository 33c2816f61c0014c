//! Closed-form integrals of finite complex-exponential sums on the
//! half-line u >= 0. Every correlation kernel in the model is a sum of
//! terms `amp * exp(rate * u)` with `Re rate < 0`, so all inner products
//! and double integrals reduce to rational expressions in the rates.

use num_complex::Complex64;

/// One exponential term `amp * exp(rate * u)`, u >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub amp: Complex64,
    pub rate: Complex64,
}

/// A finite sum of decaying complex exponentials on u >= 0. Real-valued
/// functions are represented by conjugate term pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpSum(pub Vec<ExpTerm>);

impl ExpSum {
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Self {
        ExpSum(terms.into_iter().map(|(amp, rate)| ExpTerm { amp, rate }).collect())
    }

    /// A damped cosine `a * exp(-decay u) * cos(freq u + phase)` as a
    /// conjugate pair of complex exponentials.
    pub fn damped_cosine(a: f64, decay: f64, freq: f64, phase: f64) -> Self {
        let i = Complex64::i();
        ExpSum(vec![
            ExpTerm {
                amp: 0.5 * a * (i * phase).exp(),
                rate: Complex64::new(-decay, freq),
            },
            ExpTerm {
                amp: 0.5 * a * (-i * phase).exp(),
                rate: Complex64::new(-decay, -freq),
            },
        ])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ExpSum(self.0.iter().map(|t| ExpTerm { amp: t.amp * s, rate: t.rate }).collect())
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ExpSum(v)
    }

    /// Derivative d/du.
    pub fn derivative(&self) -> Self {
        ExpSum(self.0.iter().map(|t| ExpTerm { amp: t.amp * t.rate, rate: t.rate }).collect())
    }

    /// Complex conjugate of the function values.
    pub fn conj(&self) -> Self {
        ExpSum(self.0.iter().map(|t| ExpTerm { amp: t.amp.conj(), rate: t.rate.conj() }).collect())
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        self.0.iter().map(|t| t.amp * (t.rate * u).exp()).sum()
    }

    pub fn eval_re(&self, u: f64) -> f64 {
        self.eval(u).re
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Merge terms with coinciding rates; drop negligible amplitudes.
    pub fn consolidate(&self) -> Self {
        let mut out: Vec<ExpTerm> = Vec::with_capacity(self.0.len());
        let scale: f64 = self.0.iter().map(|t| t.amp.norm()).sum::<f64>().max(1e-300);
        for t in &self.0 {
            if let Some(existing) = out
                .iter_mut()
                .find(|e| (e.rate - t.rate).norm() < 1e-12 * (1.0 + e.rate.norm()))
            {
                existing.amp += t.amp;
            } else {
                out.push(*t);
            }
        }
        out.retain(|t| t.amp.norm() > 1e-16 * scale);
        ExpSum(out)
    }
}

/// `int_0^inf f(u) g(u) du` (plain product, no conjugation).
pub fn inner(f: &ExpSum, g: &ExpSum) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &f.0 {
        for b in &g.0 {
            acc -= a.amp * b.amp / (a.rate + b.rate);
        }
    }
    acc
}

/// `int_0^inf conj(f(u)) g(u) du` — the L2 inner product.
pub fn inner_conj(f: &ExpSum, g: &ExpSum) -> Complex64 {
    inner(&f.conj(), g)
}

/// `int_0^inf du int_0^u du' f(u) g(u') k(u - u')` with all three decaying
/// exponential sums. Each term contributes
/// `Fa Ga Ka / ((za + wk)(za + zb))`, an identity free of cancellation even
/// when the kernel rate coincides with a function rate.
pub fn double_causal(f: &ExpSum, g: &ExpSum, k: &ExpSum) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &f.0 {
        for b in &g.0 {
            for kk in &k.0 {
                acc += a.amp * b.amp * kk.amp
                    / ((a.rate + kk.rate) * (a.rate + b.rate));
            }
        }
    }
    acc
}

/// `int int f(u) g(u') k(|u - u'|) du du'` over the quarter plane.
pub fn double_symmetric(f: &ExpSum, g: &ExpSum, k: &ExpSum) -> Complex64 {
    double_causal(f, g, k) + double_causal(g, f, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Trapezoid quadrature oracle for the half-line integrals.
    fn quad_inner(f: &ExpSum, g: &ExpSum, umax: f64, n: usize) -> Complex64 {
        let h = umax / n as f64;
        let mut acc = c(0.0, 0.0);
        for i in 0..=n {
            let u = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * f.eval(u) * g.eval(u);
        }
        acc * h
    }

    fn quad_double_causal(f: &ExpSum, g: &ExpSum, k: &ExpSum, umax: f64, n: usize) -> Complex64 {
        let h = umax / n as f64;
        let mut acc = c(0.0, 0.0);
        for i in 1..=n {
            let u = i as f64 * h;
            let mut row = c(0.0, 0.0);
            for j in 0..i {
                let up = (j as f64 + 0.5) * h;
                row += g.eval(up) * k.eval(u - up);
            }
            acc += f.eval(u) * row;
        }
        acc * h * h
    }

    #[test]
    fn inner_matches_quadrature() {
        let f = ExpSum::damped_cosine(1.3, 0.4, 2.0, 0.3);
        let g = ExpSum::damped_cosine(0.7, 0.6, 1.5, -0.8);
        let exact = inner(&f, &g);
        let approx = quad_inner(&f, &g, 40.0, 400_000);
        assert!((exact - approx).norm() < 1e-6, "{exact} vs {approx}");
    }

    #[test]
    fn double_causal_matches_quadrature() {
        let f = ExpSum::damped_cosine(1.0, 0.5, 1.0, 0.0);
        let g = ExpSum::damped_cosine(0.8, 0.3, 1.2, 0.4);
        let k = ExpSum::damped_cosine(0.6, 0.7, 0.9, 0.1);
        let exact = double_causal(&f, &g, &k);
        let approx = quad_double_causal(&f, &g, &k, 30.0, 6000);
        assert!((exact - approx).norm() < 2e-3 * exact.norm().max(1.0), "{exact} vs {approx}");
    }

    #[test]
    fn double_causal_resonant_rates() {
        // kernel rate exactly equal to a function rate: the closed form stays finite
        let f = ExpSum::new(vec![(c(1.0, 0.0), c(-0.5, 1.0)), (c(1.0, 0.0), c(-0.5, -1.0))]);
        let k = f.clone();
        let g = f.clone();
        let exact = double_causal(&f, &g, &k);
        assert!(exact.is_finite() || exact.norm() < 1e300);
        let approx = quad_double_causal(&f, &g, &k, 40.0, 6000);
        assert!((exact - approx).norm() < 2e-3 * exact.norm().max(1.0), "{exact} vs {approx}");
    }

    #[test]
    fn derivative_and_eval() {
        let f = ExpSum::damped_cosine(2.0, 0.3, 1.7, 0.2);
        let d = f.derivative();
        let h = 1e-6;
        let u = 0.9;
        let fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
        assert!((d.eval(u) - fd).norm() < 1e-7);
    }

    #[test]
    fn consolidate_merges_equal_rates() {
        let f = ExpSum::new(vec![
            (c(1.0, 0.0), c(-1.0, 2.0)),
            (c(0.5, 0.1), c(-1.0, 2.0)),
            (c(0.2, 0.0), c(-2.0, 0.0)),
        ]);
        let g = f.consolidate();
        assert_eq!(g.0.len(), 2);
        assert!((g.eval(0.7) - f.eval(0.7)).norm() < 1e-14);
    }
}
