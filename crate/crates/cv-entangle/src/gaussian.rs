//! Finite-mode Gaussian-state machinery: symplectic spectra, partial
//! transpose, physicality, logarithmic negativity.
//!
//! Quadrature ordering is interleaved (q1, p1, q2, p2, ...) everywhere.
//! Vacuum covariance is the identity and physical states have all
//! symplectic eigenvalues >= 1.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative symmetry tolerance accepted on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute slack on the physicality check (grid discretization noise).
pub const PHYSICALITY_TOL: f64 = 1e-6;
/// Tolerance for the symplectic-spectrum pairing check.
pub const PAIRING_TOL: f64 = 1e-10;

/// Real symmetric 2M x 2M covariance matrix over interleaved quadrature
/// pairs, in zero-point units.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    entries: Array2<f64>,
    dim_modes: usize,
}

/// Symplectic spectrum of a partial transpose together with the resulting
/// logarithmic negativity and bookkeeping.
#[derive(Debug, Clone)]
pub struct EntanglementResult {
    /// Sorted (ascending) symplectic spectrum, one value per mode pair.
    pub symplectic_spectrum: Vec<f64>,
    /// E_N = max(-sum ln lambda_k over lambda_k < 1, 0).
    pub e_n: f64,
    /// Number of eigenvalues strictly below 1.
    pub below_unity_count: usize,
    /// Grid/iteration metadata: (bins, horizon, e_n) per refinement level.
    pub convergence_trace: Vec<(usize, f64, f64)>,
    /// Whether the refinement met its stop tolerance (true for closed-form
    /// and semi-analytic paths).
    pub converged: bool,
}

impl EntanglementResult {
    pub fn min_symplectic(&self) -> f64 {
        self.symplectic_spectrum.first().copied().unwrap_or(f64::NAN)
    }
}

impl CovarianceMatrix {
    /// Wrap a symmetric matrix of even dimension.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n || n % 2 != 0 || n == 0 {
            return Err(Error::Structural(format!(
                "covariance must be square with even dimension, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        let mut scale = 0.0f64;
        for v in entries.iter() {
            if !v.is_finite() {
                return Err(Error::Structural("covariance has non-finite entries".into()));
            }
            scale = scale.max(v.abs());
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL * scale.max(1.0) {
                    return Err(Error::Structural(format!(
                        "asymmetry at ({i},{j}): {} vs {}",
                        entries[(i, j)],
                        entries[(j, i)]
                    )));
                }
            }
        }
        Ok(CovarianceMatrix { dim_modes: n / 2, entries })
    }

    pub fn vacuum(modes: usize) -> Self {
        CovarianceMatrix { dim_modes: modes, entries: Array2::eye(2 * modes) }
    }

    pub fn dim_modes(&self) -> usize {
        self.dim_modes
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    /// Per-mode symplectic scaling diag(s, 1/s) — a local squeeze that
    /// leaves the symplectic spectrum invariant. Used to balance dynamic
    /// range before eigenvalue extraction.
    fn balanced(&self) -> Array2<f64> {
        let n = 2 * self.dim_modes;
        let mut scales = vec![1.0f64; n];
        for k in 0..self.dim_modes {
            let vq = self.entries[(2 * k, 2 * k)].max(1e-300);
            let vp = self.entries[(2 * k + 1, 2 * k + 1)].max(1e-300);
            let s = (vp / vq).powf(0.25);
            scales[2 * k] = s;
            scales[2 * k + 1] = 1.0 / s;
        }
        let mut out = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= scales[i] * scales[j];
            }
        }
        out
    }
}

/// Moduli of the eigenvalues of the commutator-weighted covariance, scaled
/// so the vacuum gives all ones; one value per pair, ascending.
///
/// Route: V = S^2 with S symmetric PSD, then the spectrum of J V equals the
/// spectrum of the antisymmetric S J S, recovered from the symmetric
/// -(S J S)^2 whose eigenvalues are the squared symplectic eigenvalues in
/// exactly degenerate pairs.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    let m = v.dim_modes;
    let n = 2 * m;
    let bal = v.balanced();
    let (w, q) = linalg::eigh(&bal)?;
    let scale = w.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut wc = w;
    for x in wc.iter_mut() {
        // discretization can leave tiny negative eigenvalues
        if *x < 0.0 {
            if *x < -1e-8 * scale.max(1.0) {
                return Err(Error::Structural(format!(
                    "covariance far from PSD: min eigenvalue {x}"
                )));
            }
            *x = 0.0;
        }
    }
    // S = Q sqrt(w) Q^T
    let mut qs = q.clone();
    for j in 0..n {
        let r = wc[j].sqrt();
        for i in 0..n {
            qs[(i, j)] *= r;
        }
    }
    let s = linalg::matmul(&qs, &q.t().to_owned());
    // W = S J S, J interleaved
    let mut sj = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for k in 0..m {
            // (S J)[i, 2k] = -S[i, 2k+1]; (S J)[i, 2k+1] = S[i, 2k]
            sj[(i, 2 * k)] = -s[(i, 2 * k + 1)];
            sj[(i, 2 * k + 1)] = s[(i, 2 * k)];
        }
    }
    let w_mat = linalg::matmul(&sj, &s);
    // M = -W W = W^T W  (W antisymmetric)
    let m_mat = linalg::matmul(&w_mat.t().to_owned(), &w_mat);
    let lam2 = linalg::eigh_values(&m_mat)?;
    let mut lam: Vec<f64> = lam2.iter().map(|&x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // moduli occur in equal pairs; report one per pair
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let (a, b) = (lam[2 * k], lam[2 * k + 1]);
        if (a - b).abs() > PAIRING_TOL * (1.0 + a.abs()) + 1e-7 * scale {
            return Err(Error::Degenerate(format!(
                "symplectic spectrum pairing violated: {a} vs {b}"
            )));
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Partial transpose: flip the sign of every p row and column of the
/// selected modes.
pub fn partial_transpose(v: &CovarianceMatrix, subset: &[usize]) -> Result<CovarianceMatrix> {
    if subset.is_empty() {
        return Err(Error::Structural("partial transpose of empty subset".into()));
    }
    let m = v.dim_modes;
    for &k in subset {
        if k >= m {
            return Err(Error::Structural(format!("mode index {k} out of range (M = {m})")));
        }
    }
    let n = 2 * m;
    let mut signs = vec![1.0f64; n];
    for &k in subset {
        signs[2 * k + 1] = -1.0;
    }
    let mut out = v.entries.clone();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= signs[i] * signs[j];
        }
    }
    Ok(CovarianceMatrix { dim_modes: m, entries: out })
}

/// Logarithmic negativity across the given partition.
pub fn log_negativity(v: &CovarianceMatrix, partition: &[usize]) -> Result<EntanglementResult> {
    let vpt = partial_transpose(v, partition)?;
    let spectrum = symplectic_eigenvalues(&vpt)?;
    Ok(entanglement_from_spectrum(spectrum))
}

/// Eigenvalues closer to unity than this are treated as sitting on the
/// separability threshold (roundoff of exactly-vacuum modes).
pub const UNITY_COUNT_TOL: f64 = 1e-9;

/// Assemble an [`EntanglementResult`] from a PT symplectic spectrum.
pub fn entanglement_from_spectrum(mut spectrum: Vec<f64>) -> EntanglementResult {
    spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let below: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|&l| l < 1.0 - UNITY_COUNT_TOL)
        .collect();
    let e_n = (-below.iter().map(|l| l.ln()).sum::<f64>()).max(0.0);
    EntanglementResult {
        e_n,
        below_unity_count: below.len(),
        symplectic_spectrum: spectrum,
        convergence_trace: Vec::new(),
        converged: true,
    }
}

/// Minimal PT symplectic eigenvalue of a two-mode state from the closed
/// 2x2-block form: nu = sqrt[(D - sqrt(D^2 - 4 det V)) / 2] with
/// D = det A + det B - 2 det C. Evaluated through the cancellation-free
/// variant 2 det V / (D + sqrt(D^2 - 4 det V)).
pub fn two_mode_min_symplectic(v: &CovarianceMatrix) -> Result<f64> {
    if v.dim_modes != 2 {
        return Err(Error::Structural(format!(
            "two_mode_min_symplectic needs M = 2, got {}",
            v.dim_modes
        )));
    }
    let e = v.balanced();
    let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
    let da = det2(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let db = det2(e[(2, 2)], e[(2, 3)], e[(3, 2)], e[(3, 3)]);
    let dc = det2(e[(0, 2)], e[(0, 3)], e[(1, 2)], e[(1, 3)]);
    let dv = det4(&e);
    let dt = da + db - 2.0 * dc;
    let disc = dt * dt - 4.0 * dv;
    let scale = (dt * dt).max(1.0);
    if disc < -1e-10 * scale {
        return Err(Error::Degenerate(format!(
            "negative discriminant in two-mode spectrum: {disc}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let nu2 = if dt + root > 0.0 { 2.0 * dv / (dt + root) } else { 0.0 };
    if nu2 < 0.0 {
        return Err(Error::Degenerate(format!("negative squared eigenvalue {nu2}")));
    }
    let nu = nu2.sqrt();
    // round a pure-roundoff deficit back onto the separability threshold
    Ok(if (nu - 1.0).abs() < 1e-14 { 1.0 } else { nu })
}

fn det4(m: &Array2<f64>) -> f64 {
    // cofactor expansion along the first row; fine at 4x4 after balancing
    let minor = |r: usize, c: usize| -> f64 {
        let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let a = |i: usize, j: usize| m[(rows[i], cols[j])];
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    (0..4).fold(0.0, |acc, c| {
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        acc + sign * m[(0, c)] * minor(0, c)
    })
}

/// Physicality check: min symplectic eigenvalue >= 1 - tol. Returns the
/// verdict and the margin (min lambda - 1).
pub fn check_physicality(v: &CovarianceMatrix, tol: f64) -> Result<(bool, f64)> {
    let spec = symplectic_eigenvalues(v)?;
    let min = spec.first().copied().unwrap_or(f64::NAN);
    Ok((min >= 1.0 - tol, min - 1.0))
}

/// Apply a per-mode rotation-times-squeeze local symplectic transform
/// (test utility for invariance properties).
pub fn apply_local_symplectic(
    v: &CovarianceMatrix,
    ops: &[(f64, f64)], // (rotation angle, squeeze parameter) per mode
) -> Result<CovarianceMatrix> {
    let m = v.dim_modes;
    if ops.len() != m {
        return Err(Error::Structural("one (angle, squeeze) pair per mode required".into()));
    }
    let n = 2 * m;
    let mut s = Array2::<f64>::zeros((n, n));
    for (k, &(theta, r)) in ops.iter().enumerate() {
        let (c, sn) = (theta.cos(), theta.sin());
        let (ep, em) = (r.exp(), (-r).exp());
        // squeeze then rotate
        let block = [[c * ep, -sn * em], [sn * ep, c * em]];
        for i in 0..2 {
            for j in 0..2 {
                s[(2 * k + i, 2 * k + j)] = block[i][j];
            }
        }
    }
    let vs = linalg::matmul(&linalg::matmul(&s.t().to_owned(), &v.entries), &s);
    // symmetrize away roundoff
    let vs = 0.5 * (&vs + &vs.t());
    CovarianceMatrix::new(vs)
}

/// Two-mode squeezed covariance with parameter r (test fixture).
pub fn two_mode_squeezed(r: f64) -> CovarianceMatrix {
    let ch = (2.0 * r).cosh();
    let sh = (2.0 * r).sinh();
    let mut e = Array2::<f64>::eye(4);
    e *= ch;
    e[(0, 2)] = sh;
    e[(2, 0)] = sh;
    e[(1, 3)] = -sh;
    e[(3, 1)] = -sh;
    CovarianceMatrix::new(e).expect("valid TMS covariance")
}
