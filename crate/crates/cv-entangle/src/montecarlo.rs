//! Independent stochastic validation: Euler-Maruyama integration of the
//! Langevin dynamics and the output relation with white noise, ensemble
//! covariance estimation, and element-wise comparison against the analytic
//! construction.
//!
//! Classical-moment correspondence: for Gaussian linear dynamics the
//! symmetrized quantum moments obey the same equations as classical
//! covariances with the stated noise strengths, so the Monte-Carlo estimate
//! must converge to the analytic covariance at rate 1/sqrt(n_traj).
//! Commutator structure is exact by construction and never estimated.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{build_grid_covariance, GridSpec};
use crate::params::SystemParams;

/// Integrator and ensemble configuration.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    /// Integrator step; dt * max(omega_m, gamma_m) <= 0.01.
    pub dt: f64,
    /// Burn-in duration; >= 10 / gamma_m.
    pub t_relax: f64,
    /// Ensemble size; >= 1000.
    pub n_traj: usize,
    /// Master seed; trajectory i uses counter-based substream i.
    pub seed: u64,
    /// Output-field bin duration (matches the grid engine bin width).
    pub bin_width: f64,
    /// Retained past-field duration.
    pub horizon: f64,
}

impl SimConfig {
    pub fn validate(&self, p: &SystemParams) -> Result<()> {
        if self.dt * p.omega_m.max(p.gamma_m) > 0.01 + 1e-12 {
            return Err(Error::Config(format!(
                "dt = {} violates dt * max(omega_m, gamma_m) <= 0.01",
                self.dt
            )));
        }
        if self.t_relax < 10.0 / p.gamma_m {
            return Err(Error::Config(format!(
                "t_relax = {} below 10/gamma_m = {}",
                self.t_relax,
                10.0 / p.gamma_m
            )));
        }
        if self.n_traj < 1000 {
            return Err(Error::Config(format!("n_traj = {} below 1000", self.n_traj)));
        }
        let bins = self.horizon / self.bin_width;
        if (bins - bins.round()).abs() > 1e-9 || bins < 1.0 {
            return Err(Error::Config(
                "horizon must be an integer number of bins".into(),
            ));
        }
        let steps = self.bin_width / self.dt;
        if (steps - steps.round()).abs() > 1e-9 || steps < 1.0 {
            return Err(Error::Config(
                "bin_width must be an integer number of steps".into(),
            ));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        (self.horizon / self.bin_width).round() as usize
    }
}

/// One trajectory: oscillator quadratures at t = 0 plus binned field
/// quadratures over the window, most recent bin first.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub x1: f64,
    pub x2: f64,
    pub bins_x: Vec<f64>,
    pub bins_y: Vec<f64>,
}

impl TrajectorySample {
    /// Flatten to the grid ordering [x, p, X_0, Y_0, ...].
    pub fn to_vector(&self) -> Vec<f64> {
        let n = self.bins_x.len();
        let mut v = Vec::with_capacity(2 + 2 * n);
        v.push(self.x1);
        v.push(self.x2);
        for j in 0..n {
            v.push(self.bins_x[j]);
            v.push(self.bins_y[j]);
        }
        v
    }
}

/// Integrate one trajectory on the given counter-based substream.
///
/// Semi-implicit Euler-Maruyama: the momentum update precedes the position
/// update, which keeps the map contractive for oscillatory dynamics at any
/// dt * omega_m < 1. The same amplitude-noise increment drives the force
/// and the b1 record within a step.
pub fn simulate_trajectory(p: &SystemParams, cfg: &SimConfig, stream: u64) -> Result<TrajectorySample> {
    cfg.validate(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let (w, g) = (p.omega_m, p.gamma_m);
    let w02 = p.omega0_sq();
    let a_f = p.force_amp();
    let a_r = p.readout_gain();
    let sf_sqrt = p.s_thermal().sqrt();
    let dt = cfg.dt;
    let sdt = dt.sqrt();

    // exact stationary draw; the burn-in then only exercises the integrator
    let mut x = p.var_x_phys().sqrt() * rng.sample::<f64, _>(StandardNormal);
    let mut pv = p.var_p_phys().sqrt() * rng.sample::<f64, _>(StandardNormal);

    let relax_steps = (cfg.t_relax / dt).round() as usize;
    for _ in 0..relax_steps {
        let n1: f64 = rng.sample(StandardNormal);
        let n3: f64 = rng.sample(StandardNormal);
        pv += (-w02 * x - 2.0 * g * pv) * dt + a_f * sdt * n1 + sf_sqrt * sdt * n3;
        x += pv * dt;
    }

    let nbins = cfg.bins();
    let steps_per_bin = (cfg.bin_width / dt).round() as usize;
    let mut bins_x = vec![0.0f64; nbins];
    let mut bins_y = vec![0.0f64; nbins];
    for b in 0..nbins {
        for _ in 0..steps_per_bin {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            let n3: f64 = rng.sample(StandardNormal);
            // record the outgoing field before the state advances
            bins_x[b] += sdt * n1;
            bins_y[b] += sdt * n2 + a_r * x * dt;
            pv += (-w02 * x - 2.0 * g * pv) * dt + a_f * sdt * n1 + sf_sqrt * sdt * n3;
            x += pv * dt;
        }
    }
    // normalize bins and order by age (most recent first)
    let sbw = cfg.bin_width.sqrt();
    bins_x.reverse();
    bins_y.reverse();
    for v in bins_x.iter_mut().chain(bins_y.iter_mut()) {
        *v /= sbw;
    }
    Ok(TrajectorySample {
        x1: x * (2.0 * w).sqrt(),
        x2: pv * (2.0 / w).sqrt(),
        bins_x,
        bins_y,
    })
}

/// Ensemble covariance estimate with per-entry standard errors.
#[derive(Debug, Clone)]
pub struct CovEstimate {
    pub mean: Array2<f64>,
    pub std_err: Array2<f64>,
    pub n_traj: usize,
}

/// Estimate the symmetrized second moments over the ensemble. Trajectories
/// run in fixed chunks whose partial sums are reduced in chunk order, so
/// the result is reproducible for a given (seed, cfg) independent of the
/// thread count.
pub fn estimate_covariance(p: &SystemParams, cfg: &SimConfig) -> Result<CovEstimate> {
    cfg.validate(p)?;
    let dim = 2 + 2 * cfg.bins();
    const CHUNK: usize = 64;
    let nchunks = cfg.n_traj.div_ceil(CHUNK);

    let partials: Vec<Result<(Array2<f64>, Array2<f64>)>> = (0..nchunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(cfg.n_traj);
            let mut acc = Array2::<f64>::zeros((dim, dim));
            let mut acc2 = Array2::<f64>::zeros((dim, dim));
            for t in lo..hi {
                let s = simulate_trajectory(p, cfg, t as u64)?;
                let v = s.to_vector();
                for i in 0..dim {
                    for j in 0..dim {
                        let w = v[i] * v[j];
                        acc[(i, j)] += w;
                        acc2[(i, j)] += w * w;
                    }
                }
            }
            Ok((acc, acc2))
        })
        .collect();

    let mut sum = Array2::<f64>::zeros((dim, dim));
    let mut sum2 = Array2::<f64>::zeros((dim, dim));
    for part in partials {
        let (a, a2) = part?;
        sum += &a;
        sum2 += &a2;
    }
    let n = cfg.n_traj as f64;
    let mean = &sum / n;
    // jackknife variance of a sample mean reduces to s^2 / n
    let var = (&sum2 / n - &mean * &mean) / (n - 1.0);
    let std_err = var.mapv(|v| v.max(0.0).sqrt());
    Ok(CovEstimate { mean, std_err, n_traj: cfg.n_traj })
}

/// Element-wise comparison report of the Monte-Carlo estimate against a
/// reference covariance.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub n_entries: usize,
    pub within_5se: usize,
    pub fraction_within: f64,
    pub max_z: f64,
    pub pass: bool,
}

impl ValidationReport {
    fn from_z(zs: &[f64]) -> Self {
        let n = zs.len();
        let within = zs.iter().filter(|z| z.abs() < 5.0).count();
        let frac = within as f64 / n as f64;
        ValidationReport {
            n_entries: n,
            within_5se: within,
            fraction_within: frac,
            max_z: zs.iter().fold(0.0f64, |a, &b| a.max(b.abs())),
            pass: frac >= 0.99,
        }
    }
}

/// Compare an estimate against a reference covariance matrix.
pub fn compare(estimate: &CovEstimate, reference: &Array2<f64>) -> ValidationReport {
    let dim = estimate.mean.nrows();
    let mut zs = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let se = estimate.std_err[(i, j)].max(1e-300);
            zs.push((estimate.mean[(i, j)] - reference[(i, j)]) / se);
        }
    }
    ValidationReport::from_z(&zs)
}

/// Run the full validation: estimate the covariance and compare against the
/// analytic grid construction at the matching discretization.
pub fn validate(p: &SystemParams, cfg: &SimConfig) -> Result<ValidationReport> {
    let est = estimate_covariance(p, cfg)?;
    let spec = GridSpec::new(cfg.horizon, cfg.bins(), p)?;
    let reference = build_grid_covariance(p, &spec)?;
    Ok(compare(&est, reference.entries()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, Thermal};

    fn cfg_for(p: &SystemParams, n_traj: usize, horizon: f64, bin_width: f64) -> SimConfig {
        SimConfig {
            dt: 0.01 / p.omega_m.max(p.gamma_m),
            t_relax: 10.0 / p.gamma_m,
            n_traj,
            seed: 0xC0FFEE,
            bin_width,
            horizon,
        }
    }

    #[test]
    fn config_invariants_enforced() {
        let p = build_params(1.0, 10.0, 0.1, Thermal::NTh(1.0)).unwrap();
        let good = cfg_for(&p, 1000, 10.0, 0.1);
        assert!(good.validate(&p).is_ok());
        assert!(SimConfig { dt: 0.5, ..good }.validate(&p).is_err());
        assert!(SimConfig { t_relax: 1.0, ..good }.validate(&p).is_err());
        assert!(SimConfig { n_traj: 10, ..good }.validate(&p).is_err());
    }

    #[test]
    fn seed_determinism() {
        let p = build_params(1.0, 10.0, 0.2, Thermal::NTh(2.0)).unwrap();
        let cfg = cfg_for(&p, 1000, 5.0, 0.1);
        let a = simulate_trajectory(&p, &cfg, 7).unwrap();
        let b = simulate_trajectory(&p, &cfg, 7).unwrap();
        assert_eq!(a.to_vector(), b.to_vector());
        let c = simulate_trajectory(&p, &cfg, 8).unwrap();
        assert_ne!(a.to_vector(), c.to_vector());
    }

    #[test]
    fn ground_state_variance() {
        // Omega_q = 0, n_th = 0: Var(X2) -> 1 within statistical error
        let p = build_params(1.0, 8.0, 0.0, Thermal::NTh(0.0)).unwrap();
        let cfg = cfg_for(&p, 3000, 2.0, 0.5);
        let est = estimate_covariance(&p, &cfg).unwrap();
        let z = (est.mean[(1, 1)] - 1.0) / est.std_err[(1, 1)];
        assert!(z.abs() < 5.0, "Var(X2) = {} (z = {z})", est.mean[(1, 1)]);
    }

    #[test]
    fn hot_bath_equipartition() {
        // n_th = 100: Var(X2) = 201 exactly at any Q
        let p = build_params(1.0, 8.0, 0.0, Thermal::NTh(100.0)).unwrap();
        let cfg = cfg_for(&p, 4000, 2.0, 0.5);
        let est = estimate_covariance(&p, &cfg).unwrap();
        let z = (est.mean[(1, 1)] - 201.0) / est.std_err[(1, 1)];
        assert!(z.abs() < 5.0, "Var(X2) = {} (z = {z})", est.mean[(1, 1)]);
    }

    #[test]
    fn validate_against_grid_and_detect_corruption() {
        let p = build_params(1.0, 8.0, 0.3, Thermal::OmegaF(0.3)).unwrap();
        let cfg = cfg_for(&p, 8000, 2.0, 0.1);
        let est = estimate_covariance(&p, &cfg).unwrap();
        let spec = GridSpec::new(cfg.horizon, cfg.bins(), &p).unwrap();
        let reference = build_grid_covariance(&p, &spec).unwrap();
        let report = compare(&est, reference.entries());
        assert!(
            report.pass,
            "fraction within 5 SE = {}, max z = {}",
            report.fraction_within, report.max_z
        );
        // detector sensitivity: a mis-derived cross kernel (50 percent off)
        // must push more than 1 percent of the entries outside 5 SE
        let mut bad = reference.entries().clone();
        let dim = bad.nrows();
        for i in 0..2 {
            for j in 2..dim {
                bad[(i, j)] *= 1.5;
                bad[(j, i)] = bad[(i, j)];
            }
        }
        let report = compare(&est, &bad);
        assert!(!report.pass, "corrupted kernel not detected");
    }
}
