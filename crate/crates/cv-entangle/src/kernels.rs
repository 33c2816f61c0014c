//! Closed-form stationary correlation functions of the oscillator and the
//! outgoing field: the oscillator block, the oscillator-field cross
//! functions, and the two-time field kernels, all as finite sums of
//! decaying exponential-cosine terms.
//!
//! Math note — conventions used throughout. Time is carried as the age
//! u = -t >= 0 of the field relative to the reference instant t = 0, so
//! every kernel decays in u. In hbar = m = 1 units:
//!
//! - position response   Gx(u) = e^{-gamma u} sin(omega_m u)/omega_m,
//!   Fourier transform 1/(omega_m^2 + gamma^2 - W^2 - 2 i gamma W)
//!   (poles at +-omega_m - i gamma);
//! - the oscillator obeys xddot + 2 gamma xdot + (omega_m^2 + gamma^2) x = F
//!   with white force F of spectral density S = a_f^2 + 2 Omega_F^2;
//! - stationary autocorrelation
//!   Cxx(u) = vx e^{-gamma u} [cos(omega_m u) + (gamma/omega_m) sin(omega_m u)],
//!   vx = S / (4 gamma (omega_m^2 + gamma^2));
//! - oscillator quadratures are normalized as X1 = x sqrt(2 omega_m),
//!   X2 = p sqrt(2/omega_m); field quadratures carry unit vacuum spectrum
//!   against the commutator 2 i delta, so bins of width dt with 1/sqrt(dt)
//!   scaling are exactly canonical.
//!
//! Cross functions (b1 carries the force record with amplitude a_f, b2 the
//! position record with gain a_r):
//!   <X1 b1(u)> = sqrt(2 w) a_f Gx(u)        <X1 b2(u)> = sqrt(2 w) a_r Cxx(u)
//!   <X2 b1(u)> = sqrt(2/w) a_f Gx'(u)       <X2 b2(u)> = sqrt(2/w) a_r Cxx'(u)
//! with Cxx'(u) = -(omega_m^2 + gamma^2) vx Gx(u). Field kernels:
//!   B11 = delta,  B12(u, u') = a_f a_r Gx(u - u') Theta(u - u'),
//!   B22 = delta + a_r^2 Cxx(|u - u'|).

use ndarray::{arr2, Array2};

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::params::SystemParams;

/// Green's function of the oscillator position, t >= 0.
pub fn greens_function(p: &SystemParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("greens_function needs t >= 0, got {t}")));
    }
    Ok((-p.gamma_m * t).exp() * (p.omega_m * t).sin() / p.omega_m)
}

/// The position response as an exponential sum in the age variable.
pub fn gx_expsum(p: &SystemParams) -> ExpSum {
    ExpSum::damped_cosine(
        1.0 / p.omega_m,
        p.gamma_m,
        p.omega_m,
        -std::f64::consts::FRAC_PI_2,
    )
}

/// Stationary position autocorrelation Cxx(u), u >= 0, physical units.
pub fn cxx_expsum(p: &SystemParams) -> ExpSum {
    let vx = p.var_x_phys();
    let go = p.gamma_m / p.omega_m;
    let amp = vx * (1.0 + go * go).sqrt();
    let phase = -go.atan();
    ExpSum::damped_cosine(amp, p.gamma_m, p.omega_m, phase)
}

/// Oscillator 2x2 stationary covariance in zero-point units; the
/// symmetrized <xp> vanishes at stationarity.
pub fn osc_steady_covariance(p: &SystemParams) -> Array2<f64> {
    let a11 = 2.0 * p.omega_m * p.var_x_phys();
    let a22 = 2.0 / p.omega_m * p.var_p_phys();
    arr2(&[[a11, 0.0], [0.0, a22]])
}

/// Cross-correlation functions <X_i b_j(.)> as exponential sums in the age
/// variable, indexed [i][j] over (X1, X2) x (b1, b2).
#[derive(Debug, Clone)]
pub struct CrossKernels {
    pub c: [[ExpSum; 2]; 2],
}

pub fn cross_kernels(p: &SystemParams) -> CrossKernels {
    let (w, a, b) = (p.omega_m, p.force_amp(), p.readout_gain());
    let s2w = (2.0 * w).sqrt();
    let s2ow = (2.0 / w).sqrt();
    let gx = gx_expsum(p);
    let cxx = cxx_expsum(p);
    let gxp = gx.derivative();
    CrossKernels {
        c: [
            [gx.scale_re(s2w * a), cxx.scale_re(s2w * b)],
            [gxp.scale_re(s2ow * a), gx.scale_re(-s2ow * b * p.omega0_sq() * p.var_x_phys())],
        ],
    }
}

/// Evaluate the 2x2 cross matrix <X_i b_j(t)> at a past time t <= 0.
pub fn cross_covariance(p: &SystemParams, t: f64) -> Result<Array2<f64>> {
    if t > 0.0 {
        return Err(Error::Domain(format!("cross_covariance needs t <= 0, got {t}")));
    }
    let ck = cross_kernels(p);
    let u = -t;
    Ok(arr2(&[
        [ck.c[0][0].eval_re(u), ck.c[0][1].eval_re(u)],
        [ck.c[1][0].eval_re(u), ck.c[1][1].eval_re(u)],
    ]))
}

/// The two-time field kernels: delta coefficients plus smooth exponential
/// sums. `b12_smooth` lives on the causal half s = u - u' > 0 (b1 older);
/// `b22_smooth` is a function of |u - u'|.
#[derive(Debug, Clone)]
pub struct FieldKernel {
    pub delta_b11: f64,
    pub delta_b22: f64,
    pub b12_smooth: ExpSum,
    pub b22_smooth: ExpSum,
}

pub fn field_kernel(p: &SystemParams) -> FieldKernel {
    let (a, b) = (p.force_amp(), p.readout_gain());
    FieldKernel {
        delta_b11: 1.0,
        delta_b22: 1.0,
        b12_smooth: gx_expsum(p).scale_re(a * b),
        b22_smooth: cxx_expsum(p).scale_re(b * b),
    }
}

/// Oscillator state used by the decoherence path: the 2x2 block plus the
/// cross functions toward the frozen past field.
#[derive(Debug, Clone)]
pub struct OscState {
    pub a_block: Array2<f64>,
    pub cross: CrossKernels,
}

pub fn osc_state(p: &SystemParams) -> OscState {
    OscState { a_block: osc_steady_covariance(p), cross: cross_kernels(p) }
}

/// Transition matrix of the freely damped oscillator over tau, in
/// normalized quadratures.
pub fn transition_matrix(p: &SystemParams, tau: f64) -> Array2<f64> {
    let (w, g) = (p.omega_m, p.gamma_m);
    let (c, s) = ((w * tau).cos(), (w * tau).sin());
    let e = (-g * tau).exp();
    let w02 = p.omega0_sq();
    arr2(&[
        [e * (c + g / w * s), e * s],
        [-e * (w02 / (w * w)) * s, e * (c - g / w * s)],
    ])
}

/// Thermal diffusion accumulated over tau with the coupling off, in
/// normalized quadratures: N(tau) = S_inf - Phi S_inf Phi^T where S_inf is
/// the thermal-only stationary covariance (exact for linear dynamics).
pub fn thermal_diffusion(p: &SystemParams, tau: f64) -> Array2<f64> {
    let sf = p.s_thermal();
    let vx = sf / (4.0 * p.gamma_m * p.omega0_sq());
    let vp = sf / (4.0 * p.gamma_m);
    let sinf = arr2(&[
        [2.0 * p.omega_m * vx, 0.0],
        [0.0, 2.0 / p.omega_m * vp],
    ]);
    let phi = transition_matrix(p, tau);
    let prop = phi.dot(&sinf).dot(&phi.t());
    &sinf - &prop
}

/// Free thermal evolution of the oscillator state for a duration tau:
/// A -> Phi A Phi^T + N(tau), cross functions -> Phi . cross.
pub fn propagate_free(p: &SystemParams, osc: &OscState, tau: f64) -> Result<OscState> {
    if tau < 0.0 {
        return Err(Error::Domain(format!("propagate_free needs tau >= 0, got {tau}")));
    }
    let phi = transition_matrix(p, tau);
    let a = phi.dot(&osc.a_block).dot(&phi.t()) + thermal_diffusion(p, tau);
    let a = 0.5 * (&a + &a.t());
    let old = &osc.cross.c;
    let row = |i: usize| -> [ExpSum; 2] {
        [
            old[0][0].scale_re(phi[(i, 0)]).add(&old[1][0].scale_re(phi[(i, 1)])),
            old[0][1].scale_re(phi[(i, 0)]).add(&old[1][1].scale_re(phi[(i, 1)])),
        ]
    };
    Ok(OscState { a_block: a, cross: CrossKernels { c: [row(0), row(1)] } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, Thermal};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn p_weak() -> SystemParams {
        build_params(1.0, 1e3, 0.02, Thermal::OmegaF(0.02)).unwrap()
    }

    #[test]
    fn greens_function_zeros_and_quarter_period() {
        let p = p_weak();
        assert_abs_diff_eq!(greens_function(&p, 0.0).unwrap(), 0.0);
        assert!(greens_function(&p, PI / p.omega_m).unwrap().abs() < 2e-3);
        // gamma -> 0 limit at a quarter period
        let p0 = build_params(1.0, 1e9, 0.0, Thermal::NTh(0.0)).unwrap();
        assert_abs_diff_eq!(
            greens_function(&p0, PI / 2.0).unwrap(),
            1.0,
            epsilon = 1e-8
        );
        assert!(greens_function(&p, -0.1).is_err());
    }

    #[test]
    fn steady_covariance_limits() {
        // ground-state bath, no coupling: identity up to O(1/Qm^2)
        let p = build_params(1.0, 1e3, 0.0, Thermal::NTh(0.0)).unwrap();
        let a = osc_steady_covariance(&p);
        assert_abs_diff_eq!(a[(1, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[(0, 0)], 1.0, epsilon = 1e-6); // 1/(4 Qm^2) correction
        assert_eq!(a[(0, 1)], 0.0);
        // hot bath equipartition
        let p = build_params(1.0, 1e3, 0.0, Thermal::NTh(100.0)).unwrap();
        let a = osc_steady_covariance(&p);
        assert_abs_diff_eq!(a[(1, 1)], 201.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a[(0, 0)], 201.0, epsilon = 201.0 * 1e-6);
    }

    /// Derived oracle: stationary variances against direct numerical
    /// frequency integrals of the rational spectrum
    /// S |Gx~(W)|^2 / (2 pi) and W^2-weighted for the momentum.
    #[test]
    fn steady_covariance_vs_spectral_integral() {
        let p = build_params(1.0, 50.0, 0.3, Thermal::OmegaF(0.4)).unwrap();
        let s = p.s_force();
        let w02 = p.omega0_sq();
        let g = p.gamma_m;
        let nsteps = 4_000_000;
        let wmax = 300.0;
        let h = 2.0 * wmax / nsteps as f64;
        let (mut ix, mut ip) = (0.0f64, 0.0f64);
        for i in 0..=nsteps {
            let w = -wmax + i as f64 * h;
            let den = (w02 - w * w).powi(2) + 4.0 * g * g * w * w;
            let wgt = if i == 0 || i == nsteps { 0.5 } else { 1.0 };
            ix += wgt * s / den;
            ip += wgt * s * w * w / den;
        }
        ix *= h / (2.0 * PI);
        ip *= h / (2.0 * PI);
        assert_abs_diff_eq!(ix, p.var_x_phys(), epsilon = 1e-6 * p.var_x_phys());
        assert_abs_diff_eq!(ip, p.var_p_phys(), epsilon = 1e-4 * p.var_p_phys());
    }

    #[test]
    fn cross_covariance_limits() {
        // no coupling: all cross terms vanish
        let p = build_params(1.0, 1e3, 0.0, Thermal::NTh(3.0)).unwrap();
        let c = cross_covariance(&p, -1.0).unwrap();
        assert!(c.iter().all(|x| x.abs() < 1e-15));
        // decay at rate gamma_m for t -> -inf
        let p = p_weak();
        let c1 = cross_covariance(&p, -10.0).unwrap();
        let c2 = cross_covariance(&p, -10.0 - 2.0 / p.gamma_m).unwrap();
        let n1: f64 = c1.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n2: f64 = c2.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(n2 < n1 * (-1.5f64).exp());
        assert!(cross_covariance(&p, 0.5).is_err());
    }

    #[test]
    fn field_kernel_structure() {
        // no coupling: pure vacuum kernel
        let p0 = build_params(1.0, 1e3, 0.0, Thermal::NTh(1.0)).unwrap();
        let k = field_kernel(&p0);
        assert_eq!(k.delta_b11, 1.0);
        assert!(k.b12_smooth.eval(0.7).norm() < 1e-15);
        assert!(k.b22_smooth.eval(0.7).norm() < 1e-15);
        // zero-lag diagonal of the smooth part equals a_r^2 Var(x)
        let p = p_weak();
        let k = field_kernel(&p);
        let expect = p.readout_gain().powi(2) * p.var_x_phys();
        assert_abs_diff_eq!(k.b22_smooth.eval_re(0.0), expect, epsilon = 1e-12 * expect);
        // causality of B12 is structural: the kernel is only ever evaluated
        // on the causal half; Cxx' vanishes at zero lag so B22 has no kink
        let cxx = cxx_expsum(&p);
        assert_abs_diff_eq!(cxx.derivative().eval_re(0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn propagate_free_identity_and_decay() {
        let p = build_params(1.0, 1e3, 0.1, Thermal::NTh(5.0)).unwrap();
        let s0 = osc_state(&p);
        let s1 = propagate_free(&p, &s0, 0.0).unwrap();
        for (a, b) in s0.a_block.iter().zip(s1.a_block.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        // long-time limit: thermal equilibrium, cross functions gone
        let s = propagate_free(&p, &s0, 40.0 / p.gamma_m).unwrap();
        let th = build_params(1.0, 1e3, 0.0, Thermal::NTh(5.0)).unwrap();
        let eq = osc_steady_covariance(&th);
        for (a, b) in s.a_block.iter().zip(eq.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8 * (1.0 + b.abs()));
        }
        assert!(s.cross.c[0][0].eval(1.0).norm() < 1e-12);
        assert!(propagate_free(&p, &s0, -1.0).is_err());
    }

    /// Derived oracle: N(tau) against direct numerical integration of the
    /// Lyapunov equation over [0, tau].
    #[test]
    fn diffusion_matches_lyapunov_integration() {
        let p = build_params(1.0, 30.0, 0.2, Thermal::NTh(2.0)).unwrap();
        let tau = 3.7;
        let nsteps = 400_000;
        let dt = tau / nsteps as f64;
        // normalized dynamics: d/dt (X1, X2) drift matrix
        let w = p.omega_m;
        let w02 = p.omega0_sq();
        let drift = arr2(&[[0.0, w], [-w02 / w, -2.0 * p.gamma_m]]);
        let sf = p.s_thermal();
        let noise = arr2(&[[0.0, 0.0], [0.0, sf * 2.0 / w]]);
        let mut n = Array2::<f64>::zeros((2, 2));
        for _ in 0..nsteps {
            let dn = drift.dot(&n) + n.dot(&drift.t()) + &noise;
            n = &n + &(dn * dt);
        }
        let closed = thermal_diffusion(&p, tau);
        for (a, b) in n.iter().zip(closed.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 2e-4 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn half_cycle_rotation_high_q() {
        // tau = pi/omega: rotation by half a cycle, negligible diffusion at
        // zero temperature and huge Qm
        let p = build_params(1.0, 1e7, 0.1, Thermal::NTh(0.0)).unwrap();
        let phi = transition_matrix(&p, PI / p.omega_m);
        assert_abs_diff_eq!(phi[(0, 0)], -1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(phi[(1, 1)], -1.0, epsilon = 1e-5);
        assert!(phi[(0, 1)].abs() < 1e-5);
        let n = thermal_diffusion(&p, PI / p.omega_m);
        assert!(n.iter().all(|x| x.abs() < 1e-5));
    }
}
