//! Base CS-MRI inversion algorithms.
//!
//! Every solver maps a [`Measurement`] and a [`SolverConfig`] to an image.
//! The [`Solver`] trait is the extension point used by the subspace
//! framework; [`SolverKind`] covers the built-in methods.

mod haar;
mod proximal;
mod tv;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::Band;
use crate::grid::{fft2, ifft2, ComplexImage};
use crate::sampling::{apply_mask, zero_fill, Measurement};

pub use haar::{haar_forward, haar_inverse, HaarCoefficients};
pub use proximal::{fcsa, fista_l1, objective};
pub use tv::{complex_total_variation, total_variation, tv_denoise, tv_prox};

/// Parameters shared by the iterative solvers.
///
/// The objective is `(mu/2)‖F_u x − y‖² + alpha·TV(x) + beta·‖Φx‖₁` with `Φ`
/// the orthonormal Haar transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub outer_iters: usize,
    pub tv_inner_iters: usize,
    pub wavelet_levels: usize,
    /// Gradient step; `1/mu` is the largest step with guaranteed descent.
    pub step: f64,
    /// Stop once the relative change between iterates falls to this value.
    pub tol: f64,
    /// Share of the TV sub-problem when both penalties are active.
    pub tv_share: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: 2.0,
            alpha: 0.002,
            beta: 0.002,
            outer_iters: 200,
            tv_inner_iters: 10,
            wavelet_levels: 4,
            step: 0.5,
            tol: 1e-5,
            tv_share: 0.5,
        }
    }
}

impl SolverConfig {
    /// Defaults for a subspace: high-frequency bands use a stronger TV weight.
    pub fn for_band(band: Band) -> Self {
        match band {
            Band::High => Self {
                alpha: 0.003,
                beta: 0.001,
                ..Self::default()
            },
            Band::Low | Band::Full => Self::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !positive(self.mu) {
            return Err(Error::invalid("mu", format!("must be > 0, got {}", self.mu)));
        }
        if !non_negative(self.alpha) {
            return Err(Error::invalid("alpha", format!("must be >= 0, got {}", self.alpha)));
        }
        if !non_negative(self.beta) {
            return Err(Error::invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        if self.outer_iters == 0 {
            return Err(Error::invalid("outer_iters", "must be positive"));
        }
        if self.tv_inner_iters == 0 {
            return Err(Error::invalid("tv_inner_iters", "must be positive"));
        }
        if self.wavelet_levels == 0 {
            return Err(Error::invalid("wavelet_levels", "must be positive"));
        }
        if !(positive(self.step) && self.step <= 1.0) {
            return Err(Error::invalid("step", format!("must lie in (0, 1], got {}", self.step)));
        }
        if !non_negative(self.tol) {
            return Err(Error::invalid("tol", format!("must be >= 0, got {}", self.tol)));
        }
        if !(self.tv_share > 0.0 && self.tv_share < 1.0) {
            return Err(Error::invalid(
                "tv_share",
                format!("must lie in (0, 1), got {}", self.tv_share),
            ));
        }
        Ok(())
    }
}

/// Per-iteration record of an iterative solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// Objective of the initializer followed by one value per iteration.
    pub objective: Vec<f64>,
    pub final_relative_change: f64,
    pub iterations: usize,
    /// Index into `objective` of the returned iterate.
    pub best_index: usize,
}

impl SolveTrace {
    pub fn best_objective(&self) -> Option<f64> {
        self.objective.get(self.best_index).copied()
    }
}

/// A CS-MRI reconstruction algorithm.
pub trait Solver: Sync {
    fn name(&self) -> &str;

    fn solve(&self, meas: &Measurement, cfg: &SolverConfig) -> Result<(ComplexImage, SolveTrace)>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ZeroFill,
    FistaL1,
    Fcsa,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::ZeroFill => "zero_fill",
            SolverKind::FistaL1 => "fista_l1",
            SolverKind::Fcsa => "fcsa",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_fill" => Ok(SolverKind::ZeroFill),
            "fista_l1" => Ok(SolverKind::FistaL1),
            "fcsa" => Ok(SolverKind::Fcsa),
            other => Err(Error::invalid("solver", format!("unknown solver `{other}`"))),
        }
    }
}

impl Solver for SolverKind {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn solve(&self, meas: &Measurement, cfg: &SolverConfig) -> Result<(ComplexImage, SolveTrace)> {
        match self {
            SolverKind::ZeroFill => {
                let x = zero_fill_solver(meas)?;
                let trace = SolveTrace {
                    objective: vec![objective(
                        &x,
                        meas,
                        &SolverConfig {
                            alpha: 0.0,
                            beta: 0.0,
                            ..*cfg
                        },
                    )?],
                    ..SolveTrace::default()
                };
                Ok((x, trace))
            }
            SolverKind::FistaL1 => fista_l1(meas, cfg),
            SolverKind::Fcsa => fcsa(meas, cfg),
        }
    }
}

/// Baseline reconstruction: the adjoint applied to the zero-filled data.
pub fn zero_fill_solver(meas: &Measurement) -> Result<ComplexImage> {
    zero_fill(meas)
}

/// Complex soft threshold: shrinks the magnitude by `tau`, keeping the phase.
pub fn soft_threshold(v: Complex64, tau: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        v * (1.0 - tau / mag)
    }
}

/// Real soft threshold.
#[inline]
pub fn soft_threshold_real(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// `(mu/2)‖M ⊙ F x − y‖²`.
pub fn data_fidelity(x: &ComplexImage, meas: &Measurement, mu: f64) -> Result<f64> {
    let residual = data_residual(x, meas)?;
    Ok(0.5 * mu * residual.energy())
}

/// `M ⊙ F x − y` in k-space.
pub fn data_residual(x: &ComplexImage, meas: &Measurement) -> Result<crate::grid::Spectrum> {
    x.ensure_same_side(meas.n())?;
    let mut fx = fft2(x)?;
    apply_mask(&mut fx, meas.mask());
    fx.sub(meas.spec())
}

/// Gradient of [`data_fidelity`] with respect to `(Re x, Im x)`: `mu · F_uᴴ(F_u x − y)`.
pub fn data_gradient(x: &ComplexImage, meas: &Measurement, mu: f64) -> Result<ComplexImage> {
    let residual = data_residual(x, meas)?;
    let mut g = ifft2(&residual)?;
    g.scale(mu);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling::{generate_mask, undersample, MaskKind, SamplingMask};

    fn random(n: usize, seed: u64) -> ComplexImage {
        let mut rng = SplitMix64::new(seed);
        ComplexImage::from_fn(n, |_, _| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        assert!((soft_threshold(Complex64::new(0.5, 0.0), 0.2) - Complex64::new(0.3, 0.0)).norm() < 1e-15);
        assert_eq!(soft_threshold(Complex64::new(0.1, 0.0), 0.2), Complex64::new(0.0, 0.0));
        assert!((soft_threshold(Complex64::new(3.0, 4.0), 2.5) - Complex64::new(1.5, 2.0)).norm() < 1e-15);
        assert_eq!(soft_threshold_real(-0.5, 0.2), -0.3);
        assert_eq!(soft_threshold_real(0.15, 0.2), 0.0);
    }

    #[test]
    fn zero_fill_solver_cases() {
        let x = random(16, 1);
        let full = SamplingMask::full(16, MaskKind::Random2d).unwrap();
        let rec = zero_fill_solver(&undersample(&x, &full).unwrap()).unwrap();
        assert!(rec.relative_error(&x) <= 1e-12);

        let c = ComplexImage::from_fn(8, |_, _| Complex64::new(0.3, 0.0)).unwrap();
        let dc = SamplingMask::dc_only(8, MaskKind::Random2d).unwrap();
        let rec = zero_fill_solver(&undersample(&c, &dc).unwrap()).unwrap();
        assert!(rec.relative_error(&c) <= 1e-12);

        let mask = generate_mask(MaskKind::Random2d, 0.3, 16, 4).unwrap();
        let meas = undersample(&x, &mask).unwrap();
        let rec = zero_fill_solver(&meas).unwrap();
        let again = undersample(&rec, &mask).unwrap();
        assert!(again.spec().relative_error(meas.spec()) <= 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let n = 8;
        for seed in 0..3 {
            let mask = generate_mask(MaskKind::Random2d, 0.5, n, seed).unwrap();
            let meas = undersample(&random(n, 100 + seed), &mask).unwrap();
            let x = random(n, 200 + seed);
            let mu = 2.0;
            let g = data_gradient(&x, &meas, mu).unwrap();
            // Central differences are exact on a quadratic; a wide step only limits round-off.
            let h = 1e-3;
            let mut max_rel: f64 = 0.0;
            for k in 0..n * n {
                for imag in [false, true] {
                    let bump = if imag {
                        Complex64::new(0.0, h)
                    } else {
                        Complex64::new(h, 0.0)
                    };
                    let mut plus = x.clone();
                    plus.data_mut()[k] += bump;
                    let mut minus = x.clone();
                    minus.data_mut()[k] -= bump;
                    let fd = (data_fidelity(&plus, &meas, mu).unwrap() - data_fidelity(&minus, &meas, mu).unwrap())
                        / (2.0 * h);
                    let analytic = if imag { g.data()[k].im } else { g.data()[k].re };
                    max_rel = max_rel.max((fd - analytic).abs() / analytic.abs().max(1e-3));
                }
            }
            assert!(max_rel <= 1e-6, "max relative error {max_rel}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig {
            mu: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            step: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            alpha: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            outer_iters: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let high = SolverConfig::for_band(Band::High);
        assert_eq!((high.mu, high.alpha, high.beta), (2.0, 0.003, 0.001));
        let low = SolverConfig::for_band(Band::Low);
        assert_eq!((low.mu, low.alpha, low.beta), (2.0, 0.002, 0.002));
    }
}
