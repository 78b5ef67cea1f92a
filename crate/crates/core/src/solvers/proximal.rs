//! Accelerated proximal-gradient solvers.
//!
//! `fista_l1` and `fcsa` share one loop: a gradient step on the data term
//! from the extrapolated point, proximal maps for each active penalty,
//! and Nesterov momentum. FCSA solves the TV and wavelet sub-problems
//! independently from the same gradient point and averages them; with a
//! single active penalty the average collapses to that penalty's prox, so
//! `fcsa` with `alpha = 0` runs exactly the `fista_l1` iteration.

use num_complex::Complex64;

use super::haar::{haar_forward, haar_inverse};
use super::tv::{complex_total_variation, tv_prox};
use super::{data_fidelity, data_gradient, soft_threshold_real, SolveTrace, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::ComplexImage;
use crate::sampling::{zero_fill, Measurement};

const DIVERGENCE_LIMIT: f64 = 1e12;

/// Channel-wise `‖Φx‖₁` over all Haar coefficients.
fn wavelet_l1(x: &ComplexImage, levels: usize) -> Result<f64> {
    let c = haar_forward(x, levels)?;
    Ok(c.data().iter().map(|v| v.re.abs() + v.im.abs()).sum())
}

/// Full objective `(mu/2)‖F_u x − y‖² + alpha·TV(x) + beta·‖Φx‖₁`.
pub fn objective(x: &ComplexImage, meas: &Measurement, cfg: &SolverConfig) -> Result<f64> {
    let mut value = data_fidelity(x, meas, cfg.mu)?;
    if cfg.alpha > 0.0 {
        value += cfg.alpha * complex_total_variation(x);
    }
    if cfg.beta > 0.0 {
        value += cfg.beta * wavelet_l1(x, cfg.wavelet_levels)?;
    }
    Ok(value)
}

fn wavelet_prox(z: &ComplexImage, tau: f64, levels: usize) -> Result<ComplexImage> {
    let mut c = haar_forward(z, levels)?;
    for v in c.data_mut() {
        *v = Complex64::new(soft_threshold_real(v.re, tau), soft_threshold_real(v.im, tau));
    }
    haar_inverse(&c)
}

#[derive(Clone, Copy)]
struct Penalties {
    tv: bool,
    wavelet: bool,
}

fn split_prox(z: &ComplexImage, cfg: &SolverConfig, active: Penalties) -> Result<ComplexImage> {
    let t = cfg.step;
    match (active.tv, active.wavelet) {
        (false, false) => Ok(z.clone()),
        (true, false) => Ok(tv_prox(z, t * cfg.alpha, cfg.tv_inner_iters)),
        (false, true) => wavelet_prox(z, t * cfg.beta, cfg.wavelet_levels),
        (true, true) => {
            // Each sub-problem carries its penalty divided by its averaging weight.
            let share = cfg.tv_share;
            let tv = tv_prox(z, t * cfg.alpha / share, cfg.tv_inner_iters);
            let wav = wavelet_prox(z, t * cfg.beta / (1.0 - share), cfg.wavelet_levels)?;
            let data = tv
                .data()
                .iter()
                .zip(wav.data())
                .map(|(a, b)| a * share + b * (1.0 - share))
                .collect();
            ComplexImage::new(z.n(), data)
        }
    }
}

fn check_levels(meas: &Measurement, cfg: &SolverConfig, active: Penalties) -> Result<()> {
    let n = meas.n();
    if active.wavelet && (cfg.wavelet_levels >= usize::BITS as usize || !n.is_multiple_of(1usize << cfg.wavelet_levels))
    {
        return Err(Error::invalid(
            "wavelet_levels",
            format!("n = {n} is not divisible by 2^{}", cfg.wavelet_levels),
        ));
    }
    Ok(())
}

fn accelerated(meas: &Measurement, cfg: &SolverConfig, active: Penalties) -> Result<(ComplexImage, SolveTrace)> {
    cfg.validate()?;
    check_levels(meas, cfg, active)?;
    let eval = |x: &ComplexImage| -> Result<f64> {
        let mut c = *cfg;
        if !active.tv {
            c.alpha = 0.0;
        }
        if !active.wavelet {
            c.beta = 0.0;
        }
        objective(x, meas, &c)
    };

    let x0 = zero_fill(meas)?;
    let f0 = eval(&x0)?;
    let mut trace = SolveTrace {
        objective: vec![f0],
        ..SolveTrace::default()
    };
    let mut best = x0.clone();
    let mut best_value = f0;
    let mut prev = x0.clone();
    let mut extrapolated = x0;
    let mut momentum = 1.0_f64;

    for iteration in 1..=cfg.outer_iters {
        let grad = data_gradient(&extrapolated, meas, cfg.mu)?;
        let mut z = extrapolated;
        for (v, g) in z.data_mut().iter_mut().zip(grad.data()) {
            *v -= g * cfg.step;
        }
        let x = split_prox(&z, cfg, active)?;

        let value = eval(&x)?;
        if !value.is_finite() || value > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                iteration,
                objective: value,
            });
        }
        trace.objective.push(value);
        trace.iterations = iteration;
        if value < best_value {
            best_value = value;
            best = x.clone();
            trace.best_index = iteration;
        }

        let prev_norm = prev.norm();
        let change = x.sub(&prev)?.norm();
        let relative = if prev_norm > 0.0 { change / prev_norm } else { change };
        trace.final_relative_change = relative;

        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let data = x
            .data()
            .iter()
            .zip(prev.data())
            .map(|(a, b)| a + (a - b) * beta)
            .collect();
        extrapolated = ComplexImage::new(x.n(), data)?;
        momentum = next_momentum;
        prev = x;

        if relative <= cfg.tol {
            break;
        }
    }
    Ok((best, trace))
}

/// FISTA for `(mu/2)‖F_u x − y‖² + beta·‖Φx‖₁`; returns the best iterate.
pub fn fista_l1(meas: &Measurement, cfg: &SolverConfig) -> Result<(ComplexImage, SolveTrace)> {
    accelerated(
        meas,
        cfg,
        Penalties {
            tv: false,
            wavelet: cfg.beta > 0.0,
        },
    )
}

/// Composite splitting with TV and wavelet-L1 sub-problems.
pub fn fcsa(meas: &Measurement, cfg: &SolverConfig) -> Result<(ComplexImage, SolveTrace)> {
    accelerated(
        meas,
        cfg,
        Penalties {
            tv: cfg.alpha > 0.0,
            wavelet: cfg.beta > 0.0,
        },
    )
}
