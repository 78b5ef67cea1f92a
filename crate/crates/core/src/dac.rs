//! Divide-and-conquer reconstruction.
//!
//! 1. Split the measured k-space into subspaces with a filter bank.
//! 2. Reconstruct every subspace independently with a base solver.
//! 3. Fuse the subspace images by weighted least squares in k-space,
//!    alternating with a residual-driven update of the fusion weights.

use web_time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::{apply_response, Band, FilterBank};
use crate::grid::{fft2, ifft2, ComplexImage, Spectrum};
use crate::sampling::Measurement;
use crate::solvers::{SolveTrace, Solver, SolverConfig};

/// Denominator floor for the fusion division.
const FUSION_FLOOR: f64 = 1e-12;
/// Residual norm below which a weight update is skipped.
const RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct SubspaceProblem {
    pub label: String,
    pub band: Band,
    pub measurement: Measurement,
    pub config: SolverConfig,
}

/// Non-negative fusion weights, one per subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    lambda: Vec<f64>,
}

impl FusionWeights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::invalid("lambda", "weights must be finite and non-negative"));
        }
        Ok(Self { lambda })
    }

    /// Equal weights with unit L2 norm.
    pub fn uniform(count: usize) -> Self {
        let v = 1.0 / (count as f64).sqrt();
        Self { lambda: vec![v; count] }
    }

    pub fn values(&self) -> &[f64] {
        &self.lambda
    }

    pub fn norm(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum::<f64>().sqrt()
    }
}

/// Result of one weight update.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaUpdate {
    pub weights: FusionWeights,
    /// Set when every residual vanished and the previous weights were kept.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopParams {
    pub max_outer: usize,
    /// Relative L2 change of the fused image that ends the loop.
    pub tol: f64,
}

impl Default for LoopParams {
    fn default() -> Self {
        Self {
            max_outer: 10,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub decompose_ms: f64,
    pub solve_ms: f64,
    pub fuse_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ReconReport {
    pub image: ComplexImage,
    pub labels: Vec<String>,
    pub subspace_images: Vec<ComplexImage>,
    /// Weights used by the first fusion, then one entry per accepted update.
    pub lambda_history: Vec<Vec<f64>>,
    /// One entry per fusion; the first is measured against the zero image.
    pub relative_change_history: Vec<f64>,
    pub traces: Vec<SolveTrace>,
    pub outer_iterations: usize,
    pub weights_converged: bool,
    pub timings: StageTimings,
}

/// One problem per response, each measuring `Y ⊙ Ĥ_i` on the original mask.
pub fn decompose(meas: &Measurement, bank: &FilterBank) -> Result<Vec<SubspaceProblem>> {
    let configs: Vec<SolverConfig> = bank.bands().iter().map(|&b| SolverConfig::for_band(b)).collect();
    decompose_with(meas, bank, &configs)
}

pub fn decompose_with(meas: &Measurement, bank: &FilterBank, configs: &[SolverConfig]) -> Result<Vec<SubspaceProblem>> {
    meas.spec().ensure_same_side(bank.n())?;
    if configs.len() != bank.len() {
        return Err(Error::invalid(
            "configs",
            format!("{} configs for a bank of {} filters", configs.len(), bank.len()),
        ));
    }
    bank.responses()
        .iter()
        .zip(bank.labels())
        .zip(bank.bands())
        .zip(configs)
        .map(|(((response, label), &band), config)| {
            let spec = apply_response(meas.spec(), response)?;
            Ok(SubspaceProblem {
                label: label.clone(),
                band,
                measurement: Measurement::new_unchecked(spec, meas.mask().clone()),
                config: *config,
            })
        })
        .collect()
}

/// Solves every subspace; output order follows `problems` whether or not it runs in parallel.
pub fn reconstruct_subspaces(
    problems: &[SubspaceProblem],
    solver: &dyn Solver,
    parallel: bool,
) -> Result<Vec<(ComplexImage, SolveTrace)>> {
    let solve_one = |p: &SubspaceProblem| {
        solver.solve(&p.measurement, &p.config).map_err(|e| Error::Subspace {
            label: p.label.clone(),
            source: Box::new(e),
        })
    };
    if parallel {
        problems.par_iter().map(solve_one).collect()
    } else {
        problems.iter().map(solve_one).collect()
    }
}

/// Plain sum over one partition group of the bank.
pub fn integrate_sum(images: &[ComplexImage], bank: &FilterBank, group: &[usize]) -> Result<ComplexImage> {
    let mut wanted = group.to_vec();
    wanted.sort_unstable();
    let declared = bank.partition_groups().iter().any(|g| {
        let mut g = g.clone();
        g.sort_unstable();
        g == wanted
    });
    if !declared {
        return Err(Error::invalid(
            "group",
            format!("{group:?} is not a partition group of this bank"),
        ));
    }
    if images.len() != bank.len() {
        return Err(Error::invalid("images", "one image per filter is required"));
    }
    let mut out = ComplexImage::zeros(bank.n())?;
    for &i in group {
        out = out.add(&images[i])?;
    }
    Ok(out)
}

fn spectra_of(images: &[ComplexImage], bank: &FilterBank) -> Result<Vec<Spectrum>> {
    if images.len() != bank.len() {
        return Err(Error::invalid("images", "one image per filter is required"));
    }
    images
        .iter()
        .map(|x| {
            x.ensure_same_side(bank.n())?;
            fft2(x)
        })
        .collect()
}

fn fuse_spectra(spectra: &[Spectrum], bank: &FilterBank, weights: &FusionWeights) -> Result<ComplexImage> {
    let n = bank.n();
    let mut fused = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, out) in fused.iter_mut().enumerate() {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((spec, response), &l) in spectra.iter().zip(bank.responses()).zip(weights.values()) {
            let h = response.data()[k];
            num += h.conj() * spec.data()[k] * l;
            den += l * h.norm_sqr();
        }
        *out = num / den.max(FUSION_FLOOR);
    }
    ifft2(&Spectrum::new(n, fused)?)
}

fn check_weights(bank: &FilterBank, weights: &FusionWeights) -> Result<()> {
    if weights.values().len() != bank.len() {
        return Err(Error::invalid("lambda", "one weight per filter is required"));
    }
    if weights.values().iter().all(|&l| l == 0.0) {
        return Err(Error::invalid("lambda", "at least one weight must be positive"));
    }
    Ok(())
}

/// Closed-form minimiser of `Σ λ_i ‖x_i − H_i x‖²`, evaluated per frequency.
pub fn integrate_tikhonov(images: &[ComplexImage], bank: &FilterBank, weights: &FusionWeights) -> Result<ComplexImage> {
    check_weights(bank, weights)?;
    if bank.is_identity() && images.len() == 1 {
        images[0].ensure_same_side(bank.n())?;
        return Ok(images[0].clone());
    }
    fuse_spectra(&spectra_of(images, bank)?, bank, weights)
}

fn update_from_spectra(
    x: &ComplexImage,
    spectra: &[Spectrum],
    bank: &FilterBank,
    previous: &FusionWeights,
) -> Result<LambdaUpdate> {
    let x_hat = fft2(x)?;
    let residuals: Vec<f64> = spectra
        .iter()
        .zip(bank.responses())
        .map(|(xi, h)| {
            x_hat
                .data()
                .iter()
                .zip(h.data())
                .zip(xi.data())
                .map(|((xv, hv), target)| (hv * xv - target).norm_sqr())
                .sum()
        })
        .collect();
    let norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    if norm < RESIDUAL_FLOOR {
        return Ok(LambdaUpdate {
            weights: previous.clone(),
            converged: true,
        });
    }
    Ok(LambdaUpdate {
        weights: FusionWeights::new(residuals.iter().map(|r| r / norm).collect())?,
        converged: false,
    })
}

/// Sets `λ_i = ‖H_i x − x_i‖²` and rescales to unit L2 norm.
pub fn update_lambda(
    x: &ComplexImage,
    images: &[ComplexImage],
    bank: &FilterBank,
    previous: &FusionWeights,
) -> Result<LambdaUpdate> {
    x.ensure_same_side(bank.n())?;
    update_from_spectra(x, &spectra_of(images, bank)?, bank, previous)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Full pipeline: decompose, solve each subspace once, then alternate fusion and weight updates.
pub fn dac_reconstruct(
    meas: &Measurement,
    bank: &FilterBank,
    solver: &dyn Solver,
    configs: &[SolverConfig],
    params: &LoopParams,
    parallel: bool,
) -> Result<ReconReport> {
    if params.max_outer == 0 {
        return Err(Error::invalid("max_outer", "must be positive"));
    }
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let problems = decompose_with(meas, bank, configs)?;
    timings.decompose_ms = millis(t);

    let t = Instant::now();
    let solved = reconstruct_subspaces(&problems, solver, parallel)?;
    timings.solve_ms = millis(t);
    let (subspace_images, traces): (Vec<_>, Vec<_>) = solved.into_iter().unzip();

    let t = Instant::now();
    let spectra = spectra_of(&subspace_images, bank)?;
    let mut weights = FusionWeights::uniform(bank.len());
    let mut lambda_history = vec![weights.values().to_vec()];
    let mut relative_change_history = Vec::new();
    let mut weights_converged = false;
    let mut image = ComplexImage::zeros(bank.n())?;
    let mut outer_iterations = 0;

    for _ in 0..params.max_outer {
        let next = if bank.is_identity() {
            subspace_images[0].clone()
        } else {
            fuse_spectra(&spectra, bank, &weights)?
        };
        let prev_norm = image.norm();
        let change = next.sub(&image)?.norm();
        let relative = if prev_norm > 0.0 {
            change / prev_norm
        } else if change > 0.0 {
            1.0
        } else {
            0.0
        };
        relative_change_history.push(relative);
        image = next;
        outer_iterations += 1;
        if outer_iterations > 1 && relative <= params.tol {
            break;
        }

        let update = update_from_spectra(&image, &spectra, bank, &weights)?;
        if update.converged {
            weights_converged = true;
            break;
        }
        weights = update.weights;
        lambda_history.push(weights.values().to_vec());
    }
    timings.fuse_ms = millis(t);

    Ok(ReconReport {
        image,
        labels: problems.iter().map(|p| p.label.clone()).collect(),
        subspace_images,
        lambda_history,
        relative_change_history,
        traces,
        outer_iterations,
        weights_converged,
        timings,
    })
}
