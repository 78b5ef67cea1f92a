//! Browser demo: mask preview, filter responses and a small reconstruction.
//!
//! Every operation has a plain Rust entry point returning `Result<_, String>`
//! and a thin `#[wasm_bindgen]` wrapper that converts errors to JS exceptions.

use kdac_core::dac::{dac_reconstruct, LoopParams};
use kdac_core::filterbank::BankKind;
use kdac_core::grid::{center_shift_values, ComplexImage};
use kdac_core::io::{gray_levels, PngMode};
use kdac_core::metrics::{evaluate, MetricTriple};
use kdac_core::phantom::make_phantom;
use kdac_core::sampling::{add_noise, generate_mask, undersample};
use kdac_core::solvers::{Solver, SolverConfig, SolverKind};
use wasm_bindgen::prelude::*;

/// Largest side the page accepts for interactive reconstruction.
pub const MAX_RECON_SIDE: usize = 128;

/// RGBA bytes of a row-major gray image windowed to `[lo, hi]`.
pub fn to_rgba(values: &[f64], lo: f64, hi: f64) -> Result<Vec<u8>, String> {
    let levels = gray_levels(values, PngMode::Window { lo, hi }).map_err(|e| e.to_string())?;
    Ok(levels
        .into_iter()
        .flat_map(|g| {
            let v = (g >> 8) as u8;
            [v, v, v, 255]
        })
        .collect())
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct MaskPreview {
    pub n: usize,
    /// Centered RGBA, sampled locations white.
    pub pixels: Vec<u8>,
    pub achieved_ratio: f64,
    pub sampled: usize,
}

pub fn mask_preview(kind: &str, ratio: f64, n: usize, seed: u32) -> Result<MaskPreview, String> {
    let mask = generate_mask(parse(kind)?, ratio, n, seed as u64).map_err(|e| e.to_string())?;
    let values: Vec<f64> = mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(MaskPreview {
        n,
        pixels: to_rgba(&center_shift_values(n, &values), 0.0, 1.0)?,
        achieved_ratio: mask.achieved_ratio(),
        sampled: mask.sampled_count(),
    })
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct ResponsePreview {
    pub n: usize,
    /// Centered RGBA of `|G_i|`, black at 0 and white at 1.
    pub pixels: Vec<u8>,
    pub label: String,
    pub band: String,
    pub count: usize,
}

pub fn response_preview(bank: &str, index: usize, n: usize) -> Result<ResponsePreview, String> {
    let bank = parse::<BankKind>(bank)?.build(n).map_err(|e| e.to_string())?;
    if index >= bank.len() {
        return Err(format!("`index`: bank has {} responses", bank.len()));
    }
    let magnitude = bank.response(index).magnitude();
    Ok(ResponsePreview {
        n,
        pixels: to_rgba(&center_shift_values(n, &magnitude), 0.0, 1.0)?,
        label: bank.labels()[index].clone(),
        band: format!("{:?}", bank.bands()[index]).to_lowercase(),
        count: bank.len(),
    })
}

#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct ReconPreview {
    pub n: usize,
    pub reference: Vec<u8>,
    pub zero_fill: Vec<u8>,
    pub direct: Vec<u8>,
    pub dac: Vec<u8>,
    /// `[psnr, ssim, hfen]` for zero fill, direct FCSA and the divide-and-conquer result.
    pub metrics: Vec<f64>,
    pub achieved_ratio: f64,
}

/// Phantom reconstruction with zero fill, direct FCSA and FCSA through `bank`.
pub fn reconstruct(
    kind: &str,
    ratio: f64,
    n: usize,
    seed: u32,
    bank: &str,
    sigma: f64,
    outer_iters: usize,
) -> Result<ReconPreview, String> {
    if n > MAX_RECON_SIDE {
        return Err(format!("`n`: at most {MAX_RECON_SIDE} in the browser, got {n}"));
    }
    let err = |e: kdac_core::Error| e.to_string();
    let reference = make_phantom(n).map_err(err)?;
    let mask = generate_mask(parse(kind)?, ratio, n, seed as u64).map_err(err)?;
    let meas = add_noise(&undersample(&reference, &mask).map_err(err)?, sigma, seed as u64).map_err(err)?;
    let cfg = |band| SolverConfig {
        outer_iters,
        ..SolverConfig::for_band(band)
    };

    let zero = SolverKind::ZeroFill
        .solve(&meas, &SolverConfig::default())
        .map_err(err)?
        .0;
    let direct = SolverKind::Fcsa
        .solve(&meas, &cfg(kdac_core::filterbank::Band::Full))
        .map_err(err)?
        .0;
    let bank = parse::<BankKind>(bank)?.build(n).map_err(err)?;
    let configs: Vec<SolverConfig> = bank.bands().iter().map(|&b| cfg(b)).collect();
    let dac = dac_reconstruct(&meas, &bank, &SolverKind::Fcsa, &configs, &LoopParams::default(), false)
        .map_err(err)?
        .image;

    let mut metrics = Vec::with_capacity(9);
    for img in [&zero, &direct, &dac] {
        let MetricTriple { psnr, ssim, hfen } = evaluate(&reference, img).map_err(err)?;
        metrics.extend([psnr, ssim, hfen]);
    }
    let view = |img: &ComplexImage| to_rgba(&img.magnitude(), 0.0, 1.0);
    Ok(ReconPreview {
        n,
        reference: view(&reference)?,
        zero_fill: view(&zero)?,
        direct: view(&direct)?,
        dac: view(&dac)?,
        metrics,
        achieved_ratio: mask.achieved_ratio(),
    })
}

#[wasm_bindgen(js_name = maskPreview)]
pub fn mask_preview_js(kind: &str, ratio: f64, n: usize, seed: u32) -> Result<MaskPreview, JsError> {
    mask_preview(kind, ratio, n, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = responsePreview)]
pub fn response_preview_js(bank: &str, index: usize, n: usize) -> Result<ResponsePreview, JsError> {
    response_preview(bank, index, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = reconstruct)]
pub fn reconstruct_js(
    kind: &str,
    ratio: f64,
    n: usize,
    seed: u32,
    bank: &str,
    sigma: f64,
    outer_iters: usize,
) -> Result<ReconPreview, JsError> {
    reconstruct(kind, ratio, n, seed, bank, sigma, outer_iters).map_err(|e| JsError::new(&e))
}
