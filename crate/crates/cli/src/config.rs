//! Experiment documents.
//!
//! Both documents are JSON with a `version` field; unknown keys are rejected
//! and everything is validated before any computation starts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kdac_core::dac::LoopParams;
use kdac_core::filterbank::{Band, BankKind, FilterBank};
use kdac_core::sampling::MaskKind;
use kdac_core::solvers::{SolverConfig, SolverKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;
pub const PHANTOM_INPUT: &str = "phantom";

fn default_input() -> String {
    PHANTOM_INPUT.to_string()
}

fn default_n() -> usize {
    256
}

fn default_bank() -> BankKind {
    BankKind::None
}

fn default_solver() -> SolverKind {
    SolverKind::Fcsa
}

fn default_sigmas() -> Vec<f64> {
    vec![0.0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_window_hi() -> f64 {
    0.08
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {reason}"))
}

/// Partial solver settings; unset fields keep the per-band defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverPatch {
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub outer_iters: Option<usize>,
    pub tv_inner_iters: Option<usize>,
    pub wavelet_levels: Option<usize>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub tv_share: Option<f64>,
}

impl SolverPatch {
    pub fn apply(&self, base: SolverConfig) -> SolverConfig {
        SolverConfig {
            mu: self.mu.unwrap_or(base.mu),
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            outer_iters: self.outer_iters.unwrap_or(base.outer_iters),
            tv_inner_iters: self.tv_inner_iters.unwrap_or(base.tv_inner_iters),
            wavelet_levels: self.wavelet_levels.unwrap_or(base.wavelet_levels),
            step: self.step.unwrap_or(base.step),
            tol: self.tol.unwrap_or(base.tol),
            tv_share: self.tv_share.unwrap_or(base.tv_share),
        }
    }
}

/// Solver overrides keyed by `all`, a band name (`low`, `high`, `full`) or a
/// subspace label (`h1`, `lp`, ...). Applied in that order.
pub type Overrides = BTreeMap<String, SolverPatch>;

fn band_key(band: Band) -> &'static str {
    match band {
        Band::Low => "low",
        Band::High => "high",
        Band::Full => "full",
    }
}

/// Static subspace labels of each bank kind.
pub fn bank_labels(kind: BankKind) -> &'static [&'static str] {
    match kind {
        BankKind::None => &["identity"],
        BankKind::HoriVert => &["h1", "h2", "h3", "h4"],
        BankKind::Gaussian => &["lp", "hp"],
    }
}

/// One solver config per subspace of `bank`.
pub fn resolve_configs(bank: &FilterBank, overrides: &Overrides) -> Vec<SolverConfig> {
    bank.labels()
        .iter()
        .zip(bank.bands())
        .map(|(label, &band)| {
            let mut cfg = SolverConfig::for_band(band);
            for key in ["all", band_key(band), label.as_str()] {
                if let Some(p) = overrides.get(key) {
                    cfg = p.apply(cfg);
                }
            }
            cfg
        })
        .collect()
}

fn check_overrides(overrides: &Overrides, banks: &[BankKind]) -> CliResult<()> {
    for key in overrides.keys() {
        let known = ["all", "low", "high", "full"].contains(&key.as_str())
            || banks.iter().any(|&b| bank_labels(b).contains(&key.as_str()));
        if !known {
            return Err(invalid("overrides", format!("unknown subspace or band `{key}`")));
        }
    }
    for &bank in banks {
        let bands: &[Band] = match bank {
            BankKind::None => &[Band::Full],
            BankKind::HoriVert => &[Band::High, Band::High, Band::Low, Band::Low],
            BankKind::Gaussian => &[Band::Low, Band::High],
        };
        for (label, &band) in bank_labels(bank).iter().zip(bands) {
            let mut cfg = SolverConfig::for_band(band);
            for key in ["all", band_key(band), label] {
                if let Some(p) = overrides.get(key) {
                    cfg = p.apply(cfg);
                }
            }
            cfg.validate()
                .map_err(|e| invalid("overrides", format!("subspace `{label}` of bank `{bank}`: {e}")))?;
        }
    }
    Ok(())
}

fn check_ratio(field: &str, ratio: f64) -> CliResult<()> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(invalid(
            field,
            format!("sampling ratio must lie in (0, 1], got {ratio}"),
        ));
    }
    Ok(())
}

fn check_sigmas(sigmas: &[f64]) -> CliResult<()> {
    if sigmas.is_empty() {
        return Err(invalid("sigmas", "list is empty"));
    }
    if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(invalid(
            "sigmas",
            format!("noise level must be finite and >= 0, got {s}"),
        ));
    }
    Ok(())
}

fn check_common(version: u32, input: &str, n: usize, lp: &LoopParams, window_hi: f64, out: &Path) -> CliResult<()> {
    if version != CONFIG_VERSION {
        return Err(invalid(
            "version",
            format!("unsupported version {version}, expected {CONFIG_VERSION}"),
        ));
    }
    if input.is_empty() {
        return Err(invalid("input", "must be `phantom` or a grid file path"));
    }
    if input == PHANTOM_INPUT && (n < 64 || !n.is_multiple_of(2)) {
        return Err(invalid(
            "n",
            format!("phantom side must be an even number >= 64, got {n}"),
        ));
    }
    if lp.max_outer == 0 {
        return Err(invalid("loop.max_outer", "must be positive"));
    }
    if !(lp.tol.is_finite() && lp.tol >= 0.0) {
        return Err(invalid("loop.tol", format!("must be finite and >= 0, got {}", lp.tol)));
    }
    if !(window_hi.is_finite() && window_hi > 0.0) {
        return Err(invalid("window_hi", format!("must be > 0, got {window_hi}")));
    }
    if out.as_os_str().is_empty() {
        return Err(invalid("output_dir", "must not be empty"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSpec {
    pub kind: MaskKind,
    pub ratio: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A single reconstruction experiment, one metrics row per noise level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    /// `phantom` or the path of an image grid file.
    #[serde(default = "default_input")]
    pub input: String,
    /// Phantom side; ignored for grid-file input.
    #[serde(default = "default_n")]
    pub n: usize,
    pub mask: MaskSpec,
    #[serde(default = "default_bank")]
    pub bank: BankKind,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default, rename = "loop")]
    pub loop_params: LoopParams,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Seed of the k-space noise; defaults to the mask seed.
    #[serde(default)]
    pub noise_seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Upper end of the residual-map display window.
    #[serde(default = "default_window_hi")]
    pub window_hi: f64,
}

impl ExperimentConfig {
    pub fn new(mask: MaskSpec) -> Self {
        Self {
            version: CONFIG_VERSION,
            input: default_input(),
            n: default_n(),
            mask,
            bank: default_bank(),
            solver: default_solver(),
            overrides: Overrides::new(),
            loop_params: LoopParams::default(),
            sigmas: default_sigmas(),
            noise_seed: None,
            output_dir: default_output_dir(),
            window_hi: default_window_hi(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        check_common(
            self.version,
            &self.input,
            self.n,
            &self.loop_params,
            self.window_hi,
            &self.output_dir,
        )?;
        check_ratio("mask.ratio", self.mask.ratio)?;
        check_sigmas(&self.sigmas)?;
        check_overrides(&self.overrides, &[self.bank])
    }

    pub fn noise_seed(&self) -> u64 {
        self.noise_seed.unwrap_or(self.mask.seed)
    }
}

/// A sweep over masks × ratios × banks × noise levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub version: u32,
    #[serde(default = "default_input")]
    pub input: String,
    #[serde(default = "default_n")]
    pub n: usize,
    pub masks: Vec<MaskKind>,
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub banks: Vec<BankKind>,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default, rename = "loop")]
    pub loop_params: LoopParams,
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub noise_seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Keep going after a failed cell instead of stopping.
    #[serde(default)]
    pub continue_on_error: bool,
    /// Write per-cell images next to the table.
    #[serde(default)]
    pub write_images: bool,
    #[serde(default = "default_window_hi")]
    pub window_hi: f64,
}

impl BenchConfig {
    pub fn validate(&self) -> CliResult<()> {
        check_common(
            self.version,
            &self.input,
            self.n,
            &self.loop_params,
            self.window_hi,
            &self.output_dir,
        )?;
        if self.masks.is_empty() {
            return Err(invalid("masks", "list is empty"));
        }
        if self.ratios.is_empty() {
            return Err(invalid("ratios", "list is empty"));
        }
        for &r in &self.ratios {
            check_ratio("ratios", r)?;
        }
        if self.banks.is_empty() {
            return Err(invalid("banks", "list is empty"));
        }
        check_sigmas(&self.sigmas)?;
        check_overrides(&self.overrides, &self.banks)
    }

    /// Cells in table order: masks, then ratios, then banks.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &kind in &self.masks {
            for &ratio in &self.ratios {
                for &bank in &self.banks {
                    out.push(ExperimentConfig {
                        version: self.version,
                        input: self.input.clone(),
                        n: self.n,
                        mask: MaskSpec {
                            kind,
                            ratio,
                            seed: self.seed,
                        },
                        bank,
                        solver: self.solver,
                        overrides: self.overrides.clone(),
                        loop_params: self.loop_params,
                        sigmas: self.sigmas.clone(),
                        noise_seed: self.noise_seed,
                        output_dir: self.output_dir.clone(),
                        window_hi: self.window_hi,
                    });
                }
            }
        }
        out
    }
}

/// Reads and parses a JSON document; validation is left to the caller.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
