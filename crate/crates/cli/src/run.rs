//! Experiment execution and artifact output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kdac_core::dac::dac_reconstruct;
use kdac_core::grid::{fft2, normalize_max, ComplexImage};
use kdac_core::io::{
    export_error_map_png, export_image_png, export_mask_png, export_png, read_grid, write_atomic, write_image,
    write_mask, write_report, GridData, PngMode,
};
use kdac_core::metrics::{evaluate, krre_map};
use kdac_core::phantom::{make_phantom, PHANTOM_VERSION};
use kdac_core::sampling::{add_noise, generate_mask, undersample, MaskKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{resolve_configs, BenchConfig, ExperimentConfig, PHANTOM_INPUT};
use crate::error::{CliError, CliResult};

pub const METRICS_FILE: &str = "metrics.csv";
pub const BENCH_FILE: &str = "bench.csv";

/// One line of `metrics.csv` / `bench.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub input: String,
    pub mask_kind: String,
    pub ratio: f64,
    pub seed: u64,
    pub bank: String,
    pub solver: String,
    pub sigma: f64,
    /// `inf` when the reconstruction matches the reference.
    pub psnr_db: f64,
    pub ssim: f64,
    pub hfen: f64,
    pub wall_ms: f64,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "input",
    "mask_kind",
    "ratio",
    "seed",
    "bank",
    "solver",
    "sigma",
    "psnr_db",
    "ssim",
    "hfen",
    "wall_ms",
];

/// Files written so far; removed on drop unless committed.
#[derive(Default)]
struct Artifacts {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl Artifacts {
    fn file(&mut self, path: PathBuf) -> PathBuf {
        self.files.push(path.clone());
        path
    }

    fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.files)
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}

/// The reference image and the name it is reported under.
pub struct Input {
    pub label: String,
    pub image: ComplexImage,
}

/// Loads the phantom or an image grid file scaled to unit peak magnitude.
pub fn load_input(input: &str, n: usize) -> CliResult<Input> {
    if input == PHANTOM_INPUT {
        return Ok(Input {
            label: PHANTOM_INPUT.to_string(),
            image: make_phantom(n)?,
        });
    }
    match read_grid(Path::new(input))? {
        GridData::Image(img) => {
            if img.max_abs() == 0.0 {
                return Err(CliError::Config(format!("`input`: {input} is an all-zero image")));
            }
            Ok(Input {
                label: input.to_string(),
                image: normalize_max(&img),
            })
        }
        _ => Err(CliError::Config(format!(
            "`input`: {input} does not hold a complex image"
        ))),
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// File stem shared by all artifacts of one reconstruction.
pub fn artifact_stem(cfg: &ExperimentConfig, sigma: f64) -> String {
    format!(
        "{}_{}_s{}_{}_{}_sigma{}",
        cfg.mask.kind, cfg.mask.ratio, cfg.mask.seed, cfg.bank, cfg.solver, sigma
    )
}

/// Runs one experiment. With `out` set, writes per-sigma images there; they
/// are removed again if any later step fails.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    input: &Input,
    out: Option<&Path>,
) -> CliResult<(Vec<MetricsRow>, Vec<PathBuf>)> {
    cfg.validate()?;
    let reference = &input.image;
    let n = reference.n();
    let mask = generate_mask(cfg.mask.kind, cfg.mask.ratio, n, cfg.mask.seed)?;
    let clean = undersample(reference, &mask)?;
    let bank = cfg.bank.build(n)?;
    let configs = resolve_configs(&bank, &cfg.overrides);
    let full = fft2(reference)?;

    let mut artifacts = Artifacts::default();
    if let Some(dir) = out {
        ensure_dir(dir)?;
    }
    let mut rows = Vec::with_capacity(cfg.sigmas.len());
    for &sigma in &cfg.sigmas {
        let meas = add_noise(&clean, sigma, cfg.noise_seed())?;
        let start = Instant::now();
        let report = dac_reconstruct(&meas, &bank, &cfg.solver, &configs, &cfg.loop_params, true)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let m = evaluate(reference, &report.image)?;
        rows.push(MetricsRow {
            input: input.label.clone(),
            mask_kind: cfg.mask.kind.to_string(),
            ratio: cfg.mask.ratio,
            seed: cfg.mask.seed,
            bank: cfg.bank.to_string(),
            solver: cfg.solver.to_string(),
            sigma,
            psnr_db: m.psnr,
            ssim: m.ssim,
            hfen: m.hfen,
            wall_ms,
        });

        if let Some(dir) = out {
            let stem = artifact_stem(cfg, sigma);
            write_image(&artifacts.file(dir.join(format!("{stem}_recon.kdc"))), &report.image)?;
            export_image_png(&report.image, &artifacts.file(dir.join(format!("{stem}_recon.png"))))?;
            export_png(
                &report.image.sub(reference)?.magnitude(),
                n,
                PngMode::Window {
                    lo: 0.0,
                    hi: cfg.window_hi,
                },
                &artifacts.file(dir.join(format!("{stem}_residual.png"))),
            )?;
            let krre = krre_map(&full, &fft2(&report.image)?)?;
            export_error_map_png(
                krre.values(),
                n,
                0.0,
                1.0,
                &artifacts.file(dir.join(format!("{stem}_krre.png"))),
            )?;
            let report_dir = dir.join(format!("{stem}_report"));
            artifacts.dirs.push(report_dir.clone());
            write_report(&report, &report_dir)?;
        }
    }
    Ok((rows, artifacts.commit()))
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Serializes rows with a header line.
pub fn rows_to_csv(rows: &[MetricsRow], header: bool) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(Path::new("<memory>"), e))?;
    }
    if rows.is_empty() && header {
        w.write_record(CSV_COLUMNS)
            .map_err(|e| csv_error(Path::new("<memory>"), e))?;
    }
    w.into_inner().map_err(|e| csv_error(Path::new("<memory>"), e))
}

pub fn read_rows(path: &Path) -> CliResult<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| csv_error(path, e))
}

/// Appends rows to a CSV, writing the header if the file is new, by
/// rewriting the whole file atomically.
pub fn append_rows(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let mut bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let fresh = bytes.is_empty();
    if !fresh {
        let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
        if first != CSV_COLUMNS.join(",").as_bytes() {
            return Err(CliError::Io(format!(
                "{}: existing file has a different header",
                path.display()
            )));
        }
    }
    bytes.extend(rows_to_csv(rows, fresh)?);
    write_atomic(path, &bytes)?;
    Ok(())
}

/// `recon`: runs the experiment, writes images and appends to `metrics.csv`.
pub fn cmd_recon(cfg: &ExperimentConfig) -> CliResult<Vec<MetricsRow>> {
    cfg.validate()?;
    let input = load_input(&cfg.input, cfg.n)?;
    let dir = cfg.output_dir.as_path();
    let (rows, written) = run_experiment(cfg, &input, Some(dir))?;
    if let Err(e) = append_rows(&dir.join(METRICS_FILE), &rows) {
        for f in written {
            let _ = fs::remove_file(f);
        }
        return Err(e);
    }
    Ok(rows)
}

/// Outcome of a sweep: the rows written and the failures skipped over.
pub struct BenchOutcome {
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<(String, CliError)>,
    pub table: PathBuf,
}

/// `bench`: one row per cell and noise level, in table order.
pub fn cmd_bench(cfg: &BenchConfig) -> CliResult<BenchOutcome> {
    cfg.validate()?;
    let input = load_input(&cfg.input, cfg.n)?;
    ensure_dir(&cfg.output_dir)?;
    let image_dir = cfg.output_dir.join("cells");
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for cell in cfg.cells() {
        let out = cfg.write_images.then_some(image_dir.as_path());
        match run_experiment(&cell, &input, out) {
            Ok((r, _)) => rows.extend(r),
            Err(e) if cfg.continue_on_error => failures.push((artifact_stem(&cell, cell.sigmas[0]), e)),
            Err(e) => return Err(e),
        }
    }
    let table = cfg.output_dir.join(BENCH_FILE);
    write_atomic(&table, &rows_to_csv(&rows, true)?)?;
    Ok(BenchOutcome { rows, failures, table })
}

#[derive(Debug)]
pub struct MaskSummary {
    pub kind: MaskKind,
    pub n: usize,
    pub target: f64,
    pub achieved: f64,
    pub seed: u64,
    pub grid: PathBuf,
    pub png: PathBuf,
}

/// `mask`: grid file plus centered PNG.
pub fn cmd_mask(kind: MaskKind, ratio: f64, n: usize, seed: u64, out: &Path) -> CliResult<MaskSummary> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(CliError::Config(format!(
            "`ratio`: sampling ratio must lie in (0, 1], got {ratio}"
        )));
    }
    let mask = generate_mask(kind, ratio, n, seed)?;
    ensure_dir(out)?;
    let stem = format!("mask_{kind}_{ratio}_n{n}_s{seed}");
    let mut artifacts = Artifacts::default();
    let grid = artifacts.file(out.join(format!("{stem}.kdc")));
    write_mask(&grid, &mask)?;
    let png = artifacts.file(out.join(format!("{stem}.png")));
    export_mask_png(&mask, &png)?;
    artifacts.commit();
    Ok(MaskSummary {
        kind,
        n,
        target: ratio,
        achieved: mask.achieved_ratio(),
        seed,
        grid,
        png,
    })
}

#[derive(Debug)]
pub struct PhantomSummary {
    pub n: usize,
    pub sha256: String,
    pub grid: PathBuf,
    pub png: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `phantom`: grid file plus PNG; the checksum covers the grid file bytes.
pub fn cmd_phantom(n: usize, out: &Path) -> CliResult<PhantomSummary> {
    let img = make_phantom(n)?;
    ensure_dir(out)?;
    let mut artifacts = Artifacts::default();
    let grid = artifacts.file(out.join(format!("phantom_v{PHANTOM_VERSION}_n{n}.kdc")));
    let bytes = kdac_core::io::encode_image(&img);
    write_atomic(&grid, &bytes)?;
    let png = artifacts.file(out.join(format!("phantom_v{PHANTOM_VERSION}_n{n}.png")));
    export_image_png(&img, &png)?;
    artifacts.commit();
    Ok(PhantomSummary {
        n,
        sha256: sha256_hex(&bytes),
        grid,
        png,
    })
}

/// Sizes the global thread pool from `KDAC_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("KDAC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("`KDAC_THREADS`: expected a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("`KDAC_THREADS`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MaskSpec;
    use kdac_core::filterbank::BankKind;
    use kdac_core::solvers::SolverKind;

    fn quick(kind: MaskKind, ratio: f64, bank: BankKind, solver: SolverKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(MaskSpec { kind, ratio, seed: 3 });
        cfg.n = 64;
        cfg.bank = bank;
        cfg.solver = solver;
        cfg.overrides.insert(
            "all".into(),
            crate::config::SolverPatch {
                outer_iters: Some(20),
                ..Default::default()
            },
        );
        cfg
    }

    #[test]
    fn full_sampling_zero_fill_is_flagged_infinite() {
        let cfg = quick(MaskKind::Random2d, 1.0, BankKind::None, SolverKind::ZeroFill);
        let input = load_input("phantom", 64).unwrap();
        let (rows, _) = run_experiment(&cfg, &input, None).unwrap();
        assert!(rows[0].psnr_db.is_infinite() && rows[0].psnr_db > 0.0);
        let csv = String::from_utf8(rows_to_csv(&rows, true).unwrap()).unwrap();
        assert!(csv.lines().nth(1).unwrap().contains(",inf,"), "{csv}");
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let row = MetricsRow {
            input: "phantom".into(),
            mask_kind: "radial".into(),
            ratio: 0.3,
            seed: 7,
            bank: "gaussian".into(),
            solver: "fcsa".into(),
            sigma: 0.01,
            psnr_db: 31.234567890123456,
            ssim: 0.912345678901234,
            hfen: 0.1 + 0.2,
            wall_ms: 12.5,
        };
        let inf = MetricsRow {
            psnr_db: f64::INFINITY,
            ..row.clone()
        };
        append_rows(&path, std::slice::from_ref(&row)).unwrap();
        append_rows(&path, std::slice::from_ref(&inf)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(read_rows(&path).unwrap(), vec![row, inf]);
    }

    #[test]
    fn recon_writes_artifacts_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick(MaskKind::Radial, 0.3, BankKind::Gaussian, SolverKind::Fcsa);
        cfg.sigmas = vec![0.0, 0.02];
        cfg.output_dir = dir.path().to_path_buf();
        let rows = cmd_recon(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        let stem = artifact_stem(&cfg, 0.02);
        for suffix in [
            "_recon.kdc",
            "_recon.png",
            "_residual.png",
            "_krre.png",
            "_report/report.json",
        ] {
            assert!(dir.path().join(format!("{stem}{suffix}")).exists(), "{suffix}");
        }
        let back = read_rows(&dir.path().join(METRICS_FILE)).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].sigma, 0.02);
    }

    #[test]
    fn failed_recon_leaves_no_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = quick(MaskKind::Random2d, 0.5, BankKind::None, SolverKind::Fcsa);
        cfg.sigmas = vec![0.0, 0.01];
        cfg.output_dir = dir.path().to_path_buf();
        // A directory squatting on the second noise level's image path makes that write fail
        // after the first noise level has written all of its files.
        let blocker = dir.path().join(format!("{}_recon.kdc", artifact_stem(&cfg, 0.01)));
        fs::create_dir(&blocker).unwrap();
        let err = cmd_recon(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
        let left: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
        assert_eq!(left, vec![blocker]);
    }

    #[test]
    fn divergence_is_a_numeric_failure() {
        let mut cfg = quick(MaskKind::Random2d, 0.5, BankKind::HoriVert, SolverKind::FistaL1);
        cfg.overrides.insert(
            "all".into(),
            crate::config::SolverPatch {
                mu: Some(20.0),
                step: Some(1.0),
                outer_iters: Some(200),
                tol: Some(0.0),
                ..Default::default()
            },
        );
        let input = load_input("phantom", 64).unwrap();
        let err = run_experiment(&cfg, &input, None).err().unwrap();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("subspace `h1`"), "{err}");
    }

    #[test]
    fn mask_and_phantom_commands() {
        let dir = tempfile::tempdir().unwrap();
        let m = cmd_mask(MaskKind::Radial, 0.3, 64, 7, dir.path()).unwrap();
        assert!(m.grid.exists() && m.png.exists());
        assert!((m.achieved - 0.3).abs() <= 0.01);
        assert_eq!(
            cmd_mask(MaskKind::Radial, 1.5, 64, 7, dir.path())
                .unwrap_err()
                .exit_code(),
            2
        );

        let a = cmd_phantom(64, dir.path()).unwrap();
        let b = cmd_phantom(64, dir.path()).unwrap();
        assert_eq!(a.sha256, b.sha256);
        assert_eq!(a.sha256, sha256_hex(&fs::read(&a.grid).unwrap()));
        assert_eq!(cmd_phantom(32, dir.path()).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn grid_file_input_is_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.kdc");
        let mut img = make_phantom(64).unwrap();
        img.scale(4.0);
        write_image(&path, &img).unwrap();
        let input = load_input(path.to_str().unwrap(), 0).unwrap();
        assert_eq!(input.image.max_abs(), 1.0);
        let mask_path = dir.path().join("mask.kdc");
        write_mask(&mask_path, &generate_mask(MaskKind::Radial, 0.3, 64, 1).unwrap()).unwrap();
        assert_eq!(load_input(mask_path.to_str().unwrap(), 0).err().unwrap().exit_code(), 2);
        assert_eq!(load_input("missing.kdc", 0).err().unwrap().exit_code(), 4);
    }
}
