//! On-disk formats: binary grid files, 16-bit PNG exports and report documents.
//!
//! # Grid file layout
//!
//! | offset | size | content                                            |
//! |--------|------|----------------------------------------------------|
//! | 0      | 4    | ASCII magic `KDC1`                                 |
//! | 4      | 1    | kind: 0 = complex image, 1 = spectrum, 2 = mask    |
//! | 5      | 4    | side `n`, u32 little-endian                        |
//! | 9      | ...  | images/spectra: `n²` pairs of f32 LE `(re, im)`, row-major; masks: `n²` bytes of 0/1 |
//!
//! Values are stored as f32, so a round trip is bit-exact for samples that
//! are representable in single precision.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dac::{ReconReport, StageTimings};
use crate::error::{Error, Result};
use crate::grid::{center_shift_values, ComplexImage, Spectrum};
use crate::sampling::SamplingMask;
use crate::solvers::SolveTrace;

pub const MAGIC: &[u8; 4] = b"KDC1";
const HEADER_LEN: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum GridKind {
    Image = 0,
    Spectrum = 1,
    Mask = 2,
}

/// Decoded contents of a grid file.
#[derive(Clone, Debug, PartialEq)]
pub enum GridData {
    Image(ComplexImage),
    Spectrum(Spectrum),
    Mask { n: usize, bits: Vec<bool> },
}

fn header(kind: GridKind, n: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.push(kind as u8);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out
}

fn encode_complex(kind: GridKind, n: usize, data: &[Complex64]) -> Vec<u8> {
    let mut out = header(kind, n);
    out.reserve(8 * data.len());
    for v in data {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out
}

pub fn encode_image(img: &ComplexImage) -> Vec<u8> {
    encode_complex(GridKind::Image, img.n(), img.data())
}

pub fn encode_spectrum(spec: &Spectrum) -> Vec<u8> {
    encode_complex(GridKind::Spectrum, spec.n(), spec.data())
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = header(GridKind::Mask, mask.n());
    out.extend(mask.bits().iter().map(|&b| b as u8));
    out
}

/// Parses a grid file image; `path` only labels errors.
pub fn decode_grid(bytes: &[u8], path: &Path) -> Result<GridData> {
    let fail = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(fail(format!("file is {} bytes, shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(fail("bad magic, expected KDC1".into()));
    }
    let n = u32::from_le_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]) as usize;
    let payload = &bytes[HEADER_LEN..];
    let cells = n.checked_mul(n).ok_or_else(|| fail(format!("side {n} overflows")))?;
    match bytes[4] {
        k @ (0 | 1) => {
            if payload.len() != 8 * cells {
                return Err(fail(format!(
                    "payload is {} bytes, expected {}",
                    payload.len(),
                    8 * cells
                )));
            }
            let data: Vec<Complex64> = payload
                .chunks_exact(8)
                .map(|c| {
                    let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                    let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                    Complex64::new(re as f64, im as f64)
                })
                .collect();
            if k == 0 {
                Ok(GridData::Image(
                    ComplexImage::new(n, data).map_err(|e| fail(e.to_string()))?,
                ))
            } else {
                Ok(GridData::Spectrum(
                    Spectrum::new(n, data).map_err(|e| fail(e.to_string()))?,
                ))
            }
        }
        2 => {
            if payload.len() != cells {
                return Err(fail(format!("payload is {} bytes, expected {cells}", payload.len())));
            }
            let bits = payload
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(fail(format!("mask byte {other} is not 0 or 1"))),
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok(GridData::Mask { n, bits })
        }
        other => Err(fail(format!("unknown kind byte {other}"))),
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", format!("{path:?} has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn write_image(path: &Path, img: &ComplexImage) -> Result<()> {
    write_atomic(path, &encode_image(img))
}

pub fn write_spectrum(path: &Path, spec: &Spectrum) -> Result<()> {
    write_atomic(path, &encode_spectrum(spec))
}

pub fn write_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    write_atomic(path, &encode_mask(mask))
}

pub fn read_grid(path: &Path) -> Result<GridData> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grid(&bytes, path)
}

/// Intensity mapping for PNG export.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PngMode {
    /// `[0, max]` maps linearly to `[0, 65535]`.
    Magnitude,
    /// Values are clamped to `[lo, hi]` and mapped linearly.
    Window { lo: f64, hi: f64 },
}

/// 16-bit gray levels for `values` under `mode`.
pub fn gray_levels(values: &[f64], mode: PngMode) -> Result<Vec<u16>> {
    let (lo, hi) = match mode {
        PngMode::Magnitude => (0.0, values.iter().cloned().fold(0.0, f64::max)),
        PngMode::Window { lo, hi } => {
            if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid(
                    "window",
                    format!("window_hi ({hi}) must exceed window_lo ({lo})"),
                ));
            }
            (lo, hi)
        }
    };
    if hi <= lo {
        return Ok(vec![0; values.len()]);
    }
    Ok(values
        .iter()
        .map(|v| {
            let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            (t * 65535.0).round() as u16
        })
        .collect())
}

/// Writes a row-major `n × n` buffer as a 16-bit grayscale PNG.
pub fn export_png(values: &[f64], n: usize, mode: PngMode, path: &Path) -> Result<()> {
    if values.len() != n * n {
        return Err(Error::invalid(
            "values",
            format!("expected {} values for n = {n}", n * n),
        ));
    }
    let levels = gray_levels(values, mode)?;
    let buffer: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(n as u32, n as u32, levels).expect("buffer length checked above");
    let mut bytes = Vec::new();
    buffer
        .write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Png {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    write_atomic(path, &bytes)
}

/// Magnitude image.
pub fn export_image_png(img: &ComplexImage, path: &Path) -> Result<()> {
    export_png(&img.magnitude(), img.n(), PngMode::Magnitude, path)
}

/// Centered `log(1 + |Y|)` view of a spectrum.
pub fn export_spectrum_png(spec: &Spectrum, path: &Path) -> Result<()> {
    let logged: Vec<f64> = spec.magnitude().iter().map(|v| v.ln_1p()).collect();
    export_png(
        &center_shift_values(spec.n(), &logged),
        spec.n(),
        PngMode::Magnitude,
        path,
    )
}

/// Centered error map (natural-order input) clamped to a window.
pub fn export_error_map_png(values: &[f64], n: usize, lo: f64, hi: f64, path: &Path) -> Result<()> {
    export_png(&center_shift_values(n, values), n, PngMode::Window { lo, hi }, path)
}

/// Centered filter response magnitude, black at 0 and white at 1.
pub fn export_response_png(response: &Spectrum, path: &Path) -> Result<()> {
    export_error_map_png(&response.magnitude(), response.n(), 0.0, 1.0, path)
}

/// Centered black/white mask.
pub fn export_mask_png(mask: &SamplingMask, path: &Path) -> Result<()> {
    let values: Vec<f64> = mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    export_error_map_png(&values, mask.n(), 0.0, 1.0, path)
}

/// JSON document written next to the image sidecars of a [`ReconReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub image: String,
    pub labels: Vec<String>,
    pub subspace_images: Vec<String>,
    pub lambda_history: Vec<Vec<f64>>,
    pub relative_change_history: Vec<f64>,
    pub traces: Vec<SolveTrace>,
    pub outer_iterations: usize,
    pub weights_converged: bool,
    pub timings: StageTimings,
}

/// Writes `report.json`, `recon.kdc` and one `subspace_<label>.kdc` per subspace into `dir`.
/// Returns every path written.
pub fn write_report(report: &ReconReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let image_name = "recon.kdc".to_string();
    write_image(&dir.join(&image_name), &report.image)?;
    written.push(dir.join(&image_name));
    let mut sidecars = Vec::new();
    for (label, img) in report.labels.iter().zip(&report.subspace_images) {
        let name = format!("subspace_{label}.kdc");
        write_image(&dir.join(&name), img)?;
        written.push(dir.join(&name));
        sidecars.push(name);
    }
    let doc = ReportDocument {
        image: image_name,
        labels: report.labels.clone(),
        subspace_images: sidecars,
        lambda_history: report.lambda_history.clone(),
        relative_change_history: report.relative_change_history.clone(),
        traces: report.traces.clone(),
        outer_iterations: report.outer_iterations,
        weights_converged: report.weights_converged,
        timings: report.timings.clone(),
    };
    let json = serde_json::to_vec_pretty(&doc).expect("report document is always serializable");
    let path = dir.join("report.json");
    write_atomic(&path, &json)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling::{generate_mask, MaskKind};

    fn f32_image(n: usize, seed: u64) -> ComplexImage {
        let mut rng = SplitMix64::new(seed);
        ComplexImage::from_fn(n, |_, _| {
            Complex64::new(rng.next_f64() as f32 as f64, (rng.next_f64() - 0.5) as f32 as f64)
        })
        .unwrap()
    }

    #[test]
    fn image_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.kdc");
        let img = f32_image(32, 1);
        write_image(&path, &img).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"KDC1");
        assert_eq!(bytes[4], 0);
        assert_eq!(&bytes[5..9], &32u32.to_le_bytes());
        assert_eq!(bytes.len(), 9 + 8 * 32 * 32);
        match read_grid(&path).unwrap() {
            GridData::Image(back) => {
                for (a, b) in back.data().iter().zip(img.data()) {
                    assert_eq!(a.re.to_bits(), b.re.to_bits());
                    assert_eq!(a.im.to_bits(), b.im.to_bits());
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectrum_and_mask_round_trip() {
        let spec = Spectrum::new(8, f32_image(8, 2).into_data()).unwrap();
        assert_eq!(
            decode_grid(&encode_spectrum(&spec), Path::new("s")).unwrap(),
            GridData::Spectrum(spec)
        );

        let mask = generate_mask(MaskKind::Radial, 0.3, 64, 7).unwrap();
        match decode_grid(&encode_mask(&mask), Path::new("m")).unwrap() {
            GridData::Mask { n, bits } => {
                assert_eq!(n, 64);
                assert_eq!(bits, mask.bits());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_files_are_format_errors() {
        let good = encode_image(&f32_image(8, 3));
        let p = Path::new("bad.kdc");
        assert!(matches!(
            decode_grid(&good[..good.len() - 3], p),
            Err(Error::Format { .. })
        ));
        assert!(matches!(decode_grid(&good[..5], p), Err(Error::Format { .. })));
        let mut wrong = good.clone();
        wrong[0] = b'X';
        assert!(matches!(decode_grid(&wrong, p), Err(Error::Format { .. })));
        let mut kind = good.clone();
        kind[4] = 9;
        assert!(matches!(decode_grid(&kind, p), Err(Error::Format { .. })));
        let mut mask = encode_mask(&generate_mask(MaskKind::Random2d, 0.5, 8, 1).unwrap());
        mask[10] = 7;
        assert!(matches!(decode_grid(&mask, p), Err(Error::Format { .. })));
    }

    #[test]
    fn gray_level_mapping() {
        assert_eq!(gray_levels(&[0.0, 0.0], PngMode::Magnitude).unwrap(), vec![0, 0]);
        assert_eq!(
            gray_levels(&[0.0, 0.5, 2.0], PngMode::Magnitude).unwrap(),
            vec![0, 16384, 65535]
        );
        let w = PngMode::Window { lo: 0.0, hi: 0.08 };
        assert_eq!(gray_levels(&[0.08, 0.5, -1.0], w).unwrap(), vec![65535, 65535, 0]);
        assert!(gray_levels(&[0.0], PngMode::Window { lo: 1.0, hi: 1.0 }).is_err());
    }

    #[test]
    fn png_export_writes_16_bit_gray() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.png");
        export_image_png(&ComplexImage::zeros(16).unwrap(), &path).unwrap();
        let decoded = image::open(&path).unwrap();
        assert_eq!(decoded.color(), image::ColorType::L16);
        assert!(decoded.to_luma16().pixels().all(|p| p.0[0] == 0));
    }
}
