//! Subspace filter banks.
//!
//! A bank holds frequency responses in natural DFT order. Each partition group
//! is a set of responses that sums to the all-ones grid, which is what makes
//! decomposing k-space with the bank lossless.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Spectrum;

/// Which part of k-space a response emphasises; selects per-subspace solver defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Low,
    High,
    /// The identity response of the trivial bank.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankKind {
    /// Single all-ones response; the framework degenerates to the base solver.
    None,
    HoriVert,
    Gaussian,
}

impl BankKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BankKind::None => "none",
            BankKind::HoriVert => "horivert",
            BankKind::Gaussian => "gaussian",
        }
    }

    pub fn build(self, n: usize) -> Result<FilterBank> {
        match self {
            BankKind::None => FilterBank::identity(n),
            BankKind::HoriVert => build_horivert(n),
            BankKind::Gaussian => build_gaussian(n),
        }
    }
}

impl fmt::Display for BankKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BankKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(BankKind::None),
            "horivert" => Ok(BankKind::HoriVert),
            "gaussian" => Ok(BankKind::Gaussian),
            other => Err(Error::invalid("bank", format!("unknown filter bank `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FilterBank {
    n: usize,
    responses: Vec<Spectrum>,
    labels: Vec<String>,
    bands: Vec<Band>,
    partition_groups: Vec<Vec<usize>>,
}

impl FilterBank {
    /// Assembles a bank; groups are zero-based response indices.
    pub fn new(
        responses: Vec<Spectrum>,
        labels: Vec<String>,
        bands: Vec<Band>,
        partition_groups: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let first = responses
            .first()
            .ok_or_else(|| Error::invalid("responses", "a filter bank needs at least one response"))?;
        let n = first.n();
        for r in &responses {
            if r.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: r.n(),
                });
            }
        }
        if labels.len() != responses.len() || bands.len() != responses.len() {
            return Err(Error::invalid("labels", "one label and one band per response"));
        }
        for group in &partition_groups {
            if group.is_empty() || group.iter().any(|&i| i >= responses.len()) {
                return Err(Error::invalid("partition_groups", format!("invalid group {group:?}")));
            }
        }
        Ok(Self {
            n,
            responses,
            labels,
            bands,
            partition_groups,
        })
    }

    /// One all-ones response.
    pub fn identity(n: usize) -> Result<Self> {
        let ones = Spectrum::new(n, vec![Complex64::new(1.0, 0.0); n * n])?;
        Self::new(vec![ones], vec!["identity".into()], vec![Band::Full], vec![vec![0]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn responses(&self) -> &[Spectrum] {
        &self.responses
    }

    pub fn response(&self, i: usize) -> &Spectrum {
        &self.responses[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn partition_groups(&self) -> &[Vec<usize>] {
        &self.partition_groups
    }

    /// True for a single response that is exactly one everywhere.
    pub fn is_identity(&self) -> bool {
        self.responses.len() == 1 && self.responses[0].data().iter().all(|v| *v == Complex64::new(1.0, 0.0))
    }
}

/// Responses of the two-tap pair along one axis: `(high, low)`.
///
/// Taps sit at circular indices `{n − 1, 0}` so the pair sums to a Kronecker
/// delta: `Ĥ_hi(k) = 0.5 − 0.5·e^{2πik/n}`, `Ĥ_lo(k) = 0.5 + 0.5·e^{2πik/n}`.
fn two_tap_axis(n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    (0..n)
        .map(|k| {
            let phase = Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            let half = Complex64::new(0.5, 0.0);
            (half - phase, half + phase)
        })
        .unzip()
}

/// The four-filter horizontal/vertical bank.
///
/// Order: `h1` (high, along columns), `h2` (high, along rows), `h3` (low,
/// along columns), `h4` (low, along rows); groups `{h1, h3}` and `{h2, h4}`.
pub fn build_horivert(n: usize) -> Result<FilterBank> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::invalid(
            "n",
            format!("HoriVert bank needs an even n >= 4, got {n}"),
        ));
    }
    let (high, low) = two_tap_axis(n);
    let along_cols = |axis: &[Complex64]| Spectrum::from_fn(n, |_, c| axis[c]);
    let along_rows = |axis: &[Complex64]| Spectrum::from_fn(n, |r, _| axis[r]);
    FilterBank::new(
        vec![
            along_cols(&high)?,
            along_rows(&high)?,
            along_cols(&low)?,
            along_rows(&low)?,
        ],
        ["h1", "h2", "h3", "h4"].iter().map(|s| s.to_string()).collect(),
        vec![Band::High, Band::High, Band::Low, Band::Low],
        vec![vec![0, 2], vec![1, 3]],
    )
}

/// Normalised 5×5 Gaussian kernel with unit standard deviation, `[u + 2][v + 2]`.
pub fn gaussian_kernel() -> [[f64; 5]; 5] {
    let mut k = [[0.0; 5]; 5];
    let mut sum = 0.0;
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (u, w) = (i as f64 - 2.0, j as f64 - 2.0);
            *v = (-(u * u + w * w) / 2.0).exp();
            sum += *v;
        }
    }
    for row in &mut k {
        for v in row {
            *v /= sum;
        }
    }
    k
}

/// Gaussian low-pass and its spectral complement: `[lp, hp]`, one group.
pub fn build_gaussian(n: usize) -> Result<FilterBank> {
    if n < 6 || !n.is_multiple_of(2) {
        return Err(Error::invalid(
            "n",
            format!("Gaussian bank needs an even n >= 6, got {n}"),
        ));
    }
    let kernel = gaussian_kernel();
    let step = 2.0 * std::f64::consts::PI / n as f64;
    // The kernel is even about its center, so its DFT is a real cosine sum.
    let lp = Spectrum::from_fn(n, |r, c| {
        let mut acc = 0.0;
        for (i, row) in kernel.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                let (u, v) = (i as f64 - 2.0, j as f64 - 2.0);
                acc += w * (step * (r as f64 * u + c as f64 * v)).cos();
            }
        }
        Complex64::new(acc, 0.0)
    })?;
    let hp = Spectrum::new(n, lp.data().iter().map(|g| Complex64::new(1.0 - g.re, 0.0)).collect())?;
    FilterBank::new(
        vec![lp, hp],
        vec!["lp".into(), "hp".into()],
        vec![Band::Low, Band::High],
        vec![vec![0, 1]],
    )
}

/// Element-wise product of a spectrum with a frequency response.
pub fn apply_response(spec: &Spectrum, response: &Spectrum) -> Result<Spectrum> {
    spec.ensure_same_side(response.n())?;
    let data = spec.data().iter().zip(response.data()).map(|(s, h)| s * h).collect();
    Spectrum::new(spec.n(), data)
}

/// Largest deviation of any partition group's response sum from one.
pub fn verify_completeness(bank: &FilterBank) -> f64 {
    let mut worst: f64 = 0.0;
    for group in &bank.partition_groups {
        for k in 0..bank.n * bank.n {
            let sum: Complex64 = group.iter().map(|&i| bank.responses[i].data()[k]).sum();
            worst = worst.max((sum - Complex64::new(1.0, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horivert_dc_and_nyquist() {
        let n = 16;
        let bank = build_horivert(n).unwrap();
        let (h1, h3) = (bank.response(0), bank.response(2));
        assert!((h3.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(h1.get(0, 0).norm() < 1e-15);
        assert!((h1.get(0, n / 2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(h3.get(0, n / 2).norm() < 1e-15);
        // h2 / h4 vary along rows instead.
        assert!((bank.response(1).get(n / 2, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(bank.response(1).get(0, n / 2).norm() < 1e-15);
    }

    #[test]
    fn horivert_magnitudes_are_sine_cosine() {
        let n = 32;
        let bank = build_horivert(n).unwrap();
        for k in 0..n {
            let t = std::f64::consts::PI * k as f64 / n as f64;
            assert!((bank.response(0).get(3, k).norm() - t.sin().abs()).abs() < 1e-12);
            assert!((bank.response(2).get(3, k).norm() - t.cos().abs()).abs() < 1e-12);
            assert!((bank.response(1).get(k, 5).norm() - t.sin().abs()).abs() < 1e-12);
            assert!((bank.response(3).get(k, 5).norm() - t.cos().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_banks() {
        for n in [8, 64, 256] {
            assert!(verify_completeness(&build_horivert(n).unwrap()) <= 1e-15);
            assert!(verify_completeness(&build_gaussian(n).unwrap()) <= 1e-15);
        }
        assert!(verify_completeness(&FilterBank::identity(8).unwrap()) == 0.0);
    }

    #[test]
    fn constructed_violation() {
        let half = Spectrum::new(4, vec![Complex64::new(0.5, 0.0); 16]).unwrap();
        let bank = FilterBank::new(vec![half], vec!["half".into()], vec![Band::Low], vec![vec![0]]).unwrap();
        assert!((verify_completeness(&bank) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kernel_center() {
        let k = gaussian_kernel();
        let direct: f64 = (-2..=2)
            .flat_map(|u| (-2..=2).map(move |v| (-((u * u + v * v) as f64) / 2.0).exp()))
            .sum();
        assert!((k[2][2] - 1.0 / direct).abs() < 1e-15);
        assert!((k[2][2] - 0.162_102_82).abs() < 1e-8);
    }

    #[test]
    fn gaussian_dc_and_symmetry() {
        let n = 16;
        let bank = build_gaussian(n).unwrap();
        let (lp, hp) = (bank.response(0), bank.response(1));
        assert!((lp.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(hp.get(0, 0).norm() < 1e-15);
        for r in 0..n {
            for c in 0..n {
                assert_eq!(lp.get(r, c).im, 0.0);
                let mirrored = lp.get((n - r) % n, (n - c) % n);
                assert!((lp.get(r, c) - mirrored).norm() < 1e-15);
                assert!(lp.get(r, c).re > 0.0);
            }
        }
    }

    #[test]
    fn rejects_small_or_odd_sides() {
        assert!(build_horivert(7).is_err());
        assert!(build_gaussian(4).is_err());
        assert!(build_gaussian(9).is_err());
    }

    #[test]
    fn apply_response_identity_and_complement() {
        let n = 8;
        let spec = Spectrum::from_fn(n, |r, c| Complex64::new(r as f64 - 1.5, c as f64 * 0.25)).unwrap();
        let ones = FilterBank::identity(n).unwrap();
        assert_eq!(apply_response(&spec, ones.response(0)).unwrap(), spec);

        let g = build_gaussian(n).unwrap();
        let sum = apply_response(&spec, g.response(0))
            .unwrap()
            .add(&apply_response(&spec, g.response(1)).unwrap())
            .unwrap();
        assert!(sum.relative_error(&spec) < 1e-12);

        let wrong = Spectrum::zeros(4).unwrap();
        assert!(apply_response(&spec, &wrong).is_err());
    }
}
