//! Undersampling masks, simulated acquisition and k-space noise.
//!
//! Masks live in natural DFT order like every [`Spectrum`]. All randomness
//! comes from [`SplitMix64`] so a `(kind, n, ratio, seed)` tuple always
//! produces the same bits.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fft2, ifft2, signed_frequency, ComplexImage, Spectrum};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskKind {
    /// Whole phase-encode rows, variable density along the row index.
    Cartesian,
    /// Individual k-space points with radial variable density.
    Random2d,
    /// Equiangular spokes through DC.
    Radial,
}

impl MaskKind {
    pub const ALL: [MaskKind; 3] = [MaskKind::Cartesian, MaskKind::Random2d, MaskKind::Radial];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskKind::Cartesian => "cartesian",
            MaskKind::Random2d => "random2d",
            MaskKind::Radial => "radial",
        }
    }
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(MaskKind::Cartesian),
            "random2d" | "random" => Ok(MaskKind::Random2d),
            "radial" => Ok(MaskKind::Radial),
            other => Err(Error::invalid("kind", format!("unknown mask kind `{other}`"))),
        }
    }
}

/// Shape parameters for variable-density masks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskOptions {
    /// Exponent of the `(1 − r / r_max)^p` density profile.
    pub density_power: f64,
    /// Fraction of rows around DC that Cartesian masks always include.
    pub cartesian_center_fraction: f64,
}

impl Default for MaskOptions {
    fn default() -> Self {
        Self {
            density_power: 6.0,
            cartesian_center_fraction: 0.04,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingMask {
    n: usize,
    kind: MaskKind,
    bits: Vec<bool>,
    target_ratio: f64,
    achieved_ratio: f64,
    seed: u64,
}

impl SamplingMask {
    /// Wraps an externally produced bit grid. DC must be sampled.
    pub fn from_bits(n: usize, kind: MaskKind, bits: Vec<bool>, seed: u64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid(
                "n",
                format!("side length must be a positive even integer, got {n}"),
            ));
        }
        if bits.len() != n * n {
            return Err(Error::invalid(
                "bits",
                format!("expected {} entries, got {}", n * n, bits.len()),
            ));
        }
        if !bits[0] {
            return Err(Error::invalid("bits", "the DC coefficient must be sampled"));
        }
        let achieved = bits.iter().filter(|&&b| b).count() as f64 / (n * n) as f64;
        Ok(Self {
            n,
            kind,
            bits,
            target_ratio: achieved,
            achieved_ratio: achieved,
            seed,
        })
    }

    /// Mask sampling only the DC coefficient.
    pub fn dc_only(n: usize, kind: MaskKind) -> Result<Self> {
        let mut bits = vec![false; n * n];
        if let Some(b) = bits.first_mut() {
            *b = true;
        }
        Self::from_bits(n, kind, bits, 0)
    }

    pub fn full(n: usize, kind: MaskKind) -> Result<Self> {
        Self::from_bits(n, kind, vec![true; n * n], 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn target_ratio(&self) -> f64 {
        self.target_ratio
    }

    pub fn achieved_ratio(&self) -> f64 {
        self.achieved_ratio
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampled_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    #[inline]
    pub fn is_sampled(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.n + col]
    }
}

/// Zero-filled k-space measurement together with the mask that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    spec: Spectrum,
    mask: SamplingMask,
}

impl Measurement {
    /// Pairs a spectrum with its mask; every unsampled entry must be exactly zero.
    pub fn new(spec: Spectrum, mask: SamplingMask) -> Result<Self> {
        spec.ensure_same_side(mask.n)?;
        let leaked = spec
            .data()
            .iter()
            .zip(&mask.bits)
            .any(|(v, &b)| !b && (v.re != 0.0 || v.im != 0.0));
        if leaked {
            return Err(Error::invalid("spec", "non-zero value outside the mask support"));
        }
        Ok(Self { spec, mask })
    }

    pub(crate) fn new_unchecked(spec: Spectrum, mask: SamplingMask) -> Self {
        Self { spec, mask }
    }

    pub fn spec(&self) -> &Spectrum {
        &self.spec
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }
}

pub fn generate_mask(kind: MaskKind, target_ratio: f64, n: usize, seed: u64) -> Result<SamplingMask> {
    generate_mask_with(kind, target_ratio, n, seed, &MaskOptions::default())
}

pub fn generate_mask_with(
    kind: MaskKind,
    target_ratio: f64,
    n: usize,
    seed: u64,
    options: &MaskOptions,
) -> Result<SamplingMask> {
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::invalid(
            "ratio",
            format!("must lie in (0, 1], got {target_ratio}"),
        ));
    }
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::invalid("n", format!("must be an even integer >= 4, got {n}")));
    }
    if !(options.density_power.is_finite() && options.density_power >= 0.0) {
        return Err(Error::invalid("density_power", "must be finite and non-negative"));
    }
    let bits = if target_ratio >= 1.0 {
        vec![true; n * n]
    } else {
        match kind {
            MaskKind::Cartesian => cartesian_bits(n, target_ratio, seed, options),
            MaskKind::Random2d => random2d_bits(n, target_ratio, seed, options),
            MaskKind::Radial => radial_bits(n, target_ratio)?,
        }
    };
    debug_assert!(bits[0]);
    let achieved_ratio = bits.iter().filter(|&&b| b).count() as f64 / (n * n) as f64;
    Ok(SamplingMask {
        n,
        kind,
        bits,
        target_ratio,
        achieved_ratio,
        seed,
    })
}

/// Indices of the `count` smallest scores; ties resolved by index.
fn lowest_scores(scores: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[a].total_cmp(&scores[b]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order.truncate(count);
    order
}

fn density(distance: f64, max_distance: f64, power: f64) -> f64 {
    (1.0 - distance / max_distance).max(0.0).powf(power)
}

fn random2d_bits(n: usize, ratio: f64, seed: u64, options: &MaskOptions) -> Vec<bool> {
    let total = n * n;
    let count = ((ratio * total as f64).floor() as usize).clamp(1, total);
    let r_max = std::f64::consts::SQRT_2 * (n / 2) as f64;
    let mut rng = SplitMix64::new(seed);
    let mut scores = Vec::with_capacity(total);
    for row in 0..n {
        let fr = signed_frequency(row, n) as f64;
        for col in 0..n {
            let fc = signed_frequency(col, n) as f64;
            let u = rng.next_open01();
            let p = density((fr * fr + fc * fc).sqrt(), r_max, options.density_power);
            scores.push(if p > 0.0 { u / p } else { f64::INFINITY });
        }
    }
    // DC is always kept.
    scores[0] = f64::NEG_INFINITY;
    let mut bits = vec![false; total];
    for idx in lowest_scores(&scores, count) {
        bits[idx] = true;
    }
    bits
}

fn cartesian_bits(n: usize, ratio: f64, seed: u64, options: &MaskOptions) -> Vec<bool> {
    let rows = ((ratio * n as f64).round() as usize).clamp(1, n);
    let center = ((options.cartesian_center_fraction * n as f64).ceil() as usize).min(rows);
    let half = (n / 2) as f64;

    // Rows ordered by |frequency|: 0, 1, n-1, 2, n-2, ...
    let mut by_frequency: Vec<usize> = (0..n).collect();
    by_frequency.sort_by_key(|&r| (signed_frequency(r, n).unsigned_abs(), r));
    let mut rng = SplitMix64::new(seed);
    let mut scores: Vec<f64> = (0..n)
        .map(|row| {
            let u = rng.next_open01();
            let p = density(
                signed_frequency(row, n).unsigned_abs() as f64,
                half,
                options.density_power,
            );
            if p > 0.0 {
                u / p
            } else {
                f64::INFINITY
            }
        })
        .collect();
    for &row in by_frequency.iter().take(center.max(1)) {
        scores[row] = f64::NEG_INFINITY;
    }
    let mut bits = vec![false; n * n];
    for row in lowest_scores(&scores, rows) {
        bits[row * n..(row + 1) * n].fill(true);
    }
    bits
}

/// Rasterizes `spokes` equiangular lines through DC with a symmetric DDA.
///
/// Offsets are limited to `|d| <= n/2 - 1` so that every sampled point has
/// its 180° partner on the grid.
pub(crate) fn rasterize_spokes(n: usize, spokes: usize) -> Vec<bool> {
    let h = (n / 2 - 1) as isize;
    let ni = n as isize;
    let mut bits = vec![false; n * n];
    let mut mark = |dy: isize, dx: isize| {
        if dy.abs() <= h && dx.abs() <= h {
            let row = dy.rem_euclid(ni) as usize;
            let col = dx.rem_euclid(ni) as usize;
            bits[row * n + col] = true;
        }
    };
    mark(0, 0);
    for k in 0..spokes {
        let theta = std::f64::consts::PI * k as f64 / spokes as f64;
        let (sin, cos) = theta.sin_cos();
        if cos.abs() >= sin.abs() {
            let slope = sin / cos;
            for m in -h..=h {
                mark((m as f64 * slope).round() as isize, m);
            }
        } else {
            let slope = cos / sin;
            for m in -h..=h {
                mark(m, (m as f64 * slope).round() as isize);
            }
        }
    }
    bits
}

fn radial_bits(n: usize, ratio: f64) -> Result<Vec<bool>> {
    let total = (n * n) as f64;
    let ratio_of = |s: usize| rasterize_spokes(n, s).iter().filter(|&&b| b).count() as f64 / total;

    let limit = 16 * n;
    let mut hi = 1;
    while hi < limit && ratio_of(hi) < ratio {
        hi = (hi * 2).min(limit);
    }
    let mut lo = hi / 2;
    if ratio_of(hi) >= ratio {
        // Smallest spoke count reaching the target.
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ratio_of(mid) >= ratio {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let best = (hi.saturating_sub(2).max(1)..=(hi + 2).min(limit))
        .min_by(|&a, &b| {
            (ratio_of(a) - ratio)
                .abs()
                .total_cmp(&(ratio_of(b) - ratio).abs())
                .then(a.cmp(&b))
        })
        .unwrap_or(hi);
    if (ratio_of(best) - ratio).abs() > 0.01 {
        return Err(Error::invalid(
            "ratio",
            format!(
                "radial mask cannot reach {ratio} at n = {n} (closest {:.4})",
                ratio_of(best)
            ),
        ));
    }
    Ok(rasterize_spokes(n, best))
}

/// `mask ⊙ fft2(x)`.
pub fn undersample(x: &ComplexImage, mask: &SamplingMask) -> Result<Measurement> {
    x.ensure_same_side(mask.n)?;
    let mut spec = fft2(x)?;
    apply_mask(&mut spec, mask);
    Ok(Measurement::new_unchecked(spec, mask.clone()))
}

/// Zeroes every unsampled coefficient in place.
pub fn apply_mask(spec: &mut Spectrum, mask: &SamplingMask) {
    for (v, &b) in spec.data_mut().iter_mut().zip(&mask.bits) {
        if !b {
            *v = Complex64::new(0.0, 0.0);
        }
    }
}

/// Adjoint of the sampling operator: the inverse transform of the zero-filled data.
pub fn zero_fill(meas: &Measurement) -> Result<ComplexImage> {
    ifft2(&meas.spec)
}

/// Adds i.i.d. `N(0, sigma²)` noise to the real and imaginary parts of every sampled coefficient.
pub fn add_noise(meas: &Measurement, sigma: f64, seed: u64) -> Result<Measurement> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(meas.clone());
    }
    let mut rng = SplitMix64::new(seed);
    let mut spec = meas.spec.clone();
    for (v, &b) in spec.data_mut().iter_mut().zip(&meas.mask.bits) {
        if b {
            let re = rng.next_gaussian();
            let im = rng.next_gaussian();
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }
    Ok(Measurement::new_unchecked(spec, meas.mask.clone()))
}
