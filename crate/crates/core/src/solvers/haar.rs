//! Orthonormal multilevel 2-D Haar transform (Mallat layout).
//!
//! Level `l` transforms the top-left `n / 2^(l-1)` square: rows first, then
//! columns, approximation in the low half. Real and imaginary channels are
//! transformed independently, which for a real-coefficient transform is the
//! same as transforming the complex samples.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexImage;

/// Haar coefficients of an `n × n` image.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoefficients {
    levels: usize,
    grid: ComplexImage,
}

impl HaarCoefficients {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn data(&self) -> &[Complex64] {
        self.grid.data()
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        self.grid.data_mut()
    }

    /// Side of the coarsest approximation block.
    pub fn approx_side(&self) -> usize {
        self.grid.n() >> self.levels
    }
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    if levels == 0 || levels >= usize::BITS as usize || !n.is_multiple_of(1usize << levels) {
        return Err(Error::invalid(
            "wavelet_levels",
            format!("n = {n} is not divisible by 2^{levels}"),
        ));
    }
    Ok(())
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn forward_line(line: &mut [Complex64], tmp: &mut [Complex64]) {
    let half = line.len() / 2;
    for i in 0..half {
        let (a, b) = (line[2 * i], line[2 * i + 1]);
        tmp[i] = (a + b) * INV_SQRT2;
        tmp[half + i] = (a - b) * INV_SQRT2;
    }
    line.copy_from_slice(&tmp[..line.len()]);
}

fn inverse_line(line: &mut [Complex64], tmp: &mut [Complex64]) {
    let half = line.len() / 2;
    for i in 0..half {
        let (s, d) = (line[i], line[half + i]);
        tmp[2 * i] = (s + d) * INV_SQRT2;
        tmp[2 * i + 1] = (s - d) * INV_SQRT2;
    }
    line.copy_from_slice(&tmp[..line.len()]);
}

fn rows_pass(data: &mut [Complex64], n: usize, side: usize, op: LineOp, tmp: &mut [Complex64]) {
    for r in 0..side {
        op(&mut data[r * n..r * n + side], tmp);
    }
}

fn cols_pass(data: &mut [Complex64], n: usize, side: usize, op: LineOp, tmp: &mut [Complex64]) {
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for c in 0..side {
        for r in 0..side {
            line[r] = data[r * n + c];
        }
        op(&mut line, tmp);
        for r in 0..side {
            data[r * n + c] = line[r];
        }
    }
}

type LineOp = fn(&mut [Complex64], &mut [Complex64]);

pub fn haar_forward(img: &ComplexImage, levels: usize) -> Result<HaarCoefficients> {
    let n = img.n();
    check_levels(n, levels)?;
    let mut grid = img.clone();
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    for level in 0..levels {
        let side = n >> level;
        rows_pass(grid.data_mut(), n, side, forward_line, &mut tmp);
        cols_pass(grid.data_mut(), n, side, forward_line, &mut tmp);
    }
    Ok(HaarCoefficients { levels, grid })
}

pub fn haar_inverse(coeffs: &HaarCoefficients) -> Result<ComplexImage> {
    let n = coeffs.n();
    check_levels(n, coeffs.levels)?;
    let mut grid = coeffs.grid.clone();
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    for level in (0..coeffs.levels).rev() {
        let side = n >> level;
        cols_pass(grid.data_mut(), n, side, inverse_line, &mut tmp);
        rows_pass(grid.data_mut(), n, side, inverse_line, &mut tmp);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random(n: usize, seed: u64) -> ComplexImage {
        let mut rng = SplitMix64::new(seed);
        ComplexImage::from_fn(n, |_, _| Complex64::new(rng.next_f64(), rng.next_f64())).unwrap()
    }

    #[test]
    fn perfect_reconstruction_and_energy() {
        let x = random(256, 1);
        let c = haar_forward(&x, 4).unwrap();
        let back = haar_inverse(&c).unwrap();
        assert!(back.relative_error(&x) <= 1e-12);
        let e: f64 = c.data().iter().map(|v| v.norm_sqr()).sum();
        assert!((e - x.energy()).abs() / x.energy() <= 1e-10);
    }

    #[test]
    fn constant_has_no_details() {
        let n = 32;
        let x = ComplexImage::from_fn(n, |_, _| Complex64::new(0.3, -0.1)).unwrap();
        let c = haar_forward(&x, 3).unwrap();
        let a = c.approx_side();
        assert_eq!(a, 4);
        for r in 0..n {
            for col in 0..n {
                if r >= a || col >= a {
                    assert!(c.data()[r * n + col].norm() < 1e-14);
                }
            }
        }
        // Approximation carries the scaled mean: 0.3 * 2^3.
        assert!((c.data()[0].re - 2.4).abs() < 1e-12);
    }

    #[test]
    fn single_level_by_hand() {
        let x = ComplexImage::from_real(
            4,
            &[
                1.0, 3.0, 0.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0, 2.0, 2.0,
            ],
        )
        .unwrap();
        let c = haar_forward(&x, 1).unwrap();
        // Top-left block of [[1,3],[1,3]]: approx 4, horizontal detail -2.
        assert!((c.data()[0].re - 4.0).abs() < 1e-14);
        assert!((c.data()[2].re + 2.0).abs() < 1e-14);
        assert!((c.data()[5].re - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_indivisible_side() {
        let x = random(12, 2);
        assert!(haar_forward(&x, 3).is_err());
        assert!(haar_forward(&x, 0).is_err());
        assert!(haar_forward(&x, 2).is_ok());
    }
}
