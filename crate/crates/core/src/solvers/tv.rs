//! Isotropic total-variation proximal operator (Chambolle's dual projection).
//!
//! Forward differences with a zero gradient across the last row and column.
//! Complex images are handled one channel at a time.

use num_complex::Complex64;

use crate::grid::ComplexImage;

/// Chambolle's fixed-point step. Converges for `τ ≤ 1/8`; `1/4` works in practice.
const TAU: f64 = 0.25;

fn gradient(u: &[f64], rows: usize, cols: usize, gx: &mut [f64], gy: &mut [f64]) {
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            gx[i] = if c + 1 < cols { u[i + 1] - u[i] } else { 0.0 };
            gy[i] = if r + 1 < rows { u[i + cols] - u[i] } else { 0.0 };
        }
    }
}

/// Negative adjoint of [`gradient`].
fn divergence(px: &[f64], py: &[f64], rows: usize, cols: usize, out: &mut [f64]) {
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let dx = if c + 1 < cols { px[i] } else { 0.0 } - if c > 0 { px[i - 1] } else { 0.0 };
            let dy = if r + 1 < rows { py[i] } else { 0.0 } - if r > 0 { py[i - cols] } else { 0.0 };
            out[i] = dx + dy;
        }
    }
}

/// Isotropic TV of one real channel.
pub fn total_variation(u: &[f64], rows: usize, cols: usize) -> f64 {
    let mut gx = vec![0.0; u.len()];
    let mut gy = vec![0.0; u.len()];
    gradient(u, rows, cols, &mut gx, &mut gy);
    gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).sum()
}

/// Approximates `argmin_u ½‖u − f‖² + weight·TV(u)` for one real channel.
pub fn tv_denoise(f: &[f64], rows: usize, cols: usize, weight: f64, iters: usize) -> Vec<f64> {
    assert_eq!(f.len(), rows * cols, "channel length must be rows * cols");
    if weight <= 0.0 || iters == 0 {
        return f.to_vec();
    }
    let len = f.len();
    let mut px = vec![0.0; len];
    let mut py = vec![0.0; len];
    let mut div = vec![0.0; len];
    let mut term = vec![0.0; len];
    let mut gx = vec![0.0; len];
    let mut gy = vec![0.0; len];
    let inv_weight = 1.0 / weight;
    for _ in 0..iters {
        divergence(&px, &py, rows, cols, &mut div);
        for i in 0..len {
            term[i] = div[i] - f[i] * inv_weight;
        }
        gradient(&term, rows, cols, &mut gx, &mut gy);
        for i in 0..len {
            let denom = 1.0 + TAU * gx[i].hypot(gy[i]);
            px[i] = (px[i] + TAU * gx[i]) / denom;
            py[i] = (py[i] + TAU * gy[i]) / denom;
        }
    }
    divergence(&px, &py, rows, cols, &mut div);
    f.iter().zip(&div).map(|(v, d)| v - weight * d).collect()
}

fn split(img: &ComplexImage) -> (Vec<f64>, Vec<f64>) {
    img.data().iter().map(|v| (v.re, v.im)).unzip()
}

/// TV proximal map applied to the real and imaginary channels independently.
pub fn tv_prox(img: &ComplexImage, weight: f64, inner_iters: usize) -> ComplexImage {
    if weight <= 0.0 {
        return img.clone();
    }
    let n = img.n();
    let (re, im) = split(img);
    let re = tv_denoise(&re, n, n, weight, inner_iters);
    let im = if im.iter().all(|&v| v == 0.0) {
        im
    } else {
        tv_denoise(&im, n, n, weight, inner_iters)
    };
    let data = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    ComplexImage::new(n, data).expect("same side as input")
}

/// Sum of the channel-wise TV of the real and imaginary parts.
pub fn complex_total_variation(img: &ComplexImage) -> f64 {
    let n = img.n();
    let (re, im) = split(img);
    total_variation(&re, n, n) + total_variation(&im, n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    /// Projected gradient on the dual `min_{|p|≤1} ½‖f − w·div p‖²`, run long.
    fn dual_oracle(f: &[f64], rows: usize, cols: usize, w: f64, iters: usize) -> Vec<f64> {
        let len = f.len();
        let (mut px, mut py) = (vec![0.0; len], vec![0.0; len]);
        let mut div = vec![0.0; len];
        let (mut gx, mut gy) = (vec![0.0; len], vec![0.0; len]);
        // ‖∇‖² ≤ 8, so the dual gradient is Lipschitz with constant 8 w².
        let step = 1.0 / (8.0 * w * w);
        for _ in 0..iters {
            divergence(&px, &py, rows, cols, &mut div);
            let resid: Vec<f64> = f.iter().zip(&div).map(|(a, d)| a - w * d).collect();
            // d/dp ½‖f − w div p‖² = w ∇(f − w div p)
            gradient(&resid, rows, cols, &mut gx, &mut gy);
            for i in 0..len {
                let (qx, qy) = (px[i] - step * w * gx[i], py[i] - step * w * gy[i]);
                let m = qx.hypot(qy).max(1.0);
                px[i] = qx / m;
                py[i] = qy / m;
            }
        }
        divergence(&px, &py, rows, cols, &mut div);
        f.iter().zip(&div).map(|(a, d)| a - w * d).collect()
    }

    #[test]
    fn adjointness_of_difference_operators() {
        let (rows, cols) = (5, 7);
        let mut rng = SplitMix64::new(1);
        let u: Vec<f64> = (0..rows * cols).map(|_| rng.next_f64()).collect();
        let px: Vec<f64> = (0..rows * cols).map(|_| rng.next_f64()).collect();
        let py: Vec<f64> = (0..rows * cols).map(|_| rng.next_f64()).collect();
        let (mut gx, mut gy, mut div) = (vec![0.0; 35], vec![0.0; 35], vec![0.0; 35]);
        gradient(&u, rows, cols, &mut gx, &mut gy);
        divergence(&px, &py, rows, cols, &mut div);
        let lhs: f64 = (0..35).map(|i| gx[i] * px[i] + gy[i] * py[i]).sum();
        let rhs: f64 = -(0..35).map(|i| u[i] * div[i]).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_and_constant_are_fixed_points() {
        let mut rng = SplitMix64::new(2);
        let img = ComplexImage::from_fn(8, |_, _| Complex64::new(rng.next_f64(), rng.next_f64())).unwrap();
        assert_eq!(tv_prox(&img, 0.0, 10), img);
        let flat = ComplexImage::from_fn(8, |_, _| Complex64::new(0.4, -0.2)).unwrap();
        let out = tv_prox(&flat, 0.7, 50);
        assert!(out.relative_error(&flat) < 1e-15);
    }

    #[test]
    fn three_by_three_matches_dual_oracle() {
        let f = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let oracle = dual_oracle(&f, 3, 3, 0.1, 100_000);
        let ours = tv_denoise(&f, 3, 3, 0.1, 5_000);
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-4, "{ours:?} vs {oracle:?}");
        }
        // Mean is preserved and the peak is pulled down.
        assert!((ours.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(ours[4] < 1.0 && ours[4] > 0.5);
    }

    #[test]
    fn prox_lowers_the_prox_objective() {
        let mut rng = SplitMix64::new(3);
        let f: Vec<f64> = (0..64).map(|_| rng.next_f64()).collect();
        let w = 0.2;
        let obj = |u: &[f64]| {
            0.5 * u.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + w * total_variation(u, 8, 8)
        };
        let u = tv_denoise(&f, 8, 8, w, 200);
        assert!(obj(&u) < obj(&f));
    }
}
