//! Piecewise-constant test phantom.
//!
//! Geometry is defined on the unit square and rasterized at pixel centers
//! with exact comparisons, so the output depends only on `n`. Layers are
//! painted in table order; later layers overwrite earlier ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ComplexImage;

/// Bump when the shape table changes.
pub const PHANTOM_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
enum Shape {
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
    },
    Rect {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
    },
    /// One-pixel vertical stripes every `period` pixels inside a rectangle.
    Comb {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        period: usize,
    },
    Disk {
        cx: f64,
        cy: f64,
    },
}

#[derive(Clone, Copy, Debug)]
struct Layer {
    shape: Shape,
    value: f64,
}

const DISK_RADIUS: f64 = 1.0 / 64.0;

const fn layer(shape: Shape, value: f64) -> Layer {
    Layer { shape, value }
}

const fn disk(cx: f64, cy: f64, value: f64) -> Layer {
    layer(Shape::Disk { cx, cy }, value)
}

#[rustfmt::skip]
const LAYERS: [Layer; 15] = [
    layer(Shape::Ellipse { cx: 0.5, cy: 0.5, a: 0.46, b: 0.44 }, 0.9),
    // Nested rectangles.
    layer(Shape::Rect { x0: 0.14, y0: 0.14, x1: 0.50, y1: 0.50 }, 0.7),
    layer(Shape::Rect { x0: 0.20, y0: 0.20, x1: 0.44, y1: 0.44 }, 0.5),
    layer(Shape::Rect { x0: 0.26, y0: 0.26, x1: 0.38, y1: 0.38 }, 0.3),
    // Low-contrast comb on a plateau.
    layer(Shape::Rect { x0: 0.56, y0: 0.18, x1: 0.84, y1: 0.46 }, 0.5),
    layer(Shape::Comb { x0: 0.56, y0: 0.18, x1: 0.84, y1: 0.46, period: 4 }, 0.55),
    // Dark disks, contrasts 0.02 .. 0.16.
    disk(0.22, 0.64, 0.88),
    disk(0.36, 0.64, 0.86),
    disk(0.50, 0.64, 0.82),
    disk(0.64, 0.64, 0.74),
    // Bright disks; the last one clips at 1.
    disk(0.30, 0.78, 0.92),
    disk(0.44, 0.78, 0.94),
    disk(0.58, 0.78, 0.98),
    disk(0.72, 0.78, 1.06),
    // Small bright square inside the ellipse, lower right.
    layer(Shape::Rect { x0: 0.76, y0: 0.56, x1: 0.80, y1: 0.60 }, 0.6),
];

fn contains(shape: &Shape, x: f64, y: f64, col: usize) -> bool {
    match *shape {
        Shape::Ellipse { cx, cy, a, b } => {
            let (u, v) = ((x - cx) / a, (y - cy) / b);
            u * u + v * v <= 1.0
        }
        Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
        Shape::Comb { x0, y0, x1, y1, period } => x >= x0 && x < x1 && y >= y0 && y < y1 && col.is_multiple_of(period),
        Shape::Disk { cx, cy } => {
            let (u, v) = (x - cx, y - cy);
            u * u + v * v <= DISK_RADIUS * DISK_RADIUS
        }
    }
}

/// Real-valued phantom with values in `[0, 1]`; requires even `n >= 64`.
pub fn make_phantom(n: usize) -> Result<ComplexImage> {
    if n < 64 || !n.is_multiple_of(2) {
        return Err(Error::invalid("n", format!("phantom needs an even n >= 64, got {n}")));
    }
    let scale = n as f64;
    ComplexImage::from_fn(n, |row, col| {
        let (x, y) = ((col as f64 + 0.5) / scale, (row as f64 + 0.5) / scale);
        let mut value = 0.0;
        for l in &LAYERS {
            if contains(&l.shape, x, y, col) {
                value = l.value;
            }
        }
        Complex64::new(value.clamp(0.0, 1.0), 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_bounded_and_piecewise_constant() {
        for n in [64, 128, 256] {
            let p = make_phantom(n).unwrap();
            assert!(p.data().iter().all(|v| v.im == 0.0));
            assert!(p.data().iter().all(|v| (0.0..=1.0).contains(&v.re)));
            let mut distinct: Vec<u64> = p.data().iter().map(|v| v.re.to_bits()).collect();
            distinct.sort_unstable();
            distinct.dedup();
            assert!(distinct.len() <= 16, "{} distinct values", distinct.len());
            assert!(p.max_abs() == 1.0);
        }
    }

    #[test]
    fn deterministic_and_has_the_comb() {
        let a = make_phantom(256).unwrap();
        assert_eq!(a, make_phantom(256).unwrap());
        // Row through the plateau alternates 0.55 / 0.5 with period 4.
        let row = (0.3 * 256.0) as usize;
        let start = (0.56f64 * 256.0).ceil() as usize;
        let first = (start..start + 8).find(|c| c % 4 == 0).unwrap();
        assert_eq!(a.get(row, first).re, 0.55);
        assert_eq!(a.get(row, first + 1).re, 0.5);
        assert_eq!(a.get(row, first + 4).re, 0.55);
    }

    #[test]
    fn rejects_small_sides() {
        assert!(make_phantom(32).is_err());
        assert!(make_phantom(65).is_err());
    }
}
