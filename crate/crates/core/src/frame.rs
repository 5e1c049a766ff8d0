//! Tight frames `F` with `F^T F = nu Id`.
//!
//! `analyze` is `F` (image to coefficients), `synthesize` is `F^T`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub trait TightFrame: Send + Sync {
    /// `N`
    fn image_len(&self) -> usize;
    /// `K`
    fn coeff_len(&self) -> usize;
    fn nu(&self) -> f64;
    /// `out = F y`
    fn analyze(&self, y: &[f64], out: &mut [f64]);
    /// `out = F^T x`
    fn synthesize(&self, x: &[f64], out: &mut [f64]);

    fn analyze_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.image_len() {
            return Err(Error::ShapeMismatch {
                expected: self.image_len(),
                got: y.len(),
            });
        }
        let mut out = vec![0.0; self.coeff_len()];
        self.analyze(y, &mut out);
        Ok(out)
    }

    fn synthesize_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.coeff_len() {
            return Err(Error::ShapeMismatch {
                expected: self.coeff_len(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.image_len()];
        self.synthesize(x, &mut out);
        Ok(out)
    }
}

impl<T: TightFrame + ?Sized> TightFrame for &T {
    fn image_len(&self) -> usize {
        (**self).image_len()
    }
    fn coeff_len(&self) -> usize {
        (**self).coeff_len()
    }
    fn nu(&self) -> f64 {
        (**self).nu()
    }
    fn analyze(&self, y: &[f64], out: &mut [f64]) {
        (**self).analyze(y, out)
    }
    fn synthesize(&self, x: &[f64], out: &mut [f64]) {
        (**self).synthesize(x, out)
    }
}

/// `F = Id`, `nu = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityFrame {
    n: usize,
}

impl IdentityFrame {
    pub fn new(n: usize) -> Self {
        IdentityFrame { n }
    }
}

impl TightFrame for IdentityFrame {
    fn image_len(&self) -> usize {
        self.n
    }
    fn coeff_len(&self) -> usize {
        self.n
    }
    fn nu(&self) -> f64 {
        1.0
    }
    fn analyze(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
    fn synthesize(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

const MAX_LEVELS: usize = 3;

/// Separable orthonormal 2-D Haar transform.
///
/// Coefficients use the usual pyramid layout: after each level the
/// approximation occupies the top-left quarter of the previous block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarFrame {
    rows: usize,
    cols: usize,
    levels: usize,
}

impl HaarFrame {
    pub fn new(rows: usize, cols: usize, levels: usize) -> Result<Self> {
        if !(1..=MAX_LEVELS).contains(&levels) {
            return Err(Error::Config(format!(
                "frame.levels must be in 1..={MAX_LEVELS}, got {levels}"
            )));
        }
        let step = 1usize << levels;
        if rows == 0 || cols == 0 || !rows.is_multiple_of(step) || !cols.is_multiple_of(step) {
            return Err(Error::Config(format!(
                "{levels}-level Haar transform needs both sides divisible by {step}, got {rows}x{cols}"
            )));
        }
        Ok(HaarFrame { rows, cols, levels })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn forward_block(&self, buf: &mut [f64], tmp: &mut [f64], r: usize, c: usize) {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let stride = self.cols;
        for i in 0..r {
            let row = &mut buf[i * stride..i * stride + c];
            for k in 0..c / 2 {
                tmp[k] = s * (row[2 * k] + row[2 * k + 1]);
                tmp[c / 2 + k] = s * (row[2 * k] - row[2 * k + 1]);
            }
            row.copy_from_slice(&tmp[..c]);
        }
        for j in 0..c {
            for k in 0..r / 2 {
                let (a, b) = (buf[2 * k * stride + j], buf[(2 * k + 1) * stride + j]);
                tmp[k] = s * (a + b);
                tmp[r / 2 + k] = s * (a - b);
            }
            for i in 0..r {
                buf[i * stride + j] = tmp[i];
            }
        }
    }

    fn inverse_block(&self, buf: &mut [f64], tmp: &mut [f64], r: usize, c: usize) {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let stride = self.cols;
        for j in 0..c {
            for k in 0..r / 2 {
                let (a, d) = (buf[k * stride + j], buf[(r / 2 + k) * stride + j]);
                tmp[2 * k] = s * (a + d);
                tmp[2 * k + 1] = s * (a - d);
            }
            for i in 0..r {
                buf[i * stride + j] = tmp[i];
            }
        }
        for i in 0..r {
            let row = &mut buf[i * stride..i * stride + c];
            for k in 0..c / 2 {
                let (a, d) = (row[k], row[c / 2 + k]);
                tmp[2 * k] = s * (a + d);
                tmp[2 * k + 1] = s * (a - d);
            }
            row.copy_from_slice(&tmp[..c]);
        }
    }
}

impl TightFrame for HaarFrame {
    fn image_len(&self) -> usize {
        self.rows * self.cols
    }
    fn coeff_len(&self) -> usize {
        self.rows * self.cols
    }
    fn nu(&self) -> f64 {
        1.0
    }

    fn analyze(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
        let mut tmp = vec![0.0; self.rows.max(self.cols)];
        for l in 0..self.levels {
            self.forward_block(out, &mut tmp, self.rows >> l, self.cols >> l);
        }
    }

    fn synthesize(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        let mut tmp = vec![0.0; self.rows.max(self.cols)];
        for l in (0..self.levels).rev() {
            self.inverse_block(out, &mut tmp, self.rows >> l, self.cols >> l);
        }
    }
}

/// Union of the Haar basis and the Haar basis of the image circularly
/// shifted by one pixel along both axes. `K = 2N`, `nu = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarUnion2 {
    haar: HaarFrame,
}

impl HaarUnion2 {
    pub fn new(rows: usize, cols: usize, levels: usize) -> Result<Self> {
        Ok(HaarUnion2 {
            haar: HaarFrame::new(rows, cols, levels)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.haar.shape()
    }

    /// `out[r, c] = y[r - 1, c - 1]` (circularly), or its inverse.
    fn shift(&self, y: &[f64], out: &mut [f64], inverse: bool) {
        let (rows, cols) = self.haar.shape();
        for r in 0..rows {
            for c in 0..cols {
                let (sr, sc) = if inverse {
                    ((r + 1) % rows, (c + 1) % cols)
                } else {
                    ((r + rows - 1) % rows, (c + cols - 1) % cols)
                };
                out[r * cols + c] = y[sr * cols + sc];
            }
        }
    }
}

impl TightFrame for HaarUnion2 {
    fn image_len(&self) -> usize {
        self.haar.image_len()
    }
    fn coeff_len(&self) -> usize {
        2 * self.haar.image_len()
    }
    fn nu(&self) -> f64 {
        2.0
    }

    fn analyze(&self, y: &[f64], out: &mut [f64]) {
        let n = self.image_len();
        let (a, b) = out.split_at_mut(n);
        self.haar.analyze(y, a);
        let mut shifted = vec![0.0; n];
        self.shift(y, &mut shifted, false);
        self.haar.analyze(&shifted, b);
    }

    fn synthesize(&self, x: &[f64], out: &mut [f64]) {
        let n = self.image_len();
        self.haar.synthesize(&x[..n], out);
        let mut t = vec![0.0; n];
        self.haar.synthesize(&x[n..], &mut t);
        let mut back = vec![0.0; n];
        self.shift(&t, &mut back, true);
        for (o, b) in out.iter_mut().zip(&back) {
            *o += b;
        }
    }
}

/// Worst residuals of the frame identities over random trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessReport {
    /// `max |F^T F y - nu y|_inf`
    pub tightness: f64,
    /// `max |<F y, x> - <y, F^T x>| / (|F y| |x|)`
    pub adjointness: f64,
    /// `max | |F y|^2 - nu |y|^2 | / (nu |y|^2)`
    pub norm: f64,
}

impl TightnessReport {
    pub fn max_residual(&self) -> f64 {
        self.tightness.max(self.adjointness).max(self.norm)
    }
}

/// Checks the frame identities on `trials` random pairs drawn uniformly
/// from `[-1, 1]`.
pub fn verify_tight<F: TightFrame + ?Sized>(
    frame: &F,
    trials: usize,
    seed: u64,
) -> TightnessReport {
    let (n, k, nu) = (frame.image_len(), frame.coeff_len(), frame.nu());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = TightnessReport {
        tightness: 0.0,
        adjointness: 0.0,
        norm: 0.0,
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (mut fy, mut back, mut ftx) = (vec![0.0; k], vec![0.0; n], vec![0.0; n]);
    for _ in 0..trials {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let x: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        frame.analyze(&y, &mut fy);
        frame.synthesize(&fy, &mut back);
        frame.synthesize(&x, &mut ftx);
        let t = back
            .iter()
            .zip(&y)
            .map(|(b, y)| (b - nu * y).abs())
            .fold(0.0, f64::max);
        let yy = dot(&y, &y);
        let ff = dot(&fy, &fy);
        let denom = libm::sqrt(ff * dot(&x, &x));
        let a = if denom > 0.0 {
            (dot(&fy, &x) - dot(&y, &ftx)).abs() / denom
        } else {
            0.0
        };
        let m = if yy > 0.0 {
            (ff - nu * yy).abs() / (nu * yy)
        } else {
            0.0
        };
        rep.tightness = rep.tightness.max(t);
        rep.adjointness = rep.adjointness.max(a);
        rep.norm = rep.norm.max(m);
    }
    rep
}
