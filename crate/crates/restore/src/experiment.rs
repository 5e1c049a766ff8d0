//! Seeded phantom experiments: regularization sweeps, the decimated model
//! and the boundary-handling comparison.

use std::sync::Arc;

use ppxa_core::conv::{Boundary, ConvOperator, PeriodicRule};
use ppxa_core::frame::HaarFrame;
use ppxa_core::ppxa::PpxaParams;
use ppxa_core::prox::{ScalarFn, SeparablePenalty};
use ppxa_core::tv::{Coupling, GradientFilter, TvConfig};
use ppxa_core::{Image, Result};

use crate::metrics::{snr, ssim};
use crate::phantom::phantom;
use crate::poisson::degrade;
use crate::problem::{assemble, restore, Algorithm, Interpolation, Observation};

pub const RANGE: (f64, f64) = (0.0, 255.0);

/// `n` values spaced evenly in log scale from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// A degraded phantom together with how it is restored.
pub struct Scenario {
    pub truth: Image,
    pub obs: Observation,
    pub levels: usize,
    pub params: PpxaParams,
    pub algorithm: Algorithm,
}

impl Scenario {
    /// `side x side` phantom, `q x q` uniform blur with boundary `mode`,
    /// Poisson noise at scale `alpha`.
    pub fn phantom(side: usize, q: usize, mode: Boundary, alpha: f64, seed: u64) -> Result<Self> {
        let truth = phantom(side, side);
        let op = Arc::new(ConvOperator::uniform_2d(q, side, side, mode)?);
        let obs = degrade(&truth, op, alpha, seed)?;
        Ok(Scenario {
            truth,
            obs,
            levels: 3,
            params: PpxaParams::new(Vec::new()),
            algorithm: Algorithm::Accelerated,
        })
    }

    /// Observation scaled by `1/alpha`, put on the grid and clipped.
    pub fn baseline(&self, interp: Interpolation) -> Image {
        self.obs.grid_estimate(interp, RANGE.0, RANGE.1)
    }

    /// Restores with isotropic Roberts TV weighted by `mu` and an `l1`
    /// penalty on Haar coefficients weighted by `vartheta`.
    pub fn restore(&self, mu: f64, vartheta: f64) -> Result<Point> {
        let (rows, cols) = self.truth.shape();
        let frame = Box::new(HaarFrame::new(rows, cols, self.levels)?);
        let tv = TvConfig::from_filter(GradientFilter::Roberts, Coupling::Isotropic, mu)?;
        let phi = SeparablePenalty::uniform(rows * cols, ScalarFn::abs(1.0))?;
        let problem = assemble(
            &self.obs,
            frame,
            &tv,
            &phi,
            vartheta,
            RANGE,
            PeriodicRule::default(),
        )?;
        let params = PpxaParams {
            weights: problem.weights().to_vec(),
            ..self.params.clone()
        };
        let init = self.baseline(Interpolation::Hold);
        let out = restore(&problem, &params, &init, self.algorithm)?;
        Ok(Point {
            mu,
            vartheta,
            snr: snr(&self.truth, &out.image)?,
            ssim: ssim(&self.truth, &out.image, RANGE.1)?,
            iterations: out.solution.iterations,
            box_violation: out.box_violation,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub mu: f64,
    pub vartheta: f64,
    pub snr: f64,
    pub ssim: f64,
    pub iterations: usize,
    pub box_violation: f64,
}

fn best(points: &[Point]) -> Point {
    *points
        .iter()
        .max_by(|a, b| a.snr.total_cmp(&b.snr))
        .expect("non-empty sweep")
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub baseline_snr: f64,
    pub baseline_ssim: f64,
    /// Every `(mu, vartheta)` pair of the grid.
    pub hybrid: Vec<Point>,
    /// `vartheta = 0`, `mu` over the grid.
    pub tv_only: Vec<Point>,
    /// `mu = 0`, `vartheta` over the grid.
    pub wavelet_only: Vec<Point>,
}

impl Sweep {
    pub fn best_hybrid(&self) -> Point {
        best(&self.hybrid)
    }
    pub fn best_tv_only(&self) -> Point {
        best(&self.tv_only)
    }
    pub fn best_wavelet_only(&self) -> Point {
        best(&self.wavelet_only)
    }
}

/// Restores `scn` for every pair of `mus x varthetas` and for both single
/// regularizations on the same values.
pub fn sweep(scn: &Scenario, mus: &[f64], varthetas: &[f64]) -> Result<Sweep> {
    let base = scn.baseline(Interpolation::Hold);
    let mut hybrid = Vec::with_capacity(mus.len() * varthetas.len());
    for &mu in mus {
        for &th in varthetas {
            hybrid.push(scn.restore(mu, th)?);
        }
    }
    Ok(Sweep {
        baseline_snr: snr(&scn.truth, &base)?,
        baseline_ssim: ssim(&scn.truth, &base, RANGE.1)?,
        hybrid,
        tv_only: mus
            .iter()
            .map(|&mu| scn.restore(mu, 0.0))
            .collect::<Result<_>>()?,
        wavelet_only: varthetas
            .iter()
            .map(|&th| scn.restore(0.0, th))
            .collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryComparison {
    pub zero_pad: Point,
    pub periodic: Point,
}

/// Blurs a phantom of side `side + q - 1` with the exact (valid) model, so
/// the observation is the center `side x side` window, then restores that
/// window under zero-padded and periodic boundary models. SNR is measured
/// against the center crop of the phantom.
pub fn boundary_comparison(
    side: usize,
    q: usize,
    alpha: f64,
    seed: u64,
    mu: f64,
    vartheta: f64,
) -> Result<BoundaryComparison> {
    let ext = side + q - 1;
    let wide = phantom(ext, ext);
    let h = (q - 1) / 2;
    let truth = Image::from_fn(side, side, |r, c| wide.get(r + h, c + h));
    let valid = Arc::new(ConvOperator::uniform_2d(q, ext, ext, Boundary::Valid)?);
    let observed = degrade(&wide, valid, alpha, seed)?;
    let run = |mode| -> Result<Point> {
        let op = Arc::new(ConvOperator::uniform_2d(q, side, side, mode)?);
        let obs = Observation::new(observed.z().to_vec(), alpha, op)?;
        let scn = Scenario {
            truth: truth.clone(),
            obs,
            levels: 3,
            params: PpxaParams::new(Vec::new()),
            algorithm: Algorithm::Accelerated,
        };
        scn.restore(mu, vartheta)
    };
    Ok(BoundaryComparison {
        zero_pad: run(Boundary::ZeroPad)?,
        periodic: run(Boundary::Periodic)?,
    })
}
