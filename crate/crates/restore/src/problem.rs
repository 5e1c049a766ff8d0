//! Assembly of the hybrid restoration criterion
//!
//! `Psi(T F^T x) + mu tv(F^T x) + i_C(F^T x) + vartheta Phi(x)`
//!
//! as the function list consumed by the frame solvers, plus the
//! `restore` driver.

use std::sync::Arc;

use ppxa_core::conv::{split_fidelity, ConvOperator, FidelityPiece, PeriodicRule};
use ppxa_core::frame::TightFrame;
use ppxa_core::ppxa::{
    ppxa_accelerated_solve, ppxa_frame_solve, validate_params, PpxaParams, Solution,
};
use ppxa_core::prox::{kl_value, BoxIndicator, SeparablePenalty};
use ppxa_core::tv::{split_tv, tv_value, TvBlock, TvConfig};
use ppxa_core::{Error, ExtReal, Image, ProxFunction, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Frame form of the general algorithm: `2S` frame applications per iteration.
    Ppxa,
    /// Three frame applications per iteration.
    #[default]
    Accelerated,
}

/// How an observation is carried back onto the image grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Every pixel takes the observation whose receptive field is centered nearest.
    #[default]
    Hold,
    /// Each observation lands on the first pixel of its cell, the rest are zero.
    Zero,
}

/// Poisson counts `z` of `alpha * T y`.
#[derive(Debug, Clone)]
pub struct Observation {
    z: Vec<f64>,
    alpha: f64,
    op: Arc<ConvOperator>,
}

impl Observation {
    pub fn new(z: Vec<f64>, alpha: f64, op: Arc<ConvOperator>) -> Result<Self> {
        if z.len() != op.output_len() {
            return Err(Error::ShapeMismatch {
                expected: op.output_len(),
                got: z.len(),
            });
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise scale alpha must be > 0, got {alpha}"
            )));
        }
        if let Some((m, v)) = z
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0 && v.fract() == 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "count z[{m}] = {v} is not a non-negative integer"
            )));
        }
        Ok(Observation { z, alpha, op })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn op(&self) -> &Arc<ConvOperator> {
        &self.op
    }

    pub fn to_image(&self) -> Image {
        let (r, c) = self.op.output_shape();
        Image::from_vec(r, c, self.z.clone()).expect("length checked at construction")
    }

    /// `z / alpha` carried onto the image grid and clipped to `[lo, hi]`.
    pub fn grid_estimate(&self, interp: Interpolation, lo: f64, hi: f64) -> Image {
        let scaled: Vec<f64> = self.z.iter().map(|v| v / self.alpha).collect();
        let held = self
            .op
            .observation_to_grid(&scaled)
            .expect("length checked at construction");
        let data = match interp {
            Interpolation::Hold => held,
            Interpolation::Zero => {
                let idx: Vec<f64> = (0..self.z.len()).map(|m| m as f64).collect();
                let owner = self
                    .op
                    .observation_to_grid(&idx)
                    .expect("length checked at construction");
                let mut seen = vec![false; self.z.len()];
                owner
                    .iter()
                    .zip(&held)
                    .map(|(&m, &v)| {
                        let m = m as usize;
                        if seen[m] {
                            0.0
                        } else {
                            seen[m] = true;
                            v
                        }
                    })
                    .collect()
            }
        };
        let (r, c) = self.op.input_shape();
        Image::from_vec(r, c, data.into_iter().map(|v| v.clamp(lo, hi)).collect())
            .expect("grid has input shape")
    }
}

/// Function list `(Upsilon_i o T_i, mu tv_p, i_C)` on images and `vartheta Phi`
/// on frame coefficients, with the equal-share weights.
pub struct RestorationProblem {
    obs: Observation,
    fidelity: Vec<FidelityPiece>,
    tv: Vec<TvBlock>,
    tvcfg: TvConfig,
    bounds: BoxIndicator,
    penalty: SeparablePenalty,
    vartheta: f64,
    sparsity: SeparablePenalty,
    frame: Box<dyn TightFrame>,
    weights: Vec<f64>,
}

/// Builds the problem for `obs`. The fidelity is split with the row
/// partition of the observation operator (`rule` matters only for the
/// periodic boundary) and `penalty` is the unscaled `Phi`.
pub fn assemble(
    obs: &Observation,
    frame: Box<dyn TightFrame>,
    tvcfg: &TvConfig,
    penalty: &SeparablePenalty,
    vartheta: f64,
    (lo, hi): (f64, f64),
    rule: PeriodicRule,
) -> Result<RestorationProblem> {
    let op = obs.op();
    let (rows, cols) = op.input_shape();
    let n = rows * cols;
    if frame.image_len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: frame.image_len(),
        });
    }
    if penalty.len() != frame.coeff_len() {
        return Err(Error::ShapeMismatch {
            expected: frame.coeff_len(),
            got: penalty.len(),
        });
    }
    let sparsity = penalty.scaled(vartheta)?;
    let kl = SeparablePenalty::kl(obs.z(), obs.alpha())?;
    let fidelity = split_fidelity(op, &op.partition_with(rule), &kl)?;
    let tv = split_tv(tvcfg, rows, cols)?;
    let bounds = BoxIndicator::new(n, lo, hi)?;

    let mut weights = vec![1.0 / (4.0 * fidelity.len() as f64); fidelity.len()];
    weights.extend(std::iter::repeat_n(1.0 / (4.0 * tv.len() as f64), tv.len()));
    weights.extend([0.25, 0.25]);

    Ok(RestorationProblem {
        obs: obs.clone(),
        fidelity,
        tv,
        tvcfg: tvcfg.clone(),
        bounds,
        penalty: penalty.clone(),
        vartheta,
        sparsity,
        frame,
        weights,
    })
}

impl RestorationProblem {
    /// Functions composed with `F^T`: fidelity pieces, TV blocks, box.
    pub fn g(&self) -> Vec<&dyn ProxFunction> {
        let mut g: Vec<&dyn ProxFunction> = Vec::with_capacity(self.s());
        g.extend(self.fidelity.iter().map(|f| f as &dyn ProxFunction));
        g.extend(self.tv.iter().map(|t| t as &dyn ProxFunction));
        g.push(&self.bounds);
        g
    }

    /// Functions on the coefficients: `vartheta Phi`.
    pub fn f(&self) -> Vec<&dyn ProxFunction> {
        vec![&self.sparsity]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `I`, the number of fidelity pieces.
    pub fn fidelity_count(&self) -> usize {
        self.fidelity.len()
    }

    /// `P1 P2`, the number of TV blocks.
    pub fn tv_count(&self) -> usize {
        self.tv.len()
    }

    /// `S = I + P1 P2 + 1`
    pub fn s(&self) -> usize {
        self.fidelity.len() + self.tv.len() + 1
    }

    /// `J = S + 1`
    pub fn j(&self) -> usize {
        self.s() + 1
    }

    pub fn frame(&self) -> &dyn TightFrame {
        self.frame.as_ref()
    }

    pub fn observation(&self) -> &Observation {
        &self.obs
    }

    pub fn image_shape(&self) -> (usize, usize) {
        self.obs.op().input_shape()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds.bounds()
    }

    pub fn tv_config(&self) -> &TvConfig {
        &self.tvcfg
    }

    pub fn vartheta(&self) -> f64 {
        self.vartheta
    }

    /// Coefficients `F y / nu`, whose synthesis is `y`.
    pub fn coefficients_of(&self, y: &Image) -> Result<Vec<f64>> {
        let nu = self.frame.nu();
        Ok(self
            .frame
            .analyze_vec(y.as_slice())?
            .into_iter()
            .map(|v| v / nu)
            .collect())
    }

    /// `F^T x` as an image.
    pub fn image_of(&self, x: &[f64]) -> Result<Image> {
        let (r, c) = self.image_shape();
        Image::from_vec(r, c, self.frame.synthesize_vec(x)?)
    }

    /// The criterion evaluated directly from its definition, without the
    /// split pieces.
    pub fn criterion(&self, x: &[f64]) -> Result<ExtReal> {
        let y = self.image_of(x)?;
        let ty = self.obs.op().apply(y.as_slice())?;
        let fidelity = kl_value(self.obs.z(), &ty, self.obs.alpha());
        let tv = ExtReal::Finite(self.tvcfg.mu() * tv_value(&y, &self.tvcfg)?);
        let (lo, hi) = self.bounds();
        let inside = y.as_slice().iter().all(|&v| (lo..=hi).contains(&v));
        let constraint = if inside {
            ExtReal::Finite(0.0)
        } else {
            ExtReal::PosInf
        };
        let sparsity = if self.vartheta == 0.0 {
            ExtReal::Finite(0.0)
        } else {
            match self.penalty.value(x) {
                ExtReal::Finite(v) => ExtReal::Finite(self.vartheta * v),
                inf => inf,
            }
        };
        Ok(fidelity + tv + constraint + sparsity)
    }

    /// Sum of the split pieces at `x`, indicators included.
    pub fn split_value(&self, x: &[f64]) -> Result<ExtReal> {
        let y = self.frame.synthesize_vec(x)?;
        let g: ExtReal = self.g().iter().map(|f| f.value(&y)).sum();
        Ok(g + self.sparsity.value(x))
    }
}

#[derive(Debug, Clone)]
pub struct Restored {
    /// `F^T x` projected onto the box.
    pub image: Image,
    /// Solver output `x`.
    pub coeffs: Vec<f64>,
    pub solution: Solution,
    /// Largest distance of a pixel of `F^T x` to the box, before projection.
    /// The solver stops on the relative objective change, so early iterates
    /// may sit slightly outside.
    pub box_violation: f64,
}

/// Runs the selected solver from the image `init` and synthesizes the result.
pub fn restore(
    problem: &RestorationProblem,
    params: &PpxaParams,
    init: &Image,
    algorithm: Algorithm,
) -> Result<Restored> {
    validate_params(params, problem.j()).map_err(Error::InvalidParams)?;
    let x0 = problem.coefficients_of(init)?;
    let (g, f) = (problem.g(), problem.f());
    let solution = match algorithm {
        Algorithm::Ppxa => ppxa_frame_solve(&g, &f, problem.frame(), params, &x0)?,
        Algorithm::Accelerated => ppxa_accelerated_solve(&g, &f, problem.frame(), params, &x0)?,
    };
    let raw = problem.image_of(&solution.x)?;
    let (lo, hi) = problem.bounds();
    let box_violation = raw
        .as_slice()
        .iter()
        .map(|&v| (lo - v).max(v - hi).max(0.0))
        .fold(0.0, f64::max);
    Ok(Restored {
        image: raw.map(|v| v.clamp(lo, hi)),
        coeffs: solution.x.clone(),
        solution,
        box_violation,
    })
}
