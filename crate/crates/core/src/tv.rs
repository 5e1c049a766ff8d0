//! Discrete total variation built from a pair of FIR gradient filters.
//!
//! `tv(y) = sum_{n1, n2} rho(tr(H^T Y_{n1,n2}), tr(V^T Y_{n1,n2}))` where
//! `Y_{n1,n2}` is the `P1 x P2` patch of `y` at `(n1, n2)`. Grouping the
//! patches by their offset modulo `(P1, P2)` gives `P1 P2` functions whose
//! patches do not overlap, and each of those has a closed-form prox as long
//! as `H` and `V` are orthonormal.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::prox::{prox_l2_pair_unchecked, prox_power_unchecked, Exponent, ProxFunction};
use crate::{Error, ExtReal, Image, Result};

const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientFilter {
    #[default]
    Roberts,
    FiniteDifference,
    Prewitt,
    Sobel,
}

impl GradientFilter {
    pub const ALL: [GradientFilter; 4] = [
        GradientFilter::Roberts,
        GradientFilter::FiniteDifference,
        GradientFilter::Prewitt,
        GradientFilter::Sobel,
    ];
}

/// How the two gradient responses are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// `sqrt(h^2 + v^2)`
    #[default]
    Isotropic,
    /// `|h| + |v|`
    Anisotropic,
}

impl Coupling {
    #[inline]
    fn rho(self, h: f64, v: f64) -> f64 {
        match self {
            Coupling::Isotropic => libm::hypot(h, v),
            Coupling::Anisotropic => libm::fabs(h) + libm::fabs(v),
        }
    }

    #[inline]
    fn prox(self, h: f64, v: f64, t: f64) -> (f64, f64) {
        match self {
            Coupling::Isotropic => prox_l2_pair_unchecked(h, v, t),
            Coupling::Anisotropic => (
                prox_power_unchecked(h, t, Exponent::One),
                prox_power_unchecked(v, t, Exponent::One),
            ),
        }
    }
}

/// Normalized `(H, V)` of the given family.
pub fn gradient_filters(kind: GradientFilter) -> (Image, Image) {
    let h = match kind {
        GradientFilter::Roberts => {
            let s = core::f64::consts::FRAC_1_SQRT_2;
            let h = Image::from_vec(2, 2, [-s, 0.0, 0.0, s].to_vec()).unwrap();
            let v = Image::from_vec(2, 2, [0.0, -s, s, 0.0].to_vec()).unwrap();
            return (h, v);
        }
        GradientFilter::FiniteDifference => {
            let s = core::f64::consts::FRAC_1_SQRT_2;
            [0.0, 0.0, 0.0, -s, 0.0, s, 0.0, 0.0, 0.0]
        }
        GradientFilter::Prewitt => {
            let s = 1.0 / libm::sqrt(6.0);
            [-s, 0.0, s, -s, 0.0, s, -s, 0.0, s]
        }
        GradientFilter::Sobel => {
            let s = 1.0 / libm::sqrt(12.0);
            [-s, 0.0, s, -2.0 * s, 0.0, 2.0 * s, -s, 0.0, s]
        }
    };
    let h = Image::from_vec(3, 3, h.to_vec()).unwrap();
    let v = h.transpose();
    (h, v)
}

/// Filters, coupling and weight of a total-variation term.
#[derive(Debug, Clone, PartialEq)]
pub struct TvConfig {
    h: Image,
    v: Image,
    coupling: Coupling,
    mu: f64,
}

impl TvConfig {
    /// Checks that `H` and `V` have the same shape, unit Frobenius norm and
    /// `tr(H V^T) = 0`.
    pub fn new(h: Image, v: Image, coupling: Coupling, mu: f64) -> Result<Self> {
        if h.shape() != v.shape() || h.is_empty() {
            return Err(Error::Config(format!(
                "gradient filters must share a nonempty shape, got {:?} and {:?}",
                h.shape(),
                v.shape()
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::Config(format!(
                "tv.mu must be finite and >= 0, got {mu}"
            )));
        }
        if h.as_slice()
            .iter()
            .chain(v.as_slice())
            .any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("gradient filter"));
        }
        for (name, k) in [("H", &h), ("V", &v)] {
            let n = k.frobenius_dot(k);
            if (n - 1.0).abs() > INVARIANT_TOL {
                return Err(Error::Config(format!(
                    "filter {name} must have unit Frobenius norm, |{name}|^2 = {n}"
                )));
            }
        }
        let cross = h.frobenius_dot(&v);
        if cross.abs() > INVARIANT_TOL {
            return Err(Error::Config(format!(
                "filters must satisfy tr(H V^T) = 0, got {cross}"
            )));
        }
        Ok(TvConfig { h, v, coupling, mu })
    }

    pub fn from_filter(kind: GradientFilter, coupling: Coupling, mu: f64) -> Result<Self> {
        let (h, v) = gradient_filters(kind);
        Self::new(h, v, coupling, mu)
    }

    pub fn h(&self) -> &Image {
        &self.h
    }

    pub fn v(&self) -> &Image {
        &self.v
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.h.clone(), self.v.clone(), self.coupling, mu)
    }

    /// `(P1, P2)`.
    pub fn patch(&self) -> (usize, usize) {
        self.h.shape()
    }

    /// `(tr(H^T Y), tr(V^T Y))` for the patch whose corner is `(r, c)`.
    #[inline]
    fn responses(&self, y: &[f64], cols: usize, r: usize, c: usize) -> (f64, f64) {
        let (p1, p2) = self.patch();
        let (hk, vk) = (self.h.as_slice(), self.v.as_slice());
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..p1 {
            let row = &y[(r + i) * cols + c..(r + i) * cols + c + p2];
            for (j, &yv) in row.iter().enumerate() {
                a += hk[i * p2 + j] * yv;
                b += vk[i * p2 + j] * yv;
            }
        }
        (a, b)
    }

    fn check_image(&self, rows: usize, cols: usize) -> Result<()> {
        let (p1, p2) = self.patch();
        if rows < p1 || cols < p2 {
            return Err(Error::SizeConstraint(format!(
                "image {rows}x{cols} is smaller than the {p1}x{p2} gradient filters"
            )));
        }
        Ok(())
    }
}

/// `tv(y)` without the weight `mu`.
pub fn tv_value(y: &Image, cfg: &TvConfig) -> Result<f64> {
    cfg.check_image(y.rows(), y.cols())?;
    let (p1, p2) = cfg.patch();
    let mut acc = 0.0;
    for r in 0..=y.rows() - p1 {
        for c in 0..=y.cols() - p2 {
            let (h, v) = cfg.responses(y.as_slice(), y.cols(), r, c);
            acc += cfg.coupling.rho(h, v);
        }
    }
    Ok(acc)
}

/// `mu * tv_{p1,p2}`: the patches with corners `(P1 n1 + p1, P2 n2 + p2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvBlock {
    cfg: TvConfig,
    rows: usize,
    cols: usize,
    p1: usize,
    p2: usize,
}

impl TvBlock {
    pub fn offset(&self) -> (usize, usize) {
        (self.p1, self.p2)
    }

    /// Number of patches along each axis.
    pub fn block_counts(&self) -> (usize, usize) {
        let (q1, q2) = self.cfg.patch();
        ((self.rows - self.p1) / q1, (self.cols - self.p2) / q2)
    }

    /// Unweighted `tv_{p1,p2}(y)`.
    pub fn tv(&self, y: &[f64]) -> f64 {
        let (q1, q2) = self.cfg.patch();
        let (b1, b2) = self.block_counts();
        let mut acc = 0.0;
        for n1 in 0..b1 {
            for n2 in 0..b2 {
                let (h, v) = self
                    .cfg
                    .responses(y, self.cols, q1 * n1 + self.p1, q2 * n2 + self.p2);
                acc += self.cfg.coupling.rho(h, v);
            }
        }
        acc
    }
}

impl ProxFunction for TvBlock {
    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn value(&self, y: &[f64]) -> ExtReal {
        ExtReal::Finite(self.cfg.mu * self.tv(y))
    }

    fn prox(&self, y: &[f64], scale: f64, out: &mut [f64]) {
        out.copy_from_slice(y);
        let t = scale * self.cfg.mu;
        if t == 0.0 {
            return;
        }
        let (q1, q2) = self.cfg.patch();
        let (b1, b2) = self.block_counts();
        let (hk, vk) = (self.cfg.h.as_slice(), self.cfg.v.as_slice());
        for n1 in 0..b1 {
            for n2 in 0..b2 {
                let (r, c) = (q1 * n1 + self.p1, q2 * n2 + self.p2);
                let (h, v) = self.cfg.responses(y, self.cols, r, c);
                let (beta, kappa) = self.cfg.coupling.prox(h, v, t);
                let (dh, dv) = (beta - h, kappa - v);
                for i in 0..q1 {
                    let base = (r + i) * self.cols + c;
                    for j in 0..q2 {
                        out[base + j] += dh * hk[i * q2 + j] + dv * vk[i * q2 + j];
                    }
                }
            }
        }
    }
}

/// The `P1 P2` block functions, ordered by `(p1, p2)` row-major.
pub fn split_tv(cfg: &TvConfig, rows: usize, cols: usize) -> Result<Vec<TvBlock>> {
    cfg.check_image(rows, cols)?;
    let (q1, q2) = cfg.patch();
    let mut out = Vec::with_capacity(q1 * q2);
    for p1 in 0..q1 {
        for p2 in 0..q2 {
            out.push(TvBlock {
                cfg: cfg.clone(),
                rows,
                cols,
                p1,
                p2,
            });
        }
    }
    Ok(out)
}

/// `prox_{gamma mu tv_{p1,p2}}(y)`.
pub fn prox_tv_block(y: &Image, p1: usize, p2: usize, cfg: &TvConfig, gamma: f64) -> Result<Image> {
    cfg.check_image(y.rows(), y.cols())?;
    let (q1, q2) = cfg.patch();
    if p1 >= q1 || p2 >= q2 {
        return Err(Error::InvalidArgument(format!(
            "block offset ({p1}, {p2}) outside {q1}x{q2}"
        )));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidArgument(String::from(
            "gamma must be finite and >= 0",
        )));
    }
    if y.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("image"));
    }
    let block = TvBlock {
        cfg: cfg.clone(),
        rows: y.rows(),
        cols: y.cols(),
        p1,
        p2,
    };
    let mut out = Image::zeros(y.rows(), y.cols());
    block.prox(y.as_slice(), gamma, out.as_mut_slice());
    Ok(out)
}
