//! Proximity operators with closed forms.
//!
//! Every operator takes the scale explicitly: `prox(u, gamma)` is the
//! minimizer of `1/2 |v - u|^2 + gamma * phi(v)`. The closed forms are
//! written for `gamma = 1` in the literature; the scaled versions follow by
//! substituting `gamma*alpha` for `alpha`, `gamma*chi` for `chi` and
//! `gamma*mu` for `mu`.

use alloc::format;
use alloc::vec::Vec;

use libm::{cbrt, fabs, hypot, log, log1p, sqrt};

use crate::{Error, ExtReal, Result};

/// Closed interval `[lo, hi]` (bounds may be infinite) holding the closure of
/// a scalar function's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const NON_NEGATIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// A convex function accessed through its value and its proximity operator.
///
/// This is the only interface the solvers use. `prox` writes
/// `argmin_v 1/2 |v - x|^2 + scale * f(v)` into `out`.
pub trait ProxFunction: Send + Sync {
    /// Dimension of the space the function acts on.
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> ExtReal;

    fn prox(&self, x: &[f64], scale: f64, out: &mut [f64]);

    /// Indicator functions are left out of the monitored objective.
    fn is_indicator(&self) -> bool {
        false
    }

    /// Closure of the domain along coordinate `k`.
    fn coordinate_domain(&self, _k: usize) -> Interval {
        Interval::REAL_LINE
    }
}

impl<T: ProxFunction + ?Sized> ProxFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> ExtReal {
        (**self).value(x)
    }
    fn prox(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        (**self).prox(x, scale, out)
    }
    fn is_indicator(&self) -> bool {
        (**self).is_indicator()
    }
    fn coordinate_domain(&self, k: usize) -> Interval {
        (**self).coordinate_domain(k)
    }
}

/// Exponents `p` for which `chi |.|^p` has a closed-form prox.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Exponent {
    #[default]
    One,
    FourThirds,
    ThreeHalves,
    Two,
    Three,
}

impl Exponent {
    pub const ALL: [Exponent; 5] = [
        Exponent::One,
        Exponent::FourThirds,
        Exponent::ThreeHalves,
        Exponent::Two,
        Exponent::Three,
    ];

    pub fn from_value(p: f64) -> Result<Self> {
        const EPS: f64 = 1e-12;
        Exponent::ALL
            .into_iter()
            .find(|e| fabs(e.value() - p) < EPS)
            .ok_or(Error::UnsupportedExponent(p))
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::FourThirds => 4.0 / 3.0,
            Exponent::ThreeHalves => 1.5,
            Exponent::Two => 2.0,
            Exponent::Three => 3.0,
        }
    }

    pub(crate) fn pow_abs(self, x: f64) -> f64 {
        let a = fabs(x);
        match self {
            Exponent::One => a,
            Exponent::FourThirds => a * cbrt(a),
            Exponent::ThreeHalves => a * sqrt(a),
            Exponent::Two => a * a,
            Exponent::Three => a * a * a,
        }
    }
}

fn check_finite(name: &'static str, vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

#[inline]
fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Prox of `gamma * (alpha*v - chi*ln v)` (the Gamma / Poisson potential).
///
/// `((eta - gamma*alpha) + sqrt((eta - gamma*alpha)^2 + 4*gamma*chi)) / 2`,
/// evaluated without cancellation so the result stays strictly positive for
/// `chi > 0` even when `eta` is very negative.
pub fn prox_gamma(eta: f64, alpha: f64, chi: f64, gamma: f64) -> Result<f64> {
    check_finite("prox_gamma", &[eta, alpha, chi, gamma])?;
    if gamma <= 0.0 || alpha < 0.0 || chi < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "prox_gamma needs gamma > 0, alpha >= 0, chi >= 0 (got gamma={gamma}, alpha={alpha}, chi={chi})"
        )));
    }
    Ok(prox_gamma_unchecked(eta, alpha, chi, gamma))
}

#[inline]
pub(crate) fn prox_gamma_unchecked(eta: f64, alpha: f64, chi: f64, gamma: f64) -> f64 {
    let a = eta - gamma * alpha;
    let c = 4.0 * gamma * chi;
    if c == 0.0 {
        return if a > 0.0 { a } else { 0.0 };
    }
    let s = sqrt(a * a + c);
    if a >= 0.0 {
        0.5 * (a + s)
    } else {
        // (a + s)/2 = 2*gamma*chi / (s - a)
        0.5 * c / (s - a)
    }
}

/// Prox of `gamma * chi |.|^p`.
pub fn prox_power(eta: f64, chi: f64, p: Exponent, gamma: f64) -> Result<f64> {
    check_finite("prox_power", &[eta, chi, gamma])?;
    if gamma <= 0.0 || chi < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "prox_power needs gamma > 0 and chi >= 0 (got gamma={gamma}, chi={chi})"
        )));
    }
    Ok(prox_power_unchecked(eta, chi * gamma, p))
}

/// Same as [`prox_power`] with `p` given as a real; rejects unsupported exponents.
pub fn prox_power_real(eta: f64, chi: f64, p: f64, gamma: f64) -> Result<f64> {
    prox_power(eta, chi, Exponent::from_value(p)?, gamma)
}

/// `c` is the already-scaled weight `gamma * chi`. Computed on `|eta|` and
/// signed afterwards, which makes the odd symmetry exact.
#[inline]
pub(crate) fn prox_power_unchecked(eta: f64, c: f64, p: Exponent) -> f64 {
    if c == 0.0 {
        return eta;
    }
    let a = fabs(eta);
    let mag = match p {
        Exponent::One => {
            if a > c {
                a - c
            } else {
                0.0
            }
        }
        Exponent::FourThirds => {
            let k = 256.0 * c * c * c / 729.0;
            let eps = sqrt(a * a + k);
            // eps - a written as k / (eps + a)
            let lo = k / (eps + a);
            let hi = eps + a;
            a + 4.0 * c / (3.0 * cbrt(2.0)) * (cbrt(lo) - cbrt(hi))
        }
        Exponent::ThreeHalves => {
            let t = 16.0 * a / (9.0 * c * c);
            let r = sqrt(1.0 + t);
            // 1 - sqrt(1 + t) written as -t / (1 + sqrt(1 + t))
            a + 9.0 * c * c / 8.0 * (-t / (1.0 + r))
        }
        Exponent::Two => a / (1.0 + 2.0 * c),
        Exponent::Three => {
            // (sqrt(1 + 12 c a) - 1) / (6 c) written as 2a / (1 + sqrt(1 + 12 c a))
            2.0 * a / (1.0 + sqrt(1.0 + 12.0 * c * a))
        }
    };
    // rounding in the 4/3 branch can leave a tiny negative magnitude
    signum(eta) * if mag > 0.0 { mag } else { 0.0 }
}

/// Prox of `mu * |(eta1, eta2)|_2`: block soft thresholding.
pub fn prox_l2_pair(eta1: f64, eta2: f64, mu: f64) -> Result<(f64, f64)> {
    check_finite("prox_l2_pair", &[eta1, eta2, mu])?;
    if mu < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "prox_l2_pair needs mu >= 0, got {mu}"
        )));
    }
    Ok(prox_l2_pair_unchecked(eta1, eta2, mu))
}

#[inline]
pub(crate) fn prox_l2_pair_unchecked(eta1: f64, eta2: f64, mu: f64) -> (f64, f64) {
    let norm = hypot(eta1, eta2);
    if norm > mu {
        let s = 1.0 - mu / norm;
        (s * eta1, s * eta2)
    } else {
        (0.0, 0.0)
    }
}

/// Projection onto the box `[lo, hi]^n`.
pub fn project_box(u: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    check_box(lo, hi)?;
    Ok(u.iter().map(|&v| clamp(v, lo, hi)).collect())
}

fn check_box(lo: f64, hi: f64) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Config(format!(
            "box bounds must satisfy lo <= hi (got lo={lo}, hi={hi})"
        )));
    }
    Ok(())
}

#[inline]
fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// One coordinate of the generalized Kullback-Leibler divergence `D_KL(z, alpha u)`.
pub fn kl_coord_value(z: f64, u: f64, alpha: f64) -> ExtReal {
    if z > 0.0 && u > 0.0 {
        // alpha u - z + z ln(z/(alpha u)) = z (s - 1 - ln s) with s = u / (z/alpha)
        let s = u / (z / alpha);
        let d = s - 1.0;
        ExtReal::Finite(z * (d - log1p(d)))
    } else if z == 0.0 && u >= 0.0 {
        ExtReal::Finite(alpha * u)
    } else {
        ExtReal::PosInf
    }
}

/// Generalized Kullback-Leibler divergence between counts `z` and `alpha * u`.
pub fn kl_value(z: &[f64], u: &[f64], alpha: f64) -> ExtReal {
    debug_assert_eq!(z.len(), u.len());
    z.iter()
        .zip(u)
        .map(|(&zm, &um)| kl_coord_value(zm, um, alpha))
        .sum()
}

/// Prox of `gamma * psi` with `psi` one coordinate of the KL fidelity.
pub fn prox_kl_coord(u: f64, z: f64, alpha: f64, gamma: f64) -> f64 {
    prox_gamma_unchecked(u, alpha, z, gamma)
}

/// Scalar convex potentials with a closed-form prox.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFn {
    Zero,
    /// `chi |v|^p`
    Power {
        chi: f64,
        p: Exponent,
    },
    /// `weight/2 (v - center)^2`
    Quadratic {
        center: f64,
        weight: f64,
    },
    /// `alpha v - chi ln v` on `v > 0` (`alpha v` on `v >= 0` when `chi = 0`)
    Gamma {
        alpha: f64,
        chi: f64,
    },
    /// Poisson negative log-likelihood for count `z` and scaling `alpha`
    Kl {
        z: f64,
        alpha: f64,
    },
    /// Indicator of `[lo, hi]`
    Box {
        lo: f64,
        hi: f64,
    },
}

impl ScalarFn {
    pub fn abs(weight: f64) -> Self {
        ScalarFn::Power {
            chi: weight,
            p: Exponent::One,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} in {self:?}")));
        match *self {
            ScalarFn::Zero => Ok(()),
            ScalarFn::Power { chi, .. } => {
                if !(chi.is_finite() && chi >= 0.0) {
                    return bad("chi must be finite and >= 0");
                }
                Ok(())
            }
            ScalarFn::Quadratic { center, weight } => {
                if !(center.is_finite() && weight.is_finite() && weight >= 0.0) {
                    return bad("quadratic needs finite center and weight >= 0");
                }
                Ok(())
            }
            ScalarFn::Gamma { alpha, chi } => {
                if !(alpha.is_finite() && chi.is_finite() && alpha >= 0.0 && chi >= 0.0) {
                    return bad("gamma potential needs alpha >= 0 and chi >= 0");
                }
                Ok(())
            }
            ScalarFn::Kl { z, alpha } => {
                if !(z.is_finite() && z >= 0.0 && alpha.is_finite() && alpha > 0.0) {
                    return bad("KL needs z >= 0 and alpha > 0");
                }
                Ok(())
            }
            ScalarFn::Box { lo, hi } => check_box(lo, hi),
        }
    }

    pub fn value(&self, v: f64) -> ExtReal {
        match *self {
            ScalarFn::Zero => ExtReal::ZERO,
            ScalarFn::Power { chi, p } => ExtReal::Finite(chi * p.pow_abs(v)),
            ScalarFn::Quadratic { center, weight } => {
                let d = v - center;
                ExtReal::Finite(0.5 * weight * d * d)
            }
            ScalarFn::Gamma { alpha, chi } => {
                if chi > 0.0 && v > 0.0 {
                    ExtReal::Finite(alpha * v - chi * log(v))
                } else if chi == 0.0 && v >= 0.0 {
                    ExtReal::Finite(alpha * v)
                } else {
                    ExtReal::PosInf
                }
            }
            ScalarFn::Kl { z, alpha } => kl_coord_value(z, v, alpha),
            ScalarFn::Box { lo, hi } => {
                if v >= lo && v <= hi {
                    ExtReal::ZERO
                } else {
                    ExtReal::PosInf
                }
            }
        }
    }

    #[inline]
    pub fn prox(&self, v: f64, gamma: f64) -> f64 {
        match *self {
            ScalarFn::Zero => v,
            ScalarFn::Power { chi, p } => prox_power_unchecked(v, gamma * chi, p),
            ScalarFn::Quadratic { center, weight } => {
                let gw = gamma * weight;
                (v + gw * center) / (1.0 + gw)
            }
            ScalarFn::Gamma { alpha, chi } => prox_gamma_unchecked(v, alpha, chi, gamma),
            ScalarFn::Kl { z, alpha } => prox_gamma_unchecked(v, alpha, z, gamma),
            ScalarFn::Box { lo, hi } => clamp(v, lo, hi),
        }
    }

    pub fn domain(&self) -> Interval {
        match *self {
            ScalarFn::Gamma { .. } | ScalarFn::Kl { .. } => Interval::NON_NEGATIVE,
            ScalarFn::Box { lo, hi } => Interval::new(lo, hi),
            _ => Interval::REAL_LINE,
        }
    }
}

/// `x -> sum_k f_k(x_k)`; the prox acts coordinate-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparablePenalty {
    terms: Vec<ScalarFn>,
}

impl SeparablePenalty {
    pub fn new(terms: Vec<ScalarFn>) -> Result<Self> {
        for t in &terms {
            t.validate()?;
        }
        Ok(SeparablePenalty { terms })
    }

    /// Same potential on every coordinate.
    pub fn uniform(n: usize, f: ScalarFn) -> Result<Self> {
        Self::new(alloc::vec![f; n])
    }

    /// `sum_k chi_k |x_k|^{p_k}`.
    pub fn power(chi: &[f64], p: &[Exponent]) -> Result<Self> {
        if chi.len() != p.len() {
            return Err(Error::ShapeMismatch {
                expected: chi.len(),
                got: p.len(),
            });
        }
        Self::new(
            chi.iter()
                .zip(p)
                .map(|(&chi, &p)| ScalarFn::Power { chi, p })
                .collect(),
        )
    }

    /// KL fidelity `D_KL(z, alpha .)` over all observed counts.
    pub fn kl(z: &[f64], alpha: f64) -> Result<Self> {
        Self::new(z.iter().map(|&z| ScalarFn::Kl { z, alpha }).collect())
    }

    pub fn terms(&self) -> &[ScalarFn] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies every weight by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "penalty scale must be >= 0, got {factor}"
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| match *t {
                ScalarFn::Zero => Ok(ScalarFn::Zero),
                ScalarFn::Power { chi, p } => Ok(ScalarFn::Power {
                    chi: chi * factor,
                    p,
                }),
                ScalarFn::Quadratic { center, weight } => Ok(ScalarFn::Quadratic {
                    center,
                    weight: weight * factor,
                }),
                ScalarFn::Gamma { alpha, chi } => Ok(ScalarFn::Gamma {
                    alpha: alpha * factor,
                    chi: chi * factor,
                }),
                ScalarFn::Box { .. } if factor == 0.0 => Ok(ScalarFn::Zero),
                b @ ScalarFn::Box { .. } => Ok(b),
                // c * D_KL(z, alpha u) = D_KL(c z, c alpha u)
                ScalarFn::Kl { z, alpha } if factor > 0.0 => Ok(ScalarFn::Kl {
                    z: z * factor,
                    alpha: alpha * factor,
                }),
                ScalarFn::Kl { .. } => Err(Error::InvalidArgument(
                    "a KL potential cannot be scaled by zero".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeparablePenalty { terms })
    }
}

impl ProxFunction for SeparablePenalty {
    fn dim(&self) -> usize {
        self.terms.len()
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        self.terms.iter().zip(x).map(|(t, &v)| t.value(v)).sum()
    }

    fn prox(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        for ((o, &v), t) in out.iter_mut().zip(x).zip(&self.terms) {
            *o = t.prox(v, scale);
        }
    }

    fn is_indicator(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| matches!(t, ScalarFn::Box { .. }))
    }

    fn coordinate_domain(&self, k: usize) -> Interval {
        self.terms[k].domain()
    }
}

/// Indicator of the box `[lo, hi]^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxIndicator {
    n: usize,
    lo: f64,
    hi: f64,
}

impl BoxIndicator {
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        check_box(lo, hi)?;
        Ok(BoxIndicator { n, lo, hi })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

impl ProxFunction for BoxIndicator {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        if x.iter().all(|&v| v >= self.lo && v <= self.hi) {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    }

    fn prox(&self, x: &[f64], _scale: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = clamp(v, self.lo, self.hi);
        }
    }

    fn is_indicator(&self) -> bool {
        true
    }

    fn coordinate_domain(&self, _k: usize) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

/// The zero function on `R^n`; its prox is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroFunction(pub usize);

impl ProxFunction for ZeroFunction {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &[f64]) -> ExtReal {
        ExtReal::ZERO
    }
    fn prox(&self, x: &[f64], _scale: f64, out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}
