//! Seeded Poisson degradation `z ~ Poisson(alpha T y)`.
//!
//! Row `r` of the observation draws from its own ChaCha8 stream `r`, so a
//! given seed fixes every count independently of evaluation order.

use std::sync::Arc;

use ppxa_core::conv::ConvOperator;
use ppxa_core::{Error, Image, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::problem::Observation;

/// Means below this use sequential-search inversion.
pub const INVERSION_LIMIT: f64 = 30.0;

/// One Poisson draw with the given mean.
pub fn sample<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0.0;
        let mut p = (-mean).exp();
        let mut cdf = p;
        // the tail guard stops at a count whose probability underflows
        while u > cdf && p > 0.0 {
            k += 1.0;
            p *= mean / k;
            cdf += p;
        }
        k
    } else {
        Poisson::new(mean)
            .expect("mean is finite and positive")
            .sample(rng)
    }
}

/// Draws `z_m ~ Poisson(alpha (T y)_m)`.
pub fn degrade(y: &Image, op: Arc<ConvOperator>, alpha: f64, seed: u64) -> Result<Observation> {
    if let Some(v) = y.as_slice().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "image must be non-negative, found {v}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise scale alpha must be > 0, got {alpha}"
        )));
    }
    let ty = op.apply(y.as_slice())?;
    let cols = op.output_shape().1;
    let mut z = Vec::with_capacity(ty.len());
    for (r, row) in ty.chunks(cols).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        z.extend(row.iter().map(|&v| sample(&mut rng, alpha * v.max(0.0))));
    }
    Observation::new(z, alpha, op)
}
