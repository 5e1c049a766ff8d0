//! Image quality: SNR in dB and mean structural similarity.

use ppxa_core::{Error, Image, Result};

/// Reported when the estimate equals the reference.
pub const SNR_CAP_DB: f64 = 300.0;

/// Side of the SSIM window.
pub const SSIM_WINDOW: usize = 8;

fn same_shape(a: &Image, b: &Image) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// `10 log10(|ref|^2 / |ref - est|^2)`, capped at [`SNR_CAP_DB`].
pub fn snr(reference: &Image, estimate: &Image) -> Result<f64> {
    same_shape(reference, estimate)?;
    let signal: f64 = reference.as_slice().iter().map(|v| v * v).sum();
    let noise: f64 = reference
        .as_slice()
        .iter()
        .zip(estimate.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if noise == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CAP_DB))
}

/// Mean SSIM over all `8 x 8` windows (stride 1) for dynamic range `range`.
/// Images smaller than a window are treated as a single window.
pub fn ssim(reference: &Image, estimate: &Image, range: f64) -> Result<f64> {
    same_shape(reference, estimate)?;
    let (rows, cols) = reference.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    let (wr, wc) = (SSIM_WINDOW.min(rows), SSIM_WINDOW.min(cols));
    let count = (wr * wc) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for r0 in 0..=rows - wr {
        for c0 in 0..=cols - wc {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + wr {
                for c in c0..c0 + wc {
                    let (a, b) = (reference.get(r, c), estimate.get(r, c));
                    sa += a;
                    sb += b;
                    saa += a * a;
                    sbb += b * b;
                    sab += a * b;
                }
            }
            let (ma, mb) = (sa / count, sb / count);
            let va = (saa / count - ma * ma).max(0.0);
            let vb = (sbb / count - mb * mb).max(0.0);
            let cov = sab / count - ma * mb;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}
