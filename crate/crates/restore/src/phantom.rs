//! Piecewise-constant test images.

use ppxa_core::Image;

/// Background level of [`phantom`].
pub const BACKGROUND: f64 = 30.0;

/// A `rows x cols` piecewise-constant scene: a background at 30 with a
/// rectangle, a disc, a ring, a triangle and a small bright square at
/// levels between 80 and 220. Shapes scale with the image.
pub fn phantom(rows: usize, cols: usize) -> Image {
    let (h, w) = (rows as f64, cols as f64);
    Image::from_fn(rows, cols, |r, c| {
        let (y, x) = ((r as f64 + 0.5) / h, (c as f64 + 0.5) / w);
        let disc = |cy: f64, cx: f64| ((y - cy).powi(2) + (x - cx).powi(2)).sqrt();
        if (0.08..0.22).contains(&y) && (0.08..0.22).contains(&x) {
            220.0
        } else if (0.12..0.45).contains(&y) && (0.55..0.9).contains(&x) {
            160.0
        } else if disc(0.68, 0.3) < 0.18 {
            if disc(0.68, 0.3) < 0.08 {
                200.0
            } else {
                120.0
            }
        } else if y > 0.55 && y < 0.9 && x > 0.6 && (x - 0.6) < (y - 0.55) * 0.9 {
            80.0
        } else {
            BACKGROUND
        }
    })
}
