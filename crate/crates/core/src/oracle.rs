//! Brute-force minimization used as an independent check of the closed forms.
//!
//! Convex objectives in up to four variables are minimized by nested
//! golden-section search: the partial minimum of a jointly convex function
//! over the inner coordinates is convex in the outer one, so a 1-D
//! unimodal search is valid at every level. Values of `+inf` are handled by
//! first locating the (interval) domain of each 1-D slice.

use alloc::vec;
use alloc::vec::Vec;

use crate::prox::Interval;
use crate::{Error, ExtReal, Result};

/// Default argument tolerance of the oracle.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest dimension the nested search accepts.
pub const MAX_DIM: usize = 4;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_EXPANSIONS: usize = 40;
const MAX_GOLDEN_ITERS: usize = 400;
const SCAN_POINTS: usize = 512;

/// Minimizes a convex `f` on `[lo, hi]` to within `tol` in the argument.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, ExtReal)>
where
    F: FnMut(f64) -> Result<ExtReal>,
{
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Oracle("empty bracket"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iters = 0;
    while b - a > tol {
        iters += 1;
        if iters > MAX_GOLDEN_ITERS {
            return Err(Error::Oracle("golden-section search did not converge"));
        }
        if !fc.is_finite() && !fd.is_finite() {
            let (dl, dh) = locate_domain(&mut f, a, b, tol)?;
            a = dl;
            b = dh;
            c = b - INV_PHI * (b - a);
            d = a + INV_PHI * (b - a);
            fc = f(c)?;
            fd = f(d)?;
            continue;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    // the midpoint can fall just outside the domain when the minimum sits on its edge
    if fx.is_finite() {
        return Ok((x, fx));
    }
    if fc <= fd {
        Ok((c, fc))
    } else {
        Ok((d, fd))
    }
}

/// Finds a sub-interval of `[a, b]` on which `f` is finite. The domain of a
/// convex function restricted to a line is an interval, so a scan for one
/// finite point followed by bisection on both sides locates it.
fn locate_domain<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<ExtReal>,
{
    let mut inside = None;
    for i in 0..=SCAN_POINTS {
        let t = a + (b - a) * (i as f64) / (SCAN_POINTS as f64);
        if f(t)?.is_finite() {
            inside = Some(t);
            break;
        }
    }
    let x0 = inside.ok_or(Error::Oracle("no finite value found in the search bracket"))?;
    let edge_tol = tol * 1e-3;
    let bisect = |f: &mut F, mut inn: f64, mut out: f64| -> Result<f64> {
        if f(out)?.is_finite() {
            return Ok(out);
        }
        for _ in 0..200 {
            if (inn - out).abs() <= edge_tol {
                break;
            }
            let mid = 0.5 * (inn + out);
            if f(mid)?.is_finite() {
                inn = mid;
            } else {
                out = mid;
            }
        }
        Ok(inn)
    };
    let lo = bisect(f, x0, a)?;
    let hi = bisect(f, x0, b)?;
    Ok((lo, hi))
}

/// Minimizes a convex objective over `R^n` (n <= [`MAX_DIM`]) intersected
/// with the box `domain`. The search box is centered on `center` and grown
/// until the minimizer is strictly inside it.
pub fn minimize_convex<F>(
    objective: F,
    center: &[f64],
    domain: &[Interval],
    tol: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> ExtReal,
{
    let n = center.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::Oracle("dimension must be between 1 and 4"));
    }
    if domain.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: domain.len(),
        });
    }
    let scale = center.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut radius = 1.0 + scale;
    for _ in 0..MAX_EXPANSIONS {
        let brackets: Vec<(f64, f64)> = center
            .iter()
            .zip(domain)
            .map(|(&c, dom)| bracket(c, radius, dom))
            .collect();
        let mut v = vec![0.0; n];
        nested(&objective, &mut v, 0, &brackets, tol)?;
        let margin = 1e-6 * radius + 10.0 * tol;
        let on_edge = v
            .iter()
            .zip(&brackets)
            .zip(domain)
            .any(|((&x, &(lo, hi)), dom)| {
                (x - lo < margin && lo > dom.lo) || (hi - x < margin && hi < dom.hi)
            });
        if !on_edge {
            return Ok(v);
        }
        radius *= 2.0;
    }
    Err(Error::Oracle("minimizer escapes every search box"))
}

fn bracket(c: f64, radius: f64, dom: &Interval) -> (f64, f64) {
    let lo = (c - radius).max(dom.lo);
    let hi = (c + radius).min(dom.hi);
    if lo < hi {
        (lo, hi)
    } else if dom.lo > c {
        (dom.lo, (dom.lo + 2.0 * radius).min(dom.hi))
    } else {
        ((dom.hi - 2.0 * radius).max(dom.lo), dom.hi)
    }
}

fn nested<F>(
    objective: &F,
    v: &mut [f64],
    k: usize,
    brackets: &[(f64, f64)],
    tol: f64,
) -> Result<ExtReal>
where
    F: Fn(&[f64]) -> ExtReal,
{
    if k == v.len() {
        return Ok(objective(v));
    }
    let (lo, hi) = brackets[k];
    let (best, _) = golden_section(
        |t| {
            v[k] = t;
            nested(objective, v, k + 1, brackets, tol)
        },
        lo,
        hi,
        tol,
    )?;
    v[k] = best;
    // refill the inner coordinates for the chosen outer value
    nested(objective, v, k + 1, brackets, tol)
}

/// Brute-force `argmin_v 1/2 |v - u|^2 + phi(v)`.
///
/// `domain` gives the closure of `dom phi` per coordinate (use
/// [`Interval::REAL_LINE`] when unrestricted).
pub fn brute_force_prox<F>(u: &[f64], phi: F, domain: &[Interval], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> ExtReal,
{
    minimize_convex(
        |v| {
            let q: f64 = v.iter().zip(u).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
            match phi(v) {
                ExtReal::Finite(p) => ExtReal::Finite(q + p),
                ExtReal::PosInf => ExtReal::PosInf,
            }
        },
        u,
        domain,
        tol,
    )
}

/// 1-D convenience wrapper around [`brute_force_prox`].
pub fn brute_force_prox_scalar<F>(u: f64, phi: F, domain: Interval, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> ExtReal,
{
    Ok(brute_force_prox(&[u], |v| phi(v[0]), &[domain], tol)?[0])
}
