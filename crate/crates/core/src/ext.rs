use core::fmt;
use core::iter::Sum;
use core::ops::Add;

/// A value in `]-inf, +inf]`, the codomain of the convex functions handled here.
///
/// `PosInf` is a separate variant rather than `f64::INFINITY` so that it can
/// never leak into arithmetic. The only supported operations are comparison
/// and accumulation of function values ([`Sum`], [`Add`]).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// Finite value, or `f64::INFINITY` for reporting purposes.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v)
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> Self {
        let mut acc = 0.0;
        for v in iter {
            match v {
                ExtReal::Finite(x) => acc += x,
                ExtReal::PosInf => return ExtReal::PosInf,
            }
        }
        ExtReal::Finite(acc)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}
