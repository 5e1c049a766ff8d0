//! Convolution operators and the proximity operator of `Psi o T`.
//!
//! The prox of a separable function composed with a convolution `T` has no
//! closed form, but the rows of `T` can be grouped into families with
//! disjoint supports. Within one family the rows are orthogonal, so
//! `T_i T_i^T` is diagonal and the prox of `Upsilon_i o T_i` is
//!
//! ```text
//! prox(y) = y + T_i^T D_i^{-1} (prox_{D_i Upsilon_i}(T_i y) - T_i y)
//! ```
//!
//! where `prox_{D_i Upsilon_i}` applies `prox_{Delta_m psi_m}` row by row.
//!
//! Row conventions follow the usual matrices: row `m` (0-based) of a valid
//! convolution reads `theta_{Q-1} .. theta_0` over columns `m .. m+Q-1`; a
//! zero-padded (causal) convolution reads `theta_q` at column `m - q`; the
//! periodic version wraps that index modulo `N`; the `d`-decimated version
//! keeps rows `d-1, 2d-1, ..` of the zero-padded one. Two-dimensional
//! operators apply the same rule independently along rows and columns and
//! their partitions are tensor products of the 1-D ones.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::prox::{ProxFunction, ScalarFn, SeparablePenalty};
use crate::{Error, ExtReal, Image, Result};

/// Boundary handling of a convolution along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// No boundary effect: only fully overlapping positions, `M = N - Q + 1`.
    Valid,
    /// Zero padding, `M = N`.
    ZeroPad,
    /// Circular convolution, `M = N`.
    Periodic,
    /// Zero padding followed by keeping one sample out of `d`, `N = M d`.
    Decimated(usize),
}

/// Rule used to group the rows of a periodic convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeriodicRule {
    /// `Q - 1` wrap-around rows on their own, then the remaining rows grouped
    /// by residue modulo `Q`.
    #[default]
    WrapSingletons,
    /// `I = min{i >= Q : M mod i = 0}`, rows grouped by residue modulo `I`.
    Divisor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Axis {
    n: usize,
    m: usize,
    q: usize,
    mode: Boundary,
}

impl Axis {
    fn new(n: usize, q: usize, mode: Boundary, name: &str) -> Result<Axis> {
        let err = |msg: String| Err(Error::SizeConstraint(format!("{name}: {msg}")));
        let m = match mode {
            Boundary::Valid => {
                if n < 2 * q - 1 {
                    return err(format!("valid convolution needs N >= 2Q-1 (N={n}, Q={q})"));
                }
                n - q + 1
            }
            Boundary::ZeroPad => {
                if n < 2 * q {
                    return err(format!(
                        "zero-padded convolution needs N >= 2Q (N={n}, Q={q})"
                    ));
                }
                n
            }
            Boundary::Periodic => {
                if n < q {
                    return err(format!("periodic convolution needs N >= Q (N={n}, Q={q})"));
                }
                n
            }
            Boundary::Decimated(d) => {
                if d == 0 {
                    return err(String::from("decimation factor must be >= 1"));
                }
                if !n.is_multiple_of(d) {
                    return err(format!(
                        "decimated convolution needs N = M d (N={n}, d={d})"
                    ));
                }
                if n < 2 * q {
                    return err(format!(
                        "decimated convolution needs N >= 2Q (N={n}, Q={q})"
                    ));
                }
                n / d
            }
        };
        Ok(Axis { n, m, q, mode })
    }

    /// Placeholder axis of a 1-D operator.
    fn trivial() -> Axis {
        Axis {
            n: 1,
            m: 1,
            q: 1,
            mode: Boundary::Valid,
        }
    }

    fn decimation(&self) -> usize {
        match self.mode {
            Boundary::Decimated(d) => d,
            _ => 1,
        }
    }

    /// Taps `q` that hit a column for row `row`, as a half-open range.
    #[inline]
    fn tap_range(&self, row: usize) -> (usize, usize) {
        match self.mode {
            Boundary::Valid | Boundary::Periodic => (0, self.q),
            Boundary::ZeroPad | Boundary::Decimated(_) => {
                (0, self.q.min((row + 1) * self.decimation()))
            }
        }
    }

    /// Column hit by tap `q` of row `row`; `q` must lie in `tap_range(row)`.
    #[inline]
    fn col(&self, row: usize, q: usize) -> usize {
        match self.mode {
            Boundary::Valid => row + self.q - 1 - q,
            Boundary::ZeroPad => row - q,
            Boundary::Decimated(d) => (row + 1) * d - 1 - q,
            Boundary::Periodic => (row + self.n - q) % self.n,
        }
    }

    /// Output index whose receptive field is centered closest to input `n`.
    fn nearest_row(&self, n: usize) -> usize {
        let half = (self.q - 1) / 2;
        let r = match self.mode {
            Boundary::Valid => n.saturating_sub(half),
            Boundary::ZeroPad => n + half,
            Boundary::Periodic => (n + half) % self.n,
            Boundary::Decimated(d) => (n + half) / d,
        };
        r.min(self.m - 1)
    }

    fn partition(&self, rule: PeriodicRule) -> Vec<Vec<usize>> {
        let residues = |count: usize| -> Vec<Vec<usize>> {
            (0..count)
                .map(|i| (i..self.m).step_by(count).collect())
                .collect()
        };
        match self.mode {
            Boundary::Valid | Boundary::ZeroPad => residues(self.q.min(self.m)),
            Boundary::Decimated(d) => residues(self.q.div_ceil(d).min(self.m)),
            Boundary::Periodic => match rule {
                PeriodicRule::Divisor => {
                    let i = (self.q..=self.m)
                        .find(|&i| self.m.is_multiple_of(i))
                        .unwrap_or(self.m);
                    residues(i)
                }
                PeriodicRule::WrapSingletons => {
                    let q = self.q;
                    let mut sets: Vec<Vec<usize>> = (0..q - 1).map(|r| vec![r]).collect();
                    let tail = self.m - (q - 1);
                    for c in 0..q.min(tail) {
                        sets.push((q - 1 + c..self.m).step_by(q).collect());
                    }
                    sets
                }
            },
        }
    }
}

/// A 1-D or 2-D (possibly decimated) convolution with a non-negative kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvOperator {
    kernel: Vec<f64>,
    rows: Axis,
    cols: Axis,
}

impl ConvOperator {
    /// 1-D operator on signals of length `n`.
    pub fn new_1d(taps: &[f64], n: usize, mode: Boundary) -> Result<Self> {
        let taps = trim_1d(taps)?;
        let cols = Axis::new(n, taps.len(), mode, "signal")?;
        Ok(ConvOperator {
            kernel: taps,
            rows: Axis::trivial(),
            cols,
        })
    }

    /// 2-D operator on `n_rows x n_cols` images; `kernel` is `Q1 x Q2`.
    /// The same boundary rule (and decimation factor) applies to both axes.
    pub fn new_2d(kernel: &Image, n_rows: usize, n_cols: usize, mode: Boundary) -> Result<Self> {
        let kernel = trim_2d(kernel)?;
        let rows = Axis::new(n_rows, kernel.rows(), mode, "rows")?;
        let cols = Axis::new(n_cols, kernel.cols(), mode, "columns")?;
        Ok(ConvOperator {
            kernel: kernel.into_vec(),
            rows,
            cols,
        })
    }

    /// `Q x Q` kernel with all taps equal to `1/Q^2`.
    pub fn uniform_2d(q: usize, n_rows: usize, n_cols: usize, mode: Boundary) -> Result<Self> {
        if q == 0 {
            return Err(Error::Config(String::from("kernel size must be >= 1")));
        }
        let w = 1.0 / (q * q) as f64;
        Self::new_2d(&Image::filled(q, q, w), n_rows, n_cols, mode)
    }

    pub fn input_shape(&self) -> (usize, usize) {
        (self.rows.n, self.cols.n)
    }

    pub fn output_shape(&self) -> (usize, usize) {
        (self.rows.m, self.cols.m)
    }

    pub fn input_len(&self) -> usize {
        self.rows.n * self.cols.n
    }

    pub fn output_len(&self) -> usize {
        self.rows.m * self.cols.m
    }

    pub fn kernel_shape(&self) -> (usize, usize) {
        (self.rows.q, self.cols.q)
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn boundary(&self) -> Boundary {
        self.cols.mode
    }

    #[inline]
    fn theta(&self, q1: usize, q2: usize) -> f64 {
        self.kernel[q1 * self.cols.q + q2]
    }

    /// `<t_m, y>` for the flat output index `m`.
    #[inline]
    pub fn row_dot(&self, m: usize, y: &[f64]) -> f64 {
        let (m1, m2) = (m / self.cols.m, m % self.cols.m);
        let (a1, b1) = self.rows.tap_range(m1);
        let (a2, b2) = self.cols.tap_range(m2);
        let nc = self.cols.n;
        let mut acc = 0.0;
        for q1 in a1..b1 {
            let base = self.rows.col(m1, q1) * nc;
            for q2 in a2..b2 {
                acc += self.theta(q1, q2) * y[base + self.cols.col(m2, q2)];
            }
        }
        acc
    }

    /// `out += w * t_m`.
    #[inline]
    fn scatter_row(&self, m: usize, w: f64, out: &mut [f64]) {
        let (m1, m2) = (m / self.cols.m, m % self.cols.m);
        let (a1, b1) = self.rows.tap_range(m1);
        let (a2, b2) = self.cols.tap_range(m2);
        let nc = self.cols.n;
        for q1 in a1..b1 {
            let base = self.rows.col(m1, q1) * nc;
            for q2 in a2..b2 {
                out[base + self.cols.col(m2, q2)] += w * self.theta(q1, q2);
            }
        }
    }

    /// `|t_m|^2`, summed over the taps that fall inside the signal.
    pub fn row_norm_sq(&self, m: usize) -> f64 {
        let (m1, m2) = (m / self.cols.m, m % self.cols.m);
        let (a1, b1) = self.rows.tap_range(m1);
        let (a2, b2) = self.cols.tap_range(m2);
        let mut acc = 0.0;
        for q1 in a1..b1 {
            for q2 in a2..b2 {
                let t = self.theta(q1, q2);
                acc += t * t;
            }
        }
        acc
    }

    /// Number of kernel taps that row `m` touches.
    pub fn row_support(&self, m: usize) -> usize {
        let (m1, m2) = (m / self.cols.m, m % self.cols.m);
        let (a1, b1) = self.rows.tap_range(m1);
        let (a2, b2) = self.cols.tap_range(m2);
        (b1 - a1) * (b2 - a2)
    }

    /// Dense copy of row `m`. Used by diagnostics, never by the solvers.
    pub fn row(&self, m: usize) -> Vec<f64> {
        let mut r = vec![0.0; self.input_len()];
        self.scatter_row(m, 1.0, &mut r);
        r
    }

    fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(Error::ShapeMismatch { expected, got });
        }
        Ok(())
    }

    /// `T y`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.input_len(), y.len())?;
        Ok((0..self.output_len()).map(|m| self.row_dot(m, y)).collect())
    }

    /// `T^T z`.
    pub fn apply_adjoint(&self, z: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.output_len(), z.len())?;
        let mut out = vec![0.0; self.input_len()];
        for (m, &w) in z.iter().enumerate() {
            if w != 0.0 {
                self.scatter_row(m, w, &mut out);
            }
        }
        Ok(out)
    }

    /// Maps an observation (one value per output row) back onto the input
    /// grid by copying, for every input sample, the output whose receptive
    /// field is centered closest to it. With decimation this is a
    /// zero-order-hold interpolation.
    pub fn observation_to_grid(&self, z: &[f64]) -> Result<Vec<f64>> {
        Self::check_len(self.output_len(), z.len())?;
        let mut out = Vec::with_capacity(self.input_len());
        for n1 in 0..self.rows.n {
            let r1 = self.rows.nearest_row(n1);
            for n2 in 0..self.cols.n {
                out.push(z[r1 * self.cols.m + self.cols.nearest_row(n2)]);
            }
        }
        Ok(out)
    }

    /// Partition of the rows into orthogonal families.
    pub fn partition(&self) -> RowPartition {
        self.partition_with(PeriodicRule::default())
    }

    pub fn partition_with(&self, rule: PeriodicRule) -> RowPartition {
        let rs = self.rows.partition(rule);
        let cs = self.cols.partition(rule);
        let mut sets = Vec::with_capacity(rs.len() * cs.len());
        for r in &rs {
            for c in &cs {
                let mut rows = Vec::with_capacity(r.len() * c.len());
                for &m1 in r {
                    for &m2 in c {
                        rows.push(m1 * self.cols.m + m2);
                    }
                }
                sets.push(rows);
            }
        }
        // Delta > 0 holds by construction: trimmed kernels have non-zero corner taps
        RowPartition::from_sets(self, sets).expect("generated partition is valid")
    }
}

fn validate_taps(taps: &[f64]) -> Result<()> {
    if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Config(String::from(
            "kernel taps must be finite and non-negative",
        )));
    }
    if taps.iter().all(|&t| t == 0.0) {
        return Err(Error::Config(String::from(
            "kernel must have a non-zero tap",
        )));
    }
    Ok(())
}

fn trim_1d(taps: &[f64]) -> Result<Vec<f64>> {
    validate_taps(taps)?;
    let first = taps.iter().position(|&t| t != 0.0).unwrap();
    let last = taps.iter().rposition(|&t| t != 0.0).unwrap();
    Ok(taps[first..=last].to_vec())
}

/// Drops all-zero border rows and columns of the kernel.
fn trim_2d(k: &Image) -> Result<Image> {
    validate_taps(k.as_slice())?;
    let row_nz = |r: usize| (0..k.cols()).any(|c| k.get(r, c) != 0.0);
    let col_nz = |c: usize| (0..k.rows()).any(|r| k.get(r, c) != 0.0);
    let r0 = (0..k.rows()).find(|&r| row_nz(r)).unwrap();
    let r1 = (0..k.rows()).rev().find(|&r| row_nz(r)).unwrap();
    let c0 = (0..k.cols()).find(|&c| col_nz(c)).unwrap();
    let c1 = (0..k.cols()).rev().find(|&c| col_nz(c)).unwrap();
    Ok(Image::from_fn(r1 - r0 + 1, c1 - c0 + 1, |r, c| {
        k.get(r0 + r, c0 + c)
    }))
}

/// One family of orthogonal rows together with their squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSet {
    rows: Vec<usize>,
    deltas: Vec<f64>,
}

impl RowSet {
    /// Flat output indices, increasing.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// `Delta_{i,m} = |t_m|^2`, aligned with [`RowSet::rows`].
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Partition of the output indices `{0, .., M-1}` into row families.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPartition {
    output_len: usize,
    sets: Vec<RowSet>,
}

impl RowPartition {
    /// Builds a partition from explicit index sets, checking that they are
    /// disjoint, nonempty, cover every row and that no row is zero.
    /// Orthogonality is not checked here; see [`verify_orthogonality`].
    pub fn from_sets(op: &ConvOperator, sets: Vec<Vec<usize>>) -> Result<Self> {
        let m = op.output_len();
        let mut seen = vec![false; m];
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut rows) in sets.into_iter().enumerate() {
            if rows.is_empty() {
                return Err(Error::Config(format!("row set {i} is empty")));
            }
            rows.sort_unstable();
            let mut deltas = Vec::with_capacity(rows.len());
            for &r in &rows {
                if r >= m || seen[r] {
                    return Err(Error::Config(format!(
                        "row {r} is out of range or listed twice"
                    )));
                }
                seen[r] = true;
                let d = op.row_norm_sq(r);
                if d <= 0.0 {
                    return Err(Error::Config(format!("row {r} is zero (Delta = 0)")));
                }
                deltas.push(d);
            }
            out.push(RowSet { rows, deltas });
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!(
                "row {r} is not covered by the partition"
            )));
        }
        Ok(RowPartition {
            output_len: m,
            sets: out,
        })
    }

    /// Number of families `I`.
    pub fn count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[RowSet] {
        &self.sets
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    /// Multiply-adds needed to apply every `prox(Upsilon_i o T_i)` once:
    /// one `T_i` and one `T_i^T` per family plus one scalar prox per row.
    pub fn prox_cost(&self, op: &ConvOperator) -> usize {
        self.sets
            .iter()
            .flat_map(|s| s.rows.iter())
            .map(|&m| 2 * op.row_support(m) + 1)
            .sum()
    }
}

/// Worst deviations from the orthogonality assumption, computed on dense rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityReport {
    /// Largest `|<t_m, t_m'>|` over distinct rows of the same family.
    pub max_off_diagonal: f64,
    /// Largest `|Delta_{i,m} - |t_m|^2|`.
    pub max_delta_error: f64,
}

impl OrthogonalityReport {
    pub fn holds(&self) -> bool {
        self.max_off_diagonal == 0.0
    }
}

pub fn verify_orthogonality(op: &ConvOperator, part: &RowPartition) -> OrthogonalityReport {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rep = OrthogonalityReport {
        max_off_diagonal: 0.0,
        max_delta_error: 0.0,
    };
    for set in part.sets() {
        let rows: Vec<Vec<f64>> = set.rows.iter().map(|&m| op.row(m)).collect();
        for (a, ra) in rows.iter().enumerate() {
            let err = (set.deltas[a] - dot(ra, ra)).abs();
            rep.max_delta_error = rep.max_delta_error.max(err);
            for rb in &rows[a + 1..] {
                rep.max_off_diagonal = rep.max_off_diagonal.max(dot(ra, rb).abs());
            }
        }
    }
    rep
}

/// `prox_{gamma Upsilon_i o T_i}(y)` for one row family.
///
/// `psi[k]` is the potential attached to row `set.rows()[k]`.
pub fn prox_composed(
    op: &ConvOperator,
    set: &RowSet,
    psi: &[ScalarFn],
    y: &[f64],
    gamma: f64,
    out: &mut [f64],
) {
    debug_assert_eq!(psi.len(), set.len());
    out.copy_from_slice(y);
    for ((&m, &delta), f) in set.rows.iter().zip(&set.deltas).zip(psi) {
        let t = op.row_dot(m, y);
        let w = f.prox(t, delta * gamma);
        let c = (w - t) / delta;
        if c != 0.0 {
            op.scatter_row(m, c, out);
        }
    }
}

/// `Upsilon_i o T_i`: the part of `Psi o T` carried by one row family.
#[derive(Debug, Clone)]
pub struct FidelityPiece {
    op: Arc<ConvOperator>,
    set: RowSet,
    psi: Vec<ScalarFn>,
}

impl FidelityPiece {
    pub fn rows(&self) -> &RowSet {
        &self.set
    }

    pub fn potentials(&self) -> &[ScalarFn] {
        &self.psi
    }
}

impl ProxFunction for FidelityPiece {
    fn dim(&self) -> usize {
        self.op.input_len()
    }

    fn value(&self, y: &[f64]) -> ExtReal {
        self.set
            .rows
            .iter()
            .zip(&self.psi)
            .map(|(&m, f)| f.value(self.op.row_dot(m, y)))
            .sum()
    }

    fn prox(&self, y: &[f64], scale: f64, out: &mut [f64]) {
        prox_composed(&self.op, &self.set, &self.psi, y, scale, out);
    }
}

/// Splits `Psi o T` into one [`FidelityPiece`] per row family.
pub fn split_fidelity(
    op: &Arc<ConvOperator>,
    part: &RowPartition,
    psi: &SeparablePenalty,
) -> Result<Vec<FidelityPiece>> {
    if part.output_len() != op.output_len() {
        return Err(Error::ShapeMismatch {
            expected: op.output_len(),
            got: part.output_len(),
        });
    }
    if psi.len() != op.output_len() {
        return Err(Error::ShapeMismatch {
            expected: op.output_len(),
            got: psi.len(),
        });
    }
    let terms = psi.terms();
    Ok(part
        .sets()
        .iter()
        .map(|set| FidelityPiece {
            op: Arc::clone(op),
            set: set.clone(),
            psi: set.rows.iter().map(|&m| terms[m]).collect(),
        })
        .collect())
}
