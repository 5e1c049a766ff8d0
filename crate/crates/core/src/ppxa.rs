//! Parallel proximal algorithm (PPXA) for `min sum_j f_j(x)`.
//!
//! Three drivers share the same parameters and stopping rule:
//!
//! * [`Ppxa`] / [`ppxa_solve`]: every `f_j` is accessed through its own prox.
//! * [`FrameSolver`] / [`ppxa_frame_solve`]: the problem
//!   `min sum_{j<=S} g_j(F^T x) + sum_{j>S} f_j(x)` over frame coefficients,
//!   where the prox of `g_j o F^T` is obtained from the prox of `g_j` because
//!   `F^T F = nu Id`. Costs `2S` frame applications per iteration.
//! * [`AcceleratedSolver`] / [`ppxa_accelerated_solve`]: the same iterates,
//!   but the auxiliary variables of the first `S` functions are stored as
//!   `(v_j, u_j^perp) = (F^T u_j, u_j - F F^T u_j / nu)`, which brings the
//!   cost down to three frame applications per iteration for any `S`.
//!
//! The objective monitored for the stopping rule leaves indicator functions
//! out.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::frame::{verify_tight, TightFrame};
use crate::{Error, ExtReal, ProxFunction, Result};

/// Smallest admissible distance of a relaxation value to 0 and 2.
pub const LAMBDA_MIN: f64 = 1e-3;

/// Tolerance on `sum_j w_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Frames whose tightness residual exceeds this are refused.
pub const TIGHTNESS_TOL: f64 = 1e-6;

const TIGHTNESS_TRIALS: usize = 3;
const TIGHTNESS_SEED: u64 = 0x7167_6874;

#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation {
    Constant(f64),
    /// `lambda_l` for `l = 0, 1, ..`; the last value is repeated.
    Schedule(Vec<f64>),
}

impl Relaxation {
    pub fn at(&self, iter: usize) -> f64 {
        match self {
            Relaxation::Constant(l) => *l,
            Relaxation::Schedule(s) => s[iter.min(s.len() - 1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpxaParams {
    pub gamma: f64,
    pub weights: Vec<f64>,
    pub relaxation: Relaxation,
    pub max_iter: usize,
    /// Stop when `|obj_l - obj_{l-1}| / |obj_{l-1}|` falls below this.
    pub tol: f64,
}

impl PpxaParams {
    pub const DEFAULT_GAMMA: f64 = 50.0;
    pub const DEFAULT_LAMBDA: f64 = 1.6;
    pub const DEFAULT_TOL: f64 = 1e-3;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    pub fn new(weights: Vec<f64>) -> Self {
        PpxaParams {
            gamma: Self::DEFAULT_GAMMA,
            weights,
            relaxation: Relaxation::Constant(Self::DEFAULT_LAMBDA),
            max_iter: Self::DEFAULT_MAX_ITER,
            tol: Self::DEFAULT_TOL,
        }
    }

    /// Equal weights `1/J`.
    pub fn uniform(j: usize) -> Self {
        Self::new(vec![1.0 / j as f64; j])
    }
}

/// One violated requirement on [`PpxaParams`].
#[derive(Debug, Clone, PartialEq)]
pub enum ParamViolation {
    WeightCount { expected: usize, got: usize },
    WeightSum(f64),
    WeightRange { index: usize, value: f64 },
    RelaxationRange { iter: usize, value: f64 },
    EmptySchedule,
    Gamma(f64),
    Tolerance(f64),
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::WeightCount { expected, got } => {
                write!(f, "expected {expected} weights, got {got}")
            }
            ParamViolation::WeightSum(s) => write!(f, "weights must sum to 1, sum is {s}"),
            ParamViolation::WeightRange { index, value } => {
                write!(f, "weight {index} = {value} is outside (0, 1]")
            }
            ParamViolation::RelaxationRange { iter, value } => write!(
                f,
                "relaxation lambda = {value} (iteration {iter}) is outside [{LAMBDA_MIN}, {}]",
                2.0 - LAMBDA_MIN
            ),
            ParamViolation::EmptySchedule => write!(f, "relaxation schedule is empty"),
            ParamViolation::Gamma(g) => write!(f, "gamma = {g} must be finite and > 0"),
            ParamViolation::Tolerance(t) => write!(f, "tolerance {t} must be finite and >= 0"),
        }
    }
}

/// Reports every violated condition for a problem with `j` functions.
pub fn validate_params(
    params: &PpxaParams,
    j: usize,
) -> core::result::Result<(), Vec<ParamViolation>> {
    let mut bad = Vec::new();
    if params.weights.len() != j {
        bad.push(ParamViolation::WeightCount {
            expected: j,
            got: params.weights.len(),
        });
    }
    for (index, &value) in params.weights.iter().enumerate() {
        if !(value > 0.0 && value <= 1.0) {
            bad.push(ParamViolation::WeightRange { index, value });
        }
    }
    let sum: f64 = params.weights.iter().sum();
    let gap = (sum - 1.0).abs();
    if gap.is_nan() || gap > WEIGHT_SUM_TOL {
        bad.push(ParamViolation::WeightSum(sum));
    }
    let ok = |l: f64| (LAMBDA_MIN..=2.0 - LAMBDA_MIN).contains(&l);
    match &params.relaxation {
        Relaxation::Constant(l) => {
            if !ok(*l) {
                bad.push(ParamViolation::RelaxationRange { iter: 0, value: *l });
            }
        }
        Relaxation::Schedule(s) if s.is_empty() => bad.push(ParamViolation::EmptySchedule),
        Relaxation::Schedule(s) => {
            if let Some((iter, &value)) = s.iter().enumerate().find(|(_, &l)| !ok(l)) {
                bad.push(ParamViolation::RelaxationRange { iter, value });
            }
        }
    }
    if !(params.gamma.is_finite() && params.gamma > 0.0) {
        bad.push(ParamViolation::Gamma(params.gamma));
    }
    if !(params.tol.is_finite() && params.tol >= 0.0) {
        bad.push(ParamViolation::Tolerance(params.tol));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

fn check_params(params: &PpxaParams, j: usize) -> Result<()> {
    validate_params(params, j).map_err(Error::InvalidParams)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Objective without indicator terms; may be `+inf`.
    pub objective: f64,
    /// `+inf` when undefined.
    pub rel_change: f64,
    /// Cumulative frame applications made by the iterations.
    pub frame_ops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub initial_objective: f64,
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs `f(j, slot_j)` for every slot; on the rayon pool with `parallel`.
fn fan_out<T, F>(slots: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        slots.par_iter_mut().enumerate().for_each(|(j, s)| f(j, s));
    }
    #[cfg(not(feature = "parallel"))]
    for (j, s) in slots.iter_mut().enumerate() {
        f(j, s);
    }
}

/// `acc += w * v`
#[inline]
fn axpy(acc: &mut [f64], w: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

fn objective_of(funcs: &[&dyn ProxFunction], x: &[f64]) -> ExtReal {
    funcs
        .iter()
        .filter(|f| !f.is_indicator())
        .map(|f| f.value(x))
        .sum()
}

fn check_dims(funcs: &[&dyn ProxFunction], n: usize) -> Result<()> {
    for f in funcs {
        if f.dim() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: f.dim(),
            });
        }
    }
    Ok(())
}

fn ensure_finite(x: &[f64], iter: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteIterate(iter))
    }
}

/// Common interface of the three iteration schemes.
pub trait Iteration {
    /// Advances one iteration.
    fn step(&mut self) -> Result<()>;
    /// Current consensus iterate `x_l`.
    fn x(&self) -> &[f64];
    /// Objective at `x_l`, indicators excluded.
    fn objective(&self) -> ExtReal;
    /// Frame applications made by [`Iteration::step`] so far.
    fn frame_ops(&self) -> usize;
    /// Number of completed iterations.
    fn iteration(&self) -> usize;
}

/// Iterates until the relative objective change drops below `tol` or
/// `max_iter` iterations have been made.
pub fn run<I: Iteration + ?Sized>(state: &mut I, max_iter: usize, tol: f64) -> Result<Solution> {
    let initial = state.objective().to_f64();
    let mut prev = initial;
    let mut trace = Vec::new();
    let mut converged = false;
    while state.iteration() < max_iter {
        state.step()?;
        let obj = state.objective().to_f64();
        let rel = relative_change(prev, obj);
        trace.push(TraceRecord {
            iter: state.iteration(),
            objective: obj,
            rel_change: rel,
            frame_ops: state.frame_ops(),
        });
        prev = obj;
        if rel < tol {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        x: state.x().to_vec(),
        initial_objective: initial,
        iterations: state.iteration(),
        trace,
        converged,
    })
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    if !(prev.is_finite() && cur.is_finite()) {
        return f64::INFINITY;
    }
    if prev == cur {
        return 0.0;
    }
    if prev == 0.0 {
        return f64::INFINITY;
    }
    (cur - prev).abs() / prev.abs()
}

/// Algorithm state of the general form.
pub struct Ppxa<'a> {
    funcs: Vec<Box<dyn ProxFunction + 'a>>,
    params: PpxaParams,
    u: Vec<Vec<f64>>,
    pj: Vec<Vec<f64>>,
    p: Vec<f64>,
    x: Vec<f64>,
    iter: usize,
}

impl<'a> Ppxa<'a> {
    /// Starts from `u_{j,0} = init` for every `j`.
    pub fn new(
        funcs: Vec<Box<dyn ProxFunction + 'a>>,
        params: PpxaParams,
        init: &[f64],
    ) -> Result<Self> {
        let u = vec![init.to_vec(); funcs.len()];
        Self::with_auxiliaries(funcs, params, u)
    }

    /// Starts from explicit `u_{j,0}`; `x_0 = sum_j w_j u_{j,0}`.
    pub fn with_auxiliaries(
        funcs: Vec<Box<dyn ProxFunction + 'a>>,
        params: PpxaParams,
        u: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let j = funcs.len();
        if j < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "PPXA needs at least two functions, got {j}"
            )));
        }
        check_params(&params, j)?;
        if u.len() != j {
            return Err(Error::ShapeMismatch {
                expected: j,
                got: u.len(),
            });
        }
        let n = u[0].len();
        for f in &funcs {
            if f.dim() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: f.dim(),
                });
            }
        }
        for uj in &u {
            if uj.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: uj.len(),
                });
            }
            ensure_finite(uj, 0)?;
        }
        let mut x = vec![0.0; n];
        for (w, uj) in params.weights.iter().zip(&u) {
            axpy(&mut x, *w, uj);
        }
        Ok(Ppxa {
            pj: vec![vec![0.0; n]; j],
            p: vec![0.0; n],
            funcs,
            params,
            u,
            x,
            iter: 0,
        })
    }

    /// `p_l` of the last completed iteration.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn u(&self, j: usize) -> &[f64] {
        &self.u[j]
    }

    pub fn funcs(&self) -> &[Box<dyn ProxFunction + 'a>] {
        &self.funcs
    }

    pub fn params(&self) -> &PpxaParams {
        &self.params
    }
}

impl Iteration for Ppxa<'_> {
    fn step(&mut self) -> Result<()> {
        let lambda = self.params.relaxation.at(self.iter);
        let gamma = self.params.gamma;
        let (funcs, u, w) = (&self.funcs, &self.u, &self.params.weights);
        fan_out(&mut self.pj, |j, out| {
            funcs[j].prox(&u[j], gamma / w[j], out)
        });
        self.p.iter_mut().for_each(|v| *v = 0.0);
        for (wj, pj) in w.iter().zip(&self.pj) {
            axpy(&mut self.p, *wj, pj);
        }
        for (uj, pj) in self.u.iter_mut().zip(&self.pj) {
            for k in 0..uj.len() {
                uj[k] += lambda * (2.0 * self.p[k] - self.x[k] - pj[k]);
            }
        }
        for (xk, pk) in self.x.iter_mut().zip(&self.p) {
            *xk += lambda * (pk - *xk);
        }
        self.iter += 1;
        ensure_finite(&self.x, self.iter)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn objective(&self) -> ExtReal {
        self.funcs
            .iter()
            .filter(|f| !f.is_indicator())
            .map(|f| f.value(&self.x))
            .sum()
    }

    fn frame_ops(&self) -> usize {
        0
    }

    fn iteration(&self) -> usize {
        self.iter
    }
}

/// Minimizes `sum_j f_j` with the general form; needs `J >= 2`.
pub fn ppxa_solve(
    funcs: &[&dyn ProxFunction],
    params: &PpxaParams,
    init: &[f64],
) -> Result<Solution> {
    let boxed: Vec<Box<dyn ProxFunction + '_>> = funcs
        .iter()
        .map(|f| Box::new(*f) as Box<dyn ProxFunction>)
        .collect();
    let mut state = Ppxa::new(boxed, params.clone(), init)?;
    run(&mut state, params.max_iter, params.tol)
}

/// Frame wrapper counting every analysis and synthesis.
pub struct CountingFrame<'a> {
    inner: &'a dyn TightFrame,
    count: AtomicUsize,
}

impl<'a> CountingFrame<'a> {
    pub fn new(inner: &'a dyn TightFrame) -> Self {
        CountingFrame {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

impl TightFrame for CountingFrame<'_> {
    fn image_len(&self) -> usize {
        self.inner.image_len()
    }
    fn coeff_len(&self) -> usize {
        self.inner.coeff_len()
    }
    fn nu(&self) -> f64 {
        self.inner.nu()
    }
    fn analyze(&self, y: &[f64], out: &mut [f64]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.analyze(y, out)
    }
    fn synthesize(&self, x: &[f64], out: &mut [f64]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.synthesize(x, out)
    }
}

/// `g o F^T` as a function of the coefficients.
struct FrameLifted<'a> {
    g: &'a dyn ProxFunction,
    frame: Arc<CountingFrame<'a>>,
}

impl ProxFunction for FrameLifted<'_> {
    fn dim(&self) -> usize {
        self.frame.coeff_len()
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        let mut y = vec![0.0; self.frame.image_len()];
        self.frame.inner.synthesize(x, &mut y);
        self.g.value(&y)
    }

    fn prox(&self, u: &[f64], scale: f64, out: &mut [f64]) {
        let nu = self.frame.nu();
        let n = self.frame.image_len();
        let mut t = vec![0.0; n];
        self.frame.synthesize(u, &mut t);
        let mut w = vec![0.0; n];
        self.g.prox(&t, nu * scale, &mut w);
        for (wk, tk) in w.iter_mut().zip(&t) {
            *wk -= tk;
        }
        self.frame.analyze(&w, out);
        for (o, uk) in out.iter_mut().zip(u) {
            *o = uk + *o / nu;
        }
    }

    fn is_indicator(&self) -> bool {
        self.g.is_indicator()
    }
}

fn check_frame(frame: &dyn TightFrame) -> Result<()> {
    let rep = verify_tight(frame, TIGHTNESS_TRIALS, TIGHTNESS_SEED);
    if rep.tightness.is_nan() || rep.tightness > TIGHTNESS_TOL {
        return Err(Error::NotTight(rep.tightness));
    }
    Ok(())
}

fn check_frame_problem(
    g: &[&dyn ProxFunction],
    f: &[&dyn ProxFunction],
    frame: &dyn TightFrame,
    params: &PpxaParams,
    init: &[f64],
) -> Result<()> {
    let j = g.len() + f.len();
    if j < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "PPXA needs at least two functions, got {j}"
        )));
    }
    check_params(params, j)?;
    check_dims(g, frame.image_len())?;
    check_dims(f, frame.coeff_len())?;
    if init.len() != frame.coeff_len() {
        return Err(Error::ShapeMismatch {
            expected: frame.coeff_len(),
            got: init.len(),
        });
    }
    ensure_finite(init, 0)?;
    check_frame(frame)
}

fn frame_objective(
    g: &[&dyn ProxFunction],
    f: &[&dyn ProxFunction],
    frame: &dyn TightFrame,
    x: &[f64],
) -> ExtReal {
    let mut y = vec![0.0; frame.image_len()];
    frame.synthesize(x, &mut y);
    objective_of(g, &y) + objective_of(f, x)
}

/// Frame form: the general form run on `g_j o F^T` and `f_j`.
pub struct FrameSolver<'a> {
    engine: Ppxa<'a>,
    frame: Arc<CountingFrame<'a>>,
    g: Vec<&'a dyn ProxFunction>,
    f: Vec<&'a dyn ProxFunction>,
}

impl<'a> FrameSolver<'a> {
    /// `g` act on images (length `N`), `f` on coefficients (length `K`);
    /// the weights list the `g` first. Starts from `u_{j,0} = init`.
    pub fn new(
        g: &[&'a dyn ProxFunction],
        f: &[&'a dyn ProxFunction],
        frame: &'a dyn TightFrame,
        params: PpxaParams,
        init: &[f64],
    ) -> Result<Self> {
        check_frame_problem(g, f, frame, &params, init)?;
        let counting = Arc::new(CountingFrame::new(frame));
        let mut funcs: Vec<Box<dyn ProxFunction + 'a>> = Vec::with_capacity(g.len() + f.len());
        for &gj in g {
            funcs.push(Box::new(FrameLifted {
                g: gj,
                frame: Arc::clone(&counting),
            }));
        }
        for &fj in f {
            funcs.push(Box::new(fj));
        }
        let engine = Ppxa::new(funcs, params, init)?;
        Ok(FrameSolver {
            engine,
            frame: counting,
            g: g.to_vec(),
            f: f.to_vec(),
        })
    }

    pub fn engine(&self) -> &Ppxa<'a> {
        &self.engine
    }
}

impl Iteration for FrameSolver<'_> {
    fn step(&mut self) -> Result<()> {
        self.engine.step()
    }
    fn x(&self) -> &[f64] {
        self.engine.x()
    }
    fn objective(&self) -> ExtReal {
        frame_objective(&self.g, &self.f, self.frame.inner, self.engine.x())
    }
    fn frame_ops(&self) -> usize {
        self.frame.count()
    }
    fn iteration(&self) -> usize {
        self.engine.iteration()
    }
}

pub fn ppxa_frame_solve(
    g: &[&dyn ProxFunction],
    f: &[&dyn ProxFunction],
    frame: &dyn TightFrame,
    params: &PpxaParams,
    init: &[f64],
) -> Result<Solution> {
    let mut state = FrameSolver::new(g, f, frame, params.clone(), init)?;
    run(&mut state, params.max_iter, params.tol)
}

/// Accelerated frame form.
pub struct AcceleratedSolver<'a> {
    g: Vec<&'a dyn ProxFunction>,
    f: Vec<&'a dyn ProxFunction>,
    frame: CountingFrame<'a>,
    params: PpxaParams,
    v: Vec<Vec<f64>>,
    u_perp: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    pf: Vec<Vec<f64>>,
    p: Vec<f64>,
    x: Vec<f64>,
    iter: usize,
}

impl<'a> AcceleratedSolver<'a> {
    /// Same arguments as [`FrameSolver::new`].
    pub fn new(
        g: &[&'a dyn ProxFunction],
        f: &[&'a dyn ProxFunction],
        frame: &'a dyn TightFrame,
        params: PpxaParams,
        init: &[f64],
    ) -> Result<Self> {
        check_frame_problem(g, f, frame, &params, init)?;
        let u0 = vec![init.to_vec(); g.len() + f.len()];
        Self::build(g, f, frame, params, u0)
    }

    /// Starts from explicit `u_{j,0}`, split as `v_{j,0} = F^T u_{j,0}` and
    /// `u_{j,0}^perp = u_{j,0} - F v_{j,0} / nu` for `j <= S`.
    pub fn with_auxiliaries(
        g: &[&'a dyn ProxFunction],
        f: &[&'a dyn ProxFunction],
        frame: &'a dyn TightFrame,
        params: PpxaParams,
        u0: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let init = u0.first().cloned().unwrap_or_default();
        check_frame_problem(g, f, frame, &params, &init)?;
        if u0.len() != g.len() + f.len() {
            return Err(Error::ShapeMismatch {
                expected: g.len() + f.len(),
                got: u0.len(),
            });
        }
        for uj in &u0 {
            if uj.len() != frame.coeff_len() {
                return Err(Error::ShapeMismatch {
                    expected: frame.coeff_len(),
                    got: uj.len(),
                });
            }
            ensure_finite(uj, 0)?;
        }
        Self::build(g, f, frame, params, u0)
    }

    fn build(
        g: &[&'a dyn ProxFunction],
        f: &[&'a dyn ProxFunction],
        frame: &'a dyn TightFrame,
        params: PpxaParams,
        u0: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let (n, k, nu) = (frame.image_len(), frame.coeff_len(), frame.nu());
        let s = g.len();
        let mut x = vec![0.0; k];
        for (w, uj) in params.weights.iter().zip(&u0) {
            axpy(&mut x, *w, uj);
        }
        let mut v = Vec::with_capacity(s);
        let mut u_perp = Vec::with_capacity(s);
        for uj in &u0[..s] {
            let mut vj = vec![0.0; n];
            frame.synthesize(uj, &mut vj);
            let mut back = vec![0.0; k];
            frame.analyze(&vj, &mut back);
            u_perp.push(uj.iter().zip(&back).map(|(a, b)| a - b / nu).collect());
            v.push(vj);
        }
        let u: Vec<Vec<f64>> = u0[s..].to_vec();
        Ok(AcceleratedSolver {
            g: g.to_vec(),
            f: f.to_vec(),
            frame: CountingFrame::new(frame),
            q: vec![vec![0.0; n]; s],
            pf: vec![vec![0.0; k]; u.len()],
            p: vec![0.0; k],
            params,
            v,
            u_perp,
            u,
            x,
            iter: 0,
        })
    }

    /// `v_j = F^T u_j` for `j <= S`.
    pub fn v(&self, j: usize) -> &[f64] {
        &self.v[j]
    }

    /// Component of `u_j` in the kernel of `F^T`, `j <= S`.
    pub fn u_perp(&self, j: usize) -> &[f64] {
        &self.u_perp[j]
    }

    /// `u_j` for `j > S` (indexed from 0 among the `f` functions).
    pub fn u_f(&self, j: usize) -> &[f64] {
        &self.u[j]
    }

    /// `p_l` of the last completed iteration.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn frame(&self) -> &dyn TightFrame {
        self.frame.inner
    }
}

impl Iteration for AcceleratedSolver<'_> {
    fn step(&mut self) -> Result<()> {
        let lambda = self.params.relaxation.at(self.iter);
        let gamma = self.params.gamma;
        let nu = self.frame.nu();
        let s = self.g.len();
        let w = &self.params.weights;
        let (g, v) = (&self.g, &self.v);
        fan_out(&mut self.q, |j, out| {
            g[j].prox(&v[j], nu * gamma / w[j], out);
            out.iter_mut().for_each(|o| *o /= nu);
        });
        let (f, u) = (&self.f, &self.u);
        fan_out(&mut self.pf, |j, out| {
            f[j].prox(&u[j], gamma / w[s + j], out)
        });

        let n = self.frame.image_len();
        let mut qsum = vec![0.0; n];
        for (wj, qj) in w.iter().zip(&self.q) {
            axpy(&mut qsum, *wj, qj);
        }
        self.frame.analyze(&qsum, &mut self.p);
        for (wj, up) in w.iter().zip(&self.u_perp) {
            axpy(&mut self.p, *wj, up);
        }
        for (wj, pj) in w[s..].iter().zip(&self.pf) {
            axpy(&mut self.p, *wj, pj);
        }

        let r: Vec<f64> = self
            .p
            .iter()
            .zip(&self.x)
            .map(|(p, x)| 2.0 * p - x)
            .collect();
        let mut r_t = vec![0.0; n];
        self.frame.synthesize(&r, &mut r_t);
        let mut r_perp = vec![0.0; r.len()];
        self.frame.analyze(&r_t, &mut r_perp);
        for (rp, rk) in r_perp.iter_mut().zip(&r) {
            *rp = rk - *rp / nu;
        }

        for up in &mut self.u_perp {
            for (a, b) in up.iter_mut().zip(&r_perp) {
                *a += lambda * (b - *a);
            }
        }
        for (vj, qj) in self.v.iter_mut().zip(&self.q) {
            for ((a, b), c) in vj.iter_mut().zip(&r_t).zip(qj) {
                *a += lambda * (b - nu * c);
            }
        }
        for (uj, pj) in self.u.iter_mut().zip(&self.pf) {
            for ((a, b), c) in uj.iter_mut().zip(&r).zip(pj) {
                *a += lambda * (b - c);
            }
        }
        for (xk, pk) in self.x.iter_mut().zip(&self.p) {
            *xk += lambda * (pk - *xk);
        }
        self.iter += 1;
        ensure_finite(&self.x, self.iter)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }

    fn objective(&self) -> ExtReal {
        frame_objective(&self.g, &self.f, self.frame.inner, &self.x)
    }

    fn frame_ops(&self) -> usize {
        self.frame.count()
    }

    fn iteration(&self) -> usize {
        self.iter
    }
}

pub fn ppxa_accelerated_solve(
    g: &[&dyn ProxFunction],
    f: &[&dyn ProxFunction],
    frame: &dyn TightFrame,
    params: &PpxaParams,
    init: &[f64],
) -> Result<Solution> {
    let mut state = AcceleratedSolver::new(g, f, frame, params.clone(), init)?;
    run(&mut state, params.max_iter, params.tol)
}
