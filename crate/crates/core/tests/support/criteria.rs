// Acceptance criteria that only need the numerical core. Shared by the
// acceptance targets of both crates.

#![allow(dead_code)]

use std::sync::Arc;
use std::time::Instant;

use ppxa_core::conv::{
    prox_composed, split_fidelity, verify_orthogonality, Boundary, ConvOperator, FidelityPiece,
};
use ppxa_core::frame::{verify_tight, HaarFrame, HaarUnion2, IdentityFrame, TightFrame};
use ppxa_core::oracle::{brute_force_prox, brute_force_prox_scalar, minimize_convex, DEFAULT_TOL};
use ppxa_core::ppxa::{ppxa_solve, AcceleratedSolver, FrameSolver, Iteration, PpxaParams};
use ppxa_core::prox::{
    kl_coord_value, project_box, prox_gamma, prox_kl_coord, prox_l2_pair, prox_power, BoxIndicator,
    Exponent, Interval, ScalarFn, SeparablePenalty,
};
use ppxa_core::tv::{
    prox_tv_block, split_tv, tv_value, Coupling, GradientFilter, TvBlock, TvConfig,
};
use ppxa_core::{ExtReal, Image, ProxFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fin(v: f64) -> ExtReal {
    ExtReal::Finite(v)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Small-mean Poisson sampler by multiplication of uniforms.
pub fn poisson_small(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let limit = (-mean).exp();
    let mut p = 1.0;
    let mut k = 0.0;
    loop {
        p *= rng.random::<f64>();
        if p <= limit {
            return k;
        }
        k += 1.0;
    }
}

// ---------------------------------------------------------------- 1

pub fn criterion_1() -> Outcome {
    let start = Instant::now();
    let n = 1000;
    let mut r = rng(101);
    let mut worst: Vec<(String, f64)> = Vec::new();
    let mut fail = None;

    let mut err = 0.0f64;
    for _ in 0..n {
        let (eta, alpha, chi, gamma) = (
            r.random_range(-20.0..20.0),
            r.random_range(0.0..5.0),
            r.random_range(0.01..5.0),
            r.random_range(0.05..5.0),
        );
        let closed = prox_gamma(eta, alpha, chi, gamma).unwrap();
        let phi = |v: f64| {
            if v > 0.0 {
                fin(gamma * (alpha * v - chi * v.ln()))
            } else {
                ExtReal::PosInf
            }
        };
        match brute_force_prox_scalar(eta, phi, Interval::NON_NEGATIVE, DEFAULT_TOL) {
            Ok(b) => err = err.max((closed - b).abs()),
            Err(e) => fail = Some(format!("prox_gamma oracle: {e}")),
        }
    }
    worst.push(("prox_gamma".into(), err));

    for p in Exponent::ALL {
        let mut err = 0.0f64;
        for _ in 0..n {
            let (eta, chi, gamma) = (
                r.random_range(-20.0..20.0),
                r.random_range(0.01..5.0),
                r.random_range(0.05..5.0),
            );
            let closed = prox_power(eta, chi, p, gamma).unwrap();
            let phi = |v: f64| fin(gamma * chi * v.abs().powf(p.value()));
            match brute_force_prox_scalar(eta, phi, Interval::REAL_LINE, DEFAULT_TOL) {
                Ok(b) => err = err.max((closed - b).abs()),
                Err(e) => fail = Some(format!("prox_power oracle: {e}")),
            }
        }
        worst.push((format!("prox_power p={}", p.value()), err));
    }

    let mut err = 0.0f64;
    for _ in 0..n {
        let (a, b, mu) = (
            r.random_range(-10.0..10.0),
            r.random_range(-10.0..10.0),
            r.random_range(0.0..8.0),
        );
        let (c0, c1) = prox_l2_pair(a, b, mu).unwrap();
        match brute_force_prox(
            &[a, b],
            |v| fin(mu * v[0].hypot(v[1])),
            &[Interval::REAL_LINE; 2],
            DEFAULT_TOL,
        ) {
            Ok(v) => err = err.max((c0 - v[0]).abs()).max((c1 - v[1]).abs()),
            Err(e) => fail = Some(format!("prox_l2_pair oracle: {e}")),
        }
    }
    worst.push(("prox_l2_pair".into(), err));

    let mut err = 0.0f64;
    for _ in 0..n {
        let u = r.random_range(-20.0..40.0);
        let z = r.random_range(0..=40) as f64;
        let (alpha, gamma) = (r.random_range(0.05..2.0), r.random_range(0.05..5.0));
        let closed = prox_kl_coord(u, z, alpha, gamma);
        let phi = |v: f64| match kl_coord_value(z, v, alpha) {
            ExtReal::Finite(k) => fin(gamma * k),
            ExtReal::PosInf => ExtReal::PosInf,
        };
        match brute_force_prox_scalar(u, phi, Interval::NON_NEGATIVE, DEFAULT_TOL) {
            Ok(b) => err = err.max((closed - b).abs()),
            Err(e) => fail = Some(format!("prox_kl_coord oracle: {e}")),
        }
    }
    worst.push(("prox_kl_coord".into(), err));

    let mut err = 0.0f64;
    for _ in 0..n {
        let lo = r.random_range(-5.0..5.0);
        let hi = lo + r.random_range(0.0..10.0);
        let u = r.random_range(-20.0..20.0);
        let closed = project_box(&[u], lo, hi).unwrap()[0];
        let phi = |v: f64| {
            if (lo..=hi).contains(&v) {
                ExtReal::ZERO
            } else {
                ExtReal::PosInf
            }
        };
        match brute_force_prox_scalar(u, phi, Interval::new(lo, hi), DEFAULT_TOL) {
            Ok(b) => err = err.max((closed - b).abs()),
            Err(e) => fail = Some(format!("project_box oracle: {e}")),
        }
    }
    worst.push(("project_box".into(), err));

    let secs = start.elapsed().as_secs_f64();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let pass = fail.is_none() && max <= 1e-6 && secs < 30.0;
    let list: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    Outcome::new(
        pass,
        format!(
            "max err {max:.2e}, {secs:.1} s; {}{}",
            list.join(", "),
            fail.map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- 2

fn random_psi(r: &mut ChaCha8Rng, kind: usize) -> ScalarFn {
    match kind {
        0 => ScalarFn::abs(r.random_range(0.1..3.0)),
        1 => ScalarFn::Kl {
            z: r.random_range(0..=20) as f64,
            alpha: r.random_range(0.1..2.0),
        },
        _ => ScalarFn::Power {
            chi: r.random_range(0.1..3.0),
            p: Exponent::Two,
        },
    }
}

pub fn criterion_2() -> Outcome {
    let configs = [
        (Boundary::Valid, 7, 3),
        (Boundary::Valid, 8, 4),
        (Boundary::Valid, 5, 3),
        (Boundary::ZeroPad, 8, 4),
        (Boundary::ZeroPad, 6, 3),
        (Boundary::ZeroPad, 8, 3),
        (Boundary::Periodic, 8, 3),
        (Boundary::Periodic, 6, 3),
        (Boundary::Periodic, 8, 4),
        (Boundary::Decimated(2), 8, 3),
        (Boundary::Decimated(3), 6, 3),
        (Boundary::Decimated(2), 8, 4),
    ];
    let mut r = rng(202);
    let (mut max_err, mut descent_fail, mut oracle_fail) = (0.0f64, 0usize, 0usize);
    let instances = 200;
    for inst in 0..instances {
        let (mode, n, q) = configs[inst % configs.len()];
        let taps: Vec<f64> = (0..q).map(|_| r.random_range(0.05..1.0)).collect();
        let op = ConvOperator::new_1d(&taps, n, mode).unwrap();
        let part = op.partition();
        let small: Vec<_> = part.sets().iter().filter(|s| s.len() <= 3).collect();
        let set = small[r.random_range(0..small.len())];
        let kind = inst % 3;
        let psi: Vec<ScalarFn> = set
            .rows()
            .iter()
            .map(|_| random_psi(&mut r, kind))
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| {
                if kind == 1 {
                    r.random_range(0.0..6.0)
                } else {
                    r.random_range(-4.0..4.0)
                }
            })
            .collect();
        let gamma = r.random_range(0.1..3.0);

        let mut v = vec![0.0; n];
        prox_composed(&op, set, &psi, &y, gamma, &mut v);

        let rows: Vec<Vec<f64>> = set.rows().iter().map(|&m| op.row(m)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let objective = |w: &[f64]| -> ExtReal {
            let q: f64 = w.iter().zip(&y).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
            let mut acc = fin(q);
            for (t, f) in rows.iter().zip(&psi) {
                acc = acc
                    + match f.value(dot(t, w)) {
                        ExtReal::Finite(x) => fin(gamma * x),
                        ExtReal::PosInf => ExtReal::PosInf,
                    };
            }
            acc
        };
        let lift = |c: &[f64]| -> Vec<f64> {
            let mut w = y.clone();
            for (ck, t) in c.iter().zip(&rows) {
                for (wi, ti) in w.iter_mut().zip(t) {
                    *wi += ck * ti;
                }
            }
            w
        };
        let dom = vec![Interval::REAL_LINE; rows.len()];
        match minimize_convex(
            |c| objective(&lift(c)),
            &vec![0.0; rows.len()],
            &dom,
            DEFAULT_TOL,
        ) {
            Ok(c) => max_err = max_err.max(max_abs_diff(&v, &lift(&c))),
            Err(_) => oracle_fail += 1,
        }

        let base = objective(&v);
        for _ in 0..50 {
            let mut d: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let norm = dot(&d, &d).sqrt();
            d.iter_mut().for_each(|x| *x /= norm);
            let moved: Vec<f64> = v.iter().zip(&d).map(|(a, b)| a + 1e-4 * b).collect();
            let ok = match (base, objective(&moved)) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b + 1e-12,
                (ExtReal::Finite(_), ExtReal::PosInf) => true,
                (ExtReal::PosInf, _) => false,
            };
            if !ok {
                descent_fail += 1;
            }
        }
    }
    let pass = max_err <= 1e-5 && descent_fail == 0 && oracle_fail == 0;
    Outcome::new(
        pass,
        format!("{instances} instances, max |closed - brute| {max_err:.2e}, descent failures {descent_fail}/{}, oracle failures {oracle_fail}", instances * 50),
    )
}

// ---------------------------------------------------------------- 3

/// Dense `T` (row-major `M x N`) built column by column from `apply`.
pub fn dense_matrix(op: &ConvOperator) -> Vec<Vec<f64>> {
    let (n, m) = (op.input_len(), op.output_len());
    let mut rows = vec![vec![0.0; n]; m];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e[col] = 1.0;
        let t = op.apply(&e).unwrap();
        for (mi, v) in t.into_iter().enumerate() {
            rows[mi][col] = v;
        }
        e[col] = 0.0;
    }
    rows
}

/// Largest within-family inner product and largest Delta error, from the dense matrix.
pub fn dense_partition_check(op: &ConvOperator) -> (f64, f64) {
    let t = dense_matrix(op);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (mut off, mut derr) = (0.0f64, 0.0f64);
    for set in op.partition().sets() {
        for (a, &ma) in set.rows().iter().enumerate() {
            derr = derr.max((set.deltas()[a] - dot(&t[ma], &t[ma])).abs());
            for &mb in &set.rows()[a + 1..] {
                off = off.max(dot(&t[ma], &t[mb]).abs());
            }
        }
    }
    (off, derr)
}

fn one_based_sets(op: &ConvOperator) -> Vec<Vec<usize>> {
    op.partition()
        .sets()
        .iter()
        .map(|s| s.rows().iter().map(|r| r + 1).collect())
        .collect()
}

pub fn criterion_3() -> Outcome {
    let mut r = rng(303);
    let (mut checked, mut refused, mut off, mut derr) = (0usize, 0usize, 0.0f64, 0.0f64);
    for n in 8..=32 {
        for q in 1..=5 {
            for mode in [
                Boundary::Valid,
                Boundary::ZeroPad,
                Boundary::Periodic,
                Boundary::Decimated(1),
                Boundary::Decimated(2),
                Boundary::Decimated(3),
            ] {
                let taps: Vec<f64> = (0..q).map(|_| r.random_range(0.05..1.0)).collect();
                match ConvOperator::new_1d(&taps, n, mode) {
                    Ok(op) => {
                        let (o, d) = dense_partition_check(&op);
                        let rep = verify_orthogonality(&op, &op.partition());
                        off = off.max(o).max(rep.max_off_diagonal);
                        derr = derr.max(d).max(rep.max_delta_error);
                        checked += 1;
                    }
                    Err(_) => refused += 1,
                }
            }
        }
    }
    // a few 2-D operators with rectangular kernels
    for (n1, n2, q1, q2, mode) in [
        (8, 9, 2, 3, Boundary::Valid),
        (8, 8, 3, 3, Boundary::ZeroPad),
        (9, 8, 3, 2, Boundary::Periodic),
        (8, 12, 3, 3, Boundary::Decimated(2)),
        (12, 12, 3, 3, Boundary::Decimated(3)),
    ] {
        let k = Image::from_fn(q1, q2, |_, _| r.random_range(0.05..1.0));
        let op = ConvOperator::new_2d(&k, n1, n2, mode).unwrap();
        let (o, d) = dense_partition_check(&op);
        off = off.max(o);
        derr = derr.max(d);
        checked += 1;
    }

    let mut examples = Vec::new();
    let valid = ConvOperator::new_1d(&[1.0, 2.0, 3.0], 10, Boundary::Valid).unwrap();
    examples.push(one_based_sets(&valid) == vec![vec![1, 4, 7], vec![2, 5, 8], vec![3, 6]]);
    let t = 1.0 / 3.0;
    let zp = ConvOperator::new_1d(&[t, t, t], 8, Boundary::ZeroPad).unwrap();
    let part = zp.partition();
    let firsts: Vec<f64> = part.sets().iter().map(|s| s.deltas()[0]).collect();
    let rest_ok = part
        .sets()
        .iter()
        .all(|s| s.deltas()[1..].iter().all(|&d| d == 1.0 / 3.0));
    examples.push(firsts == [1.0 / 9.0, 2.0 / 9.0, 1.0 / 3.0] && rest_ok && part.count() == 3);
    let per = ConvOperator::new_1d(&[1.0, 1.0, 1.0], 8, Boundary::Periodic).unwrap();
    examples
        .push(one_based_sets(&per) == vec![vec![1], vec![2], vec![3, 6], vec![4, 7], vec![5, 8]]);
    let th = [0.7, 0.2, 0.4];
    let dec = ConvOperator::new_1d(&th, 8, Boundary::Decimated(2)).unwrap();
    let dp = dec.partition();
    let full = th[0] * th[0] + th[1] * th[1] + th[2] * th[2];
    examples.push(
        one_based_sets(&dec) == vec![vec![1, 3], vec![2, 4]]
            && dp.sets()[0].deltas() == [th[0] * th[0] + th[1] * th[1], full]
            && dp.sets()[1].deltas() == [full, full],
    );
    let ex_ok = examples.iter().all(|&b| b);
    let pass = off == 0.0 && derr <= 1e-12 && ex_ok;
    Outcome::new(
        pass,
        format!(
            "{checked} operators ({refused} size-constraint refusals), max off-diagonal {off:e}, max Delta error {derr:.1e}, worked examples {}",
            if ex_ok { "reproduced" } else { "MISMATCH" }
        ),
    )
}

// ---------------------------------------------------------------- 4

/// Brute-force prox of one TV block function, block by block over `(a, b)`
/// with `Pi = Y + a H + b V`.
pub fn brute_tv_block(y: &Image, p1: usize, p2: usize, cfg: &TvConfig, gamma: f64) -> Image {
    let (q1, q2) = cfg.patch();
    let (b1, b2) = ((y.rows() - p1) / q1, (y.cols() - p2) / q2);
    let mut out = y.clone();
    let (h, v) = (cfg.h(), cfg.v());
    let rho = |a: f64, b: f64| match cfg.coupling() {
        Coupling::Isotropic => a.hypot(b),
        Coupling::Anisotropic => a.abs() + b.abs(),
    };
    for n1 in 0..b1 {
        for n2 in 0..b2 {
            let (r0, c0) = (q1 * n1 + p1, q2 * n2 + p2);
            let patch = Image::from_fn(q1, q2, |i, j| y.get(r0 + i, c0 + j));
            let build = |c: &[f64]| {
                Image::from_fn(q1, q2, |i, j| {
                    patch.get(i, j) + c[0] * h.get(i, j) + c[1] * v.get(i, j)
                })
            };
            let obj = |c: &[f64]| {
                let pi = build(c);
                let diff: f64 = pi
                    .as_slice()
                    .iter()
                    .zip(patch.as_slice())
                    .map(|(a, b)| 0.5 * (a - b) * (a - b))
                    .sum();
                fin(diff + gamma * cfg.mu() * rho(h.frobenius_dot(&pi), v.frobenius_dot(&pi)))
            };
            let c =
                minimize_convex(obj, &[0.0, 0.0], &[Interval::REAL_LINE; 2], DEFAULT_TOL).unwrap();
            let pi = build(&c);
            for i in 0..q1 {
                for j in 0..q2 {
                    out.set(r0 + i, c0 + j, pi.get(i, j));
                }
            }
        }
    }
    out
}

pub fn criterion_4() -> Outcome {
    let mut r = rng(404);
    let (mut err, mut complement, mut boundary_ok, mut sum_rel) = (0.0f64, 0.0f64, true, 0.0f64);
    let instances = 100;
    for inst in 0..instances {
        let coupling = if inst % 2 == 0 {
            Coupling::Isotropic
        } else {
            Coupling::Anisotropic
        };
        let (kind, size) = match inst % 8 {
            0..=3 => (GradientFilter::Roberts, 4),
            4 | 5 => (GradientFilter::Sobel, 6),
            6 => (GradientFilter::Prewitt, 6),
            _ => (GradientFilter::FiniteDifference, 6),
        };
        let cfg = TvConfig::from_filter(kind, coupling, r.random_range(0.1..1.0)).unwrap();
        let gamma = r.random_range(0.1..3.0);
        let y = Image::from_fn(size, size, |_, _| r.random_range(0.0..10.0));
        let (q1, q2) = cfg.patch();
        let (p1, p2) = (r.random_range(0..q1), r.random_range(0..q2));
        let out = prox_tv_block(&y, p1, p2, &cfg, gamma).unwrap();
        let brute = brute_tv_block(&y, p1, p2, &cfg, gamma);
        err = err.max(max_abs_diff(out.as_slice(), brute.as_slice()));

        let (b1, b2) = ((size - p1) / q1, (size - p2) / q2);
        let (h, v) = (cfg.h(), cfg.v());
        for n1 in 0..b1 {
            for n2 in 0..b2 {
                let (r0, c0) = (q1 * n1 + p1, q2 * n2 + p2);
                let yp = Image::from_fn(q1, q2, |i, j| y.get(r0 + i, c0 + j));
                let op = Image::from_fn(q1, q2, |i, j| out.get(r0 + i, c0 + j));
                let (hy, vy) = (h.frobenius_dot(&yp), v.frobenius_dot(&yp));
                let (beta, kappa) = match coupling {
                    Coupling::Isotropic => prox_l2_pair(hy, vy, gamma * cfg.mu()).unwrap(),
                    Coupling::Anisotropic => (
                        prox_power(hy, cfg.mu(), Exponent::One, gamma).unwrap(),
                        prox_power(vy, cfg.mu(), Exponent::One, gamma).unwrap(),
                    ),
                };
                let (ho, vo) = (h.frobenius_dot(&op), v.frobenius_dot(&op));
                complement = complement.max((ho - beta).abs()).max((vo - kappa).abs());
                for i in 0..q1 {
                    for j in 0..q2 {
                        let perp_y = yp.get(i, j) - hy * h.get(i, j) - vy * v.get(i, j);
                        let perp_o = op.get(i, j) - ho * h.get(i, j) - vo * v.get(i, j);
                        complement = complement.max((perp_y - perp_o).abs());
                    }
                }
            }
        }
        for rr in 0..size {
            for cc in 0..size {
                let inside = rr >= p1 && rr < p1 + q1 * b1 && cc >= p2 && cc < p2 + q2 * b2;
                if !inside && out.get(rr, cc).to_bits() != y.get(rr, cc).to_bits() {
                    boundary_ok = false;
                }
            }
        }
        let total = tv_value(&y, &cfg).unwrap();
        let parts: f64 = split_tv(&cfg, size, size)
            .unwrap()
            .iter()
            .map(|b: &TvBlock| b.tv(y.as_slice()))
            .sum();
        sum_rel = sum_rel.max((total - parts).abs() / total.max(1.0));
    }
    let pass = err <= 1e-5 && complement <= 1e-10 && boundary_ok && sum_rel <= 1e-13;
    Outcome::new(
        pass,
        format!(
            "{instances} instances, max |closed - brute| {err:.2e}, complement residual {complement:.1e}, boundary {}, block-sum relative gap {sum_rel:.1e}",
            if boundary_ok { "bit-identical" } else { "CHANGED" }
        ),
    )
}

// ---------------------------------------------------------------- 5

pub fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for &(rows, cols) in &[
        (8, 8),
        (16, 16),
        (32, 32),
        (64, 64),
        (128, 128),
        (8, 128),
        (24, 40),
    ] {
        let id = IdentityFrame::new(rows * cols);
        worst = worst.max(verify_tight(&id, 2, 5).max_residual());
        count += 1;
        for levels in 1..=3 {
            if let Ok(h) = HaarFrame::new(rows, cols, levels) {
                worst = worst.max(verify_tight(&h, 2, 5).max_residual());
                let u = HaarUnion2::new(rows, cols, levels).unwrap();
                worst = worst.max(verify_tight(&u, 2, 5).max_residual());
                count += 2;
            }
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("{count} frames up to 128x128, max residual {worst:.2e}"),
    )
}

// ---------------------------------------------------------------- 6

/// Functions of a small hybrid Poisson problem, grouped as the solvers expect.
pub struct HybridParts {
    pub n: usize,
    pub fidelity: Vec<FidelityPiece>,
    pub tv: Vec<TvBlock>,
    pub bounds: BoxIndicator,
    pub sparsity: SeparablePenalty,
    pub weights: Vec<f64>,
    pub init_image: Vec<f64>,
}

impl HybridParts {
    pub fn g(&self) -> Vec<&dyn ProxFunction> {
        let mut g: Vec<&dyn ProxFunction> = Vec::new();
        g.extend(self.fidelity.iter().map(|f| f as &dyn ProxFunction));
        g.extend(self.tv.iter().map(|f| f as &dyn ProxFunction));
        g.push(&self.bounds);
        g
    }

    pub fn f(&self) -> Vec<&dyn ProxFunction> {
        vec![&self.sparsity as &dyn ProxFunction]
    }
}

pub fn hybrid_parts(
    side: usize,
    frame_len: usize,
    seed: u64,
    mu: f64,
    vartheta: f64,
) -> HybridParts {
    let mut r = rng(seed);
    let alpha = 0.1;
    let truth = Image::from_fn(side, side, |i, j| {
        if (side / 4..3 * side / 4).contains(&i) && j >= side / 2 {
            200.0
        } else {
            40.0
        }
    });
    let op = Arc::new(ConvOperator::uniform_2d(3, side, side, Boundary::ZeroPad).unwrap());
    let blurred = op.apply(truth.as_slice()).unwrap();
    let z: Vec<f64> = blurred
        .iter()
        .map(|&v| poisson_small(&mut r, alpha * v))
        .collect();
    let part = op.partition();
    let fidelity = split_fidelity(&op, &part, &SeparablePenalty::kl(&z, alpha).unwrap()).unwrap();
    let tvcfg = TvConfig::from_filter(GradientFilter::Roberts, Coupling::Isotropic, mu).unwrap();
    let tv = split_tv(&tvcfg, side, side).unwrap();
    let i = fidelity.len() as f64;
    let pp = tv.len() as f64;
    let mut weights = vec![1.0 / (4.0 * i); fidelity.len()];
    weights.extend(std::iter::repeat_n(1.0 / (4.0 * pp), tv.len()));
    weights.push(0.25);
    weights.push(0.25);
    let scaled: Vec<f64> = z.iter().map(|v| (v / alpha).clamp(0.0, 255.0)).collect();
    HybridParts {
        n: side * side,
        init_image: op.observation_to_grid(&scaled).unwrap(),
        fidelity,
        tv,
        bounds: BoxIndicator::new(side * side, 0.0, 255.0).unwrap(),
        sparsity: SeparablePenalty::uniform(frame_len, ScalarFn::abs(vartheta)).unwrap(),
        weights,
    }
}

pub fn criterion_6() -> Outcome {
    let frame = HaarFrame::new(8, 8, 2).unwrap();
    let parts = hybrid_parts(8, 64, 606, 0.05, 0.1);
    let (g, f) = (parts.g(), parts.f());
    let s = g.len();
    let x0 = frame.analyze_vec(&parts.init_image).unwrap();
    let params = PpxaParams::new(parts.weights.clone());
    let mut alg2 = FrameSolver::new(&g, &f, &frame, params.clone(), &x0).unwrap();
    let mut alg3 = AcceleratedSolver::new(&g, &f, &frame, params, &x0).unwrap();
    let iters = 50;
    let mut gap = 0.0f64;
    let mut counts_ok = true;
    for l in 1..=iters {
        alg2.step().unwrap();
        alg3.step().unwrap();
        gap = gap.max(max_abs_diff(alg2.x(), alg3.x()));
        counts_ok &= alg2.frame_ops() == 2 * s * l && alg3.frame_ops() == 3 * l;
    }
    let pass = gap <= 1e-8 && counts_ok;
    Outcome::new(
        pass,
        format!(
            "S={s}, {iters} iterations, max |x3 - x2|_inf {gap:.2e}, frame ops {} vs {} (ratio 2S/3 = {:.2})",
            alg3.frame_ops(),
            alg2.frame_ops(),
            2.0 * s as f64 / 3.0
        ),
    )
}

// ---------------------------------------------------------------- 7

pub fn criterion_7() -> Outcome {
    let params = |j| PpxaParams {
        tol: 0.0,
        max_iter: 5000,
        ..PpxaParams::uniform(j)
    };
    let quad = |c: f64| {
        SeparablePenalty::uniform(
            1,
            ScalarFn::Quadratic {
                center: c,
                weight: 1.0,
            },
        )
        .unwrap()
    };
    let abs = SeparablePenalty::uniform(1, ScalarFn::abs(1.0)).unwrap();
    let bx = BoxIndicator::new(1, 0.0, 1.0).unwrap();
    let (q0, q4, q3, q2) = (quad(0.0), quad(4.0), quad(3.0), quad(2.0));
    let e1 = (ppxa_solve(&[&q0, &q4], &params(2), &[0.0]).unwrap().x[0] - 2.0).abs();
    let e2 = (ppxa_solve(&[&abs, &q3], &params(2), &[0.0]).unwrap().x[0] - 2.0).abs();
    let e3 = (ppxa_solve(&[&bx, &q2, &abs], &params(3), &[0.0]).unwrap().x[0] - 1.0).abs();

    // min 1/2 |F^T x - c|^2 + chi |x|_1 with orthonormal F has x* = soft(F c, chi)
    let frame = HaarFrame::new(16, 16, 3).unwrap();
    let mut r = rng(707);
    let c: Vec<f64> = (0..256).map(|_| r.random_range(-5.0..5.0)).collect();
    let chi = 0.7;
    let g = SeparablePenalty::new(
        c.iter()
            .map(|&ci| ScalarFn::Quadratic {
                center: ci,
                weight: 1.0,
            })
            .collect(),
    )
    .unwrap();
    let f = SeparablePenalty::uniform(256, ScalarFn::abs(chi)).unwrap();
    let fc = frame.analyze_vec(&c).unwrap();
    let xstar: Vec<f64> = fc
        .iter()
        .map(|&v| v.signum() * (v.abs() - chi).max(0.0))
        .collect();
    let p = PpxaParams {
        tol: 0.0,
        max_iter: 5000,
        ..PpxaParams::new(vec![0.5, 0.5])
    };
    let (gs, fs): (Vec<&dyn ProxFunction>, Vec<&dyn ProxFunction>) = (vec![&g], vec![&f]);
    let mut st = AcceleratedSolver::new(&gs, &fs, &frame, p, &vec![0.0; 256]).unwrap();
    let mut used = 5000;
    for l in 1..=5000 {
        st.step().unwrap();
        let d: f64 = st
            .x()
            .iter()
            .zip(&xstar)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d <= 1e-6 {
            used = l;
            break;
        }
    }
    let e4: f64 = st
        .x()
        .iter()
        .zip(&xstar)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let pass = e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-6 && e4 <= 1e-6;
    Outcome::new(
        pass,
        format!("scalar examples err {e1:.1e}/{e2:.1e}/{e3:.1e}; frame problem |x - x*| {e4:.1e} after {used} iterations (gamma 50, lambda 1.6)"),
    )
}

// ---------------------------------------------------------------- 9 (partition part)

pub fn decimated_partition_count() -> (usize, bool) {
    let op = ConvOperator::uniform_2d(3, 64, 64, Boundary::Decimated(2)).unwrap();
    let part = op.partition();
    let rep = verify_orthogonality(&op, &part);
    (part.count(), rep.holds())
}

pub fn print_line(index: usize, name: &str, o: &Outcome) {
    println!(
        "criterion {index:>2} [{}] {name}: {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    );
}
