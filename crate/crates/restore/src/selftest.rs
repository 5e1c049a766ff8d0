//! Quick oracle checks run by `ppxa-restore selftest`.

use ppxa_core::conv::{verify_orthogonality, Boundary, ConvOperator};
use ppxa_core::frame::{verify_tight, HaarFrame, HaarUnion2, IdentityFrame, TightFrame};
use ppxa_core::oracle::{brute_force_prox, brute_force_prox_scalar, DEFAULT_TOL};
use ppxa_core::ppxa::{ppxa_solve, PpxaParams};
use ppxa_core::prox::{
    kl_coord_value, project_box, prox_gamma, prox_kl_coord, prox_l2_pair, prox_power, Exponent,
    Interval, ScalarFn, SeparablePenalty,
};
use ppxa_core::ExtReal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, err: f64, tol: f64) -> Check {
    Check {
        name,
        pass: err <= tol,
        detail: format!("max error {err:.2e} (tol {tol:.0e})"),
    }
}

fn scaled(gamma: f64, v: ExtReal) -> ExtReal {
    match v {
        ExtReal::Finite(x) => ExtReal::Finite(gamma * x),
        inf => inf,
    }
}

fn scalar_proxes(samples: usize) -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut err = 0.0f64;
    for _ in 0..samples {
        let (eta, gamma) = (r.random_range(-20.0..20.0), r.random_range(0.05..5.0));
        let (alpha, chi) = (r.random_range(0.0..5.0), r.random_range(0.01..5.0));
        let phi = |v: f64| {
            if v > 0.0 {
                ExtReal::Finite(gamma * (alpha * v - chi * v.ln()))
            } else {
                ExtReal::PosInf
            }
        };
        let b = brute_force_prox_scalar(eta, phi, Interval::NON_NEGATIVE, DEFAULT_TOL)
            .unwrap_or(f64::NAN);
        err = err.max((prox_gamma(eta, alpha, chi, gamma).unwrap_or(f64::NAN) - b).abs());
        for p in Exponent::ALL {
            let phi = |v: f64| ExtReal::Finite(gamma * chi * v.abs().powf(p.value()));
            let b = brute_force_prox_scalar(eta, phi, Interval::REAL_LINE, DEFAULT_TOL)
                .unwrap_or(f64::NAN);
            err = err.max((prox_power(eta, chi, p, gamma).unwrap_or(f64::NAN) - b).abs());
        }
        let z = r.random_range(0..=40) as f64;
        let phi = |v: f64| scaled(gamma, kl_coord_value(z, v, alpha.max(0.05)));
        let b = brute_force_prox_scalar(eta, phi, Interval::NON_NEGATIVE, DEFAULT_TOL)
            .unwrap_or(f64::NAN);
        err = err.max((prox_kl_coord(eta, z, alpha.max(0.05), gamma) - b).abs());
        let (lo, hi) = (-chi, alpha);
        let phi = |v: f64| {
            if (lo..=hi).contains(&v) {
                ExtReal::ZERO
            } else {
                ExtReal::PosInf
            }
        };
        let b = brute_force_prox_scalar(eta, phi, Interval::new(lo, hi), DEFAULT_TOL)
            .unwrap_or(f64::NAN);
        err = err.max(
            (project_box(&[eta], lo, hi)
                .map(|v| v[0])
                .unwrap_or(f64::NAN)
                - b)
                .abs(),
        );
        let (a, c) = (r.random_range(-10.0..10.0), r.random_range(-10.0..10.0));
        let (c0, c1) = prox_l2_pair(a, c, chi).unwrap_or((f64::NAN, f64::NAN));
        let phi = |v: &[f64]| ExtReal::Finite(chi * v[0].hypot(v[1]));
        let b = brute_force_prox(&[a, c], phi, &[Interval::REAL_LINE; 2], DEFAULT_TOL)
            .unwrap_or(vec![f64::NAN; 2]);
        err = err.max((c0 - b[0]).abs()).max((c1 - b[1]).abs());
    }
    check(
        "closed-form prox vs brute force",
        if err.is_nan() { f64::INFINITY } else { err },
        1e-6,
    )
}

fn partitions() -> Check {
    let mut worst = 0.0f64;
    let mut ok = true;
    for n in [8usize, 9, 12] {
        for q in 1..=4 {
            for mode in [
                Boundary::Valid,
                Boundary::ZeroPad,
                Boundary::Periodic,
                Boundary::Decimated(2),
            ] {
                let Ok(op) = ConvOperator::uniform_2d(q, n, n, mode) else {
                    continue;
                };
                let rep = verify_orthogonality(&op, &op.partition());
                ok &= rep.holds();
                worst = worst.max(rep.max_off_diagonal).max(rep.max_delta_error);
            }
        }
    }
    Check {
        name: "orthogonal row partitions",
        pass: ok && worst <= 1e-12,
        detail: format!("worst residual {worst:.2e}"),
    }
}

fn frames() -> Check {
    let frames: Vec<Box<dyn TightFrame>> = vec![
        Box::new(IdentityFrame::new(64)),
        Box::new(HaarFrame::new(32, 32, 3).unwrap()),
        Box::new(HaarUnion2::new(16, 32, 2).unwrap()),
    ];
    let err = frames
        .iter()
        .map(|f| verify_tight(f.as_ref(), 3, 7).max_residual())
        .fold(0.0, f64::max);
    check("tight frames", err, 1e-10)
}

fn solver() -> Check {
    // argmin |x| + (x - 3)^2 / 2 is 2
    let abs = SeparablePenalty::uniform(1, ScalarFn::abs(1.0)).unwrap();
    let quad = SeparablePenalty::uniform(
        1,
        ScalarFn::Quadratic {
            center: 3.0,
            weight: 1.0,
        },
    )
    .unwrap();
    let params = PpxaParams {
        tol: 0.0,
        max_iter: 2000,
        ..PpxaParams::uniform(2)
    };
    let err = ppxa_solve(&[&abs, &quad], &params, &[0.0])
        .map(|s| (s.x[0] - 2.0).abs())
        .unwrap_or(f64::INFINITY);
    check(
        "parallel proximal algorithm on a known minimizer",
        err,
        1e-6,
    )
}

/// Runs every check; `samples` random draws for the prox comparisons.
pub fn run(samples: usize) -> Vec<Check> {
    vec![scalar_proxes(samples), partitions(), frames(), solver()]
}
