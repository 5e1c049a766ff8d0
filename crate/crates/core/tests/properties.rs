use std::sync::Arc;

use ppxa_core::conv::{split_fidelity, Boundary, ConvOperator};
use ppxa_core::frame::{HaarFrame, HaarUnion2, TightFrame};
use ppxa_core::prox::{
    prox_l2_pair, prox_power, BoxIndicator, Exponent, ScalarFn, SeparablePenalty,
};
use ppxa_core::tv::{split_tv, tv_value, Coupling, GradientFilter, TvConfig};
use ppxa_core::{ExtReal, Image, ProxFunction};
use proptest::prelude::*;

fn firm(px: &[f64], py: &[f64], x: &[f64], y: &[f64]) -> bool {
    let dp: f64 = px.iter().zip(py).map(|(a, b)| (a - b) * (a - b)).sum();
    let ip: f64 = px
        .iter()
        .zip(py)
        .zip(x.iter().zip(y))
        .map(|((a, b), (c, d))| (a - b) * (c - d))
        .sum();
    let scale = 1.0 + x.iter().chain(y).fold(0.0f64, |m, v| m.max(v.abs()));
    dp <= ip + 1e-9 * scale * scale
}

fn scalar_fn() -> impl Strategy<Value = ScalarFn> {
    prop_oneof![
        Just(ScalarFn::Zero),
        (0.01..5.0f64, 0..5usize).prop_map(|(chi, k)| ScalarFn::Power {
            chi,
            p: Exponent::ALL[k]
        }),
        (-5.0..5.0f64, 0.1..3.0f64)
            .prop_map(|(center, weight)| ScalarFn::Quadratic { center, weight }),
        (0.0..3.0f64, 0.1..3.0f64).prop_map(|(alpha, chi)| ScalarFn::Gamma { alpha, chi }),
        (0..30u32, 0.05..2.0f64).prop_map(|(z, alpha)| ScalarFn::Kl { z: z as f64, alpha }),
        (-3.0..0.0f64, 0.0..3.0f64).prop_map(|(lo, w)| ScalarFn::Box { lo, hi: lo + w }),
    ]
}

fn mode() -> impl Strategy<Value = Boundary> {
    prop_oneof![
        Just(Boundary::Valid),
        Just(Boundary::ZeroPad),
        Just(Boundary::Periodic),
        (1..4usize).prop_map(Boundary::Decimated),
    ]
}

proptest! {
    #[test]
    fn scalar_prox_is_firmly_nonexpansive(f in scalar_fn(), x in -50.0..50.0f64, y in -50.0..50.0f64, g in 0.01..10.0f64) {
        let (px, py) = (f.prox(x, g), f.prox(y, g));
        prop_assert!(firm(&[px], &[py], &[x], &[y]), "{f:?}: {x} -> {px}, {y} -> {py}");
    }

    #[test]
    fn scalar_prox_lands_in_domain(f in scalar_fn(), x in -50.0..50.0f64, g in 0.01..10.0f64) {
        prop_assert!(f.value(f.prox(x, g)).is_finite());
    }

    #[test]
    fn power_prox_is_odd(eta in -30.0..30.0f64, chi in 0.01..5.0f64, k in 0..5usize, g in 0.1..4.0f64) {
        let p = Exponent::ALL[k];
        prop_assert_eq!(prox_power(-eta, chi, p, g).unwrap(), -prox_power(eta, chi, p, g).unwrap());
    }

    #[test]
    fn l2_pair_is_firmly_nonexpansive(a in prop::array::uniform4(-20.0..20.0f64), mu in 0.0..10.0f64) {
        let p = prox_l2_pair(a[0], a[1], mu).unwrap();
        let q = prox_l2_pair(a[2], a[3], mu).unwrap();
        prop_assert!(firm(&[p.0, p.1], &[q.0, q.1], &a[..2], &a[2..]));
    }

    #[test]
    fn adjoint_identity_1d(taps in prop::collection::vec(0.0..2.0f64, 1..6), n in 12..40usize, m in mode(), seed in any::<u64>()) {
        prop_assume!(taps.iter().any(|&t| t > 0.0));
        let n = match m { Boundary::Decimated(d) => n - n % d, _ => n };
        let op = ConvOperator::new_1d(&taps, n, m).unwrap();
        let y: Vec<f64> = (0..op.input_len()).map(|i| ((seed >> (i % 60)) as f64 % 7.0) - 3.0 + i as f64 * 0.01).collect();
        let z: Vec<f64> = (0..op.output_len()).map(|i| ((seed.rotate_left(i as u32) % 11) as f64) - 5.0).collect();
        let ty = op.apply(&y).unwrap();
        let tz = op.apply_adjoint(&z).unwrap();
        let lhs: f64 = ty.iter().zip(&z).map(|(a, b)| a * b).sum();
        let rhs: f64 = y.iter().zip(&tz).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn adjoint_identity_2d(q1 in 1..4usize, q2 in 1..4usize, m in mode(), vals in prop::collection::vec(-1.0..1.0f64, 400)) {
        let k = Image::from_fn(q1, q2, |i, j| 0.1 + (i * 3 + j) as f64);
        let op = ConvOperator::new_2d(&k, 12, 12, m).unwrap();
        let y = &vals[..144];
        let z = &vals[144..144 + op.output_len()];
        let lhs: f64 = op.apply(y).unwrap().iter().zip(z).map(|(a, b)| a * b).sum();
        let rhs: f64 = op.apply_adjoint(z).unwrap().iter().zip(y).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn fidelity_split_sums_to_whole(taps in prop::collection::vec(0.05..2.0f64, 1..5), m in mode(), y in prop::collection::vec(0.0..5.0f64, 24), chi in 0.1..2.0f64) {
        let op = Arc::new(ConvOperator::new_1d(&taps, 24, m).unwrap());
        let pen = SeparablePenalty::uniform(op.output_len(), ScalarFn::Power { chi, p: Exponent::ThreeHalves }).unwrap();
        let pieces = split_fidelity(&op, &op.partition(), &pen).unwrap();
        let split: f64 = pieces.iter().map(|p| p.value(&y).to_f64()).sum();
        let whole = pen.value(&op.apply(&y).unwrap()).to_f64();
        prop_assert!((split - whole).abs() <= 1e-10 * (1.0 + whole));
    }

    #[test]
    fn fidelity_prox_is_firmly_nonexpansive(taps in prop::collection::vec(0.05..2.0f64, 1..5), m in mode(), xy in prop::collection::vec(-5.0..5.0f64, 48), g in 0.1..5.0f64) {
        let op = Arc::new(ConvOperator::new_1d(&taps, 24, m).unwrap());
        let pen = SeparablePenalty::uniform(op.output_len(), ScalarFn::abs(1.0)).unwrap();
        let pieces = split_fidelity(&op, &op.partition(), &pen).unwrap();
        let (x, y) = xy.split_at(24);
        let (mut px, mut py) = (vec![0.0; 24], vec![0.0; 24]);
        for p in &pieces {
            p.prox(x, g, &mut px);
            p.prox(y, g, &mut py);
            prop_assert!(firm(&px, &py, x, y));
        }
    }

    #[test]
    fn tv_prox_is_firmly_nonexpansive(k in 0..4usize, iso in any::<bool>(), xy in prop::collection::vec(0.0..50.0f64, 98), g in 0.1..5.0f64) {
        let coupling = if iso { Coupling::Isotropic } else { Coupling::Anisotropic };
        let cfg = TvConfig::from_filter(GradientFilter::ALL[k], coupling, 1.0).unwrap();
        let (x, y) = xy.split_at(49);
        let (mut px, mut py) = (vec![0.0; 49], vec![0.0; 49]);
        for b in split_tv(&cfg, 7, 7).unwrap() {
            b.prox(x, g, &mut px);
            b.prox(y, g, &mut py);
            prop_assert!(firm(&px, &py, x, y));
        }
    }

    #[test]
    fn tv_is_shift_invariant_and_splits(k in 0..4usize, iso in any::<bool>(), vals in prop::collection::vec(-10.0..10.0f64, 63), c in -100.0..100.0f64) {
        let coupling = if iso { Coupling::Isotropic } else { Coupling::Anisotropic };
        let cfg = TvConfig::from_filter(GradientFilter::ALL[k], coupling, 1.0).unwrap();
        let y = Image::from_vec(7, 9, vals).unwrap();
        let t = tv_value(&y, &cfg).unwrap();
        let shifted = tv_value(&y.map(|v| v + c), &cfg).unwrap();
        prop_assert!((t - shifted).abs() <= 1e-9 * (1.0 + t));
        let parts: f64 = split_tv(&cfg, 7, 9).unwrap().iter().map(|b| b.tv(y.as_slice())).sum();
        prop_assert!((t - parts).abs() <= 1e-12 * (1.0 + t));
    }

    #[test]
    fn frames_preserve_energy(levels in 1..4usize, vals in prop::collection::vec(-1.0..1.0f64, 256)) {
        let h = HaarFrame::new(16, 16, levels).unwrap();
        let u = HaarUnion2::new(16, 16, levels).unwrap();
        let e: f64 = vals.iter().map(|v| v * v).sum();
        for f in [&h as &dyn TightFrame, &u] {
            let x = f.analyze_vec(&vals).unwrap();
            let ex: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!((ex - f.nu() * e).abs() <= 1e-10 * (1.0 + e));
            let back = f.synthesize_vec(&x).unwrap();
            for (a, b) in back.iter().zip(&vals) {
                prop_assert!((a - f.nu() * b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn box_projection_is_idempotent(x in prop::collection::vec(-10.0..10.0f64, 1..20), lo in -5.0..0.0f64, w in 0.0..5.0f64) {
        let b = BoxIndicator::new(x.len(), lo, lo + w).unwrap();
        let mut p = vec![0.0; x.len()];
        b.prox(&x, 1.0, &mut p);
        let mut pp = vec![0.0; x.len()];
        b.prox(&p, 1.0, &mut pp);
        prop_assert_eq!(&p, &pp);
        prop_assert_eq!(b.value(&p), ExtReal::ZERO);
    }
}
