use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recur_core::algebra::{c64, product, telescoping_expansion};
use recur_core::compactness::{
    greedy_eps_net, max_separated, orbit_sample, Metric, PointCloud, SeparationMode,
};
use recur_core::recurrence::{
    correlation, correlation_bound, furstenberg_average, max_deviation, recurrence_set,
    szemeredi_average,
};
use recur_core::sample::{random_element, random_positive_contraction, random_unitary};
use recur_core::semigroup::Side;
use recur_core::{
    AlgebraElement, BlockShape, DynamicalSystem, Element, MeasureSemigroup, RecurrenceQuery,
    TraceState,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shape_strategy() -> impl Strategy<Value = BlockShape> {
    prop::collection::vec(1usize..=4, 1..=3).prop_map(|d| BlockShape::new(d).unwrap())
}

fn state(shape: &BlockShape, r: &mut ChaCha8Rng) -> TraceState {
    let raw: Vec<f64> = shape
        .dims()
        .iter()
        .map(|_| r.random_range(0.1..1.0))
        .collect();
    let total: f64 = raw
        .iter()
        .zip(shape.dims())
        .map(|(w, &d)| w * d as f64)
        .sum();
    TraceState::new(shape.clone(), raw.iter().map(|w| w / total).collect()).unwrap()
}

fn builtins() -> Vec<DynamicalSystem> {
    let nat = MeasureSemigroup::naturals();
    vec![
        DynamicalSystem::rotation(1, 3, nat).unwrap(),
        DynamicalSystem::rotation(2, 5, MeasureSemigroup::integers()).unwrap(),
        DynamicalSystem::rotation(1, 4, MeasureSemigroup::cyclic(8).unwrap()).unwrap(),
        DynamicalSystem::classical(vec![1, 2, 3, 4, 0], vec![0.2; 5], nat).unwrap(),
        DynamicalSystem::classical(
            vec![1, 0, 3, 4, 2],
            vec![0.25, 0.25, 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0],
            MeasureSemigroup::cyclic(6).unwrap(),
        )
        .unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_schwarz(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let omega = state(&shape, &mut r);
        let a = random_element(&shape, &mut r);
        let b = random_element(&shape, &mut r);
        let lhs = omega.eval(&(&a.adjoint() * &b)).unwrap().norm();
        let rhs = omega.seminorm(&a).unwrap() * omega.seminorm(&b).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn seminorm_dominated_by_norm(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let omega = state(&shape, &mut r);
        let a = random_element(&shape, &mut r);
        prop_assert!(omega.seminorm(&a).unwrap() <= a.op_norm() + 1e-10);
    }

    #[test]
    fn telescoping_identity(k in 0usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = BlockShape::full(3).unwrap();
        let a: Vec<_> = (0..=k).map(|_| random_element(&shape, &mut r)).collect();
        let b: Vec<_> = (0..=k).map(|_| random_element(&shape, &mut r)).collect();
        let lhs = &product(&a).unwrap() - &product(&b).unwrap();
        let rhs = telescoping_expansion(&a, &b).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn c_star_identity(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_element(&shape, &mut r);
        let n = a.op_norm();
        let lhs = (&a.adjoint() * &a).op_norm();
        prop_assert!((lhs - n * n).abs() <= 1e-9 * (n * n).max(1.0));
    }

    #[test]
    fn norm_submultiplicative(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_element(&shape, &mut r);
        let b = random_element(&shape, &mut r);
        prop_assert!((&a * &b).op_norm() <= a.op_norm() * b.op_norm() + 1e-10);
    }

    #[test]
    fn trace_inequality_on_unitaries(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = BlockShape::full(3).unwrap();
        let omega = TraceState::normalized(shape.clone());
        let a = random_unitary(&shape, &mut r);
        let b = random_element(&shape, &mut r);
        let c = random_unitary(&shape, &mut r);
        let direct = omega.eval(&product(&[a.clone(), b.clone(), c.clone()]).unwrap()).unwrap().norm();
        prop_assert!(direct <= omega.seminorm(&b).unwrap() + 1e-10);
        prop_assert!(recur_core::algebra::verify_trace_inequality(&omega, &a, &b, &c, 1e-10).unwrap());
    }

    #[test]
    fn pseudometric_triangle(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let omega = state(&shape, &mut r);
        let x = random_element(&shape, &mut r);
        let y = random_element(&shape, &mut r);
        let z = random_element(&shape, &mut r);
        let d = |p: &AlgebraElement, q: &AlgebraElement| omega.distance(p, q).unwrap();
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-9);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
    }

    #[test]
    fn semigroup_laws(kind in 0usize..4, seed in any::<u64>()) {
        let s = match kind {
            0 => MeasureSemigroup::naturals(),
            1 => MeasureSemigroup::integers(),
            2 => MeasureSemigroup::lattice(3).unwrap(),
            _ => MeasureSemigroup::cyclic(7).unwrap(),
        };
        let mut r = rng(seed);
        let g = s.sample(&mut r, 30);
        let h = s.sample(&mut r, 30);
        let k = s.sample(&mut r, 30);
        let gh_k = s.op(&s.op(&g, &h).unwrap(), &k).unwrap();
        let g_hk = s.op(&g, &s.op(&h, &k).unwrap()).unwrap();
        prop_assert_eq!(gh_k, g_hk);
        // right cancellation: g k = h k implies g = h
        prop_assert_eq!(s.op(&g, &k).unwrap() == s.op(&h, &k).unwrap(), g == h);
        // counting measure is right invariant
        let w = s.folner_window(4).unwrap();
        prop_assert_eq!(s.translate(&w, &k, Side::Right).unwrap().measure(), w.measure());
    }

    #[test]
    fn action_composes(which in 0usize..5, seed in any::<u64>()) {
        let sys = &builtins()[which];
        let mut r = rng(seed);
        let g = sys.semigroup().sample(&mut r, 20);
        let h = sys.semigroup().sample(&mut r, 20);
        let a = random_element(sys.shape(), &mut r);
        let lhs = sys.apply(&g, &sys.apply(&h, &a).unwrap()).unwrap();
        let rhs = sys.apply(&sys.semigroup().op(&g, &h).unwrap(), &a).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn separation_invariant_under_action(which in 0usize..5, seed in any::<u64>()) {
        let sys = &builtins()[which];
        let mut r = rng(seed);
        let a = random_element(sys.shape(), &mut r);
        let window = sys.semigroup().folner_window(3).unwrap();
        let cloud = orbit_sample(sys, &a, &window).unwrap();
        let g = sys.semigroup().sample(&mut r, 20);
        for i in 0..cloud.len() {
            for j in 0..i {
                let x = &cloud.points()[i];
                let y = &cloud.points()[j];
                let moved = sys.trace()
                    .distance(&sys.apply(&g, x).unwrap(), &sys.apply(&g, y).unwrap())
                    .unwrap();
                prop_assert!((moved - cloud.distance(i, j)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn greedy_net_is_separated_covering_and_below_exact(
        n in 1usize..14,
        eps in 0.05f64..1.5,
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let shape = BlockShape::diagonal(2).unwrap();
        let omega = TraceState::normalized(shape.clone());
        let points: Vec<_> = (0..n).map(|_| random_element(&shape, &mut r)).collect();
        let labels = (1..=n as i64).map(Element::scalar).collect();
        let cloud = PointCloud::new(points, labels, omega, Metric::Gns).unwrap();
        let net = greedy_eps_net(&cloud, eps).unwrap();
        prop_assert!(net.is_separated(&cloud));
        prop_assert!(net.covers(&cloud));
        let exact = max_separated(&cloud, eps, SeparationMode::Exact).unwrap();
        prop_assert!(net.len() <= exact.len());
    }

    #[test]
    fn telescoping_bound_for_powers(which in 0usize..5, m in 1u64..=10, seed in any::<u64>()) {
        let sys = &builtins()[which];
        let mut r = rng(seed);
        let g = sys.semigroup().sample(&mut r, 20);
        let a = random_element(sys.shape(), &mut r);
        let omega = sys.trace();
        let lhs = omega.distance(&sys.apply_power(&g, m, &a).unwrap(), &a).unwrap();
        let step = omega.distance(&sys.apply(&g, &a).unwrap(), &a).unwrap();
        prop_assert!(lhs <= m as f64 * step + 1e-8);
    }

    #[test]
    fn cyclic_traciality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sys = DynamicalSystem::rotation(1, 5, MeasureSemigroup::naturals()).unwrap();
        let omega = sys.trace();
        let a = random_element(sys.shape(), &mut r);
        let c: Vec<_> = (0..3).map(|j| sys.apply_power(&Element::scalar(2), j, &a).unwrap()).collect();
        let x = omega.eval(&product(&[c[0].clone(), c[1].clone(), c[2].clone()]).unwrap()).unwrap();
        let y = omega.eval(&product(&[c[2].clone(), c[0].clone(), c[1].clone()]).unwrap()).unwrap();
        prop_assert!((x.norm() - y.norm()).abs() <= 1e-12);
    }
}

#[test]
fn folner_ratio_matches_brute_force() {
    let s = MeasureSemigroup::naturals();
    for n in [1usize, 2, 7, 30] {
        let w = s.folner_window(n).unwrap();
        let base: BTreeSet<i64> = (1..=n as i64).collect();
        for g in 1..=2 * n as i64 {
            let shifted: BTreeSet<i64> = base.iter().map(|x| x + g).collect();
            let sym = base.symmetric_difference(&shifted).count();
            let ratio = s.folner_ratio(&w, &Element::scalar(g)).unwrap();
            assert_eq!(ratio, num_rational::Ratio::new(sym, n));
        }
    }
}

#[test]
fn folner_ratio_vanishes_for_every_kind() {
    let cases = [
        (MeasureSemigroup::naturals(), Element::scalar(2)),
        (MeasureSemigroup::integers(), Element::scalar(-2)),
        (
            MeasureSemigroup::lattice(2).unwrap(),
            Element::tuple(&[2, -1]).unwrap(),
        ),
        (MeasureSemigroup::cyclic(9).unwrap(), Element::scalar(4)),
    ];
    for (s, g) in cases {
        let w = s.folner_window(1000).unwrap();
        let ratio = s.folner_ratio(&w, &g).unwrap();
        assert!(
            (*ratio.numer() as f64 / *ratio.denom() as f64) < 0.01,
            "{:?}",
            s.kind()
        );
    }
}

#[test]
fn lower_density_is_monotone() {
    let s = MeasureSemigroup::naturals();
    let windows: Vec<_> = (1..=100).map(|n| s.folner_window(n).unwrap()).collect();
    let evens = |g: &Element| g.as_scalar().unwrap() % 2 == 0;
    let out = s.lower_density(&windows, &evens).unwrap();
    assert!(out.windows(2).all(|p| p[0] <= p[1]));
    assert!((out[99] - 0.5).abs() < 0.01);
    let threes = |g: &Element| g.as_scalar().unwrap() % 3 == 0;
    let out = s.lower_density(&windows[..99], &threes).unwrap();
    assert!(out[98] >= 1.0 / 3.0 - 0.01);
}

#[test]
fn recurrence_transfer_from_single_step() {
    let mut r = rng(11);
    for sys in builtins() {
        let a = random_element(sys.shape(), &mut r);
        let exps = vec![0, 1, 3, 4];
        let eps = 0.3;
        let window = sys.semigroup().folner_window(40).unwrap();
        let set = recurrence_set(
            &sys,
            &RecurrenceQuery::new(a.clone(), exps, eps, window).unwrap(),
        )
        .unwrap();
        let members = set.members();
        for row in &set.rows {
            let step = sys
                .trace()
                .distance(&sys.apply(&row.g, &a).unwrap(), &a)
                .unwrap();
            if step < eps / 4.0 {
                assert!(members.contains(&row.g));
            }
        }
    }
}

#[test]
fn classical_seminorm_is_measure() {
    let sys = DynamicalSystem::classical(
        vec![1, 0, 3, 4, 2],
        vec![0.25, 0.25, 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0],
        MeasureSemigroup::naturals(),
    )
    .unwrap();
    let v = BTreeSet::from([0, 3]);
    let chi = sys.characteristic(&v).unwrap();
    let s = sys.trace().seminorm(&chi).unwrap();
    assert!((s * s - (0.25 + 0.5 / 3.0)).abs() < 1e-15);
}

#[test]
fn szemeredi_equals_furstenberg_on_classical_systems() {
    let maps: [(Vec<usize>, Vec<f64>); 3] = [
        (vec![1, 2, 3, 0], vec![0.25; 4]),
        (vec![1, 2, 3, 4, 5, 0], vec![1.0 / 6.0; 6]),
        (
            vec![1, 0, 3, 4, 2],
            vec![0.25, 0.25, 0.5 / 3.0, 0.5 / 3.0, 0.5 / 3.0],
        ),
    ];
    let mut r = rng(3);
    for (perm, weights) in maps {
        let n = perm.len();
        let sys = DynamicalSystem::classical(perm, weights, MeasureSemigroup::naturals()).unwrap();
        for _ in 0..5 {
            let v: BTreeSet<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
            if v.is_empty() {
                continue;
            }
            let chi = sys.characteristic(&v).unwrap();
            for k in 1..=3 {
                let exps: Vec<u64> = (0..=k as u64).collect();
                let t = szemeredi_average(&sys, &chi, &exps, &[12]).unwrap();
                let f = furstenberg_average(&sys, &v, k, 12).unwrap();
                assert!((t.rows[0].average - f).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn correlation_bound_contains_recurrence_set() {
    let nat = MeasureSemigroup::naturals();
    for q in [3usize, 4, 5, 7] {
        let sys = DynamicalSystem::rotation(1, q, nat).unwrap();
        let v = sys.element("V").unwrap();
        let id = AlgebraElement::identity(sys.shape());
        let a = &id.scale(c64(0.5, 0.0)) + &(v + &v.adjoint()).scale(c64(0.25, 0.0));
        let exps = [0u64, 1, 2];
        let bound = correlation_bound(sys.trace(), &a, exps.len(), None, 1e-9).unwrap();
        let b = a.scale(c64(1.0 / bound.norm, 0.0));
        let window = nat.folner_window(200).unwrap();
        let query = RecurrenceQuery::new(b, exps.to_vec(), bound.epsilon, window).unwrap();
        let e = recurrence_set(&sys, &query).unwrap().members();
        assert!(!e.is_empty());
        for g in &e {
            assert!(
                correlation(&sys, &a, &exps, g).unwrap().norm() > bound.a,
                "q = {q}, g = {g}"
            );
        }
    }
}

#[test]
fn noncommuting_factor_order_matters() {
    let sys = DynamicalSystem::rotation(1, 4, MeasureSemigroup::naturals()).unwrap();
    let a = random_element(sys.shape(), &mut rng(21));
    let omega = sys.trace();
    let g = Element::scalar(1);
    let c: Vec<_> = (0..3)
        .map(|j| sys.apply_power(&g, j, &a).unwrap())
        .collect();
    let forward = correlation(&sys, &a, &[0, 1, 2], &g).unwrap();
    let swapped = omega
        .eval(&product(&[c[1].clone(), c[0].clone(), c[2].clone()]).unwrap())
        .unwrap();
    assert!((forward - swapped).norm() > 1e-3);
}

#[test]
fn deviation_with_zero_exponent_is_zero() {
    let mut r = rng(5);
    for sys in builtins() {
        let a = random_element(sys.shape(), &mut r);
        let d = max_deviation(&sys, &a, &[0], &sys.semigroup().sample(&mut r, 9)).unwrap();
        assert_eq!(d, 0.0);
    }
}

#[test]
fn positive_contractions_sample_positive_trace() {
    let mut r = rng(1);
    let shape = BlockShape::full(4).unwrap();
    let omega = TraceState::normalized(shape.clone());
    for _ in 0..10 {
        let b = random_positive_contraction(&shape, &mut r);
        assert!(omega.eval(&b).unwrap().re >= 0.0);
    }
}
