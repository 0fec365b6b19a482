//! One PASS/FAIL line per acceptance criterion, with the measured runtime
//! against its budget. Exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recur_core::algebra::{c64, product};
use recur_core::compactness::{
    combine_nets, compactness_certificate, greedy_eps_net, orbit_sample_with, Metric,
};
use recur_core::dynamics::root_of_unity;
use recur_core::recurrence::{
    furstenberg_average, pigeonhole_check, product_lower_bound, recurrence_set, syndeticity,
    szemeredi_average,
};
use recur_core::sample::{random_hermitian_contraction, random_positive_contraction};
use recur_core::{
    verify_system, AlgebraElement, BlockShape, DynamicalSystem, Element, MeasureSemigroup,
    RecurrenceQuery, Syndeticity, TraceState,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn commutation_and_phase() -> Outcome {
    for (p, q) in [(1i64, 2usize), (1, 3), (2, 5), (3, 7)] {
        let sys = DynamicalSystem::rotation(p, q, MeasureSemigroup::naturals())
            .map_err(|e| e.to_string())?;
        let u = sys.element("U").unwrap();
        let v = sys.element("V").unwrap();
        let lhs = u * v;
        let rhs = (v * u).scale(root_of_unity(p, q));
        let gap = (&lhs - &rhs).op_norm();
        ensure(gap <= 1e-12, || {
            format!("({p},{q}): ||UV - e(θ)VU|| = {gap:e}")
        })?;
        for n in 1..=50i64 {
            let moved = sys.apply(&Element::scalar(n), v).unwrap();
            let expected = v.scale(root_of_unity(-n * p, q));
            let d = moved.max_abs_diff(&expected).unwrap();
            ensure(d <= 1e-12, || {
                format!("({p},{q}) n = {n}: phase off by {d:e}")
            })?;
        }
    }
    Ok("4 rotations, n <= 50".into())
}

fn axiom_suite() -> Outcome {
    let nat = MeasureSemigroup::naturals();
    let w = vec![0.5, 0.25, 0.25];
    let shape = BlockShape::new(vec![1, 1, 2]).unwrap();
    let trace = TraceState::new(shape.clone(), vec![0.25, 0.25, 0.25]).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(90);
    let g1 = recur_core::sample::random_unitary(&shape, &mut r);
    // commuting generators, otherwise Z^2 does not act
    let g2 = g1.pow(3);
    let systems = vec![
        ("rotation(1,5) on N", DynamicalSystem::rotation(1, 5, nat)),
        (
            "rotation(3,7) on Z",
            DynamicalSystem::rotation(3, 7, MeasureSemigroup::integers()),
        ),
        (
            "rotation(1,4) on Z/8",
            DynamicalSystem::rotation(1, 4, MeasureSemigroup::cyclic(8).unwrap()),
        ),
        (
            "classical shift",
            DynamicalSystem::classical(vec![1, 2, 3, 4, 0], vec![0.2; 5], nat),
        ),
        (
            "classical swap",
            DynamicalSystem::classical(vec![0, 2, 1], w, nat),
        ),
        (
            "conjugation on Z^2",
            DynamicalSystem::conjugation(
                trace,
                MeasureSemigroup::lattice(2).unwrap(),
                vec![g1, g2],
            ),
        ),
    ];
    for (name, sys) in systems {
        let sys = sys.map_err(|e| format!("{name}: {e}"))?;
        let rep = verify_system(&sys, 200, 1e-9, 2024).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("{name}: {:?}", rep.axioms()))?;
    }
    Ok("6 systems x 200 samples at 1e-9".into())
}

fn furstenberg_oracle() -> Outcome {
    let sys = DynamicalSystem::classical(
        vec![1, 2, 3, 0],
        vec![0.25; 4],
        MeasureSemigroup::naturals(),
    )
    .map_err(|e| e.to_string())?;
    let v = BTreeSet::from([0usize, 1]);
    let chi = sys.characteristic(&v).unwrap();
    let mut parts = Vec::new();
    for (k, expected) in [(1usize, 0.25), (2, 0.125)] {
        let exps: Vec<u64> = (0..=k as u64).collect();
        let s = szemeredi_average(&sys, &chi, &exps, &[4])
            .map_err(|e| e.to_string())?
            .rows[0]
            .average;
        let f = furstenberg_average(&sys, &v, k, 4).map_err(|e| e.to_string())?;
        ensure(
            (s - expected).abs() <= 1e-12 && (f - expected).abs() <= 1e-12,
            || format!("k = {k}: szemeredi {s}, furstenberg {f}, expected {expected}"),
        )?;
        parts.push(format!("k={k}: {s}"));
    }
    Ok(parts.join(", "))
}

/// `(1/q) sum_k prod_j cos^2(pi (k - m_j g)/q)`, the exact correlation of
/// `A = I/2 + (V + V*)/4` since `A = diag(cos^2(pi k/q))`.
fn closed_form_correlation(q: usize, exps: &[u64], g: i64) -> f64 {
    (0..q as i64)
        .map(|k| {
            exps.iter()
                .map(|&m| (PI * (k - m as i64 * g) as f64 / q as f64).cos().powi(2))
                .product::<f64>()
        })
        .sum::<f64>()
        / q as f64
}

fn positivity() -> Outcome {
    let exps = [0u64, 1, 2];
    let mut parts = Vec::new();
    for q in [3usize, 5] {
        let sys = DynamicalSystem::rotation(1, q, MeasureSemigroup::naturals())
            .map_err(|e| e.to_string())?;
        let v = sys.element("V").unwrap();
        let id = AlgebraElement::identity(sys.shape());
        let a = &id.scale(c64(0.5, 0.0)) + &(v + &v.adjoint()).scale(c64(0.25, 0.0));
        // over one period; windows of length t q + r average to (t S + P_r)/(t q + r)
        let period: Vec<f64> = (1..=q as i64)
            .map(|g| closed_form_correlation(q, &exps, g))
            .collect();
        let total: f64 = period.iter().sum();
        let mut a_star = total / q as f64;
        let mut partial = 0.0;
        for (r, c) in period.iter().enumerate() {
            a_star = a_star.min((total + partial) / (q + r) as f64);
            partial += c;
        }
        ensure(a_star > 0.0, || format!("q = {q}: a* = {a_star}"))?;
        let sizes: Vec<usize> = (q..=500).collect();
        let t = szemeredi_average(&sys, &a, &exps, &sizes).map_err(|e| e.to_string())?;
        for row in &t.rows {
            ensure(row.running_infimum >= a_star - 1e-9, || {
                format!(
                    "q = {q}, N = {}: infimum {} < a* = {a_star}",
                    row.n, row.running_infimum
                )
            })?;
        }
        parts.push(format!(
            "q={q}: a*={a_star:.6}, inf={:.6}",
            t.final_infimum().unwrap()
        ));
    }
    Ok(parts.join(", "))
}

fn product_bound_trials() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_margin = f64::INFINITY;
    for trial in 0..500 {
        let q = rng.random_range(1..=8usize);
        let k = rng.random_range(0..=3usize);
        let shape = BlockShape::full(q).unwrap();
        let omega = TraceState::normalized(shape.clone());
        let b = random_positive_contraction(&shape, &mut rng);
        let power = omega.eval(&b.pow(k as u64 + 1)).unwrap().re;
        let eps = power / (k + 1) as f64 * rng.random_range(0.1..0.9);
        let mut factors = Vec::with_capacity(k + 1);
        for _ in 0..=k {
            let h = random_hermitian_contraction(&shape, &mut rng);
            let mut scale =
                eps * rng.random_range(0.0..0.95) / omega.seminorm(&h).unwrap().max(1e-300);
            loop {
                let mut c = &b + &h.scale(c64(scale, 0.0));
                let n = c.op_norm();
                if n > 1.0 {
                    c = c.scale(c64(1.0 / n, 0.0));
                }
                if omega.distance(&c, &b).unwrap() < eps {
                    factors.push(c);
                    break;
                }
                scale /= 2.0;
            }
        }
        let out = product_lower_bound(&omega, &b, k, eps, &factors, 1e-12)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(out.a > 0.0 && out.holds, || {
            format!("trial {trial}: |value| {} vs a {}", out.value.norm(), out.a)
        })?;
        worst_margin = worst_margin.min(out.value.norm() - out.a);
    }
    Ok(format!("500 trials, smallest margin {worst_margin:.3e}"))
}

fn syndetic_recurrence() -> Outcome {
    let nat = MeasureSemigroup::naturals();
    let sys = DynamicalSystem::rotation(1, 4, nat).map_err(|e| e.to_string())?;
    let v = sys.element("V").unwrap().clone();
    let window = nat.folner_window(1000).unwrap();
    let q = RecurrenceQuery::new(v, vec![0, 1], 0.5, window.clone()).unwrap();
    let e = recurrence_set(&sys, &q)
        .map_err(|e| e.to_string())?
        .members();
    let expected: BTreeSet<Element> = (1..=250).map(|k| Element::scalar(4 * k)).collect();
    ensure(e == expected, || {
        format!("recurrence set has {} points", e.len())
    })?;
    match syndeticity(&nat, &e, &window, 10).map_err(|e| e.to_string())? {
        Syndeticity::Found(rep) => {
            let witnesses: Vec<Element> = (1..=4).map(Element::scalar).collect();
            ensure(rep.max_gap == Some(4) && rep.witnesses == witnesses, || {
                format!("{rep:?}")
            })?;
        }
        Syndeticity::Failed { reason } => return Err(reason),
    }
    Ok("E = 4N on {1..1000}, gap 4".into())
}

fn pigeonhole() -> Outcome {
    let nat = MeasureSemigroup::naturals();
    let b = nat.folner_window(10).unwrap();
    let evens: BTreeSet<Element> = (1..=20).map(|k| Element::scalar(2 * k)).collect();
    let out =
        pigeonhole_check(&nat, &b, &evens, &[1.into(), 2.into()]).map_err(|e| e.to_string())?;
    ensure(out.witness == Element::scalar(1) && out.count == 5, || {
        format!("{out:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for inst in 0..100 {
        let n = rng.random_range(2..=24u64);
        let s = MeasureSemigroup::cyclic(n).unwrap();
        let r = rng.random_range(1..=n.min(5) as usize);
        let witnesses: Vec<Element> = sample(&mut rng, n as usize, r)
            .into_iter()
            .map(|x| Element::scalar(x as i64))
            .collect();
        // each g reaches E through one randomly chosen witness
        let mut e = BTreeSet::new();
        for g in 0..n as i64 {
            let w = witnesses[rng.random_range(0..r)];
            e.insert(s.op(&Element::scalar(g), &w).unwrap());
            if rng.random_bool(0.2) {
                e.insert(Element::scalar(g));
            }
        }
        let size = rng.random_range(1..=n as usize);
        let base: Vec<Element> = sample(&mut rng, n as usize, size)
            .into_iter()
            .map(|x| Element::scalar(x as i64))
            .collect();
        let bw = s.window_from_elements(base.clone(), 0).unwrap();
        let out = pigeonhole_check(&s, &bw, &e, &witnesses)
            .map_err(|err| format!("instance {inst}: {err}"))?;
        let brute = base
            .iter()
            .filter(|x| e.contains(&s.op(x, &out.witness).unwrap()))
            .count();
        ensure(brute == out.count && brute * r >= base.len(), || {
            format!("instance {inst}: {brute} of {} with r = {r}", base.len())
        })?;
    }
    Ok("N example + 100 cyclic instances".into())
}

fn folner_arithmetic() -> Outcome {
    let nat = MeasureSemigroup::naturals();
    for n in 1..=200usize {
        let w = nat.folner_window(n).unwrap();
        for g in 1..=2 * n {
            let got = nat.folner_ratio(&w, &Element::scalar(g as i64)).unwrap();
            let expected = Ratio::new((2 * g).min(2 * n), n);
            ensure(got == expected, || {
                format!("N = {n}, g = {g}: {got} != {expected}")
            })?;
        }
    }
    let kinds = [
        MeasureSemigroup::naturals(),
        MeasureSemigroup::integers(),
        MeasureSemigroup::lattice(2).unwrap(),
        MeasureSemigroup::cyclic(11).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in 0..1000 {
        let s = &kinds[t % kinds.len()];
        let n = rng.random_range(1..=30usize);
        let w = s.folner_window(n).unwrap();
        let g = s.sample(&mut rng, 40);
        let h = s.sample(&mut rng, 40);
        let moved = s.translate_window(&w, &h).unwrap();
        let before = s.folner_ratio(&w, &g).unwrap();
        let after = s.folner_ratio(&moved, &g).unwrap();
        ensure(before == after, || {
            format!(
                "{:?} N = {n}, g = {g}, h = {h}: {before} vs {after}",
                s.kind()
            )
        })?;
    }
    Ok("ratio formula for N <= 200, 1000 translated triples".into())
}

fn compactness_certificates() -> Outcome {
    let nat = MeasureSemigroup::naturals();
    let sizes = [10, 50, 100, 200];
    for q in [3usize, 5, 8] {
        let sys = DynamicalSystem::rotation(1, q, nat).map_err(|e| e.to_string())?;
        for (name, expected) in [("V", q), ("U", 1)] {
            let a = sys.element(name).unwrap();
            let rep = compactness_certificate(&sys, a, &[0.1], &sizes, Metric::Gns)
                .map_err(|e| e.to_string())?;
            let got = rep.net_sizes(0.1);
            ensure(
                rep.all_stabilized() && got.iter().all(|&s| s == expected),
                || format!("q = {q}, A = {name}: sizes {got:?}"),
            )?;
        }
    }
    let sys = DynamicalSystem::rotation(1, 3, nat).map_err(|e| e.to_string())?;
    let win = nat.folner_window(200).unwrap();
    let u = sys.element("U").unwrap().clone();
    let v = sys.element("V").unwrap().clone();
    let eps = 0.1;
    let cu = orbit_sample_with(&sys, &u, &win, Metric::Operator).unwrap();
    let cv = orbit_sample_with(&sys, &v, &win, Metric::Operator).unwrap();
    let nu = greedy_eps_net(&cu, eps).unwrap();
    let nv = greedy_eps_net(&cv, eps).unwrap();
    let mut net = combine_nets(&nu, &nv, u.op_norm(), v.op_norm()).map_err(|e| e.to_string())?;
    let uv = &u * &v;
    let orbit = orbit_sample_with(&sys, &uv, &win, Metric::Operator).unwrap();
    ensure(net.certify(&orbit), || {
        "product net misses the UV orbit".into()
    })?;
    // per point: ||tau_g(U) tau_g(V) - a b|| <= eps (||tau_g(U)|| + ||b||)
    for i in 0..win.measure() {
        let (x, y) = (&cu.points()[i], &cv.points()[i]);
        let a = nu
            .centers()
            .iter()
            .find(|c| (x - c).op_norm() < eps)
            .unwrap();
        let b = nv
            .centers()
            .iter()
            .find(|c| (y - c).op_norm() < eps)
            .unwrap();
        let lhs = (&product(&[x.clone(), y.clone()]).unwrap() - &(a * b)).op_norm();
        let bound = eps * (x.op_norm() + b.op_norm());
        ensure(lhs <= bound + 1e-12, || {
            format!("g index {i}: {lhs} > {bound}")
        })?;
    }
    Ok("q in {3,5,8}; UV product net".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "commutation relation and phase rotation",
            commutation_and_phase,
            1,
        ),
        ("action axiom suite", axiom_suite, 5),
        (
            "classical multiple-recurrence oracle",
            furstenberg_oracle,
            1,
        ),
        ("positivity of correlation averages", positivity, 10),
        ("trace product lower bound", product_bound_trials, 30),
        ("syndetic recurrence set", syndetic_recurrence, 2),
        ("pigeonhole over witness translates", pigeonhole, 2),
        ("Folner arithmetic", folner_arithmetic, 5),
        ("compactness certificates", compactness_certificates, 5),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} {name} [{:.3}s / {budget}s] {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
