//! Recurrence sets, syndeticity, density pigeonholing, the trace product
//! bound and multiple-correlation averages over Folner windows.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::algebra::{product, AlgebraElement, TraceState, C64};
use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Hypothesis, Result};
use crate::semigroup::{Element, FolnerWindow, MeasureSemigroup, SemigroupKind};

/// Membership predicate for subsets of a semigroup.
pub type Membership<'a> = &'a dyn Fn(&Element) -> bool;

#[derive(Debug, Clone)]
pub struct RecurrenceQuery {
    pub element: AlgebraElement,
    /// `m_0, ..., m_k`; zero means the identity map.
    pub exponents: Vec<u64>,
    pub epsilon: f64,
    pub window: FolnerWindow,
}

impl RecurrenceQuery {
    pub fn new(
        element: AlgebraElement,
        exponents: Vec<u64>,
        epsilon: f64,
        window: FolnerWindow,
    ) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Argument("need at least one exponent".into()));
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::Argument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(RecurrenceQuery {
            element,
            exponents,
            epsilon,
            window,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceRow {
    pub g: Element,
    /// `max_j ||tau_{g^{m_j}}(A) - A||_omega`
    pub max_deviation: f64,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSet {
    pub rows: Vec<RecurrenceRow>,
}

impl RecurrenceSet {
    pub fn members(&self) -> BTreeSet<Element> {
        self.rows.iter().filter(|r| r.member).map(|r| r.g).collect()
    }
}

/// `max_j ||tau_{g^{m_j}}(A) - A||_omega`.
pub fn max_deviation(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    exponents: &[u64],
    g: &Element,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &m in exponents {
        let moved = sys.apply_power(g, m, a)?;
        worst = worst.max(sys.trace().distance(&moved, a)?);
    }
    Ok(worst)
}

/// `E = {g in window : max_j ||tau_{g^{m_j}}(A) - A||_omega < epsilon}`.
///
/// The comparison is the raw strict float inequality; `E` is an open
/// condition and no tolerance band is added.
pub fn recurrence_set(sys: &DynamicalSystem, query: &RecurrenceQuery) -> Result<RecurrenceSet> {
    let elements = query.window.elements();
    let rows = elements
        .par_iter()
        .map(|g| {
            let d = max_deviation(sys, &query.element, &query.exponents, g)?;
            Ok(RecurrenceRow {
                g: *g,
                max_deviation: d,
                member: d < query.epsilon,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecurrenceSet { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndeticityReport {
    pub witnesses: Vec<Element>,
    pub r: usize,
    /// Every `g` for which all `g g_j` lie in the scan window; each of them
    /// meets `E` in at least one translate.
    pub verified: Vec<Element>,
    /// Bounded-gap length, for subsets of `N` only.
    pub max_gap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Syndeticity {
    Found(SyndeticityReport),
    Failed { reason: String },
}

impl Syndeticity {
    pub fn report(&self) -> Option<&SyndeticityReport> {
        match self {
            Syndeticity::Found(r) => Some(r),
            Syndeticity::Failed { .. } => None,
        }
    }
}

/// Searches for witnesses `g_1..g_r`, `r <= max_r`, with
/// `E ∩ {g g_1, ..., g g_r} != ∅` for every applicable `g` in the window.
///
/// On `N` this is the bounded-gap criterion with witnesses `{1..r}`; `r` is
/// capped at half the window so that the verified range is never vacuous.
/// Elsewhere a greedy cover over candidate witnesses near the origin is used.
pub fn syndeticity(
    semigroup: &MeasureSemigroup,
    e: &BTreeSet<Element>,
    scan: &FolnerWindow,
    max_r: usize,
) -> Result<Syndeticity> {
    if max_r == 0 {
        return Err(Error::Argument("max_r must be >= 1".into()));
    }
    if semigroup.kind() == SemigroupKind::Naturals {
        naturals_syndeticity(e, scan, max_r)
    } else {
        greedy_syndeticity(semigroup, e, scan, max_r)
    }
}

fn naturals_syndeticity(
    e: &BTreeSet<Element>,
    scan: &FolnerWindow,
    max_r: usize,
) -> Result<Syndeticity> {
    let elements = scan.elements();
    let values: Vec<i64> = elements
        .iter()
        .map(|g| g.as_scalar().filter(|&x| x >= 1))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Structure("scan window is not a subset of N".into()))?;
    let (lo, hi) = (values[0], *values.last().expect("nonempty window"));
    if (hi - lo + 1) as usize != values.len() {
        return Err(Error::Argument(
            "scan window over N must be an interval".into(),
        ));
    }
    let hits: BTreeSet<i64> = e
        .iter()
        .filter_map(Element::as_scalar)
        .filter(|x| (lo..=hi).contains(x))
        .collect();
    let cap = max_r.min(values.len() / 2);
    for r in 1..=cap as i64 {
        let ok = (lo..=hi - r).all(|g| hits.range(g + 1..=g + r).next().is_some());
        if ok {
            return Ok(Syndeticity::Found(SyndeticityReport {
                witnesses: (1..=r).map(Element::scalar).collect(),
                r: r as usize,
                verified: (lo..=hi - r).map(Element::scalar).collect(),
                max_gap: Some(r as u64),
            }));
        }
    }
    Ok(Syndeticity::Failed {
        reason: format!("gaps exceed {cap} within {lo}..={hi}"),
    })
}

fn greedy_syndeticity(
    semigroup: &MeasureSemigroup,
    e: &BTreeSet<Element>,
    scan: &FolnerWindow,
    max_r: usize,
) -> Result<Syndeticity> {
    let elements = scan.elements();
    let pool: Vec<Element> = match semigroup.kind() {
        SemigroupKind::Cyclic { .. } => elements.clone(),
        _ => {
            let radius = elements
                .iter()
                .flat_map(|g| g.coords().iter().map(|c| c.abs()))
                .max()
                .unwrap_or(0);
            let limit = (radius + 1) / 2;
            elements
                .iter()
                .copied()
                .filter(|g| g.coords().iter().all(|c| c.abs() <= limit))
                .collect()
        }
    };
    let in_e = |x: &Element| scan.contains(x) && e.contains(x);
    let mut chosen: Vec<Element> = Vec::new();
    loop {
        let mut applicable = Vec::new();
        for g in &elements {
            let mut inside = true;
            for w in &chosen {
                if !scan.contains(&semigroup.op(g, w)?) {
                    inside = false;
                    break;
                }
            }
            if inside {
                applicable.push(*g);
            }
        }
        let mut uncovered = Vec::new();
        for g in &applicable {
            let mut hit = false;
            for w in &chosen {
                if in_e(&semigroup.op(g, w)?) {
                    hit = true;
                    break;
                }
            }
            if !hit {
                uncovered.push(*g);
            }
        }
        if uncovered.is_empty() && !chosen.is_empty() {
            if applicable.is_empty() {
                return Ok(Syndeticity::Failed {
                    reason: "witnesses leave no verifiable range in the window".into(),
                });
            }
            return Ok(Syndeticity::Found(SyndeticityReport {
                r: chosen.len(),
                witnesses: chosen,
                verified: applicable,
                max_gap: None,
            }));
        }
        if chosen.len() == max_r {
            return Ok(Syndeticity::Failed {
                reason: format!(
                    "{} elements uncovered with {max_r} witnesses",
                    uncovered.len()
                ),
            });
        }
        let mut best: Option<(usize, Element)> = None;
        for c in pool.iter().filter(|c| !chosen.contains(c)) {
            let mut gain = 0;
            for g in &uncovered {
                if in_e(&semigroup.op(g, c)?) {
                    gain += 1;
                }
            }
            if gain > 0 && best.is_none_or(|(b, _)| gain > b) {
                best = Some((gain, *c));
            }
        }
        match best {
            Some((_, c)) => chosen.push(c),
            None => {
                return Ok(Syndeticity::Failed {
                    reason: "no candidate witness reaches E from the uncovered elements".into(),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PigeonholeOutcome {
    /// Position of the chosen witness in the witness list.
    pub index: usize,
    pub witness: Element,
    /// `mu((B g_j) ∩ E)`
    pub count: usize,
    /// `mu((B g_j) ∩ E) / mu(B)`
    pub ratio: f64,
    /// `B_j = {b in B : b g_j in E}` for every witness.
    pub parts: Vec<BTreeSet<Element>>,
}

/// Finds `j` with `mu((B g_j) ∩ E) >= mu(B)/r` through the decomposition
/// `B = ∪ B_j`. A gap in the cover or a failed bound means `E` does not meet
/// every translate pattern on `B`, usually because the scan was truncated.
pub fn pigeonhole_check(
    semigroup: &MeasureSemigroup,
    b: &FolnerWindow,
    e: &BTreeSet<Element>,
    witnesses: &[Element],
) -> Result<PigeonholeOutcome> {
    if witnesses.is_empty() {
        return Err(Error::Argument("need at least one witness".into()));
    }
    let base = b.elements();
    let mut parts = Vec::with_capacity(witnesses.len());
    for w in witnesses {
        let mut part = BTreeSet::new();
        for x in &base {
            if e.contains(&semigroup.op(x, w)?) {
                part.insert(*x);
            }
        }
        parts.push(part);
    }
    if let Some(x) = base.iter().find(|x| parts.iter().all(|p| !p.contains(x))) {
        return Err(Error::InvariantViolation(format!(
            "{x} g_j misses E for every witness, so the parts B_j do not cover B"
        )));
    }
    let (index, part) = parts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, p)| p.len())
        .expect("nonempty witnesses");
    let translated = semigroup.translate_window(b, &witnesses[index])?;
    let count = translated.iter().filter(|x| e.contains(x)).count();
    if count != part.len() {
        return Err(Error::InvariantViolation(format!(
            "|B_j g_j| = {} differs from mu((B g_j) ∩ E) = {count}",
            part.len()
        )));
    }
    let r = witnesses.len();
    if count * r < base.len() {
        return Err(Error::InvariantViolation(format!(
            "best translate meets E in {count} of {} points, below 1/{r}",
            base.len()
        )));
    }
    Ok(PigeonholeOutcome {
        index,
        witness: witnesses[index],
        count,
        ratio: count as f64 / base.len() as f64,
        parts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBound {
    /// `omega(b^{k+1}) - (k+1) epsilon`
    pub a: f64,
    /// `omega(c_0 c_1 ... c_k)`
    pub value: C64,
    /// `|value| > a`; false would contradict the bound and must be reported.
    pub holds: bool,
}

/// Checks every hypothesis of the trace product bound, then evaluates it.
pub fn product_lower_bound(
    omega: &TraceState,
    b: &AlgebraElement,
    k: usize,
    epsilon: f64,
    factors: &[AlgebraElement],
    tol: f64,
) -> Result<ProductBound> {
    if !b.has_shape(omega.shape()) {
        return Err(Error::Structure(
            "b does not belong to the state's algebra".into(),
        ));
    }
    let mut failed = Vec::new();
    if !b.is_positive(tol) {
        failed.push(Hypothesis::NotPositive);
    }
    let norm = b.op_norm();
    if norm > 1.0 + tol {
        failed.push(Hypothesis::NormAboveOne { norm });
    }
    let trace_b = omega.eval(b)?.re;
    if trace_b <= 0.0 {
        failed.push(Hypothesis::NonPositiveTrace { value: trace_b });
    }
    let power_trace = omega.eval(&b.pow(k as u64 + 1))?.re;
    let limit = power_trace / (k + 1) as f64;
    if epsilon.is_nan() || epsilon <= 0.0 {
        failed.push(Hypothesis::EpsilonNotPositive);
    } else if epsilon >= limit {
        failed.push(Hypothesis::EpsilonTooLarge { epsilon, limit });
    }
    if factors.len() != k + 1 {
        failed.push(Hypothesis::FactorCount {
            expected: k + 1,
            found: factors.len(),
        });
    }
    for (index, c) in factors.iter().enumerate() {
        if !c.has_shape(omega.shape()) {
            failed.push(Hypothesis::ShapeMismatch { index });
            continue;
        }
        let cn = c.op_norm();
        if cn > 1.0 + tol {
            failed.push(Hypothesis::FactorNormAboveOne { index, norm: cn });
        }
        let distance = omega.distance(c, b)?;
        if distance.is_nan() || distance >= epsilon {
            failed.push(Hypothesis::FactorTooFar { index, distance });
        }
    }
    if !failed.is_empty() {
        return Err(Error::Preconditions(failed));
    }
    let a = power_trace - (k + 1) as f64 * epsilon;
    let value = omega.eval(&product(factors)?)?;
    Ok(ProductBound {
        a,
        value,
        holds: value.norm() > a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationBound {
    /// `||A||`
    pub norm: f64,
    /// Recurrence radius for `b = A/||A||`.
    pub epsilon: f64,
    /// Bound for the normalized element `b`.
    pub normalized: f64,
    /// `normalized * ||A||^{k+1}`, the bound for `A` itself.
    pub a: f64,
}

/// Bound on `|omega(prod_j tau_{g^{m_j}}(A))|` valid on the recurrence set
/// of `A/||A||` at radius `epsilon`. Without an explicit radius, half the
/// admissible maximum `omega(b^{k+1})/(k+1)` is used.
pub fn correlation_bound(
    omega: &TraceState,
    a: &AlgebraElement,
    factor_count: usize,
    epsilon: Option<f64>,
    tol: f64,
) -> Result<CorrelationBound> {
    if factor_count == 0 {
        return Err(Error::Argument("need at least one factor".into()));
    }
    let mut failed = Vec::new();
    if !a.is_positive(tol) {
        failed.push(Hypothesis::NotPositive);
    }
    let trace_a = omega.eval(a)?.re;
    if trace_a <= 0.0 {
        failed.push(Hypothesis::NonPositiveTrace { value: trace_a });
    }
    if !failed.is_empty() {
        return Err(Error::Preconditions(failed));
    }
    let norm = a.op_norm();
    let b = a.scale(C64::new(1.0 / norm, 0.0));
    let power_trace = omega.eval(&b.pow(factor_count as u64))?.re;
    let limit = power_trace / factor_count as f64;
    let epsilon = epsilon.unwrap_or(limit / 2.0);
    if epsilon.is_nan() || epsilon <= 0.0 || epsilon >= limit {
        return Err(Error::Preconditions(vec![Hypothesis::EpsilonTooLarge {
            epsilon,
            limit,
        }]));
    }
    let normalized = power_trace - factor_count as f64 * epsilon;
    Ok(CorrelationBound {
        norm,
        epsilon,
        normalized,
        a: normalized * norm.powi(factor_count as i32),
    })
}

/// `omega(tau_{g^{m_0}}(A) tau_{g^{m_1}}(A) ... tau_{g^{m_k}}(A))`, factors
/// in the order given.
pub fn correlation(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    exponents: &[u64],
    g: &Element,
) -> Result<C64> {
    if exponents.is_empty() {
        return Err(Error::Argument("need at least one exponent".into()));
    }
    let factors = exponents
        .iter()
        .map(|&m| sys.apply_power(g, m, a))
        .collect::<Result<Vec<_>>>()?;
    sys.trace().eval(&product(&factors)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageRow {
    pub n: usize,
    /// `(1/|Λ_N|) sum_{g in Λ_N} |correlation(g)|`
    pub average: f64,
    /// Minimum of the averages up to and including this window.
    pub running_infimum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedWindow {
    pub n: usize,
    pub witness: Element,
    /// `mu((Λ_N g_j) ∩ E) / mu(Λ_N)`
    pub density: f64,
    /// Average of `|correlation|` over `Λ_N g_j`.
    pub average: f64,
}

/// Folner sequence `Λ_N g_{j(N)}` on which `E` has density at least `1/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedNet {
    pub r: usize,
    pub windows: Vec<TranslatedWindow>,
    /// Running infima of the densities over shrinking tails.
    pub lower_density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageTrace {
    pub rows: Vec<AverageRow>,
    /// Signed correlation for every evaluated `g`, ascending.
    pub correlations: BTreeMap<Element, C64>,
    pub translated: Option<TranslatedNet>,
}

impl AverageTrace {
    pub fn final_infimum(&self) -> Option<f64> {
        self.rows.last().map(|r| r.running_infimum)
    }
}

fn correlation_table(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    exponents: &[u64],
    windows: &[FolnerWindow],
) -> Result<BTreeMap<Element, C64>> {
    let all: BTreeSet<Element> = windows.iter().flat_map(|w| w.iter()).collect();
    let ordered: Vec<Element> = all.into_iter().collect();
    let values = ordered
        .par_iter()
        .map(|g| correlation(sys, a, exponents, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ordered.into_iter().zip(values).collect())
}

fn window_average(window: &FolnerWindow, table: &BTreeMap<Element, C64>) -> f64 {
    // summation follows window order so results do not depend on threading
    let total: f64 = window.iter().map(|g| table[&g].norm()).sum();
    total / window.measure() as f64
}

/// Averages of `|omega(prod_j tau_{g^{m_j}}(A))|` over the canonical windows.
pub fn szemeredi_average(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    exponents: &[u64],
    window_sizes: &[usize],
) -> Result<AverageTrace> {
    if window_sizes.is_empty() {
        return Err(Error::Argument("need at least one window size".into()));
    }
    let windows = window_sizes
        .iter()
        .map(|&n| sys.semigroup().folner_window(n))
        .collect::<Result<Vec<_>>>()?;
    let correlations = correlation_table(sys, a, exponents, &windows)?;
    let mut rows = Vec::with_capacity(windows.len());
    let mut inf = f64::INFINITY;
    for (w, &n) in windows.iter().zip(window_sizes) {
        let average = window_average(w, &correlations);
        inf = inf.min(average);
        rows.push(AverageRow {
            n,
            average,
            running_infimum: inf,
        });
    }
    Ok(AverageTrace {
        rows,
        correlations,
        translated: None,
    })
}

/// Like [`szemeredi_average`], and additionally builds the translated
/// sequence `Λ_N g_{j(N)}` that picks, for each window, the witness
/// translate meeting `E` most, together with the averages over it.
pub fn szemeredi_average_with_net(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    exponents: &[u64],
    window_sizes: &[usize],
    e: Membership<'_>,
    witnesses: &[Element],
) -> Result<AverageTrace> {
    let mut trace = szemeredi_average(sys, a, exponents, window_sizes)?;
    let net = translated_net(sys.semigroup(), window_sizes, e, witnesses)?;
    let shifted = window_sizes
        .iter()
        .zip(&net.windows)
        .map(|(&n, t)| {
            let w = sys.semigroup().folner_window(n)?;
            sys.semigroup().translate_window(&w, &t.witness)
        })
        .collect::<Result<Vec<_>>>()?;
    let extra = correlation_table(sys, a, exponents, &shifted)?;
    trace.correlations.extend(extra);
    let mut net = net;
    for (t, w) in net.windows.iter_mut().zip(&shifted) {
        t.average = window_average(w, &trace.correlations);
    }
    trace.translated = Some(net);
    Ok(trace)
}

/// For each canonical window pick `j(N)` maximizing the density of `E` in
/// `Λ_N g_j`. Each choice must reach density `1/r`.
pub fn translated_net(
    semigroup: &MeasureSemigroup,
    window_sizes: &[usize],
    e: Membership<'_>,
    witnesses: &[Element],
) -> Result<TranslatedNet> {
    if witnesses.is_empty() || window_sizes.is_empty() {
        return Err(Error::Argument("need witnesses and window sizes".into()));
    }
    let r = witnesses.len();
    let mut windows = Vec::with_capacity(window_sizes.len());
    for &n in window_sizes {
        let base = semigroup.folner_window(n)?;
        let mut best: Option<(usize, Element)> = None;
        for w in witnesses {
            let shifted = semigroup.translate_window(&base, w)?;
            let hits = shifted.iter().filter(|g| e(g)).count();
            if best.is_none_or(|(b, _)| hits > b) {
                best = Some((hits, *w));
            }
        }
        let (hits, witness) = best.expect("nonempty witnesses");
        let measure = base.measure();
        if hits * r < measure {
            return Err(Error::InvariantViolation(format!(
                "window {n}: best translate has density {hits}/{measure} < 1/{r}"
            )));
        }
        windows.push(TranslatedWindow {
            n,
            witness,
            density: hits as f64 / measure as f64,
            average: f64::NAN,
        });
    }
    let mut lower_density: Vec<f64> = windows.iter().map(|w| w.density).collect();
    for i in (0..lower_density.len().saturating_sub(1)).rev() {
        lower_density[i] = lower_density[i].min(lower_density[i + 1]);
    }
    Ok(TranslatedNet {
        r,
        windows,
        lower_density,
    })
}

/// `(1/N) sum_{n=1}^N nu(V ∩ T^{-n}V ∩ ... ∩ T^{-kn}V)` by walking the
/// point map directly, without going through the algebra.
pub fn furstenberg_average(
    sys: &DynamicalSystem,
    v: &BTreeSet<usize>,
    k: usize,
    n: usize,
) -> Result<f64> {
    let map = sys
        .point_map()
        .ok_or_else(|| Error::Argument("Furstenberg average needs a classical system".into()))?;
    if v.is_empty() {
        return Err(Error::Argument("V must be nonempty".into()));
    }
    if n == 0 {
        return Err(Error::Argument("N must be >= 1".into()));
    }
    if let Some(bad) = v.iter().find(|&&x| x >= map.len()) {
        return Err(Error::Argument(format!("point {bad} outside the space")));
    }
    let weights = sys.trace().weights();
    let mut total = 0.0;
    for step in 1..=n {
        let mut measure = 0.0;
        for (x, w) in weights.iter().enumerate() {
            let mut y = x;
            let mut inside = v.contains(&y);
            for _ in 0..k {
                if !inside {
                    break;
                }
                for _ in 0..step {
                    y = map[y];
                }
                inside = v.contains(&y);
            }
            if inside {
                measure += w;
            }
        }
        total += measure;
    }
    Ok(total / n as f64)
}

/// Exponents `0, 1, ..., k` of the classical multiple average.
pub fn arithmetic_exponents(k: usize) -> Vec<u64> {
    (0..=k as u64).collect()
}
