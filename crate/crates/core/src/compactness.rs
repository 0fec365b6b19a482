//! Epsilon-nets and separated sets on finite orbit samples.
//!
//! A certificate here is finite evidence over sampled windows: it reports
//! whether greedy net sizes stopped growing, never that an infinite orbit is
//! totally bounded.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, TraceState};
use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Result};
use crate::semigroup::{Element, FolnerWindow};

/// Points closer than this are identified before exact search.
pub const DEDUP_TOL: f64 = 1e-9;

/// Largest number of distinct points accepted by exact search.
pub const EXACT_CAPACITY: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `||x - y||_omega`
    #[default]
    Gns,
    /// `||x - y||` in the C*-norm.
    Operator,
}

#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<AlgebraElement>,
    labels: Vec<Element>,
    trace: TraceState,
    metric: Metric,
}

impl PointCloud {
    pub fn new(
        points: Vec<AlgebraElement>,
        labels: Vec<Element>,
        trace: TraceState,
        metric: Metric,
    ) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Structure(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if points.iter().any(|p| !p.has_shape(trace.shape())) {
            return Err(Error::Structure("cloud point outside the algebra".into()));
        }
        Ok(PointCloud {
            points,
            labels,
            trace,
            metric,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AlgebraElement] {
        &self.points
    }

    /// Semigroup element that produced each point.
    pub fn labels(&self) -> &[Element] {
        &self.labels
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn trace(&self) -> &TraceState {
        &self.trace
    }

    /// Distance between arbitrary elements of the cloud's algebra.
    pub fn metric_distance(&self, x: &AlgebraElement, y: &AlgebraElement) -> f64 {
        match self.metric {
            Metric::Gns => self.trace.distance(x, y).expect("points share the algebra"),
            Metric::Operator => (x - y).op_norm(),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric_distance(&self.points[i], &self.points[j])
    }

    /// Row-major `len x len` distance matrix.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    0.0
                } else {
                    self.distance(i, j)
                }
            })
            .collect()
    }

    /// Number of points after identifying those within [`DEDUP_TOL`].
    pub fn distinct_count(&self) -> usize {
        self.representatives().len()
    }

    fn representatives(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..self.len() {
            if reps.iter().all(|&r| self.distance(r, i) > DEDUP_TOL) {
                reps.push(i);
            }
        }
        reps
    }
}

/// `{tau_g(A) : g in Lambda}` in window order, duplicates kept.
pub fn orbit_sample(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    window: &FolnerWindow,
) -> Result<PointCloud> {
    orbit_sample_with(sys, a, window, Metric::Gns)
}

pub fn orbit_sample_with(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    window: &FolnerWindow,
    metric: Metric,
) -> Result<PointCloud> {
    let labels = window.elements();
    let points = labels
        .par_iter()
        .map(|g| sys.apply(g, a))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(points, labels, sys.trace().clone(), metric)
}

#[derive(Debug, Clone)]
pub struct EpsilonNet {
    centers: Vec<AlgebraElement>,
    sources: Vec<usize>,
    radius: f64,
    covering_certified: bool,
}

impl EpsilonNet {
    pub fn centers(&self) -> &[AlgebraElement] {
        &self.centers
    }

    /// Cloud indices of the centers; empty when the centers were synthesized.
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn covering_certified(&self) -> bool {
        self.covering_certified
    }

    fn within(&self, d: f64) -> bool {
        if self.radius > 0.0 {
            d < self.radius
        } else {
            d <= DEDUP_TOL
        }
    }

    /// Every cloud point lies within the radius of some center (strictly,
    /// except for a zero radius which means exact coincidence).
    pub fn covers(&self, cloud: &PointCloud) -> bool {
        cloud.points().par_iter().all(|p| {
            self.centers
                .iter()
                .any(|c| self.within(cloud.metric_distance(p, c)))
        })
    }

    /// Centers are pairwise at least the radius apart in the cloud's metric.
    pub fn is_separated(&self, cloud: &PointCloud) -> bool {
        (0..self.len()).all(|i| {
            (i + 1..self.len())
                .all(|j| cloud.metric_distance(&self.centers[i], &self.centers[j]) >= self.radius)
        })
    }

    /// Checks covering of `cloud` and records the outcome.
    pub fn certify(&mut self, cloud: &PointCloud) -> bool {
        self.covering_certified = self.covers(cloud);
        self.covering_certified
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

fn greedy_indices(cloud: &PointCloud, epsilon: f64) -> Vec<usize> {
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        if centers.iter().all(|&c| cloud.distance(c, i) >= epsilon) {
            centers.push(i);
        }
    }
    centers
}

/// Scans points in order and keeps each one at distance `>= epsilon` from
/// all kept points. The result is epsilon-separated and covers the cloud.
pub fn greedy_eps_net(cloud: &PointCloud, epsilon: f64) -> Result<EpsilonNet> {
    check_epsilon(epsilon)?;
    let sources = greedy_indices(cloud, epsilon);
    Ok(EpsilonNet {
        centers: sources.iter().map(|&i| cloud.points[i].clone()).collect(),
        sources,
        radius: epsilon,
        covering_certified: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationMode {
    /// Inclusion-maximal, via the greedy net.
    Greedy,
    /// Cardinality-maximal, by exhaustive search over distinct points.
    Exact,
}

/// Indices of an epsilon-separated subset of the cloud.
pub fn max_separated(cloud: &PointCloud, epsilon: f64, mode: SeparationMode) -> Result<Vec<usize>> {
    check_epsilon(epsilon)?;
    match mode {
        SeparationMode::Greedy => Ok(greedy_indices(cloud, epsilon)),
        SeparationMode::Exact => {
            let reps = cloud.representatives();
            if reps.len() > EXACT_CAPACITY {
                return Err(Error::Capacity(format!(
                    "exact search supports at most {EXACT_CAPACITY} distinct points, got {}",
                    reps.len()
                )));
            }
            let n = reps.len();
            let mut conflicts = vec![0u32; n];
            for i in 0..n {
                for j in i + 1..n {
                    if cloud.distance(reps[i], reps[j]) < epsilon {
                        conflicts[i] |= 1 << j;
                        conflicts[j] |= 1 << i;
                    }
                }
            }
            let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            let mut best = 0u32;
            max_independent(all, 0, &conflicts, &mut best);
            Ok((0..n)
                .filter(|&i| best & (1 << i) != 0)
                .map(|i| reps[i])
                .collect())
        }
    }
}

fn max_independent(candidates: u32, chosen: u32, conflicts: &[u32], best: &mut u32) {
    if chosen.count_ones() + candidates.count_ones() <= best.count_ones() {
        return;
    }
    if candidates == 0 {
        *best = chosen;
        return;
    }
    let v = candidates.trailing_zeros() as usize;
    let bit = 1u32 << v;
    max_independent(
        candidates & !bit & !conflicts[v],
        chosen | bit,
        conflicts,
        best,
    );
    max_independent(candidates & !bit, chosen, conflicts, best);
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub epsilon: f64,
    pub window_n: usize,
    pub net_size: usize,
    pub stabilized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub rows: Vec<CertificateRow>,
}

impl CertificateReport {
    /// `None` if `epsilon` was not requested.
    pub fn stabilized(&self, epsilon: f64) -> Option<bool> {
        self.rows
            .iter()
            .find(|r| r.epsilon == epsilon)
            .map(|r| r.stabilized)
    }

    pub fn all_stabilized(&self) -> bool {
        self.rows.iter().all(|r| r.stabilized)
    }

    pub fn net_sizes(&self, epsilon: f64) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.epsilon == epsilon)
            .map(|r| r.net_size)
            .collect()
    }
}

/// Greedy net sizes of the orbit of `a` over each canonical window. An
/// epsilon is reported stabilized when its net size is constant over the
/// last half (rounded up) of the windows.
pub fn compactness_certificate(
    sys: &DynamicalSystem,
    a: &AlgebraElement,
    epsilons: &[f64],
    window_sizes: &[usize],
    metric: Metric,
) -> Result<CertificateReport> {
    if epsilons.is_empty() || window_sizes.is_empty() {
        return Err(Error::Argument(
            "need at least one epsilon and one window size".into(),
        ));
    }
    for &e in epsilons {
        check_epsilon(e)?;
    }
    if window_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "window sizes must be strictly increasing".into(),
        ));
    }
    let windows = window_sizes
        .iter()
        .map(|&n| sys.semigroup().folner_window(n))
        .collect::<Result<Vec<_>>>()?;

    let mut orbit: HashMap<Element, AlgebraElement> = HashMap::new();
    for w in &windows {
        let fresh: Vec<Element> = w.iter().filter(|g| !orbit.contains_key(g)).collect();
        let images = fresh
            .par_iter()
            .map(|g| sys.apply(g, a))
            .collect::<Result<Vec<_>>>()?;
        orbit.extend(fresh.into_iter().zip(images));
    }
    let clouds = windows
        .iter()
        .map(|w| {
            let labels = w.elements();
            let points = labels.iter().map(|g| orbit[g].clone()).collect();
            PointCloud::new(points, labels, sys.trace().clone(), metric)
        })
        .collect::<Result<Vec<_>>>()?;

    let tail = window_sizes.len().div_ceil(2);
    let mut rows = Vec::new();
    for &eps in epsilons {
        let sizes = clouds
            .iter()
            .map(|c| greedy_eps_net(c, eps).map(|net| net.len()))
            .collect::<Result<Vec<_>>>()?;
        let last = &sizes[sizes.len() - tail..];
        let stabilized = last.iter().all(|&s| s == last[0]);
        rows.extend(
            window_sizes
                .iter()
                .zip(sizes)
                .map(|(&n, s)| CertificateRow {
                    epsilon: eps,
                    window_n: n,
                    net_size: s,
                    stabilized,
                }),
        );
    }
    Ok(CertificateReport { rows })
}

/// Product net `{ab}` for nets of two orbits in the operator-norm metric.
///
/// With `||tau_g(A)|| <= norm_a` and `||tau_g(B)|| <= norm_b`, every product
/// `tau_g(A) tau_g(B)` lies within `eps (norm_a + norm_b + eps)` of a center,
/// where `eps` is the larger of the two radii. The returned net is not
/// certified until [`EpsilonNet::certify`] is run against a product orbit.
pub fn combine_nets(
    net_a: &EpsilonNet,
    net_b: &EpsilonNet,
    norm_a: f64,
    norm_b: f64,
) -> Result<EpsilonNet> {
    if net_a.is_empty() || net_b.is_empty() {
        return Err(Error::Argument("cannot combine an empty net".into()));
    }
    let eps = net_a.radius.max(net_b.radius);
    let centers = net_a
        .centers
        .iter()
        .flat_map(|a| net_b.centers.iter().map(move |b| a.try_mul(b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EpsilonNet {
        centers,
        sources: Vec::new(),
        radius: eps * (norm_a + norm_b + eps),
        covering_certified: false,
    })
}
