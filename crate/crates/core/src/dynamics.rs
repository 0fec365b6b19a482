//! Concrete C*-dynamical systems `(A, omega, tau, K)`.
//!
//! Actions are stored as rules (conjugation by generator powers, or a point
//! permutation raised to a power), never as dense matrices of the linear map.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{c64, AlgebraElement, BlockShape, Matrix, TraceState};
use crate::error::{Error, Result};
use crate::sample::random_element;
use crate::semigroup::{Element, MeasureSemigroup, SemigroupKind};

pub type ActionFn = dyn Fn(&Element, &AlgebraElement) -> AlgebraElement + Send + Sync;

#[derive(Clone)]
pub enum Action {
    /// `tau_g(A) = (W^g)* A W^g` where `W^g = prod_i W_i^{g_i}`; negative
    /// exponents use the inverse generator.
    Conjugation {
        generators: Vec<AlgebraElement>,
        inverses: Vec<Option<AlgebraElement>>,
    },
    /// `tau_m(f) = f o T^m` on an algebra of equal-sized blocks indexed by points.
    Permutation {
        map: Vec<usize>,
    },
    Custom(Arc<ActionFn>),
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Conjugation { generators, .. } => f
                .debug_struct("Conjugation")
                .field("generators", &generators.len())
                .finish(),
            Action::Permutation { map } => f.debug_struct("Permutation").field("map", map).finish(),
            Action::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicalSystem {
    trace: TraceState,
    semigroup: MeasureSemigroup,
    action: Action,
    named: BTreeMap<String, AlgebraElement>,
}

/// Shift `U e_k = e_{k-1 mod q}` and clock `V = diag(e^{2 pi i k p/q})`,
/// oriented so that `UV = e^{2 pi i p/q} VU`.
pub fn clock_and_shift(p: i64, q: usize) -> Result<(AlgebraElement, AlgebraElement)> {
    if q == 0 {
        return Err(Error::Argument("q must be >= 1".into()));
    }
    let u = Matrix::from_fn(q, q, |r, c| {
        if r == (c + q - 1) % q {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let v = Matrix::from_fn(q, q, |r, c| {
        if r == c {
            root_of_unity(p * r as i64, q)
        } else {
            c64(0.0, 0.0)
        }
    });
    Ok((
        AlgebraElement::from_matrix(u)?,
        AlgebraElement::from_matrix(v)?,
    ))
}

/// `e^{2 pi i k/q}` with the exponent reduced mod `q` first.
pub fn root_of_unity(k: i64, q: usize) -> num_complex::Complex64 {
    let r = k.rem_euclid(q as i64) as f64 / q as f64;
    num_complex::Complex64::from_polar(1.0, TAU * r)
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // x -> a(b(x))
    b.iter().map(|&x| a[x]).collect()
}

fn permutation_power(map: &[usize], mut k: u64) -> Vec<usize> {
    let mut result: Vec<usize> = (0..map.len()).collect();
    let mut base = map.to_vec();
    while k > 0 {
        if k & 1 == 1 {
            result = compose(&base, &result);
        }
        k >>= 1;
        if k > 0 {
            base = compose(&base, &base);
        }
    }
    result
}

fn invert(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; map.len()];
    for (x, &y) in map.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

fn signed_power(
    base: &AlgebraElement,
    inverse: Option<&AlgebraElement>,
    e: i64,
) -> Result<AlgebraElement> {
    if e >= 0 {
        Ok(base.pow(e as u64))
    } else {
        let inv = inverse.ok_or_else(|| {
            Error::Argument("negative exponent of a non-invertible generator".into())
        })?;
        Ok(inv.pow(e.unsigned_abs()))
    }
}

impl DynamicalSystem {
    /// Rational rotation algebra `M_q` with `tau_n(A) = (U*)^n A U^n` and the
    /// normalized trace.
    pub fn rotation(p: i64, q: usize, semigroup: MeasureSemigroup) -> Result<Self> {
        match semigroup.kind() {
            SemigroupKind::Naturals | SemigroupKind::Integers => {}
            SemigroupKind::Cyclic { n } if n % q as u64 == 0 => {}
            other => {
                return Err(Error::Argument(format!(
                    "rotation system needs N, Z or a cyclic group of order divisible by q, got {other:?}"
                )))
            }
        }
        let (u, v) = clock_and_shift(p, q)?;
        let shape = BlockShape::full(q)?;
        let mut named = BTreeMap::new();
        named.insert("I".to_string(), AlgebraElement::identity(&shape));
        named.insert("U".to_string(), u.clone());
        named.insert("V".to_string(), v);
        Ok(DynamicalSystem {
            trace: TraceState::normalized(shape),
            semigroup,
            action: Action::Conjugation {
                inverses: vec![Some(u.adjoint())],
                generators: vec![u],
            },
            named,
        })
    }

    /// Measure preserving map `T` on `{0..n-1}` as the commutative algebra
    /// `C^n`, with `omega(f) = sum_x p_x f(x)` and `tau_m(f) = f o T^m`.
    pub fn classical(
        permutation: Vec<usize>,
        weights: Vec<f64>,
        semigroup: MeasureSemigroup,
    ) -> Result<Self> {
        let n = permutation.len();
        if n == 0 {
            return Err(Error::Argument(
                "classical system needs at least one point".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &y in &permutation {
            if y >= n || seen[y] {
                return Err(Error::Argument("map is not a bijection of {0..n-1}".into()));
            }
            seen[y] = true;
        }
        if weights.len() != n {
            return Err(Error::Argument(format!(
                "{} weights for {n} points",
                weights.len()
            )));
        }
        let trace = TraceState::from_probability(weights)?;
        let w = trace.weights();
        if let Some(x) = (0..n).find(|&x| (w[permutation[x]] - w[x]).abs() > 1e-12) {
            return Err(Error::Argument(format!(
                "weights are not invariant under the map: p({x}) = {} but p(T({x})) = {}",
                w[x], w[permutation[x]]
            )));
        }
        match semigroup.kind() {
            SemigroupKind::Naturals | SemigroupKind::Integers => {}
            SemigroupKind::Cyclic { n: order } => {
                let id: Vec<usize> = (0..n).collect();
                if permutation_power(&permutation, order) != id {
                    return Err(Error::Argument(format!(
                        "T^{order} is not the identity, so T does not define a Z_{order} action"
                    )));
                }
            }
            other => {
                return Err(Error::Argument(format!(
                    "classical systems support N, Z and cyclic groups, got {other:?}"
                )))
            }
        }
        let shape = trace.shape().clone();
        let mut named = BTreeMap::new();
        named.insert("I".to_string(), AlgebraElement::identity(&shape));
        for x in 0..n {
            let chi = indicator(n, [x].iter());
            named.insert(format!("chi_{x}"), chi);
        }
        Ok(DynamicalSystem {
            trace,
            semigroup,
            action: Action::Permutation { map: permutation },
            named,
        })
    }

    /// Conjugation action by user generators, one per semigroup coordinate.
    /// Commutation and isometry are not assumed; [`verify_system`] checks them.
    pub fn conjugation(
        trace: TraceState,
        semigroup: MeasureSemigroup,
        generators: Vec<AlgebraElement>,
    ) -> Result<Self> {
        if generators.len() != semigroup.arity() {
            return Err(Error::Argument(format!(
                "{} generators for a semigroup of rank {}",
                generators.len(),
                semigroup.arity()
            )));
        }
        if let Some(i) = generators.iter().position(|g| !g.has_shape(trace.shape())) {
            return Err(Error::Structure(format!(
                "generator {i} has the wrong block layout"
            )));
        }
        let needs_inverse = matches!(
            semigroup.kind(),
            SemigroupKind::Integers | SemigroupKind::Lattice { .. }
        );
        let inverses = generators
            .iter()
            .map(|g| {
                if needs_inverse {
                    g.try_inverse().map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut named = BTreeMap::new();
        named.insert("I".to_string(), AlgebraElement::identity(trace.shape()));
        for (i, g) in generators.iter().enumerate() {
            named.insert(format!("W{}", i + 1), g.clone());
        }
        Ok(DynamicalSystem {
            trace,
            semigroup,
            action: Action::Conjugation {
                generators,
                inverses,
            },
            named,
        })
    }

    /// Arbitrary action rule, mainly for engineered failures in tests.
    pub fn custom(trace: TraceState, semigroup: MeasureSemigroup, action: Arc<ActionFn>) -> Self {
        let mut named = BTreeMap::new();
        named.insert("I".to_string(), AlgebraElement::identity(trace.shape()));
        DynamicalSystem {
            trace,
            semigroup,
            action: Action::Custom(action),
            named,
        }
    }

    pub fn trace(&self) -> &TraceState {
        &self.trace
    }

    pub fn shape(&self) -> &BlockShape {
        self.trace.shape()
    }

    pub fn semigroup(&self) -> &MeasureSemigroup {
        &self.semigroup
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn named(&self) -> &BTreeMap<String, AlgebraElement> {
        &self.named
    }

    pub fn element(&self, name: &str) -> Result<&AlgebraElement> {
        self.named
            .get(name)
            .ok_or_else(|| Error::Argument(format!("no element named {name:?}")))
    }

    pub fn register(&mut self, name: impl Into<String>, a: AlgebraElement) -> Result<()> {
        if !a.has_shape(self.shape()) {
            return Err(Error::Structure(
                "element does not belong to the algebra".into(),
            ));
        }
        self.named.insert(name.into(), a);
        Ok(())
    }

    /// Underlying point map of a classical system.
    pub fn point_map(&self) -> Option<&[usize]> {
        match &self.action {
            Action::Permutation { map } => Some(map),
            _ => None,
        }
    }

    /// Characteristic function of `set` in a commutative algebra `C^n`.
    pub fn characteristic(&self, set: &BTreeSet<usize>) -> Result<AlgebraElement> {
        let n = self.shape().block_count();
        if self.shape().dims().iter().any(|&d| d != 1) {
            return Err(Error::Structure(
                "characteristic functions need a commutative algebra".into(),
            ));
        }
        if let Some(bad) = set.iter().find(|&&x| x >= n) {
            return Err(Error::Argument(format!("point {bad} outside 0..{n}")));
        }
        Ok(indicator(n, set.iter()))
    }

    /// `tau_g(A)`.
    pub fn apply(&self, g: &Element, a: &AlgebraElement) -> Result<AlgebraElement> {
        if !self.semigroup.contains(g) {
            return Err(Error::Structure(format!(
                "{g} is not in the acting semigroup"
            )));
        }
        if !a.has_shape(self.shape()) {
            return Err(Error::Structure(
                "element does not belong to the algebra".into(),
            ));
        }
        match &self.action {
            Action::Conjugation {
                generators,
                inverses,
            } => {
                let mut w = AlgebraElement::identity(self.shape());
                for ((gen, inv), &e) in generators.iter().zip(inverses).zip(g.coords()) {
                    w = &w * &signed_power(gen, inv.as_ref(), e)?;
                }
                Ok(&(&w.adjoint() * a) * &w)
            }
            Action::Permutation { map } => {
                let e = g.coords()[0];
                let t = if e >= 0 {
                    permutation_power(map, e as u64)
                } else {
                    permutation_power(&invert(map), e.unsigned_abs())
                };
                let blocks = a.blocks();
                AlgebraElement::from_blocks(t.iter().map(|&y| blocks[y].clone()).collect())
            }
            Action::Custom(f) => {
                let out = f(g, a);
                if !out.has_shape(self.shape()) {
                    return Err(Error::Structure(
                        "custom action changed the block layout".into(),
                    ));
                }
                Ok(out)
            }
        }
    }

    /// `tau_{g^m}(A)`, with `tau_{g^0}(A) = A`.
    pub fn apply_power(&self, g: &Element, m: u64, a: &AlgebraElement) -> Result<AlgebraElement> {
        if m == 0 {
            if !self.semigroup.contains(g) {
                return Err(Error::Structure(format!(
                    "{g} is not in the acting semigroup"
                )));
            }
            return Ok(a.clone());
        }
        let gm = self.semigroup.pow(g, m)?;
        self.apply(&gm, a)
    }
}

fn indicator<'a>(n: usize, points: impl Iterator<Item = &'a usize>) -> AlgebraElement {
    let mut values = vec![c64(0.0, 0.0); n];
    for &x in points {
        values[x] = c64(1.0, 0.0);
    }
    AlgebraElement::from_diagonal(&values).expect("n >= 1")
}

/// Largest observed violation of each axiom over the sampled inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub samples: usize,
    pub tol: f64,
    /// `||tau_g tau_h A - tau_{gh} A||`
    pub homomorphism: f64,
    /// `| ||tau_g A||_omega - ||A||_omega |`
    pub isometry: f64,
    /// `max(0, ||tau_g A|| - ||A||)`
    pub contraction: f64,
    /// `||tau_g(A*) - tau_g(A)*||`
    pub star: f64,
    /// `|omega(AB) - omega(BA)|`
    pub traciality: f64,
}

impl VerificationReport {
    pub fn axioms(&self) -> [(&'static str, f64); 5] {
        [
            ("homomorphism", self.homomorphism),
            ("omega_isometry", self.isometry),
            ("norm_contraction", self.contraction),
            ("star_preservation", self.star),
            ("traciality", self.traciality),
        ]
    }

    pub fn passed(&self) -> bool {
        self.axioms().iter().all(|(_, v)| *v <= self.tol)
    }
}

/// Bound on sampled semigroup coordinates.
const SAMPLE_BOUND: i64 = 20;

#[derive(Default)]
struct Violations([f64; 5]);

impl Violations {
    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a = a.max(b);
        }
        self
    }
}

/// Samples `sample_count` random `(g, h, A, B)` and records the worst
/// violation of each axiom. Deterministic for a given `seed`.
pub fn verify_system(
    sys: &DynamicalSystem,
    sample_count: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    if sample_count == 0 {
        return Err(Error::Argument("sample_count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = sys.shape().clone();
    let samples: Vec<_> = (0..sample_count)
        .map(|_| {
            let g = sys.semigroup.sample(&mut rng, SAMPLE_BOUND);
            let h = sys.semigroup.sample(&mut rng, SAMPLE_BOUND);
            let a = random_element(&shape, &mut rng);
            let b = random_element(&shape, &mut rng);
            (g, h, a, b)
        })
        .collect();
    let omega = &sys.trace;
    let v = samples
        .par_iter()
        .map(|(g, h, a, b)| -> Result<Violations> {
            let ta = sys.apply(g, a)?;
            let tha = sys.apply(g, &sys.apply(h, a)?)?;
            let gh = sys.semigroup.op(g, h)?;
            let t_gh = sys.apply(&gh, a)?;
            let hom = (&tha - &t_gh).op_norm();
            let iso = (omega.seminorm(&ta)? - omega.seminorm(a)?).abs();
            let con = (ta.op_norm() - a.op_norm()).max(0.0);
            let star = (&sys.apply(g, &a.adjoint())? - &ta.adjoint()).op_norm();
            let tr = (omega.eval(&(a * b))? - omega.eval(&(b * a))?).norm();
            Ok(Violations([hom, iso, con, star, tr]))
        })
        .try_reduce(Violations::default, |x, y| Ok(x.merge(y)))?;
    let [homomorphism, isometry, contraction, star, traciality] = v.0;
    Ok(VerificationReport {
        samples: sample_count,
        tol,
        homomorphism,
        isometry,
        contraction,
        star,
        traciality,
    })
}
