//! Discrete measure semigroups with counting measure and their Folner windows.
//!
//! Every built-in semigroup is abelian and cancellative, the sigma-algebra is
//! the full power set and the measure is counting measure, so right
//! invariance `mu(Vg) = mu(V)` and the measurability side conditions on
//! translates hold trivially. Folner nets are sequences indexed by `N >= 1`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported lattice rank.
pub const MAX_LATTICE_DIM: usize = 4;

/// An element of a built-in semigroup: an integer or an integer tuple.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    dim: u8,
    coords: [i64; MAX_LATTICE_DIM],
}

impl Element {
    pub const fn scalar(n: i64) -> Self {
        Element {
            dim: 1,
            coords: [n, 0, 0, 0],
        }
    }

    pub fn tuple(values: &[i64]) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_LATTICE_DIM {
            return Err(Error::Argument(format!(
                "element arity must be in 1..={MAX_LATTICE_DIM}, got {}",
                values.len()
            )));
        }
        let mut coords = [0; MAX_LATTICE_DIM];
        coords[..values.len()].copy_from_slice(values);
        Ok(Element {
            dim: values.len() as u8,
            coords,
        })
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn arity(&self) -> usize {
        self.dim as usize
    }

    pub fn as_scalar(&self) -> Option<i64> {
        (self.dim == 1).then_some(self.coords[0])
    }

    fn map2(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        let mut out = *self;
        for i in 0..self.arity() {
            out.coords[i] = f(self.coords[i], other.coords[i]);
        }
        out
    }
}

impl From<i64> for Element {
    fn from(n: i64) -> Self {
        Element::scalar(n)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_scalar() {
            Some(n) => write!(f, "{n}"),
            None => {
                let parts: Vec<String> = self.coords().iter().map(i64::to_string).collect();
                write!(f, "({})", parts.join(" "))
            }
        }
    }
}

/// Semigroup descriptor, as it appears in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SemigroupKind {
    /// `{1, 2, 3, ...}` under addition.
    Naturals,
    Integers,
    Lattice {
        d: usize,
    },
    Cyclic {
        n: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureSemigroup {
    kind: SemigroupKind,
}

impl MeasureSemigroup {
    pub fn new(kind: SemigroupKind) -> Result<Self> {
        match kind {
            SemigroupKind::Lattice { d } if d == 0 || d > MAX_LATTICE_DIM => Err(Error::Argument(
                format!("lattice rank must be in 1..={MAX_LATTICE_DIM}, got {d}"),
            )),
            SemigroupKind::Cyclic { n: 0 } => {
                Err(Error::Argument("cyclic group order must be >= 1".into()))
            }
            _ => Ok(MeasureSemigroup { kind }),
        }
    }

    pub fn naturals() -> Self {
        MeasureSemigroup {
            kind: SemigroupKind::Naturals,
        }
    }

    pub fn integers() -> Self {
        MeasureSemigroup {
            kind: SemigroupKind::Integers,
        }
    }

    pub fn lattice(d: usize) -> Result<Self> {
        Self::new(SemigroupKind::Lattice { d })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(SemigroupKind::Cyclic { n })
    }

    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        match self.kind {
            SemigroupKind::Lattice { d } => d,
            _ => 1,
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        if g.arity() != self.arity() {
            return false;
        }
        let x = g.coords[0];
        match self.kind {
            SemigroupKind::Naturals => x >= 1,
            SemigroupKind::Cyclic { n } => x >= 0 && (x as u64) < n,
            SemigroupKind::Integers | SemigroupKind::Lattice { .. } => true,
        }
    }

    fn check(&self, g: &Element) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "{g} is not an element of {:?}",
                self.kind
            )))
        }
    }

    pub fn identity(&self) -> Option<Element> {
        match self.kind {
            SemigroupKind::Naturals => None,
            SemigroupKind::Lattice { d } => Some(Element::tuple(&vec![0; d]).expect("valid rank")),
            _ => Some(Element::scalar(0)),
        }
    }

    /// The semigroup product `gh` (written additively for every built-in).
    pub fn op(&self, g: &Element, h: &Element) -> Result<Element> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.op_unchecked(g, h))
    }

    fn op_unchecked(&self, g: &Element, h: &Element) -> Element {
        match self.kind {
            SemigroupKind::Cyclic { n } => {
                Element::scalar(((g.coords[0] + h.coords[0]) as u64 % n) as i64)
            }
            _ => g.map2(h, |a, b| a + b),
        }
    }

    /// `g^m`, the `m`-fold product. `m = 0` is rejected because `N` has no
    /// identity; callers apply the `tau_{g^0} = id` convention themselves.
    pub fn pow(&self, g: &Element, m: u64) -> Result<Element> {
        self.check(g)?;
        if m == 0 {
            return Err(Error::Argument("g^0 is not a semigroup element".into()));
        }
        Ok(match self.kind {
            SemigroupKind::Cyclic { n } => {
                Element::scalar(((g.coords[0] as u128 * m as u128) % n as u128) as i64)
            }
            _ => {
                let mut out = *g;
                for c in &mut out.coords[..g.arity()] {
                    *c *= m as i64;
                }
                out
            }
        })
    }

    /// Canonical Folner window `Lambda_N`: `{1..N}`, `{-N..N}`, `{-N..N}^d`,
    /// or the whole cyclic group.
    pub fn folner_window(&self, n: usize) -> Result<FolnerWindow> {
        if n == 0 {
            return Err(Error::Argument("window index N must be >= 1".into()));
        }
        let n_i = n as i64;
        let support = match self.kind {
            SemigroupKind::Naturals => Support::Interval { lo: 1, hi: n_i },
            SemigroupKind::Integers => Support::Interval { lo: -n_i, hi: n_i },
            SemigroupKind::Lattice { d } => Support::Box {
                lo: Element::tuple(&vec![-n_i; d])?,
                hi: Element::tuple(&vec![n_i; d])?,
            },
            SemigroupKind::Cyclic { n } => Support::WholeCyclic { n },
        };
        Ok(FolnerWindow { support, index: n })
    }

    /// Finite window from explicit elements (duplicates collapse).
    pub fn window_from_elements(
        &self,
        elements: impl IntoIterator<Item = Element>,
        index: usize,
    ) -> Result<FolnerWindow> {
        let set: BTreeSet<Element> = elements.into_iter().collect();
        if set.is_empty() {
            return Err(Error::Argument("window must be nonempty".into()));
        }
        if let Some(bad) = set.iter().find(|g| !self.contains(g)) {
            return Err(Error::Structure(format!(
                "{bad} is not an element of {:?}",
                self.kind
            )));
        }
        Ok(FolnerWindow {
            support: Support::Explicit(set),
            index,
        })
    }

    /// `Lambda g` (right) or `g Lambda` (left).
    pub fn translate(
        &self,
        window: &FolnerWindow,
        g: &Element,
        side: Side,
    ) -> Result<FolnerWindow> {
        self.check(g)?;
        let support = match (&window.support, self.kind) {
            (Support::Interval { lo, hi }, SemigroupKind::Naturals | SemigroupKind::Integers) => {
                Support::Interval {
                    lo: lo + g.coords[0],
                    hi: hi + g.coords[0],
                }
            }
            (Support::Box { lo, hi }, SemigroupKind::Lattice { .. }) if lo.arity() == g.arity() => {
                Support::Box {
                    lo: lo.map2(g, |a, b| a + b),
                    hi: hi.map2(g, |a, b| a + b),
                }
            }
            (Support::WholeCyclic { n }, SemigroupKind::Cyclic { n: m }) if *n == m => {
                Support::WholeCyclic { n: *n }
            }
            (Support::Explicit(set), _) => {
                let mut out = BTreeSet::new();
                for x in set {
                    self.check(x)?;
                    out.insert(match side {
                        Side::Right => self.op_unchecked(x, g),
                        Side::Left => self.op_unchecked(g, x),
                    });
                }
                Support::Explicit(out)
            }
            _ => {
                return Err(Error::Structure(format!(
                    "window does not belong to {:?}",
                    self.kind
                )))
            }
        };
        Ok(FolnerWindow {
            support,
            index: window.index,
        })
    }

    /// Right translate `Lambda g`.
    pub fn translate_window(&self, window: &FolnerWindow, g: &Element) -> Result<FolnerWindow> {
        self.translate(window, g, Side::Right)
    }

    /// `mu(Lambda Δ gLambda) / mu(Lambda)` as an exact rational.
    ///
    /// Left translation is injective, so `|gΛ \ Λ| = |Λ \ gΛ|` and the
    /// symmetric difference has `2 #{λ ∈ Λ : gλ ∉ Λ}` elements.
    pub fn folner_ratio(&self, window: &FolnerWindow, g: &Element) -> Result<Ratio<usize>> {
        self.check(g)?;
        let mut escaped = 0usize;
        for x in window.iter() {
            self.check(&x)?;
            if !window.contains(&self.op_unchecked(g, &x)) {
                escaped += 1;
            }
        }
        Ok(Ratio::new(2 * escaped, window.measure()))
    }

    /// Running infima `inf_{beta >= alpha} mu(Λ_β ∩ V)/mu(Λ_β)` over the
    /// supplied prefix; the last entry estimates the lower density of `V`.
    pub fn lower_density(
        &self,
        windows: &[FolnerWindow],
        member: &dyn Fn(&Element) -> bool,
    ) -> Result<Vec<f64>> {
        if windows.is_empty() {
            return Err(Error::Argument(
                "lower density needs at least one window".into(),
            ));
        }
        let densities: Vec<f64> = windows.iter().map(|w| w.density(member)).collect();
        let mut out = densities.clone();
        for i in (0..out.len().saturating_sub(1)).rev() {
            out[i] = out[i].min(out[i + 1]);
        }
        Ok(out)
    }

    /// Uniform sample with coordinates bounded by `bound` in absolute value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> Element {
        let bound = bound.max(1);
        match self.kind {
            SemigroupKind::Naturals => Element::scalar(rng.random_range(1..=bound)),
            SemigroupKind::Integers => Element::scalar(rng.random_range(-bound..=bound)),
            SemigroupKind::Cyclic { n } => Element::scalar(rng.random_range(0..n) as i64),
            SemigroupKind::Lattice { d } => {
                let v: Vec<i64> = (0..d).map(|_| rng.random_range(-bound..=bound)).collect();
                Element::tuple(&v).expect("valid rank")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Support {
    Interval { lo: i64, hi: i64 },
    Box { lo: Element, hi: Element },
    WholeCyclic { n: u64 },
    Explicit(BTreeSet<Element>),
}

/// A finite nonempty subset of a semigroup, tagged with its position in a
/// Folner sequence. Boxes and intervals are kept symbolic so that large
/// windows are never materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerWindow {
    support: Support,
    index: usize,
}

impl FolnerWindow {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Counting measure `mu(Lambda)`.
    pub fn measure(&self) -> usize {
        match &self.support {
            Support::Interval { lo, hi } => (hi - lo + 1) as usize,
            Support::Box { lo, hi } => lo
                .coords()
                .iter()
                .zip(hi.coords())
                .map(|(a, b)| (b - a + 1) as usize)
                .product(),
            Support::WholeCyclic { n } => *n as usize,
            Support::Explicit(set) => set.len(),
        }
    }

    pub fn contains(&self, g: &Element) -> bool {
        match &self.support {
            Support::Interval { lo, hi } => g.as_scalar().is_some_and(|x| *lo <= x && x <= *hi),
            Support::Box { lo, hi } => {
                g.arity() == lo.arity()
                    && g.coords()
                        .iter()
                        .zip(lo.coords().iter().zip(hi.coords()))
                        .all(|(x, (a, b))| a <= x && x <= b)
            }
            Support::WholeCyclic { n } => g.as_scalar().is_some_and(|x| x >= 0 && (x as u64) < *n),
            Support::Explicit(set) => set.contains(g),
        }
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Element> + '_> {
        match &self.support {
            Support::Interval { lo, hi } => Box::new((*lo..=*hi).map(Element::scalar)),
            Support::WholeCyclic { n } => Box::new((0..*n as i64).map(Element::scalar)),
            Support::Explicit(set) => Box::new(set.iter().copied()),
            Support::Box { lo, hi } => Box::new(BoxIter {
                lo: *lo,
                hi: *hi,
                next: Some(*lo),
            }),
        }
    }

    pub fn elements(&self) -> Vec<Element> {
        self.iter().collect()
    }

    /// `mu(Lambda ∩ V) / mu(Lambda)`.
    pub fn density(&self, member: &dyn Fn(&Element) -> bool) -> f64 {
        let hits = self.iter().filter(|g| member(g)).count();
        hits as f64 / self.measure() as f64
    }
}

/// Lexicographic odometer over an integer box.
struct BoxIter {
    lo: Element,
    hi: Element,
    next: Option<Element>,
}

impl Iterator for BoxIter {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        let current = self.next?;
        let mut succ = current;
        let mut i = current.arity();
        self.next = loop {
            if i == 0 {
                break None;
            }
            i -= 1;
            if succ.coords[i] < self.hi.coords[i] {
                succ.coords[i] += 1;
                break Some(succ);
            }
            succ.coords[i] = self.lo.coords[i];
        };
        Some(current)
    }
}
