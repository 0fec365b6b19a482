//! Workloads shared by the benchmarks.

use recur_core::algebra::c64;
use recur_core::{AlgebraElement, DynamicalSystem, MeasureSemigroup};

pub fn rotation(q: usize) -> DynamicalSystem {
    DynamicalSystem::rotation(1, q, MeasureSemigroup::naturals()).expect("valid rotation")
}

/// `I/2 + (V + V*)/4`, positive with trace 1/2.
pub fn cosine_element(sys: &DynamicalSystem) -> AlgebraElement {
    let v = sys.element("V").expect("rotation names V");
    let id = AlgebraElement::identity(sys.shape());
    &id.scale(c64(0.5, 0.0)) + &(v + &v.adjoint()).scale(c64(0.25, 0.0))
}

pub fn cyclic_shift(n: usize) -> DynamicalSystem {
    let map = (0..n).map(|x| (x + 1) % n).collect();
    DynamicalSystem::classical(map, vec![1.0 / n as f64; n], MeasureSemigroup::naturals())
        .expect("valid shift")
}
