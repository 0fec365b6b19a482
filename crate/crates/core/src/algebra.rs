//! Finite-dimensional C*-algebras as direct sums of full matrix algebras.
//!
//! An element is an ordered list of square complex blocks. The C*-norm is the
//! largest singular value over all blocks, and the tracial states are exactly
//! the weighted sums of unnormalized block traces.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// Default tolerance for numerical equality assertions.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// Block dimensions of a direct sum `M_{d_1} + ... + M_{d_m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockShape(Vec<usize>);

impl BlockShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Structure("algebra needs at least one block".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Structure("block dimensions must be positive".into()));
        }
        Ok(BlockShape(dims))
    }

    /// The full matrix algebra `M_d`.
    pub fn full(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    /// The commutative algebra `C^n`, i.e. diagonal `n x n` matrices.
    pub fn diagonal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structure("diagonal algebra needs n >= 1".into()));
        }
        Ok(BlockShape(vec![1; n]))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn block_count(&self) -> usize {
        self.0.len()
    }

    /// Dimension of the Hilbert space the algebra acts on.
    pub fn total_dim(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Matrix literal for one block: rows of `[re, im]` pairs.
pub type BlockLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    blocks: Vec<Matrix>,
}

impl AlgebraElement {
    pub fn from_blocks(blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structure("element needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if !b.is_square() || b.nrows() == 0 {
                return Err(Error::Structure(format!(
                    "block {i} is {}x{}, expected a nonempty square matrix",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(AlgebraElement { blocks })
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        Self::from_blocks(vec![m])
    }

    /// Element of `C^n` with the given diagonal values (one 1x1 block each).
    pub fn from_diagonal(values: &[C64]) -> Result<Self> {
        Self::from_blocks(
            values
                .iter()
                .map(|&v| Matrix::from_element(1, 1, v))
                .collect(),
        )
    }

    /// Parses row-major `[re, im]` literals, one per block.
    pub fn from_literal(blocks: &[BlockLiteral]) -> Result<Self> {
        let mut out = Vec::with_capacity(blocks.len());
        for (i, rows) in blocks.iter().enumerate() {
            let n = rows.len();
            if n == 0 {
                return Err(Error::Structure(format!("block {i} is empty")));
            }
            if let Some(bad) = rows.iter().position(|r| r.len() != n) {
                return Err(Error::Structure(format!(
                    "block {i} row {bad} has {} entries, expected {n}",
                    rows[bad].len()
                )));
            }
            out.push(Matrix::from_fn(n, n, |r, c| {
                let [re, im] = rows[r][c];
                c64(re, im)
            }));
        }
        Self::from_blocks(out)
    }

    pub fn to_literal(&self) -> Vec<BlockLiteral> {
        self.blocks
            .iter()
            .map(|b| {
                (0..b.nrows())
                    .map(|r| {
                        (0..b.ncols())
                            .map(|c| [b[(r, c)].re, b[(r, c)].im])
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn scalar(shape: &BlockShape, value: C64) -> Self {
        AlgebraElement {
            blocks: shape
                .dims()
                .iter()
                .map(|&d| Matrix::from_diagonal_element(d, d, value))
                .collect(),
        }
    }

    pub fn identity(shape: &BlockShape) -> Self {
        Self::scalar(shape, c64(1.0, 0.0))
    }

    pub fn zero(shape: &BlockShape) -> Self {
        Self::scalar(shape, c64(0.0, 0.0))
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Matrix> {
        self.blocks
    }

    pub fn shape(&self) -> BlockShape {
        BlockShape(self.blocks.iter().map(|b| b.nrows()).collect())
    }

    pub fn has_shape(&self, shape: &BlockShape) -> bool {
        self.blocks.len() == shape.block_count()
            && self
                .blocks
                .iter()
                .zip(shape.dims())
                .all(|(b, &d)| b.nrows() == d)
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }

    fn check_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "{op}: block dims {:?} vs {:?}",
                self.shape().dims(),
                other.shape().dims()
            )))
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Matrix, &Matrix) -> Matrix) -> Self {
        AlgebraElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "mul")?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn scale(&self, c: C64) -> Self {
        AlgebraElement {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        AlgebraElement {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        AlgebraElement {
            blocks: self
                .blocks
                .iter()
                .map(|b| (b + b.adjoint()) * c64(0.5, 0.0))
                .collect(),
        }
    }

    /// `A^k` by repeated squaring; `A^0` is the identity.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Self::identity(&self.shape());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn try_inverse(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.clone()
                    .try_inverse()
                    .ok_or_else(|| Error::Argument("element is not invertible".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement { blocks })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other, "max_abs_diff")?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    /// C*-norm: the largest singular value over all blocks, taken as the square
    /// root of the top eigenvalue of `A*A`.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(block_op_norm).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let h = (b + b.adjoint()) * c64(0.5, 0.0);
                if h.nrows() == 1 {
                    h[(0, 0)].re
                } else {
                    h.symmetric_eigenvalues().min()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Self-adjoint within `tol` in operator norm, with spectrum `>= -tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        let skew = &self.adjoint() - self;
        skew.op_norm() <= tol && self.min_hermitian_eigenvalue() >= -tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let shape = self.shape();
        let g = &self.adjoint() * self;
        g.max_abs_diff(&Self::identity(&shape))
            .map(|d| d <= tol)
            .unwrap_or(false)
    }
}

fn block_op_norm(b: &Matrix) -> f64 {
    if b.nrows() == 1 {
        return b[(0, 0)].norm();
    }
    let gram = b.adjoint() * b;
    gram.symmetric_eigenvalues().max().max(0.0).sqrt()
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;

    /// Panics on mismatched block layouts; use [`AlgebraElement::try_add`] otherwise.
    fn add(self, rhs: Self) -> AlgebraElement {
        self.try_add(rhs).expect("block layouts differ")
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: Self) -> AlgebraElement {
        self.try_sub(rhs).expect("block layouts differ")
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: Self) -> AlgebraElement {
        self.try_mul(rhs).expect("block layouts differ")
    }
}

/// Ordered product `x_0 x_1 ... x_k`.
pub fn product(factors: &[AlgebraElement]) -> Result<AlgebraElement> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Argument("empty product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, x| acc.try_mul(x))
}

/// Right-hand side of the telescoping identity
/// `prod a_j - prod b_j = sum_j (prod_{l<j} a_l)(a_j - b_j)(prod_{l>j} b_l)`.
pub fn telescoping_expansion(a: &[AlgebraElement], b: &[AlgebraElement]) -> Result<AlgebraElement> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Argument(format!(
            "telescoping expansion needs equal nonempty lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let shape = a[0].shape();
    let id = AlgebraElement::identity(&shape);
    let mut total = AlgebraElement::zero(&shape);
    let mut left = id.clone();
    for j in 0..a.len() {
        let right = b[j + 1..]
            .iter()
            .try_fold(id.clone(), |acc, x| acc.try_mul(x))?;
        let term = left.try_mul(&a[j].try_sub(&b[j])?)?.try_mul(&right)?;
        total = total.try_add(&term)?;
        left = left.try_mul(&a[j])?;
    }
    Ok(total)
}

/// Tracial state `omega(A) = sum_i w_i tr(A_i)` with `sum_i w_i d_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    shape: BlockShape,
    weights: Vec<f64>,
}

impl TraceState {
    pub fn new(shape: BlockShape, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != shape.block_count() {
            return Err(Error::Structure(format!(
                "{} weights for {} blocks",
                weights.len(),
                shape.block_count()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Argument(
                "trace weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights
            .iter()
            .zip(shape.dims())
            .map(|(w, &d)| w * d as f64)
            .sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::Argument(format!(
                "trace is not unital: omega(I) = {total}"
            )));
        }
        Ok(TraceState { shape, weights })
    }

    /// Normalized trace `tr(A)/d` on a direct sum of total dimension `d`.
    pub fn normalized(shape: BlockShape) -> Self {
        let w = 1.0 / shape.total_dim() as f64;
        let weights = vec![w; shape.block_count()];
        TraceState { shape, weights }
    }

    /// `omega(f) = sum_x p_x f(x)` on `C^n`.
    pub fn from_probability(weights: Vec<f64>) -> Result<Self> {
        Self::new(BlockShape::diagonal(weights.len())?, weights)
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check(&self, a: &AlgebraElement) -> Result<()> {
        if a.has_shape(&self.shape) {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "element dims {:?} do not match state dims {:?}",
                a.shape().dims(),
                self.shape.dims()
            )))
        }
    }

    pub fn eval(&self, a: &AlgebraElement) -> Result<C64> {
        self.check(a)?;
        Ok(a.blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| b.trace() * w)
            .sum())
    }

    /// GNS seminorm `sqrt(omega(A*A))`.
    ///
    /// `omega(A*A)` is evaluated as the weighted sum of squared Frobenius
    /// norms, which is real and nonnegative without rounding residue.
    pub fn seminorm(&self, a: &AlgebraElement) -> Result<f64> {
        self.check(a)?;
        let s: f64 = a
            .blocks
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| w * b.norm_squared())
            .sum();
        Ok(s.max(0.0).sqrt())
    }

    /// `||a - b||_omega` without materializing the difference.
    pub fn distance(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let s: f64 = a
            .blocks
            .iter()
            .zip(&b.blocks)
            .zip(&self.weights)
            .map(|((x, y), &w)| {
                w * x
                    .iter()
                    .zip(y.iter())
                    .map(|(p, q)| (p - q).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        Ok(s.sqrt())
    }
}

/// Checks `|omega(ABC)| <= ||A|| ||B||_omega ||C|| + tol`.
pub fn verify_trace_inequality(
    omega: &TraceState,
    a: &AlgebraElement,
    b: &AlgebraElement,
    c: &AlgebraElement,
    tol: f64,
) -> Result<bool> {
    let abc = a.try_mul(b)?.try_mul(c)?;
    let lhs = omega.eval(&abc)?.norm();
    let rhs = a.op_norm() * omega.seminorm(b)? * c.op_norm();
    Ok(lhs <= rhs + tol)
}
