//! Truncated Fock ⊗ spin-½ space of the cavity-atom system and its
//! elementary operators.
//!
//! Basis states are ordered n-major with spin up before spin down, so the
//! flat index of `|n, σ⟩` is `2n + σ` with `σ = 0` for up and `1` for down.

use std::ops::{Add, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liouvillian::DensityMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// Truncated product basis `{|n, σ⟩ : 0 ≤ n ≤ n_max, σ ∈ {↑, ↓}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Basis {
    n_max: usize,
}

impl Basis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidArgument(format!(
                "Fock truncation n_max must be at least 1, got {n_max}"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Flat index of `|n, σ⟩`, or `None` above the truncation.
    pub fn index(&self, n: usize, spin: Spin) -> Option<usize> {
        (n <= self.n_max).then(|| 2 * n + spin.offset())
    }

    pub fn state(&self, index: usize) -> Option<(usize, Spin)> {
        if index >= self.dim() {
            return None;
        }
        let spin = if index.is_multiple_of(2) { Spin::Up } else { Spin::Down };
        Some((index / 2, spin))
    }

    /// All basis states in index order.
    pub fn states(&self) -> impl Iterator<Item = (usize, Spin)> + '_ {
        (0..self.dim()).map(move |i| self.state(i).expect("index within dimension"))
    }

    /// Excitation count of `|n, σ⟩`: photons plus one for spin down.
    pub fn excitations(n: usize, spin: Spin) -> usize {
        n + spin.offset()
    }

    /// Basis vector `|n, σ⟩` as a dense amplitude vector.
    pub fn ket(&self, n: usize, spin: Spin) -> Result<Vec<Complex64>> {
        let idx = self.index(n, spin).ok_or_else(|| {
            Error::InvalidArgument(format!("photon number {n} exceeds n_max = {}", self.n_max))
        })?;
        let mut v = vec![ZERO; self.dim()];
        v[idx] = ONE;
        Ok(v)
    }
}

pub fn build_basis(n_max: usize) -> Result<Basis> {
    Basis::new(n_max)
}

/// Dense operator on a [`Basis`].
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Basis,
    elements: Mat<Complex64>,
}

impl Operator {
    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self { basis, elements: Mat::zeros(d, d) }
    }

    pub fn identity(basis: Basis) -> Self {
        let d = basis.dim();
        Self { basis, elements: Mat::identity(d, d) }
    }

    pub fn from_fn(basis: Basis, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let d = basis.dim();
        Self { basis, elements: Mat::from_fn(d, d, f) }
    }

    pub fn from_matrix(basis: Basis, elements: Mat<Complex64>) -> Result<Self> {
        check_square(basis, &elements)?;
        Ok(Self { basis, elements })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn elements(&self) -> &Mat<Complex64> {
        &self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[(row, col)]
    }

    /// Matrix element `⟨bra| O |ket⟩` between basis states.
    pub fn element(&self, bra: (usize, Spin), ket: (usize, Spin)) -> Complex64 {
        match (self.basis.index(bra.0, bra.1), self.basis.index(ket.0, ket.1)) {
            (Some(i), Some(j)) => self.elements[(i, j)],
            _ => ZERO,
        }
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.elements[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis, elements: self.elements.adjoint().to_owned() }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let d = self.basis.dim();
        Self {
            basis: self.basis,
            elements: Mat::from_fn(d, d, |i, j| self.elements[(i, j)] * factor),
        }
    }

    /// `O |ψ⟩` for a dense amplitude vector.
    pub fn apply(&self, ket: &[Complex64]) -> Result<Vec<Complex64>> {
        let d = self.basis.dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: ket.len() });
        }
        Ok((0..d)
            .map(|i| (0..d).map(|j| self.elements[(i, j)] * ket[j]).sum())
            .collect())
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Largest element modulus.
    pub fn max_abs(&self) -> f64 {
        let d = self.basis.dim();
        let mut m = 0.0_f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.elements[(i, j)].norm());
            }
        }
        m
    }

    /// `max |O − O†|` element-wise; zero for a Hermitian operator.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.basis.dim();
        let mut m = 0.0_f64;
        for j in 0..d {
            for i in 0..=j {
                m = m.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        m
    }
}

fn check_square(basis: Basis, m: &Mat<Complex64>) -> Result<()> {
    let d = basis.dim();
    for found in [m.nrows(), m.ncols()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    Ok(())
}

fn assert_same_basis(a: &Operator, b: &Operator) {
    assert_eq!(a.basis, b.basis, "operators live on different bases");
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_same_basis(self, rhs);
        Operator { basis: self.basis, elements: &self.elements + &rhs.elements }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_same_basis(self, rhs);
        Operator { basis: self.basis, elements: &self.elements - &rhs.elements }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_same_basis(self, rhs);
        Operator { basis: self.basis, elements: &self.elements * &rhs.elements }
    }
}

/// Cavity annihilation operator `â|n, σ⟩ = √n |n−1, σ⟩`.
pub fn cavity_annihilator(basis: Basis) -> Operator {
    let mut a = Operator::zeros(basis);
    for n in 1..=basis.n_max() {
        for spin in [Spin::Up, Spin::Down] {
            let (Some(row), Some(col)) = (basis.index(n - 1, spin), basis.index(n, spin)) else {
                unreachable!()
            };
            a.set(row, col, Complex64::new((n as f64).sqrt(), 0.0));
        }
    }
    a
}

/// Spin lowering operator `σ₋ = Σₙ |n, ↑⟩⟨n, ↓|`.
///
/// Dissipation through this operator transfers population from ↓ to ↑.
pub fn spin_lowering(basis: Basis) -> Operator {
    let mut s = Operator::zeros(basis);
    for n in 0..=basis.n_max() {
        let (Some(up), Some(down)) = (basis.index(n, Spin::Up), basis.index(n, Spin::Down)) else {
            unreachable!()
        };
        s.set(up, down, ONE);
    }
    s
}

/// `Tr(O ρ)`.
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<Complex64> {
    if op.basis() != rho.basis() {
        return Err(Error::DimensionMismatch {
            expected: op.basis().dim(),
            found: rho.basis().dim(),
        });
    }
    let d = op.basis().dim();
    let r = rho.elements();
    let o = op.elements();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += o[(i, k)] * r[(k, i)];
        }
    }
    Ok(acc)
}
