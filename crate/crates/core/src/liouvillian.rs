//! Lindblad generator, steady states and time propagation.
//!
//! Density matrices are vectorized column-major: `vec(ρ)[i + d·j] = ρ_{ij}`,
//! so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`. The generator is
//!
//! ```text
//! Lρ = −i[H, ρ] + (κ/2) D[â]ρ + (γ_g/2) D[σ₋]ρ + (γ_d/2) D[σ₊σ₋]ρ,
//! D[o]ρ = 2 o ρ o† − o†o ρ − ρ o†o.
//! ```
//!
//! With this prefactor convention the field amplitude decays at κ/2 and the
//! photon number at κ.

use std::sync::Once;

use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{cavity_annihilator, spin_lowering, Basis, Operator, Spin};
use crate::model::{hamiltonian, SystemParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default bound on `‖L ρ_s‖₂` accepted from the steady-state solve.
pub const STEADY_STATE_RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Density matrix on a [`Basis`].
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Basis,
    elements: Mat<Complex64>,
}

impl DensityMatrix {
    /// `|n, σ⟩⟨n, σ|`.
    pub fn pure(basis: Basis, n: usize, spin: Spin) -> Result<Self> {
        let idx = basis.index(n, spin).ok_or_else(|| {
            Error::InvalidArgument(format!("photon number {n} exceeds n_max = {}", basis.n_max()))
        })?;
        let d = basis.dim();
        let mut elements = Mat::zeros(d, d);
        elements[(idx, idx)] = ONE;
        Ok(Self { basis, elements })
    }

    /// `|ψ⟩⟨ψ|` of a normalized amplitude vector.
    pub fn from_ket(basis: Basis, ket: &[Complex64]) -> Result<Self> {
        let d = basis.dim();
        if ket.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: ket.len() });
        }
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let elements = Mat::from_fn(d, d, |i, j| ket[i] * ket[j].conj() / norm);
        Ok(Self { basis, elements })
    }

    /// Validates Hermiticity, unit trace and positivity to the given tolerances.
    pub fn from_matrix(basis: Basis, elements: Mat<Complex64>) -> Result<Self> {
        let d = basis.dim();
        for found in [elements.nrows(), elements.ncols()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        let rho = Self { basis, elements };
        rho.check(1e-10, 1e-10, -1e-8)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(basis: Basis, elements: Mat<Complex64>) -> Self {
        Self { basis, elements }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn elements(&self) -> &Mat<Complex64> {
        &self.elements
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.basis.dim()).map(|i| self.elements[(i, i)]).sum()
    }

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

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.hermitian_part())
            .first()
            .copied()
            .unwrap_or(f64::NAN)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: other.basis.dim(),
            });
        }
        let diff = &self.elements - &other.elements;
        let d = self.basis.dim();
        let herm = Mat::from_fn(d, d, |i, j| (diff[(i, j)] + diff[(j, i)].conj()) * 0.5);
        Ok(0.5 * hermitian_eigenvalues(&herm).iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Largest element-wise modulus of `ρ − σ`.
    pub fn max_abs_difference(&self, other: &DensityMatrix) -> f64 {
        let d = self.basis.dim();
        let mut m = 0.0_f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.elements[(i, j)] - other.elements[(i, j)]).norm());
            }
        }
        m
    }

    /// Checks Hermiticity, trace and minimum eigenvalue against the bounds.
    pub fn check(&self, hermiticity: f64, trace: f64, min_eigenvalue: f64) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > hermiticity {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > trace {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let lam = self.min_eigenvalue();
        if lam < min_eigenvalue {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {lam:.3e}"
            )));
        }
        Ok(())
    }

    pub fn vectorize(&self) -> Vec<Complex64> {
        let d = self.basis.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.elements[(i, j)]);
            }
        }
        v
    }

    pub(crate) fn from_vectorized(basis: Basis, v: &[Complex64]) -> Self {
        let d = basis.dim();
        debug_assert_eq!(v.len(), d * d);
        Self { basis, elements: Mat::from_fn(d, d, |i, j| v[i + d * j]) }
    }

    fn hermitian_part(&self) -> Mat<Complex64> {
        let d = self.basis.dim();
        Mat::from_fn(d, d, |i, j| (self.elements[(i, j)] + self.elements[(j, i)].conj()) * 0.5)
    }
}

pub(crate) fn hermitian_eigenvalues(m: &Mat<Complex64>) -> Vec<f64> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .expect("self-adjoint eigensolver converges on finite input")
}

/// Sparse generator acting on column-vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    basis: Basis,
    matrix: SparseColMat<usize, Complex64>,
    rows: RowMajor,
}

/// Row-compressed copy of the generator for repeated products.
#[derive(Debug, Clone)]
struct RowMajor {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl RowMajor {
    fn from_triplets(n: usize, triplets: &[Triplet<usize, usize, Complex64>]) -> Self {
        // triplets arrive with duplicates; reuse the column-major build for summation
        let csc = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, triplets)
            .expect("triplet indices are in range");
        let csr = csc.to_row_major().expect("allocation");
        let sym = csr.symbolic();
        Self {
            row_ptr: sym.row_ptr().to_vec(),
            col_idx: sym.col_idx().to_vec(),
            values: csr.val().to_vec(),
        }
    }

    #[inline]
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (row, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
            let mut acc = ZERO;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }
}

impl Superoperator {
    fn from_triplets(basis: Basis, triplets: Vec<Triplet<usize, usize, Complex64>>) -> Self {
        let n = basis.dim() * basis.dim();
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
            .expect("triplet indices are in range");
        let rows = RowMajor::from_triplets(n, &triplets);
        Self { basis, matrix, rows }
    }

    /// The zero generator (no dynamics).
    pub fn zero(basis: Basis) -> Self {
        Self::from_triplets(basis, Vec::new())
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &SparseColMat<usize, Complex64> {
        &self.matrix
    }

    /// Vectorized dimension `dim²`.
    pub fn size(&self) -> usize {
        self.basis.dim() * self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.val().len()
    }

    /// `y = L x` on vectorized states.
    pub fn apply_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.size());
        assert_eq!(y.len(), self.size());
        self.rows.apply(x, y);
    }

    /// `L ρ` as a matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Mat<Complex64>> {
        if rho.basis() != self.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: rho.basis().dim(),
            });
        }
        let x = rho.vectorize();
        let mut y = vec![ZERO; x.len()];
        self.rows.apply(&x, &mut y);
        let d = self.basis.dim();
        Ok(Mat::from_fn(d, d, |i, j| y[i + d * j]))
    }

    /// `‖L ρ‖₂` of the vectorized product.
    pub fn residual_norm(&self, rho: &DensityMatrix) -> f64 {
        let x = rho.vectorize();
        let mut y = vec![ZERO; x.len()];
        self.rows.apply(&x, &mut y);
        y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Densified generator, for eigenvalue checks on small truncations.
    pub fn to_dense(&self) -> Mat<Complex64> {
        self.matrix.to_dense()
    }

    /// Eigenvalues of the generator via a dense solve.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        self.to_dense()
            .eigenvalues()
            .map_err(|e| Error::UnsupportedConfiguration(format!("eigensolver failed: {e:?}")))
    }
}

/// Appends `scale · (left ⊗ right)` skipping structural zeros.
fn push_kron(
    out: &mut Vec<Triplet<usize, usize, Complex64>>,
    scale: Complex64,
    left: &Mat<Complex64>,
    right: &Mat<Complex64>,
) {
    let d = right.nrows();
    let nonzeros = |m: &Mat<Complex64>| {
        let mut v = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z != ZERO {
                    v.push((i, j, z));
                }
            }
        }
        v
    };
    let right_nz = nonzeros(right);
    for (li, lj, lv) in nonzeros(left) {
        for &(ri, rj, rv) in &right_nz {
            out.push(Triplet::new(li * d + ri, lj * d + rj, scale * lv * rv));
        }
    }
}

fn push_dissipator(
    out: &mut Vec<Triplet<usize, usize, Complex64>>,
    rate: f64,
    op: &Operator,
    identity: &Mat<Complex64>,
) {
    if rate == 0.0 {
        return;
    }
    let c = op.elements();
    let d = c.nrows();
    let c_conj = Mat::from_fn(d, d, |i, j| c[(i, j)].conj());
    let cdc = c.adjoint() * c;
    let cdc_t = cdc.transpose().to_owned();
    let half = Complex64::new(rate / 2.0, 0.0);
    push_kron(out, half * 2.0, &c_conj, c);
    push_kron(out, -half, identity, &cdc);
    push_kron(out, -half, &cdc_t, identity);
}

/// Lindblad generator for the given parameters on the truncated basis.
pub fn build_liouvillian(params: &SystemParams, basis: Basis) -> Superoperator {
    let h = hamiltonian(params, basis);
    let d = basis.dim();
    let identity = Mat::<Complex64>::identity(d, d);
    let mut triplets = Vec::new();

    let minus_i = Complex64::new(0.0, -1.0);
    push_kron(&mut triplets, minus_i, &identity, h.elements());
    push_kron(&mut triplets, -minus_i, &h.elements().transpose().to_owned(), &identity);

    let a = cavity_annihilator(basis);
    let sm = spin_lowering(basis);
    let dephasing = &sm.adjoint() * &sm;
    push_dissipator(&mut triplets, params.kappa, &a, &identity);
    push_dissipator(&mut triplets, params.gamma_g, &sm, &identity);
    push_dissipator(&mut triplets, params.gamma_d, &dephasing, &identity);

    Superoperator::from_triplets(basis, triplets)
}

/// Steady state with the default residual bound.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    steady_state_with_tolerance(l, STEADY_STATE_RESIDUAL_TOLERANCE)
}

/// Solves `L ρ = 0` with the first row replaced by the trace constraint.
pub fn steady_state_with_tolerance(l: &Superoperator, tolerance: f64) -> Result<DensityMatrix> {
    // each solve stays on its calling thread; sweeps parallelize across points
    static SEQUENTIAL: Once = Once::new();
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));

    let basis = l.basis();
    let d = basis.dim();
    let n = d * d;

    let m = l.matrix();
    let sym = m.symbolic();
    let (col_ptr, row_idx, vals) = (sym.col_ptr(), sym.row_idx(), m.val());
    let mut triplets = Vec::with_capacity(vals.len() + d);
    for col in 0..n {
        for k in col_ptr[col]..col_ptr[col + 1] {
            let row = row_idx[k];
            if row != 0 {
                triplets.push(Triplet::new(row, col, vals[k]));
            }
        }
    }
    for i in 0..d {
        triplets.push(Triplet::new(0, i * (d + 1), ONE));
    }
    let system = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .expect("triplet indices are in range");
    let system_norm = column_norm_1(&system);

    let degenerate = |condition: f64, residual: f64| Error::DegenerateSteadyState { condition, residual };
    let lu = system.sp_lu().map_err(|_| degenerate(f64::INFINITY, f64::NAN))?;

    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(0, 0)] = ONE;
    let x = faer::prelude::Solve::solve(&lu, &rhs);
    let raw: Vec<Complex64> = (0..n).map(|i| x[(i, 0)]).collect();
    let x_norm: f64 = raw.iter().map(|z| z.norm()).sum();
    // ‖A‖₁‖x‖₁/‖b‖₁ bounds cond₁(A) from below
    let condition = system_norm * x_norm;
    if !raw.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(degenerate(f64::INFINITY, f64::NAN));
    }

    let unsym = DensityMatrix::from_vectorized(basis, &raw);
    let herm = unsym.hermitian_part();
    let trace: Complex64 = (0..d).map(|i| herm[(i, i)]).sum();
    let rho = DensityMatrix::from_matrix_unchecked(
        basis,
        Mat::from_fn(d, d, |i, j| herm[(i, j)] / trace.re),
    );
    let residual = l.residual_norm(&rho);
    if !(residual <= tolerance) {
        return Err(degenerate(condition, residual));
    }
    Ok(rho)
}

fn column_norm_1(m: &SparseColMat<usize, Complex64>) -> f64 {
    let sym = m.symbolic();
    let col_ptr = sym.col_ptr();
    let vals = m.val();
    (0..m.ncols())
        .map(|c| vals[col_ptr[c]..col_ptr[c + 1]].iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Fixed-step integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSettings {
    /// Initial step in units of 1/κ.
    pub step: f64,
    /// Accepted max element-wise change between successive halvings.
    pub tolerance: f64,
    /// Halvings attempted before giving up.
    pub max_halvings: u32,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self { step: 1e-3, tolerance: 1e-8, max_halvings: 8 }
    }
}

/// Propagates `ρ₀` under `dρ/dt = Lρ`, returning the state at each time.
///
/// The trajectory is computed with classical RK4 at step `h` and at `h/2` on
/// the same output grid, and the finer one is accepted once the two agree
/// element-wise to the tolerance; otherwise `h` is halved and both rerun.
pub fn propagate(
    rho0: &DensityMatrix,
    l: &Superoperator,
    times: &[f64],
    settings: &PropagationSettings,
) -> Result<Vec<DensityMatrix>> {
    if rho0.basis() != l.basis() {
        return Err(Error::DimensionMismatch {
            expected: l.basis().dim(),
            found: rho0.basis().dim(),
        });
    }
    validate_times(times)?;
    if !(settings.step > 0.0) || !(settings.tolerance > 0.0) {
        return Err(Error::InvalidArgument("step and tolerance must be positive".into()));
    }

    let x0 = rho0.vectorize();
    let mut step = settings.step;
    for _ in 0..=settings.max_halvings {
        // the fine run takes exactly twice the coarse substeps in every interval
        let coarse = integrate_rk4(l, &x0, times, 2.0 * step, 1);
        let fine = integrate_rk4(l, &x0, times, 2.0 * step, 2);
        let change = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max);
        let finite = fine.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite && change < settings.tolerance {
            let basis = l.basis();
            return Ok(fine.iter().map(|v| DensityMatrix::from_vectorized(basis, v)).collect());
        }
        step /= 2.0;
    }
    Err(Error::Stiffness { step: 2.0 * step })
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidArgument("time grid is empty".into())),
        Some(&t0) if !(t0 >= 0.0) => {
            return Err(Error::InvalidArgument(format!("times must start at t ≥ 0, got {t0}")))
        }
        _ => {}
    }
    if times.windows(2).any(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and ascending".into()));
    }
    Ok(())
}

/// RK4 from t = 0; each output interval is split into `refine` times the
/// fewest equal substeps no longer than `max_step`.
fn integrate_rk4(
    l: &Superoperator,
    x0: &[Complex64],
    times: &[f64],
    max_step: f64,
    refine: usize,
) -> Vec<Vec<Complex64>> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut k = [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]];
    let mut tmp = vec![ZERO; n];
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / max_step - 1e-9).ceil().max(1.0) as usize * refine;
            let h = span / steps as f64;
            for _ in 0..steps {
                rk4_step(l, &mut x, h, &mut k, &mut tmp);
            }
        }
        t = target;
        out.push(x.clone());
    }
    out
}

#[inline]
fn rk4_step(
    l: &Superoperator,
    x: &mut [Complex64],
    h: f64,
    k: &mut [Vec<Complex64>; 4],
    tmp: &mut [Complex64],
) {
    let [k1, k2, k3, k4] = k;
    l.rows.apply(x, k1);
    for i in 0..x.len() {
        tmp[i] = x[i] + k1[i] * (0.5 * h);
    }
    l.rows.apply(tmp, k2);
    for i in 0..x.len() {
        tmp[i] = x[i] + k2[i] * (0.5 * h);
    }
    l.rows.apply(tmp, k3);
    for i in 0..x.len() {
        tmp[i] = x[i] + k3[i] * h;
    }
    l.rows.apply(tmp, k4);
    let sixth = h / 6.0;
    for i in 0..x.len() {
        x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
    }
}
