//! Finite-dimensional operator algebra.
//!
//! Operators are dense complex `d×d` matrices. Density operators, projectors
//! and spectral decompositions are thin validated wrappers around
//! [`Operator`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Shorthand complex constructor.
pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical tolerances shared by the validation routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub psd: f64,
    pub trace: f64,
    pub zero: f64,
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { herm: 1e-10, psd: 1e-10, trace: 1e-10, zero: 1e-12, degeneracy: 1e-9 }
    }
}

/// A linear operator on a `d`-dimensional Hilbert space.
#[derive(Clone, PartialEq)]
pub struct Operator {
    m: CMatrix,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(d={}){}", self.dim(), self.m)
    }
}

impl Operator {
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidShape(format!("{}x{} is not a non-empty square matrix", m.nrows(), m.ncols())));
        }
        Ok(Self { m })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidShape("rows are not all of length d".into()));
        }
        Self::from_matrix(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Builds a real operator from row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(d >= 1, "operator dimension must be at least 1");
        Self { m: CMatrix::from_fn(d, d, f) }
    }

    pub fn zeros(d: usize) -> Self {
        Self::from_fn(d, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(d: usize) -> Self {
        assert!(d >= 1, "operator dimension must be at least 1");
        Self { m: CMatrix::identity(d, d) }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { c(diag[i], 0.0) } else { c(0.0, 0.0) })
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch { expected: ket.len(), found: bra.len() });
        }
        Self::from_matrix(ket * bra.adjoint())
    }

    /// Matrix unit `|j⟩⟨k|`.
    pub fn unit(d: usize, j: usize, k: usize) -> Self {
        Self::from_fn(d, |r, s| if r == j && s == k { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    /// Spin projection `S_z = (ħ/2)σ_z` in the `{|+⟩, |−⟩}` basis.
    pub fn spin_z(hbar: f64) -> Self {
        Self::diagonal(&[0.5 * hbar, -0.5 * hbar])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { m: &self.m * z }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm distance `max_ij |A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self { m: (&self.m + self.m.adjoint()) * c(0.5, 0.0) }
    }

    /// Column-stacking vectorization: entry `(i, j)` lands at index `i + j·d`.
    pub fn vectorize(&self) -> DVector<C64> {
        DVector::from_column_slice(self.m.as_slice())
    }

    /// Inverse of [`Operator::vectorize`].
    pub fn from_vectorized(d: usize, v: &[C64]) -> Result<Self> {
        if v.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: v.len() });
        }
        Self::from_matrix(CMatrix::from_column_slice(d, d, v))
    }

    fn check_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// `Tr[self · other]`, without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Result<C64> {
        self.check_dim(other)?;
        let d = self.dim();
        let mut acc = c(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.m[(i, k)] * other.m[(k, i)];
            }
        }
        Ok(acc)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m + &rhs.m }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m - &rhs.m }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { m: &self.m * &rhs.m }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(c(rhs, 0.0))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { m: -&self.m }
    }
}

/// Wire format: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let rows = |f: fn(&C64) -> f64| (0..d).map(|i| (0..d).map(|j| f(&self.m[(i, j)])).collect()).collect();
        OperatorJson { dim: d, re: rows(|z| z.re), im: rows(|z| z.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = OperatorJson::deserialize(de)?;
        let d = raw.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(D::Error::custom(format!("operator entries must be {d}x{d} with dim >= 1")));
        }
        Ok(Operator::from_fn(d, |i, j| c(raw.re[i][j], raw.im[i][j])))
    }
}

/// Hilbert-Schmidt inner product `⟨A|B⟩ = Tr[A†B]`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    a.check_dim(b)?;
    Ok(a.m.iter().zip(b.m.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// A Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    /// Validates with default tolerances, discarding any clipping report.
    pub fn new(op: Operator) -> Result<Self> {
        Ok(validate_density(&op, &Tolerances::default())?.density)
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NormViolation { norm });
        }
        Ok(Self { op: Operator::outer(psi, psi)?.hermitian_part() })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { op: &Operator::identity(d) * (1.0 / d as f64) }
    }

    /// Wraps an operator already known to satisfy the invariants, such as a
    /// convex combination of density operators.
    pub(crate) fn from_trusted(op: Operator) -> Self {
        Self { op }
    }

    /// Convex combination `(1 − w)·self + w·other`, `w ∈ [0, 1]`.
    pub fn mix(&self, other: &DensityOperator, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w} outside [0, 1]")));
        }
        self.op.check_dim(&other.op)?;
        Ok(Self::from_trusted(&(&self.op * (1.0 - w)) + &(&other.op * w)))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Purity `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Eigenvector of the largest eigenvalue, if the state is pure to within
    /// `tol` (`|Tr ρ² − 1| ≤ tol`).
    pub fn pure_state_vector(&self, tol: f64) -> Result<StateVector> {
        let purity = self.purity();
        if (purity - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!("state is mixed (purity {purity})")));
        }
        let eig = SymmetricEigen::new(self.op.m.clone());
        let k = eig.eigenvalues.imax();
        Ok(eig.eigenvectors.column(k).into_owned())
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(de)?;
        DensityOperator::new(op).map_err(serde::de::Error::custom)
    }
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedDensity {
    pub density: DensityOperator,
    /// Total magnitude of negative eigenvalues clipped to zero before
    /// renormalizing. Zero when the input was used unchanged.
    pub clipped: f64,
}

/// Checks the density-operator invariants in order: Hermiticity, unit trace,
/// positivity.
///
/// Eigenvalues in `[−τ_psd, 0)` that exceed round-off are clipped to zero and
/// the operator is renormalized; the clipped mass is reported. Round-off-sized
/// negative eigenvalues leave the operator untouched.
pub fn validate_density(m: &Operator, tol: &Tolerances) -> Result<ValidatedDensity> {
    let deviation = m.hermiticity_defect();
    if deviation > tol.herm {
        return Err(DensityViolation::Hermiticity { deviation, tolerance: tol.herm }.into());
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(DensityViolation::Trace { trace, tolerance: tol.trace }.into());
    }
    let eig = SymmetricEigen::new(m.hermitian_part().m);
    let lowest = eig.eigenvalues.min();
    if lowest < -tol.psd {
        return Err(DensityViolation::NegativeEigenvalue { eigenvalue: lowest, tolerance: tol.psd }.into());
    }
    let roundoff = 16.0 * f64::EPSILON * m.dim() as f64 * eig.eigenvalues.amax().max(1.0);
    if lowest >= -roundoff {
        return Ok(ValidatedDensity { density: DensityOperator { op: m.clone() }, clipped: 0.0 });
    }
    let clipped: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let kept = eig.eigenvalues.map(|l| l.max(0.0));
    let total = kept.sum();
    let vecs = &eig.eigenvectors;
    let diag = CMatrix::from_diagonal(&kept.map(|l| c(l / total, 0.0)));
    let rebuilt = Operator { m: vecs * diag * vecs.adjoint() }.hermitian_part();
    Ok(ValidatedDensity { density: DensityOperator { op: rebuilt }, clipped })
}

/// An orthogonal projector: `P² = P = P†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    op: Operator,
    rank: usize,
}

impl Projector {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, Tolerances::default().herm)
    }

    pub fn with_tolerance(op: Operator, tol: f64) -> Result<Self> {
        let herm = op.hermiticity_defect();
        if herm > tol {
            return Err(Error::InvalidProjector(format!("not Hermitian (defect {herm:e})")));
        }
        let idem = (&op * &op).max_abs_diff(&op);
        if idem > tol {
            return Err(Error::InvalidProjector(format!("not idempotent (max |P² − P| = {idem:e})")));
        }
        let rank = op.trace().re.round();
        if rank < 1.0 {
            return Err(Error::InvalidProjector("zero projector".into()));
        }
        Ok(Self { op, rank: rank as usize })
    }

    /// Rank-1 projector onto the normalized direction of `psi`.
    pub fn onto(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidProjector("zero vector".into()));
        }
        let v = psi / c(norm, 0.0);
        Ok(Self { op: Operator::outer(&v, &v)?.hermitian_part(), rank: 1 })
    }

    /// `|k⟩⟨k|` in the computational basis.
    pub fn basis(d: usize, k: usize) -> Self {
        assert!(k < d, "basis index out of range");
        Self { op: Operator::unit(d, k, k), rank: 1 }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    /// The projector read as a (normalized) density operator; rank 1 only.
    pub fn as_density(&self) -> Result<DensityOperator> {
        if self.rank != 1 {
            return Err(Error::DegenerateProjector { rank: self.rank });
        }
        Ok(DensityOperator::from_trusted(self.op.clone()))
    }
}

impl Serialize for Projector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Projector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(de)?;
        Projector::new(op).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPair {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// A Hermitian observable together with its spectral decomposition
/// `A = Σ a_n Π_n`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpectral {
    pub observable: Operator,
    pub pairs: Vec<SpectralPair>,
}

impl ObservableSpectral {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }

    /// `Σ a_n Π_n`.
    pub fn reconstruct(&self) -> Operator {
        let d = self.observable.dim();
        self.pairs.iter().fold(Operator::zeros(d), |acc, p| &acc + &(p.projector.as_operator() * p.eigenvalue))
    }
}

/// Spectral decomposition of a Hermitian operator. Eigenvalues whose
/// consecutive gap is below `degeneracy_tol` share one projector; the shared
/// eigenvalue is the group mean.
pub fn spectral_decompose(a: &Operator, degeneracy_tol: f64) -> Result<ObservableSpectral> {
    let deviation = a.hermiticity_defect();
    if deviation > Tolerances::default().herm {
        return Err(Error::NotHermitian { deviation });
    }
    let d = a.dim();
    let eig = SymmetricEigen::new(a.hermitian_part().m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[k] - eig.eigenvalues[*g.last().unwrap()] < degeneracy_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let pairs = groups
        .into_iter()
        .map(|g| {
            let eigenvalue = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let mut p = CMatrix::zeros(d, d);
            for &k in &g {
                let v = eig.eigenvectors.column(k);
                p += v * v.adjoint();
            }
            let op = Operator { m: p }.hermitian_part();
            SpectralPair { eigenvalue, projector: Projector { op, rank: g.len() } }
        })
        .collect();
    Ok(ObservableSpectral { observable: a.clone(), pairs })
}

/// Selective measurement update `PρP / Tr[PρP]`.
pub fn selective_projection(rho: &DensityOperator, p: &Projector) -> Result<DensityOperator> {
    rho.op.check_dim(&p.op)?;
    let projected = &(&p.op * &rho.op) * &p.op;
    let probability = projected.trace().re;
    if probability <= Tolerances::default().zero {
        return Err(Error::ZeroProbability { probability });
    }
    if p.rank == 1 {
        return Ok(DensityOperator::from_trusted(p.op.clone()));
    }
    Ok(DensityOperator::from_trusted((&projected * (1.0 / probability)).hermitian_part()))
}

/// `d²` linearly independent density operators spanning `L(H)`: the
/// diagonal projectors `|j⟩⟨j|`, then for each `j < k` the projectors onto
/// `(|j⟩ + |k⟩)/√2` and `(|j⟩ + i|k⟩)/√2`.
pub fn density_operator_basis(d: usize) -> Vec<DensityOperator> {
    assert!(d >= 1, "dimension must be at least 1");
    let mut basis: Vec<DensityOperator> =
        (0..d).map(|j| DensityOperator::from_trusted(Operator::unit(d, j, j))).collect();
    for j in 0..d {
        for k in j + 1..d {
            let diag = &Operator::unit(d, j, j) + &Operator::unit(d, k, k);
            let re = &diag + &(&Operator::unit(d, j, k) + &Operator::unit(d, k, j));
            let im = &diag + &(&(&Operator::unit(d, j, k) * c(0.0, -1.0)) + &(&Operator::unit(d, k, j) * c(0.0, 1.0)));
            basis.push(DensityOperator::from_trusted(&re * 0.5));
            basis.push(DensityOperator::from_trusted(&im * 0.5));
        }
    }
    basis
}
