//! Liouville-space superoperators.
//!
//! A superoperator on `L(H)` with `dim H = d` is stored as a `d²×d²` matrix
//! acting on column-stacked operators: entry `(i, j)` of an operator sits at
//! index `i + j·d` (see [`Operator::vectorize`]). With this convention the
//! Hilbert-Schmidt adjoint of a superoperator is the conjugate transpose of
//! its matrix.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, CMatrix, DensityOperator, Operator, Projector, C64};

/// Relative singular-value cutoff used for rank decisions.
const RANK_RTOL: f64 = 1e-10;
/// Residual above which [`solve_completion`] reports no exact solution.
pub const COMPLETION_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct SuperOp {
    dim: usize,
    matrix: CMatrix,
}

impl std::fmt::Debug for SuperOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SuperOp(d={}){}", self.dim, self.matrix)
    }
}

impl SuperOp {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        let n = dim * dim;
        if dim == 0 || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidShape(format!(
                "superoperator on d={dim} needs a {n}x{n} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// Tabulates a linear map by its action on the matrix units `|j⟩⟨k|`.
    pub fn from_map(dim: usize, map: impl Fn(&Operator) -> Operator) -> Self {
        let n = dim * dim;
        let mut matrix = CMatrix::zeros(n, n);
        for col in 0..n {
            let (i, j) = (col % dim, col / dim);
            let image = map(&Operator::unit(dim, i, j));
            assert_eq!(image.dim(), dim, "map changed the operator dimension");
            matrix.set_column(col, &image.vectorize());
        }
        Self { dim, matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim, dim * dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::zeros(dim * dim, dim * dim) }
    }

    /// `X ↦ U X U†`.
    pub fn conjugation(u: &Operator) -> Self {
        let ud = u.adjoint();
        Self::from_map(u.dim(), |x| &(u * x) * &ud)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other });
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn lincomb(&self, alpha: f64, other: &SuperOp, beta: f64) -> Result<SuperOp> {
        self.check_dim(other.dim)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix * c(alpha, 0.0) + &other.matrix * c(beta, 0.0) })
    }

    pub fn frobenius_distance(&self, other: &SuperOp) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SuperOp) -> f64 {
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct SuperOpJson {
    dim: usize,
    vectorization: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for SuperOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.matrix.nrows();
        let rows = |f: fn(&C64) -> f64| (0..n).map(|i| (0..n).map(|j| f(&self.matrix[(i, j)])).collect()).collect();
        SuperOpJson { dim: self.dim, vectorization: "column".into(), re: rows(|z| z.re), im: rows(|z| z.im) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SuperOp {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SuperOpJson::deserialize(de)?;
        if raw.vectorization != "column" {
            return Err(D::Error::custom(format!("unsupported vectorization {:?}", raw.vectorization)));
        }
        let n = raw.dim * raw.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if raw.dim == 0 || !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(D::Error::custom(format!("superoperator entries must be {n}x{n}")));
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(raw.re[i][j], raw.im[i][j]));
        SuperOp::from_matrix(raw.dim, m).map_err(D::Error::custom)
    }
}

pub fn apply_superop(k: &SuperOp, x: &Operator) -> Result<Operator> {
    k.check_dim(x.dim())?;
    let v = &k.matrix * x.vectorize();
    Operator::from_vectorized(k.dim, v.as_slice())
}

/// `K2 ∘ K1`: apply `K1` first.
pub fn compose(k2: &SuperOp, k1: &SuperOp) -> Result<SuperOp> {
    k2.check_dim(k1.dim)?;
    Ok(SuperOp { dim: k2.dim, matrix: &k2.matrix * &k1.matrix })
}

/// Hilbert-Schmidt adjoint: `⟨A|K B⟩ = ⟨K† A|B⟩`.
pub fn superop_adjoint(k: &SuperOp) -> SuperOp {
    SuperOp { dim: k.dim, matrix: k.matrix.adjoint() }
}

/// The collapse map `ξ ↦ Tr[ξ]·Π`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseSuperOp {
    pub superop: SuperOp,
    pub target: Projector,
}

pub fn collapse_superop(p: &Projector) -> CollapseSuperOp {
    // vec(Π) vec(I)ᵀ picks out Tr[ξ] = vec(I)ᵀ vec(ξ).
    let d = p.dim();
    let target = p.as_operator().vectorize();
    let trace_row = Operator::identity(d).vectorize().transpose();
    CollapseSuperOp { superop: SuperOp { dim: d, matrix: target * trace_row }, target: p.clone() }
}

fn stack_columns(ops: &[&Operator], d: usize) -> Result<CMatrix> {
    let n = d * d;
    let mut m = CMatrix::zeros(n, ops.len());
    for (j, op) in ops.iter().enumerate() {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        m.set_column(j, &op.vectorize());
    }
    Ok(m)
}

fn numerical_rank(svd: &SVD<C64, nalgebra::Dyn, nalgebra::Dyn>) -> usize {
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Dimension of the span of `ops` inside `L(H)`.
pub fn span_rank(ops: &[&Operator]) -> Result<usize> {
    let Some(first) = ops.first() else { return Ok(0) };
    let m = stack_columns(ops, first.dim())?;
    Ok(numerical_rank(&m.svd(false, false)))
}

/// Recovers the superoperator from its action on a basis of `L(H)`: the
/// unique `K` with `K inputs[j] = outputs[j]`.
pub fn reconstruct_superop(inputs: &[DensityOperator], outputs: &[Operator]) -> Result<SuperOp> {
    let Some(first) = inputs.first() else {
        return Err(Error::RankDeficient { rank: 0, required: 1 });
    };
    let d = first.dim();
    let n = d * d;
    if inputs.len() != n || outputs.len() != n {
        return Err(Error::InvalidShape(format!(
            "need {n} input/output pairs, got {} inputs and {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    let b = stack_columns(&inputs.iter().map(DensityOperator::as_operator).collect::<Vec<_>>(), d)?;
    let y = stack_columns(&outputs.iter().collect::<Vec<_>>(), d)?;
    let rank = numerical_rank(&b.clone().svd(false, false));
    if rank < n {
        return Err(Error::RankDeficient { rank, required: n });
    }
    let b_inv = b.try_inverse().ok_or(Error::RankDeficient { rank, required: n })?;
    SuperOp::from_matrix(d, y * b_inv)
}

/// Result of [`solve_completion`].
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    /// Minimum-norm least-squares solution.
    pub superop: SuperOp,
    /// True when the solution is the only one.
    pub unique: bool,
    /// Dimension of the affine space of exact solutions.
    pub solution_dim: usize,
    /// `‖K·E_first − E_total‖_F`.
    pub residual: f64,
}

/// Solves `K · E_first = E_total` for `K`.
///
/// Each row of `K` solves `x · E_first = row of E_total`, so the solution is
/// unique exactly when `E_first` has full rank; otherwise every row may be
/// shifted by the left null space of `E_first`.
pub fn solve_completion(e_first: &SuperOp, e_total: &SuperOp) -> Result<Completion> {
    e_first.check_dim(e_total.dim)?;
    let n = e_first.dim * e_first.dim;
    let svd = e_first.matrix.clone().svd(true, true);
    let rank = numerical_rank(&svd);
    let eps = RANK_RTOL * svd.singular_values.max();
    let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let k = &e_total.matrix * pinv;
    let residual = (&k * &e_first.matrix - &e_total.matrix).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = e_total.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    if residual > COMPLETION_RESIDUAL_TOL * scale {
        return Err(Error::NoExactSolution { residual });
    }
    Ok(Completion {
        superop: SuperOp { dim: e_first.dim, matrix: k },
        unique: rank == n,
        solution_dim: n * (n - rank),
        residual,
    })
}

/// Retrograde evolution `R(t_w, t_fin) = E†(t_w, t_fin)`.
pub fn retrograde(e: &SuperOp) -> SuperOp {
    superop_adjoint(e)
}

/// Backward-propagated postselection `ρ₂(t_w) = E†(t_w, t_fin) ρ_fin`. Not
/// normalized and not in general a density operator.
pub fn backward_state(e_w_fin: &SuperOp, rho_fin: &DensityOperator) -> Result<Operator> {
    apply_superop(&retrograde(e_w_fin), rho_fin.as_operator())
}
