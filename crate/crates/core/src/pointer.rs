//! Exact Gaussian-pointer model of one postselected weak measurement.
//!
//! The pointer starts in `φ(x) ∝ exp(−x²/4σ²)` (position spread `σ`). An
//! impulsive von Neumann coupling `g·O⊗p̂` displaces it by `g·a_n` on the
//! eigenbranch `n` of `O`, and postselection onto `ψ₂` leaves the pointer in
//! `Σ_n c_n φ(x − g a_n)` with `c_n = ⟨ψ₂|Π_n|ψ₁⟩`. All moments follow from
//! the Gaussian overlaps
//!
//! ```text
//! ∫ φ(x−u) φ(x−v) dx     = exp(−(u−v)²/8σ²)
//! ∫ x φ(x−u) φ(x−v) dx   = (u+v)/2 · exp(−(u−v)²/8σ²)
//! ∫ φ(x−u) (−i∂ₓ) φ(x−v) = i(u−v)/4σ² · exp(−(u−v)²/8σ²)
//! ```
//!
//! so no quadrature is needed. Momentum is in units where the pointer's
//! `ħ = 1`.

use crate::error::{Error, Result};
use crate::operator::{ObservableSpectral, StateVector, Tolerances, C64};
use crate::protocol::weak_value_pure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPointer {
    sigma: f64,
    g: f64,
}

impl GaussianPointer {
    pub fn new(sigma: f64, g: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() || !g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pointer needs sigma > 0 and finite g (sigma={sigma}, g={g})"
            )));
        }
        Ok(Self { sigma, g })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

fn branch_amplitudes(psi1: &StateVector, psi2: &StateVector, obs: &ObservableSpectral) -> Result<Vec<(f64, C64)>> {
    let d = obs.observable.dim();
    if psi1.len() != d || psi2.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi1.len().max(psi2.len()) });
    }
    Ok(obs
        .pairs
        .iter()
        .map(|pair| (pair.eigenvalue, psi2.dotc(&(pair.projector.as_operator().matrix() * psi1))))
        .collect())
}

/// Postselection probability and the unnormalized first moments
/// `(D, ⟨x⟩·D, ⟨p⟩·D)`.
fn moments(branches: &[(f64, C64)], ptr: &GaussianPointer) -> (f64, f64, f64) {
    let (g, s2) = (ptr.g, ptr.sigma * ptr.sigma);
    let (mut norm, mut pos, mut mom) = (0.0, 0.0, 0.0);
    for &(am, cm) in branches {
        for &(an, cn) in branches {
            let w = cm.conj() * cn;
            let du = g * (am - an);
            let overlap = (-du * du / (8.0 * s2)).exp();
            norm += w.re * overlap;
            pos += w.re * 0.5 * g * (am + an) * overlap;
            // Re(w · i·du/4σ²) = −Im(w)·du/4σ²
            mom += -w.im * du / (4.0 * s2) * overlap;
        }
    }
    (norm, pos, mom)
}

fn postselected(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    ptr: &GaussianPointer,
) -> Result<(f64, f64, f64)> {
    let branches = branch_amplitudes(psi1, psi2, obs)?;
    let scale = psi1.norm_squared() * psi2.norm_squared();
    let (norm, pos, mom) = moments(&branches, ptr);
    if norm <= Tolerances::default().zero * scale {
        return Err(Error::VanishingPostselection { probability: norm / scale });
    }
    Ok((norm, pos, mom))
}

/// Mean pointer position after coupling and postselection onto `ψ₂`.
pub fn postselected_pointer_mean(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    ptr: &GaussianPointer,
) -> Result<f64> {
    let (norm, pos, _) = postselected(psi1, psi2, obs, ptr)?;
    Ok(pos / norm)
}

/// Mean pointer momentum after postselection. In the weak limit this is
/// `g·Im(O_w)/(2σ²)`.
pub fn postselected_pointer_momentum(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    ptr: &GaussianPointer,
) -> Result<f64> {
    let (norm, _, mom) = postselected(psi1, psi2, obs, ptr)?;
    Ok(mom / norm)
}

/// Least-squares fit of the position shift against coupling strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLimitFit {
    /// Slope of shift vs `g` through the origin.
    pub slope: f64,
    /// Weak value from the pure-state formula, for comparison.
    pub weak_value: C64,
    /// `|slope − Re(O_w)| / (g_max/σ)²`.
    pub constant: f64,
    pub g_max: f64,
}

fn check_grid(obs: &ObservableSpectral, sigma: f64, g_grid: &[f64]) -> Result<()> {
    if g_grid.is_empty() || g_grid.iter().any(|&g| g <= 0.0 || !g.is_finite()) {
        return Err(Error::InvalidParameter("coupling grid must be non-empty and positive".into()));
    }
    let eig = obs.eigenvalues();
    let spread = eig.last().unwrap_or(&0.0) - eig.first().unwrap_or(&0.0);
    let g_min = g_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if spread > 0.0 && g_min > 0.1 * sigma / spread {
        return Err(Error::InvalidParameter(format!(
            "coupling grid must reach a decade below sigma/spread = {}, smallest g is {g_min}",
            sigma / spread
        )));
    }
    Ok(())
}

/// Shift at each grid coupling, for plotting.
pub fn shift_curve(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    sigma: f64,
    g_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    g_grid
        .iter()
        .map(|&g| Ok((g, postselected_pointer_mean(psi1, psi2, obs, &GaussianPointer::new(sigma, g)?)?)))
        .collect()
}

pub fn weak_limit_slope(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    sigma: f64,
    g_grid: &[f64],
) -> Result<WeakLimitFit> {
    check_grid(obs, sigma, g_grid)?;
    let curve = shift_curve(psi1, psi2, obs, sigma, g_grid)?;
    let (sxy, sxx) = curve.iter().fold((0.0, 0.0), |(sxy, sxx), &(g, s)| (sxy + g * s, sxx + g * g));
    let slope = sxy / sxx;
    let weak_value = weak_value_pure(psi1, psi2, &obs.observable)?.0;
    let g_max = g_grid.iter().copied().fold(0.0, f64::max);
    let constant = (slope - weak_value.re).abs() / (g_max / sigma).powi(2);
    Ok(WeakLimitFit { slope, weak_value, constant, g_max })
}

/// Log-log slope of `|shift(g) − g·Re(O_w)|` against `g` over the grid.
pub fn residual_scaling_exponent(
    psi1: &StateVector,
    psi2: &StateVector,
    obs: &ObservableSpectral,
    sigma: f64,
    g_grid: &[f64],
) -> Result<f64> {
    let re_w = weak_value_pure(psi1, psi2, &obs.observable)?.0.re;
    let pts: Vec<(f64, f64)> = shift_curve(psi1, psi2, obs, sigma, g_grid)?
        .into_iter()
        .map(|(g, s)| (g.ln(), (s - g * re_w).abs().ln()))
        .collect();
    if pts.len() < 2 || pts.iter().any(|p| !p.1.is_finite()) {
        return Err(Error::InvalidParameter("residual vanishes or grid too short for a fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
