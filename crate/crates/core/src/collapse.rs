//! Ensemble evolution during a strong measurement under the two collapse
//! pictures.
//!
//! Both models re-anchor their interval to start at `t = 0`. Apart from the
//! strong measurement there is no dynamics: no Hamiltonian term exists here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, ObservableSpectral, Projector};
use crate::superop::{collapse_superop, solve_completion, SuperOp};

/// Uniform density on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformTiming {
    lo: f64,
    hi: f64,
}

impl UniformTiming {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if hi <= lo || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("timing interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn density(&self) -> f64 {
        1.0 / self.width()
    }

    /// Probability that the event has happened by `t`, clamped to `[0, 1]`.
    pub fn cdf(&self, t: f64) -> f64 {
        ((t - self.lo) / self.width()).clamp(0.0, 1.0)
    }

    /// Maps a unit-interval sample onto the timing window.
    pub fn sample(&self, u: f64) -> f64 {
        self.lo + u * self.width()
    }
}

/// Continuous nonunitary collapse of duration `Δt_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousModel {
    delta_t_c: f64,
}

impl ContinuousModel {
    pub fn new(delta_t_c: f64) -> Result<Self> {
        positive("delta_t_c", delta_t_c)?;
        Ok(Self { delta_t_c })
    }

    pub fn delta_t_c(&self) -> f64 {
        self.delta_t_c
    }

    pub fn state_at(&self, rho_in: &DensityOperator, p: &Projector, t: f64) -> Result<DensityOperator> {
        objective_state_at(rho_in, p, t, self.delta_t_c)
    }
}

/// Instantaneous projective collapse, with the device turning on uniformly
/// within a stopwatch resolution `Δt_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousModel {
    delta_t_m: f64,
}

impl InstantaneousModel {
    pub fn new(delta_t_m: f64) -> Result<Self> {
        positive("delta_t_m", delta_t_m)?;
        Ok(Self { delta_t_m })
    }

    pub fn delta_t_m(&self) -> f64 {
        self.delta_t_m
    }

    pub fn timing(&self) -> UniformTiming {
        UniformTiming { lo: 0.0, hi: self.delta_t_m }
    }

    pub fn state_at(&self, rho_in: &DensityOperator, p: &Projector, t: f64) -> Result<DensityOperator> {
        projective_ensemble_state_at(rho_in, p, t, self.delta_t_m)
    }
}

pub(crate) fn positive(name: &str, x: f64) -> Result<()> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

fn check_time(t: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&t) {
        return Err(Error::TimeOutOfRange { t, lo: 0.0, hi });
    }
    Ok(())
}

pub(crate) fn require_rank_one(p: &Projector) -> Result<()> {
    if p.rank() != 1 {
        return Err(Error::DegenerateProjector { rank: p.rank() });
    }
    Ok(())
}

/// `(1 − t/Δt_c)·ρ_in + (t/Δt_c)·Π` for `t ∈ [0, Δt_c]`.
pub fn objective_state_at(rho_in: &DensityOperator, p: &Projector, t: f64, delta_t_c: f64) -> Result<DensityOperator> {
    positive("delta_t_c", delta_t_c)?;
    require_rank_one(p)?;
    check_time(t, delta_t_c)?;
    rho_in.mix(&p.as_density()?, t / delta_t_c)
}

/// Ensemble state when each member collapses instantly at a uniformly
/// distributed time in `[0, Δt_m]`: the mixture of collapsed and
/// not-yet-collapsed subensembles, weighted by the timing CDF.
pub fn projective_ensemble_state_at(
    rho_in: &DensityOperator,
    p: &Projector,
    t: f64,
    delta_t_m: f64,
) -> Result<DensityOperator> {
    let timing = InstantaneousModel::new(delta_t_m)?.timing();
    require_rank_one(p)?;
    check_time(t, delta_t_m)?;
    rho_in.mix(&p.as_density()?, timing.cdf(t))
}

/// Evolution superoperator `E(t1, t2)` of the continuous model.
///
/// Maps anchored at the collapse start are `(1 − t2/Δt_c)·I + (t2/Δt_c)·C`.
/// For `t1 > 0` the map is obtained from the composition law
/// `E(t1, t2)·E(0, t1) = E(0, t2)`, which has a unique solution whenever
/// `t1 < Δt_c`.
pub fn evolution_superop_objective(t1: f64, t2: f64, p: &Projector, delta_t_c: f64) -> Result<SuperOp> {
    positive("delta_t_c", delta_t_c)?;
    require_rank_one(p)?;
    if !(0.0 <= t1 && t1 <= t2 && t2 <= delta_t_c) {
        return Err(Error::UnsupportedAnchor { t1, t2, duration: delta_t_c });
    }
    let d = p.dim();
    let anchored = |t: f64| {
        let s = t / delta_t_c;
        SuperOp::identity(d).lincomb(1.0 - s, &collapse_superop(p).superop, s)
    };
    if t1 == 0.0 {
        return anchored(t2);
    }
    if t1 == t2 {
        return Ok(SuperOp::identity(d));
    }
    let sol = solve_completion(&anchored(t1)?, &anchored(t2)?)?;
    if !sol.unique {
        return Err(Error::UnsupportedAnchor { t1, t2, duration: delta_t_c });
    }
    Ok(sol.superop)
}

/// Born probabilities `Tr[Π_n ρ]` for each eigenvalue of `obs`.
pub fn strong_statistics(rho: &DensityOperator, obs: &ObservableSpectral) -> Result<Vec<(f64, f64)>> {
    obs.pairs
        .iter()
        .map(|pair| {
            let p = pair.projector.as_operator().trace_product(rho.as_operator())?.re;
            Ok((pair.eigenvalue, p.max(0.0)))
        })
        .collect()
}
