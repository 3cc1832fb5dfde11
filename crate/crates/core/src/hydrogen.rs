//! Hydrogen-atom preset.
//!
//! The atom is reduced to the electron-spin qubit in the `{|+⟩, |−⟩}` basis
//! along z. The strong measurement is a resonant absorption selecting
//! parallel spins (`Π = |+⟩⟨+|`) and the weak coupling is a weak Stern-Gerlach
//! field measuring `S_z`. Hyperfine structure, pulse shapes and beam dynamics
//! are not modelled; only this qubit configuration is.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Operator, Projector, StateVector, C64};
use crate::protocol::{averaged_weak_value_objective, averaged_weak_value_vn, ProtocolConfig, WeakValue};

const AMPLITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenScenario {
    pub a: C64,
    pub b: C64,
    pub hbar: f64,
}

impl HydrogenScenario {
    pub fn new(a: C64, b: C64, hbar: f64) -> Result<Self> {
        for (name, z) in [("a", a), ("b", b)] {
            if z.norm() > 1.0 + AMPLITUDE_TOL || z.norm().is_nan() {
                return Err(Error::InvalidParameter(format!("|{name}| = {} exceeds 1", z.norm())));
            }
        }
        if hbar <= 0.0 || !hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { a, b, hbar })
    }

    /// `z|+⟩ + √(1 − |z|²)|−⟩`.
    pub fn spin_state(z: C64) -> StateVector {
        let down = (1.0 - z.norm_sqr()).max(0.0).sqrt();
        StateVector::from_column_slice(&[z, C64::new(down, 0.0)])
    }

    pub fn psi_in(&self) -> StateVector {
        Self::spin_state(self.a)
    }

    pub fn psi_fin(&self) -> StateVector {
        Self::spin_state(self.b)
    }

    /// Discriminating power needs `a ≠ 0`, `b ≠ 0` and `|a| ≠ 1`.
    pub fn is_discriminating(&self) -> bool {
        self.a.norm() > AMPLITUDE_TOL && self.b.norm() > AMPLITUDE_TOL && (self.a.norm() - 1.0).abs() > AMPLITUDE_TOL
    }

    pub fn config(&self, delta_t_m: f64, delta_t_c: f64) -> Result<ProtocolConfig> {
        build_hydrogen(self.a, self.b, self.hbar, delta_t_m, delta_t_c)
    }
}

/// Hydrogen protocol configuration for amplitudes `a`, `b`.
pub fn build_hydrogen(a: C64, b: C64, hbar: f64, delta_t_m: f64, delta_t_c: f64) -> Result<ProtocolConfig> {
    let s = HydrogenScenario::new(a, b, hbar)?;
    ProtocolConfig::new(
        DensityOperator::pure(&s.psi_in())?,
        DensityOperator::pure(&s.psi_fin())?,
        Projector::basis(2, 0),
        Operator::spin_z(hbar),
        delta_t_m,
        delta_t_c,
        hbar,
    )
}

/// The six traces, computed numerically from the built configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydrogenTraces {
    /// `Tr[Π O ρ_in] = ħ|a|²/2`
    pub t1: f64,
    /// `Tr[Π ρ_in] = |a|²`
    pub t2: f64,
    /// `Tr[ρ_fin O Π] = ħ|b|²/2`
    pub t3: f64,
    /// `Tr[ρ_fin Π] = |b|²`
    pub t4: f64,
    /// `Tr[O ρ_in] = ħ(2|a|² − 1)/2`
    pub t5: f64,
    /// `Tr[O Π] = ħ/2`
    pub t6: f64,
}

impl HydrogenTraces {
    pub fn closed_form(s: &HydrogenScenario) -> Self {
        let a2 = s.a.norm_sqr();
        let b2 = s.b.norm_sqr();
        let h = s.hbar;
        Self { t1: 0.5 * h * a2, t2: a2, t3: 0.5 * h * b2, t4: b2, t5: 0.5 * h * (2.0 * a2 - 1.0), t6: 0.5 * h }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.t1 - other.t1,
            self.t2 - other.t2,
            self.t3 - other.t3,
            self.t4 - other.t4,
            self.t5 - other.t5,
            self.t6 - other.t6,
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

pub fn hydrogen_traces(s: &HydrogenScenario) -> Result<HydrogenTraces> {
    // Timing does not enter the traces.
    let t = s.config(1.0, 1.0)?.traces()?;
    Ok(HydrogenTraces {
        t1: t.pi_o_rho_in.re,
        t2: t.pi_rho_in.re,
        t3: t.rho_fin_o_pi.re,
        t4: t.rho_fin_pi.re,
        t5: t.o_rho_in.re,
        t6: t.o_pi.re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydrogenPredictions {
    pub vn: WeakValue,
    pub objective: WeakValue,
}

/// Closed-form predictions `ħ/2` and, for the continuous model,
/// `ħ|a|²/2` when `Δt_c ≥ Δt_m` or `(ħ/2)(1 − (Δt_c/Δt_m)(1 − |a|²))`
/// otherwise.
pub fn hydrogen_closed_form(s: &HydrogenScenario, delta_t_c: f64, delta_t_m: f64) -> HydrogenPredictions {
    let a2 = s.a.norm_sqr();
    let h = s.hbar;
    let objective =
        if delta_t_c >= delta_t_m { 0.5 * h * a2 } else { 0.5 * h * (1.0 - (delta_t_c / delta_t_m) * (1.0 - a2)) };
    HydrogenPredictions { vn: WeakValue(C64::new(0.5 * h, 0.0)), objective: WeakValue(C64::new(objective, 0.0)) }
}

/// Averaged weak values for both models from the generic protocol formulas.
///
/// Fails with [`Error::DegenerateScenario`] when `|a| = 1`, where the two
/// models cannot be told apart.
pub fn hydrogen_predictions(s: &HydrogenScenario, delta_t_c: f64, delta_t_m: f64) -> Result<HydrogenPredictions> {
    if (s.a.norm() - 1.0).abs() <= AMPLITUDE_TOL {
        return Err(Error::DegenerateScenario { value: 0.5 * s.hbar });
    }
    let cfg = s.config(delta_t_m, delta_t_c)?;
    Ok(HydrogenPredictions { vn: averaged_weak_value_vn(&cfg)?, objective: averaged_weak_value_objective(&cfg)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c;

    #[test]
    fn fully_aligned_amplitudes() {
        let cfg = build_hydrogen(c(1.0, 0.0), c(1.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        let p = Operator::unit(2, 0, 0);
        assert!(cfg.rho_in().as_operator().max_abs_diff(&p) < 1e-15);
        assert!(cfg.rho_fin().as_operator().max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn equal_superposition() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cfg = build_hydrogen(c(s, 0.0), c(s, 0.0), 1.0, 1.0, 1.0).unwrap();
        let half = Operator::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(cfg.rho_in().as_operator().max_abs_diff(&half) < 1e-15);
        assert_eq!(cfg.rho_in(), cfg.rho_fin());
    }

    #[test]
    fn amplitude_bounds() {
        assert!(build_hydrogen(c(1.1, 0.0), c(0.5, 0.0), 1.0, 1.0, 1.0).is_err());
        assert!(matches!(
            build_hydrogen(c(0.0, 0.0), c(0.5, 0.0), 1.0, 1.0, 1.0),
            Err(Error::OrthogonalPostselection { .. })
        ));
    }

    #[test]
    fn half_weight_traces() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sc = HydrogenScenario::new(c(s, 0.0), c(0.3, 0.4), 1.0).unwrap();
        let t = hydrogen_traces(&sc).unwrap();
        assert!((t.t1 - 0.25).abs() < 1e-15);
        assert!((t.t2 - 0.5).abs() < 1e-15);
        assert!(t.t5.abs() < 1e-15);
        assert!(t.max_abs_diff(&HydrogenTraces::closed_form(&sc)) < 1e-15);
    }

    #[test]
    fn aligned_input_traces_coincide() {
        let sc = HydrogenScenario::new(c(1.0, 0.0), c(0.5, 0.0), 2.0).unwrap();
        let t = hydrogen_traces(&sc).unwrap();
        assert!((t.t5 - 1.0).abs() < 1e-15 && (t.t6 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn predictions_examples() {
        let sc = HydrogenScenario::new(c(0.5, 0.0), c(0.7, 0.1), 1.0).unwrap();
        let p = hydrogen_predictions(&sc, 2.0, 1.0).unwrap();
        assert!((p.vn.0 - c(0.5, 0.0)).norm() < 1e-15);
        assert!((p.objective.0 - c(0.125, 0.0)).norm() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sc = HydrogenScenario::new(c(s, 0.0), c(0.7, 0.1), 1.0).unwrap();
        let p = hydrogen_predictions(&sc, 0.5, 1.0).unwrap();
        assert!((p.objective.0 - c(0.375, 0.0)).norm() < 1e-15);

        let sc = HydrogenScenario::new(c(1.0, 0.0), c(0.7, 0.1), 1.0).unwrap();
        assert!(!sc.is_discriminating());
        assert!(matches!(hydrogen_predictions(&sc, 0.5, 1.0), Err(Error::DegenerateScenario { .. })));
    }
}
