//! Weak values for the simultaneous strong/weak measurement protocol.
//!
//! The ensemble is preselected into `ρ_in`, a strong selective measurement
//! onto the rank-1 projector `Π` and a weak coupling of `O` are both aimed at
//! the same instant, and the ensemble is finally postselected into `ρ_fin`.
//! The device turn-on times scatter uniformly over the stopwatch resolution
//! `Δt_m`; under the continuous model the strong measurement itself takes
//! `Δt_c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collapse::{evolution_superop_objective, objective_state_at, positive, require_rank_one};
use crate::error::{Error, Result};
use crate::operator::{DensityOperator, Operator, Projector, StateVector, Tolerances, C64};
use crate::superop::{apply_superop, backward_state, superop_adjoint, SuperOp};

/// Which collapse picture generates the averaged weak value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Instantaneous projective collapse with timing jitter.
    #[serde(rename = "vn")]
    VonNeumann,
    /// Continuous nonunitary collapse.
    Objective,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::VonNeumann => "vn",
            Model::Objective => "objective",
        }
    }
}

/// A (possibly complex, possibly anomalous) weak value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ComplexJson", into = "ComplexJson")]
pub struct WeakValue(pub C64);

impl WeakValue {
    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }
}

#[derive(Clone, Copy, Serialize, Deserialize)]
pub(crate) struct ComplexJson {
    re: f64,
    im: f64,
}

impl From<ComplexJson> for WeakValue {
    fn from(c: ComplexJson) -> Self {
        WeakValue(C64::new(c.re, c.im))
    }
}

impl From<WeakValue> for ComplexJson {
    fn from(w: WeakValue) -> Self {
        ComplexJson { re: w.0.re, im: w.0.im }
    }
}

/// `Δt_a = max(Δt_m, Δt_c)`: the timing spread an experimenter would infer
/// from strong measurements alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparentResolution {
    pub delta_t_a: f64,
}

impl ApparentResolution {
    pub fn new(delta_t_m: f64, delta_t_c: f64) -> Self {
        Self { delta_t_a: delta_t_m.max(delta_t_c) }
    }
}

/// Everything needed to evaluate the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProtocolConfigJson", into = "ProtocolConfigJson")]
pub struct ProtocolConfig {
    rho_in: DensityOperator,
    rho_fin: DensityOperator,
    strong_projector: Projector,
    weak_observable: Operator,
    delta_t_m: f64,
    delta_t_c: f64,
    hbar: f64,
}

#[derive(Serialize, Deserialize)]
struct ProtocolConfigJson {
    rho_in: DensityOperator,
    rho_fin: DensityOperator,
    strong_projector: Projector,
    weak_observable: Operator,
    delta_t_m: f64,
    delta_t_c: f64,
    hbar: f64,
}

impl TryFrom<ProtocolConfigJson> for ProtocolConfig {
    type Error = Error;
    fn try_from(j: ProtocolConfigJson) -> Result<Self> {
        ProtocolConfig::new(
            j.rho_in,
            j.rho_fin,
            j.strong_projector,
            j.weak_observable,
            j.delta_t_m,
            j.delta_t_c,
            j.hbar,
        )
    }
}

impl From<ProtocolConfig> for ProtocolConfigJson {
    fn from(c: ProtocolConfig) -> Self {
        ProtocolConfigJson {
            rho_in: c.rho_in,
            rho_fin: c.rho_fin,
            strong_projector: c.strong_projector,
            weak_observable: c.weak_observable,
            delta_t_m: c.delta_t_m,
            delta_t_c: c.delta_t_c,
            hbar: c.hbar,
        }
    }
}

impl ProtocolConfig {
    pub fn new(
        rho_in: DensityOperator,
        rho_fin: DensityOperator,
        strong_projector: Projector,
        weak_observable: Operator,
        delta_t_m: f64,
        delta_t_c: f64,
        hbar: f64,
    ) -> Result<Self> {
        let d = rho_in.dim();
        for found in [rho_fin.dim(), strong_projector.dim(), weak_observable.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        require_rank_one(&strong_projector)?;
        let tol = Tolerances::default();
        let deviation = weak_observable.hermiticity_defect();
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        positive("delta_t_m", delta_t_m)?;
        positive("delta_t_c", delta_t_c)?;
        positive("hbar", hbar)?;
        let p = strong_projector.as_operator();
        for rho in [&rho_in, &rho_fin] {
            let overlap = p.trace_product(rho.as_operator())?.re;
            if overlap <= tol.zero {
                return Err(Error::OrthogonalPostselection { denominator: overlap });
            }
        }
        Ok(Self { rho_in, rho_fin, strong_projector, weak_observable, delta_t_m, delta_t_c, hbar })
    }

    /// Parses the JSON form, keeping validation failures as typed errors
    /// rather than folding them into a parse error.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProtocolConfigJson = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn rho_in(&self) -> &DensityOperator {
        &self.rho_in
    }

    pub fn rho_fin(&self) -> &DensityOperator {
        &self.rho_fin
    }

    pub fn strong_projector(&self) -> &Projector {
        &self.strong_projector
    }

    pub fn weak_observable(&self) -> &Operator {
        &self.weak_observable
    }

    pub fn delta_t_m(&self) -> f64 {
        self.delta_t_m
    }

    pub fn delta_t_c(&self) -> f64 {
        self.delta_t_c
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn with_timing(&self, delta_t_m: f64, delta_t_c: f64) -> Result<Self> {
        positive("delta_t_m", delta_t_m)?;
        positive("delta_t_c", delta_t_c)?;
        Ok(Self { delta_t_m, delta_t_c, ..self.clone() })
    }

    pub fn apparent_resolution(&self) -> ApparentResolution {
        ApparentResolution::new(self.delta_t_m, self.delta_t_c)
    }

    /// Range of weak-coupling instants in collapse-anchored time.
    pub fn weak_window(&self) -> (f64, f64) {
        (0.5 * (self.delta_t_c - self.delta_t_m), 0.5 * (self.delta_t_c + self.delta_t_m))
    }

    pub fn dim(&self) -> usize {
        self.rho_in.dim()
    }

    pub fn traces(&self) -> Result<ProtocolTraces> {
        let p = self.strong_projector.as_operator();
        let o = &self.weak_observable;
        let rho_in = self.rho_in.as_operator();
        let rho_fin = self.rho_fin.as_operator();
        Ok(ProtocolTraces {
            pi_o_rho_in: (p * o).trace_product(rho_in)?,
            pi_rho_in: p.trace_product(rho_in)?,
            rho_fin_o_pi: (rho_fin * o).trace_product(p)?,
            rho_fin_pi: rho_fin.trace_product(p)?,
            o_rho_in: o.trace_product(rho_in)?,
            o_pi: o.trace_product(p)?,
        })
    }
}

/// The six traces every averaged weak value is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolTraces {
    /// `Tr[Π O ρ_in]`
    #[serde(with = "complex_json")]
    pub pi_o_rho_in: C64,
    /// `Tr[Π ρ_in]`
    #[serde(with = "complex_json")]
    pub pi_rho_in: C64,
    /// `Tr[ρ_fin O Π]`
    #[serde(with = "complex_json")]
    pub rho_fin_o_pi: C64,
    /// `Tr[ρ_fin Π]`
    #[serde(with = "complex_json")]
    pub rho_fin_pi: C64,
    /// `Tr[O ρ_in]`
    #[serde(with = "complex_json")]
    pub o_rho_in: C64,
    /// `Tr[O Π]`
    #[serde(with = "complex_json")]
    pub o_pi: C64,
}

pub(crate) mod complex_json {
    use super::{ComplexJson, C64};
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        ComplexJson { re: z.re, im: z.im }.serialize(s)
    }
}

fn ratio(num: C64, den: C64) -> Result<WeakValue> {
    if den.norm() <= Tolerances::default().zero {
        return Err(Error::OrthogonalPostselection { denominator: den.norm() });
    }
    Ok(WeakValue(num / den))
}

/// `Tr[ρ₂ O ρ₁] / Tr[ρ₂ ρ₁]`.
pub fn weak_value(rho1: &Operator, rho2: &Operator, o: &Operator) -> Result<WeakValue> {
    let num = (rho2 * o).trace_product(rho1)?;
    let den = rho2.trace_product(rho1)?;
    ratio(num, den)
}

/// `⟨ψ₂|O|ψ₁⟩ / ⟨ψ₂|ψ₁⟩`.
pub fn weak_value_pure(psi1: &StateVector, psi2: &StateVector, o: &Operator) -> Result<WeakValue> {
    if psi1.len() != o.dim() || psi2.len() != o.dim() {
        return Err(Error::DimensionMismatch { expected: o.dim(), found: psi1.len().max(psi2.len()) });
    }
    let num = psi2.dotc(&(o.matrix() * psi1));
    let den = psi2.dotc(psi1);
    ratio(num, den)
}

/// Weak value with the postselection propagated forward:
/// `Tr[ρ_fin E(O ρ₁)] / Tr[ρ_fin E(ρ₁)]`.
pub fn weak_value_forward(e: &SuperOp, rho1: &Operator, rho_fin: &Operator, o: &Operator) -> Result<WeakValue> {
    let num = rho_fin.trace_product(&apply_superop(e, &(o * rho1))?)?;
    let den = rho_fin.trace_product(&apply_superop(e, rho1)?)?;
    ratio(num, den)
}

/// The same weak value with the postselection propagated backward by the
/// adjoint: `Tr[ρ₂ O ρ₁] / Tr[ρ₂ ρ₁]` with `ρ₂ = (E†ρ_fin)†`. For
/// Hermiticity-preserving `E` the outer dagger is a no-op.
pub fn weak_value_adjoint(e: &SuperOp, rho1: &Operator, rho_fin: &Operator, o: &Operator) -> Result<WeakValue> {
    let rho2 = apply_superop(&superop_adjoint(e), &rho_fin.adjoint())?.adjoint();
    weak_value(rho1, &rho2, o)
}

/// Strong measurement first: it acts as the preselection.
pub fn trial_weak_value_strong_first(cfg: &ProtocolConfig) -> Result<WeakValue> {
    let t = cfg.traces()?;
    ratio(t.rho_fin_o_pi, t.rho_fin_pi)
}

/// Weak coupling first: the strong measurement acts as the postselection.
pub fn trial_weak_value_weak_first(cfg: &ProtocolConfig) -> Result<WeakValue> {
    let t = cfg.traces()?;
    ratio(t.pi_o_rho_in, t.pi_rho_in)
}

/// Weak value averaged over independent uniform turn-on times of the strong
/// and weak devices under instantaneous collapse. Each ordering occupies
/// half of the `(t_s, t_w)` square.
pub fn averaged_weak_value_vn(cfg: &ProtocolConfig) -> Result<WeakValue> {
    let w1 = trial_weak_value_weak_first(cfg)?;
    let w3 = trial_weak_value_strong_first(cfg)?;
    Ok(WeakValue(0.5 * (w1.0 + w3.0)))
}

fn check_weak_instant(t_w: f64, cfg: &ProtocolConfig) -> Result<()> {
    let (lo, hi) = cfg.weak_window();
    if !(lo..=hi).contains(&t_w) {
        return Err(Error::TimeOutOfRange { t: t_w, lo, hi });
    }
    Ok(())
}

/// Weak value for a coupling at `t_w` under continuous collapse over
/// `[0, Δt_c]`.
///
/// Before the collapse the strong measurement postselects; after it, it
/// preselects. During the collapse the postselection propagates back through
/// the collapse map to `Tr[Π ρ_fin]·I`, leaving `Tr[O ρ₁(t_w)]`.
pub fn objective_weak_value_at(t_w: f64, cfg: &ProtocolConfig) -> Result<WeakValue> {
    check_weak_instant(t_w, cfg)?;
    let dtc = cfg.delta_t_c;
    if t_w < 0.0 {
        return trial_weak_value_weak_first(cfg);
    }
    if t_w > dtc {
        return trial_weak_value_strong_first(cfg);
    }
    let t = cfg.traces()?;
    let s = t_w / dtc;
    Ok(WeakValue((1.0 - s) * t.o_rho_in + s * t.o_pi))
}

/// [`objective_weak_value_at`] rebuilt from the superoperator chain for
/// couplings during the collapse: `E(t_w, Δt_c)` from the composition law,
/// its adjoint applied to `ρ_fin`, then the mixed-state weak value.
pub fn objective_weak_value_by_evolution(t_w: f64, cfg: &ProtocolConfig) -> Result<WeakValue> {
    check_weak_instant(t_w, cfg)?;
    let dtc = cfg.delta_t_c;
    if !(0.0..=dtc).contains(&t_w) {
        return objective_weak_value_at(t_w, cfg);
    }
    let p = &cfg.strong_projector;
    let rho1 = objective_state_at(&cfg.rho_in, p, t_w, dtc)?;
    let e = evolution_superop_objective(t_w, dtc, p, dtc)?;
    let rho2 = backward_state(&e, &cfg.rho_fin)?;
    weak_value(rho1.as_operator(), &rho2, &cfg.weak_observable)
}

/// Time-averaged weak value under continuous collapse:
///
/// `((Δt_a − Δt_c)/(2Δt_a))·(W₁ + W₃) + (Δt_c/(2Δt_a))·(Tr[Oρ_in] + Tr[OΠ])`
///
/// with `Δt_a = max(Δt_m, Δt_c)` and `W₁`, `W₃` the weak-first and
/// strong-first trial values.
pub fn averaged_weak_value_objective(cfg: &ProtocolConfig) -> Result<WeakValue> {
    let w1 = trial_weak_value_weak_first(cfg)?;
    let w3 = trial_weak_value_strong_first(cfg)?;
    let t = cfg.traces()?;
    let dta = cfg.apparent_resolution().delta_t_a;
    let dtc = cfg.delta_t_c;
    let outside = (dta - dtc) / (2.0 * dta);
    let inside = dtc / (2.0 * dta);
    Ok(WeakValue(outside * (w1.0 + w3.0) + inside * (t.o_rho_in + t.o_pi)))
}

/// How per-trial weak values are combined into an ensemble average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Every trial counts equally, whatever its postselection rate.
    #[default]
    Uniform,
    /// Exploratory: trials weighted by their postselection probability
    /// (ratio of averaged numerators to averaged denominators).
    PostselectionWeighted,
}

pub fn averaged_weak_value(cfg: &ProtocolConfig, model: Model, averaging: Averaging) -> Result<WeakValue> {
    match (model, averaging) {
        (Model::VonNeumann, Averaging::Uniform) => averaged_weak_value_vn(cfg),
        (Model::Objective, Averaging::Uniform) => averaged_weak_value_objective(cfg),
        (Model::VonNeumann, Averaging::PostselectionWeighted) => {
            let t = cfg.traces()?;
            ratio(t.pi_o_rho_in + t.rho_fin_o_pi, t.pi_rho_in + t.rho_fin_pi)
        }
        (Model::Objective, Averaging::PostselectionWeighted) => {
            let t = cfg.traces()?;
            let dta = cfg.apparent_resolution().delta_t_a;
            let outside = (dta - cfg.delta_t_c) / (2.0 * dta);
            let inside = cfg.delta_t_c / dta;
            let middle = 0.5 * (t.o_rho_in + t.o_pi);
            let num = outside * (t.pi_o_rho_in + t.rho_fin_o_pi) + inside * t.rho_fin_pi * middle;
            let den = outside * (t.pi_rho_in + t.rho_fin_pi) + inside * t.rho_fin_pi;
            ratio(num, den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictModel {
    #[serde(rename = "vn")]
    VonNeumann,
    Objective,
    Inconclusive,
}

/// Outcome of [`discriminate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub model: VerdictModel,
    /// Estimated collapse duration, when the measurement falls on the
    /// `Δt_c < Δt_m` branch.
    pub delta_t_c_estimate: Option<f64>,
    /// The measurement matches the `Δt_c ≥ Δt_m` value, which only bounds
    /// `Δt_c` from below by `Δt_m`.
    pub saturated: bool,
    pub vn_prediction: WeakValue,
    pub saturated_prediction: WeakValue,
}

/// Decides which collapse picture a measured averaged weak value supports.
///
/// The measurement is attributed to instantaneous collapse when it lies
/// within `2σ` of that prediction. Otherwise the continuous-model formula is
/// inverted for `Δt_c`: on `Δt_c < Δt_m` the prediction moves linearly from
/// the instantaneous value (at `Δt_c → 0`) to the saturated value (at
/// `Δt_c = Δt_m`), and stays saturated beyond.
pub fn discriminate(measured: WeakValue, sigma_meas: f64, cfg: &ProtocolConfig) -> Result<Verdict> {
    if !measured.0.re.is_finite() || !measured.0.im.is_finite() {
        return Err(Error::InvalidParameter("measured weak value must be finite".into()));
    }
    if sigma_meas < 0.0 || !sigma_meas.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma_meas must be non-negative, got {sigma_meas}")));
    }
    let vn = averaged_weak_value_vn(cfg)?;
    let saturated = averaged_weak_value_objective(&cfg.with_timing(cfg.delta_t_m, cfg.delta_t_m)?)?;
    let gap = saturated.0 - vn.0;
    let scale = vn.0.norm().max(saturated.0.norm()).max(1.0);
    if gap.norm() <= 1e-12 * scale {
        return Err(Error::DegenerateScenario { value: vn.0.re });
    }
    let slack = 2.0 * sigma_meas + 1e-12 * scale;
    let verdict = |model, delta_t_c_estimate, saturated_branch| Verdict {
        model,
        delta_t_c_estimate,
        saturated: saturated_branch,
        vn_prediction: vn,
        saturated_prediction: saturated,
    };

    if (measured.0 - vn.0).norm() <= slack {
        return Ok(verdict(VerdictModel::VonNeumann, None, false));
    }
    let r = ((measured.0 - vn.0) * gap.conj()).re / gap.norm_sqr();
    if r > 0.0 && r < 1.0 {
        let predicted: Complex64 = vn.0 + r * gap;
        if (measured.0 - predicted).norm() <= slack {
            return Ok(verdict(VerdictModel::Objective, Some(r * cfg.delta_t_m), false));
        }
    }
    if (measured.0 - saturated.0).norm() <= slack {
        return Ok(verdict(VerdictModel::Objective, None, true));
    }
    Ok(verdict(VerdictModel::Inconclusive, None, false))
}
