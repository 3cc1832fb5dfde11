//! Seeded Monte Carlo reproduction of the time-averaged weak values.
//!
//! Random numbers come from a single ChaCha8 keystream seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Trial `i` reads the 64-bit words `2i`
//! (strong-device turn-on) and `2i + 1` (weak-device turn-on), so any trial can
//! be regenerated in isolation and the result does not depend on how trials
//! are split across workers. Per-trial values are reduced with Welford
//! updates inside fixed-size chunks, and chunks are merged in trial order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::C64;
use crate::protocol::{trial_weak_value_strong_first, trial_weak_value_weak_first, Model, ProtocolConfig, WeakValue};

/// Trials per reduction chunk.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub cfg: ProtocolConfig,
    pub model: Model,
    pub trials: u64,
    pub seed: u64,
}

/// Mean weak value over `trials` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragedResult {
    pub model: Model,
    pub trials: u64,
    pub seed: u64,
    pub mean: WeakValue,
    /// Standard error of the real part.
    pub stderr: f64,
    /// Standard error of the imaginary part.
    pub stderr_im: f64,
}

impl AveragedResult {
    pub const CSV_HEADER: &'static str = "model,N,seed,mean_re,mean_im,stderr_re,stderr_im";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:?},{:?},{:?},{:?}",
            self.model.name(),
            self.trials,
            self.seed,
            self.mean.re(),
            self.mean.im(),
            self.stderr,
            self.stderr_im
        )
    }

    /// `(mean − target) / stderr` on the real part. With a vanishing standard
    /// error (every trial gave the same value) this is `0` for a match at
    /// round-off level and `None` otherwise.
    pub fn z_score(&self, target: WeakValue) -> Option<f64> {
        let diff = self.mean.re() - target.re();
        if self.stderr > 0.0 {
            Some(diff / self.stderr)
        } else {
            (diff.abs() <= 1e-12 * target.re().abs().max(1.0)).then_some(0.0)
        }
    }
}

fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn stream_at(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(4 * trial as u128);
    rng
}

/// The two unit-interval draws of trial `trial`: `(strong, weak)`.
pub fn trial_uniforms(seed: u64, trial: u64) -> (f64, f64) {
    let mut rng = stream_at(seed, trial);
    (unit_f64(rng.next_u64()), unit_f64(rng.next_u64()))
}

/// Per-trial weak values with the ensemble-independent traces computed once.
#[derive(Debug, Clone, Copy)]
pub struct TrialEvaluator {
    model: Model,
    weak_first: C64,
    strong_first: C64,
    o_rho_in: C64,
    o_pi: C64,
    delta_t_m: f64,
    delta_t_c: f64,
}

impl TrialEvaluator {
    pub fn new(cfg: &ProtocolConfig, model: Model) -> Result<Self> {
        let traces = cfg.traces()?;
        Ok(Self {
            model,
            weak_first: trial_weak_value_weak_first(cfg)?.0,
            strong_first: trial_weak_value_strong_first(cfg)?.0,
            o_rho_in: traces.o_rho_in,
            o_pi: traces.o_pi,
            delta_t_m: cfg.delta_t_m(),
            delta_t_c: cfg.delta_t_c(),
        })
    }

    /// Weak value for one trial given its two unit draws.
    pub fn evaluate(&self, strong_u: f64, weak_u: f64) -> C64 {
        match self.model {
            Model::VonNeumann => {
                let t_s = strong_u * self.delta_t_m;
                let t_w = weak_u * self.delta_t_m;
                if t_w > t_s {
                    self.strong_first
                } else {
                    self.weak_first
                }
            }
            Model::Objective => {
                let t_w = 0.5 * (self.delta_t_c - self.delta_t_m) + weak_u * self.delta_t_m;
                self.objective_at(t_w)
            }
        }
    }

    fn objective_at(&self, t_w: f64) -> C64 {
        if t_w < 0.0 {
            self.weak_first
        } else if t_w > self.delta_t_c {
            self.strong_first
        } else {
            let s = t_w / self.delta_t_c;
            (1.0 - s) * self.o_rho_in + s * self.o_pi
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.n - 1) as f64).max(0.0);
        (var / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexMoments {
    re: Moments,
    im: Moments,
}

impl ComplexMoments {
    fn merge(self, other: ComplexMoments) -> ComplexMoments {
        ComplexMoments { re: self.re.merge(other.re), im: self.im.merge(other.im) }
    }
}

fn run_chunk(eval: &TrialEvaluator, seed: u64, start: u64, end: u64) -> ComplexMoments {
    let mut rng = stream_at(seed, start);
    let mut acc = ComplexMoments::default();
    for _ in start..end {
        let strong = unit_f64(rng.next_u64());
        let weak = unit_f64(rng.next_u64());
        let w = eval.evaluate(strong, weak);
        acc.re.push(w.re);
        acc.im.push(w.im);
    }
    acc
}

fn run_range(eval: &TrialEvaluator, seed: u64, start: u64, end: u64) -> ComplexMoments {
    let bounds: Vec<(u64, u64)> = (start..end).step_by(CHUNK as usize).map(|lo| (lo, (lo + CHUNK).min(end))).collect();
    #[cfg(feature = "parallel")]
    let parts: Vec<ComplexMoments> = {
        use rayon::prelude::*;
        bounds.par_iter().map(|&(lo, hi)| run_chunk(eval, seed, lo, hi)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<ComplexMoments> = bounds.iter().map(|&(lo, hi)| run_chunk(eval, seed, lo, hi)).collect();
    parts.into_iter().fold(ComplexMoments::default(), ComplexMoments::merge)
}

fn result(spec: &SimulationSpec, m: &ComplexMoments) -> AveragedResult {
    AveragedResult {
        model: spec.model,
        trials: m.re.n,
        seed: spec.seed,
        mean: WeakValue(C64::new(m.re.mean, m.im.mean)),
        stderr: m.re.stderr(),
        stderr_im: m.im.stderr(),
    }
}

fn check_model(spec: &SimulationSpec, model: Model) -> Result<()> {
    if spec.model != model {
        return Err(Error::InvalidParameter(format!(
            "simulation spec is for model {}, expected {}",
            spec.model.name(),
            model.name()
        )));
    }
    if spec.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

/// Instantaneous collapse: strong and weak turn-on times drawn independently
/// on `(0, Δt_m)`; the later of the two picks the trial value.
pub fn simulate_vn(spec: &SimulationSpec) -> Result<AveragedResult> {
    check_model(spec, Model::VonNeumann)?;
    simulate(spec)
}

/// Continuous collapse over `[0, Δt_c]`: the weak turn-on time is drawn on
/// `(½(Δt_c − Δt_m), ½(Δt_c + Δt_m))`.
pub fn simulate_objective(spec: &SimulationSpec) -> Result<AveragedResult> {
    check_model(spec, Model::Objective)?;
    simulate(spec)
}

/// Dispatches on `spec.model`.
pub fn simulate(spec: &SimulationSpec) -> Result<AveragedResult> {
    check_model(spec, spec.model)?;
    let eval = TrialEvaluator::new(&spec.cfg, spec.model)?;
    Ok(result(spec, &run_range(&eval, spec.seed, 0, spec.trials)))
}

/// Running averages at each checkpoint, all taken from one trial stream.
pub fn convergence_report(spec: &SimulationSpec, checkpoints: &[u64]) -> Result<Vec<AveragedResult>> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("checkpoints must be positive and strictly ascending".into()));
    }
    let eval = TrialEvaluator::new(&spec.cfg, spec.model)?;
    let mut acc = ComplexMoments::default();
    let mut done = 0;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        acc = acc.merge(run_range(&eval, spec.seed, done, n));
        done = n;
        out.push(result(spec, &acc));
    }
    Ok(out)
}
