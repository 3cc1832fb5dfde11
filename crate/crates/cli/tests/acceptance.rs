//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use weakcollapse::collapse::{
    evolution_superop_objective, objective_state_at, projective_ensemble_state_at, strong_statistics,
};
use weakcollapse::hydrogen::build_hydrogen;
use weakcollapse::montecarlo::{simulate_objective, simulate_vn, AveragedResult, SimulationSpec};
use weakcollapse::operator::{c, C64};
use weakcollapse::pointer::{residual_scaling_exponent, weak_limit_slope};
use weakcollapse::protocol::{
    averaged_weak_value_objective, averaged_weak_value_vn, objective_weak_value_at, weak_value, weak_value_forward,
};
use weakcollapse::superop::{
    apply_superop, backward_state, collapse_superop, compose, solve_completion, superop_adjoint,
};
use weakcollapse::{hs_inner, spectral_decompose, Model, Operator, ProtocolConfig, StateVector, SuperOp, WeakValue};

type Check = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn within(name: &str, err: f64, tol: f64) -> Result<String, String> {
    if err <= tol {
        Ok(format!("{name} {err:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{name} {err:.3e} exceeds {tol:.0e}"))
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    match (out, limit) {
        (Ok(detail), Some(l)) if took > l => Err(format!("{detail}; took {took:.2?}, limit {l:?}")),
        (Ok(detail), _) => Ok(format!("{detail}; {took:.2?}")),
        (Err(e), _) => Err(format!("{e}; {took:.2?}")),
    }
}

fn hydrogen_cfg(a: C64, b: C64, dtm: f64, dtc: f64) -> ProtocolConfig {
    build_hydrogen(a, b, 1.0, dtm, dtc).expect("valid hydrogen amplitudes")
}

fn c1_hydrogen_vn() -> Check {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let cfg = hydrogen_cfg(random_amplitude(&mut r), random_amplitude(&mut r), 1.0, 0.1 + 3.0 * r.random::<f64>());
        let v = averaged_weak_value_vn(&cfg).map_err(|e| e.to_string())?;
        worst = worst.max((v.0 - c(0.5, 0.0)).norm());
    }
    within("max |W - ħ/2| over 20 draws", worst, 1e-12)
}

fn c2_hydrogen_saturated() -> Check {
    let mut r = rng(102);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = random_amplitude(&mut r);
        let b = random_amplitude(&mut r);
        for k in [1.0, 2.0, 10.0] {
            let v = averaged_weak_value_objective(&hydrogen_cfg(a, b, 1.0, k)).map_err(|e| e.to_string())?;
            worst = worst.max((v.0 - c(0.5 * a.norm_sqr(), 0.0)).norm());
        }
    }
    within("max |W - ħ|a|²/2|", worst, 1e-12)
}

fn c3_hydrogen_jitter_branch() -> Check {
    let mut worst = 0.0f64;
    for a2 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let a = C64::new(f64::sqrt(a2), 0.0);
        for ratio in [0.05, 0.25, 0.5, 0.75, 0.95] {
            let v =
                averaged_weak_value_objective(&hydrogen_cfg(a, c(0.6, 0.0), 1.0, ratio)).map_err(|e| e.to_string())?;
            worst = worst.max((v.0 - c(0.5 * (1.0 - ratio * (1.0 - a2)), 0.0)).norm());
        }
        let at = averaged_weak_value_objective(&hydrogen_cfg(a, c(0.6, 0.0), 1.0, 1.0)).unwrap().0;
        let left = averaged_weak_value_objective(&hydrogen_cfg(a, c(0.6, 0.0), 1.0, 1.0 - 1e-13)).unwrap().0;
        let right = averaged_weak_value_objective(&hydrogen_cfg(a, c(0.6, 0.0), 1.0, 1.0 + 1e-13)).unwrap().0;
        worst = worst.max((left - at).norm()).max((right - at).norm());
    }
    within("max deviation on 5x5 grid and at Δt_c = Δt_m", worst, 1e-12)
}

fn worst_z(res: &AveragedResult, target: WeakValue) -> f64 {
    let part = |d: f64, se: f64| {
        if se > 0.0 {
            (d / se).abs()
        } else if d.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    part(res.mean.re() - target.re(), res.stderr).max(part(res.mean.im() - target.im(), res.stderr_im))
}

fn c4_monte_carlo() -> Check {
    let mut r = rng(104);
    let mut cfgs: Vec<ProtocolConfig> = (0..5).map(|_| random_config(&mut r, 2)).collect();
    cfgs.push(hydrogen_cfg(c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.6, 0.3), 1.0, 0.5));
    let mut worst = 0.0f64;
    for (i, cfg) in cfgs.iter().enumerate() {
        let seed = 2024 + i as u64;
        let vn = simulate_vn(&SimulationSpec { cfg: cfg.clone(), model: Model::VonNeumann, trials: 1_000_000, seed })
            .map_err(|e| e.to_string())?;
        let obj =
            simulate_objective(&SimulationSpec { cfg: cfg.clone(), model: Model::Objective, trials: 1_000_000, seed })
                .map_err(|e| e.to_string())?;
        worst = worst.max(worst_z(&vn, averaged_weak_value_vn(cfg).unwrap()));
        worst = worst.max(worst_z(&obj, averaged_weak_value_objective(cfg).unwrap()));
    }
    within("max |z| over 12 runs of 10^6 trials", worst, 4.0)
}

fn c5_indistinguishable() -> Check {
    let mut r = rng(105);
    let (mut state, mut stats) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let d = r.random_range(2..=3);
        let dt = 0.1 + r.random::<f64>();
        let rho = random_density(&mut r, d);
        let p = random_projector(&mut r, d);
        let obs = spectral_decompose(&random_hermitian(&mut r, d), 1e-9).map_err(|e| e.to_string())?;
        for k in 0..100 {
            let t = if k == 99 { dt } else { dt * k as f64 / 99.0 };
            let a = objective_state_at(&rho, &p, t, dt).map_err(|e| e.to_string())?;
            let b = projective_ensemble_state_at(&rho, &p, t, dt).map_err(|e| e.to_string())?;
            state = state.max(a.as_operator().max_abs_diff(b.as_operator()));
            let (sa, sb) = (strong_statistics(&a, &obs).unwrap(), strong_statistics(&b, &obs).unwrap());
            stats = sa.iter().zip(&sb).fold(stats, |m, (x, y)| m.max((x.1 - y.1).abs()));
        }
    }
    let s = within("state max-norm", state, 1e-14)?;
    let t = within("outcome probabilities", stats, 1e-13)?;
    Ok(format!("{s}, {t}"))
}

fn c6_superoperators() -> Check {
    let mut r = rng(106);
    let p = random_projector(&mut r, 2);
    let cs = collapse_superop(&p).superop;
    let idem = compose(&cs, &cs).unwrap().max_abs_diff(&cs);
    let mut pairing = 0.0f64;
    for d in [2, 3, 4] {
        for _ in 0..50 {
            let k = SuperOp::from_matrix(d, nalgebra::DMatrix::from_fn(d * d, d * d, |_, _| complex(&mut r))).unwrap();
            let a = Operator::from_fn(d, |_, _| complex(&mut r));
            let b = Operator::from_fn(d, |_, _| complex(&mut r));
            let lhs = hs_inner(&a, &apply_superop(&k, &b).unwrap()).unwrap();
            let rhs = hs_inner(&apply_superop(&superop_adjoint(&k), &a).unwrap(), &b).unwrap();
            pairing = pairing.max((lhs - rhs).norm());
        }
    }
    let mut adj = 0.0f64;
    for _ in 0..20 {
        let a = Operator::from_fn(2, |_, _| complex(&mut r));
        let back = apply_superop(&superop_adjoint(&cs), &a).unwrap();
        let want = &Operator::identity(2) * p.as_operator().trace_product(&a).unwrap();
        adj = adj.max(back.max_abs_diff(&want));
    }
    let mut completion = 0.0f64;
    for s in [0.1, 0.5, 0.9] {
        let first = SuperOp::identity(2).lincomb(1.0 - s, &cs, s).unwrap();
        let sol = solve_completion(&first, &cs).map_err(|e| e.to_string())?;
        if !sol.unique {
            return Err(format!("completion at s={s} not unique"));
        }
        completion = completion.max(sol.superop.max_abs_diff(&cs));
    }
    Ok([
        within("C²-C", idem, 1e-12)?,
        within("adjoint pairing", pairing, 1e-10)?,
        within("C†A", adj, 1e-12)?,
        within("unique completion", completion, 1e-9)?,
    ]
    .join(", "))
}

fn c7_backward_consistency() -> Check {
    let mut r = rng(107);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let dt = 0.2 + r.random::<f64>();
        let cfg = random_config_with(&mut r, 2, dt, dt);
        let t_w = dt * r.random::<f64>();
        let p = cfg.strong_projector();
        let rho1 = objective_state_at(cfg.rho_in(), p, t_w, dt).map_err(|e| e.to_string())?;
        let e = evolution_superop_objective(t_w, dt, p, dt).map_err(|e| e.to_string())?;
        let fwd = weak_value_forward(&e, rho1.as_operator(), cfg.rho_fin().as_operator(), cfg.weak_observable())
            .map_err(|e| e.to_string())?;
        let rho2 = backward_state(&e, cfg.rho_fin()).map_err(|e| e.to_string())?;
        let back = weak_value(rho1.as_operator(), &rho2, cfg.weak_observable()).map_err(|e| e.to_string())?;
        let closed = objective_weak_value_at(t_w, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((fwd.0 - back.0).norm()).max((fwd.0 - closed.0).norm());
    }
    within("max forward/adjoint/closed-form spread", worst, 1e-11)
}

fn c8_pointer() -> Check {
    let mut r = rng(108);
    let sigma = 1.0;
    let mut worst = 0.0f64;
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 * 1e-3 * sigma).collect();
    for _ in 0..5 {
        let obs = spectral_decompose(&Operator::pauli_z(), 1e-9).unwrap();
        let (psi1, psi2) = (random_ket(&mut r, 2), random_ket(&mut r, 2));
        let fit = weak_limit_slope(&psi1, &psi2, &obs, sigma, &grid).map_err(|e| e.to_string())?;
        worst = worst.max((fit.slope - fit.weak_value.re).abs() / fit.weak_value.norm());
    }
    // Nearly orthogonal pre- and postselection, |O_w| ≈ 1/sin ε.
    let eps = 1e-2;
    let q = std::f64::consts::FRAC_PI_4;
    let psi1 = StateVector::from_column_slice(&[c(q.cos(), 0.0), c(q.sin(), 0.0)]);
    let psi2 = StateVector::from_column_slice(&[c((eps - q).cos(), 0.0), c((eps - q).sin(), 0.0)]);
    let obs = spectral_decompose(&Operator::pauli_z(), 1e-9).unwrap();
    let fine: Vec<f64> = (1..=10).map(|k| k as f64 * 1e-6 * sigma).collect();
    let fit = weak_limit_slope(&psi1, &psi2, &obs, sigma, &fine).map_err(|e| e.to_string())?;
    if fit.weak_value.re < 10.0 {
        return Err(format!("weak value {} is not anomalous", fit.weak_value));
    }
    let anomalous = (fit.slope - fit.weak_value.re).abs() / fit.weak_value.norm();
    let psi1 = StateVector::from_column_slice(&[c(0.8, 0.0), c(0.6, 0.0)]);
    let psi2 = StateVector::from_column_slice(&[c(0.6, 0.2), c(-0.5, 0.3)]);
    let wide: Vec<f64> = (0..8).map(|k| 1e-2 * sigma * 10f64.powf(k as f64 / 7.0)).collect();
    let k = residual_scaling_exponent(&psi1, &psi2, &obs, sigma, &wide).map_err(|e| e.to_string())?;
    if !(2.5..=3.5).contains(&k) {
        return Err(format!("residual exponent {k} outside [2.5, 3.5]"));
    }
    Ok(format!(
        "{}, {} (O_w = {:.1}), residual exponent {k:.3}",
        within("relative slope error", worst, 1e-4)?,
        within("anomalous", anomalous, 1e-4)?,
        fit.weak_value.re
    ))
}

fn c9_limit_recovery() -> Check {
    let mut r = rng(109);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let d = r.random_range(2..=3);
        let cfg = random_config_with(&mut r, d, 1.0, 1e-6);
        let vn = averaged_weak_value_vn(&cfg).map_err(|e| e.to_string())?.0;
        let obj = averaged_weak_value_objective(&cfg).map_err(|e| e.to_string())?.0;
        worst = worst.max((obj - vn).norm() / vn.norm());
    }
    within("max relative gap at Δt_c/Δt_m = 1e-6", worst, 1e-5)
}

fn c10_cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &[
            "simulate",
            "--scenario",
            "hydrogen",
            "--dtc",
            "0.5",
            "--model",
            "objective",
            "--trials",
            "200000",
            "--seed",
            "7",
        ],
        &["simulate", "--scenario", "hydrogen", "--model", "vn", "--trials", "50000", "--seed", "7", "--format", "csv"],
        &["analytic", "--scenario", "hydrogen", "--a-re", "0.6", "--b-im", "0.3", "--dtc", "0.25"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}_{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_weakcollapse"))
                .args(*args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("`{}` exited with {status}", args.join(" ")));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Err(format!("`{}` produced differing output", args.join(" ")));
        }
    }
    Ok(format!("{} invocations byte-identical across repeats", runs.len()))
}

fn main() {
    let one_second = Some(Duration::from_secs(1));
    let criteria: [Criterion; 10] = [
        ("hydrogen instantaneous-collapse prediction", one_second, c1_hydrogen_vn),
        ("hydrogen continuous-collapse prediction, saturated branch", one_second, c2_hydrogen_saturated),
        ("hydrogen continuous-collapse prediction, jitter branch", None, c3_hydrogen_jitter_branch),
        ("Monte Carlo agreement", Some(Duration::from_secs(30)), c4_monte_carlo),
        ("indistinguishability under strong measurements", None, c5_indistinguishable),
        ("superoperator suite", None, c6_superoperators),
        ("backward-evolution consistency", None, c7_backward_consistency),
        ("pointer weak limit", None, c8_pointer),
        ("limit recovery", None, c9_limit_recovery),
        ("CLI determinism", None, c10_cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        match timed(*limit, check) {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
