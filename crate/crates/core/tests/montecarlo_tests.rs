mod common;

use common::*;
use weakcollapse::hydrogen::{hydrogen_closed_form, HydrogenScenario};
use weakcollapse::montecarlo::{
    convergence_report, simulate, simulate_objective, simulate_vn, trial_uniforms, AveragedResult, SimulationSpec,
};
use weakcollapse::operator::c;
use weakcollapse::protocol::averaged_weak_value;
use weakcollapse::{Averaging, Model, ProtocolConfig, WeakValue};

fn spec(cfg: &ProtocolConfig, model: Model, trials: u64, seed: u64) -> SimulationSpec {
    SimulationSpec { cfg: cfg.clone(), model, trials, seed }
}

/// Largest of the real and imaginary z-scores; a vanishing standard error
/// requires an exact match.
fn worst_z(res: &AveragedResult, target: WeakValue) -> f64 {
    let part = |d: f64, se: f64| {
        if se > 0.0 {
            (d / se).abs()
        } else if d.abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    part(res.mean.re() - target.re(), res.stderr).max(part(res.mean.im() - target.im(), res.stderr_im))
}

#[test]
fn hydrogen_runs_hit_closed_forms() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sc = HydrogenScenario::new(c(s, 0.0), c(0.6, 0.3), 1.0).unwrap();
    for dtc in [0.5, 2.0] {
        let cfg = sc.config(1.0, dtc).unwrap();
        let want = hydrogen_closed_form(&sc, dtc, 1.0);
        let vn = simulate_vn(&spec(&cfg, Model::VonNeumann, 100_000, 3)).unwrap();
        assert!(worst_z(&vn, want.vn) <= 4.0, "{vn:?}");
        let obj = simulate_objective(&spec(&cfg, Model::Objective, 100_000, 3)).unwrap();
        assert!(worst_z(&obj, want.objective) <= 4.0, "{obj:?}");
    }
}

#[test]
fn random_configs_agree_with_analytic_averages() {
    let mut r = rng(50);
    for d in [2, 3, 2] {
        let cfg = random_config(&mut r, d);
        for model in [Model::VonNeumann, Model::Objective] {
            let res = simulate(&spec(&cfg, model, 200_000, 11)).unwrap();
            let want = averaged_weak_value(&cfg, model, Averaging::Uniform).unwrap();
            assert!(worst_z(&res, want) <= 4.0, "{model:?}: {res:?} vs {want:?}");
        }
    }
}

#[test]
fn same_seed_same_result() {
    let cfg = random_config(&mut rng(51), 2);
    let a = simulate(&spec(&cfg, Model::Objective, 40_000, 99)).unwrap();
    let b = simulate(&spec(&cfg, Model::Objective, 40_000, 99)).unwrap();
    assert_eq!(a.csv_row(), b.csv_row());
    let other = simulate(&spec(&cfg, Model::Objective, 40_000, 100)).unwrap();
    assert_ne!(a.mean, other.mean);
}

#[test]
fn seeds_are_unbiased_on_average() {
    let cfg = random_config(&mut rng(52), 2);
    let want = averaged_weak_value(&cfg, Model::VonNeumann, Averaging::Uniform).unwrap();
    let zs: Vec<f64> = (0..50)
        .map(|seed| simulate(&spec(&cfg, Model::VonNeumann, 10_000, seed)).unwrap().z_score(want).unwrap())
        .collect();
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len() - 1) as f64;
    assert!(mean.abs() < 4.0 / (zs.len() as f64).sqrt(), "mean z = {mean}");
    assert!((0.5..2.0).contains(&var), "z variance = {var}");
}

#[test]
fn orderings_are_equally_likely() {
    let n = 200_000u64;
    let later = (0..n).filter(|&i| {
        let (s, w) = trial_uniforms(5, i);
        w > s
    });
    let frac = later.count() as f64 / n as f64;
    assert!((frac - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{frac}");
}

#[test]
fn draws_lie_in_unit_interval_and_differ() {
    for i in 0..1000 {
        let (s, w) = trial_uniforms(1, i);
        assert!((0.0..1.0).contains(&s) && (0.0..1.0).contains(&w));
        assert_ne!(s, w);
    }
    assert_ne!(trial_uniforms(1, 0), trial_uniforms(2, 0));
}

#[test]
fn convergence_follows_inverse_root() {
    let cfg = random_config(&mut rng(53), 2);
    let checkpoints = [1_000, 10_000, 100_000, 1_000_000];
    for model in [Model::VonNeumann, Model::Objective] {
        let want = averaged_weak_value(&cfg, model, Averaging::Uniform).unwrap();
        let report = convergence_report(&spec(&cfg, model, 1_000_000, 8), &checkpoints).unwrap();
        assert_eq!(report.len(), checkpoints.len());
        for (res, &n) in report.iter().zip(&checkpoints) {
            assert_eq!(res.trials, n);
            assert!(worst_z(res, want) <= 5.0, "{model:?} at {n}");
        }
        for w in report.windows(2) {
            let ratio = w[0].stderr / w[1].stderr;
            assert!((10f64.sqrt() / 2.0..10f64.sqrt() * 2.0).contains(&ratio), "ratio {ratio}");
        }
        let full = simulate(&spec(&cfg, model, 1_000_000, 8)).unwrap();
        let last = report.last().unwrap();
        assert!((full.mean.0 - last.mean.0).norm() < 1e-12);
    }
}

#[test]
fn invalid_runs_are_rejected() {
    let cfg = random_config(&mut rng(54), 2);
    assert!(simulate(&spec(&cfg, Model::VonNeumann, 0, 1)).is_err());
    assert!(simulate_vn(&spec(&cfg, Model::Objective, 10, 1)).is_err());
    assert!(convergence_report(&spec(&cfg, Model::VonNeumann, 10, 1), &[10, 5]).is_err());
    assert!(convergence_report(&spec(&cfg, Model::VonNeumann, 10, 1), &[0, 5]).is_err());
}

#[test]
fn csv_row_matches_header() {
    let cfg = random_config(&mut rng(55), 2);
    let res = simulate(&spec(&cfg, Model::VonNeumann, 100, 4)).unwrap();
    let row = res.csv_row();
    assert_eq!(row.split(',').count(), AveragedResult::CSV_HEADER.split(',').count());
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[..3], ["vn", "100", "4"]);
    assert_eq!(fields[3].parse::<f64>().unwrap(), res.mean.re());
}

#[test]
fn constant_trials_have_zero_error_and_zero_z() {
    let sc = HydrogenScenario::new(c(0.4, 0.1), c(0.6, 0.3), 1.0).unwrap();
    let cfg = sc.config(1.0, 0.5).unwrap();
    let res = simulate_vn(&spec(&cfg, Model::VonNeumann, 10_000, 1)).unwrap();
    assert_eq!(res.stderr, 0.0);
    assert_eq!(res.z_score(WeakValue(c(0.5, 0.0))), Some(0.0));
    assert_eq!(res.z_score(WeakValue(c(0.6, 0.0))), None);
}
