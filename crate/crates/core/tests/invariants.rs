use cellsim::asymptotics::{lemma1_bounds, lemma2_bounds, theorem1_envelope};
use cellsim::channel_model::ChannelModel;
use cellsim::montecarlo::{run_scenario, ScenarioConfig};
use cellsim::scheduling::SchedulerKind;

fn scenario(model: ChannelModel, grid: Vec<usize>, trials: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_grid: grid,
        trials_per_n: trials,
        ..ScenarioConfig::macro_default(model)
    }
}

#[test]
fn ci_halves_when_trials_quadruple() {
    let a = run_scenario(&scenario(ChannelModel::Symmetric, vec![64], 2_000), 2).unwrap();
    let b = run_scenario(&scenario(ChannelModel::Symmetric, vec![64], 8_000), 2).unwrap();
    let ratio = a[0].delta_r.ci / b[0].delta_r.ci;
    assert!((ratio - 2.0).abs() < 0.15, "ratio {ratio}");
    let ra = a[0].scheduler(SchedulerKind::MaxSinr).unwrap().rate.ci;
    let rb = b[0].scheduler(SchedulerKind::MaxSinr).unwrap().rate.ci;
    assert!((ra / rb - 2.0).abs() < 0.15);
}

#[test]
fn max_sinr_leaves_less_interference_than_max_gain() {
    let curve = run_scenario(&scenario(ChannelModel::Asymmetric, vec![64, 256, 1024], 4_000), 2).unwrap();
    for p in &curve {
        let s = p.scheduler(SchedulerKind::MaxSinr).unwrap().beta;
        let g = p.scheduler(SchedulerKind::MaxGain).unwrap().beta;
        assert!(s.mean <= g.mean, "n = {}: {s:?} vs {g:?}", p.n);
    }
}

#[test]
fn sample_gap_nonnegative_and_drops_ordered() {
    for model in [ChannelModel::Symmetric, ChannelModel::Asymmetric] {
        for p in run_scenario(&scenario(model, vec![1, 4, 16, 64], 3_000), 2).unwrap() {
            assert_eq!(p.ordering_violations, 0);
            assert!(p.delta_r.mean >= 0.0);
            let rate = |k| p.scheduler(k).unwrap().rate.mean;
            assert!(rate(SchedulerKind::NoInterference) >= rate(SchedulerKind::ClusterFree));
            assert!(rate(SchedulerKind::ClusterFree) >= rate(SchedulerKind::MaxSinr));
        }
    }
}

#[test]
fn overlay_columns_match_bound_functions() {
    let cfg = scenario(ChannelModel::Symmetric, vec![16, 1024], 50);
    let rho = cfg.symmetric_rho().unwrap();
    for p in run_scenario(&cfg, 1).unwrap() {
        let n = p.n as f64;
        assert_eq!(p.bounds.lemma1, Some(lemma1_bounds(n, rho).unwrap()));
        assert_eq!(p.bounds.lemma2, Some(lemma2_bounds(n, rho, 6).unwrap()));
        assert_eq!(p.bounds.theorem1, Some(theorem1_envelope(n, 6).unwrap()));
    }
}
