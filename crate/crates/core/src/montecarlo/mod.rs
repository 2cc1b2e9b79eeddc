//! Trial orchestration over a grid of user counts.
//!
//! Each trial draws one drop and applies every scheduler to it (common random
//! numbers). Trial `t` at user count `n` always uses the stream
//! `(master_seed, n, t)`, and per-trial results are reduced in trial order,
//! so a run is a pure function of its [`ScenarioConfig`] whatever the worker
//! count.

pub mod config;
pub mod ks;
pub mod output;
pub mod stats;
pub mod verdict;

use rayon::prelude::*;

pub use config::{pow2_grid, ScenarioConfig};
pub use ks::empirical_cdf_distance;
pub use stats::MeanCi;
pub use verdict::{convergence_verdict, ConvergenceVerdict, Quantity, Trend, Verdict};

use crate::asymptotics::{self, Bounds};
use crate::channel_model::{fill_drop, NetworkGeometry, RngStream, SimRng, UserSample, CLUSTER_SIZE};
use crate::error::{Error, Result};
use crate::joint_processing::{jp_evaluate, ClusterChannel};
use crate::scheduling::{schedule_users, SchedulerKind};

/// Attempts at redrawing the phases of a singular cluster channel.
const MAX_JP_REDRAWS: usize = 64;

/// Per-scheduler statistics at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerStats {
    pub kind: SchedulerKind,
    pub rate: MeanCi,
    /// Mean noise-normalized interference of the selected user.
    pub beta: MeanCi,
}

/// Analytical overlays evaluated at a grid point (symmetric model only).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundOverlay {
    pub lemma1: Option<Bounds>,
    pub lemma2: Option<Bounds>,
    pub theorem1: Option<Bounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub trials: usize,
    pub schedulers: Vec<SchedulerStats>,
    pub delta_r: MeanCi,
    pub jp_rate: Option<MeanCi>,
    /// Singular cluster channels that had to be redrawn.
    pub jp_redraws: usize,
    /// Drops on which `rate(no_interference) >= rate(max_sinr) >= rate(max_gain)` failed.
    pub ordering_violations: usize,
    pub bounds: BoundOverlay,
}

impl CurvePoint {
    pub fn scheduler(&self, kind: SchedulerKind) -> Option<&SchedulerStats> {
        self.schedulers.iter().find(|s| s.kind == kind)
    }
}

/// Raw outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TrialOutcome {
    rate: [f64; 4],
    beta: [f64; 4],
    delta: f64,
    jp_rate: f64,
    jp_redraws: usize,
    ordered: bool,
}

fn slot(kind: SchedulerKind) -> usize {
    match kind {
        SchedulerKind::NoInterference => 0,
        SchedulerKind::ClusterFree => 1,
        SchedulerKind::MaxSinr => 2,
        SchedulerKind::MaxGain => 3,
    }
}

/// Everything a trial needs that does not change across trials.
struct TrialContext<'a> {
    config: &'a ScenarioConfig,
    sites: Vec<NetworkGeometry>,
    budget: crate::channel_model::LinkBudget,
    tx_power: f64,
}

impl<'a> TrialContext<'a> {
    fn new(config: &'a ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let geometry = config.geometry()?;
        let sites = if config.jp_enabled {
            geometry.cluster_sites()?.to_vec()
        } else {
            vec![geometry]
        };
        let budget = config.budget();
        Ok(TrialContext {
            config,
            tx_power: budget.snr_scale(),
            sites,
            budget,
        })
    }

    fn run(&self, n: usize, trial: usize, cells: &mut [Vec<UserSample>]) -> Result<TrialOutcome> {
        let cfg = self.config;
        let mut rng: SimRng = RngStream::for_trial(cfg.master_seed, n, trial).rng();
        fill_drop(cfg.model, &self.sites[0], &cfg.path_loss, &self.budget, n, &mut rng, &mut cells[0])?;

        let mut rate = [f64::NAN; 4];
        let mut beta = [f64::NAN; 4];
        for kind in SchedulerKind::ALL {
            let d = schedule_users(&cells[0], kind)?;
            rate[slot(kind)] = d.rate_bpcu;
            beta[slot(kind)] = d.residual_beta;
        }
        let up = rate[slot(SchedulerKind::NoInterference)];
        let sinr = rate[slot(SchedulerKind::MaxSinr)];
        let gain = rate[slot(SchedulerKind::MaxGain)];

        let (jp_rate, jp_redraws) = if cfg.jp_enabled {
            self.joint_processing(n, &mut rng, cells)?
        } else {
            (f64::NAN, 0)
        };
        Ok(TrialOutcome {
            rate,
            beta,
            delta: up - sinr,
            jp_rate,
            jp_redraws,
            ordered: up >= sinr && sinr >= gain,
        })
    }

    /// Each cluster BS picks its max-SINR user; the three are then served jointly.
    fn joint_processing(
        &self,
        n: usize,
        rng: &mut SimRng,
        cells: &mut [Vec<UserSample>],
    ) -> Result<(f64, usize)> {
        let cfg = self.config;
        // Interferer scaling describes the reference cell only.
        let budget = crate::channel_model::LinkBudget::new(cfg.tx_power_dbm, cfg.noise_dbm);
        for c in 1..CLUSTER_SIZE {
            fill_drop(cfg.model, &self.sites[c], &cfg.path_loss, &budget, n, rng, &mut cells[c])?;
        }
        let mut picked = [UserSample::default(); CLUSTER_SIZE];
        for c in 0..CLUSTER_SIZE {
            let d = schedule_users(&cells[c], SchedulerKind::MaxSinr)?;
            picked[c] = cells[c][d.selected_index];
        }
        let beta_out = picked.map(|u| u.beta_out);
        for redraws in 0..MAX_JP_REDRAWS {
            let channel = ClusterChannel::from_selected([&picked[0], &picked[1], &picked[2]], self.tx_power, rng);
            match jp_evaluate(&channel, self.tx_power, &beta_out) {
                Ok(outcome) => return Ok((outcome.mean_rate(), redraws)),
                Err(Error::SingularChannel { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::SingularChannel {
            condition: f64::INFINITY,
        })
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::arg("workers", e.to_string()))
}

fn run_trials(ctx: &TrialContext<'_>, n: usize, pool: &rayon::ThreadPool) -> Result<Vec<TrialOutcome>> {
    let cells = if ctx.config.jp_enabled { CLUSTER_SIZE } else { 1 };
    pool.install(|| {
        (0..ctx.config.trials_per_n)
            .into_par_iter()
            .map_init(
                || vec![Vec::<UserSample>::with_capacity(n); cells],
                |buffers, t| ctx.run(n, t, buffers),
            )
            .collect()
    })
}

fn bound_overlay(config: &ScenarioConfig, n: usize) -> BoundOverlay {
    if config.model != crate::channel_model::ChannelModel::Symmetric || n < 3 {
        return BoundOverlay::default();
    }
    let n = n as f64;
    let rho = config.symmetric_rho().ok();
    BoundOverlay {
        lemma1: rho.and_then(|r| asymptotics::lemma1_bounds(n, r).ok()),
        lemma2: rho.and_then(|r| asymptotics::lemma2_bounds(n, r, config.interferers).ok()),
        theorem1: asymptotics::theorem1_envelope(n, config.interferers).ok(),
    }
}

fn summarize(config: &ScenarioConfig, n: usize, outcomes: &[TrialOutcome]) -> CurvePoint {
    let column = |f: &dyn Fn(&TrialOutcome) -> f64| -> MeanCi {
        let v: Vec<f64> = outcomes.iter().map(f).collect();
        MeanCi::from_samples(&v)
    };
    let schedulers = config
        .schedulers
        .iter()
        .map(|&kind| SchedulerStats {
            kind,
            rate: column(&|o| o.rate[slot(kind)]),
            beta: column(&|o| o.beta[slot(kind)]),
        })
        .collect();
    CurvePoint {
        n,
        trials: outcomes.len(),
        schedulers,
        delta_r: column(&|o| o.delta),
        jp_rate: config.jp_enabled.then(|| column(&|o| o.jp_rate)),
        jp_redraws: outcomes.iter().map(|o| o.jp_redraws).sum(),
        ordering_violations: outcomes.iter().filter(|o| !o.ordered).count(),
        bounds: bound_overlay(config, n),
    }
}

/// Runs every trial at user count `n` on `workers` threads.
pub fn run_point(config: &ScenarioConfig, n: usize, workers: usize) -> Result<CurvePoint> {
    if !config.n_grid.contains(&n) {
        return Err(Error::arg("n", format!("{n} is not in the scenario grid")));
    }
    let ctx = TrialContext::new(config)?;
    let pool = thread_pool(workers)?;
    let outcomes = run_trials(&ctx, n, &pool)?;
    Ok(summarize(config, n, &outcomes))
}

/// One [`CurvePoint`] per grid entry, in grid order.
pub fn run_scenario(config: &ScenarioConfig, workers: usize) -> Result<Vec<CurvePoint>> {
    let ctx = TrialContext::new(config)?;
    let pool = thread_pool(workers)?;
    config
        .n_grid
        .iter()
        .map(|&n| run_trials(&ctx, n, &pool).map(|o| summarize(config, n, &o)))
        .collect()
}
