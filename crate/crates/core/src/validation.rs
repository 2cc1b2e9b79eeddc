//! Executable acceptance criteria, grouped into suites.
//!
//! Each criterion produces a [`CriterionReport`] with the measured value, the
//! threshold it is held to and a pass flag. Scenario runs are separated from
//! the checks so several criteria can share one simulation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::asymptotics::{frechet_cdf, frechet_scale, gumbel_cdf_approx};
use crate::channel_model::{fill_drop, ChannelModel, PathLossSpec, RngStream, UserSample};
use crate::error::{Error, Result};
use crate::joint_processing::{
    per_bs_normalize, waterfilling, zf_precoder, CMatrix3, ClusterChannel, Complex64,
};
use crate::montecarlo::output::csv_string;
use crate::montecarlo::stats::fit_through_origin;
use crate::montecarlo::{
    convergence_verdict, empirical_cdf_distance, pow2_grid, run_scenario, CurvePoint, MeanCi,
    Quantity, ScenarioConfig, Verdict,
};
use crate::scheduling::{rate_bits, SchedulerKind};

/// Stream ids at or above this are reserved for validation draws, far from
/// the `(n << 32) | trial` ids used by scenario runs.
const VALIDATION_STREAM: u64 = 0xFFFF_0000_0000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Criterion sizes as specified; bounded runtime.
    Desk,
    /// Larger grids and trial counts.
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::arg("scale", format!("expected desk or full, got {s:?}"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    SymmetricBounds,
    AsymmetricLimits,
    EvtCdf,
    JpSanity,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::SymmetricBounds,
        Suite::AsymmetricLimits,
        Suite::EvtCdf,
        Suite::JpSanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SymmetricBounds => "symmetric-bounds",
            Suite::AsymmetricLimits => "asymmetric-limits",
            Suite::EvtCdf => "evt-cdf",
            Suite::JpSanity => "jp-sanity",
        }
    }

    /// Criterion ids the suite runs.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::SymmetricBounds => &[1, 4, 5, 11, 12],
            Suite::AsymmetricLimits => &[6, 7],
            Suite::EvtCdf => &[2, 3],
            Suite::JpSanity => &[8, 9, 10],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::arg("suite", format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    pub scale: Scale,
    pub workers: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            scale: Scale::Desk,
            workers: rayon::current_num_threads(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: String,
    pub pass: bool,
    pub detail: String,
}

impl CriterionReport {
    fn failed(id: u8, err: &Error) -> Self {
        CriterionReport {
            id,
            name: criterion_name(id),
            measured: f64::NAN,
            threshold: "-".into(),
            pass: false,
            detail: format!("error: {err}"),
        }
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion={} name={} measured={} threshold={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            crate::montecarlo::output::fmt_sig9(self.measured),
            self.threshold
        )?;
        if !self.detail.is_empty() {
            write!(f, " detail=\"{}\"", self.detail)?;
        }
        Ok(())
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "per-drop-ordering",
        2 => "gumbel-limit",
        3 => "frechet-limit",
        4 => "symmetric-gap-trend",
        5 => "symmetric-vanishing-interference",
        6 => "asymmetric-positive-limit",
        7 => "max-sinr-max-gain-overlap",
        8 => "jp-matches-cluster-free",
        9 => "waterfilling-oracle",
        10 => "zf-correctness",
        11 => "path-loss-invariance",
        12 => "worker-determinism",
        _ => "unknown",
    }
}

// ---------------------------------------------------------------------------
// Scenarios

fn scenario_grid(scale: Scale) -> Vec<usize> {
    match scale {
        Scale::Desk => pow2_grid(6, 14),
        Scale::Full => pow2_grid(6, 16),
    }
}

fn scenario_trials(scale: Scale) -> usize {
    match scale {
        Scale::Desk => 20_000,
        Scale::Full => 50_000,
    }
}

/// Macro-cell default scenario on the validation grid.
pub fn macro_scenario(model: ChannelModel, opts: &ValidationOptions) -> ScenarioConfig {
    ScenarioConfig {
        n_grid: scenario_grid(opts.scale),
        trials_per_n: scenario_trials(opts.scale),
        master_seed: opts.seed,
        ..ScenarioConfig::macro_default(model)
    }
}

/// Macro-cell default scenario with joint processing, on the figure grid.
pub fn jp_scenario(model: ChannelModel, opts: &ValidationOptions) -> ScenarioConfig {
    ScenarioConfig {
        n_grid: match opts.scale {
            Scale::Desk => pow2_grid(4, 14),
            Scale::Full => pow2_grid(4, 16),
        },
        trials_per_n: match opts.scale {
            Scale::Desk => 2_000,
            Scale::Full => 10_000,
        },
        jp_enabled: true,
        master_seed: opts.seed,
        schedulers: vec![SchedulerKind::ClusterFree, SchedulerKind::MaxSinr],
        ..ScenarioConfig::macro_default(model)
    }
}

/// Symmetric scenario whose interferer gains are scaled by factors drawn
/// log-uniformly from `[0.25, 4]`.
pub fn scaled_interference_scenario(opts: &ValidationOptions) -> ScenarioConfig {
    let mut cfg = macro_scenario(ChannelModel::Symmetric, opts);
    let mut rng = RngStream::new(opts.seed, VALIDATION_STREAM + 11).rng();
    let (lo, hi) = (0.25f64.ln(), 4.0f64.ln());
    cfg.interferer_scale = (0..cfg.interferers)
        .map(|_| rng.random_range(lo..=hi).exp())
        .collect();
    cfg.schedulers = vec![SchedulerKind::NoInterference, SchedulerKind::MaxSinr];
    cfg
}

// ---------------------------------------------------------------------------
// Curve checks

/// `log2(ln n) / ln n`, the rate-gap scaling of the symmetric model.
pub fn gap_scaling(n: f64) -> f64 {
    n.ln().log2() / n.ln()
}

/// Steps where the curve rises by more than the combined 95% half-widths.
fn increases_beyond_ci(series: &[MeanCi]) -> (usize, f64) {
    let mut count = 0;
    let mut worst = f64::NEG_INFINITY;
    for w in series.windows(2) {
        let excess = (w[1].mean - w[0].mean) - (w[0].ci + w[1].ci);
        worst = worst.max(excess);
        if excess > 0.0 {
            count += 1;
        }
    }
    (count, worst)
}

fn series(curve: &[CurvePoint], q: Quantity) -> Result<Vec<MeanCi>> {
    curve
        .iter()
        .map(|p| {
            q.extract(p)
                .ok_or_else(|| Error::arg("curve", format!("{q} missing at n = {}", p.n)))
        })
        .collect()
}

/// Fitted coefficient `k` of `delta_R ~ k log2(ln n)/ln n` and whether the
/// curve decreases within its confidence intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapTrend {
    pub coefficient: f64,
    pub rises: usize,
    pub worst_rise: f64,
}

pub fn gap_trend(curve: &[CurvePoint]) -> Result<GapTrend> {
    let gap = series(curve, Quantity::DeltaR)?;
    let x: Vec<f64> = curve.iter().map(|p| gap_scaling(p.n as f64)).collect();
    let y: Vec<f64> = gap.iter().map(|v| v.mean).collect();
    let coefficient =
        fit_through_origin(&x, &y).ok_or_else(|| Error::arg("curve", "degenerate fit"))?;
    let (rises, worst_rise) = increases_beyond_ci(&gap);
    Ok(GapTrend {
        coefficient,
        rises,
        worst_rise,
    })
}

/// Acceptance band for the fitted gap coefficient: `[N-2, N+2]` widened by 50%.
pub fn gap_coefficient_band(interferers: usize) -> (f64, f64) {
    let k = interferers as f64;
    (0.5 * (k - 2.0).max(0.0), 1.5 * (k + 2.0))
}

/// Criterion 1: exact per-drop ordering of the three rates in both models.
pub fn check_ordering(opts: &ValidationOptions) -> Result<CriterionReport> {
    let trials = match opts.scale {
        Scale::Desk => 15_000,
        Scale::Full => 50_000,
    };
    let mut drops = 0;
    let mut violations = 0;
    for model in [ChannelModel::Symmetric, ChannelModel::Asymmetric] {
        let cfg = ScenarioConfig {
            n_grid: pow2_grid(4, 10),
            trials_per_n: trials,
            master_seed: opts.seed,
            ..ScenarioConfig::macro_default(model)
        };
        for p in run_scenario(&cfg, opts.workers)? {
            drops += p.trials;
            violations += p.ordering_violations;
        }
    }
    Ok(CriterionReport {
        id: 1,
        name: criterion_name(1),
        measured: violations as f64,
        threshold: "== 0".into(),
        pass: violations == 0,
        detail: format!("{drops} drops over both models"),
    })
}

/// Criterion 2: centered maxima of `m` unit exponentials against the Gumbel limit.
pub fn gumbel_ks_distance(m: usize, trials: usize, seed: u64, workers: usize) -> Result<f64> {
    let shift = (m as f64).ln();
    let samples = in_pool(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngStream::new(seed, VALIDATION_STREAM + (2 << 32) + t as u64).rng();
                let max = (0..m)
                    .map(|_| Distribution::<f64>::sample(&Exp1, &mut rng))
                    .fold(f64::NEG_INFINITY, f64::max);
                max - shift
            })
            .collect::<Vec<f64>>()
    })?;
    empirical_cdf_distance(&samples, gumbel_cdf_approx)
}

pub fn check_gumbel(opts: &ValidationOptions) -> Result<CriterionReport> {
    let trials = match opts.scale {
        Scale::Desk => 100_000,
        Scale::Full => 400_000,
    };
    let d = gumbel_ks_distance(1000, trials, opts.seed, opts.workers)?;
    Ok(CriterionReport {
        id: 2,
        name: criterion_name(2),
        measured: d,
        threshold: "<= 0.01".into(),
        pass: d <= 0.01,
        detail: format!("n = 1000, {trials} trials"),
    })
}

/// Criterion 3: `max alpha / frechet_scale(n)` in an asymmetric power-law cell
/// against the Frechet limit.
pub fn frechet_ks_distance(
    n: usize,
    trials: usize,
    epsilon: f64,
    seed: u64,
    workers: usize,
) -> Result<f64> {
    // Unit radius and 0 dB link budget make alpha = d^-eps * G exactly.
    let cfg = ScenarioConfig {
        n_grid: vec![n],
        trials_per_n: trials,
        tx_power_dbm: 0.0,
        noise_dbm: 0.0,
        cell_radius_km: 1.0,
        symmetric_radius_km: 0.5,
        path_loss: PathLossSpec::Generic {
            lambda: 1.0,
            epsilon,
        },
        ..ScenarioConfig::macro_default(ChannelModel::Asymmetric)
    };
    cfg.validate()?;
    let geometry = cfg.geometry()?;
    let budget = cfg.budget();
    let scale = frechet_scale(n as f64, 1.0, epsilon)?;
    let samples = in_pool(workers, || {
        (0..trials)
            .into_par_iter()
            .map_init(
                || Vec::<UserSample>::with_capacity(n),
                |users, t| {
                    let mut rng =
                        RngStream::new(seed, VALIDATION_STREAM + (3 << 32) + t as u64).rng();
                    fill_drop(cfg.model, &geometry, &cfg.path_loss, &budget, n, &mut rng, users)?;
                    let max = users.iter().map(|u| u.alpha).fold(0.0, f64::max);
                    Ok(max / scale)
                },
            )
            .collect::<Result<Vec<f64>>>()
    })??;
    empirical_cdf_distance(&samples, |t| frechet_cdf(t, epsilon).unwrap_or(0.0))
}

pub fn check_frechet(opts: &ValidationOptions) -> Result<CriterionReport> {
    let trials = match opts.scale {
        Scale::Desk => 10_000,
        Scale::Full => 40_000,
    };
    let d = frechet_ks_distance(4096, trials, 4.0, opts.seed, opts.workers)?;
    Ok(CriterionReport {
        id: 3,
        name: criterion_name(3),
        measured: d,
        threshold: "<= 0.03".into(),
        pass: d <= 0.03,
        detail: format!("generic(1, 4), n = 4096, {trials} trials"),
    })
}

/// Criterion 4 on a symmetric macro-cell default curve.
pub fn check_gap_trend(curve: &[CurvePoint], interferers: usize) -> Result<CriterionReport> {
    let t = gap_trend(curve)?;
    let (lo, hi) = gap_coefficient_band(interferers);
    let pass = t.rises == 0 && t.coefficient > 0.0 && (lo..=hi).contains(&t.coefficient);
    Ok(CriterionReport {
        id: 4,
        name: criterion_name(4),
        measured: t.coefficient,
        threshold: format!("in [{lo}, {hi}], no CI-exceeding rise"),
        pass,
        detail: format!("rises beyond CI = {}, worst step excess = {:.3e}", t.rises, t.worst_rise),
    })
}

/// Criterion 5 on a symmetric macro-cell default curve.
pub fn check_vanishing_interference(curve: &[CurvePoint]) -> Result<CriterionReport> {
    let q = Quantity::MeanBeta(SchedulerKind::MaxSinr);
    let beta = series(curve, q)?;
    let (rises, _) = increases_beyond_ci(&beta);
    let ratio = beta[0].mean / beta[beta.len() - 1].mean;
    let verdict = convergence_verdict(curve, q)?;
    let pass = rises == 0 && ratio >= 2.0 && verdict.verdict != Verdict::PositiveLimit;
    Ok(CriterionReport {
        id: 5,
        name: criterion_name(5),
        measured: ratio,
        threshold: ">= 2, monotone, verdict != positive-limit".into(),
        pass,
        detail: format!(
            "beta {:.4} -> {:.4} over n = {}..{}, rises beyond CI = {rises}, verdict = {}",
            beta[0].mean,
            beta[beta.len() - 1].mean,
            curve[0].n,
            curve[curve.len() - 1].n,
            verdict.label()
        ),
    })
}

/// Criterion 6 on an asymmetric macro-cell default curve.
pub fn check_asymmetric_limits(curve: &[CurvePoint]) -> Result<CriterionReport> {
    let beta = convergence_verdict(curve, Quantity::MeanBeta(SchedulerKind::MaxSinr))?;
    let gap = convergence_verdict(curve, Quantity::DeltaR)?;
    let last = beta.limit_estimate;
    let last_ci = series(curve, Quantity::MeanBeta(SchedulerKind::MaxSinr))?
        .last()
        .copied()
        .expect("non-empty curve");
    let step = beta.diagnostics.max_relative_step;
    let pass = step < 0.05
        && last_ci.lower() > 0.0
        && beta.verdict == Verdict::PositiveLimit
        && gap.verdict == Verdict::PositiveLimit;
    Ok(CriterionReport {
        id: 6,
        name: criterion_name(6),
        measured: step,
        threshold: "< 0.05, both verdicts positive-limit".into(),
        pass,
        detail: format!(
            "beta* = {:.4} +- {:.4} ({}), delta_R = {:.4} ({})",
            last.mean,
            last_ci.ci,
            beta.label(),
            gap.limit_estimate.mean,
            gap.label()
        ),
    })
}

/// Criterion 7: max-SINR and max-Gain rates within 3% for `n >= 256`.
pub fn check_overlap(curve: &[CurvePoint]) -> Result<CriterionReport> {
    let mut worst: f64 = 0.0;
    let mut at = 0;
    for p in curve.iter().filter(|p| p.n >= 256) {
        let s = series(std::slice::from_ref(p), Quantity::MeanRate(SchedulerKind::MaxSinr))?[0].mean;
        let g = series(std::slice::from_ref(p), Quantity::MeanRate(SchedulerKind::MaxGain))?[0].mean;
        let rel = (s - g).abs() / s;
        if rel >= worst {
            worst = rel;
            at = p.n;
        }
    }
    if at == 0 {
        return Err(Error::arg("curve", "no grid point with n >= 256"));
    }
    Ok(CriterionReport {
        id: 7,
        name: criterion_name(7),
        measured: worst,
        threshold: "<= 0.03".into(),
        pass: worst <= 0.03,
        detail: format!("worst at n = {at}"),
    })
}

/// Largest relative gap between the JP rate and the cluster-free bound, and where.
pub fn jp_relative_gap(curve: &[CurvePoint]) -> Result<(f64, usize)> {
    let jp = series(curve, Quantity::JpRate)?;
    let bound = series(curve, Quantity::MeanRate(SchedulerKind::ClusterFree))?;
    let mut worst = (0.0, 0);
    for ((j, b), p) in jp.iter().zip(&bound).zip(curve) {
        let rel = (j.mean - b.mean).abs() / b.mean;
        if rel >= worst.0 {
            worst = (rel, p.n);
        }
    }
    Ok(worst)
}

/// Criterion 8 on JP-enabled curves of both models.
pub fn check_jp(symmetric: &[CurvePoint], asymmetric: &[CurvePoint]) -> Result<CriterionReport> {
    let (s, sn) = jp_relative_gap(symmetric)?;
    let (a, an) = jp_relative_gap(asymmetric)?;
    let worst = s.max(a);
    Ok(CriterionReport {
        id: 8,
        name: criterion_name(8),
        measured: worst,
        threshold: "<= 0.05".into(),
        pass: worst <= 0.05,
        detail: format!("symmetric {s:.4} at n = {sn}, asymmetric {a:.4} at n = {an}"),
    })
}

/// Best sum rate over a grid of step `step * total` on the 3-stream simplex.
pub fn grid_search_sum_rate(gains: [f64; 3], total: f64, step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let table: Vec<[f64; 3]> = (0..=k)
        .map(|i| {
            let p = total * i as f64 / k as f64;
            gains.map(|g| rate_bits(g * p))
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        for j in 0..=k - i {
            best = best.max(table[i][0] + table[j][1] + table[k - i - j][2]);
        }
    }
    best
}

/// Criterion 9: waterfilling against a simplex grid search.
pub fn check_waterfilling(opts: &ValidationOptions) -> Result<CriterionReport> {
    let instances = match opts.scale {
        Scale::Desk => 1_000,
        Scale::Full => 5_000,
    };
    let results = in_pool(opts.workers, || {
        (0..instances)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngStream::new(opts.seed, VALIDATION_STREAM + (9 << 32) + t as u64).rng();
                let gains: [f64; 3] = std::array::from_fn(|_| 10f64.powf(rng.random_range(-2.0..2.0)));
                let total = 10f64.powf(rng.random_range(-1.0..2.0));
                let alloc = waterfilling(&gains, total)?;
                let shortfall = grid_search_sum_rate(gains, total, 1e-3) - alloc.sum_rate(&gains);
                let sum_err = (alloc.total() - total).abs() / total;
                Ok((shortfall, sum_err))
            })
            .collect::<Result<Vec<(f64, f64)>>>()
    })??;
    let shortfall = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let sum_err = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(CriterionReport {
        id: 9,
        name: criterion_name(9),
        measured: shortfall,
        threshold: "<= 1e-4 bits, power sum within 1e-12".into(),
        pass: shortfall <= 1e-4 && sum_err <= 1e-12,
        detail: format!("{instances} instances, worst relative power-sum error {sum_err:.2e}"),
    })
}

/// Random i.i.d. CN(0, 1) channel with condition number at most `max_condition`.
pub fn well_conditioned_channel<R: Rng + ?Sized>(rng: &mut R, max_condition: f64) -> ClusterChannel {
    loop {
        let h = CMatrix3::from_fn(|_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let channel = ClusterChannel::new(h);
        if channel.condition_number() <= max_condition {
            return channel;
        }
    }
}

/// Criterion 10: `H W` diagonal and per-BS powers at the limit.
pub fn check_zero_forcing(opts: &ValidationOptions) -> Result<CriterionReport> {
    let channels = match opts.scale {
        Scale::Desk => 10_000,
        Scale::Full => 100_000,
    };
    let per_bs = 1.0;
    let results = in_pool(opts.workers, || {
        (0..channels)
            .into_par_iter()
            .map(|t| {
                let mut rng = RngStream::new(opts.seed, VALIDATION_STREAM + (10 << 32) + t as u64).rng();
                let channel = well_conditioned_channel(&mut rng, 100.0);
                let w = zf_precoder(&channel)?;
                let hw = channel.h * w;
                let diag = (0..3).map(|i| hw[(i, i)].norm()).fold(f64::INFINITY, f64::min);
                let off = (0..3)
                    .flat_map(|i| (0..3).filter(move |j| *j != i).map(move |j| (i, j)))
                    .map(|ij| hw[ij].norm())
                    .fold(0.0, f64::max);
                let gains: Vec<f64> = (0..3).map(|u| 1.0 / w.column(u).norm_squared()).collect();
                let mut unit = w;
                for u in 0..3 {
                    let norm = unit.column(u).norm();
                    unit.column_mut(u).unscale_mut(norm);
                }
                let alloc = waterfilling(&gains, 3.0 * per_bs)?;
                let norm = per_bs_normalize(&unit, &alloc, per_bs)?;
                let peak = norm.bs_power.iter().cloned().fold(0.0, f64::max);
                Ok((off / diag, (peak - per_bs).abs() / per_bs, peak <= per_bs * (1.0 + 1e-12)))
            })
            .collect::<Result<Vec<(f64, f64, bool)>>>()
    })??;
    let residual = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let peak_err = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let within = results.iter().all(|r| r.2);
    Ok(CriterionReport {
        id: 10,
        name: criterion_name(10),
        measured: residual,
        threshold: "<= 1e-10, per-BS peak within 1e-12 of P".into(),
        pass: residual <= 1e-10 && peak_err <= 1e-12 && within,
        detail: format!("{channels} channels, worst per-BS peak error {peak_err:.2e}"),
    })
}

/// Criterion 11 on a curve with randomly scaled interferer gains.
pub fn check_path_loss_invariance(curve: &[CurvePoint], scales: &[f64]) -> Result<CriterionReport> {
    let t = gap_trend(curve)?;
    let verdict = convergence_verdict(curve, Quantity::DeltaR)?;
    let d = verdict.diagnostics;
    let decreasing = d.slope_per_doubling < 0.0;
    let pass = t.rises == 0 && t.coefficient > 0.0 && decreasing;
    Ok(CriterionReport {
        id: 11,
        name: criterion_name(11),
        measured: t.coefficient,
        threshold: "> 0, no CI-exceeding rise, negative slope".into(),
        pass,
        detail: format!(
            "scales = [{}], slope per doubling = {:.4e}, rises beyond CI = {}",
            scales.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(" "),
            d.slope_per_doubling,
            t.rises
        ),
    })
}

/// Criterion 12: one worker and eight workers write identical CSV bytes.
pub fn check_determinism(opts: &ValidationOptions) -> Result<CriterionReport> {
    let cfg = ScenarioConfig {
        n_grid: pow2_grid(4, 9),
        trials_per_n: 500,
        jp_enabled: true,
        master_seed: opts.seed,
        ..ScenarioConfig::macro_default(ChannelModel::Symmetric)
    };
    let one = csv_string(&cfg, &run_scenario(&cfg, 1)?)?;
    let eight = csv_string(&cfg, &run_scenario(&cfg, 8)?)?;
    let differing = one.lines().zip(eight.lines()).filter(|(a, b)| a != b).count();
    let same = one == eight;
    Ok(CriterionReport {
        id: 12,
        name: criterion_name(12),
        measured: differing as f64,
        threshold: "== 0 differing rows".into(),
        pass: same,
        detail: format!("{} bytes", one.len()),
    })
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::arg("workers", e.to_string()))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------------------
// Suites

/// Runs every criterion of `suite`; failures are reported, never propagated.
pub fn run_suite(suite: Suite, opts: &ValidationOptions) -> Vec<CriterionReport> {
    let mut reports = Vec::new();
    let mut push = |id: u8, r: Result<CriterionReport>| {
        reports.push(r.unwrap_or_else(|e| CriterionReport::failed(id, &e)));
    };
    match suite {
        Suite::SymmetricBounds => {
            push(1, check_ordering(opts));
            let cfg = macro_scenario(ChannelModel::Symmetric, opts);
            match run_scenario(&cfg, opts.workers) {
                Ok(curve) => {
                    push(4, check_gap_trend(&curve, cfg.interferers));
                    push(5, check_vanishing_interference(&curve));
                }
                Err(e) => {
                    push(4, Err(e.clone()));
                    push(5, Err(e));
                }
            }
            let scaled = scaled_interference_scenario(opts);
            push(
                11,
                run_scenario(&scaled, opts.workers)
                    .and_then(|c| check_path_loss_invariance(&c, &scaled.interferer_scale)),
            );
            push(12, check_determinism(opts));
        }
        Suite::AsymmetricLimits => {
            let cfg = macro_scenario(ChannelModel::Asymmetric, opts);
            match run_scenario(&cfg, opts.workers) {
                Ok(curve) => {
                    push(6, check_asymmetric_limits(&curve));
                    push(7, check_overlap(&curve));
                }
                Err(e) => {
                    push(6, Err(e.clone()));
                    push(7, Err(e));
                }
            }
        }
        Suite::EvtCdf => {
            push(2, check_gumbel(opts));
            push(3, check_frechet(opts));
        }
        Suite::JpSanity => {
            let sym = run_scenario(&jp_scenario(ChannelModel::Symmetric, opts), opts.workers);
            let asym = run_scenario(&jp_scenario(ChannelModel::Asymmetric, opts), opts.workers);
            push(8, sym.and_then(|s| asym.and_then(|a| check_jp(&s, &a))));
            push(9, check_waterfilling(opts));
            push(10, check_zero_forcing(opts));
        }
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert_eq!("full".parse::<Scale>().unwrap(), Scale::Full);
    }

    #[test]
    fn suites_cover_every_criterion_once() {
        let mut ids: Vec<u8> = Suite::ALL.iter().flat_map(|s| s.criteria().iter().copied()).collect();
        ids.sort();
        assert_eq!(ids, (1..=12).collect::<Vec<u8>>());
    }

    #[test]
    fn coefficient_band() {
        assert_eq!(gap_coefficient_band(6), (2.0, 12.0));
        assert_eq!(gap_coefficient_band(1), (0.0, 4.5));
    }

    #[test]
    fn grid_search_matches_closed_form() {
        // Equal gains: the optimum splits power evenly, which the grid only approximates.
        let best = grid_search_sum_rate([1.0, 1.0, 1.0], 3.0, 1e-3);
        assert!(best <= 3.0 && best > 3.0 - 1e-5);
        // A single usable stream gets all the power, which is on the grid.
        let single = grid_search_sum_rate([2.0, 0.0, 0.0], 1.5, 1e-3);
        assert!((single - rate_bits(3.0)).abs() < 1e-15);
    }

    #[test]
    fn rises_counted_beyond_ci_only() {
        let s = [MeanCi::new(1.0, 0.1), MeanCi::new(1.15, 0.1), MeanCi::new(1.5, 0.1)];
        let (count, worst) = increases_beyond_ci(&s);
        assert_eq!(count, 1);
        assert!((worst - 0.15).abs() < 1e-12);
    }

    #[test]
    fn report_line_format() {
        let r = CriterionReport {
            id: 7,
            name: criterion_name(7),
            measured: 0.0125,
            threshold: "<= 0.03".into(),
            pass: true,
            detail: String::new(),
        };
        assert_eq!(
            r.to_string(),
            "PASS criterion=7 name=max-sinr-max-gain-overlap measured=0.0125 threshold=<= 0.03"
        );
    }
}
