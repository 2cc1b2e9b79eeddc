//! Single-cell user selection rules and the rates they achieve.

use std::fmt;
use std::str::FromStr;

use crate::channel_model::{Drop, UserSample};
use crate::error::{Error, Result};

/// Outcome of one scheduler on one drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerDecision {
    pub selected_index: usize,
    pub sinr: f64,
    pub rate_bpcu: f64,
    /// Total interference `beta` of the selected user.
    pub residual_beta: f64,
}

impl SchedulerDecision {
    fn new(selected_index: usize, sinr: f64, residual_beta: f64) -> Self {
        SchedulerDecision {
            selected_index,
            sinr,
            rate_bpcu: rate_bits(sinr),
            residual_beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerKind {
    /// Largest `alpha`, interference ignored entirely.
    NoInterference,
    /// Largest `alpha / (1 + beta_out)`: only in-cluster interference removed.
    ClusterFree,
    /// Largest `alpha / (1 + beta)`.
    MaxSinr,
    /// Largest `alpha`, rate evaluated with its true interference.
    MaxGain,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::NoInterference,
        SchedulerKind::ClusterFree,
        SchedulerKind::MaxSinr,
        SchedulerKind::MaxGain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerKind::NoInterference => "no_interference",
            SchedulerKind::ClusterFree => "cluster_free",
            SchedulerKind::MaxSinr => "max_sinr",
            SchedulerKind::MaxGain => "max_gain",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SchedulerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scheduler `{s}`"))
    }
}

/// `log2(1 + sinr)`.
#[inline]
pub fn rate_bits(sinr: f64) -> f64 {
    sinr.ln_1p() * std::f64::consts::LOG2_E
}

/// `alpha / (1 + beta)` with unit noise.
pub fn sinr(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::arg("alpha", format!("must be >= 0, got {alpha}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::arg("beta", format!("must be >= 0, got {beta}")));
    }
    Ok(alpha / (1.0 + beta))
}

/// Index of the largest key; the lowest index wins ties.
#[inline]
fn argmax_by<F: Fn(&UserSample) -> f64>(users: &[UserSample], key: F) -> (usize, f64) {
    let mut best = (0, key(&users[0]));
    for (i, u) in users.iter().enumerate().skip(1) {
        let k = key(u);
        if k > best.1 {
            best = (i, k);
        }
    }
    best
}

/// Applies `kind` to a slice of users.
pub fn schedule_users(users: &[UserSample], kind: SchedulerKind) -> Result<SchedulerDecision> {
    if users.is_empty() {
        return Err(Error::EmptyDrop);
    }
    let decision = match kind {
        SchedulerKind::MaxSinr => {
            let (i, s) = argmax_by(users, |u| u.alpha / (1.0 + u.beta));
            SchedulerDecision::new(i, s, users[i].beta)
        }
        SchedulerKind::ClusterFree => {
            let (i, s) = argmax_by(users, |u| u.alpha / (1.0 + u.beta_out));
            SchedulerDecision::new(i, s, users[i].beta)
        }
        SchedulerKind::MaxGain => {
            let (i, _) = argmax_by(users, |u| u.alpha);
            let u = &users[i];
            SchedulerDecision::new(i, u.alpha / (1.0 + u.beta), u.beta)
        }
        SchedulerKind::NoInterference => {
            let (i, a) = argmax_by(users, |u| u.alpha);
            SchedulerDecision::new(i, a, users[i].beta)
        }
    };
    Ok(decision)
}

pub fn schedule(drop: &Drop, kind: SchedulerKind) -> Result<SchedulerDecision> {
    schedule_users(&drop.users, kind)
}

/// Rate lost by the max-SINR scheduler against the interference-free bound
/// on the same drop.
pub fn rate_gap(decision_up: &SchedulerDecision, decision_sinr: &SchedulerDecision) -> f64 {
    decision_up.rate_bpcu - decision_sinr.rate_bpcu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::ChannelModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn user(alpha: f64, beta: f64) -> UserSample {
        UserSample {
            alpha,
            beta,
            beta_out: beta,
            ..Default::default()
        }
    }

    fn drop_of(users: Vec<UserSample>) -> Drop {
        Drop {
            users,
            model: ChannelModel::Symmetric,
        }
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr(3.0, 0.0).unwrap(), 3.0);
        assert_eq!(sinr(9.0, 2.0).unwrap(), 3.0);
        assert_eq!(sinr(0.0, 5.0).unwrap(), 0.0);
        assert!(sinr(-1.0, 0.0).is_err());
        assert!(sinr(1.0, -0.5).is_err());
    }

    #[test]
    fn two_user_example() {
        let d = drop_of(vec![user(4.0, 1.0), user(3.0, 0.0)]);
        let s = schedule(&d, SchedulerKind::MaxSinr).unwrap();
        assert_eq!((s.selected_index, s.sinr), (1, 3.0));
        let g = schedule(&d, SchedulerKind::MaxGain).unwrap();
        assert_eq!((g.selected_index, g.sinr), (0, 2.0));
        let up = schedule(&d, SchedulerKind::NoInterference).unwrap();
        assert_eq!((up.selected_index, up.sinr), (0, 4.0));
        assert_relative_eq!(up.rate_bpcu, 5f64.log2(), epsilon = 1e-15);
        assert_relative_eq!(rate_gap(&up, &s), 5f64.log2() - 2.0, epsilon = 1e-15);
        assert_relative_eq!(rate_gap(&up, &s), 0.321928, epsilon = 1e-6);
    }

    #[test]
    fn zero_gap_cases() {
        let d = drop_of(vec![user(2.0, 0.0)]);
        let up = schedule(&d, SchedulerKind::NoInterference).unwrap();
        let s = schedule(&d, SchedulerKind::MaxSinr).unwrap();
        assert_eq!(rate_gap(&up, &s), 0.0);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let d = drop_of(vec![user(1.0, 0.0), user(5.0, 1.0), user(5.0, 1.0)]);
        for kind in SchedulerKind::ALL {
            assert_eq!(schedule(&d, kind).unwrap().selected_index, 1);
        }
    }

    #[test]
    fn cluster_free_ignores_in_cluster_interference() {
        let mut a = user(10.0, 9.0);
        a.beta_out = 0.0;
        let b = user(4.0, 0.0);
        let d = drop_of(vec![a, b]);
        let c = schedule(&d, SchedulerKind::ClusterFree).unwrap();
        assert_eq!((c.selected_index, c.sinr), (0, 10.0));
        assert_eq!(schedule(&d, SchedulerKind::MaxSinr).unwrap().selected_index, 1);
    }

    #[test]
    fn empty_drop_rejected() {
        assert_eq!(schedule(&drop_of(vec![]), SchedulerKind::MaxSinr), Err(Error::EmptyDrop));
    }

    #[test]
    fn scheduler_names_round_trip() {
        for k in SchedulerKind::ALL {
            assert_eq!(k.name().parse::<SchedulerKind>().unwrap(), k);
        }
        assert!("round_robin".parse::<SchedulerKind>().is_err());
    }

    fn users_strategy() -> impl Strategy<Value = Vec<UserSample>> {
        prop::collection::vec((0.0f64..1e4, 0.0f64..1e2, 0.0f64..1.0), 1..40).prop_map(|v| {
            v.into_iter()
                .map(|(a, b, frac)| UserSample {
                    alpha: a,
                    beta: b,
                    beta_out: b * frac,
                    ..Default::default()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn per_drop_ordering(users in users_strategy()) {
            let up = schedule_users(&users, SchedulerKind::NoInterference).unwrap();
            let cf = schedule_users(&users, SchedulerKind::ClusterFree).unwrap();
            let s = schedule_users(&users, SchedulerKind::MaxSinr).unwrap();
            let g = schedule_users(&users, SchedulerKind::MaxGain).unwrap();
            prop_assert!(up.sinr >= s.sinr);
            prop_assert!(cf.sinr >= s.sinr);
            prop_assert!(s.sinr >= g.sinr);
            prop_assert!(rate_gap(&up, &s) >= 0.0);
        }

        #[test]
        fn alpha_scaling_keeps_selection(users in users_strategy(), c in 1e-3f64..1e3) {
            let scaled: Vec<UserSample> = users.iter().map(|u| UserSample { alpha: u.alpha * c, ..*u }).collect();
            for kind in SchedulerKind::ALL {
                let a = schedule_users(&users, kind).unwrap();
                let b = schedule_users(&scaled, kind).unwrap();
                // Rounding can create or break exact ties only when keys coincide.
                if a.selected_index != b.selected_index {
                    let key = |u: &UserSample| match kind {
                        SchedulerKind::MaxSinr => u.alpha / (1.0 + u.beta),
                        SchedulerKind::ClusterFree => u.alpha / (1.0 + u.beta_out),
                        _ => u.alpha,
                    };
                    let ka = key(&users[a.selected_index]);
                    let kb = key(&users[b.selected_index]);
                    prop_assert!((ka - kb).abs() <= 1e-12 * ka.abs());
                }
            }
        }

        #[test]
        fn permutation_equivariance(users in users_strategy(), rot in 0usize..40) {
            let n = users.len();
            let rot = rot % n;
            let mut permuted = users.clone();
            permuted.rotate_left(rot);
            for kind in SchedulerKind::ALL {
                let a = schedule_users(&users, kind).unwrap();
                let b = schedule_users(&permuted, kind).unwrap();
                prop_assert_eq!(a.sinr, b.sinr);
                let original = (b.selected_index + rot) % n;
                prop_assert_eq!(users[original].alpha, users[a.selected_index].alpha);
            }
        }

        #[test]
        fn sinr_monotone(a in 0.0f64..1e3, b in 0.0f64..1e3, da in 1e-3f64..10.0, db in 1e-3f64..10.0) {
            prop_assert!(sinr(a + da, b).unwrap() > sinr(a, b).unwrap());
            if a > 0.0 {
                prop_assert!(sinr(a, b + db).unwrap() < sinr(a, b).unwrap());
            }
        }
    }
}
