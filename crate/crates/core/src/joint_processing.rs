//! Three-cell joint processing baseline: zero-forcing precoding over the
//! distributively selected users, waterfilling on the resulting parallel
//! channels, then a common rescaling to meet every per-BS power limit.

use nalgebra::{Complex, Matrix3, Vector3};
use rand::Rng;

use crate::channel_model::{UserSample, CLUSTER_SIZE};
use crate::error::{Error, Result};
use crate::scheduling::rate_bits;

pub type Complex64 = Complex<f64>;
pub type CMatrix3 = Matrix3<Complex64>;

/// Channels whose condition number exceeds this are treated as singular.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e8;

/// Channel from the three cooperating BSs to their three selected users.
///
/// Entry `(u, b)` is the complex amplitude from BS `b` to user `u`,
/// normalized so that `|h|^2 * P` is the received SNR for transmit power `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterChannel {
    pub h: CMatrix3,
    pub condition_limit: f64,
}

impl ClusterChannel {
    pub fn new(h: CMatrix3) -> Self {
        ClusterChannel {
            h,
            condition_limit: DEFAULT_CONDITION_LIMIT,
        }
    }

    /// Ratio of largest to smallest singular value (infinite when rank deficient).
    pub fn condition_number(&self) -> f64 {
        let sv = self.h.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }

    /// Assembles the channel of the users picked in each cluster cell.
    ///
    /// `users[c]` is the user served by cluster BS `c`. Its own link power is
    /// `alpha` and `cluster_links` holds the other two BSs in increasing index
    /// order. Phases are i.i.d. uniform; magnitudes come from the drop, so the
    /// precoder sees exactly the powers the schedulers saw.
    pub fn from_selected<R: Rng + ?Sized>(
        users: [&UserSample; CLUSTER_SIZE],
        tx_power: f64,
        rng: &mut R,
    ) -> Self {
        let mut h = CMatrix3::zeros();
        for (u, user) in users.iter().enumerate() {
            let mut peers = user.cluster_links.iter();
            for b in 0..CLUSTER_SIZE {
                let power = if b == u {
                    user.alpha
                } else {
                    *peers.next().expect("two cluster peers")
                };
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                h[(u, b)] = Complex64::from_polar((power / tx_power).sqrt(), phase);
            }
        }
        ClusterChannel::new(h)
    }
}

/// Zero-forcing precoder `W = H^-1`, so `H W = I`.
pub fn zf_precoder(channel: &ClusterChannel) -> Result<CMatrix3> {
    if channel.h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::arg("channel", "non-finite entry"));
    }
    let condition = channel.condition_number();
    if !(condition <= channel.condition_limit) {
        return Err(Error::SingularChannel { condition });
    }
    channel
        .h
        .try_inverse()
        .ok_or(Error::SingularChannel { condition })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub per_stream: Vec<f64>,
    pub water_level: f64,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.per_stream.iter().sum()
    }

    pub fn sum_rate(&self, gains: &[f64]) -> f64 {
        self.per_stream
            .iter()
            .zip(gains)
            .map(|(p, g)| rate_bits(p * g))
            .sum()
    }
}

/// Maximizes `sum log2(1 + g_i p_i)` under `sum p_i = total_power`, `p_i >= 0`.
///
/// Streams whose inverse gain reaches the water level get exactly zero.
pub fn waterfilling(gains: &[f64], total_power: f64) -> Result<PowerAllocation> {
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::arg("total_power", format!("must be positive, got {total_power}")));
    }
    if let Some(g) = gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(Error::arg("gains", format!("must be finite and >= 0, got {g}")));
    }
    if !gains.iter().any(|g| *g > 0.0) {
        return Err(Error::arg("gains", "at least one gain must be positive"));
    }

    let mut order: Vec<usize> = (0..gains.len()).filter(|i| gains[*i] > 0.0).collect();
    order.sort_by(|a, b| gains[*b].total_cmp(&gains[*a]).then(a.cmp(b)));

    let mut active = order.len();
    let mut level;
    loop {
        let inv_sum: f64 = order[..active].iter().map(|i| 1.0 / gains[*i]).sum();
        level = (total_power + inv_sum) / active as f64;
        if level > 1.0 / gains[order[active - 1]] || active == 1 {
            break;
        }
        active -= 1;
    }

    let mut per_stream = vec![0.0; gains.len()];
    for i in &order[..active] {
        per_stream[*i] = level - 1.0 / gains[*i];
    }
    Ok(PowerAllocation {
        per_stream,
        water_level: level,
    })
}

/// Precoder rescaled by a single factor so that the most loaded BS sits
/// exactly at the per-BS limit.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPrecoder {
    pub w: CMatrix3,
    pub scale: f64,
    /// Transmit power of each BS after scaling.
    pub bs_power: [f64; CLUSTER_SIZE],
}

/// Power radiated by each BS: `sum_u p_u |W[b, u]|^2`.
pub fn bs_powers(w: &CMatrix3, allocation: &PowerAllocation) -> [f64; CLUSTER_SIZE] {
    let mut out = [0.0; CLUSTER_SIZE];
    for (b, slot) in out.iter_mut().enumerate() {
        *slot = (0..CLUSTER_SIZE)
            .map(|u| allocation.per_stream[u] * w[(b, u)].norm_sqr())
            .sum();
    }
    out
}

pub fn per_bs_normalize(
    w: &CMatrix3,
    allocation: &PowerAllocation,
    per_bs_power: f64,
) -> Result<NormalizedPrecoder> {
    if allocation.per_stream.len() != CLUSTER_SIZE {
        return Err(Error::arg("allocation", "expected three streams"));
    }
    if !(per_bs_power > 0.0) {
        return Err(Error::arg("per_bs_power", format!("must be positive, got {per_bs_power}")));
    }
    let raw = bs_powers(w, allocation);
    let peak = raw.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::arg("w", "precoder radiates no power"));
    }
    let scale = (per_bs_power / peak).sqrt();
    let c2 = scale * scale;
    Ok(NormalizedPrecoder {
        w: w.map(|z| z * scale),
        scale,
        bs_power: raw.map(|p| p * c2),
    })
}

/// Per-stream outcome of the joint-processing chain.
#[derive(Debug, Clone, PartialEq)]
pub struct JpOutcome {
    pub sinr: [f64; CLUSTER_SIZE],
    pub allocation: PowerAllocation,
    pub precoder: NormalizedPrecoder,
}

impl JpOutcome {
    /// Average rate over the three users, bits/channel use.
    pub fn mean_rate(&self) -> f64 {
        self.sinr.iter().map(|s| rate_bits(*s)).sum::<f64>() / CLUSTER_SIZE as f64
    }
}

/// Runs ZF, sum-power waterfilling over `3P`, and per-BS normalization.
///
/// `tx_power` is the per-BS limit `P`, in the units that make `|h|^2 P` an SNR.
pub fn jp_evaluate(
    channel: &ClusterChannel,
    tx_power: f64,
    out_of_cluster_beta: &[f64; CLUSTER_SIZE],
) -> Result<JpOutcome> {
    if let Some(b) = out_of_cluster_beta.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::arg("out_of_cluster_beta", format!("must be >= 0, got {b}")));
    }
    let w = zf_precoder(channel)?;
    // Unit-norm columns; stream u then sees an effective power gain 1/|w_u|^2.
    let col_norms = Vector3::from_fn(|u, _| w.column(u).norm());
    let mut unit = w;
    for u in 0..CLUSTER_SIZE {
        unit.column_mut(u).unscale_mut(col_norms[u]);
    }
    let gains: Vec<f64> = col_norms.iter().map(|n| 1.0 / (n * n)).collect();
    let allocation = waterfilling(&gains, CLUSTER_SIZE as f64 * tx_power)?;
    let precoder = per_bs_normalize(&unit, &allocation, tx_power)?;
    let c2 = precoder.scale * precoder.scale;
    let mut sinr = [0.0; CLUSTER_SIZE];
    for u in 0..CLUSTER_SIZE {
        sinr[u] = c2 * gains[u] * allocation.per_stream[u] / (1.0 + out_of_cluster_beta[u]);
    }
    Ok(JpOutcome {
        sinr,
        allocation,
        precoder,
    })
}

/// Mean per-user joint-processing rate.
pub fn jp_rate(
    channel: &ClusterChannel,
    tx_power: f64,
    out_of_cluster_beta: &[f64; CLUSTER_SIZE],
) -> Result<f64> {
    jp_evaluate(channel, tx_power, out_of_cluster_beta).map(|o| o.mean_rate())
}
