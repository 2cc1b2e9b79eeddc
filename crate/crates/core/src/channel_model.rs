//! Network geometry, path loss, Rayleigh fading and per-user `(alpha, beta)` drops.
//!
//! All powers handed out by this module are linear ratios already divided by
//! the noise power, so a user's SINR is `alpha / (1 + beta)`.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// Generator used for every random draw in the simulator.
pub type SimRng = ChaCha8Rng;

/// Number of cooperating base stations in a joint-processing cluster.
pub const CLUSTER_SIZE: usize = 3;

/// A point in the plane, coordinates in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point {
            x: radius * c,
            y: radius * s,
        }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    fn offset(&self, by: Point) -> Point {
        Point::new(self.x + by.x, self.y + by.y)
    }
}

/// Serving base station, its interfering neighbours and the cell radii.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    serving_position: Point,
    interferer_positions: Vec<Point>,
    cell_radius_km: f64,
    symmetric_radius_km: f64,
}

impl NetworkGeometry {
    pub fn new(
        serving_position: Point,
        interferer_positions: Vec<Point>,
        cell_radius_km: f64,
        symmetric_radius_km: f64,
    ) -> Result<Self> {
        if interferer_positions.is_empty() {
            return Err(Error::Geometry("at least one interferer is required".into()));
        }
        if !(cell_radius_km > 0.0 && cell_radius_km.is_finite()) {
            return Err(Error::Geometry(format!(
                "cell radius must be positive, got {cell_radius_km}"
            )));
        }
        if !(symmetric_radius_km > 0.0 && symmetric_radius_km <= cell_radius_km) {
            return Err(Error::Geometry(format!(
                "symmetric radius must lie in (0, {cell_radius_km}], got {symmetric_radius_km}"
            )));
        }
        if let Some(j) = interferer_positions
            .iter()
            .position(|p| p.distance_sq(&serving_position) == 0.0)
        {
            return Err(Error::Geometry(format!(
                "interferer {j} coincides with the serving base station"
            )));
        }
        Ok(NetworkGeometry {
            serving_position,
            interferer_positions,
            cell_radius_km,
            symmetric_radius_km,
        })
    }

    /// Replaces the radius of the circle used by the symmetric model.
    pub fn with_symmetric_radius(self, symmetric_radius_km: f64) -> Result<Self> {
        NetworkGeometry::new(
            self.serving_position,
            self.interferer_positions,
            self.cell_radius_km,
            symmetric_radius_km,
        )
    }

    pub fn serving_position(&self) -> Point {
        self.serving_position
    }

    pub fn interferer_positions(&self) -> &[Point] {
        &self.interferer_positions
    }

    pub fn interferer_count(&self) -> usize {
        self.interferer_positions.len()
    }

    pub fn cell_radius_km(&self) -> f64 {
        self.cell_radius_km
    }

    pub fn symmetric_radius_km(&self) -> f64 {
        self.symmetric_radius_km
    }

    /// Geometries of the three mutually adjacent cells forming the
    /// joint-processing cluster: this cell plus interferers 0 and 1.
    ///
    /// Each returned geometry lists its two cluster peers first, in
    /// increasing cluster index, followed by its remaining ring neighbours.
    /// Only defined for a six-cell tangent ring.
    pub fn cluster_sites(&self) -> Result<[NetworkGeometry; CLUSTER_SIZE]> {
        if self.interferer_count() != 6 {
            return Err(Error::Geometry(format!(
                "a cooperating cluster needs a six-cell first ring, got {} interferers",
                self.interferer_count()
            )));
        }
        let centre = self.serving_position;
        let ring: Vec<Point> = self
            .interferer_positions
            .iter()
            .map(|p| Point::new(p.x - centre.x, p.y - centre.y))
            .collect();
        let spacing = ring[0].distance(&Point::ORIGIN);
        let tol = 1e-9 * spacing;
        let adjacent = |a: &Point, b: &Point| (a.distance(b) - spacing).abs() <= tol;
        if !ring.iter().all(|p| (p.distance(&Point::ORIGIN) - spacing).abs() <= tol)
            || !adjacent(&ring[0], &ring[1])
        {
            return Err(Error::Geometry(
                "cluster needs equidistant ring neighbours with interferers 0 and 1 adjacent".into(),
            ));
        }

        let sites = [centre, self.interferer_positions[0], self.interferer_positions[1]];
        let mut out = Vec::with_capacity(CLUSTER_SIZE);
        for (c, site) in sites.iter().enumerate() {
            let neighbours: Vec<Point> = ring.iter().map(|off| site.offset(*off)).collect();
            let mut ordered = Vec::with_capacity(neighbours.len());
            let mut used = vec![false; neighbours.len()];
            for (peer_idx, peer) in sites.iter().enumerate() {
                if peer_idx == c {
                    continue;
                }
                let k = neighbours
                    .iter()
                    .position(|q| q.distance(peer) <= tol)
                    .ok_or_else(|| {
                        Error::Geometry(format!("cluster site {peer_idx} is not a neighbour of site {c}"))
                    })?;
                used[k] = true;
                ordered.push(neighbours[k]);
            }
            ordered.extend(
                neighbours
                    .iter()
                    .zip(&used)
                    .filter(|(_, u)| !**u)
                    .map(|(q, _)| *q),
            );
            out.push(NetworkGeometry::new(
                *site,
                ordered,
                self.cell_radius_km,
                self.symmetric_radius_km,
            )?);
        }
        Ok(out.try_into().expect("three cluster sites"))
    }
}

/// Serving BS at the origin and `count` interferers on the tangent-disc
/// first ring, at distance `2R` and angles `k * 360 / count` degrees.
///
/// The symmetric-model radius defaults to `R / 2`.
pub fn first_ring_geometry(cell_radius_km: f64, count: usize) -> Result<NetworkGeometry> {
    if count == 0 {
        return Err(Error::Geometry("at least one interferer is required".into()));
    }
    if !(cell_radius_km > 0.0 && cell_radius_km.is_finite()) {
        return Err(Error::Geometry(format!(
            "cell radius must be positive, got {cell_radius_km}"
        )));
    }
    let ring = (0..count)
        .map(|k| Point::polar(2.0 * cell_radius_km, TAU * k as f64 / count as f64))
        .collect();
    NetworkGeometry::new(Point::ORIGIN, ring, cell_radius_km, cell_radius_km / 2.0)
}

/// Distance-dependent power attenuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathLossSpec {
    /// `lambda * d^-epsilon`.
    Generic { lambda: f64, epsilon: f64 },
    /// `offset_db + slope_db * log10(d)` in dB, `d` in km.
    Hata { offset_db: f64, slope_db: f64 },
}

impl PathLossSpec {
    pub const MACRO_HATA: PathLossSpec = PathLossSpec::Hata {
        offset_db: -114.5,
        slope_db: -37.19,
    };

    pub fn validate(&self) -> Result<()> {
        match *self {
            PathLossSpec::Generic { lambda, epsilon } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::PathLoss(format!("lambda must be positive, got {lambda}")));
                }
                if !(epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(Error::PathLoss(format!(
                        "exponent must be positive, got {epsilon}"
                    )));
                }
            }
            PathLossSpec::Hata { offset_db, slope_db } => {
                if !(slope_db < 0.0 && offset_db.is_finite()) {
                    return Err(Error::PathLoss(format!(
                        "slope must be negative, got {slope_db} dB/decade"
                    )));
                }
                // log10(0.001 km) = -3: gain at 1 m must still be an attenuation.
                if offset_db - 3.0 * slope_db >= 0.0 {
                    return Err(Error::PathLoss(format!(
                        "offset {offset_db} dB yields non-negative gain at 1 m"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Power-law exponent of the model (`-slope_db / 10` for Hata).
    pub fn exponent(&self) -> f64 {
        match *self {
            PathLossSpec::Generic { epsilon, .. } => epsilon,
            PathLossSpec::Hata { slope_db, .. } => -slope_db / 10.0,
        }
    }

    /// Linear gain at `d` km.
    pub fn gain(&self, d: f64) -> Result<f64> {
        if !(d > 0.0) {
            return Err(Error::arg("d", format!("distance must be positive, got {d}")));
        }
        Ok(match *self {
            PathLossSpec::Generic { lambda, epsilon } => lambda * d.powf(-epsilon),
            PathLossSpec::Hata { offset_db, slope_db } => {
                10f64.powf((offset_db + slope_db * d.log10()) / 10.0)
            }
        })
    }

    fn kernel(&self) -> GainKernel {
        match *self {
            PathLossSpec::Generic { lambda, epsilon } => GainKernel {
                scale: lambda,
                half_exponent: -epsilon / 2.0,
            },
            PathLossSpec::Hata { offset_db, slope_db } => GainKernel {
                scale: 10f64.powf(offset_db / 10.0),
                half_exponent: slope_db / 20.0,
            },
        }
    }
}

/// Linear gain at `d` km. See [`PathLossSpec::gain`].
pub fn path_gain(spec: &PathLossSpec, d: f64) -> Result<f64> {
    spec.gain(d)
}

/// Both path-loss variants as `scale * (d^2)^half_exponent`.
#[derive(Debug, Clone, Copy)]
struct GainKernel {
    scale: f64,
    half_exponent: f64,
}

impl GainKernel {
    #[inline]
    fn at_distance_sq(&self, d2: f64) -> f64 {
        self.scale * d2.powf(self.half_exponent)
    }
}

/// Transmit and noise powers plus optional per-interferer power multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    /// Linear factor on each interferer's transmit power; empty means all 1.
    pub interferer_scale: Vec<f64>,
}

impl LinkBudget {
    pub const MACRO: LinkBudget = LinkBudget {
        tx_power_dbm: 40.0,
        noise_dbm: -101.0,
        interferer_scale: Vec::new(),
    };

    pub fn new(tx_power_dbm: f64, noise_dbm: f64) -> Self {
        LinkBudget {
            tx_power_dbm,
            noise_dbm,
            interferer_scale: Vec::new(),
        }
    }

    pub fn with_interferer_scale(mut self, scale: Vec<f64>) -> Self {
        self.interferer_scale = scale;
        self
    }

    /// `P / noise` as a linear ratio.
    pub fn snr_scale(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - self.noise_dbm) / 10.0)
    }

    fn interferer_weights(&self, count: usize) -> Result<Vec<f64>> {
        let snr = self.snr_scale();
        if !snr.is_finite() {
            return Err(Error::arg("tx_power_dbm", "P / noise is not finite"));
        }
        if self.interferer_scale.is_empty() {
            return Ok(vec![snr; count]);
        }
        if self.interferer_scale.len() != count {
            return Err(Error::arg(
                "interferer_scale",
                format!("expected {count} entries, got {}", self.interferer_scale.len()),
            ));
        }
        if let Some(s) = self.interferer_scale.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::arg("interferer_scale", format!("entries must be >= 0, got {s}")));
        }
        Ok(self.interferer_scale.iter().map(|s| s * snr).collect())
    }
}

/// One user's noise-normalized direct gain and aggregate interference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UserSample {
    pub alpha: f64,
    pub beta: f64,
    /// Part of `beta` coming from base stations outside the cooperating cluster.
    pub beta_out: f64,
    /// Received power from the two other cluster base stations (already in `beta`).
    pub cluster_links: [f64; 2],
    pub distance_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    Symmetric,
    Asymmetric,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::Symmetric => "symmetric",
            ChannelModel::Asymmetric => "asymmetric",
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "symmetric" => Ok(ChannelModel::Symmetric),
            "asymmetric" => Ok(ChannelModel::Asymmetric),
            other => Err(format!("unknown channel model `{other}`")),
        }
    }
}

/// The `n` users of one cell at one scheduling instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Drop {
    pub users: Vec<UserSample>,
    pub model: ChannelModel,
}

impl Drop {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Identifies a reproducible random sequence.
///
/// The same `(master_seed, stream_id)` pair yields the same samples on every
/// platform and regardless of how many workers share the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream {
            master_seed,
            stream_id,
        }
    }

    /// Stream for trial `trial` at user count `n`. Injective for
    /// `n, trial < 2^32`.
    pub fn for_trial(master_seed: u64, n: usize, trial: usize) -> Self {
        debug_assert!(n < (1 << 32) && trial < (1 << 32));
        RngStream::new(master_seed, ((n as u64) << 32) | trial as u64)
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `count` i.i.d. unit-mean exponential power gains (Rayleigh fading).
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::arg("count", "at least one sample is required"));
    }
    Ok((0..count).map(|_| Exp1.sample(rng)).collect())
}

/// Precomputed per-drop constants shared by every user of a cell.
struct CellKernel<'a> {
    serving: Point,
    interferers: &'a [Point],
    weights: Vec<f64>,
    kernel: GainKernel,
    snr: f64,
    cluster_peers: usize,
}

impl<'a> CellKernel<'a> {
    fn new(geometry: &'a NetworkGeometry, spec: &PathLossSpec, budget: &LinkBudget) -> Result<Self> {
        spec.validate()?;
        let weights = budget.interferer_weights(geometry.interferer_count())?;
        Ok(CellKernel {
            serving: geometry.serving_position,
            interferers: &geometry.interferer_positions,
            weights,
            kernel: spec.kernel(),
            snr: budget.snr_scale(),
            cluster_peers: geometry.interferer_count().min(2),
        })
    }

    /// Interference terms for a user at `pos`, or `None` if it sits on a BS.
    #[inline]
    fn interference<R: Rng + ?Sized>(&self, pos: Point, rng: &mut R) -> Option<(f64, f64, [f64; 2])> {
        let mut beta = 0.0;
        let mut cluster = [0.0; 2];
        for (j, (bs, w)) in self.interferers.iter().zip(&self.weights).enumerate() {
            let d2 = pos.distance_sq(bs);
            if d2 == 0.0 {
                return None;
            }
            let g: f64 = Exp1.sample(rng);
            let term = w * self.kernel.at_distance_sq(d2) * g;
            if j < self.cluster_peers {
                cluster[j] = term;
            }
            beta += term;
        }
        let beta_out = beta - cluster[0] - cluster[1];
        Some((beta, beta_out.max(0.0), cluster))
    }
}

fn check_users(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::arg("n", "a drop needs at least one user"))
    } else {
        Ok(())
    }
}

/// Fills `out` with `n` symmetric-model users: every user sits on the circle
/// of radius `R_sym` around its serving BS at a uniform angle.
pub fn fill_symmetric<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
    out: &mut Vec<UserSample>,
) -> Result<()> {
    check_users(n)?;
    let cell = CellKernel::new(geometry, spec, budget)?;
    let r = geometry.symmetric_radius_km;
    let rho = cell.snr * cell.kernel.at_distance_sq(r * r);
    out.clear();
    out.reserve(n);
    while out.len() < n {
        let angle = rng.random::<f64>() * TAU;
        let pos = cell.serving.offset(Point::polar(r, angle));
        let g: f64 = Exp1.sample(rng);
        let Some((beta, beta_out, cluster_links)) = cell.interference(pos, rng) else {
            continue;
        };
        out.push(UserSample {
            alpha: rho * g,
            beta,
            beta_out,
            cluster_links,
            distance_km: r,
        });
    }
    Ok(())
}

/// Fills `out` with `n` asymmetric-model users, uniform on the disc of
/// radius `R` around the serving BS. Users drawn on a BS are re-drawn.
pub fn fill_asymmetric<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
    out: &mut Vec<UserSample>,
) -> Result<()> {
    check_users(n)?;
    let cell = CellKernel::new(geometry, spec, budget)?;
    let radius = geometry.cell_radius_km;
    out.clear();
    out.reserve(n);
    while out.len() < n {
        let r = radius * rng.random::<f64>().sqrt();
        let angle = rng.random::<f64>() * TAU;
        if r == 0.0 {
            continue;
        }
        let pos = cell.serving.offset(Point::polar(r, angle));
        let g: f64 = Exp1.sample(rng);
        let Some((beta, beta_out, cluster_links)) = cell.interference(pos, rng) else {
            continue;
        };
        out.push(UserSample {
            alpha: cell.snr * cell.kernel.at_distance_sq(r * r) * g,
            beta,
            beta_out,
            cluster_links,
            distance_km: r,
        });
    }
    Ok(())
}

/// Fills `out` for the given model.
pub fn fill_drop<R: Rng + ?Sized>(
    model: ChannelModel,
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
    out: &mut Vec<UserSample>,
) -> Result<()> {
    match model {
        ChannelModel::Symmetric => fill_symmetric(geometry, spec, budget, n, rng, out),
        ChannelModel::Asymmetric => fill_asymmetric(geometry, spec, budget, n, rng, out),
    }
}

pub fn drop_symmetric<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
) -> Result<Drop> {
    let mut users = Vec::new();
    fill_symmetric(geometry, spec, budget, n, rng, &mut users)?;
    Ok(Drop {
        users,
        model: ChannelModel::Symmetric,
    })
}

pub fn drop_asymmetric<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
) -> Result<Drop> {
    let mut users = Vec::new();
    fill_asymmetric(geometry, spec, budget, n, rng, &mut users)?;
    Ok(Drop {
        users,
        model: ChannelModel::Asymmetric,
    })
}

/// Symmetric-model drop in which interferer `j` reaches every user with the
/// fixed path gain `interferer_gains[j]` instead of a distance-based one.
pub fn unequal_interferer_drop<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    spec: &PathLossSpec,
    interferer_gains: &[f64],
    budget: &LinkBudget,
    n: usize,
    rng: &mut R,
) -> Result<Drop> {
    check_users(n)?;
    spec.validate()?;
    if interferer_gains.len() != geometry.interferer_count() {
        return Err(Error::arg(
            "interferer_gains",
            format!(
                "expected {} entries, got {}",
                geometry.interferer_count(),
                interferer_gains.len()
            ),
        ));
    }
    if let Some(g) = interferer_gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return Err(Error::arg(
            "interferer_gains",
            format!("path gains must be nonzero and positive, got {g}"),
        ));
    }
    let weights = budget.interferer_weights(geometry.interferer_count())?;
    let rho: Vec<f64> = weights.iter().zip(interferer_gains).map(|(w, g)| w * g).collect();
    let r = geometry.symmetric_radius_km;
    let alpha_scale = budget.snr_scale() * spec.gain(r)?;
    let peers = rho.len().min(2);
    let users = (0..n)
        .map(|_| {
            let g: f64 = Exp1.sample(rng);
            let mut beta = 0.0;
            let mut cluster = [0.0; 2];
            for (j, rj) in rho.iter().enumerate() {
                let term = rj * Distribution::<f64>::sample(&Exp1, rng);
                if j < peers {
                    cluster[j] = term;
                }
                beta += term;
            }
            UserSample {
                alpha: alpha_scale * g,
                beta,
                beta_out: (beta - cluster[0] - cluster[1]).max(0.0),
                cluster_links: cluster,
                distance_km: r,
            }
        })
        .collect();
    Ok(Drop {
        users,
        model: ChannelModel::Symmetric,
    })
}
