//! Scenario description and its `key = value` file format.
//!
//! ```text
//! [scenario]
//! model = symmetric
//! n_grid = 16, 32, 64
//! trials_per_n = 20000
//! master_seed = 1
//!
//! [link]
//! tx_power_dbm = 40
//! noise_dbm = -101
//!
//! [geometry]
//! interferers = 6
//! cell_radius_km = 2
//! symmetric_radius_km = 1
//! interferer_scale =
//!
//! [path_loss]
//! kind = hata
//! offset_db = -114.5
//! slope_db = -37.19
//!
//! [schedulers]
//! enabled = no_interference, cluster_free, max_sinr, max_gain
//! jp = false
//! ```
//!
//! Omitted keys keep their default. Lines starting with `#` are comments and
//! the `[meta]` section is informational only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::channel_model::{first_ring_geometry, ChannelModel, LinkBudget, NetworkGeometry, PathLossSpec};
use crate::error::{Error, Result};
use crate::scheduling::SchedulerKind;

/// Everything that determines a simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: ChannelModel,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub interferers: usize,
    pub cell_radius_km: f64,
    pub symmetric_radius_km: f64,
    /// Linear multiplier per interferer; empty means no scaling.
    pub interferer_scale: Vec<f64>,
    pub path_loss: PathLossSpec,
    /// Schedulers reported in the output, kept in canonical order.
    pub schedulers: Vec<SchedulerKind>,
    pub jp_enabled: bool,
    pub master_seed: u64,
}

/// Geometric grid `2^lo, ..., 2^hi`.
pub fn pow2_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl ScenarioConfig {
    /// Defaults: 40 dBm per BS, -101 dBm noise, R = 2 km, R_sym = 1 km,
    /// Hata path loss, six interferers, n in 2^4..2^14, 2*10^4 trials.
    pub fn macro_default(model: ChannelModel) -> Self {
        ScenarioConfig {
            model,
            n_grid: pow2_grid(4, 14),
            trials_per_n: 20_000,
            tx_power_dbm: 40.0,
            noise_dbm: -101.0,
            interferers: 6,
            cell_radius_km: 2.0,
            symmetric_radius_km: 1.0,
            interferer_scale: Vec::new(),
            path_loss: PathLossSpec::MACRO_HATA,
            schedulers: SchedulerKind::ALL.to_vec(),
            jp_enabled: false,
            master_seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::config("scenario.n_grid", "must not be empty"));
        }
        if self.n_grid[0] < 1 {
            return Err(Error::config("scenario.n_grid", "user counts must be >= 1"));
        }
        if let Some(w) = self.n_grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "scenario.n_grid",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        if *self.n_grid.last().unwrap() >= 1 << 32 {
            return Err(Error::config("scenario.n_grid", "user counts must be < 2^32"));
        }
        if self.trials_per_n < 1 || self.trials_per_n >= 1 << 32 {
            return Err(Error::config("scenario.trials_per_n", "must be in [1, 2^32)"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::config("link.tx_power_dbm", "must be finite"));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::config("link.noise_dbm", "must be finite"));
        }
        if self.interferers < 1 {
            return Err(Error::config("geometry.interferers", "must be >= 1"));
        }
        if !(self.cell_radius_km > 0.0 && self.cell_radius_km.is_finite()) {
            return Err(Error::config("geometry.cell_radius_km", "must be positive"));
        }
        if !(self.symmetric_radius_km > 0.0 && self.symmetric_radius_km <= self.cell_radius_km) {
            return Err(Error::config(
                "geometry.symmetric_radius_km",
                "must lie in (0, cell_radius_km]",
            ));
        }
        if !self.interferer_scale.is_empty() {
            if self.interferer_scale.len() != self.interferers {
                return Err(Error::config(
                    "geometry.interferer_scale",
                    format!("expected {} entries, got {}", self.interferers, self.interferer_scale.len()),
                ));
            }
            if self.interferer_scale.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                return Err(Error::config("geometry.interferer_scale", "entries must be >= 0"));
            }
        }
        self.path_loss
            .validate()
            .map_err(|e| Error::config("path_loss", e.to_string()))?;
        if self.jp_enabled && self.interferers != 6 {
            return Err(Error::config(
                "schedulers.jp",
                "joint processing needs the six-cell first ring (geometry.interferers = 6)",
            ));
        }
        if self.schedulers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("schedulers.enabled", "duplicate scheduler"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<NetworkGeometry> {
        first_ring_geometry(self.cell_radius_km, self.interferers)?
            .with_symmetric_radius(self.symmetric_radius_km)
    }

    pub fn budget(&self) -> LinkBudget {
        LinkBudget::new(self.tx_power_dbm, self.noise_dbm)
            .with_interferer_scale(self.interferer_scale.clone())
    }

    /// `P * gamma(R_sym) / noise`, the symmetric-model direct SNR.
    pub fn symmetric_rho(&self) -> Result<f64> {
        Ok(self.budget().snr_scale() * self.path_loss.gain(self.symmetric_radius_km)?)
    }

    /// Canonical text form; parsing it yields an identical config.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let join = |v: Vec<String>| v.join(", ");
        let _ = writeln!(s, "[scenario]");
        let _ = writeln!(s, "model = {}", self.model.name());
        let _ = writeln!(s, "n_grid = {}", join(self.n_grid.iter().map(|n| n.to_string()).collect()));
        let _ = writeln!(s, "trials_per_n = {}", self.trials_per_n);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "\n[link]");
        let _ = writeln!(s, "tx_power_dbm = {}", self.tx_power_dbm);
        let _ = writeln!(s, "noise_dbm = {}", self.noise_dbm);
        let _ = writeln!(s, "\n[geometry]");
        let _ = writeln!(s, "interferers = {}", self.interferers);
        let _ = writeln!(s, "cell_radius_km = {}", self.cell_radius_km);
        let _ = writeln!(s, "symmetric_radius_km = {}", self.symmetric_radius_km);
        let _ = writeln!(
            s,
            "interferer_scale = {}",
            join(self.interferer_scale.iter().map(|x| x.to_string()).collect())
        );
        let _ = writeln!(s, "\n[path_loss]");
        match self.path_loss {
            PathLossSpec::Hata { offset_db, slope_db } => {
                let _ = writeln!(s, "kind = hata");
                let _ = writeln!(s, "offset_db = {offset_db}");
                let _ = writeln!(s, "slope_db = {slope_db}");
            }
            PathLossSpec::Generic { lambda, epsilon } => {
                let _ = writeln!(s, "kind = generic");
                let _ = writeln!(s, "lambda = {lambda}");
                let _ = writeln!(s, "epsilon = {epsilon}");
            }
        }
        let _ = writeln!(s, "\n[schedulers]");
        let _ = writeln!(
            s,
            "enabled = {}",
            join(self.schedulers.iter().map(|k| k.name().to_string()).collect())
        );
        let _ = writeln!(s, "jp = {}", self.jp_enabled);
        s
    }

    /// Parses the text format, starting from the symmetric macro-cell default.
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let model = match entries.get("scenario.model") {
            Some(v) => v.parse::<ChannelModel>().map_err(|e| Error::config("scenario.model", e))?,
            None => ChannelModel::Symmetric,
        };
        let mut cfg = ScenarioConfig::macro_default(model);
        let mut path_kind: Option<String> = None;
        let mut path_values: BTreeMap<&str, f64> = BTreeMap::new();

        for (key, value) in &entries {
            match key.as_str() {
                "scenario.model" => {}
                "scenario.n_grid" => cfg.n_grid = parse_list(key, value)?,
                "scenario.trials_per_n" => cfg.trials_per_n = parse_num(key, value)?,
                "scenario.master_seed" => cfg.master_seed = parse_num(key, value)?,
                "link.tx_power_dbm" => cfg.tx_power_dbm = parse_num(key, value)?,
                "link.noise_dbm" => cfg.noise_dbm = parse_num(key, value)?,
                "geometry.interferers" => cfg.interferers = parse_num(key, value)?,
                "geometry.cell_radius_km" => cfg.cell_radius_km = parse_num(key, value)?,
                "geometry.symmetric_radius_km" => cfg.symmetric_radius_km = parse_num(key, value)?,
                "geometry.interferer_scale" => cfg.interferer_scale = parse_list(key, value)?,
                "path_loss.kind" => path_kind = Some(value.clone()),
                "path_loss.offset_db" | "path_loss.slope_db" | "path_loss.lambda" | "path_loss.epsilon" => {
                    path_values.insert(&key["path_loss.".len()..], parse_num(key, value)?);
                }
                "schedulers.enabled" => {
                    let mut kinds: Vec<SchedulerKind> = split_list(value)
                        .map(|s| s.parse::<SchedulerKind>().map_err(|e| Error::config(key, e)))
                        .collect::<Result<_>>()?;
                    kinds.sort();
                    if kinds.windows(2).any(|w| w[0] == w[1]) {
                        return Err(Error::config(key, "duplicate scheduler"));
                    }
                    cfg.schedulers = kinds;
                }
                "schedulers.jp" => cfg.jp_enabled = parse_num(key, value)?,
                k if k.starts_with("meta.") => {}
                other => return Err(Error::config(other, "unknown key")),
            }
        }

        let kind = path_kind.as_deref().unwrap_or(match cfg.path_loss {
            PathLossSpec::Hata { .. } => "hata",
            PathLossSpec::Generic { .. } => "generic",
        });
        cfg.path_loss = match kind {
            "hata" => {
                if let Some(k) = ["lambda", "epsilon"].iter().find(|k| path_values.contains_key(**k)) {
                    return Err(Error::config(format!("path_loss.{k}"), "not a hata parameter"));
                }
                PathLossSpec::Hata {
                    offset_db: path_values.get("offset_db").copied().unwrap_or(-114.5),
                    slope_db: path_values.get("slope_db").copied().unwrap_or(-37.19),
                }
            }
            "generic" => {
                if let Some(k) = ["offset_db", "slope_db"].iter().find(|k| path_values.contains_key(**k)) {
                    return Err(Error::config(format!("path_loss.{k}"), "not a generic parameter"));
                }
                let get = |k: &str| {
                    path_values
                        .get(k)
                        .copied()
                        .ok_or_else(|| Error::config(format!("path_loss.{k}"), "required for kind = generic"))
                };
                PathLossSpec::Generic {
                    lambda: get("lambda")?,
                    epsilon: get("epsilon")?,
                }
            }
            other => return Err(Error::config("path_loss.kind", format!("unknown kind `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            ));
        };
        if section.is_empty() {
            return Err(Error::config(k.trim(), "key outside of any [section]"));
        }
        let key = format!("{section}.{}", k.trim());
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::config(key, "duplicate key"));
        }
    }
    Ok(out)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    split_list(value).map(|v| parse_num(key, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_match_macro_setup() {
        let c = ScenarioConfig::macro_default(ChannelModel::Symmetric);
        assert_eq!((c.tx_power_dbm, c.noise_dbm), (40.0, -101.0));
        assert_eq!((c.cell_radius_km, c.symmetric_radius_km), (2.0, 1.0));
        assert_eq!(c.path_loss, PathLossSpec::MACRO_HATA);
        assert_eq!(c.n_grid.first(), Some(&16));
        assert_eq!(c.n_grid.last(), Some(&16384));
        c.validate().unwrap();
        assert!((10.0 * c.symmetric_rho().unwrap().log10() - 26.5).abs() < 1e-12);
    }

    #[test]
    fn round_trip_text() {
        let mut c = ScenarioConfig::macro_default(ChannelModel::Asymmetric);
        c.interferer_scale = vec![0.25, 1.0, 3.9, 1.0, 0.5, 2.0];
        c.jp_enabled = true;
        c.schedulers = vec![SchedulerKind::MaxSinr, SchedulerKind::MaxGain];
        c.master_seed = u64::MAX;
        assert_eq!(ScenarioConfig::parse(&c.to_config_string()).unwrap(), c);

        c.path_loss = PathLossSpec::Generic { lambda: 0.1, epsilon: 3.3 };
        c.jp_enabled = false;
        c.interferers = 3;
        c.interferer_scale.clear();
        assert_eq!(ScenarioConfig::parse(&c.to_config_string()).unwrap(), c);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = ScenarioConfig::parse("[scenario]\nmodel = asymmetric\ntrials_per_n = 10\n").unwrap();
        assert_eq!(c.model, ChannelModel::Asymmetric);
        assert_eq!(c.trials_per_n, 10);
        assert_eq!(c.path_loss, PathLossSpec::MACRO_HATA);
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("[scenario]\nn_grid = 8, 4\n", "scenario.n_grid"),
            ("[scenario]\ntrials_per_n = 0\n", "scenario.trials_per_n"),
            ("[scenario]\nmodel = hexagonal\n", "scenario.model"),
            ("[geometry]\ncell_radius_km = -2\n", "geometry.cell_radius_km"),
            ("[geometry]\nsymmetric_radius_km = 5\n", "geometry.symmetric_radius_km"),
            ("[geometry]\ninterferer_scale = 1, 2\n", "geometry.interferer_scale"),
            ("[geometry]\nfoo = 1\n", "geometry.foo"),
            ("[path_loss]\nkind = generic\nlambda = 1\n", "path_loss.epsilon"),
            ("[path_loss]\nkind = cost231\n", "path_loss.kind"),
            ("[schedulers]\nenabled = max_sinr, fair\n", "schedulers.enabled"),
            ("[schedulers]\njp = yes\n", "schedulers.jp"),
            ("[geometry]\ninterferers = 4\n[schedulers]\njp = true\n", "schedulers.jp"),
            ("[link]\nnoise_dbm = x\n", "link.noise_dbm"),
            ("[link]\nnoise_dbm = 1\nnoise_dbm = 2\n", "link.noise_dbm"),
        ];
        for (text, field) in cases {
            match ScenarioConfig::parse(text) {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn meta_section_is_ignored() {
        let c = ScenarioConfig::parse("[meta]\nartifact_version = 0.1.0\nanything = goes\n").unwrap();
        assert_eq!(c, ScenarioConfig::macro_default(ChannelModel::Symmetric));
    }

    proptest! {
        #[test]
        fn numeric_fields_round_trip(p in -50.0f64..60.0, noise in -150.0f64..-50.0, r in 0.1f64..10.0, frac in 0.01f64..1.0, seed in any::<u64>()) {
            let mut c = ScenarioConfig::macro_default(ChannelModel::Symmetric);
            c.tx_power_dbm = p;
            c.noise_dbm = noise;
            c.cell_radius_km = r;
            c.symmetric_radius_km = r * frac;
            c.master_seed = seed;
            prop_assert_eq!(ScenarioConfig::parse(&c.to_config_string()).unwrap(), c);
        }
    }
}
