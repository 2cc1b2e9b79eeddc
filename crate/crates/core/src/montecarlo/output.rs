//! CSV curves and the resolved-config sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use super::{CurvePoint, ScenarioConfig};
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros dropped.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn header(config: &ScenarioConfig) -> Vec<String> {
    let mut h = vec!["n".to_string()];
    for k in &config.schedulers {
        for col in ["mean_rate", "rate_ci", "mean_beta_norm", "beta_ci"] {
            h.push(format!("{}_{col}", k.name()));
        }
    }
    for col in [
        "delta_R", "delta_R_ci", "jp_rate", "jp_rate_ci", "lemma1_lo", "lemma1_hi", "lemma2_lo",
        "lemma2_hi", "thm1_lo", "thm1_hi",
    ] {
        h.push(col.to_string());
    }
    h
}

fn row(config: &ScenarioConfig, p: &CurvePoint) -> Vec<String> {
    let num = |x: f64| fmt_sig9(x);
    let opt = |x: Option<f64>| x.map(fmt_sig9).unwrap_or_default();
    let mut r = vec![p.n.to_string()];
    for k in &config.schedulers {
        match p.scheduler(*k) {
            Some(s) => r.extend([num(s.rate.mean), num(s.rate.ci), num(s.beta.mean), num(s.beta.ci)]),
            None => r.extend(std::iter::repeat_n(String::new(), 4)),
        }
    }
    r.push(num(p.delta_r.mean));
    r.push(num(p.delta_r.ci));
    r.push(opt(p.jp_rate.map(|j| j.mean)));
    r.push(opt(p.jp_rate.map(|j| j.ci)));
    for b in [p.bounds.lemma1, p.bounds.lemma2, p.bounds.theorem1] {
        r.push(opt(b.map(|b| b.lower)));
        r.push(opt(b.map(|b| b.upper)));
    }
    r
}

/// The full CSV document for `points`.
pub fn csv_string(config: &ScenarioConfig, points: &[CurvePoint]) -> Result<String> {
    let io = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        reason: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(header(config)).map_err(io)?;
    for p in points {
        w.write_record(row(config, p)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: "<csv>".into(),
        reason: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

/// Sidecar text: the resolved config followed by an informational `[meta]` section.
pub fn metadata_string(config: &ScenarioConfig, extra: &[(&str, String)]) -> String {
    let mut s = config.to_config_string();
    s.push_str("\n[meta]\n");
    s.push_str(&format!("artifact_version = {ARTIFACT_VERSION}\n"));
    for (k, v) in extra {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.cfg`; returns both paths.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    config: &ScenarioConfig,
    points: &[CurvePoint],
    extra_meta: &[(&str, String)],
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let cfg_path = dir.join(format!("{stem}.cfg"));
    write(&csv_path, &csv_string(config, points)?)?;
    write(&cfg_path, &metadata_string(config, extra_meta))?;
    Ok((csv_path, cfg_path))
}
