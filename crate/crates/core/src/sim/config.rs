//! Flat `key = value` scenario files.
//!
//! One assignment per line, `#` starts a comment. Numbers may carry a `dB`
//! suffix where the key holds a linear power ratio, ratios may be written
//! as fractions (`1/25`), lists are comma separated. Unknown keys are
//! rejected so that typos do not silently fall back to defaults.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::system::{db_to_linear, linear_to_db, Aoa};

use super::{Scenario, Scheme, Sweep, SweepAxis};

/// Every accepted key, in the order used when printing a resolved scenario.
pub const KEYS: &[&str] = &[
    "scenario_id",
    "sweep_axis",
    "sweep_values",
    "schemes",
    "csi_mode",
    "n_realizations",
    "n",
    "n_cp",
    "l",
    "l1",
    "l2",
    "m_x",
    "m_y",
    "b_x",
    "b_y",
    "zeta_bi",
    "zeta_iu",
    "alpha",
    "gamma",
    "sigma2",
    "snr_db",
    "pilot_power_ratio",
    "coherence_time",
    "tau_d",
    "psi_e",
    "psi_a",
    "psi_e_bs",
    "psi_a_bs",
    "spacing",
    "wavelength",
    "seed",
    "zc_root",
    "i_sa",
    "inner_tol",
    "outer_tol",
    "max_inner",
    "max_outer",
    "pg_step0",
    "pg_backtrack",
    "pg_tol",
];

/// Parses a number, accepting `inf`, fractions `a/b` and an optional `dB`
/// suffix (converted to linear) when `allow_db` is set.
fn parse_number(key: &str, raw: &str, allow_db: bool) -> Result<f64> {
    let s = raw.trim();
    let lower = s.to_ascii_lowercase();
    if let Some(db) = lower.strip_suffix("db") {
        if !allow_db {
            return Err(Error::config(key, format!("`{s}`: dB values are not accepted here")));
        }
        return Ok(db_to_linear(parse_number(key, db, false)?));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_number(key, num, false)?;
        let den = parse_number(key, den, false)?;
        return Ok(num / den);
    }
    s.parse::<f64>()
        .map_err(|_| Error::config(key, format!("`{s}` is not a number")))
}

fn parse_count(key: &str, raw: &str) -> Result<usize> {
    raw.trim()
        .parse::<usize>()
        .map_err(|_| Error::config(key, format!("`{}` is not a non-negative integer", raw.trim())))
}

fn parse_list<T>(key: &str, raw: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = raw.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    items.into_iter().map(item).collect()
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Parses scenario text; missing keys take their defaults. The result is
/// validated, including every configuration implied by the sweep.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut sc = Scenario::default();
    let cfg = &mut sc.base;
    let settings = &mut sc.settings;
    let mut seen = HashSet::new();
    let mut sweep_axis = None;
    let mut sweep_values: Option<Vec<f64>> = None;
    let (mut psi_e, mut psi_a, mut psi_e_bs, mut psi_a_bs) = (None, None, None, None);

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(
                &format!("line {}", lineno + 1),
                format!("expected `key = value`, found `{line}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::config(key, "given more than once"));
        }
        let num = |allow_db| parse_number(key, value, allow_db);
        let count = || parse_count(key, value);
        match key {
            "scenario_id" => {
                if value.is_empty() || value.contains(',') || value.contains('"') {
                    return Err(Error::config(key, "must be non-empty without commas or quotes"));
                }
                sc.id = value.to_string();
            }
            "sweep_axis" => sweep_axis = Some(value.parse::<SweepAxis>()?),
            "sweep_values" => sweep_values = Some(parse_list(key, value, |s| parse_number(key, s, false))?),
            "schemes" => sc.schemes = parse_list(key, value, |s| s.parse::<Scheme>())?,
            "csi_mode" => sc.csi_mode = value.parse()?,
            "n_realizations" => sc.n_realizations = count()?,
            "n" => cfg.n = count()?,
            "n_cp" => cfg.n_cp = count()?,
            "l" => cfg.l = count()?,
            "l1" => cfg.l1 = count()?,
            "l2" => cfg.l2 = count()?,
            "m_x" => cfg.m_x = count()?,
            "m_y" => cfg.m_y = count()?,
            "b_x" => cfg.b_x = count()?,
            "b_y" => cfg.b_y = count()?,
            "zeta_bi" => cfg.zeta_bi = num(true)?,
            "zeta_iu" => cfg.zeta_iu = num(true)?,
            "alpha" => cfg.alpha = num(true)?,
            "gamma" => cfg.gamma = num(true)?,
            "sigma2" => cfg.sigma2 = num(true)?,
            "snr_db" => {
                let lower = value.to_ascii_lowercase();
                cfg.snr_db = parse_number(key, lower.strip_suffix("db").unwrap_or(&lower), false)?;
            }
            "pilot_power_ratio" => cfg.pilot_power_ratio = num(true)?,
            "coherence_time" => cfg.coherence_time = num(false)?,
            "tau_d" => cfg.tau_d = num(false)?,
            "psi_e" => psi_e = Some(num(false)?),
            "psi_a" => psi_a = Some(num(false)?),
            "psi_e_bs" => psi_e_bs = Some(num(false)?),
            "psi_a_bs" => psi_a_bs = Some(num(false)?),
            "spacing" => cfg.spacing = num(false)?,
            "wavelength" => cfg.wavelength = num(false)?,
            "seed" => {
                cfg.seed = value
                    .parse::<u64>()
                    .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative integer")))?
            }
            "zc_root" => cfg.zc_root = count()?,
            "i_sa" => cfg.i_sa = count()?,
            "inner_tol" => settings.inner_tol = num(false)?,
            "outer_tol" => settings.outer_tol = num(false)?,
            "max_inner" => settings.max_inner = count()?,
            "max_outer" => settings.max_outer = count()?,
            "pg_step0" => settings.pg_step0 = num(false)?,
            "pg_backtrack" => settings.pg_backtrack = num(false)?,
            "pg_tol" => settings.pg_tol = num(false)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }

    cfg.user_aoa = angle_pair("psi_e", psi_e, "psi_a", psi_a)?;
    cfg.bs_aoa = angle_pair("psi_e_bs", psi_e_bs, "psi_a_bs", psi_a_bs)?;
    sc.sweep = match (sweep_axis, sweep_values) {
        (Some(axis), Some(values)) => Some(Sweep { axis, values }),
        (None, None) => None,
        (Some(_), None) => return Err(Error::MissingKey("sweep_values".into())),
        (None, Some(_)) => return Err(Error::MissingKey("sweep_axis".into())),
    };
    sc.validate()?;
    Ok(sc)
}

fn angle_pair(e_key: &str, e: Option<f64>, a_key: &str, a: Option<f64>) -> Result<Option<Aoa>> {
    match (e, a) {
        (Some(elevation), Some(azimuth)) => Ok(Some(Aoa { elevation, azimuth })),
        (None, None) => Ok(None),
        (Some(_), None) => Err(Error::MissingKey(a_key.into())),
        (None, Some(_)) => Err(Error::MissingKey(e_key.into())),
    }
}

/// Shortest decimal that parses back to `x`.
fn num(x: f64) -> String {
    if x.is_infinite() {
        return "inf".into();
    }
    format!("{x}")
}

/// dB rendering rounded to 10 decimals, enough to survive a parse round trip
/// of the values people actually type.
fn db(x: f64) -> String {
    if x.is_infinite() {
        return "inf".into();
    }
    let d = (linear_to_db(x) * 1e10).round() / 1e10;
    format!("{d}dB")
}

/// Renders a scenario in config-file syntax with every key resolved.
pub fn render_config(sc: &Scenario) -> String {
    let c = &sc.base;
    let s = &sc.settings;
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("scenario_id", sc.id.clone());
    if let Some(sweep) = &sc.sweep {
        put("sweep_axis", sweep.axis.to_string());
        put(
            "sweep_values",
            sweep.values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", "),
        );
    }
    put(
        "schemes",
        sc.schemes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "),
    );
    put("csi_mode", sc.csi_mode.to_string());
    put("n_realizations", sc.n_realizations.to_string());
    put("n", c.n.to_string());
    put("n_cp", c.n_cp.to_string());
    put("l", c.l.to_string());
    put("l1", c.l1.to_string());
    put("l2", c.l2.to_string());
    put("m_x", c.m_x.to_string());
    put("m_y", c.m_y.to_string());
    put("b_x", c.b_x.to_string());
    put("b_y", c.b_y.to_string());
    put("zeta_bi", db(c.zeta_bi));
    put("zeta_iu", db(c.zeta_iu));
    put("alpha", num(c.alpha));
    put("gamma", db(c.gamma));
    put("sigma2", num(c.sigma2));
    put("snr_db", num(c.snr_db));
    put("pilot_power_ratio", num(c.pilot_power_ratio));
    put("coherence_time", num(c.coherence_time));
    put("tau_d", num(c.tau_d));
    for (e_key, a_key, aoa) in [("psi_e", "psi_a", c.user_aoa), ("psi_e_bs", "psi_a_bs", c.bs_aoa)] {
        if let Some(a) = aoa {
            put(e_key, num(a.elevation));
            put(a_key, num(a.azimuth));
        }
    }
    put("spacing", num(c.spacing));
    put("wavelength", num(c.wavelength));
    put("seed", c.seed.to_string());
    put("zc_root", c.zc_root.to_string());
    put("i_sa", c.i_sa.to_string());
    put("inner_tol", num(s.inner_tol));
    put("outer_tol", num(s.outer_tol));
    put("max_inner", s.max_inner.to_string());
    put("max_outer", s.max_outer.to_string());
    put("pg_step0", num(s.pg_step0));
    put("pg_backtrack", num(s.pg_backtrack));
    put("pg_tol", num(s.pg_tol));
    out
}
