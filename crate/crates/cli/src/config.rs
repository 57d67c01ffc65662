//! Line-oriented `key = value` run configuration.
//!
//! Every key has a default equal to the baseline engine. Unknown keys,
//! duplicate keys and unparsable values are rejected with the offending
//! line number (or `--set` position).

use std::collections::BTreeMap;
use std::fmt;

use otto_core::cycle::{population_grid, CycleConfig, HeatingGrid, ReservoirParams};
use otto_core::dynamics::OdeOptions;
use otto_core::model::SystemParams;

/// Key, default value, and a short description with units.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("nu_cold", "2.0", "cold-stroke field amplitude, kHz"),
    ("nu_hot", "3.6", "hot-stroke field amplitude, kHz"),
    ("tau_ms", "0.1", "expansion/compression duration, ms"),
    ("g", "0.2", "longitudinal field ratio, dimensionless"),
    ("alpha", "0.6", "hot-bath coupling strength"),
    ("omega_c", "30", "hot-bath cutoff, rad/ms"),
    ("mu", "0", "hot-bath chemical potential, rad/ms"),
    ("cold_alpha", "auto", "cold-bath coupling (auto = alpha)"),
    ("cold_omega_c", "auto", "cold-bath cutoff, rad/ms (auto = omega_c)"),
    ("cold_mu", "0", "cold-bath chemical potential, rad/ms"),
    ("p_plus_cold", "0.261", "excited population of the cold reservoir state"),
    ("p_plus_hot", "0.99", "excited population of the hot reservoir state"),
    ("negative_temperature", "true", "require p_plus_hot >= 0.5"),
    ("unitary_steps", "20000", "midpoint steps for the stroke unitaries"),
    ("ode_rtol", "1e-9", "integrator relative tolerance"),
    ("ode_atol", "1e-12", "integrator absolute tolerance"),
    ("pos_tol", "1e-8", "report heating states with an eigenvalue below -pos_tol"),
    ("dense_step_us", "0.25", "heating-grid spacing of the fine block, us"),
    ("dense_end_ms", "1.0", "end of the fine block, ms"),
    ("tail_step_us", "10", "heating-grid spacing of the tail, us"),
    ("t_max_ms", "10", "heating-grid end, ms"),
    ("t_f_ms", "1.0", "overall-performance window, ms"),
    ("q_t0_ms", "0", "non-Markovianity window start, ms"),
    ("q_t1_ms", "10", "non-Markovianity window end, ms"),
    ("rates_t_end_ms", "10", "rates command: time span, ms"),
    ("omega_c_list", "30,25,20,15,10,5", "sweep-cutoff: cutoffs, rad/ms"),
    ("nonmarkov_omega_c_list", "1:30:1", "nonmarkov: cutoffs for the Q table, rad/ms"),
    ("population_omega_c_list", "25,15,5", "sweep-population: cutoffs, rad/ms"),
    ("t_tilde_us", "auto", "sweep-population: heating time(s), us (auto = argmax of eta)"),
    ("p_hot_start", "0.50", "population grid start"),
    ("p_hot_stop", "0.99", "population grid stop (inclusive)"),
    ("p_hot_step", "0.01", "population grid step"),
    ("dump_trajectory", "false", "simulate: also write the heating-stroke density matrices"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub location: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(location: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        location: location.map(str::to_owned),
        message: message.into(),
    }
}

/// Heating time for sweep-population.
#[derive(Debug, Clone, PartialEq)]
pub enum TTilde {
    Auto,
    /// One value for every cutoff, or one per cutoff, in ms.
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cycle: CycleConfig,
    pub rates_t_end: f64,
    pub omega_c_list: Vec<f64>,
    pub nonmarkov_omega_c_list: Vec<f64>,
    pub population_omega_c_list: Vec<f64>,
    pub t_tilde: TTilde,
    pub p_hot_grid: Vec<f64>,
    pub dump_trajectory: bool,
    /// Resolved `key = value` pairs in key order, for output headers.
    pub entries: Vec<(String, String)>,
}

/// Raw values keyed by name with the location each came from.
struct Raw {
    values: BTreeMap<&'static str, (String, Option<String>)>,
}

impl Raw {
    fn defaults() -> Self {
        Raw {
            values: KEYS.iter().map(|(k, d, _)| (*k, (d.to_string(), None))).collect(),
        }
    }

    fn set(&mut self, key: &str, value: &str, location: String) -> Result<(), ConfigError> {
        let (name, _, _) = KEYS
            .iter()
            .find(|(k, _, _)| *k == key)
            .ok_or_else(|| err(Some(&location), format!("unknown key `{key}`")))?;
        self.values.insert(name, (value.to_string(), Some(location)));
        Ok(())
    }

    fn get(&self, key: &str) -> (&str, Option<&str>) {
        let (v, loc) = &self.values[key];
        (v.as_str(), loc.as_deref())
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let (v, loc) = self.get(key);
        let x: f64 = v
            .parse()
            .map_err(|_| err(loc, format!("`{key}` expects a number, got `{v}`")))?;
        if !x.is_finite() {
            return Err(err(loc, format!("`{key}` must be finite")));
        }
        Ok(x)
    }

    fn auto_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.get(key).0 == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let (v, loc) = self.get(key);
        v.parse()
            .map_err(|_| err(loc, format!("`{key}` expects a non-negative integer, got `{v}`")))
    }

    fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        let (v, loc) = self.get(key);
        match v {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err(loc, format!("`{key}` expects true or false, got `{v}`"))),
        }
    }

    /// Comma-separated numbers, or `start:stop:step` (inclusive).
    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (v, loc) = self.get(key);
        let bad = || err(loc, format!("`{key}` expects a comma list or start:stop:step, got `{v}`"));
        let out = if v.contains(':') {
            let parts: Vec<f64> = v
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            if parts.len() != 3 {
                return Err(bad());
            }
            population_grid(parts[0], parts[1], parts[2]).map_err(|e| err(loc, format!("`{key}`: {e}")))?
        } else {
            v.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?
        };
        if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
            return Err(bad());
        }
        Ok(out)
    }
}

fn split_pair<'a>(line: &'a str, location: &str) -> Result<(&'a str, &'a str), ConfigError> {
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| err(Some(location), format!("expected `key = value`, got `{line}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(err(Some(location), format!("expected `key = value`, got `{line}`")));
    }
    Ok((k, v))
}

/// Parse a config document (may be empty) and `--set` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw::defaults();
    let mut seen = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let location = format!("line {}", i + 1);
        let (k, v) = split_pair(line, &location)?;
        if let Some(prev) = seen.insert(k.to_string(), i + 1) {
            return Err(err(Some(&location), format!("duplicate key `{k}` (first set on line {prev})")));
        }
        raw.set(k, v, location)?;
    }
    for (i, o) in overrides.iter().enumerate() {
        let location = format!("--set #{} `{o}`", i + 1);
        let (k, v) = split_pair(o, &location)?;
        raw.set(k, v, location)?;
    }
    resolve(&raw)
}

fn resolve(raw: &Raw) -> Result<RunConfig, ConfigError> {
    let constraint = |key: &str, e: otto_core::Error| {
        let (_, loc) = raw.get(key);
        err(loc, format!("constraint violated: {e}"))
    };
    let system = SystemParams::new(
        raw.f64("nu_cold")?,
        raw.f64("nu_hot")?,
        raw.f64("tau_ms")?,
        raw.f64("g")?,
    )
    .map_err(|e| err(None, format!("constraint violated: {e}")))?;
    let hot = ReservoirParams {
        alpha: raw.f64("alpha")?,
        omega_c: raw.f64("omega_c")?,
        mu: raw.f64("mu")?,
    };
    let cold = ReservoirParams {
        alpha: raw.auto_f64("cold_alpha")?.unwrap_or(hot.alpha),
        omega_c: raw.auto_f64("cold_omega_c")?.unwrap_or(hot.omega_c),
        mu: raw.f64("cold_mu")?,
    };
    let cycle = CycleConfig {
        system,
        hot,
        cold,
        p_plus_cold: raw.f64("p_plus_cold")?,
        p_plus_hot: raw.f64("p_plus_hot")?,
        negative_temperature: raw.bool("negative_temperature")?,
        heating: HeatingGrid {
            dense_step: raw.f64("dense_step_us")? * 1e-3,
            dense_end: raw.f64("dense_end_ms")?,
            tail_step: raw.f64("tail_step_us")? * 1e-3,
            t_max: raw.f64("t_max_ms")?,
        },
        t_f: raw.f64("t_f_ms")?,
        q_window: (raw.f64("q_t0_ms")?, raw.f64("q_t1_ms")?),
        unitary_steps: raw.usize("unitary_steps")?,
        ode: OdeOptions {
            rtol: raw.f64("ode_rtol")?,
            atol: raw.f64("ode_atol")?,
            ..OdeOptions::default()
        },
        pos_tol: raw.f64("pos_tol")?,
    };
    if !(cycle.ode.rtol > 0.0 && cycle.ode.atol > 0.0) {
        return Err(err(None, "constraint violated: ode_rtol and ode_atol must be positive"));
    }
    if cycle.heating.t_max < cycle.q_window.1 {
        let (_, loc) = raw.get("q_t1_ms");
        return Err(err(loc, "constraint violated: q_t1_ms must not exceed t_max_ms"));
    }
    cycle.validate().map_err(|e| {
        let key = match &e {
            otto_core::Error::OutOfRange { name, .. } => *name,
            _ => "",
        };
        let key = match key {
            "t_f" => "t_f_ms",
            "omega_c" => "omega_c",
            k if KEYS.iter().any(|(n, _, _)| *n == k) => k,
            _ => "",
        };
        if key.is_empty() {
            err(None, format!("constraint violated: {e}"))
        } else {
            constraint(key, e)
        }
    })?;

    let rates_t_end = raw.f64("rates_t_end_ms")?;
    if !(rates_t_end > 0.0) {
        let (_, loc) = raw.get("rates_t_end_ms");
        return Err(err(loc, "constraint violated: rates_t_end_ms must be positive"));
    }
    let positive_list = |key: &str| -> Result<Vec<f64>, ConfigError> {
        let l = raw.list(key)?;
        if l.iter().any(|&x| !(x > 0.0)) {
            let (_, loc) = raw.get(key);
            return Err(err(loc, format!("constraint violated: every entry of `{key}` must be positive")));
        }
        Ok(l)
    };
    let omega_c_list = positive_list("omega_c_list")?;
    let nonmarkov_omega_c_list = positive_list("nonmarkov_omega_c_list")?;
    let population_omega_c_list = positive_list("population_omega_c_list")?;
    let t_tilde = if raw.get("t_tilde_us").0 == "auto" {
        TTilde::Auto
    } else {
        let v: Vec<f64> = raw.list("t_tilde_us")?.iter().map(|us| us * 1e-3).collect();
        let (_, loc) = raw.get("t_tilde_us");
        if v.len() != 1 && v.len() != population_omega_c_list.len() {
            return Err(err(
                loc,
                "constraint violated: t_tilde_us needs one value or one per population_omega_c_list entry",
            ));
        }
        if v.iter().any(|&t| !(t >= 0.0 && t <= cycle.heating.t_max)) {
            return Err(err(loc, "constraint violated: t_tilde_us must lie within [0, t_max_ms]"));
        }
        TTilde::Fixed(v)
    };
    let (start, stop, step) = (raw.f64("p_hot_start")?, raw.f64("p_hot_stop")?, raw.f64("p_hot_step")?);
    let p_hot_grid = population_grid(start, stop, step)
        .map_err(|e| err(raw.get("p_hot_step").1, format!("constraint violated: {e}")))?;
    if p_hot_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(err(None, "constraint violated: population grid must lie inside (0, 1)"));
    }

    let mut entries: Vec<(String, String)> = raw
        .values
        .iter()
        .map(|(k, (v, _))| (k.to_string(), v.clone()))
        .collect();
    for (k, v) in entries.iter_mut() {
        match k.as_str() {
            "cold_alpha" => *v = fmt_num(cycle.cold.alpha),
            "cold_omega_c" => *v = fmt_num(cycle.cold.omega_c),
            _ => {}
        }
    }

    Ok(RunConfig {
        cycle,
        rates_t_end,
        omega_c_list,
        nonmarkov_omega_c_list,
        population_omega_c_list,
        t_tilde,
        p_hot_grid,
        dump_trajectory: raw.bool("dump_trajectory")?,
        entries,
    })
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}
