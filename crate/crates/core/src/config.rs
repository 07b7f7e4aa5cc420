//! Scenario parameters and the flat `key = value` config format.
//!
//! Every key is spelled exactly like the corresponding [`ScenarioConfig`]
//! field. Ranges are written as two comma-separated numbers
//! (`speed_range_mps = 0.1, 3`). Lines starting with `#` are comments.
//! Unknown and duplicated keys are rejected.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Helper-selection rule run by the application server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionStrategy {
    /// Closest candidate wins.
    Proximity,
    /// Candidate with the most remaining energy wins.
    MaxBattery,
}

impl SelectionStrategy {
    pub fn name(self) -> &'static str {
        match self {
            SelectionStrategy::Proximity => "proximity",
            SelectionStrategy::MaxBattery => "max-battery",
        }
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proximity" => Ok(SelectionStrategy::Proximity),
            "max-battery" => Ok(SelectionStrategy::MaxBattery),
            other => Err(Error::InvalidValue {
                key: "strategy".into(),
                msg: format!("expected `proximity` or `max-battery`, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed interval used for the uniform mobility draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.min + self.max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub n_ues: usize,
    pub mean_interarrival_s: f64,
    pub mean_burst_bytes: f64,
    pub speed_range_mps: Range,
    pub pause_range_s: Range,
    pub walk_range_s: Range,
    /// Path-loss compensation factor of the open-loop power law.
    pub alpha: f64,
    /// Constant per-transmission energy (RRC tail and circuitry).
    pub e_const_j: f64,
    pub battery_capacity_j: f64,
    pub p0_dbm: f64,
    pub p_max_dbm: f64,
    pub modulation_bits: u32,
    pub code_rate: f64,
    pub fc_ghz: f64,
    pub h_enb_m: f64,
    pub h_ue_m: f64,
    pub n_walls: u32,
    /// Helpee trigger: battery fraction below this seeks help.
    pub gamma1: f64,
    /// Helper eligibility: battery fraction above this may help.
    pub gamma2: f64,
    pub coop_pl_threshold_db: f64,
    pub coop_radius_m: f64,
    pub cooperation_enabled: bool,
    pub n_rbs: u32,
    pub shadow_sigma_cellular_db: f64,
    pub shadow_sigma_d2d_db: f64,
    pub d2d_p_min_dbm: f64,
    pub seed: u64,
    /// Simulation horizon. `inf` runs until every UE is depleted.
    pub sim_end_s: f64,
    pub strategy: SelectionStrategy,
    /// Redraw shadowing for every burst; otherwise one draw per UE
    /// (cellular) and per association (D2D).
    pub shadowing_per_burst: bool,
    /// Whether the help trigger compares shadowed or deterministic PL.
    pub trigger_pl_uses_shadowing: bool,
    pub assoc_max_duration_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cell_radius_m: 500.0,
            n_ues: 500,
            mean_interarrival_s: 30.0,
            mean_burst_bytes: 7800.0,
            speed_range_mps: Range::new(0.1, 3.0),
            pause_range_s: Range::new(0.0, 300.0),
            walk_range_s: Range::new(30.0, 300.0),
            alpha: 0.8,
            e_const_j: 0.015,
            battery_capacity_j: 300.0,
            p0_dbm: -69.0,
            p_max_dbm: 24.0,
            modulation_bits: 4,
            code_rate: 1.0 / 3.0,
            fc_ghz: 2.0,
            h_enb_m: 25.0,
            h_ue_m: 1.5,
            n_walls: 1,
            gamma1: 0.3,
            gamma2: 0.3,
            coop_pl_threshold_db: 110.0,
            coop_radius_m: 30.0,
            cooperation_enabled: true,
            n_rbs: 1,
            shadow_sigma_cellular_db: 8.0,
            shadow_sigma_d2d_db: 4.0,
            d2d_p_min_dbm: -40.0,
            seed: 1,
            sim_end_s: 24.0 * 3600.0,
            strategy: SelectionStrategy::Proximity,
            shadowing_per_burst: true,
            trigger_pl_uses_shadowing: true,
            assoc_max_duration_s: f64::INFINITY,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let parsed = match v {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse::<f64>(),
    };
    match parsed {
        Ok(x) if !x.is_nan() => Ok(x),
        _ => Err(Error::InvalidValue {
            key: key.into(),
            msg: format!("expected a number, got `{v}`"),
        }),
    }
}

fn parse_int<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::InvalidValue {
        key: key.into(),
        msg: format!("expected a nonnegative integer, got `{}`", value.trim()),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(Error::InvalidValue {
            key: key.into(),
            msg: format!("expected a boolean, got `{other}`"),
        }),
    }
}

fn parse_range(key: &str, value: &str) -> Result<Range> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidValue {
            key: key.into(),
            msg: format!("expected `min, max`, got `{}`", value.trim()),
        });
    }
    Ok(Range::new(
        parse_f64(key, parts[0])?,
        parse_f64(key, parts[1])?,
    ))
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Shortest representation that parses back to the same bits.
        format!("{x:?}")
    }
}

impl ScenarioConfig {
    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "cell_radius_m" => self.cell_radius_m = parse_f64(key, value)?,
            "n_ues" => self.n_ues = parse_int(key, value)?,
            "mean_interarrival_s" => self.mean_interarrival_s = parse_f64(key, value)?,
            "mean_burst_bytes" => self.mean_burst_bytes = parse_f64(key, value)?,
            "speed_range_mps" => self.speed_range_mps = parse_range(key, value)?,
            "pause_range_s" => self.pause_range_s = parse_range(key, value)?,
            "walk_range_s" => self.walk_range_s = parse_range(key, value)?,
            "alpha" => self.alpha = parse_f64(key, value)?,
            "e_const_j" => self.e_const_j = parse_f64(key, value)?,
            "battery_capacity_j" => self.battery_capacity_j = parse_f64(key, value)?,
            "p0_dbm" => self.p0_dbm = parse_f64(key, value)?,
            "p_max_dbm" => self.p_max_dbm = parse_f64(key, value)?,
            "modulation_bits" => self.modulation_bits = parse_int(key, value)?,
            "code_rate" => self.code_rate = parse_f64(key, value)?,
            "fc_ghz" => self.fc_ghz = parse_f64(key, value)?,
            "h_enb_m" => self.h_enb_m = parse_f64(key, value)?,
            "h_ue_m" => self.h_ue_m = parse_f64(key, value)?,
            "n_walls" => self.n_walls = parse_int(key, value)?,
            "gamma1" => self.gamma1 = parse_f64(key, value)?,
            "gamma2" => self.gamma2 = parse_f64(key, value)?,
            "coop_pl_threshold_db" => self.coop_pl_threshold_db = parse_f64(key, value)?,
            "coop_radius_m" => self.coop_radius_m = parse_f64(key, value)?,
            "cooperation_enabled" => self.cooperation_enabled = parse_bool(key, value)?,
            "n_rbs" => self.n_rbs = parse_int(key, value)?,
            "shadow_sigma_cellular_db" => self.shadow_sigma_cellular_db = parse_f64(key, value)?,
            "shadow_sigma_d2d_db" => self.shadow_sigma_d2d_db = parse_f64(key, value)?,
            "d2d_p_min_dbm" => self.d2d_p_min_dbm = parse_f64(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "sim_end_s" => self.sim_end_s = parse_f64(key, value)?,
            "strategy" => self.strategy = value.parse()?,
            "shadowing_per_burst" => self.shadowing_per_burst = parse_bool(key, value)?,
            "trigger_pl_uses_shadowing" => {
                self.trigger_pl_uses_shadowing = parse_bool(key, value)?
            }
            "assoc_max_duration_s" => self.assoc_max_duration_s = parse_f64(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// All fields as `(key, value)` pairs in declaration order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let range = |r: &Range| format!("{}, {}", fmt_f64(r.min), fmt_f64(r.max));
        vec![
            ("cell_radius_m", fmt_f64(self.cell_radius_m)),
            ("n_ues", self.n_ues.to_string()),
            ("mean_interarrival_s", fmt_f64(self.mean_interarrival_s)),
            ("mean_burst_bytes", fmt_f64(self.mean_burst_bytes)),
            ("speed_range_mps", range(&self.speed_range_mps)),
            ("pause_range_s", range(&self.pause_range_s)),
            ("walk_range_s", range(&self.walk_range_s)),
            ("alpha", fmt_f64(self.alpha)),
            ("e_const_j", fmt_f64(self.e_const_j)),
            ("battery_capacity_j", fmt_f64(self.battery_capacity_j)),
            ("p0_dbm", fmt_f64(self.p0_dbm)),
            ("p_max_dbm", fmt_f64(self.p_max_dbm)),
            ("modulation_bits", self.modulation_bits.to_string()),
            ("code_rate", fmt_f64(self.code_rate)),
            ("fc_ghz", fmt_f64(self.fc_ghz)),
            ("h_enb_m", fmt_f64(self.h_enb_m)),
            ("h_ue_m", fmt_f64(self.h_ue_m)),
            ("n_walls", self.n_walls.to_string()),
            ("gamma1", fmt_f64(self.gamma1)),
            ("gamma2", fmt_f64(self.gamma2)),
            ("coop_pl_threshold_db", fmt_f64(self.coop_pl_threshold_db)),
            ("coop_radius_m", fmt_f64(self.coop_radius_m)),
            ("cooperation_enabled", self.cooperation_enabled.to_string()),
            ("n_rbs", self.n_rbs.to_string()),
            ("shadow_sigma_cellular_db", fmt_f64(self.shadow_sigma_cellular_db)),
            ("shadow_sigma_d2d_db", fmt_f64(self.shadow_sigma_d2d_db)),
            ("d2d_p_min_dbm", fmt_f64(self.d2d_p_min_dbm)),
            ("seed", self.seed.to_string()),
            ("sim_end_s", fmt_f64(self.sim_end_s)),
            ("strategy", self.strategy.to_string()),
            ("shadowing_per_burst", self.shadowing_per_burst.to_string()),
            ("trigger_pl_uses_shadowing", self.trigger_pl_uses_shadowing.to_string()),
            ("assoc_max_duration_s", fmt_f64(self.assoc_max_duration_s)),
        ]
    }

    /// Parses config text on top of the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Syntax {
                    line: idx + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Syntax {
                    line: idx + 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    // Negated comparisons are deliberate: they also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_ues == 0 {
            return fail("n_ues must be at least 1".into());
        }
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return fail(format!("cell_radius_m must be positive, got {}", self.cell_radius_m));
        }
        if !(self.battery_capacity_j > 0.0 && self.battery_capacity_j.is_finite()) {
            return fail("battery_capacity_j must be positive".into());
        }
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if !(g > 0.0 && g < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {g}"));
            }
        }
        if !(self.coop_radius_m > 0.0) {
            return fail("coop_radius_m must be positive".into());
        }
        if !(self.mean_interarrival_s > 0.0 && self.mean_interarrival_s.is_finite()) {
            return fail("mean_interarrival_s must be positive".into());
        }
        if !(self.mean_burst_bytes >= 1.0 && self.mean_burst_bytes.is_finite()) {
            return fail("mean_burst_bytes must be at least 1".into());
        }
        for (name, r) in [
            ("speed_range_mps", self.speed_range_mps),
            ("pause_range_s", self.pause_range_s),
            ("walk_range_s", self.walk_range_s),
        ] {
            if !(r.min >= 0.0 && r.min <= r.max && r.max.is_finite()) {
                return fail(format!("{name} must satisfy 0 <= min <= max < inf"));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.p_max_dbm < self.p0_dbm {
            return fail("p_max_dbm must be at least p0_dbm".into());
        }
        if self.n_rbs == 0 {
            return fail("n_rbs must be at least 1".into());
        }
        if self.modulation_bits == 0 || !(self.code_rate > 0.0 && self.code_rate <= 1.0) {
            return fail("modulation_bits and code_rate must give a positive rate".into());
        }
        if !(self.e_const_j >= 0.0 && self.e_const_j.is_finite()) {
            return fail("e_const_j must be nonnegative".into());
        }
        if !(self.fc_ghz > 0.0 && self.h_enb_m > 0.0 && self.h_ue_m > 0.0) {
            return fail("fc_ghz and antenna heights must be positive".into());
        }
        if self.n_walls == 0 {
            return fail("n_walls must be at least 1".into());
        }
        if !(self.shadow_sigma_cellular_db >= 0.0 && self.shadow_sigma_d2d_db >= 0.0) {
            return fail("shadowing sigmas must be nonnegative".into());
        }
        if !(self.sim_end_s >= 0.0) {
            return fail("sim_end_s must be nonnegative".into());
        }
        if !(self.assoc_max_duration_s > 0.0) {
            return fail("assoc_max_duration_s must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_parameter_table() {
        let c = ScenarioConfig::default();
        assert_eq!(c.cell_radius_m, 500.0);
        assert_eq!(c.n_ues, 500);
        assert_eq!(c.mean_interarrival_s, 30.0);
        assert_eq!(c.mean_burst_bytes, 7800.0);
        assert_eq!(c.speed_range_mps, Range::new(0.1, 3.0));
        assert_eq!(c.pause_range_s, Range::new(0.0, 300.0));
        assert_eq!(c.walk_range_s, Range::new(30.0, 300.0));
        assert_eq!(c.alpha, 0.8);
        assert_eq!(c.e_const_j, 0.015);
        assert_eq!(c.battery_capacity_j, 300.0);
        assert_eq!(c.p0_dbm, -69.0);
        assert_eq!(c.p_max_dbm, 24.0);
        assert_eq!(c.modulation_bits, 4);
        assert_eq!(c.code_rate, 1.0 / 3.0);
        assert_eq!(c.fc_ghz, 2.0);
        assert_eq!(c.h_enb_m, 25.0);
        assert_eq!(c.h_ue_m, 1.5);
        assert_eq!(c.n_walls, 1);
        assert_eq!((c.gamma1, c.gamma2), (0.3, 0.3));
        assert_eq!(c.coop_pl_threshold_db, 110.0);
        assert_eq!(c.coop_radius_m, 30.0);
        c.validate().unwrap();
    }

    #[test]
    fn text_round_trips() {
        let c = ScenarioConfig {
            seed: 99,
            sim_end_s: f64::INFINITY,
            strategy: SelectionStrategy::MaxBattery,
            speed_range_mps: Range::new(0.25, 2.5),
            ..ScenarioConfig::default()
        };
        let back = ScenarioConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parses_comments_and_ranges() {
        let c = ScenarioConfig::parse(
            "# scenario\n\nn_ues = 12\nwalk_range_s = 10, 20\ncooperation_enabled = off\n",
        )
        .unwrap();
        assert_eq!(c.n_ues, 12);
        assert_eq!(c.walk_range_s, Range::new(10.0, 20.0));
        assert!(!c.cooperation_enabled);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            ScenarioConfig::parse("n_uez = 3"),
            Err(Error::UnknownKey(k)) if k == "n_uez"
        ));
        assert!(matches!(
            ScenarioConfig::parse("n_ues = 3\nn_ues = 4"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            ScenarioConfig::parse("just words"),
            Err(Error::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(ScenarioConfig::parse("n_ues = 0").is_err());
        assert!(ScenarioConfig::parse("cell_radius_m = -1").is_err());
        assert!(ScenarioConfig::parse("gamma1 = 1.0").is_err());
        assert!(ScenarioConfig::parse("coop_radius_m = 0").is_err());
        assert!(ScenarioConfig::parse("alpha = abc").is_err());
        assert!(ScenarioConfig::parse("speed_range_mps = 3").is_err());
        assert!(ScenarioConfig::parse("strategy = random").is_err());
        assert!(ScenarioConfig::parse("e_const_j = NaN").is_err());
        assert!(ScenarioConfig::parse("shadow_sigma_d2d_db = NaN").is_err());
    }
}
