//! Path loss, shadowing, open-loop uplink power and per-burst energy.
//!
//! Cellular links use the WINNER II C2 (urban macro) NLOS law, D2D links the
//! WINNER II A1 (indoor) NLOS light-wall law. The UMTS pedestrian model is
//! only used by the link-budget comparison table.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Smallest distance at which the C2 law is evaluated by the simulator.
pub const C2_MIN_DISTANCE_M: f64 = 10.0;
/// Smallest distance at which the A1 law is evaluated by the simulator.
pub const A1_MIN_DISTANCE_M: f64 = 1.0;

/// Subcarriers per resource block.
const RB_SUBCARRIERS: f64 = 12.0;
/// OFDM symbols per 1 ms subframe (normal cyclic prefix).
const SYMBOLS_PER_SECOND: f64 = 14_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkType {
    Cellular,
    D2d,
}

/// Path loss split into its deterministic and shadowing parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub pl_det_db: f64,
    pub shadow_db: f64,
    pub link_type: LinkType,
}

impl LinkSample {
    pub fn total_db(&self) -> f64 {
        self.pl_det_db + self.shadow_db
    }
}

/// WINNER II C2 NLOS path loss in dB. `d_m` is the horizontal distance;
/// the law is specified for `d_m >= 10`.
pub fn pl_winner_c2(d_m: f64, h_enb_m: f64, _h_ue_m: f64, fc_ghz: f64) -> f64 {
    assert!(d_m > 0.0, "path loss distance must be positive, got {d_m}");
    (44.9 - 6.55 * h_enb_m.log10()) * d_m.log10()
        + 34.46
        + 5.83 * h_enb_m.log10()
        + 23.0 * (fc_ghz / 5.0).log10()
}

/// WINNER II A1 NLOS light-wall path loss in dB, for `d_m >= 1` through at
/// least one wall.
pub fn pl_winner_a1(d_m: f64, n_walls: u32, fc_ghz: f64) -> f64 {
    assert!(d_m > 0.0, "path loss distance must be positive, got {d_m}");
    assert!(n_walls >= 1, "A1 NLOS needs at least one wall");
    36.8 * d_m.log10() + 43.8 + 20.0 * (fc_ghz / 5.0).log10() + 5.0 * (n_walls as f64 - 1.0)
}

/// UMTS outdoor-to-indoor/pedestrian path loss in dB.
pub fn pl_umts_pedestrian(d_m: f64, fc_mhz: f64) -> f64 {
    assert!(d_m > 0.0, "path loss distance must be positive, got {d_m}");
    40.0 * (d_m / 1000.0).log10() + 30.0 * fc_mhz.log10() + 49.0
}

/// Deterministic path loss for a link of the given type, with the distance
/// clamped to the model's lower validity bound.
pub fn link_path_loss_db(link_type: LinkType, d_m: f64, cfg: &ScenarioConfig) -> f64 {
    match link_type {
        LinkType::Cellular => pl_winner_c2(
            d_m.max(C2_MIN_DISTANCE_M),
            cfg.h_enb_m,
            cfg.h_ue_m,
            cfg.fc_ghz,
        ),
        LinkType::D2d => pl_winner_a1(d_m.max(A1_MIN_DISTANCE_M), cfg.n_walls, cfg.fc_ghz),
    }
}

pub fn shadow_sigma_db(link_type: LinkType, cfg: &ScenarioConfig) -> f64 {
    match link_type {
        LinkType::Cellular => cfg.shadow_sigma_cellular_db,
        LinkType::D2d => cfg.shadow_sigma_d2d_db,
    }
}

/// Zero-mean normal shadowing in dB. Always consumes one normal draw, even
/// for `sigma_db == 0`, so stream positions do not depend on sigma.
pub fn shadow_sample<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    sigma_db * z
}

/// Open-loop power control parameters (no closed-loop offsets).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    pub p0_dbm: f64,
    pub alpha: f64,
    pub p_max_dbm: f64,
    pub n_rbs: u32,
    pub modulation_bits: u32,
    pub code_rate: f64,
    pub e_const_j: f64,
    pub d2d_p_min_dbm: f64,
}

impl PowerParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        PowerParams {
            p0_dbm: cfg.p0_dbm,
            alpha: cfg.alpha,
            p_max_dbm: cfg.p_max_dbm,
            n_rbs: cfg.n_rbs,
            modulation_bits: cfg.modulation_bits,
            code_rate: cfg.code_rate,
            e_const_j: cfg.e_const_j,
            d2d_p_min_dbm: cfg.d2d_p_min_dbm,
        }
    }

    /// Payload rate of one resource block in bit/s.
    pub fn rb_rate_bps(&self) -> f64 {
        RB_SUBCARRIERS * SYMBOLS_PER_SECOND * self.modulation_bits as f64 * self.code_rate
    }
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams::from_config(&ScenarioConfig::default())
    }
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// `min(P0 + alpha * PL + 10 log10 M, Pmax)`, floored for D2D links.
pub fn uplink_tx_power_dbm(pl_total_db: f64, link_type: LinkType, params: &PowerParams) -> f64 {
    let open_loop =
        params.p0_dbm + params.alpha * pl_total_db + 10.0 * (params.n_rbs as f64).log10();
    let capped = open_loop.min(params.p_max_dbm);
    match link_type {
        LinkType::Cellular => capped,
        LinkType::D2d => capped.max(params.d2d_p_min_dbm),
    }
}

pub fn burst_duration_s(bytes: u64, params: &PowerParams) -> Result<f64> {
    if bytes == 0 {
        return Err(Error::InvalidArgument("burst size must be at least 1 byte".into()));
    }
    Ok(8.0 * bytes as f64 / (params.n_rbs as f64 * params.rb_rate_bps()))
}

/// Transmit power, airtime and energy of one burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstCost {
    pub power_dbm: f64,
    pub duration_s: f64,
    pub energy_j: f64,
}

pub fn burst_cost(
    pl_total_db: f64,
    link_type: LinkType,
    bytes: u64,
    params: &PowerParams,
) -> Result<BurstCost> {
    let duration_s = burst_duration_s(bytes, params)?;
    let power_dbm = uplink_tx_power_dbm(pl_total_db, link_type, params);
    let energy_j = dbm_to_watts(power_dbm) * duration_s + params.e_const_j;
    Ok(BurstCost {
        power_dbm,
        duration_s,
        energy_j,
    })
}

pub fn burst_energy_j(
    pl_total_db: f64,
    link_type: LinkType,
    bytes: u64,
    params: &PowerParams,
) -> Result<f64> {
    burst_cost(pl_total_db, link_type, bytes, params).map(|c| c.energy_j)
}

/// Inputs of the cellular vs. D2D link-budget comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    pub cellular_distance_m: f64,
    pub d2d_distance_m: f64,
    pub fc_ghz: f64,
    pub h_enb_m: f64,
    pub h_ue_m: f64,
    pub n_walls: u32,
    pub enb_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub enb_noise_figure_db: f64,
    pub ue_noise_figure_db: f64,
}

impl LinkBudgetParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        LinkBudgetParams {
            fc_ghz: cfg.fc_ghz,
            h_enb_m: cfg.h_enb_m,
            h_ue_m: cfg.h_ue_m,
            n_walls: cfg.n_walls,
            ..Self::default()
        }
    }
}

impl Default for LinkBudgetParams {
    fn default() -> Self {
        LinkBudgetParams {
            cellular_distance_m: 300.0,
            d2d_distance_m: 10.0,
            fc_ghz: 2.0,
            h_enb_m: 25.0,
            h_ue_m: 1.5,
            n_walls: 1,
            enb_gain_dbi: 14.0,
            ue_gain_dbi: 0.0,
            enb_noise_figure_db: 5.0,
            ue_noise_figure_db: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudgetRow {
    pub model: &'static str,
    pub cellular_db: f64,
    pub d2d_db: f64,
    pub pl_diff_db: f64,
    pub tx_diff_db: f64,
}

/// Path loss of a cellular and a D2D link under both channel models, and
/// the transmit power gap needed for equal receiver SNR.
pub fn link_budget_report(p: &LinkBudgetParams) -> Vec<LinkBudgetRow> {
    // The eNodeB receiver is better by its extra antenna gain and its lower
    // noise figure; the cellular transmitter needs that much less power.
    let rx_advantage_db =
        (p.enb_gain_dbi - p.ue_gain_dbi) + (p.ue_noise_figure_db - p.enb_noise_figure_db);
    let row = |model, cellular_db: f64, d2d_db: f64| {
        let pl_diff_db = cellular_db - d2d_db;
        LinkBudgetRow {
            model,
            cellular_db,
            d2d_db,
            pl_diff_db,
            tx_diff_db: pl_diff_db - rx_advantage_db,
        }
    };
    let fc_mhz = p.fc_ghz * 1000.0;
    vec![
        row(
            "UMTS",
            pl_umts_pedestrian(p.cellular_distance_m, fc_mhz),
            pl_umts_pedestrian(p.d2d_distance_m, fc_mhz),
        ),
        row(
            "WINNER II",
            pl_winner_c2(p.cellular_distance_m, p.h_enb_m, p.h_ue_m, p.fc_ghz),
            pl_winner_a1(p.d2d_distance_m, p.n_walls, p.fc_ghz),
        ),
    ]
}

pub fn link_budget_csv(rows: &[LinkBudgetRow]) -> String {
    let mut out = String::from("channel_model,cellular_db,d2d_db,pl_diff_db,tx_power_diff_db\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.1},{:.1},{:.1},{:.1}\n",
            r.model, r.cellular_db, r.d2d_db, r.pl_diff_db, r.tx_diff_db
        ));
    }
    out
}
