//! Battery Deposit Service: help trigger, helper discovery and selection,
//! association guards, and per-burst energy routing.
//!
//! Signaling (help request, grant, multicast request, discovery signal,
//! replies) is collapsed into instantaneous zero-energy decisions taken by
//! the centralized application server at the helpee's burst instants.

use crate::channel::{burst_cost, LinkSample, LinkType, PowerParams};
use crate::config::{ScenarioConfig, SelectionStrategy};
use crate::error::Result;
use crate::mobility::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Normal,
    Helpee,
    Helper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TeardownReason {
    OutOfRange,
    HelperLowBattery,
    HelperDepleted,
    HelpeeDepleted,
    MaxDuration,
    /// Still live when the simulation stopped.
    SimulationEnd,
}

impl TeardownReason {
    pub fn name(self) -> &'static str {
        match self {
            TeardownReason::OutOfRange => "out-of-range",
            TeardownReason::HelperLowBattery => "helper-low-battery",
            TeardownReason::HelperDepleted => "helper-depleted",
            TeardownReason::HelpeeDepleted => "helpee-depleted",
            TeardownReason::MaxDuration => "max-duration",
            TeardownReason::SimulationEnd => "simulation-end",
        }
    }
}

/// One helper/helpee pairing and its audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    pub helpee_id: usize,
    pub helper_id: usize,
    pub established_at: f64,
    /// Guard values observed when the pairing was created.
    pub distance_at_setup_m: f64,
    pub helpee_fraction_at_setup: f64,
    pub helper_fraction_at_setup: f64,
    pub ended_at: Option<f64>,
    pub reason: Option<TeardownReason>,
    pub bytes_relayed: u64,
    pub bursts_relayed: u64,
    /// D2D shadowing used when shadowing is fixed per association.
    pub d2d_shadow_db: f64,
}

impl Association {
    pub fn is_live(&self) -> bool {
        self.ended_at.is_none()
    }
}

/// What the application server knows about a UE when looking for helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeView {
    pub id: usize,
    pub alive: bool,
    pub associated: bool,
    pub battery_j: f64,
    pub battery_fraction: f64,
    pub position: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub ue_id: usize,
    pub distance_m: f64,
    pub battery_j: f64,
}

pub fn is_help_seeking(battery_fraction: f64, cfg: &ScenarioConfig) -> bool {
    battery_fraction < cfg.gamma1
}

/// Help trigger: low battery, poor cellular channel, not already paired.
pub fn needs_help(battery_fraction: f64, pl_cellular_db: f64, associated: bool, cfg: &ScenarioConfig) -> bool {
    !associated && is_help_seeking(battery_fraction, cfg) && pl_cellular_db >= cfg.coop_pl_threshold_db
}

/// UEs that would answer the helpee's discovery signal.
pub fn eligible_helpers(ues: &[UeView], helpee: &UeView, cfg: &ScenarioConfig) -> Vec<Candidate> {
    ues.iter()
        .filter(|u| {
            u.id != helpee.id
                && u.alive
                && !u.associated
                && u.battery_fraction > cfg.gamma2
                && !is_help_seeking(u.battery_fraction, cfg)
        })
        .filter_map(|u| {
            let d = u.position.distance(helpee.position);
            (d <= cfg.coop_radius_m).then_some(Candidate {
                ue_id: u.id,
                distance_m: d,
                battery_j: u.battery_j,
            })
        })
        .collect()
}

/// Helper-selection policy. Must be a deterministic function of the
/// candidate list. A bidding or virtual-currency scheme plugs in here.
pub trait HelperSelector {
    fn select(&self, candidates: &[Candidate]) -> Option<usize>;
}

impl HelperSelector for SelectionStrategy {
    fn select(&self, candidates: &[Candidate]) -> Option<usize> {
        match self {
            SelectionStrategy::Proximity => candidates
                .iter()
                .min_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.ue_id.cmp(&b.ue_id))),
            SelectionStrategy::MaxBattery => candidates
                .iter()
                .min_by(|a, b| b.battery_j.total_cmp(&a.battery_j).then(a.ue_id.cmp(&b.ue_id))),
        }
        .map(|c| c.ue_id)
    }
}

pub fn select_helper(candidates: &[Candidate], strategy: &dyn HelperSelector) -> Option<usize> {
    strategy.select(candidates)
}

/// State of both parties at a guard check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStatus {
    pub distance_m: f64,
    pub helper_alive: bool,
    pub helpee_alive: bool,
    pub helper_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssocDecision {
    Keep,
    Teardown(TeardownReason),
}

pub fn maintain_association(assoc: &Association, pair: &PairStatus, t: f64, cfg: &ScenarioConfig) -> AssocDecision {
    let reason = if !pair.helper_alive {
        Some(TeardownReason::HelperDepleted)
    } else if !pair.helpee_alive {
        Some(TeardownReason::HelpeeDepleted)
    } else if pair.helper_fraction <= cfg.gamma2 {
        Some(TeardownReason::HelperLowBattery)
    } else if pair.distance_m > cfg.coop_radius_m {
        Some(TeardownReason::OutOfRange)
    } else if t - assoc.established_at >= cfg.assoc_max_duration_s {
        Some(TeardownReason::MaxDuration)
    } else {
        None
    };
    reason.map_or(AssocDecision::Keep, AssocDecision::Teardown)
}

/// Links used to relay a helpee's burst.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayLinks {
    pub helper_id: usize,
    pub d2d: LinkSample,
    pub helper_cellular: LinkSample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Debit {
    pub ue_id: usize,
    pub link_type: LinkType,
    pub energy_j: f64,
    pub duration_s: f64,
    pub power_dbm: f64,
}

/// Energy charged for one burst. Unpaired: the sender pays its cellular
/// link. Paired: the sender pays the D2D hop and the helper pays its own
/// cellular link for the same byte count.
pub fn route_burst(
    sender_id: usize,
    bytes: u64,
    direct: &LinkSample,
    relay: Option<&RelayLinks>,
    params: &PowerParams,
) -> Result<Vec<Debit>> {
    let debit = |ue_id, link: &LinkSample| -> Result<Debit> {
        let c = burst_cost(link.total_db(), link.link_type, bytes, params)?;
        Ok(Debit {
            ue_id,
            link_type: link.link_type,
            energy_j: c.energy_j,
            duration_s: c.duration_s,
            power_dbm: c.power_dbm,
        })
    };
    match relay {
        None => Ok(vec![debit(sender_id, direct)?]),
        Some(r) => Ok(vec![debit(sender_id, &r.d2d)?, debit(r.helper_id, &r.helper_cellular)?]),
    }
}
