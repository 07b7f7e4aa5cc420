//! Event loop, scenario initialization and per-UE state.

mod queue;

pub use queue::{Event, EventKind, EventQueue};

use std::sync::Arc;

use rand::Rng;

use crate::channel::{link_path_loss_db, shadow_sample, shadow_sigma_db, LinkSample, LinkType, PowerParams};
use crate::config::ScenarioConfig;
use crate::energy::Energy;
use crate::error::Result;
use crate::mobility::{first_segment, next_segment, position_at, uniform_in_disk, Point, Segment};
use crate::protocol::{
    eligible_helpers, maintain_association, needs_help, route_burst, select_helper, AssocDecision, Association,
    PairStatus, RelayLinks, Role, TeardownReason, UeView,
};
use crate::rng::{substream, Purpose, UeStreams};
use crate::traffic::{PoissonGeometric, TrafficModel};

#[derive(Debug, Clone)]
pub struct UeState {
    pub id: usize,
    pub segment: Segment,
    pub battery: Energy,
    pub capacity: Energy,
    pub initial: Energy,
    pub role: Role,
    /// Index into the association table while paired.
    pub assoc: Option<usize>,
    pub depleted_at: Option<f64>,
    pub streams: UeStreams,
    /// Cellular shadowing when it is fixed per UE.
    pub cellular_shadow_db: f64,
    pub debited: Energy,
    pub bytes_sent_direct: u64,
    pub bytes_sent_d2d: u64,
    pub bytes_relayed_for_others: u64,
    pub bursts: u64,
    /// Whether this UE's segments come from the mobility model.
    pub mobile: bool,
}

impl UeState {
    pub fn alive(&self) -> bool {
        self.depleted_at.is_none()
    }

    pub fn battery_fraction(&self) -> f64 {
        self.battery.ratio(self.capacity)
    }
}

/// Initial placement of one UE for hand-built scenarios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeSetup {
    pub position: Point,
    pub battery_j: f64,
    /// Static UEs never move; otherwise the mobility model drives them.
    pub mobile: bool,
}

/// Per-UE outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageRecord {
    pub ue_id: usize,
    pub initial_j: f64,
    pub depleted_at: Option<f64>,
    pub remaining_j: f64,
    pub debited_j: f64,
    pub bytes_sent_direct: u64,
    pub bytes_sent_d2d: u64,
    pub bytes_relayed_for_others: u64,
    /// `(time, battery_j)` at each requested snapshot time.
    pub snapshots: Vec<(f64, f64)>,
}

impl UsageRecord {
    pub fn survived(&self, t: f64) -> bool {
        self.depleted_at.is_none_or(|d| d >= t)
    }

    pub fn battery_at(&self, t: f64) -> Option<f64> {
        self.snapshots.iter().find(|(s, _)| *s == t).map(|&(_, b)| b)
    }
}

/// Exact per-UE bookkeeping, for invariant checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyLedger {
    pub initial: Energy,
    pub remaining: Energy,
    pub debited: Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<UsageRecord>,
    pub associations: Vec<Association>,
    pub ledgers: Vec<EnergyLedger>,
    /// Battery after every debit, per UE, when tracing was enabled.
    pub battery_traces: Option<Vec<Vec<(f64, Energy)>>>,
    pub events_processed: u64,
    pub end_time: f64,
}

pub struct SimState {
    pub cfg: ScenarioConfig,
    pub params: PowerParams,
    pub queue: EventQueue,
    pub ues: Vec<UeState>,
    pub associations: Vec<Association>,
    traffic: Arc<dyn TrafficModel>,
    snapshot_times: Vec<f64>,
    snapshots: Vec<Vec<Energy>>,
    traces: Option<Vec<Vec<(f64, Energy)>>>,
    alive: usize,
    events_processed: u64,
    last_event_time: f64,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimState")
            .field("clock", &self.queue.clock())
            .field("ues", &self.ues.len())
            .field("alive", &self.alive)
            .field("associations", &self.associations.len())
            .finish_non_exhaustive()
    }
}

/// Random initial placement: uniform over the disk, battery uniform on
/// (0, 1] of capacity.
pub fn init_scenario(cfg: &ScenarioConfig) -> Result<SimState> {
    cfg.validate()?;
    let setups: Vec<UeSetup> = (0..cfg.n_ues)
        .map(|id| {
            let mut rng = substream(cfg.seed, id, Purpose::Init);
            let position = uniform_in_disk(&mut rng, cfg.cell_radius_m);
            let u: f64 = 1.0 - rng.random::<f64>();
            UeSetup {
                position,
                battery_j: u * cfg.battery_capacity_j,
                mobile: true,
            }
        })
        .collect();
    SimState::with_setup(cfg, &setups, Arc::new(PoissonGeometric))
}

impl SimState {
    /// Builds a scenario from explicit placements and a traffic model.
    /// `cfg.n_ues` is ignored in favour of `setups.len()`.
    pub fn with_setup(cfg: &ScenarioConfig, setups: &[UeSetup], traffic: Arc<dyn TrafficModel>) -> Result<Self> {
        let cfg = ScenarioConfig { n_ues: setups.len().max(1), ..cfg.clone() };
        cfg.validate()?;
        let params = PowerParams::from_config(&cfg);
        let capacity = Energy::from_joules(cfg.battery_capacity_j);
        let mut queue = EventQueue::new();
        let mut ues = Vec::with_capacity(setups.len());
        for (id, s) in setups.iter().enumerate() {
            assert!(
                s.position.norm() <= cfg.cell_radius_m * (1.0 + 1e-9),
                "UE {id} placed outside the cell"
            );
            let battery = Energy::from_joules(s.battery_j.clamp(0.0, cfg.battery_capacity_j));
            let mut streams = UeStreams::new(cfg.seed, id);
            let segment = if s.mobile {
                first_segment(s.position, 0.0, &mut streams.mobility, &cfg)
            } else {
                Segment::stationary(s.position, 0.0)
            };
            let cellular_shadow_db = if cfg.shadowing_per_burst {
                0.0
            } else {
                shadow_sample(&mut streams.shadowing, cfg.shadow_sigma_cellular_db)
            };
            let depleted_at = battery.is_zero().then_some(0.0);
            if depleted_at.is_none() {
                let first = traffic.first_arrival_s(id, &mut streams.traffic, &cfg);
                queue.schedule(first, EventKind::BurstArrival(id));
                if segment.end_time().is_finite() {
                    queue.schedule(segment.end_time(), EventKind::SegmentEnd(id));
                }
            }
            ues.push(UeState {
                id,
                segment,
                battery,
                capacity,
                initial: battery,
                role: Role::Normal,
                assoc: None,
                depleted_at,
                streams,
                cellular_shadow_db,
                debited: Energy::ZERO,
                bytes_sent_direct: 0,
                bytes_sent_d2d: 0,
                bytes_relayed_for_others: 0,
                bursts: 0,
                mobile: s.mobile,
            });
        }
        if cfg.sim_end_s.is_finite() {
            queue.schedule(cfg.sim_end_s, EventKind::SimulationEnd);
        }
        let alive = ues.iter().filter(|u| u.alive()).count();
        Ok(SimState {
            cfg,
            params,
            queue,
            ues,
            associations: Vec::new(),
            traffic,
            snapshot_times: Vec::new(),
            snapshots: Vec::new(),
            traces: None,
            alive,
            events_processed: 0,
            last_event_time: 0.0,
        })
    }

    /// Records every UE's battery at these instants (state after all events
    /// strictly before each instant).
    pub fn with_snapshots(mut self, times: &[f64]) -> Self {
        let mut t: Vec<f64> = times.to_vec();
        t.sort_by(f64::total_cmp);
        t.dedup();
        self.snapshot_times = t;
        self
    }

    /// Keeps the battery level after every debit.
    pub fn with_battery_traces(mut self) -> Self {
        self.traces = Some(self.ues.iter().map(|u| vec![(0.0, u.battery)]).collect());
        self
    }

    pub fn clock(&self) -> f64 {
        self.queue.clock()
    }

    pub fn position_of(&self, id: usize, t: f64) -> Point {
        position_at(&self.ues[id].segment, t, self.cfg.cell_radius_m)
    }

    fn take_snapshots_before(&mut self, t: f64) {
        while self.snapshots.len() < self.snapshot_times.len() && self.snapshot_times[self.snapshots.len()] <= t {
            self.snapshots.push(self.ues.iter().map(|u| u.battery).collect());
        }
    }

    /// Processes events until the horizon or until every UE is depleted.
    pub fn run(mut self) -> RunOutput {
        while self.alive > 0 {
            let Some(ev) = self.queue.pop() else { break };
            assert!(ev.time >= self.last_event_time, "out-of-order event {ev:?}");
            self.last_event_time = ev.time;
            self.take_snapshots_before(ev.time);
            self.events_processed += 1;
            match ev.kind {
                EventKind::SimulationEnd => break,
                EventKind::BurstArrival(id) => {
                    if self.ues[id].alive() {
                        self.on_burst(id, ev.time);
                    }
                }
                EventKind::SegmentEnd(id) => {
                    if self.ues[id].alive() {
                        self.on_segment_end(id);
                    }
                }
            }
        }
        self.finish()
    }

    fn on_segment_end(&mut self, id: usize) {
        let ue = &mut self.ues[id];
        ue.segment = next_segment(&ue.segment, &mut ue.streams.mobility, &self.cfg);
        let end = ue.segment.end_time();
        if end.is_finite() {
            self.queue.schedule(end, EventKind::SegmentEnd(id));
        }
    }

    fn cellular_link(&mut self, id: usize, t: f64) -> LinkSample {
        let pos = self.position_of(id, t);
        let pl_det_db = link_path_loss_db(LinkType::Cellular, pos.norm(), &self.cfg);
        let ue = &mut self.ues[id];
        let shadow_db = if self.cfg.shadowing_per_burst {
            shadow_sample(&mut ue.streams.shadowing, shadow_sigma_db(LinkType::Cellular, &self.cfg))
        } else {
            ue.cellular_shadow_db
        };
        LinkSample {
            pl_det_db,
            shadow_db,
            link_type: LinkType::Cellular,
        }
    }

    fn views(&self, t: f64) -> Vec<UeView> {
        self.ues
            .iter()
            .map(|u| UeView {
                id: u.id,
                alive: u.alive(),
                associated: u.assoc.is_some(),
                battery_j: u.battery.joules(),
                battery_fraction: u.battery_fraction(),
                position: if u.alive() { position_at(&u.segment, t, self.cfg.cell_radius_m) } else { u.segment.start_pos },
            })
            .collect()
    }

    fn teardown(&mut self, idx: usize, t: f64, reason: TeardownReason) {
        let a = &mut self.associations[idx];
        debug_assert!(a.is_live());
        a.ended_at = Some(t);
        a.reason = Some(reason);
        let (helpee, helper) = (a.helpee_id, a.helper_id);
        for id in [helpee, helper] {
            self.ues[id].assoc = None;
            self.ues[id].role = Role::Normal;
        }
    }

    fn establish(&mut self, helpee: usize, helper: usize, distance_m: f64, t: f64) -> usize {
        let (he, hr) = (&self.ues[helpee], &self.ues[helper]);
        assert!(
            he.role == Role::Normal && hr.role == Role::Normal && he.assoc.is_none() && hr.assoc.is_none(),
            "association {helpee}->{helper} would break role exclusivity"
        );
        let helpee_fraction = he.battery_fraction();
        let helper_fraction = hr.battery_fraction();
        assert!(
            helpee != helper
                && distance_m <= self.cfg.coop_radius_m
                && helper_fraction > self.cfg.gamma2
                && helpee_fraction < self.cfg.gamma1,
            "association {helpee}->{helper} violates establishment guards"
        );
        let d2d_shadow_db = if self.cfg.shadowing_per_burst {
            0.0
        } else {
            shadow_sample(&mut self.ues[helpee].streams.shadowing, shadow_sigma_db(LinkType::D2d, &self.cfg))
        };
        let idx = self.associations.len();
        self.associations.push(Association {
            helpee_id: helpee,
            helper_id: helper,
            established_at: t,
            distance_at_setup_m: distance_m,
            helpee_fraction_at_setup: helpee_fraction,
            helper_fraction_at_setup: helper_fraction,
            ended_at: None,
            reason: None,
            bytes_relayed: 0,
            bursts_relayed: 0,
            d2d_shadow_db,
        });
        self.ues[helpee].assoc = Some(idx);
        self.ues[helpee].role = Role::Helpee;
        self.ues[helper].assoc = Some(idx);
        self.ues[helper].role = Role::Helper;
        idx
    }

    /// Live association in which `id` is the helpee.
    fn helpee_assoc(&self, id: usize) -> Option<usize> {
        let idx = self.ues[id].assoc?;
        (self.associations[idx].helpee_id == id).then_some(idx)
    }

    fn on_burst(&mut self, id: usize, t: f64) {
        let bytes = {
            let ue = &mut self.ues[id];
            self.traffic.next_burst_size_bytes(id, &mut ue.streams.traffic, &self.cfg)
        };
        let direct = self.cellular_link(id, t);

        let mut relay_assoc = None;
        if self.cfg.cooperation_enabled {
            if let Some(idx) = self.helpee_assoc(id) {
                let helper = self.associations[idx].helper_id;
                let pair = PairStatus {
                    distance_m: self.position_of(id, t).distance(self.position_of(helper, t)),
                    helper_alive: self.ues[helper].alive(),
                    helpee_alive: true,
                    helper_fraction: self.ues[helper].battery_fraction(),
                };
                match maintain_association(&self.associations[idx], &pair, t, &self.cfg) {
                    AssocDecision::Keep => relay_assoc = Some(idx),
                    AssocDecision::Teardown(reason) => self.teardown(idx, t, reason),
                }
            }
            let trigger_pl = if self.cfg.trigger_pl_uses_shadowing { direct.total_db() } else { direct.pl_det_db };
            let ue = &self.ues[id];
            if relay_assoc.is_none() && needs_help(ue.battery_fraction(), trigger_pl, ue.assoc.is_some(), &self.cfg) {
                let views = self.views(t);
                let candidates = eligible_helpers(&views, &views[id], &self.cfg);
                if let Some(helper) = select_helper(&candidates, &self.cfg.strategy) {
                    let d = candidates.iter().find(|c| c.ue_id == helper).map(|c| c.distance_m).unwrap();
                    relay_assoc = Some(self.establish(id, helper, d, t));
                }
            }
        }

        let relay = relay_assoc.map(|idx| {
            let helper_id = self.associations[idx].helper_id;
            let d = self.position_of(id, t).distance(self.position_of(helper_id, t));
            let d2d_shadow = if self.cfg.shadowing_per_burst {
                shadow_sample(&mut self.ues[id].streams.shadowing, shadow_sigma_db(LinkType::D2d, &self.cfg))
            } else {
                self.associations[idx].d2d_shadow_db
            };
            let d2d = LinkSample {
                pl_det_db: link_path_loss_db(LinkType::D2d, d, &self.cfg),
                shadow_db: d2d_shadow,
                link_type: LinkType::D2d,
            };
            let helper_cellular = self.cellular_link(helper_id, t);
            RelayLinks { helper_id, d2d, helper_cellular }
        });

        let debits = route_burst(id, bytes, &direct, relay.as_ref(), &self.params)
            .expect("burst sizes are at least one byte");

        match (&relay, relay_assoc) {
            (Some(r), Some(idx)) => {
                self.ues[id].bytes_sent_d2d += bytes;
                self.ues[r.helper_id].bytes_relayed_for_others += bytes;
                let a = &mut self.associations[idx];
                a.bytes_relayed += bytes;
                a.bursts_relayed += 1;
            }
            _ => self.ues[id].bytes_sent_direct += bytes,
        }
        self.ues[id].bursts += 1;

        for d in &debits {
            self.debit(d.ue_id, d.energy_j, t, d.duration_s);
        }

        if self.ues[id].alive() {
            let next = {
                let ue = &mut self.ues[id];
                t + self.traffic.next_interarrival_s(id, &mut ue.streams.traffic, &self.cfg)
            };
            self.queue.schedule(next, EventKind::BurstArrival(id));
        }
    }

    /// Charges `energy_j` for a transmission that starts at `t` and lasts
    /// `duration_s`. A UE that cannot cover it is drained and marked
    /// depleted at the proportional instant inside the transmission.
    fn debit(&mut self, id: usize, energy_j: f64, t: f64, duration_s: f64) {
        let ue = &mut self.ues[id];
        assert!(ue.alive(), "debit of {energy_j} J to depleted UE {id} at {t}");
        let cost = Energy::from_joules(energy_j);
        match ue.battery.checked_sub(cost) {
            Some(left) if !left.is_zero() => {
                ue.battery = left;
                ue.debited += cost;
            }
            _ => {
                let frac = if cost.is_zero() { 1.0 } else { ue.battery.ratio(cost) };
                ue.debited += ue.battery;
                ue.battery = Energy::ZERO;
                ue.depleted_at = Some(t + duration_s * frac);
                self.alive -= 1;
            }
        }
        let battery = ue.battery;
        if let Some(tr) = self.traces.as_mut() {
            tr[id].push((t, battery));
        }
        if !self.ues[id].alive() {
            if let Some(idx) = self.ues[id].assoc {
                let reason = if self.associations[idx].helper_id == id {
                    TeardownReason::HelperDepleted
                } else {
                    TeardownReason::HelpeeDepleted
                };
                self.teardown(idx, t, reason);
            }
        }
    }

    fn finish(mut self) -> RunOutput {
        let end_time = self.queue.clock();
        self.take_snapshots_before(f64::INFINITY);
        for idx in 0..self.associations.len() {
            if self.associations[idx].is_live() {
                self.teardown(idx, end_time, TeardownReason::SimulationEnd);
            }
        }
        let records = self
            .ues
            .iter()
            .map(|u| UsageRecord {
                ue_id: u.id,
                initial_j: u.initial.joules(),
                depleted_at: u.depleted_at,
                remaining_j: u.battery.joules(),
                debited_j: u.debited.joules(),
                bytes_sent_direct: u.bytes_sent_direct,
                bytes_sent_d2d: u.bytes_sent_d2d,
                bytes_relayed_for_others: u.bytes_relayed_for_others,
                snapshots: self
                    .snapshot_times
                    .iter()
                    .zip(&self.snapshots)
                    .map(|(&t, snap)| (t, snap[u.id].joules()))
                    .collect(),
            })
            .collect();
        let ledgers = self
            .ues
            .iter()
            .map(|u| EnergyLedger {
                initial: u.initial,
                remaining: u.battery,
                debited: u.debited,
            })
            .collect();
        RunOutput {
            records,
            associations: self.associations,
            ledgers,
            battery_traces: self.traces,
            events_processed: self.events_processed,
            end_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::Periodic;

    fn quiet_cfg() -> ScenarioConfig {
        ScenarioConfig {
            shadow_sigma_cellular_db: 0.0,
            shadow_sigma_d2d_db: 0.0,
            sim_end_s: f64::INFINITY,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn init_places_all_ues_inside() {
        let state = init_scenario(&ScenarioConfig::default()).unwrap();
        assert_eq!(state.ues.len(), 500);
        for u in &state.ues {
            assert!(u.segment.start_pos.norm() <= 500.0);
            assert!(u.battery > Energy::ZERO && u.battery <= u.capacity);
        }
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = ScenarioConfig { n_ues: 1, seed: 42, ..Default::default() };
        let a = init_scenario(&cfg).unwrap();
        let b = init_scenario(&cfg).unwrap();
        assert_eq!(a.ues[0].segment, b.ues[0].segment);
        assert_eq!(a.ues[0].battery, b.ues[0].battery);
        assert_eq!(a.queue.peek(), b.queue.peek());
    }

    #[test]
    fn init_rejects_bad_config() {
        assert!(init_scenario(&ScenarioConfig { n_ues: 0, ..Default::default() }).is_err());
        assert!(init_scenario(&ScenarioConfig { cell_radius_m: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn radial_mean_of_initial_positions() {
        let mut sum = 0.0;
        let n = 1_000_000;
        for id in 0..n {
            let mut rng = substream(3, id, Purpose::Init);
            sum += uniform_in_disk(&mut rng, 500.0).norm();
        }
        let mean = sum / n as f64;
        assert!((mean / (2.0 * 500.0 / 3.0) - 1.0).abs() < 0.005, "{mean}");
    }

    #[test]
    fn adding_ues_keeps_existing_draws() {
        let small = init_scenario(&ScenarioConfig { n_ues: 5, ..Default::default() }).unwrap();
        let big = init_scenario(&ScenarioConfig { n_ues: 9, ..Default::default() }).unwrap();
        for i in 0..5 {
            assert_eq!(small.ues[i].segment, big.ues[i].segment);
            assert_eq!(small.ues[i].battery, big.ues[i].battery);
        }
    }

    #[test]
    fn empty_batteries_deplete_at_zero() {
        let setups = vec![UeSetup { position: Point::new(100.0, 0.0), battery_j: 0.0, mobile: true }; 4];
        let out = SimState::with_setup(&ScenarioConfig::default(), &setups, Arc::new(PoissonGeometric))
            .unwrap()
            .run();
        assert!(out.records.iter().all(|r| r.depleted_at == Some(0.0) && r.remaining_j == 0.0));
    }

    #[test]
    fn single_ue_constant_cost_lifetime() {
        let cfg = ScenarioConfig { cooperation_enabled: false, ..quiet_cfg() };
        let pos = Point::new(300.0, 0.0);
        let setups = [UeSetup { position: pos, battery_j: 50.0, mobile: false }];
        let traffic = Periodic { period_s: 30.0, size_bytes: 7800, first_arrival_s: vec![30.0] };
        let out = SimState::with_setup(&cfg, &setups, Arc::new(traffic)).unwrap().run();
        let pl = link_path_loss_db(LinkType::Cellular, 300.0, &cfg);
        let e = crate::channel::burst_energy_j(pl, LinkType::Cellular, 7800, &PowerParams::from_config(&cfg)).unwrap();
        let expected = 50.0 / e * 30.0;
        let got = out.records[0].depleted_at.unwrap();
        assert!((got - expected).abs() <= 30.0, "{got} vs {expected}");
    }

    #[test]
    fn horizon_stops_the_run() {
        let cfg = ScenarioConfig { n_ues: 20, sim_end_s: 3600.0, ..Default::default() };
        let out = init_scenario(&cfg).unwrap().run();
        assert_eq!(out.end_time, 3600.0);
        assert_eq!(out.records.len(), 20);
    }

    #[test]
    fn same_seed_same_records() {
        let cfg = ScenarioConfig { n_ues: 60, sim_end_s: 6.0 * 3600.0, ..Default::default() };
        let a = init_scenario(&cfg).unwrap().run();
        let b = init_scenario(&cfg).unwrap().run();
        assert_eq!(a, b);
    }

    #[test]
    fn bookkeeping_identity_and_monotone_battery() {
        let cfg = ScenarioConfig { n_ues: 80, sim_end_s: 12.0 * 3600.0, ..Default::default() };
        let out = init_scenario(&cfg).unwrap().with_battery_traces().run();
        for l in &out.ledgers {
            assert_eq!(l.initial.picojoules() - l.remaining.picojoules(), l.debited.picojoules());
        }
        for tr in out.battery_traces.as_ref().unwrap() {
            assert!(tr.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0));
        }
    }
}
