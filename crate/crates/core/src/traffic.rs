//! Uplink workload: Poisson burst arrivals with geometric burst sizes.

use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric};

use crate::config::ScenarioConfig;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burst {
    pub ue_id: usize,
    pub arrival_time: f64,
    pub size_bytes: u64,
}

/// Exponential inter-arrival time with the configured mean.
pub fn next_interarrival_s<R: Rng + ?Sized>(rng: &mut R, cfg: &ScenarioConfig) -> f64 {
    let exp = Exp::new(1.0 / cfg.mean_interarrival_s).expect("positive mean inter-arrival");
    loop {
        let t = exp.sample(rng);
        // Exp can return exactly 0.0; arrivals per UE must be strictly increasing.
        if t > 0.0 {
            return t;
        }
    }
}

/// Geometric burst size on `{1, 2, ...}` with mean `mean_burst_bytes`.
pub fn next_burst_size_bytes<R: Rng + ?Sized>(rng: &mut R, cfg: &ScenarioConfig) -> u64 {
    let p = 1.0 / cfg.mean_burst_bytes;
    // rand_distr counts failures before the first success, so shift by one.
    Geometric::new(p).expect("p in (0, 1]").sample(rng) + 1
}

/// Source of per-UE bursts. The kernel owns one stream per UE and passes
/// it in; implementations must not keep hidden randomness.
pub trait TrafficModel: Send + Sync {
    fn next_interarrival_s(&self, ue_id: usize, rng: &mut SimRng, cfg: &ScenarioConfig) -> f64;
    fn next_burst_size_bytes(&self, ue_id: usize, rng: &mut SimRng, cfg: &ScenarioConfig) -> u64;

    /// Offset of the first arrival; defaults to one ordinary inter-arrival.
    fn first_arrival_s(&self, ue_id: usize, rng: &mut SimRng, cfg: &ScenarioConfig) -> f64 {
        self.next_interarrival_s(ue_id, rng, cfg)
    }
}

/// The stochastic model used by experiments.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonGeometric;

impl TrafficModel for PoissonGeometric {
    fn next_interarrival_s(&self, _ue: usize, rng: &mut SimRng, cfg: &ScenarioConfig) -> f64 {
        next_interarrival_s(rng, cfg)
    }

    fn next_burst_size_bytes(&self, _ue: usize, rng: &mut SimRng, cfg: &ScenarioConfig) -> u64 {
        next_burst_size_bytes(rng, cfg)
    }
}

/// Fixed period and size, with a per-UE phase for the first arrival.
/// Used for hand-checkable scenarios.
#[derive(Debug, Clone)]
pub struct Periodic {
    pub period_s: f64,
    pub size_bytes: u64,
    pub first_arrival_s: Vec<f64>,
}

impl TrafficModel for Periodic {
    fn next_interarrival_s(&self, _ue: usize, _rng: &mut SimRng, _cfg: &ScenarioConfig) -> f64 {
        self.period_s
    }

    fn next_burst_size_bytes(&self, _ue: usize, _rng: &mut SimRng, _cfg: &ScenarioConfig) -> u64 {
        self.size_bytes
    }

    fn first_arrival_s(&self, ue_id: usize, _rng: &mut SimRng, _cfg: &ScenarioConfig) -> f64 {
        self.first_arrival_s.get(ue_id).copied().unwrap_or(self.period_s)
    }
}

/// One mixture component of the smartphone uplink workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficScenario {
    pub name: &'static str,
    pub share: f64,
    pub interarrival_s: f64,
    pub size_bytes: f64,
}

impl TrafficScenario {
    pub fn rate_bps(&self) -> f64 {
        self.size_bytes / self.interarrival_s
    }
}

/// Background light/heavy, instant messaging, gaming and interactive
/// content pull, with their mixture weights.
pub const SMARTPHONE_MIX: [TrafficScenario; 5] = [
    TrafficScenario { name: "background-light", share: 0.60, interarrival_s: 10.0, size_bytes: 50.0 },
    TrafficScenario { name: "background-heavy", share: 0.20, interarrival_s: 0.5, size_bytes: 100.0 },
    TrafficScenario { name: "instant-messaging", share: 0.10, interarrival_s: 2.0, size_bytes: 100.0 },
    TrafficScenario { name: "gaming", share: 0.05, interarrival_s: 0.1, size_bytes: 25.0 },
    TrafficScenario { name: "interactive-pull", share: 0.05, interarrival_s: 0.01, size_bytes: 40.0 },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck {
    /// Weighted mean byte rate of the scenario mixture.
    pub mixture_rate_bps: f64,
    /// `mean_burst_bytes / mean_interarrival_s`.
    pub generator_rate_bps: f64,
}

impl RateCheck {
    pub fn ratio(&self) -> f64 {
        self.generator_rate_bps / self.mixture_rate_bps
    }
}

pub fn mixture_rate_bps(mix: &[TrafficScenario]) -> f64 {
    mix.iter().map(|s| s.share * s.rate_bps()).sum()
}

pub fn aggregate_rate_check(cfg: &ScenarioConfig, mix: &[TrafficScenario]) -> RateCheck {
    RateCheck {
        mixture_rate_bps: mixture_rate_bps(mix),
        generator_rate_bps: cfg.mean_burst_bytes / cfg.mean_interarrival_s,
    }
}

pub fn rate_check_text(check: &RateCheck, mix: &[TrafficScenario]) -> String {
    let mut out = String::from("scenario,share,interarrival_s,size_bytes,rate_bps\n");
    for s in mix {
        out.push_str(&format!(
            "{},{:.2},{:.3},{:.1},{:.3}\n",
            s.name,
            s.share,
            s.interarrival_s,
            s.size_bytes,
            s.rate_bps()
        ));
    }
    out.push_str(&format!("mixture_rate_bps = {:.3}\n", check.mixture_rate_bps));
    out.push_str(&format!("generator_rate_bps = {:.3}\n", check.generator_rate_bps));
    out.push_str(&format!("generator_to_mixture_ratio = {:.6}\n", check.ratio()));
    out
}
