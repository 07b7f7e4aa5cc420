//! Usage-time statistics, probability of outage and valueless battery.

use crate::error::{Error, Result};
use crate::kernel::UsageRecord;

fn nonempty(records: &[UsageRecord]) -> Result<()> {
    if records.is_empty() {
        Err(Error::InvalidArgument("no usage records".into()))
    } else {
        Ok(())
    }
}

/// Fraction of UEs whose battery ran out before `target_s`.
pub fn outage_probability(records: &[UsageRecord], target_s: f64) -> Result<f64> {
    nonempty(records)?;
    let out = records.iter().filter(|r| r.depleted_at.is_some_and(|d| d < target_s)).count();
    Ok(out as f64 / records.len() as f64)
}

pub fn survivor_fraction(records: &[UsageRecord], target_s: f64) -> Result<f64> {
    nonempty(records)?;
    let alive = records.iter().filter(|r| r.survived(target_s)).count();
    Ok(alive as f64 / records.len() as f64)
}

/// Mean battery left at `target_s` by the UEs that made it there, as a
/// fraction of capacity. `None` when nobody survived. The records must
/// carry a snapshot at `target_s`.
pub fn valueless_battery(records: &[UsageRecord], target_s: f64, capacity_j: f64) -> Result<Option<f64>> {
    nonempty(records)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in records.iter().filter(|r| r.survived(target_s)) {
        let b = r.battery_at(target_s).ok_or_else(|| {
            Error::InvalidArgument(format!("record {} has no battery snapshot at {target_s} s", r.ue_id))
        })?;
        sum += b;
        n += 1;
    }
    Ok((n > 0).then(|| sum / n as f64 / capacity_j))
}

/// Depletion-time summary. Survivors are right-censored and only counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeSummary {
    pub depleted: usize,
    pub censored: usize,
    pub mean_s: Option<f64>,
}

pub fn lifetime_summary(records: &[UsageRecord]) -> LifetimeSummary {
    let times: Vec<f64> = records.iter().filter_map(|r| r.depleted_at).collect();
    LifetimeSummary {
        depleted: times.len(),
        censored: records.len() - times.len(),
        mean_s: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsageDistribution {
    pub bin_width_s: f64,
    /// Depletions per bin; bin `i` covers `[i*w, (i+1)*w)`.
    pub counts: Vec<usize>,
    /// UEs still alive at the end of the run.
    pub censored: usize,
    pub total: usize,
    /// `(time, F(time))` at every distinct depletion time; F counts all
    /// UEs, so it tops out below 1 when some are censored.
    pub cdf: Vec<(f64, f64)>,
}

pub fn usage_time_distribution(records: &[UsageRecord], bin_width_s: f64) -> Result<UsageDistribution> {
    nonempty(records)?;
    if !(bin_width_s > 0.0 && bin_width_s.is_finite()) {
        return Err(Error::InvalidArgument(format!("bin width must be positive, got {bin_width_s}")));
    }
    let mut times: Vec<f64> = records.iter().filter_map(|r| r.depleted_at).collect();
    times.sort_by(f64::total_cmp);
    let total = records.len();
    let mut counts = Vec::new();
    for &t in &times {
        let bin = (t / bin_width_s).floor() as usize;
        if counts.len() <= bin {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    let mut cdf: Vec<(f64, f64)> = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let f = (i + 1) as f64 / total as f64;
        match cdf.last_mut() {
            Some(last) if last.0 == t => last.1 = f,
            _ => cdf.push((t, f)),
        }
    }
    Ok(UsageDistribution {
        bin_width_s,
        counts,
        censored: total - times.len(),
        total,
        cdf,
    })
}

/// Linear-interpolated empirical quantile of the depletion times.
pub fn depletion_quantile(records: &[UsageRecord], q: f64) -> Option<f64> {
    let mut t: Vec<f64> = records.iter().filter_map(|r| r.depleted_at).collect();
    if t.is_empty() {
        return None;
    }
    t.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (t.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(t[lo] + (t[hi] - t[lo]) * (pos - lo as f64))
}

pub fn interquartile_range(records: &[UsageRecord]) -> Option<f64> {
    Some(depletion_quantile(records, 0.75)? - depletion_quantile(records, 0.25)?)
}

/// Mean across replications with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        // Sum in sorted order so the result does not depend on replication order.
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let half_width = if n > 1 {
            let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean, half_width, n })
    }
}

/// Outcome of both arms at one target usage time.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageReport {
    pub target_s: f64,
    pub n_replications: usize,
    pub p_outage_coop: Option<Estimate>,
    pub p_outage_noncoop: Option<Estimate>,
    pub valueless_coop: Option<Estimate>,
    pub valueless_noncoop: Option<Estimate>,
}

/// Per-replication metrics of one arm at one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMetrics {
    pub outage: f64,
    pub valueless: Option<f64>,
}

pub fn arm_metrics(records: &[UsageRecord], target_s: f64, capacity_j: f64) -> Result<ArmMetrics> {
    Ok(ArmMetrics {
        outage: outage_probability(records, target_s)?,
        valueless: valueless_battery(records, target_s, capacity_j)?,
    })
}

impl OutageReport {
    /// Aggregates replication-level metrics of each arm.
    pub fn from_arms(target_s: f64, coop: &[ArmMetrics], noncoop: &[ArmMetrics]) -> Self {
        let outage = |a: &[ArmMetrics]| Estimate::from_samples(&a.iter().map(|m| m.outage).collect::<Vec<_>>());
        let valueless =
            |a: &[ArmMetrics]| Estimate::from_samples(&a.iter().filter_map(|m| m.valueless).collect::<Vec<_>>());
        OutageReport {
            target_s,
            n_replications: coop.len().max(noncoop.len()),
            p_outage_coop: outage(coop),
            p_outage_noncoop: outage(noncoop),
            valueless_coop: valueless(coop),
            valueless_noncoop: valueless(noncoop),
        }
    }

    /// Non-cooperative minus cooperative outage.
    pub fn outage_gap(&self) -> Option<f64> {
        Some(self.p_outage_noncoop?.mean - self.p_outage_coop?.mean)
    }
}
