//! Random Duration mobility inside a circular cell.
//!
//! A UE alternates walks (uniform direction, speed and duration) and pauses
//! (uniform duration). A walk that hits the cell edge is reflected
//! specularly about the tangent at the hit point, as many times as needed.
//! Positions are evaluated lazily from the current segment.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::rng::{substream, Purpose, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Point::new(r * theta.cos(), r * theta.sin())
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    Walk { direction: f64, speed: f64 },
    Pause,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_pos: Point,
    pub start_time: f64,
    pub duration: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn is_walk(&self) -> bool {
        matches!(self.kind, SegmentKind::Walk { .. })
    }

    /// A pause that never ends.
    pub fn stationary(pos: Point, t: f64) -> Self {
        Segment {
            start_pos: pos,
            start_time: t,
            duration: f64::INFINITY,
            kind: SegmentKind::Pause,
        }
    }
}

fn sample_range<R: Rng + ?Sized>(rng: &mut R, r: crate::config::Range) -> f64 {
    if r.max > r.min {
        rng.random_range(r.min..=r.max)
    } else {
        r.min
    }
}

fn sample_walk<R: Rng + ?Sized>(pos: Point, t: f64, rng: &mut R, cfg: &ScenarioConfig) -> Segment {
    let direction = rng.random_range(0.0..TAU);
    let speed = sample_range(rng, cfg.speed_range_mps);
    let duration = sample_range(rng, cfg.walk_range_s);
    Segment {
        start_pos: pos,
        start_time: t,
        duration,
        kind: SegmentKind::Walk { direction, speed },
    }
}

fn sample_pause<R: Rng + ?Sized>(pos: Point, t: f64, rng: &mut R, cfg: &ScenarioConfig) -> Segment {
    Segment {
        start_pos: pos,
        start_time: t,
        duration: sample_range(rng, cfg.pause_range_s),
        kind: SegmentKind::Pause,
    }
}

/// First segment of a UE: a fair coin decides between walk and pause.
pub fn first_segment<R: Rng + ?Sized>(pos: Point, t: f64, rng: &mut R, cfg: &ScenarioConfig) -> Segment {
    if rng.random_bool(0.5) {
        sample_walk(pos, t, rng, cfg)
    } else {
        sample_pause(pos, t, rng, cfg)
    }
}

/// Segment following `prev`; walks and pauses alternate.
pub fn next_segment<R: Rng + ?Sized>(prev: &Segment, rng: &mut R, cfg: &ScenarioConfig) -> Segment {
    let pos = position_at(prev, prev.end_time(), cfg.cell_radius_m);
    let t = prev.end_time();
    if prev.is_walk() {
        sample_pause(pos, t, rng, cfg)
    } else {
        sample_walk(pos, t, rng, cfg)
    }
}

/// Result of tracing a straight walk with reflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub end: Point,
    pub heading: Point,
    pub path_length: f64,
    pub reflections: usize,
}

/// Moves `dist` meters from `start` along unit vector `heading`, reflecting
/// specularly at the circle of radius `radius`.
pub fn trace_reflecting(start: Point, heading: Point, dist: f64, radius: f64) -> Trace {
    let mut p = start;
    let mut v = heading;
    let mut left = dist;
    let mut travelled = 0.0;
    let mut reflections = 0;
    // A chord is at least ~1e-9 R except on grazing rays; bound the loop anyway.
    while left > 0.0 && reflections < 1_000_000 {
        let pv = p.dot(v);
        let c = p.dot(p) - radius * radius;
        let disc = (pv * pv - c).max(0.0);
        let to_edge = (-pv + disc.sqrt()).max(0.0);
        if to_edge >= left {
            p = p + v * left;
            travelled += left;
            break;
        }
        p = p + v * to_edge;
        travelled += to_edge;
        left -= to_edge;
        let n = p * (1.0 / p.norm());
        v = v - n * (2.0 * v.dot(n));
        if v.dot(n) > -1e-12 {
            // Grazing hit: nudge inward so the next chord is nondegenerate.
            v = v - n * 1e-9;
            v = v * (1.0 / v.norm());
        }
        reflections += 1;
    }
    let r = p.norm();
    if r > radius {
        p = p * (radius / r);
    }
    Trace {
        end: p,
        heading: v,
        path_length: travelled,
        reflections,
    }
}

/// Position on `seg` at time `t`, which must lie within the segment.
pub fn position_at(seg: &Segment, t: f64, radius: f64) -> Point {
    assert!(
        t >= seg.start_time && t <= seg.end_time(),
        "position query at {t} outside segment [{}, {}]",
        seg.start_time,
        seg.end_time()
    );
    match seg.kind {
        SegmentKind::Pause => seg.start_pos,
        SegmentKind::Walk { direction, speed } => {
            let heading = Point::new(direction.cos(), direction.sin());
            trace_reflecting(seg.start_pos, heading, speed * (t - seg.start_time), radius).end
        }
    }
}

/// Uniform point in the disk of radius `radius`.
pub fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point {
    let u: f64 = rng.random();
    let theta = rng.random_range(0.0..TAU);
    Point::from_polar(radius * u.sqrt(), theta)
}

/// Kolmogorov-Smirnov distance between the radial distribution of `points`
/// and the uniform-disk radial CDF `(r/R)^2`.
pub fn radial_ks(points: &[Point], radius: f64) -> f64 {
    let mut r: Vec<f64> = points.iter().map(|p| (p.norm() / radius).min(1.0)).collect();
    r.sort_by(f64::total_cmp);
    let n = r.len() as f64;
    r.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = x * x;
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Positions of one Random Duration UE sampled every `interval_s`, after a
/// burn-in of `burn_in_s`.
pub fn random_duration_samples(
    cfg: &ScenarioConfig,
    seed: u64,
    n_samples: usize,
    interval_s: f64,
    burn_in_s: f64,
) -> Vec<Point> {
    let mut rng = substream(seed, 0, Purpose::Mobility);
    let start = uniform_in_disk(&mut rng, cfg.cell_radius_m);
    let mut seg = first_segment(start, 0.0, &mut rng, cfg);
    let mut out = Vec::with_capacity(n_samples);
    let mut t = burn_in_s;
    while out.len() < n_samples {
        while seg.end_time() < t {
            seg = next_segment(&seg, &mut rng, cfg);
        }
        out.push(position_at(&seg, t, cfg.cell_radius_m));
        t += interval_s;
    }
    out
}

/// Classic Random Waypoint without pauses: uniform destinations inside the
/// disk, straight travel at a uniform speed.
pub fn random_waypoint_samples(
    cfg: &ScenarioConfig,
    seed: u64,
    n_samples: usize,
    interval_s: f64,
    burn_in_s: f64,
) -> Vec<Point> {
    let mut rng: SimRng = substream(seed, 1, Purpose::Mobility);
    let radius = cfg.cell_radius_m;
    let mut from = uniform_in_disk(&mut rng, radius);
    let mut leg_start = 0.0;
    let mut to = uniform_in_disk(&mut rng, radius);
    let mut speed = sample_range(&mut rng, cfg.speed_range_mps);
    let mut leg_end = leg_start + from.distance(to) / speed;
    let mut out = Vec::with_capacity(n_samples);
    let mut t = burn_in_s;
    while out.len() < n_samples {
        while leg_end < t {
            from = to;
            leg_start = leg_end;
            to = uniform_in_disk(&mut rng, radius);
            speed = sample_range(&mut rng, cfg.speed_range_mps);
            leg_end = leg_start + from.distance(to) / speed;
        }
        let frac = if leg_end > leg_start { (t - leg_start) / (leg_end - leg_start) } else { 1.0 };
        out.push(from + (to - from) * frac);
        t += interval_s;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityCheck {
    pub n_samples: usize,
    pub interval_s: f64,
    pub random_duration_ks: f64,
    pub random_waypoint_ks: f64,
}

pub fn stationary_uniformity_check(
    cfg: &ScenarioConfig,
    seed: u64,
    n_samples: usize,
    interval_s: f64,
) -> UniformityCheck {
    let burn_in = 10.0 * (cfg.walk_range_s.max + cfg.pause_range_s.max);
    let rd = random_duration_samples(cfg, seed, n_samples, interval_s, burn_in);
    let rwp = random_waypoint_samples(cfg, seed, n_samples, interval_s, burn_in);
    UniformityCheck {
        n_samples,
        interval_s,
        random_duration_ks: radial_ks(&rd, cfg.cell_radius_m),
        random_waypoint_ks: radial_ks(&rwp, cfg.cell_radius_m),
    }
}
