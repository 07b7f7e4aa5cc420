//! Battery energy in integer picojoules, so debit bookkeeping is exact.

use std::fmt;

const PJ_PER_J: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Energy(u64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    /// Rounds to the nearest picojoule; negative or NaN input is a bug.
    pub fn from_joules(j: f64) -> Self {
        assert!(j >= 0.0 && j.is_finite(), "energy must be finite and nonnegative, got {j}");
        Energy((j * PJ_PER_J).round() as u64)
    }

    pub const fn from_picojoules(pj: u64) -> Self {
        Energy(pj)
    }

    pub const fn picojoules(self) -> u64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 as f64 / PJ_PER_J
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_sub(self, o: Energy) -> Option<Energy> {
        self.0.checked_sub(o.0).map(Energy)
    }

    pub fn saturating_sub(self, o: Energy) -> Energy {
        Energy(self.0.saturating_sub(o.0))
    }

    /// `self / o` as a float.
    pub fn ratio(self, o: Energy) -> f64 {
        self.0 as f64 / o.0 as f64
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;
    fn add(self, o: Energy) -> Energy {
        Energy(self.0.checked_add(o.0).expect("energy overflow"))
    }
}

impl std::ops::AddAssign for Energy {
    fn add_assign(&mut self, o: Energy) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12} J", self.joules())
    }
}
