//! Equilibrium sets and the distance between them.

use alloc::vec::Vec;
use core::fmt;

use crate::error::Result;
use crate::market::{BuyerAllocation, MarketConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `0 < α < 1`.
    Partial,
    /// `α = 1`.
    Full,
    /// A continuum of equilibria.
    Mixed,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Partial => "partial",
            Regime::Full => "full",
            Regime::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Analytic,
    Numeric,
    Oracle,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Numeric => "numeric",
            Source::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub alpha: f64,
    pub regime: Regime,
    /// Number of budget-constrained buyers `k*` at this point.
    pub threshold: usize,
    pub allocation: BuyerAllocation,
    /// Set by the grid solver when distinct roots closer than one grid step
    /// were collapsed into this one.
    pub possible_merge: bool,
}

impl EquilibriumPoint {
    /// Point at `alpha` with the buyer allocation and threshold it induces.
    pub fn at(config: &MarketConfig, alpha: f64) -> Result<Self> {
        let allocation = config.buyer_demand(alpha)?;
        Ok(Self {
            alpha,
            regime: if alpha == 1.0 {
                Regime::Full
            } else {
                Regime::Partial
            },
            threshold: allocation.threshold,
            allocation,
            possible_merge: false,
        })
    }
}

/// A continuum of equilibria `lo..hi`, each end open or closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl EquilibriumInterval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        let above = if self.lo_open {
            alpha > self.lo
        } else {
            alpha >= self.lo
        };
        let below = if self.hi_open {
            alpha < self.hi
        } else {
            alpha <= self.hi
        };
        above && below
    }
}

/// Every nontrivial equilibrium of one market at one price.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSet {
    pub price: f64,
    pub source: Source,
    /// Sorted by `alpha`.
    pub points: Vec<EquilibriumPoint>,
    /// Sorted by `lo`, regime is always [`Regime::Mixed`].
    pub intervals: Vec<EquilibriumInterval>,
    /// The instance sits within tolerance of a regime boundary and was
    /// solved as the boundary case.
    pub near_boundary: bool,
}

impl EquilibriumSet {
    pub fn empty(price: f64, source: Source) -> Self {
        Self {
            price,
            source,
            points: Vec::new(),
            intervals: Vec::new(),
            near_boundary: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.intervals.is_empty()
    }

    /// Number of equilibrium objects (points plus intervals).
    pub fn len(&self) -> usize {
        self.points.len() + self.intervals.len()
    }

    pub(crate) fn sort(&mut self) {
        self.points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        self.intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    }

    /// Members as closed segments sorted by lower end; points become
    /// degenerate segments.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.alpha, p.alpha))
            .chain(self.intervals.iter().map(|i| (i.lo, i.hi)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        out
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.alpha).collect()
    }
}

/// Hausdorff distance between the closures of two equilibrium sets after
/// clipping both to `[floor, 1]`.
///
/// Two empty sets are at distance 0 and an empty set is infinitely far from
/// a nonempty one.
pub fn set_distance(a: &EquilibriumSet, b: &EquilibriumSet, floor: f64) -> f64 {
    segment_distance(&clip(a.segments(), floor), &clip(b.segments(), floor))
}

fn clip(segments: Vec<(f64, f64)>, floor: f64) -> Vec<(f64, f64)> {
    segments
        .into_iter()
        .filter(|&(_, hi)| hi >= floor)
        .map(|(lo, hi)| (lo.max(floor), hi.min(1.0)))
        .collect()
}

/// Hausdorff distance between two finite unions of closed segments, each
/// sorted by lower end.
pub fn segment_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed(a, b).max(directed(b, a)),
    }
}

fn point_to_union(x: f64, set: &[(f64, f64)]) -> f64 {
    set.iter()
        .map(|&(lo, hi)| {
            if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn directed(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    // Distance to a union of segments is piecewise linear, so its maximum
    // over a segment is at an endpoint or at the middle of a gap in `to`.
    let mut worst: f64 = 0.0;
    for &(lo, hi) in from {
        worst = worst
            .max(point_to_union(lo, to))
            .max(point_to_union(hi, to));
        for w in to.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            if mid > lo && mid < hi {
                worst = worst.max(point_to_union(mid, to));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn distances() {
        assert_eq!(segment_distance(&[], &[]), 0.0);
        assert_eq!(segment_distance(&[(0.5, 0.5)], &[]), f64::INFINITY);
        assert!((segment_distance(&[(0.5, 0.5)], &[(0.52, 0.52)]) - 0.02).abs() < 1e-15);
        assert!((segment_distance(&[(0.5, 1.0)], &[(0.5, 0.5), (1.0, 1.0)]) - 0.25).abs() < 1e-15);
        assert!((segment_distance(&[(0.2, 0.4)], &[(0.25, 0.4)]) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn clipping_drops_trivial_members() {
        let mut a = EquilibriumSet::empty(1.0, Source::Analytic);
        a.intervals.push(EquilibriumInterval {
            lo: 0.0,
            hi: 0.25,
            lo_open: true,
            hi_open: false,
        });
        let mut b = a.clone();
        b.intervals[0].hi = 0.2501;
        assert!((set_distance(&a, &b, 2e-3) - 1e-4).abs() < 1e-12);

        let mut c = EquilibriumSet::empty(1.0, Source::Numeric);
        c.intervals.push(EquilibriumInterval::closed(0.0, 0.001));
        let d = EquilibriumSet::empty(1.0, Source::Numeric);
        assert_eq!(set_distance(&c, &d, 2e-3), 0.0);
    }

    #[test]
    fn interval_membership() {
        let i = EquilibriumInterval {
            lo: 0.0,
            hi: 0.5,
            lo_open: true,
            hi_open: false,
        };
        assert!(!i.contains(0.0));
        assert!(i.contains(0.5));
        assert!(EquilibriumInterval::closed(0.2, 0.3).contains(0.2));
        let v = vec![(0.1, 0.2)];
        assert_eq!(point_to_union(0.15, &v), 0.0);
    }
}
