//! Grid-scan equilibrium solver, empirical oracle and price sweeps.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::benefit::BenefitFunction;
use crate::distribution::{Cdf, EmpiricalCdf, ValuationDistribution};
use crate::equilibrium::{EquilibriumInterval, EquilibriumPoint, EquilibriumSet, Source};
use crate::error::{check_range, Error, Result};
use crate::market::MarketConfig;

const MAX_BISECTIONS: usize = 200;
const MINIMIZE_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Residual is sampled at `i / grid_points` for `i = 1..=grid_points`.
    pub grid_points: usize,
    /// Largest `|residual|` accepted for a reported equilibrium.
    pub tolerance: f64,
    /// Bisection stops once the bracket or `|residual|` is this small.
    pub refine_tolerance: f64,
    /// Minimum number of consecutive flat grid points forming an interval.
    pub interval_min_run: usize,
    /// `|residual|` at or below which the residual counts as identically
    /// zero, used to tell continua and tangencies from near misses.
    pub continuum_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_points: 4096,
            tolerance: 2e-3,
            refine_tolerance: 1e-10,
            interval_min_run: 3,
            continuum_tolerance: 1e-8,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 16 {
            return Err(Error::Invalid("grid_points must be at least 16"));
        }
        if self.interval_min_run == 0 {
            return Err(Error::Invalid("interval_min_run must be positive"));
        }
        check_range(
            "refine_tolerance",
            self.refine_tolerance,
            self.refine_tolerance > 0.0,
        )?;
        check_range(
            "tolerance",
            self.tolerance,
            self.tolerance > self.refine_tolerance,
        )?;
        check_range(
            "continuum_tolerance",
            self.continuum_tolerance,
            self.continuum_tolerance > 0.0 && self.continuum_tolerance <= self.tolerance,
        )
    }

    fn step(&self) -> f64 {
        1.0 / self.grid_points as f64
    }
}

/// A root located by [`scan_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannedRoot {
    pub alpha: f64,
    pub residual: f64,
    pub possible_merge: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanOutcome {
    /// Sorted by `alpha`.
    pub roots: Vec<ScannedRoot>,
    /// Sorted by `lo`.
    pub intervals: Vec<EquilibriumInterval>,
}

/// Locates the zeros of `residual` on `(0, 1]`.
///
/// Works for any residual function, continuous or not; a sign change across
/// a jump is rejected because its refined `|residual|` stays above
/// `settings.tolerance`.
pub fn scan_residual<F>(residual: F, settings: &SolverSettings) -> Result<ScanOutcome>
where
    F: Fn(f64) -> Result<f64>,
{
    settings.validate()?;
    let g = settings.grid_points;
    let h = settings.step();
    let ct = settings.continuum_tolerance;
    let tol = settings.tolerance;
    let alpha = |i: usize| if i == g { 1.0 } else { i as f64 * h };

    // Index 0 is α = h.
    let r: Vec<f64> = (1..=g).map(|i| residual(alpha(i))).collect::<Result<_>>()?;
    let flat = |i: usize| r[i].abs() <= ct;
    let mut covered = alloc::vec![false; g];
    let mut out = ScanOutcome::default();

    let mut i = 0;
    while i < g {
        if !flat(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < g && flat(i) {
            i += 1;
        }
        let end = i - 1;
        if end + 1 - start < settings.interval_min_run {
            continue;
        }
        if !refined_run_is_flat(&residual, start, end, h, ct)? {
            continue;
        }
        let (lo, lo_open) = if start == 0 {
            (0.0, true)
        } else {
            let x = bisect_edge(&residual, alpha(start + 1), alpha(start), ct, settings)?;
            (x, false)
        };
        let hi = if end == g - 1 {
            1.0
        } else {
            bisect_edge(&residual, alpha(end + 1), alpha(end + 2), ct, settings)?
        };
        out.intervals.push(EquilibriumInterval {
            lo,
            hi,
            lo_open,
            hi_open: false,
        });
        covered[start..=end].iter_mut().for_each(|c| *c = true);
    }

    let mut roots: Vec<ScannedRoot> = Vec::new();
    for i in 0..g {
        if !covered[i] && flat(i) {
            roots.push(ScannedRoot {
                alpha: alpha(i + 1),
                residual: r[i],
                possible_merge: false,
            });
        }
    }
    for i in 0..g - 1 {
        if covered[i] || covered[i + 1] || flat(i) || flat(i + 1) {
            continue;
        }
        if r[i] * r[i + 1] < 0.0 {
            let (x, rx) = bisect(&residual, alpha(i + 1), alpha(i + 2), settings)?;
            if rx.abs() <= tol {
                roots.push(ScannedRoot {
                    alpha: x,
                    residual: rx,
                    possible_merge: false,
                });
            }
        }
    }

    // Runs of near-zero residual without a crossing may hide a tangency.
    let mut i = 0;
    while i < g {
        if covered[i] || r[i].abs() > tol {
            i += 1;
            continue;
        }
        let start = i;
        while i < g && !covered[i] && r[i].abs() <= tol {
            i += 1;
        }
        let lo = alpha(start + 1) - h;
        let hi = (alpha(i) + h).min(1.0);
        if roots.iter().any(|p| p.alpha >= lo - h && p.alpha <= hi + h) {
            continue;
        }
        let (x, rx) = minimize_abs(&residual, lo.max(0.25 * h), hi)?;
        if rx.abs() <= ct {
            roots.push(ScannedRoot {
                alpha: x,
                residual: rx,
                possible_merge: false,
            });
        }
    }

    roots.retain(|p| p.alpha > tol);
    roots.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let mut merged: Vec<ScannedRoot> = Vec::with_capacity(roots.len());
    for p in roots {
        match merged.last_mut() {
            Some(last) if p.alpha - last.alpha <= h => {
                if p.residual.abs() < last.residual.abs() {
                    *last = ScannedRoot {
                        possible_merge: true,
                        ..p
                    };
                } else {
                    last.possible_merge = true;
                }
            }
            _ => merged.push(p),
        }
    }
    merged.retain(|p| {
        !out.intervals
            .iter()
            .any(|iv| p.alpha >= iv.lo - h && p.alpha <= iv.hi + h)
    });
    out.roots = merged;
    Ok(out)
}

fn refined_run_is_flat<F>(residual: &F, start: usize, end: usize, h: f64, ct: f64) -> Result<bool>
where
    F: Fn(f64) -> Result<f64>,
{
    for i in start..end {
        let base = (i + 1) as f64 * h;
        for j in 1..4 {
            if residual(base + j as f64 * 0.25 * h)?.abs() > ct {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Boundary between a flat and a non-flat point of the residual.
fn bisect_edge<F>(
    residual: &F,
    flat_at: f64,
    rough_at: f64,
    ct: f64,
    settings: &SolverSettings,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut flat, mut rough) = (flat_at, rough_at);
    for _ in 0..MAX_BISECTIONS {
        if (flat - rough).abs() <= settings.refine_tolerance {
            break;
        }
        let mid = 0.5 * (flat + rough);
        if residual(mid)?.abs() <= ct {
            flat = mid;
        } else {
            rough = mid;
        }
    }
    Ok(flat)
}

/// Bisection that returns the best point seen, never one worse than the
/// bracket ends.
fn bisect<F>(residual: &F, lo: f64, hi: f64, settings: &SolverSettings) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut r_lo = residual(lo)?;
    let r_hi = residual(hi)?;
    if r_lo == 0.0 {
        return Ok((lo, r_lo));
    }
    if r_hi == 0.0 {
        return Ok((hi, r_hi));
    }
    if r_lo.signum() == r_hi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut best = if r_lo.abs() <= r_hi.abs() {
        (lo, r_lo)
    } else {
        (hi, r_hi)
    };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r_mid = residual(mid)?;
        if r_mid.abs() < best.1.abs() {
            best = (mid, r_mid);
        }
        if r_mid.abs() <= settings.refine_tolerance || hi - lo <= settings.refine_tolerance {
            break;
        }
        if r_mid.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Golden-section search for the smallest `|residual|` on `[lo, hi]`.
fn minimize_abs<F>(residual: &F, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut best = {
        let (ra, rb) = (residual(a)?, residual(b)?);
        if ra.abs() <= rb.abs() {
            (a, ra)
        } else {
            (b, rb)
        }
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut rc = residual(c)?;
    let mut rd = residual(d)?;
    for _ in 0..MINIMIZE_ITERS {
        for (x, r) in [(c, rc), (d, rd)] {
            if r.abs() < best.1.abs() {
                best = (x, r);
            }
        }
        if rc.abs() <= rd.abs() {
            b = d;
            d = c;
            rd = rc;
            c = b - INV_PHI * (b - a);
            rc = residual(c)?;
        } else {
            a = c;
            c = d;
            rc = rd;
            d = a + INV_PHI * (b - a);
            rd = residual(d)?;
        }
    }
    Ok(best)
}

fn to_set(config: &MarketConfig, scan: ScanOutcome, source: Source) -> Result<EquilibriumSet> {
    let mut set = EquilibriumSet::empty(config.price(), source);
    for root in scan.roots {
        let mut point = EquilibriumPoint::at(config, root.alpha)?;
        point.possible_merge = root.possible_merge;
        set.points.push(point);
    }
    set.intervals = scan.intervals;
    set.sort();
    Ok(set)
}

fn grid_with<D: Cdf + ?Sized>(
    config: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &D,
    settings: &SolverSettings,
    source: Source,
) -> Result<EquilibriumSet> {
    benefit.validate()?;
    let scan = scan_residual(|a| config.residual(benefit, dist, a), settings)?;
    to_set(config, scan, source)
}

/// Every equilibrium on `(0, 1]` found by scanning the residual on a grid.
pub fn grid_equilibria(
    config: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    settings: &SolverSettings,
) -> Result<EquilibriumSet> {
    dist.validate()?;
    grid_with(config, benefit, dist, settings, Source::Numeric)
}

/// Refines a root of the residual inside a sign-changing bracket.
pub fn refine_root(
    config: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    lo: f64,
    hi: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    check_range("lo", lo, lo > 0.0 && lo < hi)?;
    check_range("hi", hi, hi <= 1.0)?;
    bisect(&|a| config.residual(benefit, dist, a), lo, hi, settings).map(|(x, _)| x)
}

/// `n` valuations drawn by inverse transform from a ChaCha8 stream.
pub fn sample_valuations(dist: &ValuationDistribution, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            dist.quantile(u)
        })
        .collect()
}

/// Equilibria of a finite population of `n` users whose valuations are
/// drawn from `dist`: the grid solver run against their empirical CDF.
pub fn empirical_oracle(
    config: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    n: usize,
    seed: u64,
    settings: &SolverSettings,
) -> Result<EquilibriumSet> {
    if n == 0 {
        return Err(Error::Invalid("the oracle needs at least one user"));
    }
    dist.validate()?;
    let ecdf = EmpiricalCdf::new(sample_valuations(dist, n, seed));
    grid_with(config, benefit, &ecdf, settings, Source::Oracle)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub price: f64,
    pub equilibria: EquilibriumSet,
    /// Closed-form equilibria, when the instance has them.
    pub analytic: Option<EquilibriumSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Numeric (and, when available, analytic) equilibria at one price.
pub fn sweep_row(
    template: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    price: f64,
    settings: &SolverSettings,
) -> Result<SweepRow> {
    let config = template.with_price(price)?;
    let equilibria = grid_equilibria(&config, benefit, dist, settings)?;
    let analytic = crate::analytic_equilibria(&config, benefit, dist).transpose()?;
    Ok(SweepRow {
        price,
        equilibria,
        analytic,
    })
}

pub fn check_prices(prices: &[f64]) -> Result<()> {
    if prices.is_empty() {
        return Err(Error::Invalid("no prices to sweep"));
    }
    for &p in prices {
        check_range("price", p, p > 0.0 && p.is_finite())?;
    }
    if prices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("prices must be strictly increasing"));
    }
    Ok(())
}

/// Solves the market independently at each price.
pub fn sweep(
    template: &MarketConfig,
    benefit: &BenefitFunction,
    dist: &ValuationDistribution,
    prices: &[f64],
    settings: &SolverSettings,
) -> Result<SweepResult> {
    check_prices(prices)?;
    let rows = prices
        .iter()
        .map(|&p| sweep_row(template, benefit, dist, p, settings))
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Regime;
    use alloc::vec;

    const UNIFORM: ValuationDistribution = ValuationDistribution::Uniform { scale: 1.0 };

    fn cfg(b: &[f64], p: f64) -> MarketConfig {
        MarketConfig::new(1.0, b.to_vec(), p).unwrap()
    }

    #[test]
    fn settings_validation() {
        assert!(SolverSettings::default().validate().is_ok());
        let bad = SolverSettings {
            grid_points: 8,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverSettings {
            tolerance: 1e-12,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn isolated_root() {
        let q = BenefitFunction::Constant { q: 1.0 };
        let s = grid_equilibria(&cfg(&[1.0, 1.0], 1.0), &q, &UNIFORM, &Default::default()).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(s.intervals.is_empty());
        assert!((s.points[0].alpha - 0.5).abs() < 1e-9);
        assert_eq!(s.source, Source::Numeric);
    }

    #[test]
    fn empty_region() {
        let c = BenefitFunction::Linear { c: 1.0 };
        let s = grid_equilibria(&cfg(&[1.0, 2.0], 2.0), &c, &UNIFORM, &Default::default()).unwrap();
        assert!(s.is_empty(), "{s:?}");
    }

    #[test]
    fn continuum_with_full_point() {
        let c = BenefitFunction::Linear { c: 2.0 };
        let settings = SolverSettings::default();
        let s = grid_equilibria(&cfg(&[1.0, 2.0], 4.0), &c, &UNIFORM, &settings).unwrap();
        assert_eq!(s.intervals.len(), 1, "{s:?}");
        let iv = s.intervals[0];
        assert_eq!(iv.lo, 0.0);
        assert!(iv.lo_open);
        assert!((iv.hi - 0.25).abs() <= settings.step());
        assert_eq!(s.alphas(), vec![1.0]);
        assert_eq!(s.points[0].regime, Regime::Full);
    }

    #[test]
    fn mixed_interval_up_to_one() {
        let q = BenefitFunction::Constant { q: 1.0 };
        let settings = SolverSettings::default();
        let s = grid_equilibria(&cfg(&[1.0, 1.0], 2.0), &q, &UNIFORM, &settings).unwrap();
        assert!(s.points.is_empty(), "{s:?}");
        assert_eq!(s.intervals.len(), 1);
        assert!((s.intervals[0].lo - 0.5).abs() <= settings.step());
        assert_eq!(s.intervals[0].hi, 1.0);
    }

    #[test]
    fn two_branches() {
        let c = BenefitFunction::Linear { c: 1.0 };
        let s = grid_equilibria(&cfg(&[1.0, 2.0], 6.0), &c, &UNIFORM, &Default::default()).unwrap();
        let a = s.alphas();
        assert_eq!(a.len(), 2);
        assert!((a[0] - 0.5).abs() < 1e-9);
        assert_eq!(a[1], 1.0);
    }

    #[test]
    fn jump_is_not_a_root() {
        let r = |a: f64| Ok(if a < 0.3 { -0.5 } else { 0.5 });
        let out = scan_residual(r, &Default::default()).unwrap();
        assert!(out.roots.is_empty());
        assert!(out.intervals.is_empty());
    }

    #[test]
    fn tangency_is_found() {
        let r = |a: f64| Ok((a - 0.3) * (a - 0.3));
        let out = scan_residual(r, &Default::default()).unwrap();
        assert_eq!(out.roots.len(), 1);
        assert!((out.roots[0].alpha - 0.3).abs() < 1e-3);
    }

    #[test]
    fn near_miss_is_rejected() {
        let r = |a: f64| Ok((a - 0.3) * (a - 0.3) + 1e-4);
        assert!(scan_residual(r, &Default::default())
            .unwrap()
            .roots
            .is_empty());
    }

    #[test]
    fn close_roots_are_merged_and_flagged() {
        let r = |a: f64| Ok((a - 0.4) * (a - 0.41));
        let settings = SolverSettings {
            grid_points: 64,
            ..Default::default()
        };
        let out = scan_residual(r, &settings).unwrap();
        assert_eq!(out.roots.len(), 1);
        assert!(out.roots[0].possible_merge);
    }

    #[test]
    fn refine_examples() {
        let s = SolverSettings::default();
        let q = BenefitFunction::Constant { q: 1.0 };
        let x = refine_root(&cfg(&[1.0, 1.0], 1.0), &q, &UNIFORM, 0.4, 0.6, &s).unwrap();
        assert!((x - 0.5).abs() <= 1e-10);
        let q = BenefitFunction::Constant { q: 2.5 };
        let x = refine_root(&cfg(&[1.0, 2.0, 3.0], 1.6), &q, &UNIFORM, 0.9, 1.0, &s).unwrap();
        assert!((x - 0.9375).abs() <= 1e-10);
        let q = BenefitFunction::Constant { q: 1.0 };
        let err = refine_root(&cfg(&[1.0, 1.0], 1.0), &q, &UNIFORM, 0.6, 0.9, &s);
        assert!(matches!(err, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn refinement_never_worse_than_bracket() {
        let s = SolverSettings::default();
        let r = |a: f64| Ok(if a < 0.5 { a - 0.6 } else { a - 0.45 });
        let (_, best) = bisect(&r, 0.3, 0.7, &s).unwrap();
        assert!(best.abs() <= 0.25);
    }

    #[test]
    fn oracle_is_deterministic() {
        let q = BenefitFunction::Constant { q: 1.0 };
        let c = cfg(&[1.0, 1.0], 1.0);
        let s = SolverSettings::default();
        let a = empirical_oracle(&c, &q, &UNIFORM, 10_000, 7, &s).unwrap();
        let b = empirical_oracle(&c, &q, &UNIFORM, 10_000, 7, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.source, Source::Oracle);
        assert!(a.points.iter().all(|p| (p.alpha - 0.5).abs() < 0.03));
        assert!(empirical_oracle(&c, &q, &UNIFORM, 0, 7, &s).is_err());
    }

    #[test]
    fn single_agent_smoke() {
        let q = BenefitFunction::Constant { q: 1.0 };
        let d = ValuationDistribution::Personalized { v_m: 0.5 };
        let c = cfg(&[1.0, 1.0], 1.0);
        assert!(empirical_oracle(&c, &q, &d, 1, 3, &Default::default()).is_ok());
    }

    #[test]
    fn sampler_matches_distribution() {
        let v = sample_valuations(&UNIFORM, 20_000, 1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.5).abs() < 0.01);
        assert_eq!(v, sample_valuations(&UNIFORM, 20_000, 1));
        assert_ne!(v, sample_valuations(&UNIFORM, 20_000, 2));
    }

    #[test]
    fn sweep_rows() {
        let q = BenefitFunction::Constant { q: 2.5 };
        let c = cfg(&[1.0, 2.0, 3.0], 1.0);
        let s = SolverSettings::default();
        let out = sweep(&c, &q, &UNIFORM, &[1.0, 1.6, 3.0], &s).unwrap();
        assert_eq!(out.rows.len(), 3);
        for row in &out.rows {
            assert_eq!(row.equilibria.len(), 1);
            assert!(row.analytic.is_some());
        }
        assert!(sweep(&c, &q, &UNIFORM, &[1.0, 1.0], &s).is_err());
        assert!(sweep(&c, &q, &UNIFORM, &[], &s).is_err());
        let one = sweep(&c, &q, &UNIFORM, &[2.2], &s).unwrap();
        assert_eq!(one.rows.len(), 1);
    }
}
