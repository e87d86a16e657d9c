//! Distribution-free comparison of the true PD with the matched lognormal PD.
//!
//! Conditioning on firm 1's default state splits `V1` into a mixture with
//! weight `p` on the default set. Mean and second moment are affine in `p`:
//! `E_p(V1) = p x1 + x2` and `E_p(V1^2) = p y1 + y2`, so the lognormal PD is a
//! function `h(p)` that can be compared with `p` itself.

use crate::distributions::{match_lognormal, LognormalSpec, MomentPair};
use crate::error::{Result, XosError};
use crate::normal::normal_cdf;
use crate::valuation::{
    classify_area, firm_one_affine, value_closed_form, AssetScenario, Firm, XosStructure,
};

/// Relative distance above `d1` of the solvent atom in the overestimation case.
pub const BORDER_OFFSET: f64 = 1e-6;

/// Relative bisection tolerance for the crossings of `h(p)` and `p`.
pub const CROSSING_TOL: f64 = 1e-8;

/// Conditional moments of `V1` given default (`d`) and solvency (`s`),
/// written as the coefficients of the mixture moments in `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureMoments {
    pub p: f64,
    /// `E(V1 | default) - E(V1 | solvent)`.
    pub x1: f64,
    /// `E(V1 | solvent)`.
    pub x2: f64,
    /// `E(V1^2 | default) - E(V1^2 | solvent)`.
    pub y1: f64,
    /// `E(V1^2 | solvent)`.
    pub y2: f64,
}

impl MixtureMoments {
    pub fn new(p: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(XosError::InvalidMoments(format!("p must lie in [0, 1], got {p}")));
        }
        if !(x1 < 0.0) || !(y1 < 0.0) {
            return Err(XosError::InvalidMoments(format!(
                "default-minus-solvent moments must be negative, got x1 = {x1}, y1 = {y1}"
            )));
        }
        if !(x1 + x2 > 0.0) || !(y1 + y2 > 0.0) || ![x1, x2, y1, y2].iter().all(|v| v.is_finite()) {
            return Err(XosError::InvalidMoments(
                "conditional moments must be finite and positive".into(),
            ));
        }
        Ok(Self { p, x1, x2, y1, y2 })
    }

    /// From conditional means and variances.
    pub fn from_conditionals(p: f64, mean_d: f64, var_d: f64, mean_s: f64, var_s: f64) -> Result<Self> {
        let (sec_d, sec_s) = (var_d + mean_d * mean_d, var_s + mean_s * mean_s);
        Self::new(p, mean_d - mean_s, mean_s, sec_d - sec_s, sec_s)
    }

    pub fn at(&self, p: f64) -> Result<Self> {
        Self::new(p, self.x1, self.x2, self.y1, self.y2)
    }

    pub fn mean(&self, p: f64) -> f64 {
        p * self.x1 + self.x2
    }

    pub fn second_moment(&self, p: f64) -> f64 {
        p * self.y1 + self.y2
    }

    pub fn variance(&self, p: f64) -> f64 {
        self.second_moment(p) - self.mean(p).powi(2)
    }

    /// Variance positive at every `p` in `[0, 1]`. The variance is concave
    /// in `p`, so the endpoints suffice.
    pub fn has_positive_variance(&self) -> bool {
        self.variance(0.0) > 0.0 && self.variance(1.0) > 0.0
    }

    /// Consistency with `V1 < d1` on the default set and `V1 >= d1` off it.
    pub fn check_threshold(&self, d1: f64) -> Result<()> {
        if !(self.x2 >= d1) || !(self.y2 >= d1 * d1) {
            return Err(XosError::InvalidMoments(format!(
                "solvent conditional moments ({}, {}) below the threshold {d1}",
                self.x2, self.y2
            )));
        }
        if !(self.x1 + self.x2 < d1) {
            return Err(XosError::InvalidMoments(format!(
                "default conditional mean {} not below {d1}",
                self.x1 + self.x2
            )));
        }
        Ok(())
    }

    /// `E_p(V1)^2 / sqrt(E_p(V1^2))`, the threshold separating `h >= 1/2`
    /// from `h <= 1/2`.
    pub fn threshold(&self, p: f64) -> f64 {
        self.mean(p).powi(2) / self.second_moment(p).sqrt()
    }

    /// Lognormal matched to the mixture at `p`.
    pub fn matched(&self, p: f64) -> Result<LognormalSpec> {
        let sig_sq = (self.second_moment(p) / self.mean(p).powi(2)).ln();
        if !(sig_sq > 0.0) || !sig_sq.is_finite() {
            return Err(XosError::InvalidMoments(format!(
                "implied lognormal variance {sig_sq} at p = {p} is not positive"
            )));
        }
        LognormalSpec::new(0.5 * (self.mean(p).powi(4) / self.second_moment(p)).ln(), sig_sq, 0.0)
    }

    /// Standardized argument of `h` at `p`.
    pub fn h_argument(&self, p: f64, d1: f64) -> Result<f64> {
        self.matched(p).map(|l| l.z_score(d1))
    }

    pub fn h(&self, p: f64, d1: f64) -> Result<f64> {
        self.h_argument(p, d1).map(normal_cdf)
    }
}

/// Matched-lognormal PD at the stored mixing probability.
pub fn h_curve(m: &MixtureMoments, d1: f64) -> Result<f64> {
    m.check_threshold(d1)?;
    m.h(m.p, d1)
}

/// `(eps_hat, eps_prime_hat)`: `h(p) > p` on `[0, eps_hat)` and
/// `h(p) < p` on `(eps_prime_hat, 1]`, as resolved by a grid of `grid_n`
/// intervals refined by bisection.
pub fn find_crossings(m: &MixtureMoments, d1: f64, grid_n: usize) -> Result<(f64, f64)> {
    if grid_n < 100 {
        return Err(XosError::InvalidArgument(format!("grid_n must be at least 100, got {grid_n}")));
    }
    m.check_threshold(d1)?;
    if !m.has_positive_variance() {
        return Err(XosError::InvalidMoments(
            "mixture variance must be positive on all of [0, 1]".into(),
        ));
    }
    let f = |p: f64| m.h(p, d1).map(|h| h - p);
    let grid: Vec<f64> = (0..=grid_n).map(|k| k as f64 / grid_n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&p| f(p)).collect::<Result<_>>()?;
    if !(vals[0] > 0.0 && vals[grid_n] < 0.0) {
        return Err(XosError::InvalidMoments(
            "h(p) - p underflows at an endpoint; signs not resolvable in double precision".into(),
        ));
    }

    let first = (1..=grid_n).find(|&k| vals[k] <= 0.0).unwrap_or(grid_n);
    let eps = bisect_sign(&f, grid[first - 1], grid[first])?;
    let last = (0..grid_n).rev().find(|&k| vals[k] >= 0.0).unwrap_or(0);
    let eps_prime = bisect_sign(&f, grid[last], grid[last + 1])?;
    Ok((eps, eps_prime))
}

/// Bisection for a sign change of `f` from positive at `lo` to non-positive
/// at `hi`.
fn bisect_sign<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > CROSSING_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A finitely supported law of `V1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicLaw {
    /// `(value, probability)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

impl AtomicLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(v, w)| !(v >= 0.0) || !(w >= 0.0) || !v.is_finite()) {
            return Err(XosError::InvalidArgument(
                "atoms need finite non-negative values and weights".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(XosError::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| v * w).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| v * v * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(v, w)| (v - m) * (v - m) * w).sum()
    }

    /// Probability of `V1 < d1`.
    pub fn pd_suzuki(&self, d1: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 < d1).map(|a| a.1).sum()
    }

    pub fn matched(&self) -> Result<LognormalSpec> {
        let var = self.variance();
        if !(var > 0.0) {
            return Err(XosError::DegenerateVariance);
        }
        Ok(match_lognormal(&MomentPair::new(self.mean(), var)?))
    }

    pub fn pd_lognormal(&self, d1: f64) -> Result<f64> {
        Ok(self.matched()?.cdf(d1))
    }
}

/// `V1 = d1/2` with probability `p`, otherwise `hi`, with mean `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointLaw {
    pub lo: f64,
    pub hi: f64,
    pub p: f64,
    pub e: f64,
    pub d1: f64,
}

impl TwoPointLaw {
    pub fn new(p: f64, d1: f64, e: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(XosError::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
        }
        if !(d1 > 0.0) || !(e > d1) || !e.is_finite() {
            return Err(XosError::InvalidArgument(format!("need 0 < d1 < E, got d1 = {d1}, E = {e}")));
        }
        Ok(Self {
            lo: 0.5 * d1,
            hi: (e - 0.5 * p * d1) / (1.0 - p),
            p,
            e,
            d1,
        })
    }

    pub fn mean(&self) -> f64 {
        self.p * self.lo + (1.0 - self.p) * self.hi
    }

    /// `(d1^2 p / 4 - d1 p E + E^2) / (1 - p)`.
    pub fn second_moment(&self) -> f64 {
        let (p, d1, e) = (self.p, self.d1, self.e);
        (0.25 * d1 * d1 * p - d1 * p * e + e * e) / (1.0 - p)
    }

    pub fn to_atomic(&self) -> AtomicLaw {
        AtomicLaw {
            atoms: vec![(self.lo, self.p), (self.hi, 1.0 - self.p)],
        }
    }

    /// Mixture moments of the law itself; both conditional variances vanish,
    /// so `h` is only defined strictly inside `(0, 1)`.
    pub fn moments(&self) -> Result<MixtureMoments> {
        self.spread_moments(0.0)
    }

    /// Mixture moments after giving each atom a conditional standard
    /// deviation of `rel_spread` times its value.
    pub fn spread_moments(&self, rel_spread: f64) -> Result<MixtureMoments> {
        let k = 1.0 + rel_spread * rel_spread;
        MixtureMoments::new(
            self.p,
            self.lo - self.hi,
            self.hi,
            k * (self.lo * self.lo - self.hi * self.hi),
            k * self.hi * self.hi,
        )
    }
}

/// `E^4 (1 - p) + d1^3 p E - E^2 d1^2 - d1^4 p / 4`; non-negative iff
/// `d1 <= E^2 / sqrt(E_p(V1^2))` for the two-point law.
pub fn underestimation_quartic(p: f64, d1: f64, e: f64) -> f64 {
    e.powi(4) * (1.0 - p) + d1.powi(3) * p * e - e * e * d1 * d1 - 0.25 * d1.powi(4) * p
}

/// A law with `P(V1 < d1) = p` whose matched lognormal puts at least half
/// its mass below `d1`: the solvent mass sits just above `d1`, so
/// `E_p(V1) <= d1`.
pub fn build_overestimation_case(p: f64, d1: f64) -> Result<AtomicLaw> {
    if !(p > 0.0 && p < 1.0) {
        return Err(XosError::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    if !(d1 > 0.0) || !d1.is_finite() {
        return Err(XosError::InvalidArgument(format!("d1 must be positive, got {d1}")));
    }
    // keep the mean below d1 even for tiny p
    let offset = BORDER_OFFSET.min(0.25 * p / (1.0 - p));
    AtomicLaw::new(vec![(0.5 * d1, p), (d1 * (1.0 + offset), 1.0 - p)])
}

/// Two-point law with `P(V1 < d1) = p` and matched-lognormal PD at most
/// one half. `E` is the smallest `2^k d1`, `k >= 1`, meeting the quartic
/// condition.
pub fn build_underestimation_case(p: f64, d1: f64) -> Result<TwoPointLaw> {
    if !(p > 0.0 && p < 1.0) {
        return Err(XosError::InvalidArgument(format!("p must lie in (0, 1), got {p}")));
    }
    if !(d1 > 0.0) || !d1.is_finite() {
        return Err(XosError::InvalidArgument(format!("d1 must be positive, got {d1}")));
    }
    let mut e = 2.0 * d1;
    while underestimation_quartic(p, d1, e) < 0.0 {
        e *= 2.0;
        if !e.is_finite() {
            return Err(XosError::InvalidArgument(format!("no finite E for p = {p}")));
        }
    }
    TwoPointLaw::new(p, d1, e)
}

/// A finitely supported law of asset scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLaw {
    pub atoms: Vec<(AssetScenario, f64)>,
}

impl ScenarioLaw {
    /// Law of `V1` under `x`.
    pub fn pushforward(&self, x: &XosStructure) -> AtomicLaw {
        AtomicLaw {
            atoms: self
                .atoms
                .iter()
                .map(|(sc, w)| (value_closed_form(x, sc).v1, *w))
                .collect(),
        }
    }

    /// Mass of scenarios in which firm 1 defaults.
    pub fn default_mass(&self, x: &XosStructure) -> f64 {
        self.atoms
            .iter()
            .filter(|(sc, _)| classify_area(x, sc).defaults(Firm::One))
            .map(|a| a.1)
            .sum()
    }
}

/// Scenario on the horizontal line `a2 = a2` with `V1 = v`.
fn solve_on_line(x: &XosStructure, v: f64, a2: f64) -> Result<AssetScenario> {
    let v1 = |a1: f64| value_closed_form(x, &AssetScenario { a1, a2 }).v1;
    if v1(0.0) > v {
        return Err(XosError::InfeasibleGeometry(format!(
            "firm value {v} unreachable on a2 = {a2} (minimum {})",
            v1(0.0)
        )));
    }
    // v1 >= a1, so the level lies in [0, v]
    let (mut lo, mut hi) = (0.0, v);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if v1(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // invert the affine map of the area found, which is exact up to rounding
    let tol = 1e-12 * v.max(1.0);
    let guess = AssetScenario { a1: hi, a2 };
    let area = classify_area(x, &guess);
    let (alpha, beta, gamma) = firm_one_affine(x, area);
    let a1 = (v - beta * a2 - gamma) / alpha;
    let exact = AssetScenario { a1, a2 };
    if a1 >= 0.0 && classify_area(x, &exact) == area && (v1(a1) - v).abs() <= tol {
        return Ok(exact);
    }
    if (v1(hi) - v).abs() <= tol {
        return Ok(guess);
    }
    Err(XosError::InfeasibleGeometry(format!("no scenario with firm value {v} on a2 = {a2}")))
}

/// Scenario atoms realizing the given values of `V1` under `x`: values
/// below `d1` on the `a1` axis (areas dd/ds), others on `a2 = d2` (area ss).
pub fn realize_atoms(x: &XosStructure, law: &AtomicLaw) -> Result<ScenarioLaw> {
    let d1 = x.d1();
    let mut atoms = Vec::with_capacity(law.atoms.len());
    for &(v, w) in &law.atoms {
        let sc = if v < d1 {
            solve_on_line(x, v, 0.0)?
        } else {
            let sc = solve_on_line(x, v, x.d2())?;
            if classify_area(x, &sc) != crate::valuation::SuzukiArea::SS {
                return Err(XosError::InfeasibleGeometry(format!(
                    "solvent value {v} not attained inside ss"
                )));
            }
            sc
        };
        atoms.push((sc, w));
    }
    Ok(ScenarioLaw { atoms })
}

/// Asset distribution under `x` whose firm-one value has the two-point law.
pub fn realize_on_quadrant(x: &XosStructure, law: &TwoPointLaw) -> Result<ScenarioLaw> {
    if (x.d1() - law.d1).abs() > 1e-12 * law.d1 {
        return Err(XosError::InvalidArgument(format!(
            "law built for d1 = {}, structure has d1 = {}",
            law.d1,
            x.d1()
        )));
    }
    realize_atoms(x, &law.to_atomic())
}

/// Reweights `base` to put mass `p` on firm 1's default set while keeping
/// the conditional laws on the default and solvent sets.
pub fn reweight(x: &XosStructure, base: &ScenarioLaw, p: f64) -> Result<ScenarioLaw> {
    if !(0.0..=1.0).contains(&p) {
        return Err(XosError::InvalidArgument(format!("p must lie in [0, 1], got {p}")));
    }
    let mass_d = base.default_mass(x);
    let mass_s: f64 = base.atoms.iter().map(|a| a.1).sum::<f64>() - mass_d;
    if !(mass_d > 0.0) || !(mass_s > 0.0) {
        return Err(XosError::InvalidArgument(
            "base law must charge both the default and the solvent set".into(),
        ));
    }
    Ok(ScenarioLaw {
        atoms: base
            .atoms
            .iter()
            .map(|&(sc, w)| {
                let scale = if classify_area(x, &sc).defaults(Firm::One) {
                    p / mass_d
                } else {
                    (1.0 - p) / mass_s
                };
                (sc, w * scale)
            })
            .collect(),
    })
}

/// Mixture moments of `V1` under `x` for the given scenario law, at its own
/// default mass.
pub fn mixture_moments_of(x: &XosStructure, law: &ScenarioLaw) -> Result<MixtureMoments> {
    let (mut wd, mut md, mut sd) = (0.0, 0.0, 0.0);
    let (mut ws, mut ms, mut ss) = (0.0, 0.0, 0.0);
    for (sc, w) in &law.atoms {
        let v = value_closed_form(x, sc).v1;
        if classify_area(x, sc).defaults(Firm::One) {
            wd += w;
            md += w * v;
            sd += w * v * v;
        } else {
            ws += w;
            ms += w * v;
            ss += w * v * v;
        }
    }
    if !(wd > 0.0) || !(ws > 0.0) {
        return Err(XosError::InvalidMoments("law must charge both default states".into()));
    }
    let (md, sd, ms, ss) = (md / wd, sd / wd, ms / ws, ss / ws);
    MixtureMoments::new(wd / (wd + ws), md - ms, ms, sd - ss, ss)
}
