//! Behaviour of default probabilities as cross-ownership fractions tend to one.
//!
//! Equity-only: the true PD converges to the probability of a fixed region
//! while the matched lognormal PD goes to zero. Debt-only: the limiting firm
//! value is (shifted) lognormal or a two-piece mixture depending on how the
//! face values compare, and for `d1 > d2` the sign of the estimation error is
//! governed by the two roots `d1*`, `d1**` of a bell-shaped curve.

use crate::default_risk::{compare_pd, pd_analytic_suzuki_limit_region, PdEstimate};
use crate::distributions::{
    match_lognormal, AssetSampler, BivariateLognormalSpec, LognormalSpec, MomentPair,
    RunningMoments,
};
use crate::error::{Result, XosError};
use crate::normal::normal_cdf;
use crate::valuation::{classify_area, AssetScenario, Firm, SuzukiArea, XosStructure};

/// Relative tolerance under which `d1` and `d2` count as equal.
pub const EQUAL_FACE_TOL: f64 = 1e-12;

/// Fractions `1 - 10^-k` for `k = 1..=k_max`.
pub fn fraction_path(k_max: u32) -> Vec<f64> {
    (1..=k_max).map(|k| 1.0 - 10f64.powi(-(k as i32))).collect()
}

/// Limiting PD of firm 1 under equity cross-ownership.
pub fn limit_pd_suzuki_equity(x: &XosStructure, spec: &BivariateLognormalSpec) -> Result<PdEstimate> {
    pd_analytic_suzuki_limit_region(x, spec, Firm::One)
}

/// One point of an equity fraction path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub ms12: f64,
    pub ms21: f64,
    pub mu_tilde: f64,
    pub sigma_tilde: f64,
    /// Sample `Var(V)/E(V)^2`.
    pub var_over_mean_sq: f64,
    pub p_suzuki: f64,
    pub p_lognormal: f64,
}

/// Matched-lognormal diagnostics along a path of structures.
pub fn equity_path_points(
    x_path: &[XosStructure],
    spec: &BivariateLognormalSpec,
    firm: Firm,
    n: usize,
    seed: u64,
) -> Result<Vec<PathPoint>> {
    x_path
        .iter()
        .map(|x| {
            let c = compare_pd(x, spec, n, seed, firm)?;
            Ok(PathPoint {
                ms12: x.ms12(),
                ms21: x.ms21(),
                mu_tilde: c.matched.mu,
                sigma_tilde: c.matched.sigma(),
                var_over_mean_sq: c.moments.variance / (c.moments.mean * c.moments.mean),
                p_suzuki: c.p_suzuki,
                p_lognormal: c.p_lognormal,
            })
        })
        .collect()
}

/// Matched-lognormal PDs along a path of structures.
pub fn limit_pd_lognormal_equity(
    x_path: &[XosStructure],
    spec: &BivariateLognormalSpec,
    firm: Firm,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(equity_path_points(x_path, spec, firm, n, seed)?
        .into_iter()
        .map(|p| p.p_lognormal)
        .collect())
}

/// Sample estimate of the limit of `Var(V1)/E(V1)^2` under equity
/// cross-ownership: `Var(Y)/E(Y)^2` with `Y = (A1 + A2 - d1 - d2)` on
/// `{A1 + A2 >= d1 + d2}` and zero elsewhere.
pub fn limiting_variance_ratio(
    d1: f64,
    d2: f64,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
) -> f64 {
    let total = d1 + d2;
    let parts = AssetSampler::new(*spec, seed).map_substreams(n, |chunk| {
        let mut m = RunningMoments::default();
        for s in chunk {
            m.push((s.a1 + s.a2 - total).max(0.0));
        }
        m
    });
    let mut m = RunningMoments::default();
    for p in &parts {
        m.merge(p);
    }
    m.variance() / (m.mean * m.mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DebtLimitCase {
    Equal,
    FirmOneSmaller,
    FirmOneLarger,
}

impl DebtLimitCase {
    pub fn of(d1: f64, d2: f64) -> Self {
        if (d1 - d2).abs() <= EQUAL_FACE_TOL * d1.max(d2) {
            DebtLimitCase::Equal
        } else if d1 < d2 {
            DebtLimitCase::FirmOneSmaller
        } else {
            DebtLimitCase::FirmOneLarger
        }
    }
}

/// Law of firm 1's value in the debt-only limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DebtLimitLaw {
    /// `V = A1 + d2`.
    ShiftedLognormal(LognormalSpec),
    /// `V = A1 + d2` if `A2 > d2 - d1`, else `A1 + A2 + d1`.
    Mixture { d1: f64, d2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebtLimit {
    pub case: DebtLimitCase,
    pub law: DebtLimitLaw,
    pub mean: f64,
    pub variance: f64,
    pub matched: LognormalSpec,
    pub pd_suzuki: f64,
    pub pd_lognormal: f64,
}

impl DebtLimit {
    /// Limiting firm value for a given scenario.
    pub fn value(&self, sc: &AssetScenario) -> f64 {
        match self.law {
            DebtLimitLaw::ShiftedLognormal(l) => sc.a1 + l.shift,
            DebtLimitLaw::Mixture { d1, d2 } => {
                if sc.a2 > d2 - d1 {
                    sc.a1 + d2
                } else {
                    sc.a1 + sc.a2 + d1
                }
            }
        }
    }
}

/// `E[A1^j A2^k 1{A2 <= c}]` for a bivariate lognormal.
fn partial_moment(spec: &BivariateLognormalSpec, j: f64, k: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let full = (j * spec.mu1
        + k * spec.mu2
        + 0.5 * (j * j * spec.sig1sq + 2.0 * j * k * spec.sig12 + k * k * spec.sig2sq))
        .exp();
    let z = (c.ln() - spec.mu2 - j * spec.sig12 - k * spec.sig2sq) / spec.sig2sq.sqrt();
    full * normal_cdf(z)
}

/// Limiting distribution of firm 1's value as debt fractions tend to one,
/// with its moments and both limiting PDs.
pub fn debt_limit_distribution(d1: f64, d2: f64, spec: &BivariateLognormalSpec) -> Result<DebtLimit> {
    if !(d1 > 0.0 && d2 > 0.0 && d1.is_finite() && d2.is_finite()) {
        return Err(XosError::InvalidArgument(format!(
            "face values must be positive, got ({d1}, {d2})"
        )));
    }
    let case = DebtLimitCase::of(d1, d2);
    let m1 = spec.marginal1();
    let e1 = m1.mean();

    // V = A1 + g(A2) with g(a) = d2 above c and a + d1 below
    let c = d2 - d1;
    let (mean, variance) = if case == DebtLimitCase::FirmOneSmaller {
        let p = partial_moment(spec, 0.0, 0.0, c);
        let a2_lo = partial_moment(spec, 0.0, 1.0, c);
        let a2sq_lo = partial_moment(spec, 0.0, 2.0, c);
        let a1_lo = partial_moment(spec, 1.0, 0.0, c);
        let a1a2_lo = partial_moment(spec, 1.0, 1.0, c);
        let eg = d2 * (1.0 - p) + a2_lo + d1 * p;
        let eg2 = d2 * d2 * (1.0 - p) + a2sq_lo + 2.0 * d1 * a2_lo + d1 * d1 * p;
        let ea1g = d2 * (e1 - a1_lo) + a1a2_lo + d1 * a1_lo;
        let var = m1.variance() + (eg2 - eg * eg) + 2.0 * (ea1g - e1 * eg);
        (e1 + eg, var)
    } else {
        (e1 + d2, m1.variance())
    };
    let matched = match_lognormal(&MomentPair::new(mean, variance)?);
    let (law, pd_suzuki) = match case {
        DebtLimitCase::FirmOneSmaller => (DebtLimitLaw::Mixture { d1, d2 }, 0.0),
        DebtLimitCase::Equal => {
            (DebtLimitLaw::ShiftedLognormal(LognormalSpec::new(m1.mu, m1.sig_sq, d2)?), 0.0)
        }
        DebtLimitCase::FirmOneLarger => {
            let l = LognormalSpec::new(m1.mu, m1.sig_sq, d2)?;
            (DebtLimitLaw::ShiftedLognormal(l), l.cdf(d1))
        }
    };
    Ok(DebtLimit {
        case,
        law,
        mean,
        variance,
        matched,
        pd_suzuki,
        pd_lognormal: matched.cdf(d1),
    })
}

/// Whether the lognormal model over- or underestimates the limiting PD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimation {
    Over,
    Under,
}

/// Where the estimation error of the debt-only limit changes sign, for
/// `ln A1 ~ N(mu, sigma^2)` and fixed `d2`.
///
/// With `t = d1 - d2` the comparison reduces to
/// `sigma~ ln t - sigma ln d1` against `sigma~ mu - sigma mu~`; all curve
/// values are kept in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeBoundary {
    pub mu: f64,
    pub sigma: f64,
    pub d2: f64,
    pub mu_tilde: f64,
    pub sigma_tilde: f64,
    pub d1_star: f64,
    pub d1_max: f64,
    pub d1_star_star: f64,
    /// `d1_star - d2`, kept separately for precision.
    pub excess_star: f64,
    pub excess_star_star: f64,
    pub lhs_max: f64,
    pub rhs: f64,
    pub ln_lhs_max: f64,
    pub ln_rhs: f64,
}

impl RegimeBoundary {
    /// `ln LHS(d1)`; `-inf` for `d1 <= d2`.
    pub fn ln_lhs(&self, d1: f64) -> f64 {
        ln_lhs_excess(self.sigma, self.sigma_tilde, self.d2, d1 - self.d2)
    }

    pub fn lhs(&self, d1: f64) -> f64 {
        self.ln_lhs(d1).exp()
    }

    /// `|LHS - RHS| / RHS` at the given excess over `d2`.
    pub fn relative_residual(&self, excess: f64) -> f64 {
        (ln_lhs_excess(self.sigma, self.sigma_tilde, self.d2, excess) - self.ln_rhs)
            .exp_m1()
            .abs()
    }

    /// Limiting PDs `(true, lognormal)` at `d1 > d2`.
    pub fn limiting_pds(&self, d1: f64) -> (f64, f64) {
        let (zt, zl) = self.z_scores(d1);
        (normal_cdf(zt), normal_cdf(zl))
    }

    /// Standardized arguments of the two limiting PDs.
    pub fn z_scores(&self, d1: f64) -> (f64, f64) {
        (
            ((d1 - self.d2).ln() - self.mu) / self.sigma,
            (d1.ln() - self.mu_tilde) / self.sigma_tilde,
        )
    }
}

fn ln_sum_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn ln_lhs_excess(sigma: f64, sigma_tilde: f64, d2: f64, t: f64) -> f64 {
    if !(t > 0.0) {
        return f64::NEG_INFINITY;
    }
    let u = t.ln();
    sigma_tilde * u - sigma * ln_sum_exp(d2.ln(), u)
}

/// Roots `d1* < d1_max < d1**` of `LHS(d1) = RHS`.
pub fn regime_boundary(mu: f64, sigma: f64, d2: f64) -> Result<RegimeBoundary> {
    if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(XosError::InvalidArgument(format!(
            "need finite mu and sigma > 0, got ({mu}, {sigma})"
        )));
    }
    if !(d2 > 0.0) || !d2.is_finite() {
        return Err(XosError::InvalidArgument(format!("d2 must be positive, got {d2}")));
    }
    let sig_sq = sigma * sigma;
    let e1 = (mu + 0.5 * sig_sq).exp();
    let shifted = e1 + d2;
    // Var(A1) / (E(A1) + d2)^2 without forming Var(A1)
    let ratio = sig_sq.exp_m1() * (e1 / shifted).powi(2);
    let st_sq = ratio.ln_1p();
    let sigma_tilde = st_sq.sqrt();
    let mu_tilde = shifted.ln() - 0.5 * st_sq;
    if !(sigma_tilde < sigma) || !(sigma_tilde > 0.0) {
        return Err(XosError::InvalidArgument(format!(
            "matched volatility {sigma_tilde} outside (0, {sigma})"
        )));
    }

    let ln_rhs = sigma_tilde * mu - sigma * mu_tilde;
    let t_max = sigma_tilde / (sigma - sigma_tilde) * d2;
    let d1_max = sigma / (sigma - sigma_tilde) * d2;
    let ln_lhs_max = sigma_tilde * t_max.ln() - sigma * d1_max.ln();

    let g = |u: f64| ln_lhs_excess(sigma, sigma_tilde, d2, u.exp()) - ln_rhs;
    let u_max = t_max.ln();
    if !(g(u_max) > 0.0) {
        return Err(XosError::NoRoot { lo: d2, hi: f64::INFINITY });
    }
    let u_star = bracket_and_bisect(&g, u_max, -1.0).ok_or(XosError::NoRoot { lo: d2, hi: d1_max })?;
    let u_star_star =
        bracket_and_bisect(&g, u_max, 1.0).ok_or(XosError::NoRoot { lo: d1_max, hi: f64::INFINITY })?;
    let excess_star = u_star.exp();
    let excess_star_star = u_star_star.exp();

    Ok(RegimeBoundary {
        mu,
        sigma,
        d2,
        mu_tilde,
        sigma_tilde,
        d1_star: d2 + excess_star,
        d1_max,
        d1_star_star: d2 + excess_star_star,
        excess_star,
        excess_star_star,
        lhs_max: ln_lhs_max.exp(),
        rhs: ln_rhs.exp(),
        ln_lhs_max,
        ln_rhs,
    })
}

/// Root of `g` on the side `dir` of `u0`, where `g(u0) > 0` and `g` falls
/// to negative values far enough away.
fn bracket_and_bisect<G: Fn(f64) -> f64>(g: &G, u0: f64, dir: f64) -> Option<f64> {
    let mut step = 1.0;
    let mut far = u0 + dir * step;
    while g(far) >= 0.0 {
        step *= 2.0;
        if step > 4096.0 {
            return None;
        }
        far = u0 + dir * step;
    }
    let (mut pos, mut neg) = (u0, far);
    for _ in 0..400 {
        let mid = 0.5 * (pos + neg);
        if mid == pos || mid == neg {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return Some(mid);
        }
        if v > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    Some(if g(pos).abs() <= g(neg).abs() { pos } else { neg })
}

/// Whether the lognormal model over- or underestimates the limiting
/// debt-only PD of firm 1.
pub fn classify_limit_estimation(d1: f64, rb: &RegimeBoundary) -> Estimation {
    if DebtLimitCase::of(d1, rb.d2) != DebtLimitCase::FirmOneLarger {
        return Estimation::Over;
    }
    let t = d1 - rb.d2;
    if rb.excess_star < t && t < rb.excess_star_star {
        Estimation::Under
    } else {
        Estimation::Over
    }
}

/// Which kind of cross-ownership is pushed to the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitKind {
    Equity,
    Debt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Expect {
    In(SuzukiArea),
    NotIn(SuzukiArea),
}

impl Expect {
    fn holds(self, area: SuzukiArea) -> bool {
        match self {
            Expect::In(a) => a == area,
            Expect::NotIn(a) => a != area,
        }
    }
}

fn expected_limit_area(kind: LimitKind, d1: f64, d2: f64, sc: &AssetScenario, band: f64) -> Option<Expect> {
    let (a1, a2) = (sc.a1, sc.a2);
    match kind {
        LimitKind::Equity => {
            let gap = a1 + a2 - d1 - d2;
            if gap.abs() <= band {
                None
            } else if gap > 0.0 {
                Some(Expect::In(SuzukiArea::SS))
            } else {
                Some(Expect::NotIn(SuzukiArea::SS))
            }
        }
        LimitKind::Debt => {
            if a1 == 0.0 && a2 == 0.0 {
                return Some(Expect::In(SuzukiArea::DD));
            }
            if a1 + a2 <= band {
                return None;
            }
            match DebtLimitCase::of(d1, d2) {
                DebtLimitCase::Equal => {
                    if a2 == 0.0 {
                        Some(Expect::In(SuzukiArea::SD))
                    } else if a1 == 0.0 {
                        Some(Expect::In(SuzukiArea::DS))
                    } else if a1.min(a2) > band {
                        Some(Expect::In(SuzukiArea::SS))
                    } else {
                        None
                    }
                }
                DebtLimitCase::FirmOneLarger => {
                    let gap = a1 - (d1 - d2);
                    if gap.abs() <= band {
                        None
                    } else if gap < 0.0 {
                        Some(Expect::In(SuzukiArea::DS))
                    } else {
                        Some(Expect::In(SuzukiArea::SS))
                    }
                }
                DebtLimitCase::FirmOneSmaller => {
                    let gap = a2 - (d2 - d1);
                    if gap.abs() <= band {
                        None
                    } else if gap < 0.0 {
                        Some(Expect::In(SuzukiArea::SD))
                    } else {
                        Some(Expect::In(SuzukiArea::SS))
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaLimitReport {
    pub points: usize,
    /// Points far enough from every limit boundary to be checked.
    pub checked: usize,
    /// Checked points whose area at the last path fraction disagrees with
    /// the limit set.
    pub mismatches: Vec<(AssetScenario, SuzukiArea)>,
    /// Points whose membership moves against the expected direction along
    /// the path (`ss` only grows under equity, `dd` only shrinks under debt).
    pub monotonicity_violations: usize,
}

impl AreaLimitReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty() && self.monotonicity_violations == 0
    }
}

/// Checks on a scenario grid that area membership approaches the limit sets
/// along `fraction_path` (symmetric fractions).
pub fn verify_area_limits(
    kind: LimitKind,
    d1: f64,
    d2: f64,
    fraction_path: &[f64],
    grid_steps: usize,
) -> Result<AreaLimitReport> {
    if fraction_path.is_empty() || fraction_path.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(XosError::InvalidArgument(
            "fraction path must be non-empty and strictly increasing".into(),
        ));
    }
    if grid_steps == 0 {
        return Err(XosError::InvalidArgument("grid needs at least one step".into()));
    }
    let structures: Vec<XosStructure> = fraction_path
        .iter()
        .map(|&f| match kind {
            LimitKind::Equity => XosStructure::equity_only(f, f, d1, d2),
            LimitKind::Debt => XosStructure::debt_only(f, f, d1, d2),
        })
        .collect::<Result<_>>()?;
    let last = *fraction_path.last().unwrap();
    let span = 2.0 * (d1 + d2);
    let h = span / grid_steps as f64;

    let mut report = AreaLimitReport {
        points: 0,
        checked: 0,
        mismatches: Vec::new(),
        monotonicity_violations: 0,
    };
    for i in 0..=grid_steps {
        for j in 0..=grid_steps {
            let sc = AssetScenario::new(i as f64 * h, j as f64 * h)?;
            report.points += 1;
            let areas: Vec<SuzukiArea> = structures.iter().map(|x| classify_area(x, &sc)).collect();
            let tracked = match kind {
                LimitKind::Equity => SuzukiArea::SS,
                LimitKind::Debt => SuzukiArea::DD,
            };
            let inside: Vec<bool> = areas.iter().map(|&a| a == tracked).collect();
            let wrong_way = inside.windows(2).any(|w| match kind {
                LimitKind::Equity => w[0] && !w[1],
                LimitKind::Debt => !w[0] && w[1],
            });
            if wrong_way {
                report.monotonicity_violations += 1;
            }
            let band = 10.0 * (1.0 - last) * (d1 + d2 + sc.a1 + sc.a2);
            if let Some(expect) = expected_limit_area(kind, d1, d2, &sc, band) {
                report.checked += 1;
                let got = *areas.last().unwrap();
                if !expect.holds(got) {
                    report.mismatches.push((sc, got));
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::default_risk::estimate_pd_suzuki;
    use crate::distributions::sample_assets;
    use crate::valuation::value_closed_form;

    fn std_spec() -> BivariateLognormalSpec {
        BivariateLognormalSpec::iid_with_mean(1.0, 1.0).unwrap()
    }

    #[test]
    fn path_is_increasing_toward_one() {
        let p = fraction_path(6);
        assert_eq!(p.len(), 6);
        assert!((p[0] - 0.9).abs() < 1e-15);
        assert!((p[5] - 0.999_999).abs() < 1e-15);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn d1_max_trivial_example() {
        // sigma = 1, sigma~ = 0.5, d2 = 1
        assert_eq!(1.0 / (1.0 - 0.5) * 1.0, 2.0);
        let rb = regime_boundary(-0.5, 1.0, 1.0).unwrap();
        assert!((rb.d1_max - rb.d2 * rb.sigma / (rb.sigma - rb.sigma_tilde)).abs() < 1e-14);
    }

    #[test]
    fn roots_match_grid_sign_changes() {
        let rb = regime_boundary(-0.5, 1.0, 1.0).unwrap();
        // sigma~^2 = ln(1 + (e - 1)/4)
        assert!((rb.sigma_tilde.powi(2) - 0.357_374_019_508_788_5).abs() < 1e-12);
        assert!(rb.lhs_max > rb.rhs);
        assert!(rb.d2 < rb.d1_star && rb.d1_star < rb.d1_max && rb.d1_max < rb.d1_star_star);
        assert!(rb.relative_residual(rb.excess_star) <= 1e-10);
        assert!(rb.relative_residual(rb.excess_star_star) <= 1e-10);

        // dense grid oracle for the sign changes of LHS - RHS
        let mut crossings = Vec::new();
        let n = 200_000;
        let hi = 3.0 * rb.d1_star_star;
        let mut prev: Option<(f64, bool)> = None;
        for k in 1..=n {
            let d1 = rb.d2 + (hi - rb.d2) * k as f64 / n as f64;
            let above = rb.lhs(d1) > rb.rhs;
            if let Some((pd, pa)) = prev {
                if pa != above {
                    crossings.push((pd, d1));
                }
            }
            prev = Some((d1, above));
        }
        assert_eq!(crossings.len(), 2);
        assert!(crossings[0].0 <= rb.d1_star && rb.d1_star <= crossings[0].1);
        assert!(crossings[1].0 <= rb.d1_star_star && rb.d1_star_star <= crossings[1].1);
    }

    #[test]
    fn lhs_is_bell_shaped() {
        let rb = regime_boundary(0.3, 0.8, 2.0).unwrap();
        let mut vals = Vec::new();
        for k in 1..=4000 {
            vals.push(rb.ln_lhs(rb.d2 + rb.d1_max * 20.0 * k as f64 / 4000.0));
        }
        let peak = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(vals[..=peak].windows(2).all(|w| w[0] < w[1]));
        assert!(vals[peak..].windows(2).all(|w| w[0] > w[1]));
        assert!(rb.ln_lhs(rb.d2 * (1.0 + 1e-12)) < rb.ln_lhs_max);
        assert!(rb.ln_lhs(1e12) < rb.ln_rhs);
        assert!((rb.ln_lhs(rb.d1_max) - rb.ln_lhs_max).abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let rb = regime_boundary(-0.5, 1.0, 1.0).unwrap();
        assert_eq!(classify_limit_estimation(rb.d2 + 0.5 * rb.excess_star, &rb), Estimation::Over);
        assert_eq!(classify_limit_estimation(rb.d1_max, &rb), Estimation::Under);
        assert_eq!(classify_limit_estimation(10.0 * rb.d1_star_star, &rb), Estimation::Over);
        assert_eq!(classify_limit_estimation(0.5, &rb), Estimation::Over);
        assert_eq!(classify_limit_estimation(1.0, &rb), Estimation::Over);
        for d1 in [1.01, 1.5, 2.0, 3.0, 5.0, 20.0, 100.0] {
            let (pt, pl) = rb.limiting_pds(d1);
            let want = if pl > pt { Estimation::Over } else { Estimation::Under };
            assert_eq!(classify_limit_estimation(d1, &rb), want, "d1 = {d1}");
        }
    }

    #[test]
    fn debt_limit_cases() {
        let s = std_spec();
        let eq = debt_limit_distribution(1.0, 1.0, &s).unwrap();
        assert_eq!(eq.case, DebtLimitCase::Equal);
        assert_eq!(eq.pd_suzuki, 0.0);
        assert!(eq.pd_lognormal > 0.0);
        let sm = debt_limit_distribution(1.0, 2.0, &s).unwrap();
        assert_eq!(sm.case, DebtLimitCase::FirmOneSmaller);
        assert_eq!(sm.pd_suzuki, 0.0);
        assert!(sm.pd_lognormal > 0.0);
        let lg = debt_limit_distribution(2.0, 1.0, &BivariateLognormalSpec::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap())
            .unwrap();
        assert_eq!(lg.case, DebtLimitCase::FirmOneLarger);
        assert_eq!(lg.pd_suzuki, 0.5);
        assert_eq!(DebtLimitCase::of(1.0, 1.0 + 1e-14), DebtLimitCase::Equal);
    }

    #[test]
    fn mixture_moments_match_samples() {
        let spec = BivariateLognormalSpec::new(-0.3, 0.2, 0.8, 0.5, 0.3).unwrap();
        let lim = debt_limit_distribution(0.7, 1.9, &spec).unwrap();
        let xs = sample_assets(&spec, 2_000_000, 12).unwrap();
        let vals: Vec<f64> = xs.iter().map(|s| lim.value(s)).collect();
        let m = RunningMoments::from_slice(&vals);
        assert!(vals.iter().all(|&v| v > 0.7));
        assert!((m.mean - lim.mean).abs() < 4.0 * (lim.variance / vals.len() as f64).sqrt());
        assert!((m.variance() / lim.variance - 1.0).abs() < 0.02);
    }

    #[test]
    fn finite_fractions_approach_debt_limit() {
        let s = std_spec();
        for (d1, d2) in [(2.0, 1.0), (1.0, 1.0), (1.0, 2.0)] {
            let lim = debt_limit_distribution(d1, d2, &s).unwrap();
            let x = XosStructure::debt_only(1.0 - 1e-5, 1.0 - 1e-5, d1, d2).unwrap();
            let est = estimate_pd_suzuki(&x, &s, 200_000, 5, Firm::One).unwrap();
            assert!((est.p - lim.pd_suzuki).abs() <= 4.0 * est.se + 1e-3, "{d1},{d2}: {}", est.p);
            // the limiting value map agrees with the valuation near the limit
            for sc in sample_assets(&s, 2000, 6).unwrap() {
                let v = value_closed_form(&x, &sc).v1;
                assert!((v - lim.value(&sc)).abs() < 1e-3 * (1.0 + v), "{sc:?}");
            }
        }
    }

    #[test]
    fn equity_limit_pd_is_positive_and_matches_high_fraction_mc() {
        let s = std_spec();
        let x = XosStructure::equity_only(0.999, 0.999, 1.0, 1.0).unwrap();
        let lim = limit_pd_suzuki_equity(&x, &s).unwrap();
        assert!(lim.p > 0.0);
        let mc = estimate_pd_suzuki(&x, &s, 400_000, 9, Firm::One).unwrap();
        // the finite-fraction default set is a superset shrinking at rate 1 - m
        assert!((mc.p - lim.p).abs() <= 4.0 * (mc.se + lim.se) + 3e-3, "{} vs {}", mc.p, lim.p);
    }

    #[test]
    fn lognormal_pd_decreases_along_equity_path() {
        let s = std_spec();
        let path: Vec<XosStructure> = [0.0, 0.9, 0.99, 0.999]
            .iter()
            .map(|&f| XosStructure::equity_only(f, f, 1.0, 1.0).unwrap())
            .collect();
        let pds = limit_pd_lognormal_equity(&path, &s, Firm::One, 1_000_000, 3).unwrap();
        assert!(pds.windows(2).all(|w| w[1] < w[0]), "{pds:?}");
        // Merton start: V1 = A1, matched to a sample of A1
        assert!((pds[0] - normal_cdf(0.5)).abs() < 5e-3);
        let lim = limit_pd_suzuki_equity(&path[3], &s).unwrap();
        assert!(pds[3] < lim.p);
    }

    #[test]
    fn matched_parameters_along_path() {
        let s = std_spec();
        let path: Vec<XosStructure> = fraction_path(6)
            .iter()
            .map(|&f| XosStructure::equity_only(f, f, 1.0, 1.0).unwrap())
            .collect();
        let pts = equity_path_points(&path, &s, Firm::One, 200_000, 17).unwrap();
        assert!(pts.windows(2).all(|w| w[1].mu_tilde > w[0].mu_tilde));
        assert!(pts.iter().all(|p| p.sigma_tilde < 3.0));
        let limit = limiting_variance_ratio(1.0, 1.0, &s, 200_000, 17);
        let last = pts.last().unwrap().var_over_mean_sq;
        assert!((last / limit - 1.0).abs() < 1e-3, "{last} vs {limit}");
    }

    #[test]
    fn equity_area_limits() {
        let r = verify_area_limits(LimitKind::Equity, 1.0, 1.0, &fraction_path(6), 80).unwrap();
        assert!(r.is_ok(), "{r:?}");
        assert!(r.checked > r.points / 2);
        let x = XosStructure::equity_only(0.9, 0.9, 1.0, 1.0).unwrap();
        assert_eq!(classify_area(&x, &AssetScenario::new(3.0, 0.0).unwrap()), SuzukiArea::SS);
    }

    #[test]
    fn debt_area_limits() {
        for (d1, d2) in [(1.0, 1.0), (2.0, 1.0), (1.0, 2.5)] {
            let r = verify_area_limits(LimitKind::Debt, d1, d2, &fraction_path(6), 80).unwrap();
            assert!(r.is_ok(), "({d1},{d2}): {r:?}");
        }
        let sc = AssetScenario::new(0.1, 0.1).unwrap();
        let areas: Vec<SuzukiArea> = std::iter::once(0.5)
            .chain(fraction_path(6))
            .map(|f| classify_area(&XosStructure::debt_only(f, f, 1.0, 1.0).unwrap(), &sc))
            .collect();
        assert_eq!(areas[0], SuzukiArea::DD);
        assert_ne!(*areas.last().unwrap(), SuzukiArea::DD);
        for t in [0.01, 0.3, 2.0] {
            let sc = AssetScenario::new(t, 0.0).unwrap();
            let x = XosStructure::debt_only(0.9999, 0.9999, 1.0, 1.0).unwrap();
            assert_eq!(classify_area(&x, &sc), SuzukiArea::SD);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(regime_boundary(0.0, 0.0, 1.0).is_err());
        assert!(regime_boundary(0.0, 1.0, -1.0).is_err());
        assert!(debt_limit_distribution(0.0, 1.0, &std_spec()).is_err());
        assert!(verify_area_limits(LimitKind::Debt, 1.0, 1.0, &[0.9, 0.5], 10).is_err());
    }
}
