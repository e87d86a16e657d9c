//! Default probabilities under the cross-ownership model and under a
//! moment-matched lognormal firm value, and their relative risk.

use crate::distributions::{
    lognormal_cdf, match_lognormal, AssetSampler, BivariateLognormalSpec, LognormalSpec,
    MomentPair, RunningMoments,
};
use crate::error::{Result, XosError};
use crate::normal::{normal_cdf, normal_pdf};
use crate::valuation::{classify_area, value_closed_form, AssetScenario, Firm, XosStructure};

/// Default sample size for Monte Carlo evaluation of the limiting region.
pub const LIMIT_REGION_MC_N: usize = 1_000_000;
pub const LIMIT_REGION_MC_SEED: u64 = 0x5e_ed11;

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdEstimate {
    pub p: f64,
    pub se: f64,
    pub n: usize,
}

impl PdEstimate {
    pub fn from_count(defaults: u64, n: usize) -> Self {
        let p = defaults as f64 / n as f64;
        Self {
            p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }
}

/// Both default probabilities computed from one common sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdComparison {
    pub p_suzuki: f64,
    pub p_lognormal: f64,
    /// `p_lognormal / p_suzuki`, possibly `+inf`.
    pub rr: f64,
    pub n: usize,
    pub se_suzuki: f64,
    pub moments: MomentPair,
    pub matched: LognormalSpec,
}

impl PdComparison {
    /// Probabilities rounded to `decimals` places and the relative risk
    /// recomputed from the rounded values.
    pub fn rounded(&self, decimals: u32) -> (f64, f64, f64) {
        let ps = round_to(self.p_suzuki, decimals);
        let pl = round_to(self.p_lognormal, decimals);
        (ps, pl, relative_risk(ps, pl))
    }
}

pub fn round_to(x: f64, decimals: u32) -> f64 {
    let f = 10f64.powi(decimals as i32);
    (x * f).round() / f
}

/// Ratio of lognormal-model PD to cross-ownership PD.
///
/// `1` when both vanish, `+inf` when only the cross-ownership PD vanishes.
pub fn relative_risk(p_s: f64, p_l: f64) -> f64 {
    if p_s > 0.0 {
        p_l / p_s
    } else if p_l > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    defaults: u64,
    values: RunningMoments,
}

fn chunk_stats(x: &XosStructure, chunk: &[AssetScenario], firm: Firm) -> ChunkStats {
    let mut st = ChunkStats::default();
    for sc in chunk {
        let area = classify_area(x, sc);
        if area.defaults(firm) {
            st.defaults += 1;
        }
        st.values.push(crate::valuation::value_on_area(x, sc, area).firm_value(firm));
    }
    st
}

fn simulate(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
    firm: Firm,
) -> Result<ChunkStats> {
    if n == 0 {
        return Err(XosError::InvalidArgument("sample size must be at least 1".into()));
    }
    let parts = AssetSampler::new(*spec, seed).map_substreams(n, |chunk| chunk_stats(x, chunk, firm));
    let mut total = ChunkStats::default();
    for p in &parts {
        total.defaults += p.defaults;
        total.values.merge(&p.values);
    }
    Ok(total)
}

/// Fraction of simulated scenarios in which `firm` defaults.
pub fn estimate_pd_suzuki(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
    firm: Firm,
) -> Result<PdEstimate> {
    let st = simulate(x, spec, n, seed, firm)?;
    Ok(PdEstimate::from_count(st.defaults, n))
}

/// PD of a lognormal matched to the sample mean and variance of the firm
/// value, evaluated at the firm's face value.
pub fn estimate_pd_lognormal(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
    firm: Firm,
) -> Result<f64> {
    Ok(compare_pd(x, spec, n, seed, firm)?.p_lognormal)
}

/// Both PDs and their relative risk from the same simulated scenarios.
pub fn compare_pd(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
    firm: Firm,
) -> Result<PdComparison> {
    let st = simulate(x, spec, n, seed, firm)?;
    let est = PdEstimate::from_count(st.defaults, n);
    let var = st.values.variance();
    if !(var > 0.0) {
        return Err(XosError::DegenerateVariance);
    }
    let moments = MomentPair::new(st.values.mean, var)?;
    let matched = match_lognormal(&moments);
    let p_l = lognormal_cdf(&matched, x.face_value(firm));
    Ok(PdComparison {
        p_suzuki: est.p,
        p_lognormal: p_l,
        rr: relative_risk(est.p, p_l),
        n,
        se_suzuki: est.se,
        moments,
        matched,
    })
}

/// Firm values on an explicit list of scenarios.
pub fn firm_values(x: &XosStructure, scenarios: &[AssetScenario], firm: Firm) -> Vec<f64> {
    scenarios
        .iter()
        .map(|sc| value_closed_form(x, sc).firm_value(firm))
        .collect()
}

/// How to evaluate the probability of the limiting default region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionMethod {
    MonteCarlo { n: usize, seed: u64 },
    /// One-dimensional quadrature over the conditional normal of `ln A2`.
    Quadrature,
}

impl Default for RegionMethod {
    fn default() -> Self {
        RegionMethod::MonteCarlo {
            n: LIMIT_REGION_MC_N,
            seed: LIMIT_REGION_MC_SEED,
        }
    }
}

/// Limiting PD of `firm` as equity cross-ownership fractions tend to one:
/// the probability of `{a_i < d_i, a_1 + a_2 <= d_1 + d_2}`.
pub fn pd_analytic_suzuki_limit_region(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    firm: Firm,
) -> Result<PdEstimate> {
    pd_limit_region_with(x, spec, firm, RegionMethod::default())
}

pub fn pd_limit_region_with(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    firm: Firm,
    method: RegionMethod,
) -> Result<PdEstimate> {
    // relabel so the firm of interest is firm 1
    let (d_own, d_other, spec) = match firm {
        Firm::One => (x.d1(), x.d2(), *spec),
        Firm::Two => (
            x.d2(),
            x.d1(),
            BivariateLognormalSpec::new(spec.mu2, spec.mu1, spec.sig2sq, spec.sig1sq, spec.sig12)?,
        ),
    };
    match method {
        RegionMethod::MonteCarlo { n, seed } => {
            if n == 0 {
                return Err(XosError::InvalidArgument("sample size must be at least 1".into()));
            }
            let total = d_own + d_other;
            let counts = AssetSampler::new(spec, seed).map_substreams(n, |chunk| {
                chunk
                    .iter()
                    .filter(|s| s.a1 < d_own && s.a1 + s.a2 <= total)
                    .count() as u64
            });
            Ok(PdEstimate::from_count(counts.iter().sum(), n))
        }
        RegionMethod::Quadrature => Ok(PdEstimate {
            p: limit_region_quadrature(d_own, d_other, &spec),
            se: 0.0,
            n: 0,
        }),
    }
}

/// `P(A1 < d1, A1 + A2 <= d1 + d2)` by integrating over `z = (ln A1 - mu1)/sigma1`.
fn limit_region_quadrature(d1: f64, d2: f64, spec: &BivariateLognormalSpec) -> f64 {
    let s1 = spec.sig1sq.sqrt();
    let s2 = spec.sig2sq.sqrt();
    let rho = spec.correlation().clamp(-1.0, 1.0);
    let cond_sd = s2 * (1.0 - rho * rho).max(0.0).sqrt();
    let total = d1 + d2;
    let z_top = (d1.ln() - spec.mu1) / s1;
    let z_lo = -40.0_f64;
    if z_top <= z_lo {
        return 0.0;
    }
    let integrand = |z: f64| {
        let a1 = (spec.mu1 + s1 * z).exp();
        let room = total - a1;
        let cond_mean = spec.mu2 + rho * s2 * z;
        let inner = if cond_sd > 0.0 {
            normal_cdf((room.ln() - cond_mean) / cond_sd)
        } else if cond_mean.exp() <= room {
            1.0
        } else {
            0.0
        };
        normal_pdf(z) * inner
    };
    adaptive_simpson(&integrand, z_lo, z_top.min(40.0), 1e-13, 50)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    // split into panels so narrow features are not skipped by the first estimate
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, m, fm, whole, tol / panels as f64, depth)
        })
        .sum()
}
