//! Two-firm valuation under cross-ownership of equity and debt.
//!
//! Each firm holds exogenous assets `a_i`, a fraction `M^s_ij` of the other
//! firm's equity and a fraction `M^d_ij` of the other firm's recovery value of
//! debt. At maturity the recovery values `r_i` and equity values `s_i` solve
//!
//! ```text
//! r_i = min(d_i, a_i + M^s_ij s_j + M^d_ij r_j)
//! s_i = (a_i + M^s_ij s_j + M^d_ij r_j - d_i)^+
//! ```
//!
//! The solution is piecewise linear in `(a_1, a_2)` over four solvency regions
//! ([`SuzukiArea`]). [`value_closed_form`] evaluates the explicit solution and
//! [`value_fixed_point`] solves the system by Picard iteration; the two are
//! independent routes to the same [`ClaimVector`].

use std::fmt;

use crate::error::{Result, XosError};

/// Fractions this close to 1 are rejected: `1/(1 - M M)` blows up.
pub const FRACTION_CEILING: f64 = 1.0 - 1e-15;

pub const DEFAULT_FP_TOL: f64 = 1e-12;
pub const DEFAULT_FP_MAX_ITER: usize = 1_000_000;

/// One of the two firms in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub fn index(self) -> usize {
        match self {
            Firm::One => 0,
            Firm::Two => 1,
        }
    }

    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Firm::One),
            2 => Ok(Firm::Two),
            _ => Err(XosError::InvalidArgument(format!(
                "firm must be 1 or 2, got {n}"
            ))),
        }
    }
}

/// Classification of a cross-ownership pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XosType {
    /// Both equity fractions positive, no debt holdings.
    EquityOnly,
    /// Both debt fractions positive, no equity holdings.
    DebtOnly,
    /// All four fractions positive.
    Both,
    /// Any other non-zero pattern, e.g. firm 1 holds equity of firm 2 while
    /// firm 2 holds debt of firm 1. The closed forms cover these unchanged.
    Mixed,
    /// No cross-ownership at all: two independent Merton firms.
    None,
}

impl XosType {
    pub fn name(self) -> &'static str {
        match self {
            XosType::EquityOnly => "equity-only",
            XosType::DebtOnly => "debt-only",
            XosType::Both => "equity-and-debt",
            XosType::Mixed => "mixed",
            XosType::None => "none",
        }
    }
}

impl fmt::Display for XosType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cross-ownership fractions plus face values of the zero-coupon debt.
///
/// `ms12` is the fraction of firm 2's equity held by firm 1, `md21` the
/// fraction of firm 1's debt held by firm 2, and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XosStructure {
    ms12: f64,
    ms21: f64,
    md12: f64,
    md21: f64,
    d1: f64,
    d2: f64,
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(XosError::InvalidStructure(format!(
            "{name} must be a finite non-negative fraction, got {v}"
        )));
    }
    if v >= FRACTION_CEILING {
        return Err(XosError::InvalidStructure(format!(
            "{name} must be strictly below 1, got {v}"
        )));
    }
    Ok(())
}

fn check_face_value(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(XosError::InvalidStructure(format!(
            "{name} must be a finite positive face value, got {v}"
        )));
    }
    Ok(())
}

impl XosStructure {
    pub fn new(ms12: f64, ms21: f64, md12: f64, md21: f64, d1: f64, d2: f64) -> Result<Self> {
        check_fraction("ms12", ms12)?;
        check_fraction("ms21", ms21)?;
        check_fraction("md12", md12)?;
        check_fraction("md21", md21)?;
        check_face_value("d1", d1)?;
        check_face_value("d2", d2)?;
        Ok(Self {
            ms12,
            ms21,
            md12,
            md21,
            d1,
            d2,
        })
    }

    pub fn equity_only(ms12: f64, ms21: f64, d1: f64, d2: f64) -> Result<Self> {
        Self::new(ms12, ms21, 0.0, 0.0, d1, d2)
    }

    pub fn debt_only(md12: f64, md21: f64, d1: f64, d2: f64) -> Result<Self> {
        Self::new(0.0, 0.0, md12, md21, d1, d2)
    }

    /// No cross-ownership: each firm is a stand-alone Merton firm.
    pub fn merton(d1: f64, d2: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, 0.0, d1, d2)
    }

    pub fn ms12(&self) -> f64 {
        self.ms12
    }
    pub fn ms21(&self) -> f64 {
        self.ms21
    }
    pub fn md12(&self) -> f64 {
        self.md12
    }
    pub fn md21(&self) -> f64 {
        self.md21
    }
    pub fn d1(&self) -> f64 {
        self.d1
    }
    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn face_value(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.d1,
            Firm::Two => self.d2,
        }
    }

    /// Same fractions with different face values.
    pub fn with_face_values(&self, d1: f64, d2: f64) -> Result<Self> {
        Self::new(self.ms12, self.ms21, self.md12, self.md21, d1, d2)
    }

    pub fn xos_type(&self) -> XosType {
        let s = (self.ms12 > 0.0, self.ms21 > 0.0);
        let d = (self.md12 > 0.0, self.md21 > 0.0);
        match (s, d) {
            ((false, false), (false, false)) => XosType::None,
            ((true, true), (false, false)) => XosType::EquityOnly,
            ((false, false), (true, true)) => XosType::DebtOnly,
            ((true, true), (true, true)) => XosType::Both,
            _ => XosType::Mixed,
        }
    }
}

/// Exogenous asset values of both firms at maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssetScenario {
    pub a1: f64,
    pub a2: f64,
}

impl AssetScenario {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite()) || a1 < 0.0 || a2 < 0.0 {
            return Err(XosError::InvalidScenario(format!(
                "asset values must be finite and non-negative, got ({a1}, {a2})"
            )));
        }
        Ok(Self { a1, a2 })
    }
}

/// Solvency region of the pair: first letter firm 1, second letter firm 2,
/// `s` solvent and `d` in default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuzukiArea {
    SS,
    SD,
    DS,
    DD,
}

impl SuzukiArea {
    pub const ALL: [SuzukiArea; 4] = [SuzukiArea::SS, SuzukiArea::SD, SuzukiArea::DS, SuzukiArea::DD];

    pub fn label(self) -> &'static str {
        match self {
            SuzukiArea::SS => "ss",
            SuzukiArea::SD => "sd",
            SuzukiArea::DS => "ds",
            SuzukiArea::DD => "dd",
        }
    }

    /// True when the area puts `firm` in default.
    pub fn defaults(self, firm: Firm) -> bool {
        match firm {
            Firm::One => matches!(self, SuzukiArea::DS | SuzukiArea::DD),
            Firm::Two => matches!(self, SuzukiArea::SD | SuzukiArea::DD),
        }
    }
}

impl fmt::Display for SuzukiArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Recovery values, equity values and firm values of both firms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimVector {
    pub r1: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl ClaimVector {
    pub fn firm_value(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.v1,
            Firm::Two => self.v2,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.r1, self.r2, self.s1, self.s2, self.v1, self.v2]
    }
}

/// Truth values of the four inequality pairs that define the areas.
///
/// Exposed so the partition property can be checked directly: for every
/// scenario exactly one entry is `true`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaMembership {
    pub ss: bool,
    pub sd: bool,
    pub ds: bool,
    pub dd: bool,
}

impl AreaMembership {
    pub fn count(&self) -> usize {
        [self.ss, self.sd, self.ds, self.dd].iter().filter(|&&b| b).count()
    }
}

/// Evaluates each area's defining inequalities independently.
pub fn area_membership(x: &XosStructure, sc: &AssetScenario) -> AreaMembership {
    let (ms12, ms21, md12, md21) = (x.ms12, x.ms21, x.md12, x.md21);
    let (d1, d2) = (x.d1, x.d2);
    let (a1, a2) = (sc.a1, sc.a2);

    // firm 1 solvent given firm 2 solvent / firm 2 solvent given firm 1 solvent
    let f1_ss = a1 + ms12 * a2 >= (1.0 - ms12 * md21) * d1 + (ms12 - md12) * d2;
    let f2_ss = ms21 * a1 + a2 >= (ms21 - md21) * d1 + (1.0 - ms21 * md12) * d2;
    // the same conditions when the other firm is in default
    let f1_sd = a1 + md12 * a2 >= (1.0 - md12 * md21) * d1;
    let f2_ds = md21 * a1 + a2 >= (1.0 - md12 * md21) * d2;

    AreaMembership {
        ss: f1_ss && f2_ss,
        sd: f1_sd && !f2_ss,
        ds: !f1_ss && f2_ds,
        dd: !f1_sd && !f2_ds,
    }
}

/// Solvency region of a scenario, decided in the order ss, sd, ds, dd.
pub fn classify_area(x: &XosStructure, sc: &AssetScenario) -> SuzukiArea {
    let m = area_membership(x, sc);
    if m.ss {
        SuzukiArea::SS
    } else if m.sd {
        SuzukiArea::SD
    } else if m.ds {
        SuzukiArea::DS
    } else {
        SuzukiArea::DD
    }
}

/// Closed-form claim values on the scenario's area.
pub fn value_closed_form(x: &XosStructure, sc: &AssetScenario) -> ClaimVector {
    value_on_area(x, sc, classify_area(x, sc))
}

/// Claim values from the affine formulas of a given area.
///
/// Only meaningful when `area` is the scenario's actual area (or the
/// scenario lies on that area's boundary, where adjacent formulas agree).
pub fn value_on_area(x: &XosStructure, sc: &AssetScenario, area: SuzukiArea) -> ClaimVector {
    let (ms12, ms21, md12, md21) = (x.ms12, x.ms21, x.md12, x.md21);
    let (d1, d2) = (x.d1, x.d2);
    let (a1, a2) = (sc.a1, sc.a2);

    match area {
        SuzukiArea::SS => {
            let k = 1.0 - ms12 * ms21;
            let s1 = (a1 + ms12 * a2 + (ms12 * md21 - 1.0) * d1 + (md12 - ms12) * d2) / k;
            let s2 = (ms21 * a1 + a2 + (md21 - ms21) * d1 + (ms21 * md12 - 1.0) * d2) / k;
            let v1 = (a1 + ms12 * a2 + ms12 * (md21 - ms21) * d1 + (md12 - ms12) * d2) / k;
            let v2 = (ms21 * a1 + a2 + (md21 - ms21) * d1 + ms21 * (md12 - ms12) * d2) / k;
            ClaimVector {
                r1: d1,
                r2: d2,
                s1: s1.max(0.0),
                s2: s2.max(0.0),
                v1,
                v2,
            }
        }
        SuzukiArea::SD => {
            let k = 1.0 - ms21 * md12;
            let s1 = (a1 + md12 * a2 + (md12 * md21 - 1.0) * d1) / k;
            let r2 = (ms21 * a1 + a2 + (md21 - ms21) * d1) / k;
            let v1 = (a1 + md12 * a2 + md12 * (md21 - ms21) * d1) / k;
            ClaimVector {
                r1: d1,
                r2: r2.min(d2),
                s1: s1.max(0.0),
                s2: 0.0,
                v1,
                v2: r2,
            }
        }
        SuzukiArea::DS => {
            let k = 1.0 - ms12 * md21;
            let r1 = (a1 + ms12 * a2 + (md12 - ms12) * d2) / k;
            let s2 = (md21 * a1 + a2 + (md12 * md21 - 1.0) * d2) / k;
            let v2 = (md21 * a1 + a2 + md21 * (md12 - ms12) * d2) / k;
            ClaimVector {
                r1: r1.min(d1),
                r2: d2,
                s1: 0.0,
                s2: s2.max(0.0),
                v1: r1,
                v2,
            }
        }
        SuzukiArea::DD => {
            let k = 1.0 - md12 * md21;
            let r1 = (a1 + md12 * a2) / k;
            let r2 = (md21 * a1 + a2) / k;
            ClaimVector {
                r1: r1.min(d1),
                r2: r2.min(d2),
                s1: 0.0,
                s2: 0.0,
                v1: r1,
                v2: r2,
            }
        }
    }
}

/// Result of the fixed-point solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub claims: ClaimVector,
    /// Number of updates that moved the state by more than the tolerance.
    pub iterations: usize,
}

/// Solves the clearing system by Jacobi iteration from `r = s = 0`.
///
/// The iteration is monotone non-decreasing and bounded, so it converges for
/// all fractions below one; the rate is governed by the product of the
/// largest fractions held by each firm.
pub fn value_fixed_point(
    x: &XosStructure,
    sc: &AssetScenario,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointSolution> {
    if !(tol > 0.0) {
        return Err(XosError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let d = [x.d1, x.d2];
    let a = [sc.a1, sc.a2];
    let ms = [x.ms12, x.ms21];
    let md = [x.md12, x.md21];

    let mut r = [0.0_f64; 2];
    let mut s = [0.0_f64; 2];
    let mut change = f64::INFINITY;

    for iter in 0..max_iter {
        let mut next_r = [0.0; 2];
        let mut next_s = [0.0; 2];
        for i in 0..2 {
            let j = 1 - i;
            let total = a[i] + ms[i] * s[j] + md[i] * r[j];
            next_r[i] = total.min(d[i]);
            next_s[i] = (total - d[i]).max(0.0);
        }
        change = (0..2)
            .map(|i| (next_r[i] - r[i]).abs().max((next_s[i] - s[i]).abs()))
            .fold(0.0, f64::max);
        r = next_r;
        s = next_s;
        if change <= tol {
            let v1 = a[0] + ms[0] * s[1] + md[0] * r[1];
            let v2 = a[1] + ms[1] * s[0] + md[1] * r[0];
            return Ok(FixedPointSolution {
                claims: ClaimVector {
                    r1: r[0],
                    r2: r[1],
                    s1: s[0],
                    s2: s[1],
                    v1,
                    v2,
                },
                iterations: iter,
            });
        }
    }
    Err(XosError::NonConvergence {
        max_iter,
        last_change: change,
    })
}

/// Firm value of firm 1 under cross-ownership of equity only.
pub fn firm_value_equity_only(x: &XosStructure, sc: &AssetScenario) -> Result<f64> {
    if x.xos_type() != XosType::EquityOnly {
        return Err(XosError::WrongXosType {
            expected: XosType::EquityOnly.name(),
            actual: x.xos_type().name(),
        });
    }
    let (m12, m21) = (x.ms12, x.ms21);
    let (a1, a2) = (sc.a1, sc.a2);
    let v = match classify_area(x, sc) {
        SuzukiArea::SS => (a1 + m12 * a2 - m12 * m21 * x.d1 - m12 * x.d2) / (1.0 - m12 * m21),
        SuzukiArea::SD | SuzukiArea::DD => a1,
        SuzukiArea::DS => a1 + m12 * a2 - m12 * x.d2,
    };
    Ok(v)
}

/// Firm value of firm 1 under cross-ownership of debt only.
pub fn firm_value_debt_only(x: &XosStructure, sc: &AssetScenario) -> Result<f64> {
    if x.xos_type() != XosType::DebtOnly {
        return Err(XosError::WrongXosType {
            expected: XosType::DebtOnly.name(),
            actual: x.xos_type().name(),
        });
    }
    let (m12, m21) = (x.md12, x.md21);
    let (a1, a2) = (sc.a1, sc.a2);
    let v = match classify_area(x, sc) {
        SuzukiArea::SS | SuzukiArea::DS => a1 + m12 * x.d2,
        SuzukiArea::SD => a1 + m12 * a2 + m12 * m21 * x.d1,
        SuzukiArea::DD => (a1 + m12 * a2) / (1.0 - m12 * m21),
    };
    Ok(v)
}

/// Default indicator: firm `i` defaults iff `v_i < d_i`.
pub fn is_default(x: &XosStructure, sc: &AssetScenario, firm: Firm) -> bool {
    classify_area(x, sc).defaults(firm)
}

/// Coefficients `(alpha, beta, gamma)` of `v1 = alpha a1 + beta a2 + gamma`
/// on the given area.
pub fn firm_one_affine(x: &XosStructure, area: SuzukiArea) -> (f64, f64, f64) {
    let (ms12, ms21, md12, md21) = (x.ms12, x.ms21, x.md12, x.md21);
    let (d1, d2) = (x.d1, x.d2);
    match area {
        SuzukiArea::SS => {
            let k = 1.0 - ms12 * ms21;
            (1.0 / k, ms12 / k, (ms12 * (md21 - ms21) * d1 + (md12 - ms12) * d2) / k)
        }
        SuzukiArea::SD => {
            let k = 1.0 - ms21 * md12;
            (1.0 / k, md12 / k, md12 * (md21 - ms21) * d1 / k)
        }
        SuzukiArea::DS => {
            let k = 1.0 - ms12 * md21;
            (1.0 / k, ms12 / k, (md12 - ms12) * d2 / k)
        }
        SuzukiArea::DD => {
            let k = 1.0 - md12 * md21;
            (1.0 / k, md12 / k, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sc(a1: f64, a2: f64) -> AssetScenario {
        AssetScenario::new(a1, a2).unwrap()
    }

    #[test]
    fn classify_examples() {
        let eq = XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(classify_area(&eq, &sc(2.0, 2.0)), SuzukiArea::SS);

        let debt = XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(classify_area(&debt, &sc(0.2, 0.2)), SuzukiArea::DD);

        let merton = XosStructure::merton(1.0, 1.0).unwrap();
        assert_eq!(classify_area(&merton, &sc(0.5, 2.0)), SuzukiArea::DS);
    }

    #[test]
    fn closed_form_examples() {
        let eq = XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap();
        let c = value_closed_form(&eq, &sc(2.0, 2.0));
        for (got, want) in c.as_array().iter().zip([1.0, 1.0, 2.0, 2.0, 3.0, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }

        let debt = XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap();
        let c = value_closed_form(&debt, &sc(0.2, 0.2));
        assert_abs_diff_eq!(c.r1, 0.4, epsilon = 1e-14);
        assert_eq!(c.s1, 0.0);
        assert_abs_diff_eq!(c.v1, 0.4, epsilon = 1e-14);

        let merton = XosStructure::merton(1.0, 1.0).unwrap();
        let c = value_closed_form(&merton, &sc(0.5, 3.0));
        assert_eq!(c.as_array(), [0.5, 1.0, 0.0, 2.0, 0.5, 3.0]);
    }

    #[test]
    fn fixed_point_matches_examples() {
        let cases = [
            (XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap(), sc(2.0, 2.0)),
            (XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap(), sc(0.2, 0.2)),
            (XosStructure::merton(1.0, 1.0).unwrap(), sc(0.5, 3.0)),
        ];
        for (x, s) in cases {
            let fp = value_fixed_point(&x, &s, DEFAULT_FP_TOL, DEFAULT_FP_MAX_ITER).unwrap();
            let cf = value_closed_form(&x, &s);
            for (a, b) in fp.claims.as_array().iter().zip(cf.as_array()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn merton_fixed_point_converges_in_one_iteration() {
        let x = XosStructure::merton(1.3, 0.7).unwrap();
        for (a1, a2) in [(0.0, 0.0), (0.4, 5.0), (2.0, 0.1)] {
            let fp = value_fixed_point(&x, &sc(a1, a2), 1e-12, 10).unwrap();
            assert!(fp.iterations <= 1, "iterations = {}", fp.iterations);
        }
    }

    #[test]
    fn heavy_coupling_satisfies_balance() {
        let x = XosStructure::new(0.9, 0.9, 0.9, 0.9, 1.0, 1.0).unwrap();
        let fp = value_fixed_point(&x, &sc(1.0, 1.0), 1e-12, DEFAULT_FP_MAX_ITER).unwrap();
        let c = fp.claims;
        assert_abs_diff_eq!(c.r1 + c.s1, 1.0 + 0.9 * c.s2 + 0.9 * c.r2, epsilon = 1e-10);
        assert_abs_diff_eq!(c.r2 + c.s2, 1.0 + 0.9 * c.s1 + 0.9 * c.r1, epsilon = 1e-10);
    }

    #[test]
    fn fixed_point_reports_non_convergence() {
        let x = XosStructure::new(0.9, 0.9, 0.9, 0.9, 1.0, 1.0).unwrap();
        let err = value_fixed_point(&x, &sc(1.0, 1.0), 1e-12, 3).unwrap_err();
        assert!(matches!(err, XosError::NonConvergence { max_iter: 3, .. }));
        assert!(value_fixed_point(&x, &sc(1.0, 1.0), 0.0, 3).is_err());
    }

    #[test]
    fn equity_only_firm_value() {
        let x = XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(firm_value_equity_only(&x, &sc(2.0, 2.0)).unwrap(), 3.0, epsilon = 1e-14);
        assert_eq!(firm_value_equity_only(&x, &sc(0.0, 0.0)).unwrap(), 0.0);

        // (1.8, 0.1): firm 1 solvent on its own, firm 2 short
        let s = sc(1.8, 0.1);
        assert_eq!(classify_area(&x, &s), SuzukiArea::SD);
        assert_eq!(firm_value_equity_only(&x, &s).unwrap(), 1.8);

        let debt = XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            firm_value_equity_only(&debt, &s),
            Err(XosError::WrongXosType { .. })
        ));
    }

    #[test]
    fn debt_only_firm_value() {
        let x = XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(firm_value_debt_only(&x, &sc(0.2, 0.2)).unwrap(), 0.4, epsilon = 1e-14);
        assert_eq!(firm_value_debt_only(&x, &sc(0.0, 0.0)).unwrap(), 0.0);
        let s = sc(3.0, 2.5);
        assert_eq!(classify_area(&x, &s), SuzukiArea::SS);
        assert_eq!(firm_value_debt_only(&x, &s).unwrap(), 3.0 + 0.5 * 1.0);

        let eq = XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(firm_value_debt_only(&eq, &s).is_err());
    }

    #[test]
    fn default_indicator_examples() {
        let merton = XosStructure::merton(1.0, 1.0).unwrap();
        assert!(is_default(&merton, &sc(0.5, 2.0), Firm::One));
        let debt = XosStructure::debt_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(is_default(&debt, &sc(0.2, 0.2), Firm::One));
        let eq = XosStructure::equity_only(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(!is_default(&eq, &sc(2.0, 2.0), Firm::Two));
    }

    #[test]
    fn structure_validation() {
        assert!(XosStructure::new(1.0, 0.5, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(XosStructure::new(1.0 - 1e-16, 0.5, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(XosStructure::new(-0.1, 0.5, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(XosStructure::new(0.1, 0.5, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(XosStructure::new(0.1, f64::NAN, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(XosStructure::new(0.999_999, 0.5, 0.0, 0.0, 1.0, 1.0).is_ok());
        assert!(AssetScenario::new(-1.0, 0.0).is_err());
        assert!(AssetScenario::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn xos_type_classification() {
        let t = |a, b, c, d| XosStructure::new(a, b, c, d, 1.0, 1.0).unwrap().xos_type();
        assert_eq!(t(0.2, 0.3, 0.0, 0.0), XosType::EquityOnly);
        assert_eq!(t(0.0, 0.0, 0.2, 0.3), XosType::DebtOnly);
        assert_eq!(t(0.1, 0.1, 0.1, 0.1), XosType::Both);
        assert_eq!(t(0.0, 0.0, 0.0, 0.0), XosType::None);
        assert_eq!(t(0.3, 0.0, 0.0, 0.2), XosType::Mixed);
        assert_eq!(t(0.0, 0.3, 0.2, 0.0), XosType::Mixed);
        assert_eq!(t(0.1, 0.1, 0.1, 0.0), XosType::Mixed);
    }

    #[test]
    fn vanishing_default_area_for_firm_one() {
        // d1 <= md12 d2: firm 1 can never default alone
        let x = XosStructure::debt_only(0.8, 0.3, 1.0, 2.0).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                let s = sc(i as f64 * 0.1, j as f64 * 0.1);
                assert_ne!(classify_area(&x, &s), SuzukiArea::DS);
            }
        }
    }

    #[test]
    fn affine_form_matches_closed_form() {
        let x = XosStructure::new(0.3, 0.6, 0.2, 0.45, 1.2, 0.8).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let s = sc(i as f64 * 0.07, j as f64 * 0.09);
                let area = classify_area(&x, &s);
                let (al, be, ga) = firm_one_affine(&x, area);
                assert_abs_diff_eq!(al * s.a1 + be * s.a2 + ga, value_closed_form(&x, &s).v1, epsilon = 1e-12);
            }
        }
    }
}
