use std::io::Write;

use super::config::SweepType;
use super::sweep::structure_for;
use super::{num, HarnessError};
use crate::default_risk::{compare_pd, PdComparison};
use crate::distributions::{AssetSampler, BivariateLognormalSpec};
use crate::error::Result;
use crate::valuation::{classify_area, value_on_area, Firm, XosStructure};

pub const FIGURE3_HEADER: [&str; 10] =
    ["type", "d", "q", "cdf", "p_s", "p_l", "rr", "p_s_rd", "p_l_rd", "rr_rd"];

/// Empirical and matched-lognormal distribution functions of firm 1's value
/// for one liability level.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Panel {
    pub xos_type: SweepType,
    pub d: f64,
    pub comparison: PdComparison,
    /// Empirical quantiles at which both CDFs are tabulated.
    pub grid: Vec<f64>,
    pub ecdf: Vec<f64>,
    pub lognormal: Vec<f64>,
}

/// Symmetric fractions `fraction`, `d1 = d2 = d`, i.i.d. assets with mean 1.
pub fn figure3_panel(
    ty: SweepType,
    fraction: f64,
    sigma_sq: f64,
    d: f64,
    n: usize,
    seed: u64,
    grid_points: usize,
) -> Result<Figure3Panel> {
    let x = structure_for(ty, fraction, fraction, d, d)?;
    let spec = BivariateLognormalSpec::iid_with_mean(1.0, sigma_sq)?;
    let comparison = compare_pd(&x, &spec, n, seed, Firm::One)?;
    let mut values: Vec<f64> = AssetSampler::new(spec, seed)
        .sample(n)
        .iter()
        .map(|sc| value_on_area(&x, sc, classify_area(&x, sc)).v1)
        .collect();
    values.sort_by(f64::total_cmp);
    let g = grid_points.max(1);
    let mut grid: Vec<f64> = (0..=g).map(|k| values[k * (n - 1) / g]).collect();
    grid.dedup();
    let ecdf = grid
        .iter()
        .map(|&q| values.partition_point(|&v| v <= q) as f64 / n as f64)
        .collect();
    let lognormal = grid.iter().map(|&q| comparison.matched.cdf(q)).collect();
    Ok(Figure3Panel {
        xos_type: ty,
        d,
        comparison,
        grid,
        ecdf,
        lognormal,
    })
}

/// Writes the empirical and the lognormal CDF tables for each liability
/// level in `d_grid`.
#[allow(clippy::too_many_arguments)]
pub fn emit_figure3_data<W1: Write, W2: Write>(
    ty: SweepType,
    fraction: f64,
    sigma_sq: f64,
    d_grid: &[f64],
    n: usize,
    seed: u64,
    grid_points: usize,
    rounding: u32,
    ecdf_out: W1,
    lognormal_out: W2,
) -> std::result::Result<Vec<Figure3Panel>, HarnessError> {
    let mut we = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(ecdf_out);
    let mut wl = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(lognormal_out);
    we.write_record(FIGURE3_HEADER)?;
    wl.write_record(FIGURE3_HEADER)?;
    let mut panels = Vec::with_capacity(d_grid.len());
    for &d in d_grid {
        let panel = figure3_panel(ty, fraction, sigma_sq, d, n, seed, grid_points)?;
        let c = &panel.comparison;
        let (ps_rd, pl_rd, rr_rd) = c.rounded(rounding);
        let tail = [c.p_suzuki, c.p_lognormal, c.rr, ps_rd, pl_rd, rr_rd].map(num);
        let row = |q: f64, cdf: f64| {
            let mut r = vec![ty.name().to_string(), num(d), num(q), num(cdf)];
            r.extend(tail.iter().cloned());
            r
        };
        for (k, &q) in panel.grid.iter().enumerate() {
            we.write_record(row(q, panel.ecdf[k]))?;
            wl.write_record(row(q, panel.lognormal[k]))?;
        }
        panels.push(panel);
    }
    we.flush()?;
    wl.flush()?;
    Ok(panels)
}

/// One row `(v1, v2, area)` per simulated scenario.
pub fn emit_scatter<W: Write>(
    x: &XosStructure,
    spec: &BivariateLognormalSpec,
    n: usize,
    seed: u64,
    out: W,
) -> std::result::Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["v1", "v2", "area"])?;
    for sc in AssetSampler::new(*spec, seed).sample(n) {
        let area = classify_area(x, &sc);
        let c = value_on_area(x, &sc, area);
        w.write_record([num(c.v1), num(c.v2), area.label().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
