use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xos_credit::default_risk::compare_pd;
use xos_credit::harness::{
    self, emit_figure3_data, emit_scatter, run_sweep, write_sweep_csv, ConfigError, HarnessError,
    SweepConfig, SweepType,
};
use xos_credit::limit::{
    classify_limit_estimation, debt_limit_distribution, equity_path_points, fraction_path,
    limit_pd_suzuki_equity, regime_boundary, DebtLimitCase,
};
use xos_credit::mixture::{build_overestimation_case, build_underestimation_case, realize_atoms};
use xos_credit::{
    classify_area, value_closed_form, value_fixed_point, AssetScenario, BivariateLognormalSpec,
    Firm, XosStructure,
};

#[derive(Parser)]
#[command(name = "xos", version, about = "Default risk of two firms with cross-ownership")]
struct Cli {
    /// Sweep configuration file (sweep only).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Random seed; defaults to $XOS_SEED or a fixed constant.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TypeArg {
    Equity,
    Debt,
}

impl From<TypeArg> for SweepType {
    fn from(t: TypeArg) -> Self {
        match t {
            TypeArg::Equity => SweepType::Equity,
            TypeArg::Debt => SweepType::Debt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Value both firms' claims for one asset scenario.
    Value(ValueArgs),
    /// Default probability of firm 1 under both models.
    Pd(PdArgs),
    /// Parameter sweep over fraction, liability and volatility grids.
    Sweep,
    /// Limits as cross-ownership fractions tend to one.
    Limit(LimitArgs),
    /// Distributions forcing over- or underestimation by the lognormal model.
    General(GeneralArgs),
    /// Simulated firm values with their area labels.
    Scatter(ScatterArgs),
}

#[derive(Args)]
struct ValueArgs {
    #[arg(long, default_value_t = 0.0)]
    ms12: f64,
    #[arg(long, default_value_t = 0.0)]
    ms21: f64,
    #[arg(long, default_value_t = 0.0)]
    md12: f64,
    #[arg(long, default_value_t = 0.0)]
    md21: f64,
    #[arg(long)]
    d1: f64,
    #[arg(long)]
    d2: f64,
    #[arg(long)]
    a1: f64,
    #[arg(long)]
    a2: f64,
    /// Solve by fixed-point iteration instead of the closed form.
    #[arg(long)]
    fixed_point: bool,
}

#[derive(Args)]
struct StructureArgs {
    #[arg(long = "type", value_enum)]
    xos_type: TypeArg,
    /// Both cross-ownership fractions.
    #[arg(long, required_unless_present_all = ["frac12", "frac21"])]
    frac: Option<f64>,
    #[arg(long, requires = "frac21", conflicts_with = "frac")]
    frac12: Option<f64>,
    #[arg(long, requires = "frac12", conflicts_with = "frac")]
    frac21: Option<f64>,
    /// Variance of log exogenous assets.
    #[arg(long)]
    sigma2: f64,
    /// Face value of both firms' debt.
    #[arg(long, required_unless_present_all = ["d1", "d2"])]
    d: Option<f64>,
    #[arg(long, requires = "d2", conflicts_with = "d")]
    d1: Option<f64>,
    #[arg(long, requires = "d1", conflicts_with = "d")]
    d2: Option<f64>,
    /// Expected exogenous assets of each firm.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
}

impl StructureArgs {
    fn structure(&self) -> xos_credit::Result<XosStructure> {
        let (f12, f21) = match self.frac {
            Some(f) => (f, f),
            None => (self.frac12.unwrap(), self.frac21.unwrap()),
        };
        let (d1, d2) = match self.d {
            Some(d) => (d, d),
            None => (self.d1.unwrap(), self.d2.unwrap()),
        };
        harness::sweep::structure_for(self.xos_type.into(), f12, f21, d1, d2)
    }

    fn spec(&self) -> xos_credit::Result<BivariateLognormalSpec> {
        BivariateLognormalSpec::iid_with_mean(self.a, self.sigma2)
    }
}

#[derive(Args)]
struct PdArgs {
    #[command(flatten)]
    structure: StructureArgs,
    /// Decimals of the rounded columns.
    #[arg(long, default_value_t = 5)]
    rounding: u32,
    /// Also write the empirical CDF table of firm 1's value.
    #[arg(long, value_name = "PATH", requires = "lognormal_out")]
    ecdf_out: Option<PathBuf>,
    /// Also write the matched lognormal CDF table.
    #[arg(long, value_name = "PATH", requires = "ecdf_out")]
    lognormal_out: Option<PathBuf>,
    /// Number of quantile intervals of the CDF tables.
    #[arg(long, default_value_t = 500)]
    grid: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LimitKind {
    Equity,
    Debt,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, value_enum)]
    kind: LimitKind,
    #[arg(long, default_value_t = 1.0)]
    d1: f64,
    #[arg(long, default_value_t = 1.0)]
    d2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Path fractions 1 - 10^-k for k = 1..=steps (equity).
    #[arg(long, default_value_t = 6)]
    steps: u32,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    Over,
    Under,
}

#[derive(Args)]
struct GeneralArgs {
    #[arg(long = "case", value_enum)]
    case: CaseArg,
    /// Target default probability.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    d1: f64,
    /// Realize the law as asset scenarios under this cross-ownership type.
    #[arg(long = "type", value_enum, requires = "frac")]
    xos_type: Option<TypeArg>,
    #[arg(long)]
    frac: Option<f64>,
    /// Firm 2's face value; defaults to d1.
    #[arg(long)]
    d2: Option<f64>,
}

#[derive(Args)]
struct ScatterArgs {
    #[command(flatten)]
    structure: StructureArgs,
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xos: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    if cli.config.is_some() && !matches!(cli.command, Command::Sweep) {
        return Err(ConfigError {
            line: None,
            message: "--config only applies to the sweep command".into(),
        }
        .into());
    }
    let seed = match cli.seed {
        Some(s) => s,
        None => harness::default_seed()?,
    };
    let csv = |default: Format| cli.format.unwrap_or(default) == Format::Csv;
    match &cli.command {
        Command::Value(a) => cmd_value(a, csv(Format::Text), open_out(&cli.out)?),
        Command::Pd(a) => cmd_pd(a, seed, csv(Format::Csv), open_out(&cli.out)?),
        Command::Sweep => {
            let mut cfg = match &cli.config {
                Some(p) => SweepConfig::load(p)?,
                None => SweepConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            } else if cli.config.is_none() {
                cfg.seed = seed;
            }
            let cells = run_sweep(&cfg)?;
            write_sweep_csv(&cells, cfg.rounding, open_out(&cli.out)?)
        }
        Command::Limit(a) => cmd_limit(a, seed, open_out(&cli.out)?),
        Command::General(a) => cmd_general(a, open_out(&cli.out)?),
        Command::Scatter(a) => {
            let x = a.structure.structure()?;
            emit_scatter(&x, &a.structure.spec()?, a.structure.n, seed, open_out(&cli.out)?)
        }
    }
}

fn cmd_value(a: &ValueArgs, csv: bool, mut out: Box<dyn Write>) -> Result<(), HarnessError> {
    let x = XosStructure::new(a.ms12, a.ms21, a.md12, a.md21, a.d1, a.d2)?;
    let sc = AssetScenario::new(a.a1, a.a2)?;
    let c = if a.fixed_point {
        value_fixed_point(
            &x,
            &sc,
            xos_credit::valuation::DEFAULT_FP_TOL,
            xos_credit::valuation::DEFAULT_FP_MAX_ITER,
        )?
        .claims
    } else {
        value_closed_form(&x, &sc)
    };
    let area = classify_area(&x, &sc).label();
    if csv {
        let mut w = csv_writer(out);
        w.write_record(["r1", "r2", "s1", "s2", "v1", "v2", "area"])?;
        let mut row: Vec<String> = c.as_array().iter().map(|v| v.to_string()).collect();
        row.push(area.to_string());
        w.write_record(row)?;
        w.flush()?;
    } else {
        writeln!(out, "r = ({}, {})", c.r1, c.r2)?;
        writeln!(out, "s = ({}, {})", c.s1, c.s2)?;
        writeln!(out, "v = ({}, {})", c.v1, c.v2)?;
        writeln!(out, "area = {area}")?;
        out.flush()?;
    }
    Ok(())
}

fn cmd_pd(a: &PdArgs, seed: u64, csv: bool, mut out: Box<dyn Write>) -> Result<(), HarnessError> {
    let s = &a.structure;
    let x = s.structure()?;
    let spec = s.spec()?;
    let c = compare_pd(&x, &spec, s.n, seed, Firm::One)?;
    let (ps_rd, pl_rd, rr_rd) = c.rounded(a.rounding);
    if csv {
        let mut w = csv_writer(&mut out);
        w.write_record([
            "type", "ms12", "ms21", "md12", "md21", "d1", "d2", "sigma_sq", "n", "seed", "p_s", "p_l",
            "rr", "se_s", "p_s_rd", "p_l_rd", "rr_rd",
        ])?;
        let ty = SweepType::from(s.xos_type).name().to_string();
        let mut row = vec![ty];
        row.extend([x.ms12(), x.ms21(), x.md12(), x.md21(), x.d1(), x.d2(), s.sigma2].map(|v| v.to_string()));
        row.push(s.n.to_string());
        row.push(seed.to_string());
        row.extend([c.p_suzuki, c.p_lognormal, c.rr, c.se_suzuki, ps_rd, pl_rd, rr_rd].map(|v| v.to_string()));
        w.write_record(row)?;
        w.flush()?;
    } else {
        writeln!(out, "p_s = {} (se {})", c.p_suzuki, c.se_suzuki)?;
        writeln!(out, "p_l = {}", c.p_lognormal)?;
        writeln!(out, "rr = {}", c.rr)?;
        writeln!(out, "rounded: p_s = {ps_rd}, p_l = {pl_rd}, rr = {rr_rd}")?;
    }
    out.flush()?;
    if let (Some(pe), Some(pl)) = (&a.ecdf_out, &a.lognormal_out) {
        if s.frac.is_none() || s.d.is_none() || s.a != 1.0 {
            return Err(ConfigError {
                line: None,
                message: "CDF tables need symmetric --frac, --d and a = 1".into(),
            }
            .into());
        }
        emit_figure3_data(
            s.xos_type.into(),
            s.frac.unwrap(),
            s.sigma2,
            &[s.d.unwrap()],
            s.n,
            seed,
            a.grid,
            a.rounding,
            create(pe)?,
            create(pl)?,
        )?;
    }
    Ok(())
}

fn cmd_limit(a: &LimitArgs, seed: u64, out: Box<dyn Write>) -> Result<(), HarnessError> {
    let spec = BivariateLognormalSpec::iid_with_mean(a.a, a.sigma2)?;
    let mut w = csv_writer(out);
    match a.kind {
        LimitKind::Equity => {
            let path: Vec<XosStructure> = std::iter::once(0.0)
                .chain(fraction_path(a.steps))
                .map(|f| XosStructure::equity_only(f, f, a.d1, a.d2))
                .collect::<xos_credit::Result<_>>()?;
            let limit = limit_pd_suzuki_equity(&path[0], &spec)?;
            w.write_record(["fraction", "p_s", "p_l", "mu_tilde", "sigma_tilde", "limit_pd", "limit_pd_se"])?;
            for p in equity_path_points(&path, &spec, Firm::One, a.n, seed)? {
                w.write_record(
                    [p.ms12, p.p_suzuki, p.p_lognormal, p.mu_tilde, p.sigma_tilde, limit.p, limit.se]
                        .map(|v| v.to_string()),
                )?;
            }
        }
        LimitKind::Debt => {
            let lim = debt_limit_distribution(a.d1, a.d2, &spec)?;
            let case = match lim.case {
                DebtLimitCase::Equal => "equal",
                DebtLimitCase::FirmOneSmaller => "firm_one_smaller",
                DebtLimitCase::FirmOneLarger => "firm_one_larger",
            };
            w.write_record([
                "d1", "d2", "case", "pd_suzuki", "pd_lognormal", "mean", "variance", "d1_star",
                "d1_max", "d1_star_star", "estimation",
            ])?;
            let mut row = vec![a.d1.to_string(), a.d2.to_string(), case.to_string()];
            row.extend([lim.pd_suzuki, lim.pd_lognormal, lim.mean, lim.variance].map(|v| v.to_string()));
            let m1 = spec.marginal1();
            let rb = regime_boundary(m1.mu, m1.sigma(), a.d2)?;
            row.extend([rb.d1_star, rb.d1_max, rb.d1_star_star].map(|v| v.to_string()));
            let est = match classify_limit_estimation(a.d1, &rb) {
                xos_credit::limit::Estimation::Over => "over",
                xos_credit::limit::Estimation::Under => "under",
            };
            row.push(est.to_string());
            w.write_record(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_general(a: &GeneralArgs, out: Box<dyn Write>) -> Result<(), HarnessError> {
    let (law, e) = match a.case {
        CaseArg::Over => (build_overestimation_case(a.p, a.d1)?, f64::NAN),
        CaseArg::Under => {
            let l = build_underestimation_case(a.p, a.d1)?;
            (l.to_atomic(), l.e)
        }
    };
    let (p_s, p_l) = (law.pd_suzuki(a.d1), law.pd_lognormal(a.d1)?);
    let realized = match a.xos_type {
        Some(t) => {
            let f = a.frac.unwrap();
            let x = harness::sweep::structure_for(t.into(), f, f, a.d1, a.d2.unwrap_or(a.d1))?;
            let sl = realize_atoms(&x, &law)?;
            Some(
                sl.atoms
                    .iter()
                    .map(|(sc, _)| (sc.a1, sc.a2, classify_area(&x, sc).label()))
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let case = match a.case {
        CaseArg::Over => "over",
        CaseArg::Under => "under",
    };
    let mut w = csv_writer(out);
    w.write_record(["case", "p", "d1", "e", "v1", "weight", "a1", "a2", "area", "p_s", "p_l"])?;
    for (k, &(v, wt)) in law.atoms.iter().enumerate() {
        let mut row = vec![case.to_string(), a.p.to_string(), a.d1.to_string(), e.to_string()];
        row.push(v.to_string());
        row.push(wt.to_string());
        match &realized {
            Some(r) => row.extend([r[k].0.to_string(), r[k].1.to_string(), r[k].2.to_string()]),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        row.push(p_s.to_string());
        row.push(p_l.to_string());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
