//! Subcommand implementations, independent of argument parsing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use endomarket_core::equilibrium::set_distance;
use endomarket_core::numeric::{empirical_oracle, grid_equilibria};
use endomarket_core::{analytic_equilibria, EquilibriumSet, MarketConfig, SweepRow};

use crate::config::{Experiment, ExperimentConfig, Method};
use crate::output::{read_csv, records, write_csv, CsvRecord};
use crate::plot::render_svg;
use crate::{par_sweep, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Validate,
    Plot,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

/// Runs one subcommand. Tables and reports go to `stdout`, progress notes
/// to `stderr`.
pub fn execute(
    command: Command,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Plot => return plot(opts, stderr),
        Command::Solve | Command::Sweep | Command::Validate => {}
    }
    let cfg = load_config(opts)?;
    let exp = Experiment::from_config(&cfg)?;
    match command {
        Command::Solve => solve(&exp, opts, stdout),
        Command::Sweep => sweep(&exp, &cfg, opts, stdout, stderr),
        Command::Validate => validate(&exp, opts, stdout),
        Command::Plot => unreachable!(),
    }
}

fn load_config(opts: &Options) -> Result<ExperimentConfig, CliError> {
    let path = opts
        .config
        .as_deref()
        .ok_or(CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(g) = opts.grid {
        cfg.solver.grid_points = Some(g);
    }
    if let Some(t) = opts.tol {
        cfg.solver.tolerance = Some(t);
    }
    if let (Some(seed), Some(oracle)) = (opts.seed, cfg.oracle.as_mut()) {
        oracle.seeds = vec![seed];
    }
    Ok(cfg)
}

fn pick(
    method: Method,
    numeric: EquilibriumSet,
    analytic: Option<EquilibriumSet>,
) -> Result<EquilibriumSet, CliError> {
    match (method, analytic) {
        (Method::Numeric, _) => Ok(numeric),
        (_, Some(a)) => Ok(a),
        (Method::Auto, None) => Ok(numeric),
        (Method::Analytic, None) => Err(no_closed_form()),
    }
}

fn no_closed_form() -> CliError {
    CliError::Config(
        "method = \"analytic\" needs a constant or linear benefit with uniform valuations on [0, 1]"
            .into(),
    )
}

fn solve_at(exp: &Experiment, market: &MarketConfig) -> Result<EquilibriumSet, CliError> {
    let analytic = || analytic_equilibria(market, &exp.benefit, &exp.distribution).transpose();
    match exp.method {
        Method::Analytic => analytic()?.ok_or_else(no_closed_form),
        Method::Auto => match analytic()? {
            Some(a) => Ok(a),
            None => Ok(grid_equilibria(
                market,
                &exp.benefit,
                &exp.distribution,
                &exp.settings,
            )?),
        },
        Method::Numeric => Ok(grid_equilibria(
            market,
            &exp.benefit,
            &exp.distribution,
            &exp.settings,
        )?),
    }
}

fn emit(bytes: &[u8], path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn solve(exp: &Experiment, opts: &Options, stdout: &mut dyn Write) -> Result<(), CliError> {
    if exp.prices.len() != 1 {
        return Err(CliError::Config(format!(
            "solve needs exactly one price, got {}",
            exp.prices.len()
        )));
    }
    let set = solve_at(exp, &exp.market)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &records(&set))?;
    emit(&buf, opts.out.as_deref(), stdout)
}

fn sweep(
    exp: &Experiment,
    cfg: &ExperimentConfig,
    opts: &Options,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let rows: Vec<SweepRow> = if exp.method == Method::Analytic {
        exp.prices
            .iter()
            .map(|&p| {
                let market = exp.market.with_price(p)?;
                let analytic = analytic_equilibria(&market, &exp.benefit, &exp.distribution)
                    .transpose()?
                    .ok_or_else(no_closed_form)?;
                Ok(SweepRow {
                    price: p,
                    equilibria: analytic.clone(),
                    analytic: Some(analytic),
                })
            })
            .collect::<Result<_, CliError>>()?
    } else {
        par_sweep(
            &exp.market,
            &exp.benefit,
            &exp.distribution,
            &exp.prices,
            &exp.settings,
        )?
        .rows
    };

    let mut table: Vec<CsvRecord> = Vec::new();
    for row in rows {
        table.extend(records(&pick(exp.method, row.equilibria, row.analytic)?));
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &table)?;
    let csv_path = opts.out.as_deref().or(cfg.outputs.csv_path.as_deref());
    emit(&buf, csv_path, stdout)?;

    if let Some(svg_path) = &cfg.outputs.svg_path {
        let written = match csv_path {
            Some(p) => fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
            None => buf,
        };
        let svg = render_svg(&read_csv(&written[..])?, &title(cfg));
        fs::write(svg_path, svg)
            .map_err(|e| CliError::Io(format!("{}: {e}", svg_path.display())))?;
    }
    if !opts.quiet {
        let dest = csv_path.map_or("standard output".to_string(), |p| p.display().to_string());
        let _ = writeln!(
            stderr,
            "{} prices, {} rows written to {dest}",
            exp.prices.len(),
            table.len()
        );
    }
    Ok(())
}

fn title(cfg: &ExperimentConfig) -> String {
    format!("{:?} / {:?}", cfg.benefit, cfg.distribution)
}

fn shifted(set: &EquilibriumSet, offset: f64) -> EquilibriumSet {
    if offset == 0.0 {
        return set.clone();
    }
    let clamp = |a: f64| (a + offset).clamp(f64::MIN_POSITIVE, 1.0);
    let mut out = set.clone();
    for p in &mut out.points {
        p.alpha = clamp(p.alpha);
    }
    for iv in &mut out.intervals {
        iv.lo = clamp(iv.lo);
        iv.hi = clamp(iv.hi);
    }
    out
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn validate(exp: &Experiment, opts: &Options, stdout: &mut dyn Write) -> Result<(), CliError> {
    let tol = exp.settings.tolerance;
    let mut analytic_gap: Option<f64> = None;
    let mut oracle_gap: Option<f64> = None;
    let mut lines = Vec::new();

    for &price in &exp.prices {
        let market = exp.market.with_price(price)?;
        let numeric = grid_equilibria(&market, &exp.benefit, &exp.distribution, &exp.settings)?;
        if let Some(analytic) = analytic_equilibria(&market, &exp.benefit, &exp.distribution) {
            let analytic = shifted(&analytic?, exp.analytic_offset);
            let d = set_distance(&analytic, &numeric, tol);
            analytic_gap = Some(analytic_gap.map_or(d, |g: f64| g.max(d)));
            lines.push(format!("price {price}: analytic vs numeric {d:.3e}"));
        }
        if let Some(oracle) = &exp.oracle {
            let ds = oracle
                .seeds
                .iter()
                .map(|&seed| {
                    let o = empirical_oracle(
                        &market,
                        &exp.benefit,
                        &exp.distribution,
                        oracle.n,
                        seed,
                        &exp.settings,
                    )?;
                    Ok(set_distance(&o, &numeric, tol))
                })
                .collect::<Result<Vec<f64>, CliError>>()?;
            let d = median(ds);
            oracle_gap = Some(oracle_gap.map_or(d, |g: f64| g.max(d)));
            lines.push(format!("price {price}: numeric vs oracle (median) {d:.3e}"));
        }
    }

    if analytic_gap.is_none() && oracle_gap.is_none() {
        return Err(CliError::Config(
            "nothing to validate: no closed-form case and no [oracle] block".into(),
        ));
    }
    let mut failures = Vec::new();
    if let Some(g) = analytic_gap {
        let ok = g <= tol;
        lines.push(format!(
            "analytic vs numeric: max {g:.3e}, tolerance {tol:.3e}: {}",
            verdict(ok)
        ));
        if !ok {
            failures.push(format!(
                "analytic vs numeric distance {g:.3e} exceeds {tol:.3e}"
            ));
        }
    }
    if let (Some(g), Some(o)) = (oracle_gap, &exp.oracle) {
        let ok = g <= o.tolerance;
        lines.push(format!(
            "numeric vs oracle: max median {g:.3e}, tolerance {:.3e}: {}",
            o.tolerance,
            verdict(ok)
        ));
        if !ok {
            failures.push(format!(
                "numeric vs oracle distance {g:.3e} exceeds {:.3e}",
                o.tolerance
            ));
        }
    }
    if !opts.quiet {
        for l in &lines {
            writeln!(stdout, "{l}").map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failures.join("; ")))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn plot(opts: &Options, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = match &opts.config {
        Some(p) => Some(ExperimentConfig::load(p)?),
        None => None,
    };
    let input = opts
        .input
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.outputs.csv_path.clone()))
        .ok_or(CliError::Config(
            "plot needs --input or outputs.csv_path".into(),
        ))?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.outputs.svg_path.clone()))
        .ok_or(CliError::Config(
            "plot needs --out or outputs.svg_path".into(),
        ))?;
    let bytes = fs::read(&input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let rows = read_csv(&bytes[..])?;
    let name = cfg
        .as_ref()
        .map(title)
        .unwrap_or_else(|| input.display().to_string());
    fs::write(&out, render_svg(&rows, &name))
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    if !opts.quiet {
        let _ = writeln!(stderr, "plot written to {}", out.display());
    }
    Ok(())
}
