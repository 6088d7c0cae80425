//! The five commands.

use std::path::PathBuf;

use cfmm_forge::belief::DEFAULT_RADIAL_NODES;
use cfmm_forge::optimizer::SUPPORT_THRESHOLD;
use cfmm_forge::{
    compile_2d, compile_gbm_discounted, compile_ratio, fee_revenue, inefficiency,
    invert_allocation, kappa, kkt_residuals, reference_curve, reserves_from_liquidity,
    simulate as run_simulation, solve_cop, solve_with_linear_term, stationary_check, Allocation,
    BeliefSpec, BeliefSummary, Error, FeeParams, LinearTerm, MarketParams, PriceGrid, RatioDensity,
    SimConfig, TradingCurve,
};

use crate::config::{
    market, parse_fee, parse_rule, parse_sim, parse_size, pick, seed_from_env, BeliefFile, Family,
    GridSpec, Header, LinearChoice, RunFile, DEFAULT_AXIS, DEFAULT_BUDGET, DEFAULT_GRID,
    DEFAULT_TOL,
};
use crate::error::{CliError, CliResult};
use crate::formats::{read_allocation, write_csv, Report};
use crate::Common;

/// Widest grid `verify` tries, in decades added on each side.
const MAX_WIDENING: f64 = 6.0;

/// Settings every command resolves the same way.
struct Base {
    file: RunFile,
    header: Header,
    market: MarketParams,
    grid: GridSpec,
    grid_explicit: bool,
    belief: Option<PathBuf>,
    family: Option<Family>,
    out: Option<PathBuf>,
}

impl Base {
    fn resolve(command: &str, c: &Common) -> CliResult<Self> {
        let file = RunFile::load(c.config.as_deref())?;
        let budget = pick(c.budget, file.budget, DEFAULT_BUDGET);
        let px = pick(c.px, file.px, 1.0);
        let py = pick(c.py, file.py, 1.0);
        let market = market(budget, px, py)?;
        let (grid, grid_explicit) = match c.grid.as_ref().or(file.grid.as_ref()) {
            Some(text) => (GridSpec::parse(text)?, true),
            None => (DEFAULT_GRID, false),
        };
        let family = c
            .family
            .as_ref()
            .or(file.family.as_ref())
            .map(|t| Family::parse(t))
            .transpose()?;
        let belief = c.belief.clone().or_else(|| file.belief.clone());
        let out = c.out.clone().or_else(|| file.out.clone());

        let mut header = Header::new(command);
        if let Some(path) = &c.config {
            header.push("config", path.display());
        }
        if let Some(path) = &belief {
            header.push("belief", path.display());
        }
        if let Some(f) = &family {
            header.push("family", f);
        }
        header.push("px", px);
        header.push("py", py);
        header.push("budget", budget);
        header.push("grid", grid);
        Ok(Self {
            file,
            header,
            market,
            grid,
            grid_explicit,
            belief,
            family,
            out,
        })
    }

    fn belief_spec(&self) -> CliResult<BeliefSpec> {
        match (&self.belief, &self.family) {
            (Some(path), None) => BeliefFile::load(path),
            (None, Some(f)) => Ok(f.belief(self.market.px, self.market.py)),
            (Some(_), Some(_)) => Err(CliError::input(
                "give either --belief or --family, not both",
            )),
            (None, None) => Err(CliError::input(
                "a belief is required: pass --belief or --family",
            )),
        }
    }
}

/// Ratio-form beliefs compile exactly; others go through the radial pipeline.
fn compile(spec: &BeliefSpec, grid: &PriceGrid) -> CliResult<BeliefSummary> {
    let summary = match spec {
        BeliefSpec::GbmDiscounted { params, t_steps } => {
            compile_gbm_discounted(params, grid, *t_steps)
        }
        _ => match spec.ratio_form() {
            Some((density, px, py)) => compile_ratio(&density, px, py, grid),
            None => compile_2d(spec, grid, DEFAULT_RADIAL_NODES),
        },
    }?;
    Ok(summary)
}

fn allocation_rows(alloc: &Allocation) -> CliResult<Vec<[f64; 4]>> {
    let curve = reserves_from_liquidity(alloc)?;
    Ok(alloc
        .grid()
        .points()
        .iter()
        .zip(alloc.liquidity())
        .zip(curve.y_samples().iter().zip(curve.x_samples()))
        .map(|((p, l), (y, x))| [*p, *l, *y, *x])
        .collect())
}

pub fn optimize(c: &Common, fee: Option<String>, linear: Option<String>) -> CliResult<()> {
    let mut base = Base::resolve("optimize", c)?;
    let spec = base.belief_spec()?;
    let grid = base.grid.build()?;
    let fee = fee
        .or(base.file.fee.take())
        .map(|t| parse_fee(&t))
        .transpose()?;
    let linear = linear
        .or(base.file.linear_term.take())
        .map(|t| LinearChoice::parse(&t))
        .transpose()?;
    if let Some((delta, s)) = fee {
        base.header.push("fee", format!("{delta},{s}"));
    }
    match linear {
        Some(LinearChoice::Kappa) => base.header.push("linear-term", "kappa"),
        Some(LinearChoice::Lvr(cost)) => base.header.push("linear-term", format!("lvr:{cost}")),
        None => {}
    }

    let summary = compile(&spec, &grid)?;
    let term = match linear {
        None => None,
        Some(LinearChoice::Kappa) => Some(kappa(&summary)?),
        Some(LinearChoice::Lvr(cost)) => Some(LinearTerm::uniform_cost(&grid, cost)?),
    };
    let alloc = match &term {
        None => solve_cop(&summary, &base.market)?,
        Some(t) => solve_with_linear_term(&summary, t, &base.market)?,
    };
    let rows = allocation_rows(&alloc)?;
    write_csv(
        base.out.as_deref(),
        &base.header,
        &["p", "L", "Y", "X"],
        rows.iter().map(|r| &r[..]),
    )?;

    let kkt = kkt_residuals(&alloc, &summary, term.as_ref(), &base.market)?;
    let mut report = Report::default();
    report.num("p0", base.market.p0());
    report.num("X0", alloc.x0());
    report.num("Y0", alloc.y0());
    report.num("lambda_b", kkt.lambda_b);
    report.num("lambda_x", kkt.lambda_x);
    report.num("lambda_y", kkt.lambda_y);
    report.num("objective", inefficiency(&alloc, &summary)?);
    report.num("belief_mass", summary.mass());
    report.num("truncated_fraction", summary.truncated_fraction());
    report.num("budget_residual", kkt.budget_residual);
    report.num("stationarity_residual", kkt.stationarity_residual);
    report.num("objective_gap", kkt.objective_gap());
    if let Some(t) = &term {
        report.num("linear_term_value", t.apply(alloc.liquidity()));
    }
    if let Some((delta, s)) = fee {
        let revenue = fee_revenue(&alloc, &summary, &FeeParams::new(delta, s)?)?;
        report.num("fee_revenue", revenue);
        if let Some(LinearChoice::Lvr(_)) = linear {
            let loss = term.as_ref().map_or(0.0, |t| t.apply(alloc.liquidity()));
            report.num("net_profit", revenue - loss);
        }
    }
    report.emit(base.out.is_none());
    Ok(())
}

pub fn invert(
    c: &Common,
    alloc: Option<PathBuf>,
    table_2d: Option<PathBuf>,
    axis: Option<String>,
) -> CliResult<()> {
    let mut base = Base::resolve("invert", c)?;
    let path = alloc
        .or(base.file.alloc.take())
        .ok_or_else(|| CliError::input("invert needs --alloc <csv>"))?;
    base.header.push("alloc", path.display());
    let file = read_allocation(&path)?;
    let alloc = Allocation::new(&file.grid, file.liquidity, base.market.p0())?;
    let spec = invert_allocation(&alloc, &base.market)?;
    let BeliefSpec::Ratio {
        density: RatioDensity::Tabulated(table),
        ..
    } = &spec
    else {
        return Err(CliError::input(
            "inversion did not produce a tabulated ratio density",
        ));
    };
    let rows: Vec<[f64; 2]> = table
        .rates()
        .iter()
        .zip(table.values())
        .map(|(p, h)| [*p, *h])
        .collect();
    write_csv(
        base.out.as_deref(),
        &base.header,
        &["p", "h"],
        rows.iter().map(|r| &r[..]),
    )?;

    let mut report = Report::default();
    let support: Vec<f64> = rows.iter().filter(|r| r[1] > 0.0).map(|r| r[0]).collect();
    report.push("points", rows.len());
    report.num("support_lo", support.first().copied().unwrap_or(f64::NAN));
    report.num("support_hi", support.last().copied().unwrap_or(f64::NAN));
    if let Some(table_path) = table_2d.or(base.file.table_2d.take()) {
        let axis = axis_spec(axis, base.file.axis.take())?;
        let mut header = base.header.clone();
        header.push("axis", axis);
        write_table(&spec, &axis, &table_path, &header)?;
        report.push("table_2d", table_path.display());
    }
    report.emit(base.out.is_none());
    Ok(())
}

fn axis_spec(flag: Option<String>, file: Option<String>) -> CliResult<GridSpec> {
    flag.or(file)
        .map_or(Ok(DEFAULT_AXIS), |t| GridSpec::parse(&t))
}

/// Samples `ψ` on `axis × axis`, `p_y` varying fastest.
fn sample_table(spec: &BeliefSpec, axis: &GridSpec) -> CliResult<Vec<[f64; 3]>> {
    let points = axis.points()?;
    let mut rows = Vec::with_capacity(points.len() * points.len());
    for &x in &points {
        for &y in &points {
            rows.push([x, y, spec.psi(x, y)]);
        }
    }
    Ok(rows)
}

fn write_table(
    spec: &BeliefSpec,
    axis: &GridSpec,
    path: &std::path::Path,
    header: &Header,
) -> CliResult<Vec<[f64; 3]>> {
    let rows = sample_table(spec, axis)?;
    write_csv(
        Some(path),
        header,
        &["p_x", "p_y", "psi"],
        rows.iter().map(|r| &r[..]),
    )?;
    Ok(rows)
}

/// Flags specific to `simulate`.
pub struct SimFlags {
    pub alloc: Option<PathBuf>,
    pub sim: Option<String>,
    pub seed: Option<u64>,
    pub q: Option<f64>,
    pub rule: Option<String>,
    pub size: Option<String>,
    pub assert_bounds: bool,
}

pub fn simulate(c: &Common, flags: SimFlags) -> CliResult<()> {
    let mut base = Base::resolve("simulate", c)?;
    let file = &mut base.file;
    let (k, eps, steps, sim_seed) = match flags.sim.or(file.sim.take()) {
        Some(t) => parse_sim(&t)?,
        None => (0.02, 0.21, 1_000_000, None),
    };
    let seed = match sim_seed.or(flags.seed).or(file.seed) {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    let rule_name = pick(flags.rule, file.rule.take(), "strict-spot".into());
    let size_name = pick(flags.size, file.size.take(), "fixed".into());
    let (rule, size) = (parse_rule(&rule_name)?, parse_size(&size_name)?);
    let q = pick(flags.q, file.q, 0.5);
    let assert_bounds = flags.assert_bounds || file.assert_bounds.unwrap_or(false);
    let alloc_path = flags.alloc.or(file.alloc.take());

    let p0 = base.market.p0();
    let grid = base.grid.build()?;
    let curve: TradingCurve = match (&alloc_path, base.family) {
        (Some(path), _) => {
            base.header.push("alloc", path.display());
            let f = read_allocation(path)?;
            TradingCurve::tabulated(&f.grid, f.y, f.x, p0)?
        }
        (None, Some(family)) if family.curve().is_some() && base.belief.is_none() => {
            reference_curve(family.curve().expect("checked above"), 1.0, p0, &grid)?
        }
        _ => {
            let summary = compile(&base.belief_spec()?, &grid)?;
            reserves_from_liquidity(&solve_cop(&summary, &base.market)?)?
        }
    };
    for (key, value) in [
        ("k", k.to_string()),
        ("eps", eps.to_string()),
        ("steps", steps.to_string()),
        ("seed", seed.to_string()),
        ("q", q.to_string()),
        ("rule", rule_name),
        ("size", size_name),
    ] {
        base.header.push(key, value);
    }
    let cfg = SimConfig {
        q,
        rule,
        size,
        p_hat: p0,
        ..SimConfig::new(k, eps, steps, seed)
    };
    let stats = run_simulation(&curve, &cfg)?;

    if let Some(out) = &base.out {
        let rows: Vec<[f64; 3]> = stats
            .visits
            .counts
            .iter()
            .map(|(n, v)| [*n as f64, stats.visits.y_at(*n), *v as f64])
            .collect();
        write_csv(
            Some(out),
            &base.header,
            &["state_index", "y", "visits"],
            rows.iter().map(|r| &r[..]),
        )?;
    }
    let mut report = Report::default();
    report.push("attempted", stats.attempted);
    report.push("failed", stats.failed);
    report.num("failure_rate", stats.failure_rate);
    report.num("standard_error", stats.standard_error());
    report.num("band", stats.band);
    report.num("bound_lo", stats.bound_lo);
    report.num("bound_hi", stats.bound_hi);
    report.push("burn_in", stats.burn_in);
    report.push("within_bounds", stats.within_bounds(3.0));
    match stationary_check(&stats) {
        Ok(tv) => report.num("tv_distance_uniform", tv),
        Err(Error::InsufficientSamples { min_visits }) => {
            report.push("tv_distance_uniform", "insufficient samples");
            report.push("min_state_visits", min_visits);
        }
        Err(e) => return Err(e.into()),
    }
    report.print();
    if assert_bounds && !stats.within_bounds(3.0) {
        return Err(CliError::SimBound(format!(
            "failure rate {} outside [{}, {}] ± 3·{}",
            stats.failure_rate,
            stats.bound_lo,
            stats.bound_hi,
            stats.standard_error()
        )));
    }
    Ok(())
}

pub fn verify(c: &Common, tol: Option<f64>) -> CliResult<()> {
    let base = Base::resolve("verify", c)?;
    let family = base
        .family
        .ok_or_else(|| CliError::input("verify needs --family"))?;
    if base.belief.is_some() {
        return Err(CliError::input("verify takes --family, not --belief"));
    }
    let tol = pick(tol, base.file.tol, DEFAULT_TOL);
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let spec = family.belief(base.market.px, base.market.py);

    // heavy-tailed beliefs need a wider grid unless one was given
    let mut decades = 0.0;
    let (grid_spec, grid, summary, alloc) = loop {
        let gs = base.grid.widened(decades);
        let grid = gs.build()?;
        let solved = compile(&spec, &grid).and_then(|s| Ok((solve_cop(&s, &base.market)?, s)));
        match solved {
            Ok((a, s)) => break (gs, grid, s, a),
            Err(CliError::Truncation(_)) if !base.grid_explicit && decades < MAX_WIDENING => {
                decades += 2.0;
            }
            Err(e) => return Err(e),
        }
    };

    let shape: Vec<f64> = grid.points().iter().map(|p| family.shape(*p)).collect();
    // the solver leaves no liquidity where the weight is negligible
    let w_max = summary.w().iter().cloned().fold(0.0, f64::max);
    let l = alloc.liquidity();
    let i0 = grid.nearest(base.market.p0());
    if !(shape[i0] > 0.0 && l[i0] > 0.0) {
        return Err(CliError::Verify("no liquidity at the initial price".into()));
    }
    let scale = l[i0] / shape[i0];
    let mut worst: f64 = 0.0;
    for ((s, l), w) in shape.iter().zip(l).zip(summary.w()) {
        let dev = match (*s > 0.0, *l > 0.0) {
            (true, true) => (l / (scale * s) - 1.0).abs(),
            (false, false) => 0.0,
            (true, false) if *w < SUPPORT_THRESHOLD * w_max => 0.0,
            _ => f64::INFINITY,
        };
        worst = worst.max(dev);
    }

    let mut header = base.header.clone();
    header.push("tol", tol);
    header.push("grid_used", grid_spec);
    if let Some(out) = &base.out {
        let rows: Vec<[f64; 3]> = grid
            .points()
            .iter()
            .zip(l)
            .zip(&shape)
            .map(|((p, l), s)| [*p, *l, scale * s])
            .collect();
        write_csv(
            Some(out),
            &header,
            &["p", "L", "L_ref"],
            rows.iter().map(|r| &r[..]),
        )?;
    }
    let pass = worst <= tol;
    let mut report = Report::default();
    report.push("family", family);
    report.push("grid", grid_spec);
    report.num("max_rel_dev", worst);
    report.num("tol", tol);
    report.push("result", if pass { "pass" } else { "fail" });
    report.print();
    if pass {
        Ok(())
    } else {
        Err(CliError::Verify(format!(
            "{family}: max relative deviation {worst:e} exceeds {tol:e}"
        )))
    }
}

pub fn compile_belief(c: &Common, axis: Option<String>) -> CliResult<()> {
    let mut base = Base::resolve("compile-belief", c)?;
    let spec = base.belief_spec()?;
    let axis = axis_spec(axis, base.file.axis.take())?;
    base.header.push("axis", axis);
    let out = base
        .out
        .clone()
        .ok_or_else(|| CliError::input("compile-belief needs --out <csv>"))?;
    let rows = write_table(&spec, &axis, &out, &base.header)?;

    let grid = base.grid.build()?;
    let summary = compile(&spec, &grid)?;
    let n = axis.n;
    let peak = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((rows[i * n + j][2] - rows[j * n + i][2]).abs());
        }
    }
    let mut report = Report::default();
    report.push("table_points", rows.len());
    report.num("psi_max", peak);
    report.num("swap_asymmetry", if peak > 0.0 { asym / peak } else { 0.0 });
    report.num("mass", summary.mass());
    report.num("truncated_fraction", summary.truncated_fraction());
    report.print();
    Ok(())
}
