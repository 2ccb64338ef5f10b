//! The four subcommands: solve, sweep, simulate, exact.

use std::io::Write;
use std::path::Path;

use kelly_core::{exact, kelly, sim, AssetModel, Dependence, PortfolioModel};

use crate::error::{CliError, CliResult};
use crate::spec::{DependenceSpec, LoadedSpec, PortfolioSpec};

/// CSV numeric format: 10 significant digits, locale-independent.
pub fn fmt_sig10(v: f64) -> String {
    // normalize -0.0 so zero rows are byte-stable
    format!("{:.9e}", v + 0.0)
}

fn describe_dependence(portfolio: &PortfolioModel) -> String {
    match portfolio.dependence() {
        Dependence::Independent => "independent".to_string(),
        Dependence::BivariateLogNormal { rho } => format!("bivariate (rho = {rho})"),
        Dependence::EmpiricalSamples(s) => format!("empirical ({} samples)", s.rows()),
    }
}

fn name_width(names: &[&str]) -> usize {
    names.iter().map(|n| n.len()).max().unwrap_or(5).max(5)
}

// ---------------------------------------------------------------------------
// solve

pub fn cmd_solve(loaded: &LoadedSpec, verbose: bool, out: &mut impl Write) -> CliResult<()> {
    let portfolio = &loaded.portfolio;
    let result = kelly::solve_portfolio(portfolio)?;
    let names = loaded.asset_names();
    let w = name_width(&names);

    writeln!(out, "portfolio: {} asset(s), dependence: {}", portfolio.len(), describe_dependence(portfolio)).ok();
    if verbose {
        let moments = portfolio.moments()?;
        let system = kelly::build_system(&moments)?;
        writeln!(out, "moment matrix M:").ok();
        for r in 0..system.len() {
            let row: Vec<String> = system.matrix().row(r).iter().map(|v| fmt_sig10(*v)).collect();
            writeln!(out, "  [{}]", row.join(", ")).ok();
        }
        let b: Vec<String> = system.rhs().iter().map(|v| fmt_sig10(*v)).collect();
        writeln!(out, "rhs b:\n  [{}]", b.join(", ")).ok();
    }
    writeln!(out, "{:<w$}  {:>14}", "asset", "fraction").ok();
    for (name, f) in names.iter().zip(&result.fractions) {
        writeln!(out, "{name:<w$}  {f:>14.9}").ok();
    }
    writeln!(out, "{:<w$}  {:>14.9}", "total", result.total).ok();
    writeln!(out, "flags: {}", result.flags).ok();
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Closed,
    Conventional,
    Gaussian,
    Linear,
    Exact,
}

impl Method {
    fn parse(token: &str) -> CliResult<Method> {
        match token {
            "closed" => Ok(Method::Closed),
            "conventional" => Ok(Method::Conventional),
            "gaussian" => Ok(Method::Gaussian),
            "linear" => Ok(Method::Linear),
            "exact" => Ok(Method::Exact),
            other => Err(CliError::validation(format!(
                "unknown method `{other}` (expected closed, conventional, gaussian, linear, exact)"
            ))),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Method::Closed => "closed",
            Method::Conventional => "conventional",
            Method::Gaussian => "gaussian",
            Method::Linear => "linear",
            Method::Exact => "exact",
        }
    }

    fn per_asset(&self) -> bool {
        matches!(self, Method::Closed | Method::Conventional | Method::Gaussian)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// mu_l = sigma_l * mu1 for l >= 2 (the correlated-growth convention).
    Scaled,
    /// Every asset shares mu1.
    Uniform,
    /// Only asset 1 varies; the rest keep their spec growth.
    None,
}

impl Link {
    pub fn parse(token: &str) -> CliResult<Link> {
        match token {
            "scaled" => Ok(Link::Scaled),
            "uniform" => Ok(Link::Uniform),
            "none" => Ok(Link::None),
            other => Err(CliError::validation(format!(
                "unknown link mode `{other}` (expected scaled, uniform, none)"
            ))),
        }
    }
}

pub struct SweepPlan {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub methods: Vec<Method>,
    pub link: Link,
    /// Correlation overrides as (display token, value).
    pub rhos: Vec<(String, f64)>,
}

impl SweepPlan {
    pub fn from_flags(
        start: f64,
        stop: f64,
        steps: usize,
        methods: &str,
        link: &str,
        rho: Option<&str>,
        spec: &PortfolioSpec,
    ) -> CliResult<SweepPlan> {
        if steps < 2 {
            return Err(CliError::validation("sweep needs at least 2 steps"));
        }
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(CliError::validation(format!(
                "invalid sweep range [{start}, {stop}]"
            )));
        }
        let methods: Vec<Method> = methods
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Method::parse)
            .collect::<CliResult<_>>()?;
        if methods.is_empty() {
            return Err(CliError::validation("no sweep methods given"));
        }
        let link = Link::parse(link)?;
        let mut rhos = Vec::new();
        if let Some(list) = rho {
            if !matches!(spec.dependence, DependenceSpec::Bivariate { .. }) {
                return Err(CliError::validation(
                    "--rho applies only to bivariate portfolios",
                ));
            }
            for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let value: f64 = token.parse().map_err(|_| {
                    CliError::validation(format!("--rho: `{token}` is not a number"))
                })?;
                if !(-1.0..=1.0).contains(&value) {
                    return Err(CliError::validation(format!(
                        "--rho: {value} outside [-1, 1]"
                    )));
                }
                rhos.push((token.to_string(), value));
            }
            if rhos.is_empty() {
                return Err(CliError::validation("--rho: empty list"));
            }
        }
        Ok(SweepPlan {
            start,
            stop,
            steps,
            methods,
            link,
            rhos,
        })
    }
}

struct Column {
    name: String,
    method: Method,
    asset: usize,
    rho: Option<f64>,
}

fn sweep_columns(plan: &SweepPlan, names: &[&str]) -> Vec<Column> {
    let mut cols = Vec::new();
    for method in &plan.methods {
        let rho_slots: Vec<Option<(String, f64)>> = if method.per_asset() || plan.rhos.is_empty() {
            vec![None]
        } else {
            plan.rhos.iter().cloned().map(Some).collect()
        };
        for slot in rho_slots {
            for (ai, name) in names.iter().enumerate() {
                let col_name = match &slot {
                    Some((token, _)) => format!("{name}_{}_rho{token}", method.label()),
                    None => format!("{name}_{}", method.label()),
                };
                cols.push(Column {
                    name: col_name,
                    method: *method,
                    asset: ai,
                    rho: slot.as_ref().map(|(_, v)| *v),
                });
            }
        }
    }
    cols
}

/// Rebuild the portfolio at a sweep point: asset 1 takes `mu1`, the rest
/// follow the link rule; the dependence keeps the spec's kind with an
/// optional correlation override.
fn portfolio_at(
    spec: &PortfolioSpec,
    mu1: f64,
    link: Link,
    rho_override: Option<f64>,
) -> CliResult<(Vec<AssetModel>, PortfolioModel)> {
    let mut assets = Vec::with_capacity(spec.assets.len());
    for (i, a) in spec.assets.iter().enumerate() {
        let mu = if i == 0 {
            mu1
        } else {
            match link {
                Link::Scaled => a.sigma * mu1,
                Link::Uniform => mu1,
                Link::None => a.mu,
            }
        };
        let mut adjusted = a.clone();
        adjusted.mu = mu;
        assets.push(adjusted.to_model()?);
    }
    let portfolio = match &spec.dependence {
        DependenceSpec::Independent => PortfolioModel::independent(assets.clone())?,
        DependenceSpec::Bivariate { rho } => {
            let r = rho_override.unwrap_or(*rho);
            PortfolioModel::bivariate_log_normal(assets[0], assets[1], r)?
        }
        DependenceSpec::Samples { .. } => {
            return Err(CliError::validation(
                "sweep needs an analytic portfolio, not empirical samples",
            ))
        }
    };
    Ok((assets, portfolio))
}

fn solve_fractions(
    method: Method,
    assets: &[AssetModel],
    portfolio: &PortfolioModel,
) -> CliResult<Vec<f64>> {
    match method {
        Method::Closed => assets
            .iter()
            .map(|a| {
                kelly::kelly_single_moments(a.mean(), a.second_moment(), a.x0())
                    .map_err(CliError::from)
            })
            .collect(),
        Method::Conventional => Ok(assets
            .iter()
            .map(|a| kelly::kelly_single_conventional(a.mu(), a.sigma()))
            .collect()),
        Method::Gaussian => Ok(assets
            .iter()
            .map(|a| kelly::kelly_single_gaussian(a.mu(), a.sigma()))
            .collect()),
        Method::Linear => Ok(kelly::solve_portfolio(portfolio)?.fractions),
        Method::Exact => {
            if portfolio.len() == 1 {
                Ok(vec![exact::solve_exact_single(&assets[0])?.fraction])
            } else {
                let f0 = exact::initial_guess(portfolio)?;
                Ok(exact::solve_exact_multi(portfolio, &f0)?.fractions)
            }
        }
    }
}

pub fn cmd_sweep(
    loaded: &LoadedSpec,
    plan: &SweepPlan,
    out_path: &Path,
    diag: &mut impl Write,
) -> CliResult<()> {
    let spec = &loaded.spec;
    let names = loaded.asset_names();
    let columns = sweep_columns(plan, &names);

    let mut csv = String::new();
    csv.push_str("mu1");
    for c in &columns {
        csv.push(',');
        csv.push_str(&c.name);
    }
    csv.push('\n');

    for step in 0..plan.steps {
        let mu1 = plan.start
            + (plan.stop - plan.start) * step as f64 / (plan.steps - 1) as f64;
        // one solve per (method, rho) group, cached across that group's columns
        let mut cells: Vec<Option<f64>> = Vec::with_capacity(columns.len());
        let mut group: Option<(Method, Option<f64>, Option<Vec<f64>>)> = None;
        for col in &columns {
            let fresh = match &group {
                Some((m, r, _)) => *m != col.method || *r != col.rho,
                None => true,
            };
            if fresh {
                let solved = portfolio_at(spec, mu1, plan.link, col.rho).and_then(
                    |(assets, portfolio)| solve_fractions(col.method, &assets, &portfolio),
                );
                let values = match solved {
                    Ok(v) => Some(v),
                    Err(e) => {
                        writeln!(
                            diag,
                            "warning: mu1 = {mu1}: method `{}` failed: {e}",
                            col.method.label()
                        )
                        .ok();
                        None
                    }
                };
                group = Some((col.method, col.rho, values));
            }
            let cell = group
                .as_ref()
                .and_then(|(_, _, v)| v.as_ref())
                .map(|v| v[col.asset]);
            cells.push(cell);
        }
        csv.push_str(&fmt_sig10(mu1));
        for cell in cells {
            csv.push(',');
            if let Some(v) = cell {
                csv.push_str(&fmt_sig10(v));
            }
        }
        csv.push('\n');
    }

    std::fs::write(out_path, csv.as_bytes()).map_err(|e| {
        CliError::validation(format!("cannot write `{}`: {e}", out_path.display()))
    })?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate

/// Clamp negatives and scale so the total is at most 1 (full-support
/// admissibility for the simulator).
pub fn project_simplex(f: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = f.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = g.iter().sum();
    if total > 1.0 {
        for v in g.iter_mut() {
            *v /= total;
        }
    }
    g
}

pub struct SimulateFlags {
    pub fractions: Option<Vec<f64>>,
    pub rounds: usize,
    pub replications: usize,
    pub seed: u64,
    pub verify: bool,
    pub delta: f64,
}

pub fn cmd_simulate(
    loaded: &LoadedSpec,
    flags: &SimulateFlags,
    out: &mut impl Write,
) -> CliResult<()> {
    let portfolio = &loaded.portfolio;
    let f = match &flags.fractions {
        Some(f) => {
            if f.len() != portfolio.len() {
                return Err(CliError::validation(format!(
                    "--fractions: {} values for {} assets",
                    f.len(),
                    portfolio.len()
                )));
            }
            f.clone()
        }
        None => {
            let linear = kelly::solve_portfolio(portfolio)?;
            project_simplex(&linear.fractions)
        }
    };
    let config = sim::SimConfig::new(flags.rounds, flags.replications, flags.seed)?;
    let est = sim::growth_rate_mc(portfolio, &f, &config)?;

    let shown: Vec<String> = f.iter().map(|v| format!("{v:.9}")).collect();
    writeln!(out, "portfolio: {} asset(s), dependence: {}", portfolio.len(), describe_dependence(portfolio)).ok();
    writeln!(out, "fractions: [{}]", shown.join(", ")).ok();
    writeln!(
        out,
        "growth per round: {:.9} +/- {:.9} ({} replications x {} rounds, seed {})",
        est.g_mean, est.g_stderr, flags.replications, flags.rounds, flags.seed
    )
    .ok();

    if flags.verify {
        if !(flags.delta.is_finite() && flags.delta > 0.0) {
            return Err(CliError::validation(format!(
                "--delta must be positive, got {}",
                flags.delta
            )));
        }
        writeln!(out, "verify (delta = {}):", flags.delta).ok();
        let names = loaded.asset_names();
        let mut local_max = true;
        for (l, name) in names.iter().enumerate() {
            for sign in [-1.0, 1.0] {
                let mut pert = f.clone();
                pert[l] += sign * flags.delta;
                let tag = if sign < 0.0 { "-" } else { "+" };
                match sim::compare_growth(portfolio, &f, &pert, &config) {
                    Ok(cmp) => {
                        let verdict = if cmp.diff_mean > 2.0 * cmp.diff_stderr {
                            "better than perturbation"
                        } else if cmp.diff_mean < -2.0 * cmp.diff_stderr {
                            local_max = false;
                            "WORSE than perturbation"
                        } else {
                            "statistically indistinguishable"
                        };
                        writeln!(
                            out,
                            "  {name} {tag}{}: diff = {:+.3e} +/- {:.3e} ({verdict})",
                            flags.delta, cmp.diff_mean, cmp.diff_stderr
                        )
                        .ok();
                    }
                    Err(e) => {
                        writeln!(out, "  {name} {tag}{}: skipped ({e})", flags.delta).ok();
                    }
                }
            }
        }
        writeln!(
            out,
            "local maximum within statistical error: {}",
            if local_max { "yes" } else { "no" }
        )
        .ok();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// exact

pub fn cmd_exact(loaded: &LoadedSpec, out: &mut impl Write) -> CliResult<()> {
    let portfolio = &loaded.portfolio;
    let linear = kelly::solve_portfolio(portfolio)?;
    let names = loaded.asset_names();
    let w = name_width(&names);

    let (fractions, residual, iterations, status) = if portfolio.len() == 1 {
        let s = exact::solve_exact_single(&portfolio.assets()[0])?;
        let status = match s.status {
            exact::SolveStatus::Interior => "interior root",
            exact::SolveStatus::NoEdge => "no positive edge (NoEdge)",
            exact::SolveStatus::AtBoundary => "criterion positive up to f = 1 (AtBoundary)",
        };
        (vec![s.fraction], s.residual.abs(), s.iterations, status)
    } else {
        let f0 = exact::initial_guess(portfolio)?;
        let s = exact::solve_exact_multi(portfolio, &f0)?;
        (s.fractions, s.residual_norm, s.iterations, "interior root")
    };

    writeln!(out, "portfolio: {} asset(s), dependence: {}", portfolio.len(), describe_dependence(portfolio)).ok();
    writeln!(out, "{:<w$}  {:>14}  {:>14}  {:>9}", "asset", "exact", "linear", "rel diff").ok();
    for (i, name) in names.iter().enumerate() {
        let e = fractions[i];
        let lin = linear.fractions[i];
        let rel = if e != 0.0 {
            format!("{:.2}%", 100.0 * (e - lin).abs() / e.abs())
        } else {
            "-".to_string()
        };
        writeln!(out, "{name:<w$}  {e:>14.9}  {lin:>14.9}  {rel:>9}").ok();
    }
    let (te, tl): (f64, f64) = (fractions.iter().sum(), linear.total);
    writeln!(out, "{:<w$}  {te:>14.9}  {tl:>14.9}", "total").ok();
    writeln!(out, "status: {status}; residual {residual:.3e}; {iterations} iteration(s)").ok();
    writeln!(out, "linear flags: {}", linear.flags).ok();
    Ok(())
}
