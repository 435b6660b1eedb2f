//! `gdopt` command line: search, score, compare, grid-check, scenarios.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::design::{Bounds, DesignMatrix};
use crate::design_io::{read_design_csv, write_design_csv};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::runner::{
    cost_summary, run_batch, summarize, write_catalog_json, write_runs_csv, write_summary_csv, write_trace_csv,
};
use crate::scenario::{builtin_scenario, ScenarioConfig, BUILTIN_SCENARIOS};
use crate::scoring::{g_efficiency, relative_efficiency, GScore, ScoringGrid};
use crate::verify::{rescore_with, FineMode, RescoreOptions, RescoreReport};

#[derive(Debug, Parser)]
#[command(name = "gdopt", version, about = "Exact G-optimal response-surface designs by particle swarm search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a batch of seeded searches and write the catalog and best design.
    Search(SearchArgs),
    /// Score a design CSV on a grid.
    Score(ScoreArgs),
    /// Relative G-efficiency of design A against design B.
    Compare(CompareArgs),
    /// Rescore a design on a finer grid (or by random sampling).
    GridCheck(GridCheckArgs),
    /// List the built-in scenarios.
    Scenarios(ScenariosArgs),
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    /// Number of searches; defaults to the built-in count for (K, N), else 140.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = crate::pso::SWARM_SIZE)]
    particles: usize,
    #[arg(long, default_value_t = crate::scoring::DEFAULT_GRID_LEVELS)]
    grid: usize,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-iteration best scores and write trace.csv.
    #[arg(long)]
    trace: bool,
    /// Efficiency of a reference design for relative-efficiency columns.
    #[arg(long)]
    baseline: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    stagnation_limit: Option<usize>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long, default_value_t = crate::scoring::DEFAULT_GRID_LEVELS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = crate::scoring::DEFAULT_GRID_LEVELS)]
    grid: usize,
}

#[derive(Debug, Args)]
struct GridCheckArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long, default_value_t = crate::scoring::DEFAULT_GRID_LEVELS)]
    grid: usize,
    #[arg(long, default_value_t = crate::verify::DEFAULT_FINE_LEVELS)]
    fine_grid: usize,
    /// Sample this many uniform points instead of a full fine grid.
    #[arg(long)]
    monte_carlo: Option<usize>,
    #[arg(long, default_value_t = 0)]
    mc_seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ScenariosArgs {
    #[arg(long)]
    json: bool,
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    cli_main_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn cli_main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let result = match cli.command {
        Command::Search(a) => search(&a, out),
        Command::Score(a) => score(&a, out),
        Command::Compare(a) => compare(&a, out),
        Command::GridCheck(a) => grid_check(&a, out),
        Command::Scenarios(a) => scenarios(&a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn fmt_point(score: &GScore) -> String {
    match &score.argmax {
        Some(p) => {
            let c: Vec<String> = p.coords().iter().map(|v| v.to_string()).collect();
            format!("({})", c.join(", "))
        }
        None => "none (singular design)".into(),
    }
}

fn load(path: &Path, grid_levels: usize) -> Result<(DesignMatrix, ModelSpec, GScore)> {
    let design = read_design_csv(path)?;
    let spec = ModelSpec::quadratic(design.k())?;
    let bounds = Bounds::unit(design.k());
    design.check_bounds(&bounds).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let score = ScoringGrid::equispaced(&spec, grid_levels, &bounds)?.score(&design)?;
    Ok((design, spec, score))
}

fn score(a: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let (design, spec, g) = load(&a.design, a.grid)?;
    let eff = g_efficiency(g.value, spec.p())?;
    write_out(
        out,
        &format!(
            "K = {}, N = {}, p = {}, grid = {}^{}\nG = {}\nG_eff = {:.6}\nargmax = {}\n",
            spec.k(),
            design.n(),
            spec.p(),
            a.grid,
            spec.k(),
            g.value,
            eff,
            fmt_point(&g)
        ),
    )
}

fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let (da, spec_a, ga) = load(&a.a, a.grid)?;
    let (db, _, gb) = load(&a.b, a.grid)?;
    if da.k() != db.k() {
        return Err(Error::invalid(format!(
            "{} has K = {} but {} has K = {}",
            a.a.display(),
            da.k(),
            a.b.display(),
            db.k()
        )));
    }
    let (ea, eb) = (g_efficiency(ga.value, spec_a.p())?, g_efficiency(gb.value, spec_a.p())?);
    if eb == 0.0 {
        return Err(Error::invalid(format!("{} is singular; relative efficiency is undefined", a.b.display())));
    }
    let rel = relative_efficiency(ea, eb)?;
    write_out(
        out,
        &format!(
            "A: G = {}, G_eff = {ea:.6}\nB: G = {}, G_eff = {eb:.6}\nreleff = {rel:.6}\n",
            ga.value, gb.value
        ),
    )
}

fn report_text(r: &RescoreReport) -> String {
    let fine_label = match r.monte_carlo_samples {
        Some(s) => format!("monte carlo ({s} samples)"),
        None => format!("{}-level grid", r.fine_levels),
    };
    let argmax = r
        .argmax_fine
        .as_ref()
        .map(|p| {
            let c: Vec<String> = p.coords().iter().map(|v| v.to_string()).collect();
            format!("({})", c.join(", "))
        })
        .unwrap_or_else(|| "none".into());
    format!(
        "{:<16}{}\n{:<16}{}\n{:<16}{}\n{:<16}{:.6}\n{:<16}{:.6}\n{:<16}{:.6}\n{:<16}{}\n{:<16}{}\n",
        "fine scoring", fine_label,
        "coarse G", r.coarse_g,
        "fine G", r.fine_g,
        "coarse G_eff", r.coarse_g_eff,
        "fine G_eff", r.fine_g_eff,
        "discrepancy %", r.discrepancy_pct,
        "fine argmax", argmax,
        "status", if r.singular { "singular" } else if r.suspect { "SUSPECT" } else { "ok" },
    )
}

fn grid_check(a: &GridCheckArgs, out: &mut dyn Write) -> Result<()> {
    let design = read_design_csv(&a.design)?;
    let spec = ModelSpec::quadratic(design.k())?;
    let mut opts = RescoreOptions::new(spec.k(), a.fine_grid);
    opts.coarse_levels = a.grid;
    design.check_bounds(&opts.bounds).map_err(|e| Error::Parse {
        path: a.design.clone(),
        message: e.to_string(),
    })?;
    if let Some(samples) = a.monte_carlo {
        opts.mode = FineMode::MonteCarlo { samples, seed: a.mc_seed };
    }
    let r = rescore_with(&design, &spec, &opts)?;
    let text = if a.json {
        serde_json::to_string_pretty(&r)? + "\n"
    } else {
        report_text(&r)
    };
    write_out(out, &text)
}

fn search(a: &SearchArgs, out: &mut dyn Write) -> Result<()> {
    let builtin = builtin_scenario(a.k, a.n);
    let mut scenario = ScenarioConfig::new(a.k, a.n)?;
    scenario.n_searches = a.runs.or(builtin.map(|b| b.n_searches)).unwrap_or(140);
    scenario.base_seed = a.seed;
    scenario.grid_levels = a.grid;
    if let Some(t) = a.threads {
        scenario.parallelism = t;
    }
    scenario.pso.swarm_size = a.particles;
    scenario.pso.record_trace = a.trace;
    if let Some(m) = a.max_iterations {
        scenario.pso.max_iterations = m;
    }
    if let Some(s) = a.stagnation_limit {
        scenario.pso.stagnation_limit = s;
    }
    scenario.validate()?;

    let baseline = a.baseline.or(builtin.and_then(|b| b.published.cexch_eff));
    let catalog = run_batch(&scenario)?;
    let summary = summarize(&catalog, baseline)?;
    let cost = cost_summary(&catalog, 200)?;
    let best = catalog.best();
    let spec = scenario.model_spec()?;
    let audit = rescore_with(&best.best_design, &spec, &RescoreOptions::default_for(spec.k()))?;

    let mut text = format!(
        "K = {}, N = {}, p = {}, searches = {}, seeds {}..{}\n\
         best G = {} (G_eff = {:.6}) from seed {}\n\
         evaluations = {} (log10 {:.3}); scaled to {} searches: {:.0} (95% CI {:.0}..{:.0})\n",
        a.k,
        a.n,
        spec.p(),
        scenario.n_searches,
        scenario.base_seed,
        scenario.base_seed + scenario.n_searches as u64 - 1,
        best.best_g,
        best.best_g_eff,
        best.seed,
        cost.total_evals,
        cost.log10_evals,
        cost.target_n_runs,
        cost.scaled_estimate,
        cost.scaled_ci.0,
        cost.scaled_ci.1,
    );
    if let (Some(b), Some(lo), Some(med), Some(hi)) =
        (baseline, summary.min_releff, summary.median_releff, summary.max_releff)
    {
        text += &format!("releff vs baseline {b}: min {lo:.2}, median {med:.2}, max {hi:.2}\n");
    }
    text += &format!(
        "fine rescoring of best design: G = {} ({:+.4}%){}\n",
        audit.fine_g,
        audit.discrepancy_pct,
        if audit.suspect { " SUSPECT" } else { "" }
    );

    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_catalog_json(&dir.join("catalog.json"), &catalog)?;
        write_design_csv(&dir.join("best_design.csv"), &best.best_design)?;
        write_summary_csv(&dir.join("summary.csv"), std::slice::from_ref(&summary))?;
        write_runs_csv(&dir.join("runs.csv"), &catalog, &summary)?;
        if a.trace {
            write_trace_csv(&dir.join("trace.csv"), &catalog)?;
        }
        text += &format!("wrote {}\n", dir.display());
    }
    write_out(out, &text)
}

fn scenarios(a: &ScenariosArgs, out: &mut dyn Write) -> Result<()> {
    if a.json {
        return write_out(out, &(serde_json::to_string_pretty(&BUILTIN_SCENARIOS)? + "\n"));
    }
    let mut text = format!(
        "{:>2} {:>3} {:>3} {:>5}  {:>12} {:>12}  {:>10} {:>8}  {}\n",
        "K", "N", "p", "runs", "releff_vs_GA", "log10_evals", "CEXCH_eff", "PSO_eff", "source"
    );
    let show = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    for s in &BUILTIN_SCENARIOS {
        text += &format!(
            "{:>2} {:>3} {:>3} {:>5}  {:>12} {:>12}  {:>10} {:>8}  {}\n",
            s.k,
            s.n,
            crate::model::p_count(s.k)?,
            s.n_searches,
            show(s.published.pso_releff_vs_ga),
            s.published.pso_log10_evals.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into()),
            show(s.published.cexch_eff),
            show(s.published.pso_eff),
            s.published.cexch_source.unwrap_or("-"),
        );
    }
    write_out(out, &text)
}

