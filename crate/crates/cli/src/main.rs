use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coopreg::design::{FeasibilityReport, Verdict};
use coopreg::interevent::{self, ChiConstants};
use coopreg::linalg::matrix_to_rows;
use coopreg::simkit::{self, builtin, export, PreparedScenario, Scenario, Trace};
use coopreg::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "coopreg", version, about = "Sampled-data distributed observers for cooperative output regulation")]
struct Cli {
    /// Print JSON instead of a text table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and export its trace.
    Simulate {
        /// Scenario JSON file, or example1/example2/example3.
        #[arg(long)]
        scenario: String,
        /// Output directory; the trace goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
    /// Feasibility report at sampling period h.
    Design {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        h: f64,
    },
    /// Per-pair and intersected observer gain intervals.
    MuInterval {
        #[arg(long)]
        scenario: String,
        /// Defaults to the scenario's sampling period.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Feasibility over a grid of sampling periods.
    SweepH {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
    },
    /// Inter-event step and time bounds as CSV.
    Bounds {
        #[arg(long)]
        scenario: String,
        /// Decay rate of the trigger envelope.
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        k_max: u64,
        #[arg(long, default_value_t = 10)]
        k_step: u64,
    },
    /// Regulator equation solutions per follower.
    Regulator {
        #[arg(long)]
        scenario: String,
    },
    /// Run one of the built-in examples and summarize it.
    Example {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=3))]
        index: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for export::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => export::Format::Csv,
            FormatArg::Json => export::Format::Json,
        }
    }
}

enum Failure {
    Input(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleDesign(_) => Failure::Infeasible(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Simulate { scenario, out, format } => {
            let sc = load_scenario(scenario)?;
            simulate(&sc, out.as_deref(), *format, cli.json)
        }
        Command::Design { scenario, h } => design(&load_scenario(scenario)?, *h, cli.json),
        Command::MuInterval { scenario, h } => {
            let sc = load_scenario(scenario)?;
            mu_interval(&sc, h.unwrap_or(sc.observer.h), cli.json)
        }
        Command::SweepH { scenario, from, to, step } => {
            sweep(&load_scenario(scenario)?, *from, *to, *step, cli.json)
        }
        Command::Bounds { scenario, alpha, k_max, k_step } => {
            bounds(&load_scenario(scenario)?, *alpha, *k_max, *k_step, cli.json)
        }
        Command::Regulator { scenario } => regulator(&load_scenario(scenario)?, cli.json),
        Command::Example { index, out, format } => {
            let sc = builtin::builtin(*index).ok_or_else(|| Failure::Input(format!("no example {index}")))?;
            report(&sc, out.as_deref(), *format, cli.json)
        }
    }
}

fn load_scenario(arg: &str) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(Scenario::load(path)?);
    }
    let builtin = match arg {
        "example1" => builtin::builtin(1),
        "example2" => builtin::builtin(2),
        "example3" => builtin::builtin(3),
        _ => None,
    };
    builtin.ok_or_else(|| Failure::Input(format!("scenario file {arg:?} not found")))
}

fn prepare(sc: &Scenario) -> Result<PreparedScenario, Failure> {
    Ok(sc.prepare()?)
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.extend(rows.iter().map(|r| line(r.iter().map(String::as_str).collect())));
    out.join("\n")
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6}")
    }
}

fn interval(iv: Option<(f64, f64)>) -> String {
    match iv {
        Some((a, b)) => format!("({}, {})", num(a), num(b)),
        None => "empty".into(),
    }
}

fn json_interval(iv: Option<(f64, f64)>) -> Value {
    match iv {
        Some((a, b)) => json!([a, if b.is_finite() { json!(b) } else { json!("inf") }]),
        None => Value::Null,
    }
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "yes",
        Verdict::Fails => "NO",
        Verdict::NotApplicable => "-",
    }
}

fn complex(z: (f64, f64)) -> String {
    if z.1 == 0.0 {
        format!("{:.6}", z.0)
    } else {
        format!("{:.6}{:+.6}i", z.0, z.1)
    }
}

fn report_json(r: &FeasibilityReport) -> Value {
    json!({
        "h": r.h,
        "feasible": r.feasible,
        "phase_condition": r.phase_condition,
        "magnitude_condition": r.magnitude_condition,
        "spectral_mapping_condition": r.spectral_mapping_condition,
        "intersection": json_interval(r.intersection),
        "suggested_mu": r.suggested_mu,
        "pairs": r.pairs.iter().map(|p| json!({
            "lambda_i": [p.lambda_i.re, p.lambda_i.im],
            "lambda_q": [p.lambda_q.re, p.lambda_q.im],
            "class": format!("{:?}", p.class),
            "multiplicity": p.multiplicity,
            "psi": p.psi,
            "phase": format!("{:?}", p.phase),
            "magnitude": format!("{:?}", p.magnitude),
            "spectral_mapping": format!("{:?}", p.spectral_mapping),
            "alpha": p.coefficients.alpha,
            "beta": p.coefficients.beta,
            "gamma": p.coefficients.gamma,
            "interval": json_interval(p.interval),
        })).collect::<Vec<_>>(),
    })
}

fn design(sc: &Scenario, h: f64, as_json: bool) -> Outcome {
    let report = sc.design_problem()?.feasibility(h)?;
    if as_json {
        print_json(&report_json(&report));
    } else {
        let rows: Vec<Vec<String>> = report
            .pairs
            .iter()
            .map(|p| {
                vec![
                    complex((p.lambda_i.re, p.lambda_i.im)),
                    complex((p.lambda_q.re, p.lambda_q.im)),
                    format!("{:?}", p.class),
                    p.psi.map(num).unwrap_or_else(|| "-".into()),
                    verdict(p.phase).into(),
                    verdict(p.magnitude).into(),
                    verdict(p.spectral_mapping).into(),
                    interval(p.interval),
                ]
            })
            .collect();
        println!(
            "{}",
            table(&["lambda_i", "lambda_q", "class", "psi", "phase", "magnitude", "mapping", "mu interval"], &rows)
        );
        println!();
        println!("h             {}", num(h));
        println!("intersection  {}", interval(report.intersection));
        println!("suggested mu  {}", report.suggested_mu.map(num).unwrap_or_else(|| "-".into()));
        println!("feasible      {}", report.feasible);
    }
    if report.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible(format!("no observer gain makes F(mu) Schur at h = {h}")))
    }
}

fn mu_interval(sc: &Scenario, h: f64, as_json: bool) -> Outcome {
    let gi = sc.design_problem()?.mu_interval(h)?;
    if as_json {
        print_json(&json!({
            "h": h,
            "pairs": gi.pairs.iter().map(|p| json!({
                "follower": p.follower,
                "eigen": p.eigen,
                "interval": json_interval(p.interval),
            })).collect::<Vec<_>>(),
            "intersection": json_interval(gi.intersection),
        }));
    } else {
        let rows: Vec<Vec<String>> = gi
            .pairs
            .iter()
            .map(|p| vec![(p.follower + 1).to_string(), (p.eigen + 1).to_string(), interval(p.interval)])
            .collect();
        println!("{}", table(&["i", "q", "mu interval"], &rows));
        println!();
        println!("intersection  {}", interval(gi.intersection));
    }
    match gi.intersection {
        Some(_) => Ok(()),
        None => Err(Failure::Infeasible(format!("gain intervals do not intersect at h = {h}"))),
    }
}

fn sweep(sc: &Scenario, from: f64, to: f64, step: f64, as_json: bool) -> Outcome {
    if !(step > 0.0 && step.is_finite() && from > 0.0 && to >= from && to.is_finite()) {
        return Err(Failure::Input("need 0 < from <= to and step > 0".into()));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|j| from + j as f64 * step).collect();
    let rows = sc.design_problem()?.sweep_h(&grid)?;
    if as_json {
        print_json(&json!(rows
            .iter()
            .map(|r| json!({"h": r.h, "feasible": r.feasible, "interval": json_interval(r.interval)}))
            .collect::<Vec<_>>()));
    } else {
        let cells: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![num(r.h), r.feasible.to_string(), interval(r.interval)])
            .collect();
        println!("{}", table(&["h", "feasible", "mu interval"], &cells));
    }
    Ok(())
}

fn bounds(sc: &Scenario, alpha: f64, k_max: u64, k_step: u64, as_json: bool) -> Outcome {
    if !(alpha > 0.0 && alpha.is_finite()) || k_step == 0 {
        return Err(Failure::Input("alpha must be positive and k-step at least 1".into()));
    }
    let p = prepare(sc)?;
    let mut env = p.trigger_envelope()?;
    env.alpha = alpha;
    let inputs = p.bound_inputs(env)?;
    let settled = inputs.contraction.settled;
    if !settled {
        eprintln!(
            "warning: ||(F/gamma)^k|| still growing at k = {}; beta is a horizon value",
            inputs.contraction.k_max
        );
    }
    let c = ChiConstants::new(&inputs)?;
    let mut rows = Vec::new();
    let mut k = 0;
    while k <= k_max {
        let s = interevent::solve_bound(&c, k)?;
        let (tau, _) = interevent::solve_time_bounds(&c, k)?;
        rows.push((k, s, tau));
        k += k_step;
    }
    let s_star = interevent::solve_asymptotic(&c)?;
    let (_, tau_star) = interevent::solve_time_bounds(&c, 0)?;
    if as_json {
        print_json(&json!({
            "gamma": c.gamma,
            "beta": c.beta,
            "ratio": c.ratio,
            "beta_settled": settled,
            "rows": rows.iter().map(|&(k, s, t)| json!({"k": k, "s": s, "tau_d": t})).collect::<Vec<_>>(),
            "s_star": s_star,
            "tau_d_star": tau_star,
        }));
    } else {
        println!("k,s,tau_d");
        for (k, s, t) in rows {
            println!("{k},{s},{t}");
        }
        println!("inf,{s_star},{tau_star}");
    }
    Ok(())
}

fn regulator(sc: &Scenario, as_json: bool) -> Outcome {
    let p = prepare(sc)?;
    if p.followers.is_empty() {
        return Err(Failure::Input("scenario has no follower models".into()));
    }
    if as_json {
        print_json(&json!(p
            .followers
            .iter()
            .enumerate()
            .map(|(i, f)| json!({
                "follower": i + 1,
                "x": matrix_to_rows(&f.solution.x),
                "u": matrix_to_rows(&f.solution.u),
                "residual_state": f.solution.residual_state,
                "residual_output": f.solution.residual_output,
            }))
            .collect::<Vec<_>>()));
        return Ok(());
    }
    for (i, f) in p.followers.iter().enumerate() {
        println!("follower {}", i + 1);
        println!("X =\n{}", matrix(&f.solution.x));
        println!("U =\n{}", matrix(&f.solution.u));
        println!("residuals  state {:.3e}  output {:.3e}", f.solution.residual_state, f.solution.residual_output);
        println!();
    }
    Ok(())
}

/// Rows at six decimals, with values below 1e-12 shown as 0.
fn matrix(m: &nalgebra::DMatrix<f64>) -> String {
    matrix_to_rows(m)
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| format!("{:>12.6}", if x.abs() < 1e-12 { 0.0 } else { x }))
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn summary(trace: &Trace, sc: &Scenario) -> Vec<(String, String)> {
    let mut out = vec![
        ("scenario".to_string(), trace.scenario.clone()),
        ("h".into(), num(trace.h)),
        ("mu".into(), num(trace.mu)),
        ("samples".into(), trace.samples.len().to_string()),
        ("observer events".into(), trace.observer_events.len().to_string()),
        ("controller events".into(), trace.controller_events.len().to_string()),
    ];
    if let Some(e) = trace.final_estimation_error() {
        out.push(("final estimation error".into(), format!("{e:.3e}")));
        if let Some(eps) = sc.thresholds.eps_conv {
            out.push(("converged".into(), (e < eps).to_string()));
        }
    }
    if !trace.state_dims.is_empty() {
        if let Some(e) = trace.final_regulation_error() {
            out.push(("final regulation error".into(), format!("{e:.3e}")));
            if let Some(eps) = sc.thresholds.eps_reg {
                out.push(("regulated".into(), (e < eps).to_string()));
            }
        }
    }
    out
}

fn simulate(sc: &Scenario, out: Option<&Path>, format: FormatArg, as_json: bool) -> Outcome {
    if out.is_some() {
        return report(sc, out, format, as_json);
    }
    let trace = simkit::run(sc)?;
    match format {
        FormatArg::Json => println!("{}", trace.to_json()?),
        FormatArg::Csv => export::write_trace_csv(&trace, std::io::stdout().lock())?,
    }
    Ok(())
}

/// Runs the scenario, writes files when `out` is given and prints a summary.
fn report(sc: &Scenario, out: Option<&Path>, format: FormatArg, as_json: bool) -> Outcome {
    let trace = simkit::run(sc)?;
    let files = match out {
        Some(dir) => export::export(&trace, dir, format.into())?,
        None => Vec::new(),
    };
    let info = summary(&trace, sc);
    if as_json {
        let mut obj = serde_json::Map::new();
        for (k, v) in &info {
            obj.insert(k.replace(' ', "_"), json!(v));
        }
        obj.insert("files".into(), json!(files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>()));
        print_json(&Value::Object(obj));
    } else {
        let rows: Vec<Vec<String>> = info.into_iter().map(|(k, v)| vec![k, v]).collect();
        println!("{}", table(&["quantity", "value"], &rows));
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
