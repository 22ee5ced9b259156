//! `matchplan` command-line front end.

mod error;
mod verify;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use matchplan::dh::{solve_dh_relaxation, RelaxationForm};
use matchplan::market::{MarketInstance, PlatformDesign, Side};
use matchplan::sim::{
    build_policy, generate_instance, run_simulation, sweep, write_csv, GeneratorKind, PolicyKind, PolicyResult,
    SimulationConfig, SweepAxis,
};
use matchplan::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use error::CliError;

#[derive(Parser)]
#[command(name = "matchplan", version, about = "Plan and simulate displays in two-sided matching markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate {
        /// nonsubmodular, greedy_adversarial, pm_adversarial or synthetic.
        #[arg(long)]
        kind: String,
        /// JSON object with the generator's parameters, e.g. '{"n":4,"epsilon":0.1}'.
        #[arg(long, default_value = "{}")]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo replications of one or more policies; writes CSV.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        /// Design label such as two:first; repeatable. Defaults to the instance's design.
        #[arg(long)]
        design: Vec<PlatformDesign>,
        /// Policy name; repeatable.
        #[arg(long, required = true)]
        policy: Vec<PolicyKind>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print mean ± standard error per policy instead of every replication.
        #[arg(long)]
        summary: bool,
        /// Run replications on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// One simulation per value of a like-probability scale or capacity.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        design: Option<PlatformDesign>,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated values, e.g. 1,1.25,1.5.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SideArg::J)]
        side: SideArg,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the planning model once and print its plan as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        design: Option<PlatformDesign>,
        /// dh (two-period model) or dh-multi (multi-period model).
        #[arg(long, default_value = "dh")]
        policy: PolicyKind,
    },
    /// Check every instance file in a directory against the exact oracles.
    Verify {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    ProbScale,
    Capacity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    I,
    J,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::I => Side::I,
            SideArg::J => Side::J,
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(path: &Path) -> Result<MarketInstance, CliError> {
    MarketInstance::load(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn design_for(instance: &MarketInstance, given: Option<PlatformDesign>) -> Result<PlatformDesign, CliError> {
    given
        .or_else(|| instance.design())
        .ok_or_else(|| CliError::Input("the instance names no design; pass --design".into()))
}

fn generate(kind: &str, params: &str, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let mut object: Value =
        serde_json::from_str(params).map_err(|e| CliError::Input(format!("--params is not JSON: {e}")))?;
    let map = object.as_object_mut().ok_or_else(|| CliError::Input("--params must be a JSON object".into()))?;
    map.insert("kind".into(), Value::String(kind.into()));
    let kind: GeneratorKind =
        serde_json::from_value(object).map_err(|e| CliError::Input(format!("bad generator parameters: {e}")))?;
    let instance = generate_instance(&kind, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let mut w = output(out)?;
    writeln!(w, "{}", instance.to_json())?;
    Ok(())
}

fn write_summary(w: &mut dyn Write, results: &[PolicyResult]) -> Result<(), CliError> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["policy", "design", "replications", "mean", "std_error", "mean_seq", "mean_nonseq"])?;
    for r in results {
        let s = r.summary();
        csv.write_record([
            r.policy.clone(),
            r.design.to_string(),
            r.replications.len().to_string(),
            format!("{:.6}", s.mean),
            format!("{:.6}", s.std_error),
            format!("{:.6}", s.mean_seq),
            format!("{:.6}", s.mean_nonseq),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    instance: &Path,
    designs: Vec<PlatformDesign>,
    policies: &[PolicyKind],
    reps: usize,
    seed: u64,
    out: Option<&Path>,
    summary: bool,
    sequential: bool,
) -> Result<(), CliError> {
    let instance = load(instance)?;
    let designs = if designs.is_empty() { vec![design_for(&instance, None)?] } else { designs };
    let execution = if sequential { Execution::Sequential } else { Execution::Parallel };
    let config = SimulationConfig { replications: reps, master_seed: seed, execution };
    let mut results = Vec::new();
    for &design in &designs {
        for &kind in policies {
            let policy = build_policy(kind, &instance, design)?;
            log::info!("simulating {kind} under {design}");
            results.push(run_simulation(&instance, policy.as_ref(), &config)?);
        }
    }
    let mut w = output(out)?;
    if summary {
        write_summary(&mut w, &results)
    } else {
        Ok(write_csv(w, seed, &results)?)
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sweep(
    instance: &Path,
    design: Option<PlatformDesign>,
    policy: PolicyKind,
    axis: AxisArg,
    values: Vec<f64>,
    side: Side,
    reps: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let instance = load(instance)?;
    let design = design_for(&instance, design)?;
    let axis = match axis {
        AxisArg::ProbScale => SweepAxis::ProbScale { side, values },
        AxisArg::Capacity => {
            let ks = values
                .iter()
                .map(|&v| {
                    if v.fract() == 0.0 && v >= 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(CliError::Input(format!("capacity {v} is not a whole number")))
                    }
                })
                .collect::<Result<_, _>>()?;
            SweepAxis::Capacity { side, values: ks }
        }
    };
    let axis_name = match axis {
        SweepAxis::ProbScale { .. } => "prob_scale",
        SweepAxis::Capacity { .. } => "capacity",
    };
    let config = SimulationConfig { replications: reps, master_seed: seed, execution: Execution::Parallel };
    let rows = sweep(&instance, design, &axis, &config, |inst, d| build_policy(policy, inst, d))?;
    let mut csv = csv::Writer::from_writer(output(out)?);
    csv.write_record(["axis", "side", "value", "policy", "design", "replications", "mean", "std_error"])?;
    let side_name = match side {
        Side::I => "i",
        Side::J => "j",
    };
    for row in rows {
        let s = row.result.summary();
        csv.write_record([
            axis_name.to_string(),
            side_name.to_string(),
            row.value,
            row.result.policy.clone(),
            row.result.design.to_string(),
            row.result.replications.len().to_string(),
            format!("{:.6}", s.mean),
            format!("{:.6}", s.std_error),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn solve(instance: &Path, design: Option<PlatformDesign>, policy: PolicyKind) -> Result<(), CliError> {
    let instance = load(instance)?;
    let design = design_for(&instance, design)?;
    let form = match policy {
        PolicyKind::Dh => RelaxationForm::TwoPeriod,
        PolicyKind::DhMulti => RelaxationForm::MultiPeriod,
        other => return Err(CliError::Input(format!("solve supports dh and dh-multi, not {other}"))),
    };
    let solution = solve_dh_relaxation(&instance, &design, form)?;
    let name = |u: usize| instance.name(u).to_string();
    let users: serde_json::Map<String, Value> = instance
        .users()
        .map(|u| {
            let sees: Vec<String> = solution.x.iter().filter(|&&(v, _)| v == u).map(|&(_, p)| name(p)).collect();
            let mutual: Vec<String> = solution
                .w
                .iter()
                .filter_map(|&(i, j)| match (i == u, j == u) {
                    (true, _) => Some(name(j)),
                    (_, true) => Some(name(i)),
                    _ => None,
                })
                .collect();
            (name(u), json!({ "sees": sees, "mutual": mutual }))
        })
        .collect();
    let report = json!({
        "policy": policy.name(),
        "design": design.to_string(),
        "objective": solution.objective_value,
        "plan": {
            "x": solution.x.iter().map(|&(v, p)| [name(v), name(p)]).collect::<Vec<_>>(),
            "w": solution.w.iter().map(|&(i, j)| [name(i), name(j)]).collect::<Vec<_>>(),
        },
        "y": solution.y.iter().map(|(&(u, v), &val)| json!({"user": name(u), "member": name(v), "value": val})).collect::<Vec<_>>(),
        "users": users,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json values serialize"));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { kind, params, seed, out } => generate(&kind, &params, seed, out.as_deref()),
        Command::Simulate { instance, design, policy, reps, seed, out, summary, sequential } => {
            simulate(&instance, design, &policy, reps, seed, out.as_deref(), summary, sequential)
        }
        Command::Sweep { instance, design, policy, axis, values, side, reps, seed, out } => {
            run_sweep(&instance, design, policy, axis, values, side.into(), reps, seed, out.as_deref())
        }
        Command::Solve { instance, design, policy } => solve(&instance, design, policy),
        Command::Verify { dir, out } => verify::run(&dir, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
