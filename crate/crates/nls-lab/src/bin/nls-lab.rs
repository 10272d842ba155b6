use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nls_core::effective::{integrate_effective, predict_outcome, EffectiveSystem};
use nls_lab::bundle::Bundle;
use nls_lab::config::{PotentialConfig, PotentialDirection, Scenario, ScenarioKind};
use nls_lab::reference::Reference;
use nls_lab::threads::init_threads;
use nls_lab::{run_scenario, ScenarioReport};

#[derive(Parser)]
#[command(name = "nls-lab", version, about = "NLS soliton scenarios in slowly varying media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a PDE scenario (free, interaction, reflection, 2D) and write its bundle.
    Simulate(ConfigArgs),
    /// Integrate the effective ODE of a scenario and write the trajectory.
    Effective(ConfigArgs),
    /// Print the predicted asymptotic outcome.
    Predict(PredictArgs),
    /// Soliton identities and profile residual.
    VerifyIdentities(SuiteArgs),
    /// Linearized-operator and correction-profile checks.
    VerifyOperators(SuiteArgs),
    /// Residual of the corrected ansatz against ε.
    ResidualScaling(ConfigArgs),
    /// Interaction runs over several ε with fitted rates.
    Converge(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    config: PathBuf,
    /// Override the bundle directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    m: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Increasing,
    Decreasing,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    m: f64,
    #[arg(long)]
    v0: f64,
    #[arg(long, value_enum, default_value = "increasing")]
    potential: Dir,
    #[arg(long, default_value_t = 1.0)]
    a_minus: f64,
    #[arg(long, default_value_t = 2.0)]
    a_plus: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

fn load(args: &ConfigArgs, kinds: &[ScenarioKind]) -> anyhow::Result<Scenario> {
    let mut s = Scenario::load(&args.config)?;
    if !kinds.contains(&s.kind) {
        anyhow::bail!("{} is a {:?} scenario; this command accepts {kinds:?}", args.config.display(), s.kind);
    }
    if let Some(out) = &args.out {
        s.output.dir = Some(out.clone());
    }
    Ok(s)
}

fn print_report(r: &ScenarioReport) {
    for c in &r.checks {
        println!(
            "{} {:<32} {:>12.4e}  (threshold {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    if let Some(f) = &r.failure {
        println!("failure: {f}");
    }
    if let Some(b) = &r.bundle {
        println!("bundle: {}", b.display());
    }
    println!("{}: {}", r.name, if r.passed { "passed" } else { "FAILED" });
}

fn suite(kind: ScenarioKind, a: &SuiteArgs) -> anyhow::Result<ScenarioReport> {
    let mut s = Scenario::new(&format!("{kind:?}-m{}", a.m), kind);
    s.m = a.m;
    s.output.dir = a.out.clone();
    run_scenario(&s)
}

fn effective(args: &ConfigArgs) -> anyhow::Result<bool> {
    let s = load(args, &[ScenarioKind::Interaction1D, ScenarioKind::Reflection1D])?;
    let v0 = s.v0()?;
    let pot = s.potential_spec()?;
    let sys = EffectiveSystem::one_d(s.m, pot)?;
    let reference = Reference::compute(sys, v0, predict_outcome(s.m, v0, &pot)?)?;
    let w = reference.window(s.horizon, v0)?;
    let traj = reference.restricted(w);
    // an independent integration over the window for the drift report
    let direct = integrate_effective(&sys, traj.states[0], w.t0, w.t1, nls_core::effective::default_dt(pot.epsilon))?;
    let (_, end) = traj.last();
    println!("window [{:.4}, {:.4}]", w.t0, w.t1);
    println!("prediction {:?}: c_inf = {:.10}, v_inf = {:.10}", reference.prediction.kind, reference.prediction.c_inf, reference.prediction.v_inf);
    println!("endpoint C = {:.10}, V = {:.10}, U = {:.4}", end.c, end.v, end.u);
    println!("max invariant drift {:.3e}", direct.max_drift());
    for (t, st) in &reference.turning {
        println!("turning point t = {t:.6}: C = {:.10}", st.c);
    }
    if let Some(dir) = &s.output.dir {
        let mut b = Bundle::create(dir)?;
        b.write_trajectory(&traj)?;
        b.write_json(nls_lab::bundle::PREDICTION, &serde_json::json!({
            "kind": format!("{:?}", reference.prediction.kind),
            "c_inf": reference.prediction.c_inf,
            "v_inf": reference.prediction.v_inf,
            "c_turn": reference.prediction.c_turn,
        }))?;
        println!("bundle: {}", dir.display());
    }
    Ok(true)
}

fn predict(a: &PredictArgs) -> anyhow::Result<bool> {
    let cfg = PotentialConfig {
        direction: match a.potential {
            Dir::Increasing => PotentialDirection::Increasing,
            Dir::Decreasing => PotentialDirection::Decreasing,
        },
        a_minus: a.a_minus,
        a_plus: a.a_plus,
        steepness: 1.0,
    };
    let p = predict_outcome(a.m, a.v0, &cfg.spec(a.epsilon))?;
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({
        "kind": format!("{:?}", p.kind),
        "c_inf": p.c_inf,
        "v_inf": p.v_inf,
        "lambda_inf": p.lambda_inf,
        "c_turn": p.c_turn,
    }))?);
    Ok(true)
}

fn scenario(args: &ConfigArgs, kinds: &[ScenarioKind]) -> anyhow::Result<bool> {
    let s = load(args, kinds)?;
    let r = run_scenario(&s)?;
    print_report(&r);
    Ok(r.passed)
}

fn dispatch(cmd: &Command) -> anyhow::Result<bool> {
    use ScenarioKind::*;
    match cmd {
        Command::Simulate(a) => scenario(a, &[FreeSoliton, Interaction1D, Reflection1D, Interaction2D, Refraction2D]),
        Command::Effective(a) => effective(a),
        Command::Predict(a) => predict(a),
        Command::VerifyIdentities(a) => suite(IdentitySuite, a).map(|r| {
            print_report(&r);
            r.passed
        }),
        Command::VerifyOperators(a) => suite(OperatorSuite, a).map(|r| {
            print_report(&r);
            r.passed
        }),
        Command::ResidualScaling(a) => scenario(a, &[ResidualScaling]),
        Command::Converge(a) => scenario(a, &[ConvergenceStudy]),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().context("thread setup").and_then(|_| dispatch(&cli.command));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
