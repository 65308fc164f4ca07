use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use nemflow_core::diagnostics::{compute_record, lyapunov_check};
use nemflow_core::dynamics::{RunOutcome, Solver, Termination};
use nemflow_core::fields::io::write_vector_snapshot;
use nemflow_core::frank::{check, ellipticity_constant};
use nemflow_core::init::{generate_initial_data, scaling_test};
use nemflow_core::{Error, Ledger64, RunSummary, Spectral};

use crate::config::RunConfig;
use crate::ConfigArgs;

/// Failure classes, mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
    Verdict(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Verdict(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConstants(_) | Error::InvalidGrid(_) | Error::InvalidConfig(_) | Error::UnknownInitKind(_) => {
                Failure::Usage(e.into())
            }
            _ => Failure::Runtime(e.into()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

/// `NEMFLOW_THREADS` must be a positive integer when set. The kernels are
/// sequential, so values above 1 only produce a notice.
pub fn check_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("NEMFLOW_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow!("NEMFLOW_THREADS = `{v}` is not a positive integer"))?;
        if n == 0 {
            return Err(anyhow!("NEMFLOW_THREADS must be at least 1"));
        }
        if n > 1 {
            eprintln!("note: kernels are sequential; NEMFLOW_THREADS = {n} has no effect");
        }
    }
    Ok(())
}

fn load(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    RunConfig::load(args.config.as_deref(), args.preset.as_deref(), &args.overrides).map_err(Failure::Usage)
}

struct Run {
    outcome: RunOutcome<f64>,
    ledger: Ledger64,
}

fn integrate(cfg: &RunConfig, snapshots: Option<&Path>) -> Result<Run, Failure> {
    let solver = Solver::new(cfg.grid().map_err(Failure::Usage)?, cfg.solver_config().map_err(Failure::Usage)?)?;
    let s0 = generate_initial_data(solver.spectral(), &cfg.init_spec())?;
    let every = cfg.output.snapshot_every;
    let mut ledger = Ledger64::new();
    let outcome = solver.simulate(&s0, |s, step| {
        ledger.push(compute_record(&solver, s)?)?;
        if let Some(dir) = snapshots {
            if every > 0 && step % every == 0 {
                write_vector_snapshot(dir, &format!("u_{step:07}"), &s.u, s.t)?;
                write_vector_snapshot(dir, &format!("d_{step:07}"), &s.d, s.t)?;
            }
        }
        Ok(())
    })?;
    Ok(Run { outcome, ledger })
}

fn summary(cfg: &RunConfig, run: &Run) -> Result<RunSummary, Failure> {
    let a = ellipticity_constant(&cfg.constants().map_err(Failure::Usage)?);
    Ok(RunSummary::from_ledger(
        &run.ledger,
        run.outcome.termination.clone(),
        run.outcome.steps,
        run.outcome.halvings,
        a,
        cfg.tolerances.residual_tol,
        cfg.tolerances.blowup_factor,
    ))
}

fn termination_check(t: &Termination) -> CmdResult {
    match t {
        Termination::Completed => Ok(()),
        other => Err(Failure::Runtime(anyhow!("run stopped early: {other:?}"))),
    }
}

pub fn simulate(args: &ConfigArgs) -> CmdResult {
    let cfg = load(args)?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .map_err(Failure::Usage)?;
    let write = |name: &str, bytes: &[u8]| -> CmdResult {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::Usage)
    };
    write("config.toml", cfg.to_toml().map_err(Failure::Usage)?.as_bytes())?;

    let run = integrate(&cfg, Some(&dir))?;
    let st = &run.outcome.state;
    write_vector_snapshot(&dir, "u_final", &st.u, st.t)?;
    write_vector_snapshot(&dir, "d_final", &st.d, st.t)?;
    let mut csv = Vec::new();
    run.ledger.write_csv(&mut csv)?;
    write(&cfg.output.csv_name, &csv)?;
    let s = summary(&cfg, &run)?;
    let json = serde_json::to_string_pretty(&s).map_err(|e| Failure::Runtime(e.into()))?;
    write("summary.json", json.as_bytes())?;

    println!(
        "{} steps to t = {:.6}, {} records, max relative balance residual {:.3e}",
        run.outcome.steps,
        st.t,
        run.ledger.len(),
        s.max_relative_balance_residual
    );
    println!("wrote {}", dir.display());
    termination_check(&run.outcome.termination)
}

pub fn verify_gradients(args: &ConfigArgs, samples: usize, seed: u64) -> CmdResult {
    const TOL: f64 = 1e-6;
    let cfg = load(args)?;
    if samples == 0 {
        return Err(Failure::Usage(anyhow!("--samples must be positive")));
    }
    let c = cfg.constants().map_err(Failure::Usage)?;
    let r = check::gradient_consistency(&c, samples, seed);
    println!("samples      {samples}");
    println!("max rel W_d  {:.3e}", r.max_rel_w_d);
    println!("max rel W_p  {:.3e}", r.max_rel_w_p);
    println!("max rel W_pp {:.3e}", r.max_rel_w_pp);
    if r.worst() <= TOL {
        println!("PASS (tol {TOL:e})");
        Ok(())
    } else {
        Err(Failure::Verdict(format!("max relative error {:.3e} exceeds {TOL:e}", r.worst())))
    }
}

pub fn verify_energy(args: &ConfigArgs, require_lyapunov: bool) -> CmdResult {
    let cfg = load(args)?;
    let run = integrate(&cfg, None)?;
    termination_check(&run.outcome.termination)?;
    let tol = cfg.tolerances.residual_tol;
    let rel = run.ledger.max_relative_residual();
    let v = lyapunov_check(run.ledger.records(), tol);
    println!("steps                     {}", run.outcome.steps);
    println!("max |balance_residual|    {:.3e}", run.ledger.max_abs_residual());
    println!("max relative residual     {rel:.3e} (tol {tol:e})");
    println!("lyap0                     {:?}", v.lyap0);
    println!("lyap1                     {:?}", v.lyap1);
    println!("e_total strictly decreasing {}", run.ledger.energy_strictly_decreasing());
    if rel > tol {
        return Err(Failure::Verdict(format!("relative residual {rel:.3e} exceeds {tol:e}")));
    }
    if require_lyapunov && !v.is_monotone() {
        return Err(Failure::Verdict(format!("Lyapunov functional increased: {v:?}")));
    }
    Ok(())
}

pub fn scaling(args: &ConfigArgs, lambda: usize, tol: f64) -> CmdResult {
    let cfg = load(args)?;
    let sp = Spectral::new(cfg.grid().map_err(Failure::Usage)?);
    let s0 = generate_initial_data(&sp, &cfg.init_spec())?;
    let r = scaling_test(&s0, lambda)?;
    println!("{}", serde_json::to_string_pretty(&r).map_err(|e| Failure::Runtime(e.into()))?);
    if r.discrepancy <= tol {
        Ok(())
    } else {
        Err(Failure::Verdict(format!("discrepancy {:.3e} exceeds {tol}", r.discrepancy)))
    }
}
