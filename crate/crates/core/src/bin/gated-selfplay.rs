use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use gated_selfplay::harness::{
    self, adaptive_schedule, generate_holdout, holdout_eval, parse_range, phase_table, run_matrix, sweep_epsilon,
    write_phase_table, write_run, HoldoutSpec, RunAbort, RunConfig, DEFAULT_GRID,
};
use gated_selfplay::policy::PolicySnapshot;

#[derive(Parser)]
#[command(version, about = "Gated proposer/solver self-play on a small integer DSL")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the label, e.g. II+off.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the seven-label comparison matrix.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// One run per leak rate, plus a phase table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "0,0.05,0.1,0.2,0.4,0.7,1.0")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train gated, then relax the gate from a snapshot.
    Schedule {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 150)]
        switch_step: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score saved solver params on a freshly drawn holdout set.
    Holdout {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 150)]
        n: usize,
        #[arg(long, default_value = "4:6")]
        depth: String,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        /// Also write the holdout set as TSV.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn finish(result: Result<harness::RunLog, RunAbort>, dir: &Path) -> Result<harness::RunLog> {
    match result {
        Ok(log) => {
            write_run(&log, dir)?;
            Ok(log)
        }
        Err(abort) => {
            write_run(&abort.log, dir)?;
            Err(abort.error).with_context(|| format!("run aborted; partial log in {}", dir.display()))
        }
    }
}

fn summary(log: &harness::RunLog) -> String {
    let fmt = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.3}"));
    let last = log.last();
    format!(
        "{}: steps={} final_gap={} final_holdout={}",
        log.label,
        last.map_or(0, |r| r.step),
        fmt(last.and_then(|r| r.gap)),
        fmt(log.final_holdout())
    )
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already quote their source, so skip repeats
            let mut msg = String::new();
            for cause in e.chain().map(ToString::to_string) {
                if !msg.contains(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run {
            config,
            label,
            epsilon,
            steps,
            seed,
            out,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(l) = label {
                cfg = cfg.with_label(l.parse()?);
            }
            if let Some(e) = epsilon {
                cfg.epsilon = e;
            }
            if let Some(s) = steps {
                cfg.steps = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let dir = out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("runs").join(cfg.label.to_string()));
            let log = finish(harness::run(&cfg), &dir)?;
            println!("{}", summary(&log));
        }
        Cmd::Matrix { config, out } => {
            let cfg = RunConfig::load(&config)?;
            let mut failed = 0;
            for (label, result) in run_matrix(&cfg) {
                match finish(result, &out.join(label.to_string())) {
                    Ok(log) => println!("{}", summary(&log)),
                    Err(e) => {
                        failed += 1;
                        eprintln!("{label}: {e:#}");
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} of 7 runs failed");
            }
        }
        Cmd::Sweep { config, grid, out } => {
            let cfg = RunConfig::load(&config)?;
            let grid: Vec<f64> = if grid.trim().is_empty() {
                DEFAULT_GRID.to_vec()
            } else {
                grid.split(',')
                    .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad grid value `{s}`")))
                    .collect::<Result<_>>()?
            };
            let results = sweep_epsilon(&cfg, &grid);
            let rows = phase_table(&results);
            let mut failed = 0;
            for (eps, result) in results {
                let dir = out.join(format!("eps_{eps}"));
                let outcome = match result {
                    Ok(log) => write_run(&log, &dir).map_err(anyhow::Error::from),
                    Err(abort) => {
                        write_run(&abort.log, &dir)?;
                        Err(abort.error.into())
                    }
                };
                if let Err(e) = outcome {
                    failed += 1;
                    eprintln!("epsilon {eps}: {e:#}");
                }
            }
            write_phase_table(&rows, &out.join("phase.csv"))?;
            for r in &rows {
                println!(
                    "eps={:<5} J={:<5} late_gap={:.3} late_holdout={:.3}",
                    r.epsilon,
                    r.youden_j,
                    r.late_gap.unwrap_or(f64::NAN),
                    r.late_holdout_acc.unwrap_or(f64::NAN)
                );
            }
            if failed > 0 {
                bail!("{failed} sweep runs failed");
            }
        }
        Cmd::Schedule {
            config,
            switch_step,
            epsilon2,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let result = adaptive_schedule(&cfg, switch_step, epsilon2, &out.join("checkpoint"));
            let log = finish(result, &out)?;
            println!("{}", summary(&log));
        }
        Cmd::Holdout {
            params,
            n,
            depth,
            seed,
            write,
        } => {
            let Some(depth) = parse_range::<usize>(&depth) else {
                bail!("--depth must look like LO:HI, got `{depth}`");
            };
            let snapshot = PolicySnapshot::load(&params)?;
            let defaults = RunConfig::default();
            let tasks = generate_holdout(&HoldoutSpec {
                n,
                depth,
                literal_range: defaults.task_literal_range,
                input_range: defaults.task_input_range,
                seed,
            })?;
            if let Some(path) = write {
                harness::write_holdout(&tasks, &path)?;
            }
            let acc = holdout_eval(&snapshot.solver, &tasks, seed, 0);
            println!("holdout n={n} depth={}:{} accuracy={acc:.4}", depth.0, depth.1);
        }
    }
    Ok(())
}
