//! Command-line front end for the riskctl toolkit.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use riskctl_core::ExecMode;

use crate::commands::Context;
use crate::config::{load_config, ConstraintForm};

#[derive(Debug, Parser)]
#[command(name = "riskctl", version, about = "Chance-constrained LQR / DDPG / scenario-MPC experiments")]
pub struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Experiment seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` override on the config tree, e.g. `cost.c_l=10`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Monte-Carlo trials (overrides `eval.trials` and `eval.mpc_trials`).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Steps per trial (overrides `eval.steps` and `eval.mpc_steps`).
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Run data-parallel loops on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Riccati equation and evaluate the LQR baseline.
    Lqr,
    /// Train a DDPG actor and evaluate it.
    Train {
        /// risk-neutral, known or unknown.
        #[arg(long, default_value = "unknown")]
        mode: String,
        /// Lagrange multiplier (defaults to `cost.c_l`).
        #[arg(long = "c-l")]
        c_l: Option<f64>,
    },
    /// Evaluate a policy: lqr, zero, mpc, or a saved actor file.
    Evaluate {
        #[arg(long)]
        policy: String,
    },
    /// Evaluate the scenario-MPC policy.
    Mpc {
        /// Scenario penalty (defaults to `mpc.c_s`).
        #[arg(long = "c-s")]
        c_s: Option<f64>,
    },
    /// Compare analytic constraint probabilities with Monte-Carlo frequencies.
    BoundCheck {
        /// quadratic or linear (defaults to `constraint.active`).
        #[arg(long)]
        constraint: Option<String>,
    },
    /// Evaluate the multiplier grid `grid.c_l` for one method.
    GridSearch {
        /// known, unknown or mpc.
        #[arg(long, default_value = "unknown")]
        method: String,
    },
    /// Sweep one state component and record the first input.
    Sweep {
        #[arg(long, default_value = "lqr")]
        policy: String,
    },
    /// Run a named table row end to end.
    Repro {
        /// Table1-Case1.2, Table2-Case2.1 or Table2-Case2.2.
        row: String,
    },
    /// Check the config and list every violation.
    Validate,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub error: anyhow::Error,
    pub code: i32,
}

impl CliError {
    fn config(error: anyhow::Error) -> Self {
        Self {
            kind: "config",
            error,
            code: 2,
        }
    }

    fn runtime(error: anyhow::Error) -> Self {
        Self {
            kind: "runtime",
            error,
            code: 1,
        }
    }

    pub fn json_line(&self) -> String {
        serde_json::json!({"error": self.kind, "message": format!("{:#}", self.error)}).to_string()
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .clone()
        .ok_or_else(|| CliError::config(anyhow::anyhow!("--config <path> is required")))?;
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(t) = cli.trials {
        overrides.push(format!("eval.trials={t}"));
        overrides.push(format!("eval.mpc_trials={t}"));
    }
    if let Some(s) = cli.steps {
        overrides.push(format!("eval.steps={s}"));
        overrides.push(format!("eval.mpc_steps={s}"));
    }
    match &cli.command {
        Command::BoundCheck { constraint: Some(form) } => {
            ConstraintForm::parse(form).map_err(CliError::config)?;
            overrides.push(format!("constraint.active={form}"));
        }
        Command::Train { mode, .. } => {
            commands::parse_mode(mode).map_err(CliError::config)?;
        }
        Command::GridSearch { method } if method != "mpc" => {
            commands::parse_mode(method).map_err(CliError::config)?;
        }
        Command::Repro { row } => {
            commands::repro_row(row).map_err(CliError::config)?;
        }
        _ => {}
    }
    let config_text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::config(anyhow::anyhow!("reading {}: {e}", path.display())))?;
    let cfg = load_config(&path, &overrides).map_err(CliError::config)?;

    if let Command::Validate = cli.command {
        return commands::cmd_validate(&cfg.violations()).map_err(CliError::config);
    }
    let exp = cfg.build().map_err(|v| {
        let list: Vec<String> = v.iter().map(ToString::to_string).collect();
        CliError::config(anyhow::anyhow!("invalid config: {}", list.join("; ")))
    })?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&exp.config.output_dir));
    let ctx = Context {
        exp,
        out,
        exec: if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel },
        config_text,
    };
    let result = match &cli.command {
        Command::Lqr => commands::cmd_lqr(&ctx),
        Command::Train { mode, c_l } => {
            commands::parse_mode(mode).and_then(|m| commands::cmd_train(&ctx, m, *c_l))
        }
        Command::Evaluate { policy } => commands::cmd_evaluate(&ctx, policy),
        Command::Mpc { c_s } => commands::cmd_mpc(&ctx, *c_s),
        Command::BoundCheck { .. } => commands::cmd_bound_check(&ctx),
        Command::GridSearch { method } => commands::cmd_grid_search(&ctx, method),
        Command::Sweep { policy } => commands::cmd_sweep(&ctx, policy),
        Command::Repro { row } => commands::cmd_repro(&ctx, row),
        Command::Validate => unreachable!("handled above"),
    };
    result.map_err(CliError::runtime)
}
