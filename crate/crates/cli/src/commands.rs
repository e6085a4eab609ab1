//! Subcommand implementations. Each writes its artifacts into the output
//! directory together with the config text and the resolved config.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _};
use riskctl_core::bounds::audit;
use riskctl_core::ddpg::{load_actor, save_actor, train, DdpgConfig, TrainOutcome};
use riskctl_core::eval::{evaluate, grid_search_cl, state_input_sweep, GridResult};
use riskctl_core::linalg::matrix_to_rows;
use riskctl_core::mpc::mpc_policy;
use riskctl_core::riccati::{lqr_policy, solve_riccati, LqrSolution};
use riskctl_core::table::{self, fmt_g9};
use riskctl_core::{EvalProtocol, EvalReport, ExecMode, PolicyHandle, RewardMode};
use serde_json::json;

use crate::config::{resolved_toml, ConstraintForm, Experiment};

/// Shared state for one CLI invocation.
pub struct Context {
    pub exp: Experiment,
    pub out: PathBuf,
    pub exec: ExecMode,
    /// Config file text as read, before overrides.
    pub config_text: String,
}

impl Context {
    pub fn prepare_output(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        self.write("config.cfg", &self.config_text)?;
        self.write("config.resolved.toml", &resolved_toml(&self.exp.config))
    }

    pub fn write(&self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn write_reports(&self, name: &str, reports: &[EvalReport]) -> anyhow::Result<()> {
        self.write(name, &table::reports_csv(reports))?;
        let stem = name.trim_end_matches(".csv");
        self.write(&format!("{stem}.timing.csv"), &table::timing_csv(reports))?;
        for r in reports {
            println!("{}", report_json(r));
        }
        Ok(())
    }

    fn evaluate(&self, policy: &PolicyHandle, label: &str, proto: &EvalProtocol) -> anyhow::Result<EvalReport> {
        let e = &self.exp;
        let report = evaluate(&e.system, &e.noise, &e.cost, &e.constraint, policy, label, proto, self.exec)?;
        if !report.valid {
            eprintln!(
                "{}",
                json!({"warning": "invalid-report", "policy": label, "diverged": report.diverged, "trials": report.trials})
            );
        }
        Ok(report)
    }

    fn lqr(&self) -> anyhow::Result<LqrSolution> {
        let e = &self.exp;
        Ok(solve_riccati(&e.system, &e.cost, &e.noise)?)
    }
}

pub fn report_json(r: &EvalReport) -> serde_json::Value {
    json!({
        "policy": r.policy,
        "jc": r.jc,
        "cv_percent": r.cv_percent,
        "delta_hat": r.delta_hat,
        "violations": r.violations,
        "trials": r.trials,
        "steps": r.steps,
        "diverged": r.diverged,
        "valid": r.valid,
    })
}

pub fn parse_mode(s: &str) -> anyhow::Result<RewardMode> {
    match s {
        "risk-neutral" => Ok(RewardMode::RiskNeutral),
        "known" | "known-model" => Ok(RewardMode::KnownModelChernoff),
        "unknown" | "unknown-model" => Ok(RewardMode::UnknownModelIndicator),
        other => bail!("unknown reward mode '{other}' (expected risk-neutral, known or unknown)"),
    }
}

pub fn ddpg_label(mode: RewardMode) -> String {
    format!("ddpg-{}", mode.label())
}

pub fn lqr_summary(sol: &LqrSolution) -> String {
    let mut keyed: Vec<(String, String)> = Vec::new();
    for (i, row) in matrix_to_rows(&sol.gain).iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            keyed.push((format!("K[{i}][{j}]"), fmt_g9(*v)));
        }
    }
    for (i, v) in sol.offset.iter().enumerate() {
        keyed.push((format!("l[{i}]"), fmt_g9(*v)));
    }
    for (i, row) in matrix_to_rows(&sol.s).iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            keyed.push((format!("S[{i}][{j}]"), fmt_g9(*v)));
        }
    }
    keyed.push(("residual".into(), fmt_g9(sol.residual)));
    keyed.push(("iterations".into(), sol.iterations.to_string()));
    keyed.push(("closed_loop_radius".into(), fmt_g9(sol.closed_loop_radius)));
    let pairs: Vec<(&str, String)> = keyed.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    table::key_value_csv(&pairs)
}

pub fn cmd_lqr(ctx: &Context) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let sol = ctx.lqr()?;
    ctx.write("lqr.csv", &lqr_summary(&sol))?;
    let report = ctx.evaluate(&lqr_policy(&sol), "lqr", &ctx.exp.eval)?;
    ctx.write_reports("report.csv", &[report])
}

/// Train with the experiment's DDPG settings and the given multiplier.
pub fn train_policy(exp: &Experiment, mode: RewardMode, c_l: f64, cfg: &DdpgConfig) -> anyhow::Result<TrainOutcome> {
    let cost = exp.cost.with_multiplier(c_l)?;
    Ok(train(&exp.system, &exp.noise, &cost, &exp.constraint, mode, cfg)?)
}

pub fn cmd_train(ctx: &Context, mode: RewardMode, c_l: Option<f64>) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let c_l = c_l.unwrap_or(ctx.exp.cost.c_l);
    let outcome = train_policy(&ctx.exp, mode, c_l, &ctx.exp.ddpg)?;
    save_actor(outcome.actor(), &ctx.out.join("actor.txt"))?;
    ctx.write("training_log.csv", &table::training_log_csv(&outcome.log))?;
    let report = ctx.evaluate(&outcome.policy, &ddpg_label(mode), &ctx.exp.eval)?;
    ctx.write_reports("report.csv", &[report])
}

/// `lqr`, `zero`, `mpc`, or a path to a saved actor.
pub fn resolve_policy(ctx: &Context, spec: &str) -> anyhow::Result<(PolicyHandle, String)> {
    let e = &ctx.exp;
    Ok(match spec {
        "lqr" => (lqr_policy(&ctx.lqr()?), "lqr".into()),
        "zero" => (PolicyHandle::zero(e.system.state_dim(), e.system.input_dim()), "zero".into()),
        "mpc" => (mpc_policy(&e.system, &e.noise, &e.cost, &e.constraint, &e.mpc)?, "mpc".into()),
        path => {
            let mlp = load_actor(Path::new(path)).with_context(|| format!("loading actor {path}"))?;
            if mlp.input_dim() != e.system.state_dim() || mlp.output_dim() != e.system.input_dim() {
                bail!(
                    "actor maps {} -> {}, but the plant has {} states and {} inputs",
                    mlp.input_dim(),
                    mlp.output_dim(),
                    e.system.state_dim(),
                    e.system.input_dim()
                );
            }
            (PolicyHandle::actor(mlp), "actor".into())
        }
    })
}

pub fn cmd_evaluate(ctx: &Context, policy: &str) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let (handle, label) = resolve_policy(ctx, policy)?;
    let proto = if handle.is_expensive() { &ctx.exp.mpc_eval } else { &ctx.exp.eval };
    let report = ctx.evaluate(&handle, &label, proto)?;
    ctx.write_reports("report.csv", &[report])
}

pub fn cmd_mpc(ctx: &Context, c_s: Option<f64>) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let e = &ctx.exp;
    let mut cfg = e.mpc.clone();
    if let Some(c) = c_s {
        cfg.c_s = c;
    }
    let policy = mpc_policy(&e.system, &e.noise, &e.cost, &e.constraint, &cfg)?;
    let report = ctx.evaluate(&policy, "mpc", &e.mpc_eval)?;
    ctx.write_reports("report.csv", &[report])
}

pub fn cmd_bound_check(ctx: &Context) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let e = &ctx.exp;
    let a = &e.config.audit;
    let rows = audit(
        &e.system,
        &e.noise,
        &e.constraint,
        a.pairs,
        a.draws,
        a.x_range,
        a.u_range,
        e.config.seed,
        ctx.exec,
    )?;
    let below = rows
        .iter()
        .filter(|r| r.analytic < r.monte_carlo - 3.0 * r.std_error)
        .count();
    ctx.write("bound_check.csv", &table::audit_csv(&rows))?;
    println!(
        "{}",
        json!({"constraint": e.constraint.label(), "pairs": rows.len(), "draws": a.draws, "below_mc_minus_3se": below})
    );
    Ok(())
}

pub fn grid_search(ctx: &Context, method: &str) -> anyhow::Result<GridResult> {
    let e = &ctx.exp;
    let grid = &e.config.grid.c_l;
    let target = e.constraint.delta;
    let result = if method == "mpc" {
        grid_search_cl(grid, target, |c_s| {
            let mut cfg = e.mpc.clone();
            cfg.c_s = c_s;
            let policy = mpc_policy(&e.system, &e.noise, &e.cost, &e.constraint, &cfg)?;
            ctx.evaluate(&policy, "mpc", &e.mpc_eval).map_err(to_core)
        })?
    } else {
        let mode = parse_mode(method)?;
        grid_search_cl(grid, target, |c_l| {
            let outcome = train_policy(e, mode, c_l, &e.ddpg).map_err(to_core)?;
            ctx.evaluate(&outcome.policy, &ddpg_label(mode), &e.eval).map_err(to_core)
        })?
    };
    for w in &result.warnings {
        eprintln!("{}", json!({"warning": "non-monotone-grid", "detail": w}));
    }
    Ok(result)
}

fn to_core(e: anyhow::Error) -> riskctl_core::Error {
    match e.downcast::<riskctl_core::Error>() {
        Ok(core) => core,
        Err(other) => riskctl_core::Error::Numeric(format!("{other:#}")),
    }
}

pub fn cmd_grid_search(ctx: &Context, method: &str) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let result = grid_search(ctx, method)?;
    ctx.write("grid.csv", &table::grid_csv(&result))?;
    println!(
        "{}",
        json!({"method": method, "selected_c_l": result.selected, "infeasible": result.infeasible()})
    );
    Ok(())
}

pub fn cmd_sweep(ctx: &Context, policy: &str) -> anyhow::Result<()> {
    ctx.prepare_output()?;
    let (handle, _) = resolve_policy(ctx, policy)?;
    let s = &ctx.exp.config.sweep;
    let rows = state_input_sweep(
        &handle,
        ctx.exp.system.state_dim(),
        s.component,
        s.lo,
        s.hi,
        s.points,
        ctx.exp.config.seed,
    )?;
    ctx.write("sweep.csv", &table::sweep_csv(s.component, &rows))
}

/// A named table row: which constraint form, which multipliers, which
/// methods (in the table's column order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproRow {
    pub name: &'static str,
    pub constraint: ConstraintForm,
    pub c_l: f64,
    pub c_s: Option<f64>,
}

pub const REPRO_ROWS: [ReproRow; 3] = [
    ReproRow {
        name: "Table1-Case1.2",
        constraint: ConstraintForm::Quadratic,
        c_l: 100.0,
        c_s: None,
    },
    ReproRow {
        name: "Table2-Case2.1",
        constraint: ConstraintForm::Quadratic,
        c_l: 100.0,
        c_s: Some(5.0),
    },
    ReproRow {
        name: "Table2-Case2.2",
        constraint: ConstraintForm::Linear,
        c_l: 10.0,
        c_s: Some(4.0),
    },
];

pub fn repro_row(name: &str) -> anyhow::Result<ReproRow> {
    REPRO_ROWS.iter().copied().find(|r| r.name == name).with_context(|| {
        let names: Vec<&str> = REPRO_ROWS.iter().map(|r| r.name).collect();
        format!("unknown table row '{name}' (expected one of {})", names.join(", "))
    })
}

/// Evaluate every method of a table row; reports come back in column order.
pub fn run_repro(ctx: &Context, row: ReproRow) -> anyhow::Result<Vec<EvalReport>> {
    let exp = ctx
        .exp
        .with_constraint(row.constraint)
        .map_err(|v| anyhow::anyhow!("config cannot run {}: {}", row.name, v[0]))?;
    let sub = Context {
        exp,
        out: ctx.out.clone(),
        exec: ctx.exec,
        config_text: String::new(),
    };
    let e = &sub.exp;
    let mut reports = Vec::new();
    for mode in [RewardMode::KnownModelChernoff, RewardMode::UnknownModelIndicator] {
        let outcome = train_policy(e, mode, row.c_l, &e.ddpg)?;
        reports.push(sub.evaluate(&outcome.policy, &ddpg_label(mode), &e.eval)?);
    }
    reports.push(sub.evaluate(&lqr_policy(&sub.lqr()?), "lqr", &e.eval)?);
    if let Some(c_s) = row.c_s {
        let mut cfg = e.mpc.clone();
        cfg.c_s = c_s;
        let policy = mpc_policy(&e.system, &e.noise, &e.cost, &e.constraint, &cfg)?;
        reports.push(sub.evaluate(&policy, "mpc", &e.mpc_eval)?);
    }
    Ok(reports)
}

pub fn cmd_repro(ctx: &Context, name: &str) -> anyhow::Result<()> {
    let row = repro_row(name)?;
    ctx.prepare_output()?;
    let reports = run_repro(ctx, row)?;
    ctx.write_reports(&format!("repro_{}.csv", row.name), &reports)
}

pub fn cmd_validate(exp_violations: &[crate::config::Violation]) -> anyhow::Result<()> {
    for v in exp_violations {
        println!("{}", json!({"path": v.path, "message": v.message}));
    }
    if exp_violations.is_empty() {
        println!("{}", json!({"valid": true}));
        Ok(())
    } else {
        bail!("{} config violation(s)", exp_violations.len())
    }
}
