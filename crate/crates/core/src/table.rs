//! CSV output with a fixed header and `%.9g`-style numbers.

use std::fmt::Write as _;

use crate::bounds::AuditRow;
use crate::ddpg::TrainingLog;
use crate::eval::{EvalReport, GridResult};

/// Format like C's `%.9g`: nine significant digits, trailing zeros dropped,
/// scientific notation outside `1e-4 ≤ |x| < 1e9`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Minimal CSV builder; fields are numbers or controlled identifiers, so no
/// quoting is needed.
#[derive(Debug, Clone)]
pub struct Csv {
    out: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        debug_assert!(fields.iter().all(|f| !f.contains([',', '\n', '"'])));
        self.out.push_str(&fields.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub const REPORT_HEADER: [&str; 11] = [
    "policy",
    "jc",
    "cv_percent",
    "delta_hat",
    "violations",
    "trials",
    "trials_used",
    "diverged",
    "steps",
    "seed",
    "valid",
];

fn report_fields(r: &EvalReport) -> Vec<String> {
    vec![
        r.policy.clone(),
        fmt_g9(r.jc),
        fmt_g9(r.cv_percent),
        fmt_g9(r.delta_hat),
        r.violations.to_string(),
        r.trials.to_string(),
        r.trials_used.to_string(),
        r.diverged.to_string(),
        r.steps.to_string(),
        r.seed.to_string(),
        r.valid.to_string(),
    ]
}

pub fn reports_csv(reports: &[EvalReport]) -> String {
    let mut csv = Csv::new(&REPORT_HEADER);
    for r in reports {
        csv.row(&report_fields(r));
    }
    csv.finish()
}

/// Wall-clock runtimes, kept apart from the deterministic report files.
pub fn timing_csv(reports: &[EvalReport]) -> String {
    let mut csv = Csv::new(&["policy", "mean_step_seconds"]);
    for r in reports {
        csv.row(&[r.policy.clone(), fmt_g9(r.mean_step_seconds)]);
    }
    csv.finish()
}

pub fn grid_csv(grid: &GridResult) -> String {
    let mut csv = Csv::new(&["c_l", "jc", "cv_percent", "delta_hat", "violations", "selected"]);
    for row in &grid.rows {
        let r = &row.report;
        csv.row(&[
            fmt_g9(row.c_l),
            fmt_g9(r.jc),
            fmt_g9(r.cv_percent),
            fmt_g9(r.delta_hat),
            r.violations.to_string(),
            (grid.selected == Some(row.c_l)).to_string(),
        ]);
    }
    csv.finish()
}

pub fn sweep_csv(component: usize, rows: &[(f64, f64)]) -> String {
    let x_name = format!("x{}", component + 1);
    let mut csv = Csv::new(&[&x_name, "u1"]);
    for &(x, u) in rows {
        csv.row(&[fmt_g9(x), fmt_g9(u)]);
    }
    csv.finish()
}

pub fn training_log_csv(log: &TrainingLog) -> String {
    let mut csv = Csv::new(&[
        "episode",
        "mean_reward",
        "critic_loss",
        "violations",
        "exploration_var",
        "interventions",
    ]);
    for e in &log.episodes {
        csv.row(&[
            e.episode.to_string(),
            fmt_g9(e.mean_reward),
            fmt_g9(e.critic_loss),
            e.violations.to_string(),
            fmt_g9(e.exploration_var),
            e.interventions.to_string(),
        ]);
    }
    csv.finish()
}

pub fn audit_csv(rows: &[AuditRow]) -> String {
    let (n, p) = rows.first().map(|r| (r.x.len(), r.u.len())).unwrap_or((0, 0));
    let mut header: Vec<String> = vec!["pair".into(), "analytic".into(), "monte_carlo".into(), "std_error".into()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=p).map(|i| format!("u{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header_refs);
    for (i, r) in rows.iter().enumerate() {
        let mut fields = vec![
            i.to_string(),
            fmt_g9(r.analytic),
            fmt_g9(r.monte_carlo),
            fmt_g9(r.std_error),
        ];
        fields.extend(r.x.iter().map(|v| fmt_g9(*v)));
        fields.extend(r.u.iter().map(|v| fmt_g9(*v)));
        csv.row(&fields);
    }
    csv.finish()
}

/// One `key,value` line per entry, for small summaries.
pub fn key_value_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}
