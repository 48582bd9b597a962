//! Plain-text summaries printed next to the JSON report.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::report::{ConvertView, DynamicsView, EvalView, OracleView, SolveView, VerificationView};

fn masses(row: &BTreeMap<String, f64>) -> String {
    row.iter()
        .map(|(p, x)| format!("{p}={x:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn eval(view: &EvalView) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>16}  strategy", "firm", "payoff");
    for f in &view.firms {
        let _ = writeln!(
            s,
            "{:<16} {:>16.6}  {}",
            f.firm,
            f.payoff,
            masses(&view.profile[&f.firm])
        );
    }
    s
}

pub fn verification(v: &VerificationView) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>16} {:>16} {:>14}  method",
        "firm", "payoff", "best", "regret"
    );
    for f in &v.firms {
        let method = serde_json::to_value(f.method).unwrap_or_default();
        let _ = writeln!(
            s,
            "{:<16} {:>16.6} {:>16.6} {:>14.3e}  {}",
            f.firm,
            f.payoff,
            f.best_value,
            f.regret,
            method.as_str().unwrap_or("")
        );
    }
    let _ = writeln!(
        s,
        "epsilon {:.3e} ({:.3e} of scale {:.6}); tolerance {:.1e}: {}",
        v.epsilon,
        v.relative_epsilon,
        v.scale,
        v.tolerance,
        if v.is_epsilon_nash {
            "epsilon-Nash"
        } else {
            "not an epsilon-Nash equilibrium"
        }
    );
    s
}

pub fn solve(view: &SolveView) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} stationary candidate(s), {} certified",
        view.candidates.len(),
        view.certified
    );
    for (n, c) in view.candidates.iter().enumerate() {
        let _ = writeln!(
            s,
            "\ncandidate {n}: max residual {:.3e}, interior {}",
            c.max_residual, c.interior
        );
        for f in &c.firms {
            let shape = serde_json::to_value(f.second_order).unwrap_or_default();
            let _ = writeln!(
                s,
                "  {:<14} tau {:.9} ({})  {}  {}",
                f.firm,
                f.tau,
                f.reference.as_deref().unwrap_or("-"),
                shape.as_str().unwrap_or(""),
                masses(&c.profile[&f.firm])
            );
        }
        s.push_str(&verification(&c.verification));
    }
    s
}

pub fn oracle(view: &OracleView) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} grid profile(s) searched, {} within tolerance",
        view.profiles_searched,
        view.equilibria.len()
    );
    for eq in &view.equilibria {
        let firms: Vec<String> = eq
            .profile
            .iter()
            .map(|(f, row)| format!("{f}: {}", masses(row)))
            .collect();
        let _ = writeln!(s, "  regret {:.3e}  {}", eq.max_regret, firms.join(" | "));
    }
    s
}

pub fn dynamics(view: &DynamicsView) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>14} {:>16}",
        "round", "movement", "payoff change"
    );
    for r in &view.rounds {
        let _ = writeln!(
            s,
            "{:>6} {:>14.3e} {:>16.6}",
            r.round, r.movement, r.max_payoff_change
        );
    }
    let end = serde_json::to_value(view.termination).unwrap_or_default();
    let _ = writeln!(s, "termination: {}", end.as_str().unwrap_or(""));
    if let Some(c) = view.cycle_start {
        let _ = writeln!(s, "profile of round {c} recurred");
    }
    s.push_str(&verification(&view.final_verification));
    s
}

pub fn convert(view: &ConvertView) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "firm {} ({})", view.firm, view.direction);
    let _ = writeln!(s, "products:   {}", masses(&view.product_distribution));
    for p in &view.portfolio_distribution {
        let _ = writeln!(s, "  {{{}}} {:.6}", p.products.join(","), p.mass);
    }
    s
}
