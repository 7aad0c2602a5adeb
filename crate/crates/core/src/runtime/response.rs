//! Human-readable account of a run.

use std::fmt::Write;

use serde_json::Value;

use super::exec::{ExecutionReport, Status};

fn step_status(applied: bool, monitor: bool) -> &'static str {
    match (applied, monitor) {
        (true, true) => "done",
        (true, false) => "failed check",
        (false, _) => "error",
    }
}

fn delivered_text(entry: &Value) -> Option<String> {
    let m = entry.as_object()?;
    match m.get("kind")?.as_str()? {
        "response" => {
            let items = m.get("contents")?.as_array()?;
            let texts: Vec<String> = items
                .iter()
                .filter_map(|i| {
                    let (source, text) = (i.get("source")?.as_str()?, i.get("text")?.as_str()?);
                    Some(if text.contains('\n') { format!("{source}:\n{text}") } else { format!("{source}: {text}") })
                })
                .collect();
            Some(texts.join("\n"))
        }
        "email" => Some(format!(
            "Email to {} ({}):\n{}",
            m.get("to")?.as_str()?,
            m.get("subject")?.as_str()?,
            m.get("body")?.as_str()?
        )),
        _ => None,
    }
}

/// Step lines, the outcome, replanning events, produced artifacts and the
/// contents of everything delivered.
pub fn build_response(report: &ExecutionReport) -> String {
    let mut out = String::new();
    let headline = match report.status {
        Status::Success => format!("Task completed in {} steps.", report.steps.len()),
        Status::Failed => format!("Task not completed after {} steps.", report.steps.len()),
        Status::Aborted => format!("Task aborted after {} steps.", report.steps.len()),
    };
    out.push_str(&headline);
    out.push('\n');
    if !report.steps.is_empty() {
        out.push_str("\nSteps:\n");
        for s in &report.steps {
            let _ = write!(out, "{}. {} [{}]", s.step, s.action, step_status(s.applied, s.monitor));
            if let Some(e) = &s.error {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
    }
    if !report.replans.is_empty() {
        out.push_str("\nReplanning:\n");
        for r in &report.replans {
            let _ = write!(out, "- after {}", r.trigger);
            match (&r.plan, &r.error) {
                (Some(p), _) => {
                    let _ = write!(out, ": new plan of {} steps", p.len());
                }
                (None, Some(e)) => {
                    let _ = write!(out, ": {e}");
                }
                (None, None) => {}
            }
            out.push('\n');
        }
    }
    if let Some(reason) = &report.reason {
        let _ = writeln!(out, "\nReason: {reason}");
    }
    if !report.artifacts.is_empty() {
        out.push_str("\nArtifacts:\n");
        for a in &report.artifacts {
            let _ = writeln!(out, "- {a}");
        }
    }
    let delivered: Vec<String> = report.delivered.iter().filter_map(delivered_text).filter(|t| !t.is_empty()).collect();
    if !delivered.is_empty() {
        out.push_str("\nResult:\n");
        for d in delivered {
            out.push_str(&d);
            out.push('\n');
        }
    }
    out
}
