use std::fmt::Write;

use super::model::{Metric, Problem};

/// Prints a problem as PDDL text. Consecutive objects of the same type
/// share one `- type` annotation.
pub fn render_problem(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain_name);

    out.push_str("  (:objects\n");
    let mut i = 0;
    while i < problem.objects.len() {
        let ty = &problem.objects[i].1;
        let mut j = i;
        let mut names = Vec::new();
        while j < problem.objects.len() && &problem.objects[j].1 == ty {
            names.push(problem.objects[j].0.as_str());
            j += 1;
        }
        let _ = writeln!(out, "    {} - {}", names.join(" "), ty);
        i = j;
    }
    out.push_str("  )\n");

    out.push_str("  (:init\n");
    for atom in &problem.init {
        let _ = writeln!(out, "    {atom}");
    }
    for fact in &problem.numeric {
        let _ = writeln!(out, "    {fact}");
    }
    out.push_str("  )\n");

    if problem.goal.is_empty() {
        out.push_str("  (:goal (and))\n");
    } else {
        out.push_str("  (:goal (and\n");
        for lit in &problem.goal {
            let _ = writeln!(out, "    {lit}");
        }
        out.push_str("  ))\n");
    }

    match problem.metric {
        Some(Metric::MinimizeTotalCost) => out.push_str("  (:metric minimize (total-cost))\n)\n"),
        None => out.push_str(")\n"),
    }
    out
}
