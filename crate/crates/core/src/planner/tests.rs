use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::*;
use crate::compiler::compile_problem;
use crate::intent::validate_task_dictionary;
use crate::pddl::{assistant_domain, parse_problem, Atom, Domain, Literal, Problem};

fn fixture_task(text: &str) -> (Problem, GroundedTask) {
    let d = assistant_domain();
    let raw: Value = serde_json::from_str(text).unwrap();
    let dict = validate_task_dictionary(&raw, &d).unwrap();
    let p = compile_problem(&dict, &d, "fixture").unwrap();
    let t = ground(&d, &p).unwrap();
    (p, t)
}

fn trade() -> GroundedTask {
    fixture_task(include_str!("../../fixtures/trade_status.json")).1
}

fn two_databases() -> GroundedTask {
    fixture_task(include_str!("../../fixtures/two_databases.json")).1
}

const TRADE_PLAN: &str = "\
(read-data ai dataframe1 data-file1)
(query-data ai query1 dataframe1 filtered-dataframe)
(create-response ai chat-response)
(add-to-response ai filtered-dataframe chat-response)
(send-response ai chat-response)
";

fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn grounding_resolves_unit_and_fluent_costs() {
    let t = trade();
    let a = t.action("read-data", &args(&["ai", "dataframe1", "data-file1"])).expect("grounded");
    assert_eq!(a.cost, 1);
    let t = two_databases();
    assert_eq!(t.action("read-data", &args(&["ai", "dataframe1", "db2"])).unwrap().cost, 2);
    assert_eq!(t.action("read-data", &args(&["ai", "dataframe1", "db1"])).unwrap().cost, 1);
    assert_eq!(t.action("query-data-basic", &args(&["ai", "query1", "dataframe1", "filtered-dataframe", "db1"])).unwrap().cost, 5);
}

#[test]
fn undefined_cost_fluent_defaults_to_one() {
    let t = trade();
    // data-file1 has no database-cost assignment
    let p = fixture_task(include_str!("../../fixtures/trade_status.json")).0;
    assert_eq!(p.numeric_value("database-cost", &args(&["data-file1"])), None);
    assert_eq!(t.action("read-data", &args(&["ai", "dataframe1", "data-file1"])).unwrap().cost, DEFAULT_FLUENT_COST);
}

#[test]
fn missing_parameter_types_give_no_instances() {
    let t = trade();
    assert!(!t.actions.iter().any(|a| a.name == "create-slide"));
    assert!(!t.actions.iter().any(|a| a.name == "send-response-email"));
}

#[test]
fn grounded_atoms_stay_in_the_universe() {
    for t in [trade(), two_databases()] {
        let n = t.atoms.len();
        for a in &t.actions {
            for i in a.pre_pos.iter().chain(&a.pre_neg).chain(&a.add).chain(&a.del) {
                assert!(*i < n);
            }
        }
        for g in t.goal_pos.iter().chain(&t.goal_neg) {
            assert!(*g < n);
        }
        assert!(t.unreachable_goals.is_empty());
    }
}

#[test]
fn trade_status_plan_is_optimal() {
    let t = trade();
    let p = plan(&t).unwrap();
    assert_eq!(p.total_cost, 5);
    assert_eq!(p.len(), 5);
    let oracle = brute_force_plan(&t, 20).unwrap();
    assert_eq!(oracle.total_cost, p.total_cost);
    assert!(validate_plan(&t, &p).valid);
    let ucs = plan_with(&t, SearchOptions { heuristic: Heuristic::Blind, ..Default::default() }).unwrap();
    assert_eq!(ucs.total_cost, 5);
}

#[test]
fn trade_plan_validates() {
    let t = trade();
    let p = Plan::parse(TRADE_PLAN, &t).unwrap();
    let r = validate_plan(&t, &p);
    assert!(r.valid, "{:?}", r.failure);
    assert_eq!(r.cost, 5);
}

#[test]
fn removing_the_read_breaks_step_one() {
    let t = trade();
    let text: String = TRADE_PLAN.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let p = Plan::parse(&text, &t).unwrap();
    let r = validate_plan(&t, &p);
    assert!(!r.valid);
    match r.failure.unwrap() {
        Violation::Precondition { step, action, unmet, state } => {
            assert_eq!(step, 1);
            assert!(action.starts_with("(query-data "));
            assert_eq!(unmet, vec!["(available dataframe1)".to_string()]);
            assert!(state.contains(&"(in dataframe1 data-file1)".to_string()));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn incomplete_plans_fail_on_the_goal() {
    let t = trade();
    let text: String = TRADE_PLAN.lines().take(4).map(|l| format!("{l}\n")).collect();
    let r = validate_plan(&t, &Plan::parse(&text, &t).unwrap());
    match r.failure.unwrap() {
        Violation::Goal { unmet, .. } => assert_eq!(unmet, vec!["(sent chat-response)".to_string()]),
        other => panic!("{other:?}"),
    }
    assert_eq!(r.cost, 4);
}

#[test]
fn example_two_databases_prefers_the_optimized_database() {
    let t = two_databases();
    let p = plan(&t).unwrap();
    let sigs = p.signatures();
    assert!(sigs.contains(&"(read-data ai dataframe1 db2)".to_string()), "{sigs:?}");
    assert_eq!(sigs.iter().filter(|s| s.starts_with("(query-data-optimized ")).count(), 2);
    assert_eq!(sigs.iter().filter(|s| s.starts_with("(query-data-basic ")).count(), 0);
    assert_eq!(brute_force_plan(&t, 20).unwrap().total_cost, p.total_cost);
    assert!(validate_plan(&t, &p).valid);

    // the cheapest plan that reads db1 instead
    let mut via_db1 = t.clone();
    via_db1.actions.retain(|a| !(a.name == "read-data" && a.args.last().map(String::as_str) == Some("db2")));
    let alt = plan(&via_db1).unwrap();
    assert!(alt.total_cost > p.total_cost);
    assert_eq!(alt.total_cost - p.total_cost, (1 + 5 + 5) - (2 + 2 + 2));
}

#[test]
fn two_database_choice_survives_any_action_order() {
    let base = two_databases();
    let expected = plan(&base).unwrap().total_cost;
    for seed in 0..8 {
        let mut t = base.clone();
        t.actions.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        if seed == 0 {
            t.actions.reverse();
        }
        let p = plan(&t).unwrap();
        assert_eq!(p.total_cost, expected);
        let sigs = p.signatures();
        assert!(sigs.contains(&"(read-data ai dataframe1 db2)".to_string()));
        assert_eq!(sigs.iter().filter(|s| s.starts_with("(query-data-optimized ")).count(), 2);
        assert!(!sigs.iter().any(|s| s.starts_with("(query-data-basic ")));
    }
}

#[test]
fn annual_report_plan() {
    let t = fixture_task(include_str!("../../fixtures/annual_report.json")).1;
    let p = plan(&t).unwrap();
    assert!(validate_plan(&t, &p).valid);
    assert_eq!(p.total_cost, 17);
    let sigs = p.signatures();
    assert!(sigs.contains(&"(generate-presentation ai presentation1 presentation-file1)".to_string()), "{sigs:?}");
    assert_eq!(sigs.iter().filter(|s| s.starts_with("(query-data-basic ")).count(), 2);
}

#[test]
fn learning_plan_follows_goal_order() {
    let t = fixture_task(include_str!("../../fixtures/learning.json")).1;
    let p = plan(&t).unwrap();
    assert_eq!(
        p.signatures(),
        vec![
            "(read-data ai dataframe1 data-file1)",
            "(learn-supervised ai dataframe1 ml-algorithm1 column1 model1)",
            "(read-data ai dataframe2 data-file2)",
            "(predict-using-learned-model ai dataframe2 column1 model1 dataframe3 ml-algorithm1)",
        ]
    );
}

#[test]
fn linearize_keeps_interacting_steps_in_order() {
    let t = trade();
    let p = Plan::parse(TRADE_PLAN, &t).unwrap();
    let mut reversed_goals = t.clone();
    reversed_goals.goal_pos.reverse();
    assert_eq!(Plan::new(linearize(&t, p.steps.clone())).signatures(), p.signatures());
    // sending first pulls the response creation ahead of the read
    let steps = Plan::new(linearize(&reversed_goals, p.steps.clone()));
    assert_eq!(steps.signatures()[0], "(create-response ai chat-response)");
    assert!(validate_plan(&t, &steps).valid);
}

#[test]
fn linearize_preserves_validity_and_cost() {
    let d = assistant_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let (t, _) = random_task(&d, &mut rng);
        let Ok(p) = plan(&t) else { continue };
        let mut shuffled_goals = t.clone();
        shuffled_goals.goal_pos.shuffle(&mut rng);
        let q = Plan::new(linearize(&shuffled_goals, p.steps.clone()));
        assert_eq!(q.total_cost, p.total_cost);
        assert!(validate_plan(&t, &q).valid, "{:?}", q.signatures());
    }
}

fn problem(text: &str) -> (Domain, GroundedTask) {
    let d = assistant_domain();
    let p = parse_problem(text, &d).unwrap();
    let t = ground(&d, &p).unwrap();
    (d, t)
}

#[test]
fn satisfied_goal_gives_the_empty_plan() {
    let (_, t) = problem(
        "(define (problem done) (:domain assistant) (:objects r - response) (:init (available r)) (:goal (and (available r))))",
    );
    let p = plan(&t).unwrap();
    assert!(p.is_empty());
    assert_eq!(p.total_cost, 0);
    assert!(brute_force_plan(&t, 0).unwrap().is_empty());
    let r = validate_plan(&t, &Plan::default());
    assert!(r.valid);
    assert_eq!(r.cost, 0);
}

#[test]
fn goal_nobody_adds_is_unsolvable() {
    let (_, t) = problem(
        "(define (problem no) (:domain assistant) (:objects df - dataframe) (:init) (:goal (and (database-backed df))))",
    );
    assert!(t.is_trivially_unsolvable());
    let unreachable = vec![Atom::new("database-backed", ["df"])];
    assert_eq!(plan(&t), Err(PlanError::Unsolvable { unreachable: unreachable.clone() }));
    assert_eq!(brute_force_plan(&t, 50), Err(PlanError::Unsolvable { unreachable }));
    assert!(plan(&t).unwrap_err().to_string().contains("(database-backed df)"));
}

#[test]
fn negated_goals_are_honoured() {
    // a response that exists cannot be made unavailable again, except by sending nothing
    let (_, t) = problem(
        "(define (problem neg) (:domain assistant) (:objects ai - ai-agent r - response) (:init) \
         (:goal (and (not (available r)))))",
    );
    assert!(plan(&t).unwrap().is_empty());
    let (_, t) = problem(
        "(define (problem neg) (:domain assistant) (:objects ai - ai-agent r - response) (:init (available r)) \
         (:goal (and (sent r) (not (sent r)))))",
    );
    assert!(matches!(plan(&t), Err(PlanError::Unsolvable { .. })));
}

#[test]
fn node_cap_is_a_resource_limit() {
    let t = fixture_task(include_str!("../../fixtures/annual_report.json")).1;
    let opts = SearchOptions { heuristic: Heuristic::Blind, node_cap: 3 };
    assert_eq!(plan_with(&t, opts), Err(PlanError::ResourceLimit { expanded: 3 }));
}

#[test]
fn oracle_reports_the_cost_bound() {
    let t = trade();
    assert_eq!(brute_force_plan(&t, 4), Err(PlanError::CostBound { bound: 4 }));
    assert_eq!(brute_force_plan(&t, 5).unwrap().total_cost, 5);
}

#[test]
fn plan_file_round_trip() {
    let t = trade();
    let p = plan(&t).unwrap();
    let text = p.to_text();
    assert!(text.ends_with("; cost = 5\n"));
    assert_eq!(Plan::parse(&text, &t).unwrap(), p);
    assert!(matches!(Plan::parse("(fly ai)\n", &t), Err(PlanFileError::UnknownAction { line: 1, .. })));
    assert!(matches!(
        Plan::parse(&text.replace("cost = 5", "cost = 4"), &t),
        Err(PlanFileError::CostMismatch { declared: 4, actual: 5 })
    ));
    assert!(matches!(Plan::parse("read-data ai\n", &t), Err(PlanFileError::Syntax { line: 1, .. })));
    let (steps, cost) = parse_steps("(A b)\n; cost = 7 (unit cost)\n").unwrap();
    assert_eq!(steps, vec![(1, "a".to_string(), vec!["b".to_string()])]);
    assert_eq!(cost, Some(7));
}

#[test]
fn costlier_actions_never_cheapen_the_optimum() {
    for t in [trade(), two_databases()] {
        let base = plan(&t).unwrap().total_cost;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let i = rng.gen_range(0..t.actions.len());
            let raised = t.with_cost(i, t.actions[i].cost + rng.gen_range(1..6));
            assert!(plan(&raised).unwrap().total_cost >= base);
        }
    }
}

/// A small random task over the assistant domain: up to eight typed
/// objects, a few random initial atoms and database costs, and goals drawn
/// from the atoms a random walk made true. Returns the task and the walk
/// cost, an upper bound on the optimum.
pub(crate) fn random_task(domain: &Domain, rng: &mut ChaCha8Rng) -> (GroundedTask, i64) {
    let mut param_types: Vec<String> =
        domain.actions.iter().flat_map(|a| a.params.iter().map(|p| p.ty.clone())).filter(|t| t != "ai-agent").collect();
    param_types.sort();
    param_types.dedup();
    let preds: Vec<_> = domain.predicates.values().collect();
    loop {
        let n = rng.gen_range(2..=8);
        let mut objects = vec![("ai".to_string(), "ai-agent".to_string())];
        for i in 1..n {
            objects.push((format!("o{i}"), param_types.choose(rng).unwrap().clone()));
        }
        let mut init = Vec::new();
        for (o, _) in objects.iter().skip(1) {
            if rng.gen_bool(0.5) {
                init.push(Atom::new("available", [o.as_str()]));
            }
        }
        for _ in 0..rng.gen_range(0..6) {
            let p = preds.choose(rng).unwrap();
            let args: Option<Vec<String>> = p
                .params
                .iter()
                .map(|param| {
                    let fits: Vec<&String> =
                        objects.iter().filter(|(_, t)| domain.types.is_subtype(t, &param.ty)).map(|(o, _)| o).collect();
                    fits.choose(rng).map(|s| s.to_string())
                })
                .collect();
            if let Some(args) = args {
                init.push(Atom { predicate: p.name.clone(), args });
            }
        }
        init.sort();
        init.dedup();
        let mut numeric = Vec::new();
        for (o, t) in &objects {
            if domain.types.is_subtype(t, "file") && rng.gen_bool(0.5) {
                let value = rng.gen_range(0..=4);
                numeric.push(crate::pddl::NumericFact { fluent: "database-cost".into(), args: vec![o.clone()], value });
            }
        }
        let mut problem = Problem {
            name: "random".into(),
            domain_name: domain.name.clone(),
            objects,
            init,
            numeric,
            goal: Vec::new(),
            metric: None,
        };
        let open = ground(domain, &problem).unwrap();
        let mut state = open.init.clone();
        let mut walk_cost = 0;
        for _ in 0..rng.gen_range(1..=6) {
            let moves: Vec<usize> = (0..open.actions.len()).filter(|&a| search::applicable(&open, &state, a)).collect();
            let Some(&a) = moves.choose(rng) else { break };
            state = search::successor(&open, &state, a);
            walk_cost += open.actions[a].cost;
        }
        let mut fresh: Vec<usize> = state.iter().copied().filter(|s| !open.init.contains(s)).collect();
        if fresh.is_empty() {
            continue;
        }
        fresh.shuffle(rng);
        fresh.truncate(rng.gen_range(1..=6));
        problem.goal = fresh.iter().map(|&i| Literal::pos(open.atoms[i].clone())).collect();
        return (ground(domain, &problem).unwrap(), walk_cost);
    }
}

#[test]
fn random_tasks_match_the_oracle() {
    let d = assistant_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let (t, bound) = random_task(&d, &mut rng);
        let fast = plan(&t).expect("the walk witnesses a plan");
        let slow = brute_force_plan(&t, bound).expect("the walk cost bounds the optimum");
        assert_eq!(fast.total_cost, slow.total_cost, "{:?}", t.goal_literals());
        assert!(fast.total_cost <= bound);
        assert!(validate_plan(&t, &fast).valid);
        assert!(validate_plan(&t, &slow).valid);
    }
}
