//! One line per acceptance criterion. Every criterion runs even when an
//! earlier one fails; the test fails if any does.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use planx_cli::{handle_request, App, Config, Input, EXIT_ABORTED};
use planx_core::compiler::compile_problem;
use planx_core::intent::{extract_entities, validate_task_dictionary, PatternSet};
use planx_core::pddl::{assistant_domain, parse_problem, Atom, Domain, Literal, NumericFact, Problem};
use planx_core::planner::{applicable, brute_force_plan, ground, plan, successor, validate_plan, GroundedTask};
use planx_core::runtime::{
    execute_plan, execute_plan_with, Cell, ExecutionState, Hooks, OfficeWorld, Registry, Session, Status, Table,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
const EXAMPLE_LIMIT: Duration = Duration::from_secs(2);
const RANDOM_SUITE_LIMIT: Duration = Duration::from_secs(60);
const RANDOM_TASKS: usize = 200;
const RANDOM_SEED: u64 = 7;

/// Counts in the appointments fixture, worked out by hand from
/// `appointments.json`: 2024 entries at hours 9, 14, 8, 11, 16 and 12, of
/// which the first and fifth recur.
const APPTS_2024_HOURS_8_TO_11: f64 = 3.0;
const APPTS_2024_RECURRING: f64 = 2.0;
const CALENDAR_ENTRIES: usize = 10;

type Outcome = Result<(), String>;

fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn core_fixture(name: &str) -> PathBuf {
    core_dir().join("fixtures").join(name)
}

fn world_fixture(name: &str) -> PathBuf {
    core_fixture("worlds").join(name)
}

fn cli_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn dir_contents(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

struct CliRun {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

fn plan_x(args: &[&str]) -> CliRun {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_plan-x")).args(args).env_remove("PLANX_LLM_ENDPOINT").output().unwrap();
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        elapsed: start.elapsed(),
    }
}

fn config_arg() -> String {
    cli_fixture("config.json").display().to_string()
}

fn task_of(fixture: &str, d: &Domain) -> (Problem, GroundedTask) {
    let dict = validate_task_dictionary(&read_json(&core_fixture(fixture)), d).unwrap();
    let p = compile_problem(&dict, d, "acceptance").unwrap();
    let t = ground(d, &p).unwrap();
    (p, t)
}

const TRADE_PROBLEM: &str = "
  (define (problem test-llm)
    (:domain assistant)
    (:objects ai - agent
              data-file1 - data-file
              dataframe1 filtered-dataframe - dataframe
              chat-response - response
              query1 - query)
    (:init (in dataframe1 data-file1)
           (available query1)
           (query-result dataframe1 query1 filtered-dataframe))
    (:goal (and (done-query query1)
           (in filtered-dataframe chat-response)
           (sent chat-response))))";

fn golden_compile() -> Outcome {
    let start = Instant::now();
    let d = assistant_domain();
    let dict = validate_task_dictionary(&read_json(&core_fixture("trade_status.json")), &d).map_err(|e| e.to_string())?;
    let compiled = compile_problem(&dict, &d, "test-llm").map_err(|e| e.to_string())?;
    let expected = parse_problem(TRADE_PROBLEM, &d).map_err(|e| e.to_string())?;
    let objects = |p: &Problem| {
        let mut o: Vec<(String, String)> = p.objects.iter().filter(|(n, _)| n != "ai").cloned().collect();
        o.sort();
        o
    };
    check(objects(&compiled) == objects(&expected), || "objects differ".into())?;
    check(compiled.canonical().init == expected.canonical().init, || "init differs".into())?;
    check(compiled.canonical().goal == expected.canonical().goal, || "goal differs".into())?;
    let task = ground(&d, &compiled).map_err(|e| e.to_string())?;
    let p = plan(&task).map_err(|e| e.to_string())?;
    let report = validate_plan(&task, &p);
    check(report.valid, || format!("plan does not reach the goals: {:?}", report.failure))?;
    check(task.goal_pos.len() == 3, || "expected three goals".into())?;
    let oracle = brute_force_plan(&task, p.total_cost).map_err(|e| e.to_string())?;
    check(oracle.total_cost == p.total_cost, || format!("cost {} vs oracle {}", p.total_cost, oracle.total_cost))?;
    let elapsed = start.elapsed();
    check(elapsed < GOLDEN_LIMIT, || format!("took {elapsed:?}"))
}

fn annual_report_end_to_end(tmp: &Path) -> Outcome {
    let world = tmp.join("world");
    copy_dir(&world_fixture("annual_report"), &world);
    let dump = tmp.join("dump");
    let seed = core_fixture("annual_report.json");
    let run = plan_x(&[
        "run",
        "--config",
        &config_arg(),
        "--world",
        world.to_str().unwrap(),
        "--dump-dir",
        dump.to_str().unwrap(),
        "--seed-state",
        seed.to_str().unwrap(),
    ]);
    check(run.code == 0, || format!("exit code {}: {}", run.code, run.stdout))?;
    let plan_text = fs::read_to_string(dump.join("plan.txt")).map_err(|e| e.to_string())?;
    let mut names: Vec<&str> =
        plan_text.lines().filter(|l| l.starts_with('(')).map(|l| l[1..].split_whitespace().next().unwrap()).collect();
    names.sort();
    let mut expected = vec![
        "create-graph",
        "read-data",
        "create-presentation",
        "create-slide",
        "query-data-basic",
        "query-data-basic",
        "add-to-graph",
        "add-to-slide-basic",
        "generate-presentation",
    ];
    expected.sort();
    check(names == expected, || format!("action multiset {names:?}"))?;
    check(run.stdout.contains("Task completed in 9 steps."), || run.stdout.clone())?;
    check(run.stdout.contains("genplanx/graph.pptx"), || run.stdout.clone())?;

    let deck = read_json(&world.join("genplanx/graph.pptx"));
    let slide = &deck["slides"][0];
    check(slide["title"] == "Balance over years", || format!("title {}", slide["title"]))?;
    let chart = &slide["items"][0]["chart"];
    check(chart["kind"] == "bar-chart", || format!("chart kind {}", chart["kind"]))?;
    let csv = Table::from_csv(&fs::read_to_string(world_fixture("annual_report").join("annual-report.csv")).unwrap())
        .map_err(|e| e.to_string())?;
    let expected: Vec<(Value, Value)> = csv
        .rows
        .iter()
        .map(|r| (serde_json::to_value(&r[0]).unwrap(), serde_json::to_value(&r[1]).unwrap()))
        .collect();
    let series = &chart["series"][0];
    let got: Vec<(Value, Value)> = series["labels"]
        .as_array()
        .into_iter()
        .flatten()
        .cloned()
        .zip(series["values"].as_array().into_iter().flatten().cloned())
        .collect();
    check(series["name"] == "balance" && got == expected, || format!("series {series}"))?;
    check(run.elapsed < EXAMPLE_LIMIT, || format!("took {:?}", run.elapsed))
}

fn two_database_optimality() -> Outcome {
    let d = assistant_domain();
    let (_, task) = task_of("two_databases.json", &d);
    let p = plan(&task).map_err(|e| e.to_string())?;
    let sigs = p.signatures();
    check(sigs.contains(&"(read-data ai dataframe1 db2)".to_string()), || format!("{sigs:?}"))?;
    let count = |prefix: &str| sigs.iter().filter(|s| s.starts_with(prefix)).count();
    check(count("(query-data-optimized ") == 2, || format!("{sigs:?}"))?;
    check(count("(query-data-basic ") == 0, || format!("{sigs:?}"))?;
    let oracle = brute_force_plan(&task, p.total_cost).map_err(|e| e.to_string())?;
    check(oracle.total_cost == p.total_cost, || format!("cost {} vs oracle {}", p.total_cost, oracle.total_cost))?;

    let cost_of = |name: &str, last: &str| {
        task.actions.iter().find(|a| a.name == name && a.args.last().map(String::as_str) == Some(last)).map(|a| a.cost)
    };
    let db2 = cost_of("read-data", "db2").zip(cost_of("query-data-optimized", "db2")).map(|(a, b)| a + b);
    let db1 = cost_of("read-data", "db1").zip(cost_of("query-data-basic", "db1")).map(|(a, b)| a + b);
    check(db2 == Some(4) && db1 == Some(6), || format!("read+query costs db2 {db2:?}, db1 {db1:?}"))?;
    check(cost_of("query-data-optimized", "db1").is_none(), || "db1 offers the optimized query".into())?;

    let mut via_db1 = task.clone();
    via_db1.actions.retain(|a| !(a.name == "read-data" && a.args.last().map(String::as_str) == Some("db2")));
    let alt = plan(&via_db1).map_err(|e| e.to_string())?;
    check(alt.total_cost > p.total_cost, || format!("db1 plan {} vs {}", alt.total_cost, p.total_cost))
}

fn learning_example() -> Outcome {
    let d = assistant_domain();
    let reg = Registry::builtin();
    let raw = read_json(&core_fixture("learning.json"));
    let dict = validate_task_dictionary(&raw, &d).map_err(|e| e.to_string())?;
    let problem = compile_problem(&dict, &d, "learning").map_err(|e| e.to_string())?;
    let p = plan(&ground(&d, &problem).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let names: Vec<&str> = p.steps.iter().map(|s| s.name.as_str()).collect();
    check(names == ["read-data", "learn-supervised", "read-data", "predict-using-learned-model"], || {
        format!("plan {names:?}")
    })?;

    let mut world = OfficeWorld::load(&world_fixture("learning")).map_err(|e| e.to_string())?;
    let training = world.table("genplanx/investment_data.csv").ok_or("no training table")?.clone();
    let rule = |t: &Table, i: usize| t.cell(i, "Income").and_then(Cell::as_f64).map(|x| x > 50_000.0);
    check(training.len() == 40, || format!("{} training rows", training.len()))?;
    for i in 0..training.len() {
        let label = training.cell(i, "WillPurchase").cloned();
        let want = rule(&training, i).map(|b| Cell::Text(if b { "Yes" } else { "No" }.into()));
        check(label == want, || format!("training row {i} breaks the rule"))?;
    }
    let mut state = ExecutionState::from_dictionary(&dict);
    let report = execute_plan(&Session::new(&d, &reg), &problem, &p, &mut state, &mut world).map_err(|e| e.to_string())?;
    check(report.status == Status::Success, || format!("{:?}", report.reason))?;
    let out = state.table("dataframe3").ok_or("no predictions")?;
    check(out.len() == 10, || format!("{} held-out rows", out.len()))?;
    let agree = (0..out.len())
        .filter(|&i| {
            let want = rule(out, i).map(|b| Cell::Text(if b { "Yes" } else { "No" }.into()));
            out.cell(i, "WillPurchase").cloned() == want
        })
        .count();
    check(agree == 10, || format!("{agree}/10 predictions match"))
}

const SAVE_REQUEST: &str = "Read my appointments and save the result in apps.csv.";
const FILTER_REQUEST: &str = "Open `apps.csv' and filter the appointments in 2024. Of these appointments count how many are at an hour between 8 and 11 and the number of recurring appointments (isrecurring).";

fn appointments() -> Outcome {
    let config = Config::load(&cli_fixture("config.json")).map_err(|e| e.to_string())?;
    let app = App::new(&config).map_err(|e| e.to_string())?;
    let mut world = OfficeWorld::load(&world_fixture("appointments")).map_err(|e| e.to_string())?;
    check(world.calendar.len() == CALENDAR_ENTRIES, || format!("{} calendar entries", world.calendar.len()))?;

    let first = handle_request(Input::Request(SAVE_REQUEST), &app, &mut world, None).map_err(|e| e.to_string())?;
    let steps: Vec<&str> = first.plan.lines().filter(|l| l.starts_with('(')).collect();
    check(
        steps.len() == 2 && steps[0].starts_with("(read-appointments ") && steps[1].starts_with("(save-data "),
        || format!("plan {steps:?}"),
    )?;
    check(first.report.status == Status::Success, || first.response.clone())?;
    let saved = world.table("apps.csv").ok_or("apps.csv missing")?;
    check(saved.len() == CALENDAR_ENTRIES, || format!("apps.csv has {} rows", saved.len()))?;

    let second = handle_request(Input::Request(FILTER_REQUEST), &app, &mut world, None).map_err(|e| e.to_string())?;
    check(second.report.status == Status::Success, || second.response.clone())?;
    let want = [
        format!("hour-data-counts: {APPTS_2024_HOURS_8_TO_11}"),
        format!("recurring-data-counts: {APPTS_2024_RECURRING}"),
    ];
    for w in &want {
        check(second.response.lines().any(|l| l == w), || format!("missing `{w}` in\n{}", second.response))?;
    }
    Ok(())
}

fn entity_extraction() -> Outcome {
    let request = "Check trades for CIDTA12 at F34GP5 on US1234567892 dated 16-07-24, account A12345, portfolio P6763.";
    let got: std::collections::BTreeSet<(String, String)> = extract_entities(request, &PatternSet::shipped())
        .grouped()
        .into_iter()
        .flat_map(|(ty, vs)| vs.into_iter().map(move |v| (ty.clone(), v)))
        .collect();
    let want: std::collections::BTreeSet<(String, String)> = [
        ("client identifier", "CIDTA12"),
        ("firm identifier", "F34GP5"),
        ("ISIN", "US1234567892"),
        ("trade date", "16-07-24"),
        ("account number", "A12345"),
        ("portfolio id", "P6763"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    check(got == want, || format!("{got:?}"))
}

/// A small random assistant-domain task whose goals a random walk reached.
/// Returns the task and the walk cost, which bounds the optimum.
fn random_task(domain: &Domain, rng: &mut ChaCha8Rng) -> (GroundedTask, i64) {
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
        let mut init: Vec<Atom> = objects
            .iter()
            .skip(1)
            .filter(|_| rng.gen_bool(0.5))
            .map(|(o, _)| Atom::new("available", [o.as_str()]))
            .collect();
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
                numeric.push(NumericFact { fluent: "database-cost".into(), args: vec![o.clone()], value: rng.gen_range(0..=4) });
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
            let moves: Vec<usize> = (0..open.actions.len()).filter(|&a| applicable(&open, &state, a)).collect();
            let Some(&a) = moves.choose(rng) else { break };
            state = successor(&open, &state, a);
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

fn planner_optimality() -> Outcome {
    let start = Instant::now();
    let d = assistant_domain();
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut matched = 0;
    for _ in 0..RANDOM_TASKS {
        let (t, bound) = random_task(&d, &mut rng);
        let (Ok(fast), Ok(slow)) = (plan(&t), brute_force_plan(&t, bound)) else { continue };
        if fast.total_cost == slow.total_cost && validate_plan(&t, &fast).valid {
            matched += 1;
        }
    }
    check(matched == RANDOM_TASKS, || format!("{matched}/{RANDOM_TASKS} optimal"))?;
    let elapsed = start.elapsed();
    check(elapsed < RANDOM_SUITE_LIMIT, || format!("took {elapsed:?}"))
}

fn replanning(tmp: &Path) -> Outcome {
    // through the binary: the CSV is gone when the run starts
    let world = tmp.join("world");
    copy_dir(&world_fixture("annual_report"), &world);
    fs::remove_file(world.join("annual-report.csv")).unwrap();
    let dump = tmp.join("dump");
    let seed = core_fixture("annual_report.json");
    let run = plan_x(&[
        "run",
        "--config",
        &config_arg(),
        "--world",
        world.to_str().unwrap(),
        "--dump-dir",
        dump.to_str().unwrap(),
        "--seed-state",
        seed.to_str().unwrap(),
    ]);
    check(run.code == EXIT_ABORTED, || format!("exit code {}", run.code))?;
    let report = read_json(&dump.join("report.json"));
    let failed: Vec<&Value> = report["steps"].as_array().unwrap().iter().filter(|s| s["monitor"] == false).collect();
    check(failed.len() == 1, || format!("{} monitored failures", failed.len()))?;
    check(failed[0]["action"].as_str().unwrap_or("").starts_with("(read-data "), || format!("{}", failed[0]))?;
    let replans = report["replans"].as_array().unwrap();
    check(replans.len() == 1, || format!("{} replans", replans.len()))?;
    check(replans[0]["trigger"]["action"].as_str().unwrap_or("").contains("read-data"), || format!("{}", replans[0]))?;
    check(run.stdout.contains("read-data"), || run.stdout.clone())?;

    // in process: the CSV disappears mid-run and is back before the replan
    let d = assistant_domain();
    let reg = Registry::builtin();
    let dict = validate_task_dictionary(&read_json(&seed), &d).map_err(|e| e.to_string())?;
    let problem = compile_problem(&dict, &d, "annual").map_err(|e| e.to_string())?;
    let p = plan(&ground(&d, &problem).unwrap()).map_err(|e| e.to_string())?;
    let mut world = OfficeWorld::load(&world_fixture("annual_report")).map_err(|e| e.to_string())?;
    let csv = world.files["annual-report.csv"].clone();
    let mut hooks = Hooks {
        before_step: Some(Box::new(|n, _, w: &mut OfficeWorld| {
            if n == 1 {
                w.remove_file("annual-report.csv");
            }
        })),
        before_replan: Some(Box::new(move |_, w: &mut OfficeWorld| {
            w.files.insert("annual-report.csv".into(), csv.clone());
        })),
    };
    let mut state = ExecutionState::from_dictionary(&dict);
    let report = execute_plan_with(&Session::new(&d, &reg), &problem, &p, &mut state, &mut world, &mut hooks)
        .map_err(|e| e.to_string())?;
    let failures = report.steps.iter().filter(|s| !s.monitor).count();
    check(failures == 1 && report.replans.len() == 1, || format!("{failures} failures, {} replans", report.replans.len()))?;
    check(report.status == Status::Success, || format!("restored run ended {:?}", report.status))?;
    check(world.presentations.contains_key("genplanx/graph.pptx"), || "no presentation after repair".into())
}

/// Runs every binary-driven scenario into `root` and returns what it wrote.
fn suite_dumps(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let config = config_arg();
    let scenarios: [(&str, &str, &[&str]); 5] = [
        ("annual", "annual_report", &["--seed-state", "annual_report.json"]),
        ("learning", "learning", &["--seed-state", "learning.json"]),
        ("trade", "trade", &["What is the status of the trade TR123?"]),
        ("apps-save", "appointments", &[SAVE_REQUEST]),
        ("gibberish", "trade", &["Zorp the flibbet twice, quickly."]),
    ];
    for (name, world_name, extra) in scenarios {
        let world = root.join(name).join("world");
        copy_dir(&world_fixture(world_name), &world);
        let dump = root.join(name).join("dump");
        let mut args: Vec<String> = ["run", "--config", &config, "--world", world.to_str().unwrap(), "--dump-dir"]
            .map(String::from)
            .to_vec();
        args.push(dump.to_str().unwrap().to_string());
        for a in extra {
            args.push(if a.ends_with(".json") { core_fixture(a).display().to_string() } else { a.to_string() });
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        plan_x(&refs);
    }
    // follow-up request on the world the save left behind
    let world = root.join("apps-save").join("world");
    let dump = root.join("apps-save").join("dump-filter");
    plan_x(&["run", "--config", &config, "--world", world.to_str().unwrap(), "--dump-dir", dump.to_str().unwrap(), FILTER_REQUEST]);
    dir_contents(root)
}

fn offline_determinism(tmp: &Path) -> Outcome {
    let a = suite_dumps(&tmp.join("a"));
    let b = suite_dumps(&tmp.join("b"));
    check(a.keys().any(|k| k.ends_with("dump/report.json")), || "no dumps written".into())?;
    check(a.keys().any(|k| k.ends_with("prompt.txt")), || "no prompt dumped".into())?;
    let differing: Vec<&PathBuf> = a.keys().chain(b.keys()).filter(|k| a.get(*k) != b.get(*k)).collect();
    check(differing.is_empty(), || format!("differs: {differing:?}"))
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let sub = |n: &str| {
        let p = tmp.path().join(n);
        fs::create_dir_all(&p).unwrap();
        p
    };
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("1 golden compile of the trade-status dictionary", Box::new(golden_compile)),
        ("2 annual report end to end from a seeded state", Box::new({
            let p = sub("c2");
            move || annual_report_end_to_end(&p)
        })),
        ("3 two-database optimality", Box::new(two_database_optimality)),
        ("4 learning example predicts 10/10", Box::new(learning_example)),
        ("5 appointments save then filter", Box::new(appointments)),
        ("6 entity extraction on the six-identifier request", Box::new(entity_extraction)),
        ("7 planner matches the oracle on random tasks", Box::new(planner_optimality)),
        ("8 replanning after a missing CSV", Box::new({
            let p = sub("c8");
            move || replanning(&p)
        })),
        ("9 offline determinism of dump directories", Box::new({
            let p = sub("c9");
            move || offline_determinism(&p)
        })),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(()) => println!("PASS criterion {name}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
