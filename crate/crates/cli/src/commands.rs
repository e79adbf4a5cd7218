use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use safeplan::ltl::export_hoa;
use safeplan::product::{build_product, compute_amecs, make_variant, split_goal_states, BuildOptions, Product, Variant};
use safeplan::runtime::{
    evaluate_worlds, metrics_csv, online_execute, summary_csv, BatchResult, RunRecord, RuntimeError,
};
use safeplan::synth::{
    bonus_table, return_value_function, synth_prefix, synth_suffix, CorrectionCache, Policy, SynthError,
};

use crate::error::CliError;
use crate::experiment::{self, resolve, Experiment};

fn out_dir(e: &Experiment) -> Result<PathBuf, CliError> {
    let dir = e.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|err| CliError::input(format!("{}: {err}", dir.display())))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn compile(formula: &str, out: &Path) -> Result<(), CliError> {
    let dra = experiment::compile(formula)?;
    write(out, &export_hoa(&dra))?;
    println!("states {}, pairs {}", dra.num_states(), dra.pairs().len());
    Ok(())
}

/// Product state as `(name, label, q)` for the output files.
fn describe(product: &Product, world: &safeplan::runtime::World, s: usize) -> Value {
    let st = product.states[s];
    json!({
        "state": world.state_name(st.x),
        "label": st.label.names(&world.truth.ap),
        "q": st.q,
    })
}

fn policy_json(product: &Product, world: &safeplan::runtime::World, policy: &Policy, hash: &str) -> Value {
    let states: Vec<Value> = (0..product.num_states())
        .filter(|&s| policy.covers(s))
        .map(|s| {
            let mut entry = describe(product, world, s);
            let choices: Vec<Value> = policy
                .distribution(s)
                .iter()
                .map(|&(k, p)| json!({ "action": world.truth.actions[product.choices[s][k].action], "p": p }))
                .collect();
            entry["choices"] = Value::Array(choices);
            entry
        })
        .collect();
    json!({
        "config_hash": hash,
        "kind": policy.kind,
        "diagnostics": policy.diagnostics,
        "states": states,
    })
}

fn outcome_json(result: &Result<Policy, SynthError>) -> Value {
    match result {
        Ok(p) => json!({
            "variables": p.diagnostics.variables,
            "constraints": p.diagnostics.constraints,
            "objective": p.diagnostics.objective,
            "min_safety_slack": p.diagnostics.min_safety_slack,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn plan(e: Experiment) -> Result<(), CliError> {
    let r = resolve(e)?;
    let out = out_dir(&r.experiment)?;
    let seed = r.eval.seed;
    let cfg = &r.eval.executor;
    let world = r.scenario.world(seed)?;
    let belief = &world.prior;
    let mdp = belief.expected_mdp(&world.truth).map_err(RuntimeError::from)?;
    let product = build_product(&mdp, &r.dra, &world.home, &BuildOptions::default()).map_err(RuntimeError::from)?;
    let amecs = compute_amecs(&product);
    let sigma = CorrectionCache::new(cfg.synthesis.n_sigma, seed).refresh(belief).0.clone();
    let xi = bonus_table(belief, &cfg.bonus);
    let p2 = make_variant(&product, Variant::P2, &amecs).map_err(RuntimeError::from)?;
    let (v, _) = return_value_function(&p2, &sigma, cfg.synthesis.vi_tolerance);

    let mut values = String::from("config_hash,state,label,q,value\n");
    for (s, st) in product.states.iter().enumerate() {
        values.push_str(&format!(
            "{},{},{},{},{}\n",
            r.hash,
            world.state_name(st.x),
            st.label.names(&world.truth.ap).join("|"),
            st.q,
            v[s]
        ));
    }
    write(&out.join("value.csv"), &values)?;

    let component_of = amecs.component_of(product.num_states());
    let prefix = match component_of[product.initial] {
        Some(_) => None,
        None if amecs.is_empty() => Some(Err(SynthError::Infeasible {
            bound: safeplan::synth::Bound::Satisfiability,
            detail: "no accepting end component under the prior belief".into(),
        })),
        None => {
            let p1 = make_variant(&product, Variant::P1, &amecs).map_err(RuntimeError::from)?;
            let result = synth_prefix(&p1, &v, &sigma, &xi, &cfg.synthesis, p1.initial);
            if let Ok(policy) = &result {
                write(&out.join("prefix.json"), &json_text(&policy_json(&p1, &world, policy, &r.hash)))?;
            }
            Some(result)
        }
    };
    let mut suffixes = Vec::new();
    for (i, c) in amecs.components.iter().enumerate() {
        let start = if component_of[product.initial] == Some(i) { product.initial } else { c.goals[0] };
        let split = split_goal_states(&product, c);
        let result = synth_suffix(&product, &split, &v, &sigma, &xi, &cfg.synthesis, start);
        if let Ok(policy) = &result {
            write(&out.join(format!("suffix_{i}.json")), &json_text(&policy_json(&product, &world, policy, &r.hash)))?;
        }
        suffixes.push(result);
    }

    let diagnostics = json!({
        "config_hash": r.hash,
        "product": {
            "states": product.num_states(),
            "edges": product.num_edges(),
            "state_action_pairs": product.num_pairs_su(),
        },
        "components": amecs.components.iter().map(|c| json!({ "states": c.states.len(), "goals": c.goals.len() })).collect::<Vec<_>>(),
        "initial_value": v[product.initial],
        "prefix": prefix.as_ref().map(outcome_json),
        "suffix": suffixes.iter().map(outcome_json).collect::<Vec<_>>(),
    });
    write(&out.join("diagnostics.json"), &json_text(&diagnostics))?;
    println!(
        "product {} states, {} edges; {} accepting components; return value at start {:.4}",
        product.num_states(),
        product.num_edges(),
        amecs.len(),
        v[product.initial]
    );
    if let Some(result) = &prefix {
        match result {
            Ok(p) => println!(
                "prefix: {} variables, {} constraints, objective {:.4}",
                p.diagnostics.variables, p.diagnostics.constraints, p.diagnostics.objective
            ),
            Err(e) => return Err(e.clone().into()),
        }
    }
    for (i, result) in suffixes.iter().enumerate() {
        match result {
            Ok(p) => println!(
                "suffix {i}: {} variables, {} constraints, cost per cycle {:.4}",
                p.diagnostics.variables, p.diagnostics.constraints, p.diagnostics.objective
            ),
            Err(e) => println!("suffix {i}: {e}"),
        }
    }
    if let Some(Err(e)) = suffixes.iter().find(|r| r.is_err()).filter(|_| suffixes.iter().all(Result::is_err)) {
        return Err(e.clone().into());
    }
    Ok(())
}

/// JSON lines for one run: a header, then one object per stage. Every line
/// carries the seed, the method and the config hash.
fn record_lines(rec: &RunRecord) -> Result<String, CliError> {
    let mut head = match serde_json::to_value(rec).map_err(|e| CliError::Failed(e.to_string()))? {
        Value::Object(m) => m,
        _ => unreachable!("records serialize to objects"),
    };
    head.remove("stages");
    head.insert("type".into(), json!("run"));
    let mut out = serde_json::to_string(&head).expect("values serialize");
    out.push('\n');
    for stage in &rec.stages {
        let mut line = Map::new();
        line.insert("type".into(), json!("stage"));
        line.insert("seed".into(), json!(rec.seed));
        line.insert("baseline".into(), json!(rec.baseline));
        line.insert("config_hash".into(), json!(rec.config_hash));
        if let Value::Object(fields) = serde_json::to_value(stage).expect("stages serialize") {
            line.extend(fields);
        }
        out.push_str(&serde_json::to_string(&line).expect("values serialize"));
        out.push('\n');
    }
    Ok(out)
}

pub fn run(e: Experiment) -> Result<(), CliError> {
    let r = resolve(e)?;
    let out = out_dir(&r.experiment)?;
    let seed = r.eval.seed;
    let cfg = &r.eval.executor;
    let world = r.scenario.world(seed)?;
    if let Some(grid) = r.scenario.grid(seed)? {
        write(&out.join("map.txt"), &grid.render())?;
    }
    let activation = r.experiment.activate.unwrap_or(cfg.max_stages);
    let (mut rec, timings) = online_execute(&world, &r.dra, cfg, seed, Some(activation))?;
    rec.config_hash = r.hash.clone();
    write(&out.join("run.jsonl"), &record_lines(&rec)?)?;
    let mut t = serde_json::to_value(timings).expect("timings serialize");
    t["config_hash"] = json!(r.hash);
    write(&out.join("timings.json"), &json_text(&t))?;
    let status = serde_json::to_value(rec.status).expect("status serializes");
    print!("status {} after {} stages", status.as_str().unwrap_or_default(), rec.stages.len());
    if let Some(ret) = &rec.return_run {
        print!(
            "; return requested at stage {}: {} after {} steps",
            ret.activation,
            if ret.reached_home { "home reached" } else { "home not reached" },
            ret.steps
        );
    }
    println!();
    Ok(())
}

pub fn eval(e: Experiment, with_baseline: bool) -> Result<(), CliError> {
    let r = resolve(e)?;
    let out = out_dir(&r.experiment)?;
    let seeds = r.eval.seeds();
    let make_world = |seed: u64| r.scenario.world(seed);
    let mut configs = vec![r.eval.executor.clone()];
    if with_baseline && !r.eval.executor.synthesis.baseline {
        let mut b = r.eval.executor.clone();
        b.synthesis.baseline = true;
        configs.push(b);
    }
    let mut batches: Vec<BatchResult> = Vec::new();
    for cfg in &configs {
        batches.push(evaluate_worlds(make_world, &r.dra, cfg, &seeds, &r.hash)?);
    }
    let mut lines = String::new();
    for rec in batches.iter().flat_map(|b| &b.records) {
        lines.push_str(&record_lines(rec)?);
    }
    write(&out.join("runs.jsonl"), &lines)?;
    let records: Vec<RunRecord> = batches.iter().flat_map(|b| b.records.clone()).collect();
    let timings: Vec<_> = batches.iter().flat_map(|b| b.timings.clone()).collect();
    write(&out.join("metrics.csv"), &metrics_csv(&records, &timings))?;
    let summaries: Vec<_> = batches.iter().map(|b| b.summary.clone()).collect();
    let table = summary_csv(&summaries);
    let mut with_hash = String::new();
    for (i, line) in table.lines().enumerate() {
        let first = if i == 0 { "config_hash".to_string() } else { r.hash.clone() };
        with_hash.push_str(&format!("{first},{line}\n"));
    }
    write(&out.join("summary.csv"), &with_hash)?;
    println!(
        "{:<9} {:>5} {:>8} {:>8} {:>7} {:>7} {:>9} {:>9} {:>7} {:>7}",
        "method", "runs", "states", "edges", "vars", "cons", "build s", "lp s", "safety", "satisfy"
    );
    for s in &summaries {
        println!(
            "{:<9} {:>5} {:>8} {:>8} {:>7} {:>7} {:>9.4} {:>9.4} {:>7.3} {:>7.3}",
            if s.baseline { "baseline" } else { "proposed" },
            s.runs,
            s.max_product_states,
            s.max_product_edges,
            s.max_lp_variables,
            s.max_lp_constraints,
            s.product_secs_per_solve,
            s.lp_secs_per_solve,
            s.safety,
            s.satisfiability
        );
    }
    Ok(())
}
