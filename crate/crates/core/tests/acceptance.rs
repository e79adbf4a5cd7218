//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.
//!
//! Expected values come from oracles written here, independent of the
//! library code they check: closed-form integrals, brute-force end component
//! enumeration, Monte-Carlo rollouts, ratio value iteration and the direct
//! LTL evaluator.

use std::collections::BTreeSet;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use safeplan::ltl::{compile_fragment_dra, parse_ltl, Dra, RabinPair};
use safeplan::model::{Belief, Choice, LabeledMdp, Observation, StateSpec};
use safeplan::product::{
    build_product, compute_amecs, make_variant, split_goal_states, BuildOptions, Product, Variant,
};
use safeplan::runtime::{
    activation_stage, evaluate_batch, BatchResult, EvalConfig, ExecutorConfig, RunRecord, RunStatus,
};
use safeplan::synth::{
    correction_term, return_value_function, synth_prefix, synth_suffix, CorrectionCache, PairTable,
    SynthesisConfig,
};
use safeplan::{LabelSet, Lasso};

/// Tests run one at a time so the timed ones get the whole machine.
fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: usize, pass: bool, detail: String) -> bool {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn state(name: String, label: LabelSet, choices: Vec<Choice>) -> StateSpec {
    StateSpec { name, labels: vec![(label, 1.0)], choices }
}

fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}

fn random_targets(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut out = BTreeSet::new();
    while out.len() < k.min(n) {
        out.insert(rng.random_range(0..n));
    }
    out.into_iter().collect()
}

fn zeros(m: &LabeledMdp) -> PairTable {
    m.states.iter().map(|s| vec![0.0; s.choices.len()]).collect()
}

// ---------------------------------------------------------------- 1

/// `E[min(0, p - 1/2)]` for `p ~ Beta(1,1)`, by composite Simpson on the
/// uniform density.
fn uniform_shortfall() -> f64 {
    let n = 10_000;
    let h = 1.0 / n as f64;
    let f = |p: f64| (p - 0.5).min(0.0);
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn criterion_1_correction_term() {
    let _serial = serial();
    let b = LabelSet(0);
    let loops = |x: usize| vec![Choice { action: 0, cost: 1.0, successors: vec![(x, 1.0)] }];
    let coin = LabeledMdp {
        ap: vec!["a".into()],
        actions: vec!["go".into()],
        states: vec![
            state("x".into(), b, vec![Choice { action: 0, cost: 1.0, successors: vec![(1, 0.5), (2, 0.5)] }]),
            state("y".into(), b, loops(1)),
            state("z".into(), b, loops(2)),
        ],
        initial_state: 0,
        initial_label: b,
    };
    let belief = Belief::uniform(&coin, 1.0);
    // Two single-label successors, each contributing the uniform shortfall.
    let expected = 2.0 * uniform_shortfall();
    assert!((expected + 0.25).abs() < 1e-9);
    let sigma = correction_term(&belief, 0, 0, 100_000, 7);
    let analytic_ok = (sigma - expected).abs() <= 0.01;

    // Random beliefs: 2500 states with four choices each.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 2500;
    let ap = vec!["a".to_string(), "b".to_string()];
    let states: Vec<StateSpec> = (0..n)
        .map(|x| {
            let nl = rng.random_range(1..=3);
            let labels: Vec<LabelSet> = random_targets(&mut rng, 4, nl).into_iter().map(|l| LabelSet(l as u32)).collect();
            let lp = random_probs(&mut rng, labels.len());
            let choices = (0..4)
                .map(|a| {
                    let k = rng.random_range(1..=4);
                    let to = random_targets(&mut rng, n, k);
                    let p = random_probs(&mut rng, to.len());
                    Choice { action: a, cost: 1.0, successors: to.into_iter().zip(p).collect() }
                })
                .collect();
            StateSpec { name: format!("s{x}"), labels: labels.into_iter().zip(lp).collect(), choices }
        })
        .collect();
    let template = LabeledMdp {
        ap,
        actions: (0..4).map(|a| format!("a{a}")).collect(),
        initial_label: states[0].labels[0].0,
        states,
        initial_state: 0,
    };
    let mut conc = ChaCha8Rng::seed_from_u64(2);
    let mut conc2 = ChaCha8Rng::seed_from_u64(3);
    let belief = Belief::from_template(
        &template,
        1e-3,
        |_, _, _, _| 10f64.powf(conc.random_range(-3.0..2.0)),
        |_, _, _| 10f64.powf(conc2.random_range(-3.0..2.0)),
    );
    let pairs = n * 4;
    let started = Instant::now();
    let mut cache = CorrectionCache::new(1000, 11);
    let table = cache.refresh(&belief).0.clone();
    let per_thousand = started.elapsed().as_secs_f64() / (pairs as f64 / 1000.0);
    let nonpositive = table.iter().flatten().all(|&s| s <= 0.0 && s.is_finite());

    let pass = analytic_ok && nonpositive && per_thousand < 1.0;
    assert!(report(
        1,
        pass,
        format!(
            "sigma(1,1) = {sigma:.4} vs {expected:.4}; {pairs} random pairs nonpositive: {nonpositive}; {per_thousand:.3} s per 1000 pairs"
        )
    ));
}

// ---------------------------------------------------------------- 2

type Component = (Vec<usize>, Vec<Vec<usize>>);

fn random_product(rng: &mut ChaCha8Rng) -> Option<Product> {
    let nx = rng.random_range(1..=4);
    let ap = vec!["a".to_string()];
    let states: Vec<StateSpec> = (0..nx)
        .map(|x| {
            let na = rng.random_range(1..=3);
            let choices = (0..na)
                .map(|a| {
                    let k = rng.random_range(1..=3);
                    let to = random_targets(rng, nx, k);
                    let p = random_probs(rng, to.len());
                    Choice { action: a, cost: 1.0, successors: to.into_iter().zip(p).collect() }
                })
                .collect();
            state(format!("s{x}"), LabelSet(rng.random_range(0..2)), choices)
        })
        .collect();
    let mdp = LabeledMdp {
        ap: ap.clone(),
        actions: vec!["a0".into(), "a1".into(), "a2".into()],
        initial_label: states[0].labels[0].0,
        states,
        initial_state: 0,
    };
    let nq = rng.random_range(1..=3);
    let delta = (0..nq * 2).map(|_| rng.random_range(0..nq)).collect();
    let pairs = (0..rng.random_range(1..=2))
        .map(|_| {
            let mut avoid = BTreeSet::new();
            let mut recur = BTreeSet::new();
            for q in 0..nq {
                match rng.random_range(0..4) {
                    0 => {
                        avoid.insert(q);
                    }
                    1 | 2 => {
                        recur.insert(q);
                    }
                    _ => {}
                }
            }
            RabinPair { avoid, recur }
        })
        .collect();
    let dra = Dra::new(ap, nq, 0, delta, pairs).ok()?;
    let p = build_product(&mdp, &dra, &[0], &BuildOptions::default()).ok()?;
    (p.num_states() <= 6).then_some(p)
}

/// Every accepting end component `(S, A)` with `A` a per-state subset of the
/// choices, found by enumeration; per accepting pair, the maximal ones
/// under inclusion.
///
/// A restriction is packed as a bit mask with bit `3s + k` for choice `k` of
/// state `s`, so inclusion of components is inclusion of masks.
fn brute_force_amecs(p: &Product) -> BTreeSet<Component> {
    let n = p.num_states();
    assert!(n <= 6 && p.choices.iter().all(|c| c.len() <= 3));
    let succ: Vec<Vec<u32>> = p
        .choices
        .iter()
        .map(|cs| cs.iter().map(|c| c.successors.iter().fold(0, |m, &(t, _)| m | 1 << t)).collect())
        .collect();
    let mut maximal: Vec<u32> = Vec::new();
    for pair in &p.pairs {
        let mut accepting: Vec<u32> = Vec::new();
        for set in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n).filter(|&s| set & (1 << s) != 0).collect();
            if members.iter().any(|&s| pair.avoid[s]) || !members.iter().any(|&s| pair.recur[s]) {
                continue;
            }
            // Subsets of all choices; those leaving the set fail closure.
            let mut pick = vec![1u32; members.len()];
            'restrictions: loop {
                let closed = members
                    .iter()
                    .zip(&pick)
                    .all(|(&s, &bits)| (0..succ[s].len()).all(|k| bits & (1 << k) == 0 || succ[s][k] & !set == 0));
                let valid = members.iter().zip(&pick).all(|(&s, &bits)| bits < (1 << succ[s].len()));
                if closed && valid {
                    let edges = |s: usize, bits: u32| {
                        (0..succ[s].len()).filter(|k| bits & (1 << k) != 0).fold(0, |m, k| m | succ[s][k])
                    };
                    let mut out = [0u32; 6];
                    for (&s, &bits) in members.iter().zip(&pick) {
                        out[s] = edges(s, bits);
                    }
                    let connected = members.iter().all(|&m| {
                        let mut reach = 1u32 << m;
                        loop {
                            let next = (0..n).filter(|&s| reach & (1 << s) != 0).fold(reach, |r, s| r | out[s]);
                            if next == reach {
                                break reach == set;
                            }
                            reach = next;
                        }
                    });
                    if connected {
                        accepting.push(members.iter().zip(&pick).fold(0, |m, (&s, &bits)| m | bits << (3 * s)));
                    }
                }
                for i in 0..pick.len() {
                    pick[i] += 1;
                    if pick[i] < 8 {
                        continue 'restrictions;
                    }
                    pick[i] = 1;
                }
                break;
            }
        }
        // Larger masks first: anything contained in a non-maximal component
        // is contained in a maximal one.
        accepting.sort_unstable_by_key(|m| std::cmp::Reverse(m.count_ones()));
        let mut own: Vec<u32> = Vec::new();
        for m in accepting {
            if !own.iter().any(|&big| m & !big == 0) {
                own.push(m);
            }
        }
        maximal.extend(own);
    }
    maximal
        .into_iter()
        .map(|m| {
            let states: Vec<usize> = (0..n).filter(|s| (m >> (3 * s)) & 7 != 0).collect();
            let actions = states.iter().map(|s| (0..3).filter(|k| m & (1 << (3 * s + k)) != 0).collect()).collect();
            (states, actions)
        })
        .collect()
}

#[test]
fn criterion_2_amecs_match_brute_force() {
    let _serial = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let started = Instant::now();
    let (mut checked, mut mismatches, mut nonempty) = (0, 0, 0);
    while checked < 500 {
        let Some(p) = random_product(&mut rng) else { continue };
        checked += 1;
        let got: BTreeSet<Component> =
            compute_amecs(&p).components.into_iter().map(|c| (c.states, c.actions)).collect();
        let want = brute_force_amecs(&p);
        if !want.is_empty() {
            nonempty += 1;
        }
        if got != want {
            mismatches += 1;
            eprintln!("mismatch: got {got:?} want {want:?}");
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = mismatches == 0 && secs < 60.0;
    assert!(report(2, pass, format!("{checked} products, {nonempty} with components, {mismatches} mismatches, {secs:.2} s")));
}

// ---------------------------------------------------------------- 3, 4

/// Random model over `ap = [b]`. The last state is a sink without `b`.
fn random_task_mdp(rng: &mut ChaCha8Rng, n: usize, sink: bool) -> LabeledMdp {
    let b = LabelSet(1);
    let live = if sink { n - 1 } else { n };
    let mut states: Vec<StateSpec> = (0..live)
        .map(|x| {
            let label = if x > 0 && rng.random_bool(0.3) { b } else { LabelSet(0) };
            let na = rng.random_range(2..=3);
            let choices = (0..na)
                .map(|a| {
                    let k = rng.random_range(1..=3);
                    let mut to = random_targets(rng, n, k);
                    // A ring keeps most of the model connected.
                    if a == 0 && !to.contains(&((x + 1) % live)) {
                        to[0] = (x + 1) % live;
                        to.sort_unstable();
                        to.dedup();
                    }
                    let p = random_probs(rng, to.len());
                    Choice { action: a, cost: rng.random_range(1..=10) as f64, successors: to.into_iter().zip(p).collect() }
                })
                .collect();
            state(format!("s{x}"), label, choices)
        })
        .collect();
    if states.iter().all(|s| s.labels[0].0 != b) {
        states[live - 1].labels[0].0 = b;
    }
    if sink {
        states.push(state(
            "sink".into(),
            LabelSet(0),
            vec![Choice { action: 0, cost: 1.0, successors: vec![(n - 1, 1.0)] }],
        ));
    }
    LabeledMdp {
        ap: vec!["b".into()],
        actions: vec!["a0".into(), "a1".into(), "a2".into()],
        initial_label: states[0].labels[0].0,
        states,
        initial_state: 0,
    }
}

fn sample(rng: &mut ChaCha8Rng, dist: &[(usize, f64)]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(i, p) in dist {
        acc += p;
        if u < acc {
            return i;
        }
    }
    dist.last().unwrap().0
}

#[test]
fn criterion_3_prefix_reaches_components() {
    let _serial = serial();
    let dra = compile_fragment_dra(&parse_ltl("[]<>b").unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut sim = ChaCha8Rng::seed_from_u64(31);
    let (mut instances, mut worst, mut ok) = (0, f64::INFINITY, true);
    while instances < 20 {
        let n = rng.random_range(6..=9);
        let m = random_task_mdp(&mut rng, n, true);
        let home: Vec<usize> = (0..n).collect();
        let product = build_product(&m, &dra, &home, &BuildOptions::default()).unwrap();
        let amecs = compute_amecs(&product);
        if amecs.union_mask(product.num_states())[product.initial] {
            continue;
        }
        let p1 = make_variant(&product, Variant::P1, &amecs).unwrap();
        let p2 = make_variant(&product, Variant::P2, &amecs).unwrap();
        let zero = zeros(&m);
        let (v, _) = return_value_function(&p2, &zero, 1e-12);
        let policies: Vec<_> = [0.5, 0.9]
            .iter()
            .map(|&chi_o| {
                let cfg = SynthesisConfig { chi_o, chi_r: 0.5, ..SynthesisConfig::default() };
                synth_prefix(&p1, &v, &zero, &zero, &cfg, p1.initial).map(|p| (chi_o, p))
            })
            .collect();
        let Ok(policies) = policies.into_iter().collect::<Result<Vec<_>, _>>() else { continue };
        instances += 1;
        for (chi_o, policy) in policies {
            let mut hits = 0;
            for _ in 0..20_000 {
                let mut s = p1.initial;
                for _ in 0..10_000 {
                    if p1.absorbing[s] {
                        hits += 1;
                        break;
                    }
                    if !policy.covers(s) {
                        break;
                    }
                    let k = sample(&mut sim, policy.distribution(s));
                    s = sample(&mut sim, &p1.choices[s][k].successors);
                }
            }
            let freq = hits as f64 / 20_000.0;
            worst = worst.min(freq - chi_o);
            ok &= freq >= chi_o - 0.02;
        }
    }
    assert!(report(3, ok, format!("{instances} instances, 20000 rollouts each, worst frequency minus chi_o {worst:+.4}")));
}

/// Minimal long-run cost per goal visit over the component, by bisection on
/// the ratio `λ`: the optimal gain of `c - λ·[s is a goal]` is zero at the
/// optimum. Gains come from relative value iteration on the lazy chain.
fn acpc_oracle(p: &Product, states: &[usize], actions: &[Vec<usize>], goals: &[usize]) -> f64 {
    let index = |s: usize| states.iter().position(|&t| t == s).unwrap();
    let gain = |lambda: f64| -> f64 {
        let m = states.len();
        let mut h = vec![0.0; m];
        let mut g = 0.0;
        for _ in 0..1_000_000 {
            let next: Vec<f64> = (0..m)
                .map(|i| {
                    let s = states[i];
                    let reward = if goals.contains(&s) { lambda } else { 0.0 };
                    actions[i]
                        .iter()
                        .map(|&k| {
                            let c = &p.choices[s][k];
                            let ev: f64 = c.successors.iter().map(|&(t, pr)| pr * h[index(t)]).sum();
                            0.5 * (c.cost - reward) + 0.5 * ev + 0.5 * h[i]
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let diffs: Vec<f64> = next.iter().zip(&h).map(|(a, b)| a - b).collect();
            let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
            g = 0.5 * (hi + lo);
            let r = next[0];
            h = next.iter().map(|x| x - r).collect();
            if hi - lo < 1e-13 {
                break;
            }
        }
        // The lazy chain halves the gain.
        2.0 * g
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while gain(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gain(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-11 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_4_suffix_is_optimal_and_closed() {
    let _serial = serial();
    let dra = compile_fragment_dra(&parse_ltl("[]<>b").unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut sim = ChaCha8Rng::seed_from_u64(41);
    let (mut checked, mut worst, mut exits) = (0, 0.0f64, 0);
    while checked < 20 {
        let n = rng.random_range(3..=6);
        let m = random_task_mdp(&mut rng, n, false);
        let home: Vec<usize> = (0..n).collect();
        let product = build_product(&m, &dra, &home, &BuildOptions::default()).unwrap();
        let amecs = compute_amecs(&product);
        let zero = zeros(&m);
        let p2 = make_variant(&product, Variant::P2, &amecs).unwrap();
        let (v, _) = return_value_function(&p2, &zero, 1e-12);
        for amec in &amecs.components {
            if checked == 20 {
                break;
            }
            checked += 1;
            let split = split_goal_states(&product, amec);
            let start = amec.states[0];
            let policy =
                synth_suffix(&product, &split, &v, &zero, &zero, &SynthesisConfig::default(), start).unwrap();
            let oracle = acpc_oracle(&product, &amec.states, &amec.actions, &amec.goals);
            worst = worst.max((policy.diagnostics.objective - oracle).abs());
            let mut s = start;
            for _ in 0..100_000 {
                let Some(allowed) = amec.allowed(s) else {
                    exits += 1;
                    break;
                };
                let k = sample(&mut sim, policy.distribution(s));
                if !allowed.contains(&k) {
                    exits += 1;
                    break;
                }
                s = sample(&mut sim, &product.choices[s][k].successors);
            }
        }
    }
    let pass = worst <= 1e-6 && exits == 0;
    assert!(report(4, pass, format!("{checked} components, max |cost per cycle - oracle| {worst:.2e}, exits {exits}")));
}

// ---------------------------------------------------------------- 5, 6

struct Batches {
    proposed: BatchResult,
    baseline: BatchResult,
}

fn batches() -> &'static Batches {
    static CELL: OnceLock<Batches> = OnceLock::new();
    CELL.get_or_init(|| {
        let dra = compile_fragment_dra(&parse_ltl(safeplan::runtime::CASE_STUDY_FORMULA).unwrap()).unwrap();
        let eval = EvalConfig { runs: 200, ..EvalConfig::default() };
        let proposed = ExecutorConfig::default();
        assert_eq!(proposed.synthesis.chi_r, 0.8);
        let mut baseline = proposed.clone();
        baseline.synthesis.baseline = true;
        let seeds = eval.seeds();
        Batches {
            proposed: evaluate_batch(&eval.grid, &dra, &proposed, &seeds, "acceptance").unwrap(),
            baseline: evaluate_batch(&eval.grid, &dra, &baseline, &seeds[..100], "acceptance").unwrap(),
        }
    })
}

fn safety(records: &[RunRecord]) -> f64 {
    records.iter().filter(|r| r.return_run.as_ref().is_some_and(|x| x.reached_home)).count() as f64
        / records.len() as f64
}

fn satisfiability(records: &[RunRecord]) -> f64 {
    records.iter().filter(|r| r.status == RunStatus::Accepted).count() as f64 / records.len() as f64
}

#[test]
fn criterion_5_safe_return() {
    let _serial = serial();
    let b = batches();
    let records = &b.proposed.records;
    let activated = records.iter().filter(|r| r.return_run.is_some()).count();
    let eval = EvalConfig::default();
    let on_schedule = records.iter().all(|r| {
        r.return_run.as_ref().is_some_and(|x| x.activation <= activation_stage(r.seed, eval.executor.max_stages))
    });
    let rate = safety(records);
    let pass = records.len() == 200 && activated == 200 && on_schedule && rate >= 0.78;
    assert!(report(5, pass, format!("{activated} activations on valley 10x10 maps, home reached {rate:.3}")));
}

#[test]
fn criterion_6_gap_to_baseline() {
    let _serial = serial();
    let b = batches();
    let proposed = &b.proposed.records[..100];
    let baseline = &b.baseline.records;
    let (ps, pf) = (safety(proposed), satisfiability(proposed));
    let (bs, bf) = (safety(baseline), satisfiability(baseline));
    let secs: f64 = b.proposed.timings[..100].iter().chain(&b.baseline.timings).map(|t| t.total_secs).sum();
    let pass = ps >= 0.8 && pf >= 0.85 && bs <= ps - 0.3 && secs <= 1800.0;
    assert!(report(
        6,
        pass,
        format!("proposed safety {ps:.2} satisfiability {pf:.2}; baseline safety {bs:.2} satisfiability {bf:.2}; {secs:.0} s")
    ));
}

// ---------------------------------------------------------------- 7

#[test]
fn criterion_7_product_size() {
    let _serial = serial();
    // 20x20 four-connected grid, one label per cell.
    let side = 20;
    let ap = vec!["a".to_string()];
    let states: Vec<StateSpec> = (0..side * side)
        .map(|x| {
            let (r, c) = (x / side, x % side);
            let mut choices = Vec::new();
            for (a, (dr, dc)) in [(-1i64, 0i64), (0, -1), (0, 1), (1, 0)].into_iter().enumerate() {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                let to = if (0..side as i64).contains(&nr) && (0..side as i64).contains(&nc) {
                    nr as usize * side + nc as usize
                } else {
                    x
                };
                let successors = if to == x { vec![(x, 1.0)] } else { vec![(to, 0.9), (x, 0.1)] };
                choices.push(Choice { action: a, cost: 1.0, successors });
            }
            state(format!("c{x}"), LabelSet(u32::from((r + c) % 7 == 0)), choices)
        })
        .collect();
    let mdp = LabeledMdp {
        ap: ap.clone(),
        actions: ["n", "w", "e", "s"].map(String::from).to_vec(),
        initial_label: states[0].labels[0].0,
        states,
        initial_state: 0,
    };
    // 21-state counter: `a` advances, anything else stays.
    let nq = 21;
    let delta = (0..nq).flat_map(|q| [q, (q + 1) % nq]).collect();
    let dra = Dra::new(ap, nq, 0, delta, vec![RabinPair { avoid: BTreeSet::new(), recur: [0].into() }]).unwrap();
    let expected: usize = mdp.states.iter().map(|s| s.labels.len()).sum::<usize>() * dra.num_states();
    let full = build_product(&mdp, &dra, &[0], &BuildOptions { enumerate_all: true, ..BuildOptions::default() })
        .unwrap()
        .num_states();
    let reachable = build_product(&mdp, &dra, &[0], &BuildOptions::default()).unwrap().num_states();
    let pass = expected == 8400 && full == 8400 && reachable <= full;
    assert!(report(7, pass, format!("400 x 21 enumerated {full}, reachable {reachable}")));
}

// ---------------------------------------------------------------- 8

#[test]
fn criterion_8_belief_convergence() {
    let _serial = serial();
    let truth = [0.7, 0.1, 0.1, 0.1];
    let l = LabelSet(0);
    let die = LabeledMdp {
        ap: vec!["a".into()],
        actions: vec!["roll".into()],
        states: (0..4)
            .map(|x| {
                let successors = (0..4).map(|t| (t, truth[t])).collect();
                state(format!("f{x}"), l, vec![Choice { action: 0, cost: 1.0, successors }])
            })
            .collect(),
        initial_state: 0,
        initial_label: l,
    };
    let mut within = 0;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut belief = Belief::uniform(&die, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        for t in 0..1000 {
            let next = sample(&mut rng, &die.states[0].choices[0].successors);
            belief.update(&Observation::transition(t, 0, 0, next)).unwrap();
        }
        let mean = belief.expected_mdp(&die).unwrap();
        let l1: f64 = mean.states[0].choices[0].successors.iter().map(|&(t, p)| (p - truth[t]).abs()).sum();
        worst = worst.max(l1);
        if l1 <= 0.05 {
            within += 1;
        }
    }
    assert!(report(8, within >= 99, format!("{within}/100 seeds within L1 0.05 of {truth:?}, worst {worst:.4}")));
}

// ---------------------------------------------------------------- 9

// `o` is rare so that the safety clause is not almost always violated.
fn random_letter(rng: &mut ChaCha8Rng) -> LabelSet {
    let mut l = LabelSet(0);
    for (i, p) in [0.4, 0.3, 0.03, 0.3].into_iter().enumerate() {
        if rng.random_bool(p) {
            l = l.with(i);
        }
    }
    l
}

#[test]
fn criterion_9_fragment_compiler_soundness() {
    let _serial = serial();
    let formulas = [
        "[]!o",
        "[](h -> (!w) U b)",
        "[]<>b",
        "[]<>w",
        "[]<>h",
        safeplan::runtime::CASE_STUDY_FORMULA,
    ];
    let ap: Vec<String> = ["b", "h", "o", "w"].map(String::from).to_vec();
    let compiled: Vec<_> = formulas
        .iter()
        .map(|f| {
            let ltl = parse_ltl(f).unwrap();
            let dra = compile_fragment_dra(&ltl).unwrap();
            (ltl, dra)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let mut disagreements = vec![0; formulas.len()];
    let mut accepted = vec![0; formulas.len()];
    for _ in 0..1000 {
        let (np, nc) = (rng.random_range(0..6), rng.random_range(1..7));
        let prefix: Vec<LabelSet> = (0..np).map(|_| random_letter(&mut rng)).collect();
        let cycle: Vec<LabelSet> = (0..nc).map(|_| random_letter(&mut rng)).collect();
        let word = Lasso::new(prefix, cycle);
        for (i, (ltl, dra)) in compiled.iter().enumerate() {
            let to_dra = |w: &[LabelSet]| w.iter().map(|&l| dra.letter_from(l, &ap)).collect::<Vec<_>>();
            let dra_word = Lasso::new(to_dra(&word.prefix), to_dra(&word.cycle));
            let direct = ltl.holds_on(&ap, &word);
            if direct {
                accepted[i] += 1;
            }
            if dra.accepts(&dra_word) != direct {
                disagreements[i] += 1;
            }
        }
    }
    let pass = disagreements.iter().all(|&d| d == 0);
    let detail: Vec<String> =
        formulas.iter().zip(&disagreements).zip(&accepted).map(|((f, d), a)| format!("{f}: {d} off, {a} true")).collect();
    assert!(report(9, pass, format!("1000 lassos; {}", detail.join("; "))));
}
