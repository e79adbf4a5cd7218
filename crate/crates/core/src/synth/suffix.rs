use super::lp::{LinearProgram, RowKind};
use super::policy::{normalize, Diagnostics, Policy, PolicyKind};
use super::prefix::{return_q, solve_or_explain};
use super::{pair_value, PairTable, SafetyScope, SynthError, SynthesisConfig};
use crate::product::{Product, SplitComponent, SplitRole};

/// Suffix program on one split component.
///
/// Flow `ν(g)` leaves each `Out(g)` copy and is absorbed at the `In`
/// copies; absorbed flow re-enters at the matching `Out` copy, so the
/// occupancy `y` describes one steady-state cycle between goal visits. With
/// `Σ ν = 1`, `Σ y` is the expected cycle length and the objective is the
/// expected (bonus-adjusted) cost per cycle. Safety rows use the return
/// value function as in the prefix.
pub fn synth_suffix(
    product: &Product,
    split: &SplitComponent,
    v: &[f64],
    sigma: &PairTable,
    xi: &PairTable,
    cfg: &SynthesisConfig,
    current: usize,
) -> Result<Policy, SynthError> {
    cfg.validate()?;
    let node_cur = split.source_node(current).ok_or(SynthError::StateNotCovered(current))?;
    let m = split.len();
    let mut lp = LinearProgram::new();
    let mut var: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut true_cost: Vec<(usize, f64)> = Vec::new();
    for node in 0..m {
        let s = split.nodes[node].origin;
        for (k, c) in split.choices[node].iter().enumerate() {
            let cost = (c.cost - pair_value(xi, product, s, c)).max(cfg.cost_floor);
            let y = lp.add_var(format!("y_{node}_{k}"), cost);
            var[node].push(y);
            true_cost.push((y, c.cost));
        }
    }
    let mut nu = vec![usize::MAX; m];
    for node in 0..m {
        if split.nodes[node].role == SplitRole::In {
            nu[node] = lp.add_var(format!("nu_{}", split.nodes[node].origin), 0.0);
        }
    }
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for node in 0..m {
        for (k, c) in split.choices[node].iter().enumerate() {
            for &(t, pr) in &c.successors {
                inflow[t].push((var[node][k], pr));
            }
        }
    }
    for node in 0..m {
        let origin = split.nodes[node].origin;
        match split.nodes[node].role {
            SplitRole::In => {
                let mut terms: Vec<(usize, f64)> = inflow[node].clone();
                terms.push((nu[node], -1.0));
                lp.add_row(format!("renew_{origin}"), terms, RowKind::Eq, 0.0);
            }
            role => {
                let mut terms: Vec<(usize, f64)> = var[node].iter().map(|&y| (y, 1.0)).collect();
                terms.extend(inflow[node].iter().map(|&(y, pr)| (y, -pr)));
                if role == SplitRole::Out {
                    terms.push((nu[split.in_of[&origin]], -1.0));
                }
                lp.add_row(format!("bal_{node}"), terms, RowKind::Eq, 0.0);
            }
        }
    }
    let cycle_terms = nu.iter().filter(|&&x| x != usize::MAX).map(|&x| (x, 1.0)).collect();
    lp.add_row("cycle", cycle_terms, RowKind::Eq, 1.0);
    if !cfg.baseline {
        let nodes: Vec<usize> = match cfg.safety_scope {
            SafetyScope::AllStates => (0..m).filter(|&n| !split.choices[n].is_empty()).collect(),
            SafetyScope::FirstStep => vec![node_cur],
        };
        for node in nodes {
            let s = split.nodes[node].origin;
            let pk = &split.product_choice[node];
            let qs: Vec<f64> = pk.iter().map(|&k| return_q(product, v, sigma, s, k)).collect();
            let terms = qs.iter().enumerate().map(|(k, q)| (var[node][k], q - cfg.chi_r)).collect();
            lp.add_row(format!("safe_{node}"), terms, RowKind::Ge, 0.0);
        }
    }

    let sol = solve_or_explain(&lp, "safe_")?;
    let total_y: f64 = true_cost.iter().map(|&(y, _)| sol.values[y]).sum();
    let true_total: f64 = true_cost.iter().map(|&(y, c)| sol.values[y] * c).sum();
    let mut diagnostics = Diagnostics {
        variables: lp.num_vars(),
        constraints: lp.num_rows(),
        objective: sol.objective,
        mean_cost: Some(true_total / total_y),
        cycle_length: Some(total_y),
        ..Diagnostics::default()
    };
    for row in lp.rows().iter().filter(|r| r.name.starts_with("safe")) {
        let slack = lp.activity(row, &sol.values) - row.rhs;
        diagnostics.min_safety_slack = Some(diagnostics.min_safety_slack.map_or(slack, |x: f64| x.min(slack)));
        diagnostics.slacks.push((row.name.clone(), slack));
    }

    let occupancy: Vec<f64> = (0..m).map(|n| var[n].iter().map(|&y| sol.values[y]).sum()).collect();
    let in_support: Vec<bool> = occupancy.iter().map(|&o| o > 1e-12).collect();
    let steps = steps_to_support(split, &in_support);
    let mut dist: Vec<Vec<(usize, f64)>> = vec![Vec::new(); product.num_states()];
    for node in 0..m {
        if split.choices[node].is_empty() {
            continue;
        }
        let s = split.nodes[node].origin;
        let pk = &split.product_choice[node];
        dist[s] = if in_support[node] {
            normalize(var[node].iter().enumerate().map(|(k, &y)| (pk[k], sol.values[y])).collect())
        } else {
            let score = |k: usize| -> f64 {
                split.choices[node][k].successors.iter().map(|&(t, pr)| pr * steps[t]).sum()
            };
            let best = (0..pk.len())
                .min_by(|&a, &b| {
                    score(a)
                        .total_cmp(&score(b))
                        .then(split.choices[node][a].action.cmp(&split.choices[node][b].action))
                })
                .expect("component nodes have choices");
            vec![(pk[best], 1.0)]
        };
    }
    Ok(Policy { kind: PolicyKind::Suffix, dist, diagnostics })
}

/// Minimal expected number of steps from each node to a node in `target`.
/// `In` copies continue from their `Out` copy. Value iteration from zero;
/// every node of an end component reaches the support almost surely.
fn steps_to_support(split: &SplitComponent, target: &[bool]) -> Vec<f64> {
    let m = split.len();
    let mut d = vec![0.0; m];
    let resolve = |d: &[f64], n: usize| -> f64 {
        match split.nodes[n].role {
            SplitRole::In => d[split.out_of[&split.nodes[n].origin]],
            _ => d[n],
        }
    };
    for _ in 0..100_000 {
        let mut delta: f64 = 0.0;
        for n in 0..m {
            if target[n] || split.choices[n].is_empty() {
                continue;
            }
            let best = split.choices[n]
                .iter()
                .map(|c| 1.0 + c.successors.iter().map(|&(t, pr)| pr * resolve(&d, t)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            delta = delta.max((best - d[n]).abs());
            d[n] = best;
        }
        if delta < 1e-9 {
            break;
        }
    }
    (0..m).map(|n| resolve(&d, n)).collect()
}

/// Long-run average cost of `policy` on `product` from `start`, using the
/// true choice costs. Power iteration on the lazy chain, averaged.
pub fn suffix_mean_cost(product: &Product, policy: &Policy, start: usize, tol: f64) -> f64 {
    let n = product.num_states();
    let step_cost: Vec<f64> = (0..n)
        .map(|s| policy.dist[s].iter().map(|&(k, p)| p * product.choices[s][k].cost).sum())
        .collect();
    let mut mu = vec![0.0; n];
    mu[start] = 1.0;
    let mut last = f64::NAN;
    for it in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for s in 0..n {
            if mu[s] == 0.0 {
                continue;
            }
            next[s] += 0.5 * mu[s];
            for &(k, p) in &policy.dist[s] {
                for &(t, pr) in &product.choices[s][k].successors {
                    next[t] += 0.5 * mu[s] * p * pr;
                }
            }
        }
        mu = next;
        if it % 64 == 0 {
            let g: f64 = mu.iter().zip(&step_cost).map(|(m, c)| m * c).sum();
            if (g - last).abs() < tol {
                return g;
            }
            last = g;
        }
    }
    last
}
