use std::collections::VecDeque;

use super::lp::{LinearProgram, LpOutcome, LpSolution, RowKind};
use super::policy::{normalize, Diagnostics, Policy, PolicyKind};
use super::{pair_value, Bound, PairTable, SafetyScope, SynthError, SynthesisConfig};
use crate::product::Product;

/// Expected value of `v` after taking choice `k` at `s`, plus the
/// correction term.
pub(crate) fn return_q(p: &Product, v: &[f64], sigma: &PairTable, s: usize, k: usize) -> f64 {
    let c = &p.choices[s][k];
    c.successors.iter().map(|&(t, pr)| pr * v[t]).sum::<f64>() + pair_value(sigma, p, s, c)
}

/// Solves `lp`. On infeasibility, re-solves without the rows named with
/// `safety_prefix` to report which bound is at fault.
pub(crate) fn solve_or_explain(lp: &LinearProgram, safety_prefix: &str) -> Result<LpSolution, SynthError> {
    match lp.solve().map_err(SynthError::Solver)? {
        LpOutcome::Optimal(sol) => Ok(sol),
        LpOutcome::Unbounded => Err(SynthError::Unbounded),
        LpOutcome::Infeasible => {
            let has_safety = lp.rows().iter().any(|r| r.name.starts_with(safety_prefix));
            if !has_safety {
                return Err(SynthError::Infeasible {
                    bound: Bound::Satisfiability,
                    detail: "no policy meets the bound under the current belief".into(),
                });
            }
            let relaxed = lp.filtered(|r| !r.name.starts_with(safety_prefix));
            match relaxed.solve().map_err(SynthError::Solver)? {
                LpOutcome::Infeasible => Err(SynthError::Infeasible {
                    bound: Bound::Satisfiability,
                    detail: "infeasible even without safety rows".into(),
                }),
                _ => Err(SynthError::Infeasible {
                    bound: Bound::Safety,
                    detail: "feasible only after dropping the safety rows".into(),
                }),
            }
        }
    }
}

/// Prefix program on `p1`, whose absorbing states are the union of the
/// accepting end components.
///
/// Occupancy variables `y(s,u)` live on the transient states reachable from
/// `current`. States that are absorbing, cannot reach the components, or
/// (when every state is constrained) cannot meet the safety bound under any
/// action are terminal.
pub fn synth_prefix(
    p1: &Product,
    v: &[f64],
    sigma: &PairTable,
    xi: &PairTable,
    cfg: &SynthesisConfig,
    current: usize,
) -> Result<Policy, SynthError> {
    cfg.validate()?;
    let n = p1.num_states();
    let target = &p1.absorbing;
    if target[current] {
        return Err(SynthError::StateNotCovered(current));
    }
    let reach = p1.can_reach(target);
    if !reach[current] {
        return Err(SynthError::Infeasible {
            bound: Bound::Satisfiability,
            detail: "no accepting component is reachable".into(),
        });
    }
    let constrain_all = !cfg.baseline && cfg.safety_scope == SafetyScope::AllStates;
    let safeable = |s: usize| {
        (0..p1.choices[s].len()).any(|k| return_q(p1, v, sigma, s, k) >= cfg.chi_r - cfg.lp_tolerance)
    };
    let terminal: Vec<bool> = (0..n)
        .map(|s| target[s] || !reach[s] || (constrain_all && s != current && !safeable(s)))
        .collect();

    // Transient states reachable from `current`.
    let mut transient = vec![false; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([current]);
    transient[current] = true;
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for c in &p1.choices[s] {
            for &(t, pr) in &c.successors {
                if pr > 0.0 && !terminal[t] && !transient[t] {
                    transient[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    order.sort_unstable();

    let mut lp = LinearProgram::new();
    let mut var: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &s in &order {
        for (k, c) in p1.choices[s].iter().enumerate() {
            let cost = (c.cost - pair_value(xi, p1, s, c)).max(cfg.cost_floor);
            var[s].push(lp.add_var(format!("y_{s}_{k}"), cost));
        }
    }
    let mut inflow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut sat_terms = Vec::new();
    for &s in &order {
        for (k, c) in p1.choices[s].iter().enumerate() {
            let mut into_target = 0.0;
            for &(t, pr) in &c.successors {
                if transient[t] {
                    inflow[t].push((var[s][k], pr));
                }
                if target[t] {
                    into_target += pr;
                }
            }
            sat_terms.push((var[s][k], into_target + pair_value(sigma, p1, s, c)));
        }
    }
    for &s in &order {
        let mut terms: Vec<(usize, f64)> = var[s].iter().map(|&y| (y, 1.0)).collect();
        terms.extend(inflow[s].iter().map(|&(y, pr)| (y, -pr)));
        lp.add_row(format!("bal_{s}"), terms, RowKind::Eq, if s == current { 1.0 } else { 0.0 });
    }
    lp.add_row("sat", sat_terms, RowKind::Ge, cfg.chi_o);
    if !cfg.baseline {
        let rows: Vec<usize> = match cfg.safety_scope {
            SafetyScope::AllStates => order.clone(),
            SafetyScope::FirstStep => vec![current],
        };
        for s in rows {
            let terms = (0..p1.choices[s].len())
                .map(|k| (var[s][k], return_q(p1, v, sigma, s, k) - cfg.chi_r))
                .collect();
            lp.add_row(format!("safe_{s}"), terms, RowKind::Ge, 0.0);
        }
    }

    let sol = solve_or_explain(&lp, "safe_")?;
    let mut diagnostics = Diagnostics {
        variables: lp.num_vars(),
        constraints: lp.num_rows(),
        objective: sol.objective,
        ..Diagnostics::default()
    };
    for row in lp.rows().iter().filter(|r| !r.name.starts_with("bal_")) {
        let slack = lp.activity(row, &sol.values) - row.rhs;
        if row.name.starts_with("safe_") {
            diagnostics.min_safety_slack = Some(diagnostics.min_safety_slack.map_or(slack, |m: f64| m.min(slack)));
        }
        diagnostics.slacks.push((row.name.clone(), slack));
    }

    let dist = (0..n)
        .map(|s| {
            if !transient[s] {
                return Vec::new();
            }
            let weights: Vec<(usize, f64)> = var[s].iter().enumerate().map(|(k, &y)| (k, sol.values[y])).collect();
            let total: f64 = weights.iter().map(|w| w.1).sum();
            if total > 1e-12 {
                normalize(weights)
            } else {
                let m = p1.choices[s].len() as f64;
                (0..p1.choices[s].len()).map(|k| (k, 1.0 / m)).collect()
            }
        })
        .collect();
    Ok(Policy { kind: PolicyKind::Prefix, dist, diagnostics })
}
