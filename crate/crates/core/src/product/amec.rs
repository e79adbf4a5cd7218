use std::collections::BTreeSet;

use super::Product;

/// One accepting maximal end component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amec {
    /// Index of the accepting pair the component was found for.
    pub pair: usize,
    /// Product state ids, ascending.
    pub states: Vec<usize>,
    /// Allowed choice indices per entry of `states`.
    pub actions: Vec<Vec<usize>>,
    /// Members of `states` in the pair's recurrence set, ascending.
    pub goals: Vec<usize>,
}

impl Amec {
    pub fn position(&self, s: usize) -> Option<usize> {
        self.states.binary_search(&s).ok()
    }

    pub fn allowed(&self, s: usize) -> Option<&[usize]> {
        self.position(s).map(|i| self.actions[i].as_slice())
    }

    pub fn is_goal(&self, s: usize) -> bool {
        self.goals.binary_search(&s).is_ok()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AmecSet {
    pub components: Vec<Amec>,
}

impl AmecSet {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Indicator of the union of all components over `n` product states.
    pub fn union_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for c in &self.components {
            for &s in &c.states {
                mask[s] = true;
            }
        }
        mask
    }

    /// First component containing each state.
    pub fn component_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, c) in self.components.iter().enumerate() {
            for &s in &c.states {
                out[s].get_or_insert(i);
            }
        }
        out
    }
}

/// Strongly connected components of the graph with the given successor
/// lists, restricted to `alive` nodes. Iterative Tarjan; returns one
/// component id per node (`usize::MAX` for dead nodes).
pub(crate) fn scc_ids(succ: &[Vec<usize>], alive: &[bool]) -> Vec<usize> {
    let n = succ.len();
    const NONE: usize = usize::MAX;
    let mut index = vec![NONE; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![NONE; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut n_comp = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if !alive[root] || index[root] != NONE {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if !alive[w] {
                    continue;
                }
                if index[w] == NONE {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    comp
}

/// Maximal end components among the `candidate` states, as
/// `(states, allowed choice indices)` with ascending state ids.
pub fn maximal_end_components(
    product: &Product,
    candidate: &[bool],
) -> Vec<(Vec<usize>, Vec<Vec<usize>>)> {
    let n = product.num_states();
    let mut alive = candidate.to_vec();
    let mut allowed: Vec<Vec<usize>> = (0..n)
        .map(|s| if alive[s] { (0..product.choices[s].len()).collect() } else { Vec::new() })
        .collect();
    loop {
        // Prune choices that may leave the alive set, then dead states.
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n {
                if !alive[s] {
                    continue;
                }
                let before = allowed[s].len();
                allowed[s].retain(|&k| product.choices[s][k].successors.iter().all(|&(t, _)| alive[t]));
                if allowed[s].is_empty() {
                    alive[s] = false;
                    changed = true;
                } else if allowed[s].len() != before {
                    changed = true;
                }
            }
        }
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let set: BTreeSet<usize> = allowed[s]
                    .iter()
                    .flat_map(|&k| product.choices[s][k].successors.iter().map(|e| e.0))
                    .collect();
                set.into_iter().collect()
            })
            .collect();
        let comp = scc_ids(&succ, &alive);
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let before = allowed[s].len();
            allowed[s].retain(|&k| {
                product.choices[s][k].successors.iter().all(|&(t, _)| comp[t] == comp[s])
            });
            if allowed[s].len() != before {
                changed = true;
            }
            if allowed[s].is_empty() {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for s in 0..n {
                if alive[s] {
                    groups.entry(comp[s]).or_default().push(s);
                }
            }
            let mut out: Vec<(Vec<usize>, Vec<Vec<usize>>)> = groups
                .into_values()
                .map(|states| {
                    let actions = states.iter().map(|&s| allowed[s].clone()).collect();
                    (states, actions)
                })
                .collect();
            out.sort();
            return out;
        }
    }
}

/// Accepting maximal end components, per accepting pair, merged without
/// duplicates.
pub fn compute_amecs(product: &Product) -> AmecSet {
    let n = product.num_states();
    let mut components: Vec<Amec> = Vec::new();
    for (i, pair) in product.pairs.iter().enumerate() {
        let candidate: Vec<bool> = (0..n).map(|s| !pair.avoid[s] && !product.absorbing[s]).collect();
        for (states, actions) in maximal_end_components(product, &candidate) {
            let goals: Vec<usize> = states.iter().copied().filter(|&s| pair.recur[s]).collect();
            if goals.is_empty() {
                continue;
            }
            if components.iter().any(|c| c.states == states && c.actions == actions) {
                continue;
            }
            components.push(Amec { pair: i, states, actions, goals });
        }
    }
    AmecSet { components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::LabelSet;
    use crate::product::{ProductChoice, ProductPair, ProductState};

    /// Builds a bare product from explicit rows.
    pub(crate) fn bare(
        rows: Vec<Vec<Vec<(usize, f64)>>>,
        avoid: Vec<bool>,
        recur: Vec<bool>,
    ) -> Product {
        let n = rows.len();
        let states = (0..n).map(|x| ProductState { x, label: LabelSet(0), q: 0 }).collect();
        let choices = rows
            .into_iter()
            .map(|cs| {
                cs.into_iter()
                    .enumerate()
                    .map(|(k, successors)| ProductChoice { action: k, mdp_choice: k, cost: 1.0, successors })
                    .collect()
            })
            .collect();
        Product::from_parts(
            states,
            choices,
            0,
            vec![ProductPair { avoid, recur }],
            vec![false; n],
            vec![false; n],
            None,
        )
    }

    #[test]
    fn absorbing_goal_is_an_amec() {
        let p = bare(vec![vec![vec![(1, 1.0)]], vec![vec![(1, 1.0)]]], vec![false; 2], vec![false, true]);
        let a = compute_amecs(&p);
        assert_eq!(a.components, vec![Amec { pair: 0, states: vec![1], actions: vec![vec![0]], goals: vec![1] }]);
    }

    #[test]
    fn transient_goals_give_nothing() {
        let p = bare(
            vec![vec![vec![(1, 1.0)]], vec![vec![(2, 1.0)]], vec![vec![(2, 1.0)]]],
            vec![false; 3],
            vec![false, true, false],
        );
        assert!(compute_amecs(&p).is_empty());
    }

    #[test]
    fn risky_action_is_pruned() {
        // 0 <-> 1 with a safe action; 1 has a second action that may hit the
        // avoid state 2.
        let p = bare(
            vec![
                vec![vec![(1, 1.0)]],
                vec![vec![(0, 1.0)], vec![(0, 0.5), (2, 0.5)]],
                vec![vec![(2, 1.0)]],
            ],
            vec![false, false, true],
            vec![true, false, false],
        );
        let a = compute_amecs(&p);
        assert_eq!(a.len(), 1);
        assert_eq!(a.components[0].states, vec![0, 1]);
        assert_eq!(a.components[0].actions, vec![vec![0], vec![0]]);
    }

    #[test]
    fn tarjan_on_a_chain_of_cycles() {
        let succ = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let ids = scc_ids(&succ, &[true; 5]);
        assert_eq!(ids[0], ids[1]);
        assert_eq!(ids[2], ids[3]);
        assert_ne!(ids[0], ids[2]);
        assert_ne!(ids[4], ids[2]);
    }
}
