use std::collections::HashMap;

use super::{AmecSet, Amec, Product, ProductChoice, ProductError, ProductPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// The union of all components made absorbing.
    P1,
    /// Home states made absorbing.
    P2,
    /// Sub-product of the component states and their allowed actions.
    P3,
}

/// Builds the requested variant of `product`.
///
/// Absorbing states keep a single zero-cost self-loop so every row remains
/// a distribution; they are flagged in [`Product::absorbing`].
pub fn make_variant(product: &Product, kind: Variant, amecs: &AmecSet) -> Result<Product, ProductError> {
    match kind {
        Variant::P1 => Ok(with_absorbing(product, &amecs.union_mask(product.num_states()))),
        Variant::P2 => Ok(with_absorbing(product, &product.home)),
        Variant::P3 => restrict(product, amecs),
    }
}

fn with_absorbing(product: &Product, mask: &[bool]) -> Product {
    let mut out = product.clone();
    for s in 0..out.num_states() {
        if mask[s] {
            let action = product.choices[s].first().map_or(0, |c| c.action);
            out.choices[s] = vec![ProductChoice { action, mdp_choice: 0, cost: 0.0, successors: vec![(s, 1.0)] }];
            out.absorbing[s] = true;
        }
    }
    out
}

fn restrict(product: &Product, amecs: &AmecSet) -> Result<Product, ProductError> {
    if amecs.is_empty() {
        return Err(ProductError::EmptyAmecs);
    }
    let mut keep: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen = HashMap::new();
    for c in &amecs.components {
        for (s, acts) in c.states.iter().zip(&c.actions) {
            if seen.insert(*s, keep.len()).is_none() {
                keep.push((*s, acts.clone()));
            }
        }
    }
    keep.sort();
    let new_id: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, (s, _))| (*s, i)).collect();
    let states = keep.iter().map(|(s, _)| product.states[*s]).collect();
    let choices = keep
        .iter()
        .map(|(s, acts)| {
            acts.iter()
                .map(|&k| {
                    let c = &product.choices[*s][k];
                    ProductChoice {
                        successors: c.successors.iter().map(|&(t, p)| (new_id[&t], p)).collect(),
                        ..c.clone()
                    }
                })
                .collect()
        })
        .collect();
    let pick = |v: &[bool]| keep.iter().map(|(s, _)| v[*s]).collect::<Vec<bool>>();
    let pairs = product
        .pairs
        .iter()
        .map(|p| ProductPair { avoid: pick(&p.avoid), recur: pick(&p.recur) })
        .collect();
    let initial = new_id.get(&product.initial).copied().unwrap_or(0);
    let n = keep.len();
    Ok(Product::from_parts(
        states,
        choices,
        initial,
        pairs,
        pick(&product.home),
        vec![false; n],
        Some(keep.iter().map(|(s, _)| *s).collect()),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitRole {
    /// A component state outside the goal set.
    Interior,
    /// Copy of a goal state with only incoming edges; absorbing, zero cost.
    In,
    /// Copy of a goal state with only outgoing edges.
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitNode {
    /// Product state id this node copies.
    pub origin: usize,
    pub role: SplitRole,
}

/// A component whose goal states are split into `In` and `Out` copies.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitComponent {
    pub nodes: Vec<SplitNode>,
    /// Outgoing choices per node; `In` nodes have none.
    pub choices: Vec<Vec<ProductChoice>>,
    /// Choice index in the product for each entry of `choices`.
    pub product_choice: Vec<Vec<usize>>,
    pub interior_of: HashMap<usize, usize>,
    pub in_of: HashMap<usize, usize>,
    pub out_of: HashMap<usize, usize>,
}

impl SplitComponent {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node from which a product state's outgoing choices are taken.
    pub fn source_node(&self, s: usize) -> Option<usize> {
        self.out_of.get(&s).or_else(|| self.interior_of.get(&s)).copied()
    }
}

/// Splits the goal states of one component of `product`.
///
/// Edges into a goal state are redirected to its `In` copy, which absorbs
/// at zero cost; the goal state's own choices leave from its `Out` copy.
pub fn split_goal_states(product: &Product, amec: &Amec) -> SplitComponent {
    let mut nodes = Vec::new();
    let mut interior_of = HashMap::new();
    let mut in_of = HashMap::new();
    let mut out_of = HashMap::new();
    for &s in &amec.states {
        if amec.is_goal(s) {
            in_of.insert(s, nodes.len());
            nodes.push(SplitNode { origin: s, role: SplitRole::In });
            out_of.insert(s, nodes.len());
            nodes.push(SplitNode { origin: s, role: SplitRole::Out });
        } else {
            interior_of.insert(s, nodes.len());
            nodes.push(SplitNode { origin: s, role: SplitRole::Interior });
        }
    }
    let target = |t: usize| in_of.get(&t).or_else(|| interior_of.get(&t)).copied().expect("closed component");
    let mut choices = Vec::with_capacity(nodes.len());
    let mut product_choice = Vec::with_capacity(nodes.len());
    for node in &nodes {
        if node.role == SplitRole::In {
            choices.push(Vec::new());
            product_choice.push(Vec::new());
            continue;
        }
        let allowed = amec.allowed(node.origin).expect("member state");
        choices.push(
            allowed
                .iter()
                .map(|&k| {
                    let c = &product.choices[node.origin][k];
                    ProductChoice {
                        successors: c.successors.iter().map(|&(t, p)| (target(t), p)).collect(),
                        ..c.clone()
                    }
                })
                .collect(),
        );
        product_choice.push(allowed.to_vec());
    }
    SplitComponent { nodes, choices, product_choice, interior_of, in_of, out_of }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::LabelSet;
    use crate::product::{compute_amecs, ProductState};

    fn product(rows: Vec<Vec<Vec<(usize, f64)>>>, recur: Vec<bool>, home: Vec<bool>) -> Product {
        let n = rows.len();
        let states = (0..n).map(|x| ProductState { x, label: LabelSet(0), q: 0 }).collect();
        let choices = rows
            .into_iter()
            .map(|cs| {
                cs.into_iter()
                    .enumerate()
                    .map(|(k, successors)| ProductChoice { action: k, mdp_choice: k, cost: 2.0, successors })
                    .collect()
            })
            .collect();
        Product::from_parts(states, choices, 0, vec![ProductPair { avoid: vec![false; n], recur }], home, vec![false; n], None)
    }

    fn cycle() -> Product {
        // 0 -> {1, 2}; 1 <-> 2 with 2 a goal.
        product(
            vec![vec![vec![(1, 0.5), (2, 0.5)]], vec![vec![(2, 1.0)]], vec![vec![(1, 1.0)], vec![(2, 1.0)]]],
            vec![false, false, true],
            vec![true, false, false],
        )
    }

    #[test]
    fn absorbing_variants_keep_rows_stochastic() {
        let p = cycle();
        let a = compute_amecs(&p);
        let p1 = make_variant(&p, Variant::P1, &a).unwrap();
        assert!(p1.absorbing[1] && p1.absorbing[2] && !p1.absorbing[0]);
        let p2 = make_variant(&p, Variant::P2, &a).unwrap();
        assert!(p2.absorbing[0]);
        for v in [&p1, &p2] {
            for cs in &v.choices {
                for c in cs {
                    assert!((c.successors.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn p3_is_the_component() {
        let p = cycle();
        let a = compute_amecs(&p);
        let p3 = make_variant(&p, Variant::P3, &a).unwrap();
        assert_eq!(p3.origin, Some(vec![1, 2]));
        assert_eq!(p3.choices[1].len(), 2);
        assert_eq!(p3.choices[0][0].successors, vec![(1, 1.0)]);
        assert_eq!(make_variant(&p, Variant::P3, &AmecSet::default()), Err(ProductError::EmptyAmecs));
    }

    #[test]
    fn split_redirects_goal_edges() {
        let p = cycle();
        let a = compute_amecs(&p);
        let split = split_goal_states(&p, &a.components[0]);
        assert_eq!(split.len(), a.components[0].states.len() + a.components[0].goals.len());
        let a_node = split.interior_of[&1];
        let g_in = split.in_of[&2];
        let g_out = split.out_of[&2];
        assert_eq!(split.choices[a_node][0].successors, vec![(g_in, 1.0)]);
        assert!(split.choices[g_in].is_empty());
        assert_eq!(split.choices[g_out][0].successors, vec![(a_node, 1.0)]);
        assert_eq!(split.choices[g_out][1].successors, vec![(g_in, 1.0)]);
    }

    #[test]
    fn self_loop_goal() {
        let p = product(vec![vec![vec![(0, 1.0)]]], vec![true], vec![false]);
        let a = compute_amecs(&p);
        let split = split_goal_states(&p, &a.components[0]);
        assert_eq!(split.len(), 2);
        assert_eq!(split.choices[split.out_of[&0]][0].successors, vec![(split.in_of[&0], 1.0)]);
    }
}
