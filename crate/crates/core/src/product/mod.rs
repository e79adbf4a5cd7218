//! Product of a labeled MDP with a Rabin automaton, its accepting maximal
//! end components, and the derived MDP variants.

mod amec;
mod export;
mod variant;

pub use amec::{compute_amecs, maximal_end_components, Amec, AmecSet};
pub use export::{export_adjacency, export_amecs};
pub use variant::{make_variant, split_goal_states, SplitComponent, SplitNode, SplitRole, Variant};

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::label::LabelSet;
use crate::ltl::Dra;
use crate::model::{LabeledMdp, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProductError {
    #[error("initial label is not in the label support of the initial state")]
    InitialLabel,
    #[error("automaton proposition `{0}` is not declared by the model")]
    UnknownProposition(String),
    #[error("home state {0} out of range")]
    HomeOutOfRange(usize),
    #[error("no accepting end component")]
    EmptyAmecs,
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub x: usize,
    pub label: LabelSet,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductChoice {
    pub action: usize,
    /// Index of the underlying choice in the MDP state.
    pub mdp_choice: usize,
    pub cost: f64,
    pub successors: Vec<(usize, f64)>,
}

/// State sets of one accepting pair lifted to the product.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPair {
    pub avoid: Vec<bool>,
    pub recur: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Enumerate every `(x, l, q)` with `l` in the label support of `x`
    /// instead of only the states reachable from the initial state.
    pub enumerate_all: bool,
    /// Start state other than `⟨x0, l0, q0⟩`, for rebuilding around the
    /// current state during execution.
    pub start: Option<ProductState>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub states: Vec<ProductState>,
    pub choices: Vec<Vec<ProductChoice>>,
    pub initial: usize,
    pub pairs: Vec<ProductPair>,
    pub home: Vec<bool>,
    /// States whose only choice is a bookkeeping self-loop.
    pub absorbing: Vec<bool>,
    /// For sub-products: id of each state in the product it was cut from.
    pub origin: Option<Vec<usize>>,
    index: HashMap<ProductState, usize>,
}

impl Product {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Number of `(s, u, s')` triples with positive probability.
    pub fn num_edges(&self) -> usize {
        self.choices
            .iter()
            .flatten()
            .map(|c| c.successors.iter().filter(|(_, p)| *p > 0.0).count())
            .sum()
    }

    pub fn num_pairs_su(&self) -> usize {
        self.choices.iter().map(Vec::len).sum()
    }

    pub fn lookup(&self, state: ProductState) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// States that can reach `target` with positive probability under some
    /// policy (including `target` itself).
    pub fn can_reach(&self, target: &[bool]) -> Vec<bool> {
        let n = self.num_states();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, cs) in self.choices.iter().enumerate() {
            for c in cs {
                for &(t, p) in &c.successors {
                    if p > 0.0 {
                        preds[t].push(s);
                    }
                }
            }
        }
        let mut seen = target.to_vec();
        let mut queue: VecDeque<usize> = (0..n).filter(|&s| target[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    /// Checks stochasticity, the automaton step relation and the cost
    /// lifting against the originating MDP and automaton.
    pub fn check_against(&self, mdp: &LabeledMdp, dra: &Dra) -> Result<(), String> {
        for (s, cs) in self.choices.iter().enumerate() {
            let st = self.states[s];
            let sum_ok = |c: &ProductChoice| {
                (c.successors.iter().map(|t| t.1).sum::<f64>() - 1.0).abs() <= 1e-9
            };
            for c in cs {
                if !sum_ok(c) {
                    return Err(format!("row ({s}, {}) does not sum to one", c.action));
                }
                if self.absorbing[s] {
                    continue;
                }
                let mc = &mdp.states[st.x].choices[c.mdp_choice];
                if mc.cost != c.cost || mc.action != c.action {
                    return Err(format!("choice ({s}, {}) does not match the MDP", c.action));
                }
                let next_q = dra.step(st.q, dra.letter_from(st.label, &mdp.ap));
                for &(t, p) in &c.successors {
                    let ts = self.states[t];
                    if ts.q != next_q {
                        return Err(format!("edge {s} -> {t} breaks the automaton step"));
                    }
                    let pd = mc.successors.iter().find(|e| e.0 == ts.x).map_or(0.0, |e| e.1);
                    let pl = mdp.states[ts.x]
                        .labels
                        .iter()
                        .find(|e| e.0 == ts.label)
                        .map_or(0.0, |e| e.1);
                    if (pd * pl - p).abs() > 1e-12 || p <= 0.0 {
                        return Err(format!("edge {s} -> {t} has probability {p}, expected {}", pd * pl));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds `M × A`. The automaton reads the label of the current state, so
/// `⟨x, l, q⟩ --u--> ⟨x', l', δ(q, l)⟩` with probability `p_D(x,u,x') · p_L(x',l')`.
pub fn build_product(
    mdp: &LabeledMdp,
    dra: &Dra,
    home: &[usize],
    options: &BuildOptions,
) -> Result<Product, ProductError> {
    mdp.validate()?;
    if let Some(p) = dra.ap().iter().find(|p| !mdp.ap.contains(p)) {
        return Err(ProductError::UnknownProposition(p.clone()));
    }
    if let Some(&h) = home.iter().find(|&&h| h >= mdp.num_states()) {
        return Err(ProductError::HomeOutOfRange(h));
    }
    let s0 = options
        .start
        .unwrap_or(ProductState { x: mdp.initial_state, label: mdp.initial_label, q: dra.initial() });
    if s0.x >= mdp.num_states() || s0.q >= dra.num_states() {
        return Err(ProductError::InitialLabel);
    }
    if !mdp.states[s0.x].labels.iter().any(|l| l.0 == s0.label) {
        return Err(ProductError::InitialLabel);
    }

    let mut letters: HashMap<LabelSet, LabelSet> = HashMap::new();
    let mut letter = |l: LabelSet| *letters.entry(l).or_insert_with(|| dra.letter_from(l, &mdp.ap));

    let mut states = Vec::new();
    let mut index = HashMap::new();
    if options.enumerate_all {
        for (x, spec) in mdp.states.iter().enumerate() {
            for &(label, _) in &spec.labels {
                for q in 0..dra.num_states() {
                    let st = ProductState { x, label, q };
                    index.insert(st, states.len());
                    states.push(st);
                }
            }
        }
    } else {
        index.insert(s0, 0);
        states.push(s0);
    }

    let mut choices: Vec<Vec<ProductChoice>> = Vec::with_capacity(states.len());
    let mut next = 0;
    while next < states.len() {
        let st = states[next];
        let q_next = dra.step(st.q, letter(st.label));
        let mut row = Vec::with_capacity(mdp.states[st.x].choices.len());
        for (k, c) in mdp.states[st.x].choices.iter().enumerate() {
            let mut successors = Vec::new();
            for &(xn, pd) in &c.successors {
                if pd <= 0.0 {
                    continue;
                }
                for &(ln, pl) in &mdp.states[xn].labels {
                    if pl <= 0.0 {
                        continue;
                    }
                    let target = ProductState { x: xn, label: ln, q: q_next };
                    let id = *index.entry(target).or_insert_with(|| {
                        states.push(target);
                        states.len() - 1
                    });
                    successors.push((id, pd * pl));
                }
            }
            row.push(ProductChoice { action: c.action, mdp_choice: k, cost: c.cost, successors });
        }
        choices.push(row);
        next += 1;
    }

    let n = states.len();
    let is_home: Vec<bool> = {
        let mut h = vec![false; mdp.num_states()];
        for &x in home {
            h[x] = true;
        }
        states.iter().map(|s| h[s.x]).collect()
    };
    let pairs = dra
        .pairs()
        .iter()
        .map(|p| ProductPair {
            avoid: states.iter().map(|s| p.avoid.contains(&s.q)).collect(),
            recur: states.iter().map(|s| p.recur.contains(&s.q)).collect(),
        })
        .collect();
    let initial = index[&s0];
    Ok(Product {
        states,
        choices,
        initial,
        pairs,
        home: is_home,
        absorbing: vec![false; n],
        origin: None,
        index,
    })
}

impl Product {
    /// Assembles a product from parts; used by the variants.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        states: Vec<ProductState>,
        choices: Vec<Vec<ProductChoice>>,
        initial: usize,
        pairs: Vec<ProductPair>,
        home: Vec<bool>,
        absorbing: Vec<bool>,
        origin: Option<Vec<usize>>,
    ) -> Product {
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Product { states, choices, initial, pairs, home, absorbing, origin, index }
    }
}
