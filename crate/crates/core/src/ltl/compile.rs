use std::collections::{BTreeSet, HashMap, VecDeque};

use super::ast::Ltl;
use super::dra::{Dra, RabinPair, MAX_DRA_PROPOSITIONS};
use super::LtlError;
use crate::label::LabelSet;

/// A top-level conjunct of a formula in the compilable fragment.
///
/// Every argument is a propositional formula.
#[derive(Clone, Debug, PartialEq)]
pub enum Clause {
    /// `ψ`, evaluated on the first letter only.
    Initial(Ltl),
    /// `[] ψ`
    Invariance(Ltl),
    /// `[] (trigger -> hold U goal)`
    Response { trigger: Ltl, hold: Ltl, goal: Ltl },
    /// `[] <> ψ`
    Recurrence(Ltl),
    /// `<> ψ`
    Guarantee(Ltl),
}

impl Clause {
    /// Splits a formula into its top-level conjuncts and classifies each.
    pub fn split(formula: &Ltl) -> Result<Vec<Clause>, LtlError> {
        let mut conjuncts = Vec::new();
        flatten_and(formula, &mut conjuncts);
        let mut clauses = Vec::new();
        for c in conjuncts {
            if *c == Ltl::True {
                continue;
            }
            clauses.push(Clause::classify(c)?);
        }
        Ok(clauses)
    }

    pub fn classify(f: &Ltl) -> Result<Clause, LtlError> {
        let unsupported = |reason: &str| LtlError::Fragment {
            clause: f.to_string(),
            reason: reason.to_string(),
        };
        if f.is_propositional() {
            return Ok(Clause::Initial(f.clone()));
        }
        match f {
            Ltl::Always(inner) => {
                if inner.is_propositional() {
                    return Ok(Clause::Invariance((**inner).clone()));
                }
                match &**inner {
                    Ltl::Eventually(g) if g.is_propositional() => {
                        Ok(Clause::Recurrence((**g).clone()))
                    }
                    Ltl::Implies(trigger, rhs) if trigger.is_propositional() => match &**rhs {
                        Ltl::Until(hold, goal)
                            if hold.is_propositional() && goal.is_propositional() =>
                        {
                            Ok(Clause::Response {
                                trigger: (**trigger).clone(),
                                hold: (**hold).clone(),
                                goal: (**goal).clone(),
                            })
                        }
                        _ => Err(unsupported("expected `[] (p -> q U r)` with propositional p, q, r")),
                    },
                    _ => Err(unsupported(
                        "`[]` must wrap a propositional formula, `<> p` or `p -> q U r`",
                    )),
                }
            }
            Ltl::Eventually(inner) if inner.is_propositional() => {
                Ok(Clause::Guarantee((**inner).clone()))
            }
            Ltl::Eventually(_) => Err(unsupported("`<>` must wrap a propositional formula")),
            _ => Err(unsupported("not an invariance, response, recurrence or guarantee clause")),
        }
    }

    pub fn to_ltl(&self) -> Ltl {
        match self {
            Clause::Initial(p) => p.clone(),
            Clause::Invariance(p) => Ltl::always(p.clone()),
            Clause::Response { trigger, hold, goal } => Ltl::always(Ltl::implies(
                trigger.clone(),
                Ltl::until(hold.clone(), goal.clone()),
            )),
            Clause::Recurrence(p) => Ltl::always(Ltl::eventually(p.clone())),
            Clause::Guarantee(p) => Ltl::eventually(p.clone()),
        }
    }
}

fn flatten_and<'a>(f: &'a Ltl, out: &mut Vec<&'a Ltl>) {
    match f {
        Ltl::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

/// Truth table of a propositional formula over every letter.
fn table(f: &Ltl, ap: &[String]) -> Vec<bool> {
    (0..1u32 << ap.len()).map(|l| f.eval_letter(ap, LabelSet(l))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pending {
    Idle,
    Waiting,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Monitor {
    Trap,
    Live {
        fresh: bool,
        responses: Vec<Pending>,
        reached: Vec<bool>,
        counter: usize,
    },
}

enum Obligation {
    Recur(usize),
    ResponseIdle(usize),
    Reached(usize),
}

/// Compiles a conjunction of fragment clauses into a DRA with a single
/// Rabin pair.
///
/// Safety violations lead to an absorbing trap, which forms `H`. Liveness
/// obligations are served in round-robin order by a counter whose final
/// value forms `I`. Only states reachable from the initial state are kept.
pub fn compile_fragment_dra(formula: &Ltl) -> Result<Dra, LtlError> {
    let clauses = Clause::split(formula)?;
    let ap: Vec<String> = formula.atoms().into_iter().collect();
    if ap.len() > MAX_DRA_PROPOSITIONS {
        return Err(LtlError::TooManyPropositions(ap.len()));
    }
    let letters = 1usize << ap.len();

    let mut initial = Vec::new();
    let mut invariants = Vec::new();
    let mut responses = Vec::new();
    let mut recurrences = Vec::new();
    let mut guarantees = Vec::new();
    for clause in &clauses {
        match clause {
            Clause::Initial(p) => initial.push(table(p, &ap)),
            Clause::Invariance(p) => invariants.push(table(p, &ap)),
            Clause::Response { trigger, hold, goal } => responses.push((
                table(trigger, &ap),
                table(hold, &ap),
                table(goal, &ap),
                goal.clone(),
            )),
            Clause::Recurrence(p) => recurrences.push((table(p, &ap), p.clone())),
            Clause::Guarantee(p) => guarantees.push(table(p, &ap)),
        }
    }

    let mut obligations = Vec::new();
    for i in 0..recurrences.len() {
        obligations.push(Obligation::Recur(i));
    }
    for (i, (_, _, _, goal)) in responses.iter().enumerate() {
        // A recurring goal already discharges every pending request.
        if !recurrences.iter().any(|(_, p)| p == goal) {
            obligations.push(Obligation::ResponseIdle(i));
        }
    }
    for i in 0..guarantees.len() {
        obligations.push(Obligation::Reached(i));
    }
    let m = obligations.len();

    let start = Monitor::Live {
        fresh: !initial.is_empty(),
        responses: vec![Pending::Idle; responses.len()],
        reached: vec![false; guarantees.len()],
        counter: 0,
    };

    let step = |state: &Monitor, letter: usize| -> Monitor {
        let Monitor::Live { fresh, responses: pend, reached, counter } = state else {
            return Monitor::Trap;
        };
        if *fresh && initial.iter().any(|t| !t[letter]) {
            return Monitor::Trap;
        }
        if invariants.iter().any(|t| !t[letter]) {
            return Monitor::Trap;
        }
        let mut next_pend = Vec::with_capacity(pend.len());
        for (p, (trigger, hold, goal, _)) in pend.iter().zip(&responses) {
            let open = *p == Pending::Waiting || trigger[letter];
            let next = if !open || goal[letter] {
                Pending::Idle
            } else if hold[letter] {
                Pending::Waiting
            } else {
                return Monitor::Trap;
            };
            next_pend.push(next);
        }
        let next_reached: Vec<bool> = reached
            .iter()
            .zip(&guarantees)
            .map(|(&r, t)| r || t[letter])
            .collect();
        let met = |o: &Obligation| match *o {
            Obligation::Recur(i) => recurrences[i].0[letter],
            Obligation::ResponseIdle(i) => next_pend[i] == Pending::Idle,
            Obligation::Reached(i) => next_reached[i],
        };
        let mut c = if *counter == m { 0 } else { *counter };
        while c < m && met(&obligations[c]) {
            c += 1;
        }
        Monitor::Live { fresh: false, responses: next_pend, reached: next_reached, counter: c }
    };

    let mut ids: HashMap<Monitor, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    states.push(start.clone());
    queue.push_back(start);
    let mut delta_rows: Vec<Vec<usize>> = Vec::new();
    while let Some(state) = queue.pop_front() {
        let mut row = Vec::with_capacity(letters);
        for letter in 0..letters {
            let next = step(&state, letter);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    ids.insert(next.clone(), id);
                    states.push(next.clone());
                    queue.push_back(next);
                    id
                }
            };
            row.push(id);
        }
        delta_rows.push(row);
    }

    let mut avoid = BTreeSet::new();
    let mut recur = BTreeSet::new();
    for (id, s) in states.iter().enumerate() {
        match s {
            Monitor::Trap => {
                avoid.insert(id);
            }
            Monitor::Live { counter, .. } if *counter == m => {
                recur.insert(id);
            }
            Monitor::Live { .. } => {}
        }
    }
    let n = states.len();
    let delta = delta_rows.into_iter().flatten().collect();
    Ok(Dra::new(ap, n, 0, delta, vec![RabinPair { avoid, recur }])
        .expect("compiled automaton is well formed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::Lasso;
    use crate::ltl::parse_ltl;

    fn word(dra: &Dra, prefix: &[&[&str]], cycle: &[&[&str]]) -> Lasso<LabelSet> {
        let conv = |v: &[&[&str]]| -> Vec<LabelSet> {
            v.iter().map(|l| LabelSet::from_names(dra.ap(), l).unwrap()).collect()
        };
        Lasso::new(conv(prefix), conv(cycle))
    }

    #[test]
    fn recurrence_has_two_states() {
        let dra = compile_fragment_dra(&parse_ltl("[]<>b").unwrap()).unwrap();
        assert_eq!(dra.num_states(), 2);
        assert!(dra.pairs()[0].avoid.is_empty());
        assert!(dra.accepts(&word(&dra, &[], &[&["b"]])));
        assert!(!dra.accepts(&word(&dra, &[], &[&[]])));
    }

    #[test]
    fn invariance_has_trap_in_avoid_set() {
        let dra = compile_fragment_dra(&parse_ltl("[]!o").unwrap()).unwrap();
        assert_eq!(dra.num_states(), 2);
        let pair = &dra.pairs()[0];
        assert_eq!(pair.avoid.len(), 1);
        let trap = *pair.avoid.iter().next().unwrap();
        assert_eq!(pair.recur, [1 - trap].into());
        assert!(!dra.accepts(&word(&dra, &[&["o"]], &[&[]])));
        assert!(dra.accepts(&word(&dra, &[], &[&[]])));
    }

    #[test]
    fn case_study_formula() {
        let f = parse_ltl("[]!o && [](h -> (!w) U b) && []<>b && []<>w && []<>h").unwrap();
        let dra = compile_fragment_dra(&f).unwrap();
        assert!(dra.accepts(&word(&dra, &[], &[&["b"], &["w"], &["h"]])));
        assert!(!dra.accepts(&word(&dra, &[], &[&["h"], &["w"], &["b"]])));
        assert!(!dra.accepts(&word(&dra, &[], &[&["b"], &["w"], &["h"], &["o"]])));
        assert!(!dra.accepts(&word(&dra, &[], &[&["b"], &["w"]])));
        assert_eq!(dra.pairs().len(), 1);
    }

    #[test]
    fn unsupported_clause_is_named() {
        let err = compile_fragment_dra(&parse_ltl("[]a && <>[]b").unwrap()).unwrap_err();
        match err {
            LtlError::Fragment { clause, .. } => assert_eq!(clause, "<>[]b"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn guarantee_and_initial_clauses() {
        let dra = compile_fragment_dra(&parse_ltl("a && <>b").unwrap()).unwrap();
        assert!(dra.accepts(&word(&dra, &[&["a"], &[]], &[&["b"], &[]])));
        assert!(!dra.accepts(&word(&dra, &[&[]], &[&["b"]])));
        assert!(!dra.accepts(&word(&dra, &[&["a"]], &[&[]])));
    }
}
