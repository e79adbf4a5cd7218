//! Direct evaluation of LTL on ultimately periodic words.

use super::Ltl;
use crate::label::LabelSet;
use crate::lasso::Lasso;

impl Ltl {
    /// Decides `prefix · cycle^ω ⊨ self` by computing, for every subformula,
    /// its truth value at each of the finitely many folded positions.
    /// Until is the least fixpoint and Always the greatest fixpoint of their
    /// unfolding equations. Atoms missing from `ap` are false.
    ///
    /// Panics if the cycle is empty.
    pub fn holds_on(&self, ap: &[String], word: &Lasso<LabelSet>) -> bool {
        assert!(!word.cycle.is_empty(), "lasso cycle must be non-empty");
        self.truth_table(ap, word)[0]
    }

    fn truth_table(&self, ap: &[String], word: &Lasso<LabelSet>) -> Vec<bool> {
        let n = word.len();
        let letters: Vec<LabelSet> = (0..n).map(|i| *word.at(i)).collect();
        match self {
            Ltl::True => vec![true; n],
            Ltl::False => vec![false; n],
            Ltl::Atom(_) => letters.iter().map(|l| self.eval_letter(ap, *l)).collect(),
            Ltl::Not(f) => f.truth_table(ap, word).into_iter().map(|v| !v).collect(),
            Ltl::And(a, b) => zip_with(a.truth_table(ap, word), b.truth_table(ap, word), |x, y| x && y),
            Ltl::Or(a, b) => zip_with(a.truth_table(ap, word), b.truth_table(ap, word), |x, y| x || y),
            Ltl::Implies(a, b) => {
                zip_with(a.truth_table(ap, word), b.truth_table(ap, word), |x, y| !x || y)
            }
            Ltl::Next(f) => {
                let inner = f.truth_table(ap, word);
                (0..n).map(|i| inner[word.successor(i)]).collect()
            }
            Ltl::Until(a, b) => {
                let lhs = a.truth_table(ap, word);
                let rhs = b.truth_table(ap, word);
                fixpoint(word, false, |i, next| rhs[i] || (lhs[i] && next))
            }
            Ltl::Eventually(f) => {
                let inner = f.truth_table(ap, word);
                fixpoint(word, false, |i, next| inner[i] || next)
            }
            Ltl::Always(f) => {
                let inner = f.truth_table(ap, word);
                fixpoint(word, true, |i, next| inner[i] && next)
            }
        }
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Iterates `value[i] = step(i, value[succ(i)])` from a constant start
/// until stable. Starting from `false` yields the least fixpoint, from `true`
/// the greatest.
fn fixpoint(word: &Lasso<LabelSet>, start: bool, step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    let n = word.len();
    let mut value = vec![start; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let v = step(i, value[word.successor(i)]);
            if v != value[i] {
                value[i] = v;
                changed = true;
            }
        }
        if !changed {
            return value;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn ap() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    const A: LabelSet = LabelSet(1);
    const B: LabelSet = LabelSet(2);
    const NONE: LabelSet = LabelSet(0);

    fn holds(text: &str, prefix: &[LabelSet], cycle: &[LabelSet]) -> bool {
        parse_ltl(text).unwrap().holds_on(&ap(), &Lasso::new(prefix.to_vec(), cycle.to_vec()))
    }

    #[test]
    fn recurrence() {
        assert!(holds("[]<>b", &[], &[B]));
        assert!(!holds("[]<>b", &[B, B], &[NONE]));
        assert!(holds("[]<>b", &[], &[NONE, NONE, B]));
    }

    #[test]
    fn until_is_strong() {
        assert!(!holds("a U b", &[], &[A]));
        assert!(holds("a U b", &[A, A], &[B]));
        assert!(!holds("a U b", &[A, NONE], &[B]));
    }

    #[test]
    fn next_wraps_into_cycle() {
        assert!(holds("X X a", &[NONE], &[NONE, A]));
        assert!(!holds("X X X a", &[NONE], &[NONE, A]));
    }

    #[test]
    fn persistence_versus_recurrence() {
        assert!(holds("<>[]a", &[NONE, B], &[A]));
        assert!(!holds("<>[]a", &[], &[A, NONE]));
    }
}
