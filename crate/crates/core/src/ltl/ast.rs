use std::collections::BTreeSet;
use std::fmt;

use crate::label::LabelSet;

/// LTL syntax tree. The derived operators `Always`, `Eventually` and
/// `Implies` are kept as written; [`Ltl::normalize`] rewrites them into the
/// core grammar (`true`, atoms, `!`, `&&`, `X`, `U`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Always(Box<Ltl>),
    Eventually(Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: &str) -> Ltl {
        Ltl::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ltl) -> Ltl {
        Ltl::Not(Box::new(f))
    }

    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn always(f: Ltl) -> Ltl {
        Ltl::Always(Box::new(f))
    }

    pub fn eventually(f: Ltl) -> Ltl {
        Ltl::Eventually(Box::new(f))
    }

    /// Rewrites derived operators into `true`, atoms, `!`, `&&`, `X`, `U`.
    pub fn normalize(&self) -> Ltl {
        use Ltl::*;
        match self {
            True => True,
            False => Ltl::not(True),
            Atom(p) => Atom(p.clone()),
            Not(f) => Ltl::not(f.normalize()),
            And(a, b) => Ltl::and(a.normalize(), b.normalize()),
            Or(a, b) => Ltl::not(Ltl::and(
                Ltl::not(a.normalize()),
                Ltl::not(b.normalize()),
            )),
            Implies(a, b) => Ltl::not(Ltl::and(a.normalize(), Ltl::not(b.normalize()))),
            Next(f) => Ltl::next(f.normalize()),
            Until(a, b) => Ltl::until(a.normalize(), b.normalize()),
            Eventually(f) => Ltl::until(True, f.normalize()),
            Always(f) => Ltl::not(Ltl::until(True, Ltl::not(f.normalize()))),
        }
    }

    /// True when the formula contains no temporal operator.
    pub fn is_propositional(&self) -> bool {
        use Ltl::*;
        match self {
            True | False | Atom(_) => true,
            Not(f) => f.is_propositional(),
            And(a, b) | Or(a, b) | Implies(a, b) => a.is_propositional() && b.is_propositional(),
            Next(_) | Until(..) | Always(_) | Eventually(_) => false,
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        use Ltl::*;
        match self {
            True | False => {}
            Atom(p) => {
                out.insert(p.clone());
            }
            Not(f) | Next(f) | Always(f) | Eventually(f) => f.collect_atoms(out),
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates a propositional formula on one letter. Atoms missing from
    /// `ap` are false. Temporal operators are evaluated as if the word were
    /// the constant word of this letter.
    pub fn eval_letter(&self, ap: &[String], letter: LabelSet) -> bool {
        use Ltl::*;
        match self {
            True => true,
            False => false,
            Atom(p) => ap
                .iter()
                .position(|a| a == p)
                .is_some_and(|i| letter.contains(i)),
            Not(f) => !f.eval_letter(ap, letter),
            And(a, b) => a.eval_letter(ap, letter) && b.eval_letter(ap, letter),
            Or(a, b) => a.eval_letter(ap, letter) || b.eval_letter(ap, letter),
            Implies(a, b) => !a.eval_letter(ap, letter) || b.eval_letter(ap, letter),
            Next(f) | Always(f) | Eventually(f) => f.eval_letter(ap, letter),
            Until(_, b) => b.eval_letter(ap, letter),
        }
    }

    fn precedence(&self) -> u8 {
        use Ltl::*;
        match self {
            Implies(..) => 1,
            Or(..) => 2,
            And(..) => 3,
            Until(..) => 4,
            Not(_) | Next(_) | Always(_) | Eventually(_) => 5,
            True | False | Atom(_) => 6,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Ltl, min_precedence: u8) -> fmt::Result {
    if child.precedence() < min_precedence {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Prints the concrete ASCII syntax accepted by [`crate::ltl::parse_ltl`],
/// inserting only the parentheses needed to parse back to the same tree.
impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Ltl::*;
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(p) => write!(f, "{p}"),
            Not(a) => {
                write!(f, "!")?;
                write_operand(f, a, 5)
            }
            Next(a) => {
                write!(f, "X ")?;
                write_operand(f, a, 5)
            }
            Always(a) => {
                write!(f, "[]")?;
                write_operand(f, a, 5)
            }
            Eventually(a) => {
                write!(f, "<>")?;
                write_operand(f, a, 5)
            }
            // Left-associative: the right operand must bind strictly tighter.
            And(a, b) => {
                write_operand(f, a, 3)?;
                write!(f, " && ")?;
                write_operand(f, b, 4)
            }
            Or(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, " || ")?;
                write_operand(f, b, 3)
            }
            // Right-associative.
            Until(a, b) => {
                write_operand(f, a, 5)?;
                write!(f, " U ")?;
                write_operand(f, b, 4)
            }
            Implies(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, " -> ")?;
                write_operand(f, b, 1)
            }
        }
    }
}
