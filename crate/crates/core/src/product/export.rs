//! Plain-text adjacency dumps.
//!
//! ```text
//! product states <n> initial <id> pairs <k>
//! state <id> x <x> label <mask> q <q> [home] [absorbing] [avoid <i>]* [recur <i>]*
//!   choice <action> cost <c> -> <target>:<p> ...
//! ```
//!
//! and for components:
//!
//! ```text
//! amec <index> pair <i> states <id> ... goals <id> ...
//!   allow <state> <choice> ...
//! ```

use std::fmt::Write as _;

use super::{AmecSet, Product};

pub fn export_adjacency(product: &Product) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "product states {} initial {} pairs {}",
        product.num_states(),
        product.initial,
        product.pairs.len()
    )
    .unwrap();
    for (s, st) in product.states.iter().enumerate() {
        write!(out, "state {s} x {} label {} q {}", st.x, st.label.0, st.q).unwrap();
        if product.home[s] {
            out.push_str(" home");
        }
        if product.absorbing[s] {
            out.push_str(" absorbing");
        }
        for (i, p) in product.pairs.iter().enumerate() {
            if p.avoid[s] {
                write!(out, " avoid {i}").unwrap();
            }
            if p.recur[s] {
                write!(out, " recur {i}").unwrap();
            }
        }
        out.push('\n');
        for c in &product.choices[s] {
            write!(out, "  choice {} cost {} ->", c.action, c.cost).unwrap();
            for (t, p) in &c.successors {
                write!(out, " {t}:{p}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn export_amecs(amecs: &AmecSet) -> String {
    let mut out = String::new();
    for (i, c) in amecs.components.iter().enumerate() {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(out, "amec {i} pair {} states {} goals {}", c.pair, join(&c.states), join(&c.goals)).unwrap();
        for (s, acts) in c.states.iter().zip(&c.actions) {
            writeln!(out, "  allow {s} {}", join(acts)).unwrap();
        }
    }
    out
}
