//! Online planning for uncertain, probabilistically-labeled MDPs under LTL
//! tasks.
//!
//! The crate is organised bottom-up:
//!
//! * [`ltl`] parses formulas, compiles a practical fragment into
//!   deterministic Rabin automata and reads/writes automata in a HOA subset.
//! * [`model`] holds the labeled MDP, Dirichlet beliefs over its transition
//!   and label distributions, and scenario files.
//! * [`product`] builds the product with a Rabin automaton, its accepting
//!   maximal end components and the derived MDP variants.
//! * [`synth`] computes exploration bonuses, correction terms, the return
//!   value function and the prefix/suffix occupancy-measure programs.
//! * [`runtime`] simulates grid worlds and runs the execute/observe/update
//!   loop, plus batch evaluation.

pub mod label;
pub mod lasso;
pub mod ltl;
pub mod model;
pub mod product;
pub mod runtime;
pub mod synth;

pub use label::LabelSet;
pub use lasso::Lasso;
