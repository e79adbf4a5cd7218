use serde::{Deserialize, Serialize};

/// An ultimately periodic sequence `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso<T> {
    pub prefix: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T> Lasso<T> {
    pub fn new(prefix: Vec<T>, cycle: Vec<T>) -> Self {
        Lasso { prefix, cycle }
    }

    /// Number of distinct positions (`prefix.len() + cycle.len()`).
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element at a position of the unrolled word; positions past the prefix
    /// wrap around the cycle. Panics if the cycle is empty.
    pub fn at(&self, position: usize) -> &T {
        if position < self.prefix.len() {
            &self.prefix[position]
        } else {
            &self.cycle[(position - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Successor of a folded position in `0..len()`.
    pub fn successor(&self, position: usize) -> usize {
        if position + 1 < self.len() {
            position + 1
        } else {
            self.prefix.len()
        }
    }
}
