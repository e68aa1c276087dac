use serde::{Deserialize, Serialize};

use super::{Label, Ltl};

/// Ultimately periodic word `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoWord {
    pub prefix: Vec<Label>,
    pub cycle: Vec<Label>,
}

impl LassoWord {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<Label>, cycle: Vec<Label>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        LassoWord { prefix, cycle }
    }

    /// Number of distinct positions (prefix plus one copy of the cycle).
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn letter(&self, i: usize) -> Label {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[i - self.prefix.len()]
        }
    }

    /// Position following `i`; the last cycle position wraps to the cycle start.
    pub fn succ(&self, i: usize) -> usize {
        if i + 1 == self.positions() {
            self.prefix.len()
        } else {
            i + 1
        }
    }
}

/// Decides `prefix · cycle^ω ⊨ f` directly from the LTL semantics.
///
/// Each subformula gets a truth vector over the lasso positions; `U` is the least
/// and `[]` the greatest fixpoint of its one-step unfolding.
pub fn evaluate_word(f: &Ltl, w: &LassoWord) -> bool {
    truth(f, w)[0]
}

fn truth(f: &Ltl, w: &LassoWord) -> Vec<bool> {
    let n = w.positions();
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(a) => (0..n).map(|i| w.letter(i).contains(*a)).collect(),
        Ltl::Not(g) => truth(g, w).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => zip(truth(a, w), truth(b, w), |x, y| x && y),
        Ltl::Or(a, b) => zip(truth(a, w), truth(b, w), |x, y| x || y),
        Ltl::Next(g) => {
            let t = truth(g, w);
            (0..n).map(|i| t[w.succ(i)]).collect()
        }
        Ltl::Eventually(g) => until(&vec![true; n], &truth(g, w), w),
        Ltl::Until(a, b) => until(&truth(a, w), &truth(b, w), w),
        Ltl::Always(g) => {
            let t = truth(g, w);
            let mut cur = vec![true; n];
            loop {
                let next: Vec<bool> = (0..n).map(|i| t[i] && cur[w.succ(i)]).collect();
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
    }
}

fn until(hold: &[bool], goal: &[bool], w: &LassoWord) -> Vec<bool> {
    let n = w.positions();
    let mut cur = vec![false; n];
    loop {
        let next: Vec<bool> = (0..n)
            .map(|i| goal[i] || (hold[i] && cur[w.succ(i)]))
            .collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}
