//! LTL to Büchi translation.
//!
//! Tableau expansion in negation normal form produces a generalized Büchi automaton
//! with one acceptance set per `U` subformula; a round-robin counter degeneralizes it.
//! The result is trimmed and equivalent states are merged.

use std::collections::{BTreeSet, HashMap};

use super::nba::{Cube, Guard, Nba};
use super::{AtomSet, Ltl};

type F = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(usize, bool),
    And(F, F),
    Or(F, F),
    Next(F),
    Until(F, F),
    Release(F, F),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    ids: HashMap<Node, F>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> F {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        self.nodes.push(n.clone());
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn nnf(&mut self, f: &Ltl, neg: bool) -> F {
        let n = match (f, neg) {
            (Ltl::True, false) | (Ltl::False, true) => Node::True,
            (Ltl::True, true) | (Ltl::False, false) => Node::False,
            (Ltl::Atom(a), _) => Node::Lit(*a, !neg),
            (Ltl::Not(g), _) => return self.nnf(g, !neg),
            (Ltl::And(a, b), false) | (Ltl::Or(a, b), true) => {
                Node::And(self.nnf(a, neg), self.nnf(b, neg))
            }
            (Ltl::Or(a, b), false) | (Ltl::And(a, b), true) => {
                Node::Or(self.nnf(a, neg), self.nnf(b, neg))
            }
            (Ltl::Next(g), _) => Node::Next(self.nnf(g, neg)),
            (Ltl::Eventually(g), false) | (Ltl::Always(g), true) => {
                let t = self.intern(Node::True);
                Node::Until(t, self.nnf(g, neg))
            }
            (Ltl::Always(g), false) | (Ltl::Eventually(g), true) => {
                let ff = self.intern(Node::False);
                Node::Release(ff, self.nnf(g, neg))
            }
            (Ltl::Until(a, b), false) => Node::Until(self.nnf(a, false), self.nnf(b, false)),
            (Ltl::Until(a, b), true) => Node::Release(self.nnf(a, true), self.nnf(b, true)),
        };
        self.intern(n)
    }
}

const INIT: usize = usize::MAX;

#[derive(Clone)]
struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<F>,
    old: BTreeSet<F>,
    next: BTreeSet<F>,
}

struct Tableau<'a> {
    arena: &'a Arena,
    nodes: Vec<(BTreeSet<usize>, BTreeSet<F>, BTreeSet<F>)>,
    index: HashMap<(BTreeSet<F>, BTreeSet<F>), usize>,
}

impl Tableau<'_> {
    fn contradicts(&self, old: &BTreeSet<F>, f: F) -> bool {
        match self.arena.nodes[f] {
            Node::False => true,
            Node::Lit(a, p) => old
                .iter()
                .any(|&g| self.arena.nodes[g] == Node::Lit(a, !p)),
            _ => false,
        }
    }

    fn expand(&mut self, mut node: Pending) {
        loop {
            let Some(&eta) = node.new.iter().next() else {
                let key = (node.old.clone(), node.next.clone());
                if let Some(&id) = self.index.get(&key) {
                    self.nodes[id].0.extend(node.incoming);
                    return;
                }
                let id = self.nodes.len();
                self.nodes
                    .push((node.incoming, node.old.clone(), node.next.clone()));
                self.index.insert(key, id);
                self.expand(Pending {
                    incoming: BTreeSet::from([id]),
                    new: node.next,
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                });
                return;
            };
            node.new.remove(&eta);
            if node.old.contains(&eta) {
                continue;
            }
            match self.arena.nodes[eta].clone() {
                Node::True | Node::False | Node::Lit(..) => {
                    if self.contradicts(&node.old, eta) {
                        return;
                    }
                    node.old.insert(eta);
                }
                Node::And(a, b) => {
                    node.old.insert(eta);
                    for g in [a, b] {
                        if !node.old.contains(&g) {
                            node.new.insert(g);
                        }
                    }
                }
                Node::Next(a) => {
                    node.old.insert(eta);
                    node.next.insert(a);
                }
                Node::Or(a, b) => {
                    node.old.insert(eta);
                    self.split(node, &[a], &[], &[b]);
                    return;
                }
                Node::Until(a, b) => {
                    node.old.insert(eta);
                    self.split(node, &[a], &[eta], &[b]);
                    return;
                }
                Node::Release(a, b) => {
                    node.old.insert(eta);
                    self.split(node, &[b], &[eta], &[a, b]);
                    return;
                }
            }
        }
    }

    fn split(&mut self, node: Pending, new1: &[F], next1: &[F], new2: &[F]) {
        let mut first = node.clone();
        for &g in new1 {
            if !first.old.contains(&g) {
                first.new.insert(g);
            }
        }
        first.next.extend(next1.iter().copied());
        let mut second = node;
        for &g in new2 {
            if !second.old.contains(&g) {
                second.new.insert(g);
            }
        }
        self.expand(first);
        self.expand(second);
    }
}

/// Translates `f` into an NBA accepting exactly the words satisfying it.
pub fn translate_to_nba(f: &Ltl, atoms: &AtomSet) -> Nba {
    let mut arena = Arena::default();
    let root = arena.nnf(f, false);

    let mut tab = Tableau {
        arena: &arena,
        nodes: Vec::new(),
        index: HashMap::new(),
    };
    tab.expand(Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    });
    let nodes = tab.nodes;

    let guards: Vec<Guard> = nodes
        .iter()
        .map(|(_, old, _)| {
            let mut cube = Cube::TRUE;
            for &g in old {
                if let Node::Lit(a, p) = arena.nodes[g] {
                    if p {
                        cube.pos |= 1 << a;
                    } else {
                        cube.neg |= 1 << a;
                    }
                }
            }
            Guard::from_cube(cube)
        })
        .collect();

    // One acceptance set per until subformula: nodes that do not promise it or fulfil it.
    let mut sets: Vec<Vec<bool>> = Vec::new();
    for (id, n) in arena.nodes.iter().enumerate() {
        if let Node::Until(_, b) = *n {
            let set: Vec<bool> = nodes
                .iter()
                .map(|(_, old, _)| !old.contains(&id) || old.contains(&b))
                .collect();
            if set.iter().all(|&x| x) || sets.contains(&set) {
                continue;
            }
            sets.push(set);
        }
    }

    let k = sets.len().max(1);
    let in_set = |n: usize, i: usize| sets.is_empty() || sets[i][n];
    let mut b = Nba::new(atoms.clone());
    let init = b.add_state("init", false);
    b.set_initial(init);
    let mut ids = vec![vec![0usize; k]; nodes.len()];
    for (n, row) in ids.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = b.add_state(format!("n{n}c{i}"), i == 0 && in_set(n, 0));
        }
    }
    for (n, (incoming, _, _)) in nodes.iter().enumerate() {
        for &m in incoming {
            if m == INIT {
                b.add_transition(init, ids[n][0], guards[n].clone());
                continue;
            }
            for i in 0..k {
                let j = if in_set(m, i) { (i + 1) % k } else { i };
                b.add_transition(ids[m][i], ids[n][j], guards[n].clone());
            }
        }
    }
    simplify(b)
}

/// Trim, merge equivalent states, collapse a fresh initial state into an existing
/// state with identical outgoing transitions, and rename states `s0..`.
pub fn simplify(mut b: Nba) -> Nba {
    loop {
        let before = b.num_states();
        b = b.trimmed().merge_equivalent();
        b = collapse_initial(&b);
        if b.num_states() == before {
            break;
        }
    }
    let mut out = Nba::new(b.atoms().clone());
    for s in 0..b.num_states() {
        out.add_state(format!("s{s}"), b.is_accepting(s));
    }
    for &s in b.initial() {
        out.set_initial(s);
    }
    for s in 0..b.num_states() {
        for (t, g) in b.out(s) {
            out.add_transition(s, *t, g.clone());
        }
    }
    out
}

fn collapse_initial(b: &Nba) -> Nba {
    let n = b.num_states();
    let mut has_incoming = vec![false; n];
    for s in 0..n {
        for (t, _) in b.out(s) {
            has_incoming[*t] = true;
        }
    }
    let mut replace: HashMap<usize, usize> = HashMap::new();
    for &s in b.initial() {
        if has_incoming[s] {
            continue;
        }
        if let Some(m) = (0..n).find(|&m| m != s && b.out(m) == b.out(s)) {
            replace.insert(s, m);
        }
    }
    if replace.is_empty() {
        return b.clone();
    }
    let mut out = Nba::new(b.atoms().clone());
    let mut map = vec![usize::MAX; n];
    for s in 0..n {
        if !replace.contains_key(&s) {
            map[s] = out.add_state(b.name(s).to_string(), b.is_accepting(s));
        }
    }
    for &s in b.initial() {
        let target = replace.get(&s).copied().unwrap_or(s);
        out.set_initial(map[target]);
    }
    for s in 0..n {
        if replace.contains_key(&s) {
            continue;
        }
        for (t, g) in b.out(s) {
            out.add_transition(map[s], map[*t], g.clone());
        }
    }
    out
}
