//! Nondeterministic Büchi automata with guard-labelled transitions.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{AtomSet, Label, LassoWord};
use crate::error::{Error, Result};
use crate::graph::tarjan_scc;

/// Conjunction of literals: atoms in `pos` must hold, atoms in `neg` must not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube {
    pub pos: u32,
    pub neg: u32,
}

impl Cube {
    pub const TRUE: Cube = Cube { pos: 0, neg: 0 };

    /// The cube matching exactly one letter.
    pub fn letter(label: Label, full: u32) -> Cube {
        Cube {
            pos: label.0,
            neg: full & !label.0,
        }
    }

    pub fn is_consistent(self) -> bool {
        self.pos & self.neg == 0
    }

    pub fn satisfied(self, label: Label) -> bool {
        self.pos & !label.0 == 0 && self.neg & label.0 == 0
    }

    /// Minimum Hamming distance from `label` to a letter satisfying the cube.
    pub fn distance(self, label: Label) -> u32 {
        (self.pos & !label.0).count_ones() + (self.neg & label.0).count_ones()
    }

    fn implies(self, other: Cube) -> bool {
        other.pos & !self.pos == 0 && other.neg & !self.neg == 0
    }

    fn letters(self, full: u32, out: &mut Vec<Label>) {
        let free = full & !(self.pos | self.neg);
        let mut sub = free;
        loop {
            out.push(Label(self.pos | sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
}

/// Transition predicate over `2^atoms`, kept as a disjunction of cubes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    cubes: Vec<Cube>,
}

impl Guard {
    pub fn never() -> Guard {
        Guard::default()
    }

    pub fn always() -> Guard {
        Guard {
            cubes: vec![Cube::TRUE],
        }
    }

    pub fn from_cube(c: Cube) -> Guard {
        let mut g = Guard::never();
        g.add(c);
        g
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    /// Adds a disjunct, dropping contradictory and subsumed cubes.
    pub fn add(&mut self, c: Cube) {
        if !c.is_consistent() || self.cubes.iter().any(|&d| c.implies(d)) {
            return;
        }
        self.cubes.retain(|&d| !d.implies(c));
        self.cubes.push(c);
        self.cubes.sort();
    }

    pub fn union(&mut self, other: &Guard) {
        for &c in &other.cubes {
            self.add(c);
        }
    }

    pub fn is_never(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn satisfied(&self, label: Label) -> bool {
        self.cubes.iter().any(|c| c.satisfied(label))
    }

    /// `Dist(label, X)` where `X` is the set of letters satisfying the guard;
    /// `None` when the guard is unsatisfiable.
    pub fn distance(&self, label: Label) -> Option<u32> {
        self.cubes.iter().map(|c| c.distance(label)).min()
    }

    /// Explicit, sorted, deduplicated list of satisfying letters.
    pub fn letters(&self, full: u32) -> Vec<Label> {
        let mut out = Vec::new();
        for c in &self.cubes {
            c.letters(full, &mut out);
        }
        out.sort();
        out.dedup();
        out
    }
}

/// A Büchi automaton over the alphabet `2^atoms`.
///
/// At most one guard is stored per ordered state pair; `out[s]` is sorted by target.
#[derive(Clone, Debug)]
pub struct Nba {
    atoms: AtomSet,
    names: Vec<String>,
    initial: Vec<usize>,
    accepting: Vec<bool>,
    out: Vec<Vec<(usize, Guard)>>,
}

impl Nba {
    pub fn new(atoms: AtomSet) -> Self {
        Nba {
            atoms,
            names: Vec::new(),
            initial: Vec::new(),
            accepting: Vec::new(),
            out: Vec::new(),
        }
    }

    /// One state, initial and accepting, with a `true` self-loop.
    pub fn universal(atoms: AtomSet) -> Self {
        let mut b = Nba::new(atoms);
        let s = b.add_state("s0", true);
        b.set_initial(s);
        b.add_transition(s, s, Guard::always());
        b
    }

    pub fn add_state(&mut self, name: impl Into<String>, accepting: bool) -> usize {
        self.names.push(name.into());
        self.accepting.push(accepting);
        self.out.push(Vec::new());
        self.names.len() - 1
    }

    pub fn set_initial(&mut self, s: usize) {
        if !self.initial.contains(&s) {
            self.initial.push(s);
            self.initial.sort();
        }
    }

    pub fn add_transition(&mut self, from: usize, to: usize, guard: Guard) {
        if guard.is_never() {
            return;
        }
        let edges = &mut self.out[from];
        match edges.binary_search_by_key(&to, |e| e.0) {
            Ok(i) => edges[i].1.union(&guard),
            Err(i) => edges.insert(i, (to, guard)),
        }
    }

    pub fn atoms(&self) -> &AtomSet {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn num_accepting(&self) -> usize {
        self.accepting.iter().filter(|&&a| a).count()
    }

    /// Outgoing `(target, guard)` pairs of `s`, sorted by target.
    pub fn out(&self, s: usize) -> &[(usize, Guard)] {
        &self.out[s]
    }

    pub fn guard(&self, from: usize, to: usize) -> Option<&Guard> {
        let edges = &self.out[from];
        edges
            .binary_search_by_key(&to, |e| e.0)
            .ok()
            .map(|i| &edges[i].1)
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Successors of `s` on `label`.
    pub fn step(&self, s: usize, label: Label) -> impl Iterator<Item = usize> + '_ {
        self.out[s]
            .iter()
            .filter(move |(_, g)| g.satisfied(label))
            .map(|(t, _)| *t)
    }

    /// True iff some run over `w` visits an accepting state infinitely often.
    ///
    /// Builds the product of the automaton with the lasso positions and looks for a
    /// reachable nontrivial SCC containing an accepting state.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let positions = w.positions();
        let encode = |s: usize, i: usize| s * positions + i;
        let n = self.num_states() * positions;
        let succ = |v: usize| -> Vec<usize> {
            let (s, i) = (v / positions, v % positions);
            let j = w.succ(i);
            self.step(s, w.letter(i)).map(|t| encode(t, j)).collect()
        };

        let mut reached = vec![false; n];
        let mut queue: VecDeque<usize> = self.initial.iter().map(|&s| encode(s, 0)).collect();
        for &v in &queue {
            reached[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for u in succ(v) {
                if !reached[u] {
                    reached[u] = true;
                    queue.push_back(u);
                }
            }
        }

        let comps = tarjan_scc(n, |v| {
            if reached[v] {
                succ(v)
            } else {
                Vec::new()
            }
        });
        let mut comp_of = vec![usize::MAX; n];
        for (ci, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[v] = ci;
            }
        }
        comps.iter().enumerate().any(|(ci, comp)| {
            reached[comp[0]]
                && comp.iter().any(|&v| self.accepting[v / positions])
                && comp
                    .iter()
                    .any(|&v| succ(v).into_iter().any(|u| comp_of[u] == ci))
        })
    }

    /// States that can reach a cycle through an accepting state.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let comps = tarjan_scc(n, |s| self.out[s].iter().map(|e| e.0).collect::<Vec<_>>());
        let mut comp_of = vec![0; n];
        for (ci, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[v] = ci;
            }
        }
        let mut live = vec![false; n];
        // Reverse topological order: successors' components are settled first.
        for (ci, comp) in comps.iter().enumerate() {
            let cyclic_accepting = comp.iter().any(|&v| self.accepting[v])
                && comp
                    .iter()
                    .any(|&v| self.out[v].iter().any(|e| comp_of[e.0] == ci));
            let reaches_live = comp
                .iter()
                .any(|&v| self.out[v].iter().any(|e| comp_of[e.0] != ci && live[e.0]));
            if cyclic_accepting || reaches_live {
                for &v in comp {
                    live[v] = true;
                }
            }
        }
        live
    }

    /// Restricts to states reachable from the initial set that can still accept.
    pub fn trimmed(&self) -> Nba {
        let live = self.live_states();
        let mut keep = vec![false; self.num_states()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in &self.initial {
            if live[s] && !keep[s] {
                keep[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &(t, _) in &self.out[s] {
                if live[t] && !keep[t] {
                    keep[t] = true;
                    queue.push_back(t);
                }
            }
        }
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Nba {
        let mut map = vec![usize::MAX; self.num_states()];
        let mut b = Nba::new(self.atoms.clone());
        for s in 0..self.num_states() {
            if keep[s] {
                map[s] = b.add_state(self.names[s].clone(), self.accepting[s]);
            }
        }
        for &s in &self.initial {
            if keep[s] {
                b.set_initial(map[s]);
            }
        }
        for s in 0..self.num_states() {
            if !keep[s] {
                continue;
            }
            for (t, g) in &self.out[s] {
                if keep[*t] {
                    b.add_transition(map[s], map[*t], g.clone());
                }
            }
        }
        b
    }

    /// Merges states with identical acceptance and identical outgoing transitions,
    /// iterated to a fixpoint. Language-preserving.
    pub fn merge_equivalent(&self) -> Nba {
        let n = self.num_states();
        let mut class: Vec<usize> = (0..n).map(|s| self.accepting[s] as usize).collect();
        loop {
            let mut sigs: HashMap<(usize, Vec<(usize, Vec<Cube>)>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let mut by_class: BTreeMap<usize, Guard> = BTreeMap::new();
                for (t, g) in &self.out[s] {
                    by_class.entry(class[*t]).or_default().union(g);
                }
                let sig: Vec<(usize, Vec<Cube>)> = by_class
                    .into_iter()
                    .map(|(c, g)| (c, g.cubes().to_vec()))
                    .collect();
                let key = (class[s], sig);
                let fresh = sigs.len();
                next[s] = *sigs.entry(key).or_insert(fresh);
            }
            let stable = sigs.len() == distinct(&class);
            class = next;
            if stable {
                break;
            }
        }
        let mut rep: Vec<Option<usize>> = vec![None; distinct_max(&class)];
        let mut b = Nba::new(self.atoms.clone());
        let mut map = vec![0; n];
        for s in 0..n {
            let c = class[s];
            map[s] = match rep[c] {
                Some(id) => id,
                None => {
                    let id = b.add_state(self.names[s].clone(), self.accepting[s]);
                    rep[c] = Some(id);
                    id
                }
            };
        }
        for &s in &self.initial {
            b.set_initial(map[s]);
        }
        for s in 0..n {
            for (t, g) in &self.out[s] {
                b.add_transition(map[s], map[*t], g.clone());
            }
        }
        b
    }

    /// Serializable interchange form with explicit label sets.
    pub fn to_doc(&self) -> NbaDoc {
        let full = self.atoms.full_mask();
        let mut transitions = Vec::new();
        for s in 0..self.num_states() {
            for (t, g) in &self.out[s] {
                transitions.push(TransitionDoc {
                    from: self.names[s].clone(),
                    to: self.names[*t].clone(),
                    labels: g
                        .letters(full)
                        .into_iter()
                        .map(|l| self.atoms.label_names(l))
                        .collect(),
                });
            }
        }
        NbaDoc {
            atoms: self.atoms.names().to_vec(),
            states: self.names.clone(),
            initial: self.initial.iter().map(|&s| self.names[s].clone()).collect(),
            accepting: (0..self.num_states())
                .filter(|&s| self.accepting[s])
                .map(|s| self.names[s].clone())
                .collect(),
            transitions,
        }
    }

    pub fn from_doc(doc: &NbaDoc) -> Result<Nba> {
        let atoms = AtomSet::new(doc.atoms.iter().cloned())
            .map_err(|e| Error::Schema(format!("atoms: {e}")))?;
        let full = atoms.full_mask();
        let mut b = Nba::new(atoms);
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for name in &doc.states {
            if ids.contains_key(name.as_str()) {
                return Err(Error::Schema(format!("duplicate state `{name}`")));
            }
            ids.insert(name, b.add_state(name.clone(), false));
        }
        let lookup = |name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::DanglingState(name.to_string()))
        };
        for name in &doc.initial {
            let s = lookup(name)?;
            b.set_initial(s);
        }
        for name in &doc.accepting {
            let s = lookup(name)?;
            b.accepting[s] = true;
        }
        for tr in &doc.transitions {
            let (from, to) = (lookup(&tr.from)?, lookup(&tr.to)?);
            let mut guard = Guard::never();
            for set in &tr.labels {
                let label = b
                    .atoms
                    .label(set)
                    .map_err(|e| Error::Schema(format!("transition {} -> {}: {e}", tr.from, tr.to)))?;
                guard.add(Cube::letter(label, full));
            }
            b.add_transition(from, to, guard);
        }
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("nba serializes")
    }

    pub fn from_json(text: &str) -> Result<Nba> {
        let doc: NbaDoc =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        Nba::from_doc(&doc)
    }
}

fn distinct(v: &[usize]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

fn distinct_max(v: &[usize]) -> usize {
    v.iter().max().map_or(0, |m| m + 1)
}

/// NBA interchange document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NbaDoc {
    pub atoms: Vec<String>,
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub accepting: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub to: String,
    pub labels: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn safety() -> Nba {
        let atoms = AtomSet::new(["a", "b", "Obs"]).unwrap();
        let mut b = Nba::new(atoms);
        let s = b.add_state("s0", true);
        b.set_initial(s);
        b.add_transition(s, s, Guard::from_cube(Cube { pos: 0, neg: 0b100 }));
        b
    }

    #[test]
    fn guard_distance_is_min_over_letters() {
        let full = 0b111;
        let g = Guard::from_cube(Cube {
            pos: 0b001,
            neg: 0b010,
        });
        for l in 0..8u32 {
            let brute = g
                .letters(full)
                .iter()
                .map(|x| x.distance(Label(l)))
                .min()
                .unwrap();
            assert_eq!(g.distance(Label(l)), Some(brute));
        }
        assert_eq!(Guard::never().distance(Label(0)), None);
    }

    #[test]
    fn guard_subsumption() {
        let mut g = Guard::from_cube(Cube { pos: 1, neg: 2 });
        g.add(Cube { pos: 1, neg: 0 });
        assert_eq!(g.cubes(), &[Cube { pos: 1, neg: 0 }]);
        g.add(Cube { pos: 1, neg: 1 });
        assert_eq!(g.cubes().len(), 1);
    }

    #[test]
    fn safety_monitor_rejects_obstacle_in_cycle() {
        let b = safety();
        let obs = Label(0b100);
        assert!(b.accepts_lasso(&LassoWord::new(vec![], vec![Label(1)])));
        assert!(!b.accepts_lasso(&LassoWord::new(vec![], vec![Label(1), obs])));
        assert!(!b.accepts_lasso(&LassoWord::new(vec![obs], vec![Label(0)])));
    }

    #[test]
    fn universal_accepts_everything() {
        let atoms = AtomSet::new(["a"]).unwrap();
        let b = Nba::universal(atoms);
        assert!(b.accepts_lasso(&LassoWord::new(vec![Label(1)], vec![Label(0), Label(1)])));
    }

    #[test]
    fn document_roundtrip() {
        let b = safety();
        let doc = b.to_doc();
        assert_eq!(doc.transitions[0].labels.len(), 4);
        let again = Nba::from_doc(&doc).unwrap();
        assert_eq!(again.num_states(), 1);
        assert_eq!(again.to_doc(), doc);
    }

    #[test]
    fn empty_accepting_set_is_empty_language() {
        let doc = NbaDoc {
            atoms: vec!["a".into()],
            states: vec!["q".into()],
            initial: vec!["q".into()],
            accepting: vec![],
            transitions: vec![TransitionDoc {
                from: "q".into(),
                to: "q".into(),
                labels: vec![vec![], vec!["a".into()]],
            }],
        };
        let b = Nba::from_doc(&doc).unwrap();
        assert!(!b.accepts_lasso(&LassoWord::new(vec![], vec![Label(1)])));
        assert_eq!(b.trimmed().num_states(), 0);
    }

    #[test]
    fn dangling_and_schema_errors() {
        let mut doc = safety().to_doc();
        doc.transitions[0].to = "nowhere".into();
        assert!(matches!(Nba::from_doc(&doc), Err(Error::DanglingState(s)) if s == "nowhere"));
        assert!(matches!(Nba::from_json("{\"atoms\": []}"), Err(Error::Schema(_))));
        let mut doc = safety().to_doc();
        doc.transitions[0].labels = vec![vec!["zzz".into()]];
        assert!(matches!(Nba::from_doc(&doc), Err(Error::Schema(_))));
    }
}
