//! Strict and relaxed products of a DTS with a hard and a soft NBA.
//!
//! The product is implicit: a state is `(q, s_h, s_s)` packed into one id, and edges
//! are enumerated on demand. Edge annotations depend only on the source label
//! `L(q)` and the automaton moves, so they are cached per DTS state and refreshed
//! when a label changes.

use serde_json::{json, Value};

use crate::dts::Dts;
use crate::error::{Error, Result};
use crate::ltl::{AtomSet, Guard, Label, Nba};

pub const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub q: usize,
    pub sh: usize,
    pub ss: usize,
}

/// One product edge with its annotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    /// 0 or infinity.
    pub h: f64,
    pub v: u32,
    /// DTS weight of the projected move.
    pub omega: f64,
    /// `h + omega + beta * v`.
    pub weight: f64,
}

impl Edge {
    pub fn is_hard_safe(&self) -> bool {
        self.h == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    /// Soft moves are always enabled at a cost, hard moves carry `h`.
    Relaxed,
    /// Both moves must be enabled by the current label.
    Strict,
}

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Moves {
    from: Vec<usize>,
    to: Vec<usize>,
    guard: Vec<Guard>,
    out: Vec<Vec<usize>>,
    into: Vec<Vec<usize>>,
}

impl Moves {
    fn of(b: &Nba) -> Moves {
        let n = b.num_states();
        let mut m = Moves {
            from: Vec::new(),
            to: Vec::new(),
            guard: Vec::new(),
            out: vec![Vec::new(); n],
            into: vec![Vec::new(); n],
        };
        for s in 0..n {
            for (t, g) in b.out(s) {
                let e = m.from.len();
                m.from.push(s);
                m.to.push(*t);
                m.guard.push(g.clone());
                m.out[s].push(e);
                m.into[*t].push(e);
            }
        }
        m
    }

    fn len(&self) -> usize {
        self.from.len()
    }
}

/// `T x B_h x B_s` with cached annotations.
#[derive(Clone, Debug)]
pub struct RelaxedProduct {
    dts: Dts,
    hard: Nba,
    soft: Nba,
    beta: f64,
    kind: ProductKind,
    hm: Moves,
    sm: Moves,
    // Per DTS state and hard move: 0 enabled, 1 not enabled (h = inf), ABSENT.
    h_tab: Vec<u32>,
    // Per DTS state and soft move: violation cost, or ABSENT.
    v_tab: Vec<u32>,
}

impl RelaxedProduct {
    pub fn relaxed(dts: Dts, hard: Nba, soft: Nba, beta: f64) -> Result<Self> {
        Self::build(dts, hard, soft, beta, ProductKind::Relaxed)
    }

    pub fn strict(dts: Dts, hard: Nba, soft: Nba) -> Result<Self> {
        Self::build(dts, hard, soft, 0.0, ProductKind::Strict)
    }

    fn build(dts: Dts, hard: Nba, soft: Nba, beta: f64, kind: ProductKind) -> Result<Self> {
        if hard.atoms() != dts.atoms() || soft.atoms() != dts.atoms() {
            return Err(Error::AtomMismatch);
        }
        if hard.initial().is_empty() || soft.initial().is_empty() {
            return Err(Error::EmptyInitial);
        }
        let hm = Moves::of(&hard);
        let sm = Moves::of(&soft);
        let n = dts.num_states();
        let mut p = RelaxedProduct {
            h_tab: vec![0; n * hm.len()],
            v_tab: vec![0; n * sm.len()],
            dts,
            hard,
            soft,
            beta,
            kind,
            hm,
            sm,
        };
        for q in 0..n {
            p.refresh(q);
        }
        Ok(p)
    }

    // Recomputes the cached annotations of DTS state q; returns how many changed.
    fn refresh(&mut self, q: usize) -> usize {
        let l = self.dts.label(q);
        let mut changed = 0;
        let (eh, es) = (self.hm.len(), self.sm.len());
        for e in 0..eh {
            let ok = self.hm.guard[e].satisfied(l);
            let val = match (ok, self.kind) {
                (true, _) => 0,
                (false, ProductKind::Relaxed) => 1,
                (false, ProductKind::Strict) => ABSENT,
            };
            let slot = &mut self.h_tab[q * eh + e];
            changed += (*slot != val) as usize;
            *slot = val;
        }
        for f in 0..es {
            let d = self.sm.guard[f].distance(l).expect("stored guards are satisfiable");
            let val = match self.kind {
                ProductKind::Relaxed => d,
                ProductKind::Strict if d == 0 => 0,
                ProductKind::Strict => ABSENT,
            };
            let slot = &mut self.v_tab[q * es + f];
            changed += (*slot != val) as usize;
            *slot = val;
        }
        changed
    }

    /// Replaces the known label of `q` and refreshes the annotations of every edge
    /// leaving a product state over `q`. Returns the number of changed move annotations.
    pub fn relabel(&mut self, q: usize, l: Label) -> usize {
        if self.dts.label(q) == l {
            return 0;
        }
        self.dts.set_label(q, l);
        self.refresh(q)
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn dts(&self) -> &Dts {
        &self.dts
    }

    pub fn hard(&self) -> &Nba {
        &self.hard
    }

    pub fn soft(&self) -> &Nba {
        &self.soft
    }

    pub fn atoms(&self) -> &AtomSet {
        self.dts.atoms()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn num_states(&self) -> usize {
        self.dts.num_states() * self.hard.num_states() * self.soft.num_states()
    }

    pub fn id(&self, s: ProductState) -> usize {
        (s.q * self.hard.num_states() + s.sh) * self.soft.num_states() + s.ss
    }

    pub fn state(&self, id: usize) -> ProductState {
        let ns = self.soft.num_states();
        let nh = self.hard.num_states();
        ProductState {
            q: id / (ns * nh),
            sh: id / ns % nh,
            ss: id % ns,
        }
    }

    pub fn initial(&self) -> Vec<usize> {
        let q = self.dts.initial();
        let mut out = Vec::new();
        for &sh in self.hard.initial() {
            for &ss in self.soft.initial() {
                out.push(self.id(ProductState { q, sh, ss }));
            }
        }
        out
    }

    pub fn is_accepting(&self, id: usize) -> bool {
        let s = self.state(id);
        self.hard.is_accepting(s.sh) && self.soft.is_accepting(s.ss)
    }

    fn edge_parts(&self, q: usize, q2: usize, omega: f64, e: usize, f: usize) -> Option<Edge> {
        let hv = self.h_tab[q * self.hm.len() + e];
        let v = self.v_tab[q * self.sm.len() + f];
        if hv == ABSENT || v == ABSENT {
            return None;
        }
        let h = if hv == 0 { 0.0 } else { INF };
        let to = self.id(ProductState {
            q: q2,
            sh: self.hm.to[e],
            ss: self.sm.to[f],
        });
        Some(Edge {
            to,
            h,
            v,
            omega,
            weight: h + omega + self.beta * v as f64,
        })
    }

    /// Calls `f` on every edge leaving `id`, in ascending target order.
    pub fn for_each_succ(&self, id: usize, mut f: impl FnMut(Edge)) {
        let s = self.state(id);
        for &(q2, omega) in self.dts.succ(s.q) {
            for &e in &self.hm.out[s.sh] {
                for &g in &self.sm.out[s.ss] {
                    if let Some(edge) = self.edge_parts(s.q, q2, omega, e, g) {
                        f(edge);
                    }
                }
            }
        }
    }

    pub fn successors(&self, id: usize) -> Vec<Edge> {
        let mut out = Vec::new();
        self.for_each_succ(id, |e| out.push(e));
        out
    }

    /// Calls `f(source, edge)` on every edge entering `id`.
    pub fn for_each_pred(&self, id: usize, mut f: impl FnMut(usize, Edge)) {
        let t = self.state(id);
        for &q in self.dts.pred(t.q) {
            let omega = self.dts.succ(q)
                [self.dts.succ(q).binary_search_by_key(&t.q, |x| x.0).unwrap()]
            .1;
            for &e in &self.hm.into[t.sh] {
                for &g in &self.sm.into[t.ss] {
                    if let Some(edge) = self.edge_parts(q, t.q, omega, e, g) {
                        let src = self.id(ProductState {
                            q,
                            sh: self.hm.from[e],
                            ss: self.sm.from[g],
                        });
                        f(src, edge);
                    }
                }
            }
        }
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<Edge> {
        let (s, t) = (self.state(from), self.state(to));
        let i = self.dts.succ(s.q).binary_search_by_key(&t.q, |x| x.0).ok()?;
        let omega = self.dts.succ(s.q)[i].1;
        let e = *self.hm.out[s.sh].iter().find(|&&e| self.hm.to[e] == t.sh)?;
        let g = *self.sm.out[s.ss].iter().find(|&&g| self.sm.to[g] == t.ss)?;
        self.edge_parts(s.q, t.q, omega, e, g)
    }

    pub fn num_edges(&self) -> usize {
        let (nh, ns) = (self.hard.num_states(), self.soft.num_states());
        let mut n = 0;
        for q in 0..self.dts.num_states() {
            for sh in 0..nh {
                for ss in 0..ns {
                    self.for_each_succ(self.id(ProductState { q, sh, ss }), |_| n += 1);
                }
            }
        }
        n
    }

    /// Upper bound on the edge count without enumerating edges.
    pub fn edge_bound(&self) -> usize {
        self.dts.num_transitions() * self.hm.len() * self.sm.len()
    }

    pub fn display_state(&self, id: usize) -> String {
        let s = self.state(id);
        format!(
            "(q{}, {}, {})",
            s.q,
            self.hard.name(s.sh),
            self.soft.name(s.ss)
        )
    }

    /// State and edge listing with annotations; `h` is `null` for infinity.
    pub fn dump(&self) -> Value {
        let mut states = Vec::new();
        let mut edges = Vec::new();
        for id in 0..self.num_states() {
            let s = self.state(id);
            states.push(json!({
                "id": id,
                "q": s.q,
                "s_h": self.hard.name(s.sh),
                "s_s": self.soft.name(s.ss),
                "accepting": self.is_accepting(id),
            }));
            self.for_each_succ(id, |e| {
                edges.push(json!({
                    "from": id,
                    "to": e.to,
                    "h": if e.h.is_finite() { json!(e.h) } else { Value::Null },
                    "v": e.v,
                    "omega": e.omega,
                    "weight": if e.weight.is_finite() { json!(e.weight) } else { Value::Null },
                }));
            });
        }
        json!({
            "kind": match self.kind { ProductKind::Relaxed => "relaxed", ProductKind::Strict => "strict" },
            "beta": self.beta,
            "initial": self.initial(),
            "states": states,
            "edges": edges,
        })
    }
}

/// Product of `d` with a single NBA, moves enabled only on the exact current label.
pub fn build_strict_product(d: Dts, b: Nba) -> Result<RelaxedProduct> {
    let hard = Nba::universal(b.atoms().clone());
    RelaxedProduct::strict(d, hard, b)
}

pub fn build_relaxed_product(d: Dts, hard: Nba, soft: Nba, beta: f64) -> Result<RelaxedProduct> {
    RelaxedProduct::relaxed(d, hard, soft, beta)
}

/// Characteristic vector of `l` under the atom ordering.
pub fn eval_labels(l: Label, atoms: &AtomSet) -> Vec<u8> {
    (0..atoms.len()).map(|i| l.contains(i) as u8).collect()
}

pub fn label_distance(l: Label, m: Label) -> u32 {
    l.distance(m)
}

/// Distance from `label` to the nearest label enabling `ss -> ss2` in `soft`.
pub fn violation_cost(ss: usize, ss2: usize, label: Label, soft: &Nba) -> Result<u32> {
    soft.guard(ss, ss2)
        .and_then(|g| g.distance(label))
        .ok_or(Error::NotATransition(ss, ss2))
}

/// Sum of edge weights along `traj`; infinite if any edge is hard-violating.
pub fn trajectory_weight(p: &RelaxedProduct, traj: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for w in traj.windows(2) {
        let e = p.edge(w[0], w[1]).ok_or(Error::NotATransition(w[0], w[1]))?;
        total += e.weight;
    }
    Ok(total)
}
