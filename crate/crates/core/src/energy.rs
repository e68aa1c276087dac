//! Shortest distances, the self-reachable accepting set and the energy function.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write;

use crate::product::{Edge, RelaxedProduct, INF};

/// Accepting product states from which the set can be re-entered by a nontrivial path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FStarSet {
    members: Vec<bool>,
}

impl FStarSet {
    pub fn contains(&self, id: usize) -> bool {
        self.members[id]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }
}

/// Energy `J` per product state, with the successor that realizes it.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTable {
    pub j: Vec<f64>,
    /// Next state on a shortest path to `F*`, `usize::MAX` on `F*` or when unreachable.
    pub next: Vec<usize>,
    /// Hard-live states: those with an infinite path of `h = 0` edges.
    pub live: Vec<bool>,
}

impl EnergyTable {
    pub fn get(&self, id: usize) -> f64 {
        self.j[id]
    }

    /// An edge usable by a hard-safe plan: `h = 0` into a hard-live state.
    pub fn admissible(&self, e: &Edge) -> bool {
        e.h == 0.0 && self.live[e.to]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pruning fixpoint over the unweighted product graph.
pub fn compute_f_star(p: &RelaxedProduct) -> FStarSet {
    let n = p.num_states();
    let mut members: Vec<bool> = (0..n).map(|i| p.is_accepting(i)).collect();
    loop {
        // States with a path of length >= 1 into the current members.
        let mut reach = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| members[i]).collect();
        while let Some(t) = queue.pop_front() {
            p.for_each_pred(t, |src, _| {
                if !reach[src] {
                    reach[src] = true;
                    queue.push_back(src);
                }
            });
        }
        let mut changed = false;
        for i in 0..n {
            if members[i] && !reach[i] {
                members[i] = false;
                changed = true;
            }
        }
        if !changed {
            return FStarSet { members };
        }
    }
}

/// Greatest set of states with an `h = 0` edge into the set.
pub fn hard_live(p: &RelaxedProduct) -> Vec<bool> {
    let n = p.num_states();
    let mut count = vec![0usize; n];
    for (s, c) in count.iter_mut().enumerate() {
        p.for_each_succ(s, |e| *c += e.is_hard_safe() as usize);
    }
    let mut live = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| count[s] == 0).collect();
    for &s in &queue {
        live[s] = false;
    }
    while let Some(t) = queue.pop_front() {
        p.for_each_pred(t, |src, e| {
            if live[src] && e.is_hard_safe() {
                count[src] -= 1;
                if count[src] == 0 {
                    live[src] = false;
                    queue.push_back(src);
                }
            }
        });
    }
    live
}

/// Energy by one multi-source backward Dijkstra from `F*` over admissible edges.
pub fn compute_energy(p: &RelaxedProduct, f: &FStarSet) -> EnergyTable {
    let n = p.num_states();
    let live = hard_live(p);
    let mut j = vec![INF; n];
    let mut next = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for s in f.members() {
        j[s] = 0.0;
        heap.push(Entry(0.0, s));
    }
    while let Some(Entry(d, t)) = heap.pop() {
        if done[t] {
            continue;
        }
        done[t] = true;
        if !live[t] {
            continue;
        }
        p.for_each_pred(t, |src, e| {
            if e.h != 0.0 || done[src] {
                return;
            }
            let nd = d + e.weight;
            if nd < j[src] {
                j[src] = nd;
                next[src] = t;
                heap.push(Entry(nd, src));
            }
        });
    }
    EnergyTable { j, next, live }
}

/// Cheapest admissible trajectory weight from `src` to `dst`; 0 when they coincide.
pub fn shortest_distance(p: &RelaxedProduct, src: usize, dst: usize) -> f64 {
    let live = hard_live(p);
    let (dist, _) = forward_dijkstra(p, &live, &[src]);
    dist[dst]
}

fn forward_dijkstra(p: &RelaxedProduct, live: &[bool], sources: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let n = p.num_states();
    let mut dist = vec![INF; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Entry(0.0, s));
    }
    let mut done = vec![false; n];
    while let Some(Entry(d, s)) = heap.pop() {
        if done[s] {
            continue;
        }
        done[s] = true;
        p.for_each_succ(s, |e| {
            if e.h != 0.0 || !live[e.to] {
                return;
            }
            let nd = d + e.weight;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                parent[e.to] = s;
                heap.push(Entry(nd, e.to));
            }
        });
    }
    (dist, parent)
}

/// Result of checking the strict-decrease property of the energy.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DecreaseReport {
    pub checked: usize,
    /// States with `0 < J < inf` and no `h = 0` successor of lower energy.
    pub violators: Vec<usize>,
    /// States where `J = 0` disagrees with `F*` membership.
    pub zero_mismatch: Vec<usize>,
}

impl DecreaseReport {
    pub fn ok(&self) -> bool {
        self.violators.is_empty() && self.zero_mismatch.is_empty()
    }
}

pub fn verify_decrease(p: &RelaxedProduct, f: &FStarSet, table: &EnergyTable) -> DecreaseReport {
    let mut rep = DecreaseReport::default();
    for s in 0..p.num_states() {
        let js = table.j[s];
        if (js == 0.0) != f.contains(s) {
            rep.zero_mismatch.push(s);
        }
        if js > 0.0 && js < INF {
            rep.checked += 1;
            let mut found = false;
            p.for_each_succ(s, |e| found |= e.h == 0.0 && table.j[e.to] < js);
            if !found {
                rep.violators.push(s);
            }
        }
    }
    rep
}

/// An accepting lasso in the product: `prefix · cycle^ω`, with `cycle[0]` accepting.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductLasso {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    pub prefix_weight: f64,
    pub cycle_weight: f64,
    /// Total soft violation over one traversal of the cycle.
    pub cycle_violation: u64,
}

/// Accepting lasso of least cycle weight, then least prefix weight, over admissible edges.
pub fn min_violation_lasso(p: &RelaxedProduct, f: &FStarSet) -> Option<ProductLasso> {
    let live = hard_live(p);
    let (dist0, parent0) = forward_dijkstra(p, &live, &p.initial());
    let mut best: Option<(f64, f64, usize, Vec<usize>)> = None;
    for a in f.members() {
        if dist0[a] == INF {
            continue;
        }
        // Cheapest nontrivial cycle through a: distances from its successors back to a.
        let mut starts = Vec::new();
        let mut first_w = Vec::new();
        p.for_each_succ(a, |e| {
            if e.h == 0.0 && live[e.to] {
                starts.push(e.to);
                first_w.push(e.weight);
            }
        });
        let mut cycle_best: Option<(f64, Vec<usize>)> = None;
        for (k, &b) in starts.iter().enumerate() {
            let (d, par) = forward_dijkstra(p, &live, &[b]);
            let c = first_w[k] + d[a];
            if c < INF && cycle_best.as_ref().is_none_or(|x| c < x.0) {
                let mut path = walk_back(&par, b, a);
                path.pop();
                let mut cyc = vec![a];
                cyc.extend(path);
                cycle_best = Some((c, cyc));
            }
        }
        if let Some((c, cyc)) = cycle_best {
            let better = match &best {
                None => true,
                Some((bc, bp, _, _)) => c < *bc || (c == *bc && dist0[a] < *bp),
            };
            if better {
                best = Some((c, dist0[a], a, cyc));
            }
        }
    }
    let (cycle_weight, prefix_weight, a, cycle) = best?;
    let init = p.initial();
    let src = *init
        .iter()
        .find(|&&s| walk_back(&parent0, s, a).first() == Some(&s))
        .expect("lasso prefix starts at an initial state");
    let mut prefix = walk_back(&parent0, src, a);
    prefix.pop();
    let mut cycle_violation = 0u64;
    for i in 0..cycle.len() {
        let e = p
            .edge(cycle[i], cycle[(i + 1) % cycle.len()])
            .expect("cycle edge");
        cycle_violation += e.v as u64;
    }
    Some(ProductLasso {
        prefix,
        cycle,
        prefix_weight,
        cycle_weight,
        cycle_violation,
    })
}

// Path src..=dst following parent pointers; just [dst] when src is not an ancestor.
fn walk_back(parent: &[usize], src: usize, dst: usize) -> Vec<usize> {
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src && parent[cur] != usize::MAX {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// `id,q,s_h,s_s,J` rows; infinity is written as `inf`.
pub fn energy_csv(p: &RelaxedProduct, table: &EnergyTable) -> String {
    let mut out = String::from("id,q,s_h,s_s,J\n");
    for id in 0..p.num_states() {
        let s = p.state(id);
        let j = table.j[id];
        let _ = writeln!(
            out,
            "{id},{},{},{},{}",
            s.q,
            p.hard().name(s.sh),
            p.soft().name(s.ss),
            if j.is_finite() { j.to_string() } else { "inf".into() }
        );
    }
    out
}
