//! Receding-horizon planning over the relaxed product.
//!
//! Candidates are length-`N` walks whose edges all have `h = 0` and end in hard-live
//! states. Rewards and edge weights are compared in integer micro-units so that the
//! ranking does not depend on summation order.
//!
//! Ranking: utility descending, then total predicted violation ascending, then
//! terminal energy ascending, then accumulated product weight ascending, then the
//! state-id sequence (origin first) lexicographically.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use crate::energy::EnergyTable;
use crate::error::{Error, Result};
use crate::product::{Edge, RelaxedProduct, INF};

const MICRO: f64 = 1e6;

/// Observed rewards in micro-units per DTS state; unobserved states count as 0.
pub fn quantize_rewards(observed: &BTreeMap<usize, f64>, num_dts_states: usize) -> Vec<i64> {
    let mut out = vec![0i64; num_dts_states];
    for (&q, &r) in observed {
        out[q] = (r * MICRO).round() as i64;
    }
    out
}

fn weight_micro(e: &Edge) -> u64 {
    (e.weight * MICRO).round() as u64
}

/// `exp(-kappa * V)` with subnormal results flushed to zero.
pub fn violation_multiplier(kappa: f64, big_v: f64) -> f64 {
    let m = (-kappa * big_v).exp().min(1.0);
    if m < f64::MIN_POSITIVE {
        0.0
    } else {
        m
    }
}

/// Which moves of a prediction feed the violation penalty.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ViolationScope {
    /// Only the move that is applied.
    FirstStep,
    /// Every move of the prediction.
    #[default]
    Horizon,
}

impl ViolationScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationScope::FirstStep => "first-step",
            ViolationScope::Horizon => "horizon",
        }
    }
}

impl std::str::FromStr for ViolationScope {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "first-step" => Ok(ViolationScope::FirstStep),
            "horizon" => Ok(ViolationScope::Horizon),
            _ => Err(format!("unknown violation scope `{s}` (expected first-step or horizon)")),
        }
    }
}

/// Parameters of the utility.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scoring {
    pub kappa: f64,
    pub scope: ViolationScope,
}

impl Scoring {
    pub fn first_step(kappa: f64) -> Self {
        Scoring {
            kappa,
            scope: ViolationScope::FirstStep,
        }
    }

    pub fn horizon(kappa: f64) -> Self {
        Scoring {
            kappa,
            scope: ViolationScope::Horizon,
        }
    }

    fn multiplier(&self, beta: f64, v: u64) -> f64 {
        violation_multiplier(self.kappa, beta * v as f64)
    }
}

fn utility_of(h: f64, mult: f64, reward_micro: i64) -> f64 {
    if h != 0.0 {
        return f64::NEG_INFINITY;
    }
    mult * (reward_micro as f64 / MICRO)
}

/// Utility of moving from `current` along `traj`; `-inf` if the first move is hard-violating.
pub fn utility(
    p: &RelaxedProduct,
    current: usize,
    traj: &[usize],
    rewards: &[i64],
    score: Scoring,
) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::NotATransition(current, current));
    }
    let mut prev = current;
    let mut first_h = 0.0;
    let mut v = 0u64;
    for (i, &s) in traj.iter().enumerate() {
        let e = p.edge(prev, s).ok_or(Error::NotATransition(prev, s))?;
        if i == 0 {
            first_h = e.h;
        }
        if i == 0 || score.scope == ViolationScope::Horizon {
            v += e.v as u64;
        }
        prev = s;
    }
    let r: i64 = traj.iter().map(|&s| rewards[p.state(s).q]).sum();
    Ok(utility_of(first_h, score.multiplier(p.beta(), v), r))
}

/// All length-`n` walks from `src`, depth first in ascending successor order.
pub fn enumerate_paths(p: &RelaxedProduct, src: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(p: &RelaxedProduct, s: usize, n: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() == n {
            out.push(path.clone());
            return;
        }
        for e in p.successors(s) {
            path.push(e.to);
            go(p, e.to, n, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(p, src, n, &mut Vec::new(), &mut out);
    out
}

/// Constraint on a predicted trajectory `s_1..s_N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    None,
    /// `J(s_N) < bound`.
    Terminal(f64),
    /// `J(s_m) = 0`, 1-based.
    ZeroAt(usize),
}

impl Constraint {
    fn admits_at(&self, depth: usize, n: usize, j: f64) -> bool {
        match *self {
            Constraint::None => true,
            Constraint::Terminal(bound) => depth < n || j < bound,
            Constraint::ZeroAt(m) => depth != m || j == 0.0,
        }
    }
}

/// Which branch of the constrained problem governs a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    Initial,
    /// The terminal energy must drop below the previous terminal energy.
    Decrease,
    /// The previous prediction reached zero energy; keep reaching it one step earlier.
    TouchZero,
    /// The current state has zero energy; any finite terminal energy will do.
    Accepting,
    /// New knowledge broke the previous prediction; progress is measured from the current state.
    Reanchored,
    /// The current state cannot reach `F*` under current knowledge.
    Unreachable,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::Initial => "initial",
            Case::Decrease => "decrease",
            Case::TouchZero => "touch-zero",
            Case::Accepting => "accepting",
            Case::Reanchored => "reanchored",
            Case::Unreachable => "unreachable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictedTrajectory {
    /// State the trajectory departs from.
    pub origin: usize,
    /// `s_1..s_N`.
    pub states: Vec<usize>,
    pub utility: f64,
    pub terminal_energy: f64,
    /// 1-based index of the first zero-energy state.
    pub i0: Option<usize>,
    pub reward_micro: i64,
    pub weight_micro: u64,
    /// Soft violation summed over the whole prediction.
    pub violation: u64,
    pub first_v: u32,
    pub first_h: f64,
}

impl PredictedTrajectory {
    fn cmp_rank(&self, other: &Self) -> Ordering {
        other
            .utility
            .total_cmp(&self.utility)
            .then(self.violation.cmp(&other.violation))
            .then(self.terminal_energy.total_cmp(&other.terminal_energy))
            .then(self.weight_micro.cmp(&other.weight_micro))
            .then(self.origin.cmp(&other.origin))
            .then(self.states.cmp(&other.states))
    }

    /// Strictly better under the planner's total order.
    pub fn better_than(&self, other: &Self) -> bool {
        self.cmp_rank(other) == Ordering::Less
    }
}

/// Evaluates `states` from `origin`; `None` unless every move is admissible.
pub fn evaluate(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    origin: usize,
    states: &[usize],
    rewards: &[i64],
    score: Scoring,
) -> Option<PredictedTrajectory> {
    let mut prev = origin;
    let mut w = 0u64;
    let mut r = 0i64;
    let mut v = 0u64;
    let mut first: Option<Edge> = None;
    for &s in states {
        let e = p.edge(prev, s)?;
        if !energy.admissible(&e) {
            return None;
        }
        first.get_or_insert(e);
        w += weight_micro(&e);
        v += e.v as u64;
        r += rewards[p.state(s).q];
        prev = s;
    }
    let first = first?;
    Some(PredictedTrajectory {
        origin,
        states: states.to_vec(),
        utility: utility_of(
            first.h,
            score.multiplier(
                p.beta(),
                match score.scope {
                    ViolationScope::FirstStep => first.v as u64,
                    ViolationScope::Horizon => v,
                },
            ),
            r,
        ),
        terminal_energy: energy.j[prev],
        i0: states.iter().position(|&s| energy.j[s] == 0.0).map(|i| i + 1),
        reward_micro: r,
        weight_micro: w,
        violation: v,
        first_v: first.v,
        first_h: first.h,
    })
}

/// True iff `states` is admissible from `origin` and satisfies `c`.
pub fn is_candidate(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    origin: usize,
    states: &[usize],
    n: usize,
    c: Constraint,
) -> bool {
    if states.len() != n {
        return false;
    }
    let mut prev = origin;
    for (i, &s) in states.iter().enumerate() {
        match p.edge(prev, s) {
            Some(e) if energy.admissible(&e) => {}
            _ => return false,
        }
        if !c.admits_at(i + 1, n, energy.j[s]) {
            return false;
        }
        prev = s;
    }
    true
}

#[derive(Clone)]
struct Partial {
    r: i64,
    v: u64,
    w: u64,
    seq: Vec<usize>,
}

/// `a` ranks before `b` where both end in the same state with the same suffix to come.
fn prefix_better(r: i64, v: u64, w: u64, seq: &[usize], old: &Partial, use_r: bool) -> bool {
    if use_r && r != old.r {
        return r > old.r;
    }
    (v, w, seq) < (old.v, old.w, &old.seq[..old.seq.len() - 1])
}

/// Best constrained trajectory from any of `origins`, by forward dynamic programming.
///
/// Prefixes are bucketed by end state and by the violation that fixes the utility
/// multiplier: the first move's under [`ViolationScope::FirstStep`], the running
/// total under [`ViolationScope::Horizon`]. In the latter the final multiplier is
/// not known yet, so each bucket keeps a reward champion and a weight champion.
/// Every other prefix in a bucket is dominated by one of them for any common
/// suffix, so the search is exact.
pub fn best_trajectory(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    origins: &[usize],
    rewards: &[i64],
    n: usize,
    score: Scoring,
    c: Constraint,
) -> Option<PredictedTrajectory> {
    assert!(n >= 1, "horizon must be positive");
    let live = |v: u64| score.multiplier(p.beta(), v) > 0.0;
    // (state, class, ranks by reward)
    type Key = (usize, u64, bool);
    let mut layer: HashMap<Key, Partial> = HashMap::new();
    let offer = |layer: &mut HashMap<Key, Partial>, to: usize, class: u64, r: i64, v: u64, w: u64, prefix: &[usize]| {
        let slots: &[bool] = match score.scope {
            ViolationScope::FirstStep => {
                if live(class) {
                    &[true]
                } else {
                    &[false]
                }
            }
            ViolationScope::Horizon => {
                if live(class) {
                    &[true, false]
                } else {
                    &[false]
                }
            }
        };
        for &use_r in slots {
            let key = (to, class, use_r);
            if let Some(old) = layer.get(&key) {
                if !prefix_better(r, v, w, prefix, old, use_r) {
                    continue;
                }
            }
            let mut seq = Vec::with_capacity(prefix.len() + 1);
            seq.extend_from_slice(prefix);
            seq.push(to);
            layer.insert(key, Partial { r, v, w, seq });
        }
    };
    for &o in origins {
        p.for_each_succ(o, |e| {
            if energy.admissible(&e) && c.admits_at(1, n, energy.j[e.to]) {
                let v = e.v as u64;
                let r = rewards[p.state(e.to).q];
                offer(&mut layer, e.to, v, r, v, weight_micro(&e), &[o]);
            }
        });
    }
    for depth in 2..=n {
        let mut next: HashMap<Key, Partial> = HashMap::with_capacity(layer.len() * 4);
        for (&(s, class, _), part) in &layer {
            p.for_each_succ(s, |e| {
                if !energy.admissible(&e) || !c.admits_at(depth, n, energy.j[e.to]) {
                    return;
                }
                let v = part.v + e.v as u64;
                let class = match score.scope {
                    ViolationScope::FirstStep => class,
                    ViolationScope::Horizon => v,
                };
                let r = part.r + rewards[p.state(e.to).q];
                let w = part.w + weight_micro(&e);
                offer(&mut next, e.to, class, r, v, w, &part.seq);
            });
        }
        layer = next;
    }
    let mut best: Option<PredictedTrajectory> = None;
    for (_, part) in layer {
        let origin = part.seq[0];
        let states = part.seq[1..].to_vec();
        let first = p.edge(origin, states[0]).expect("seed edge");
        let last = *states.last().unwrap();
        let scored_v = match score.scope {
            ViolationScope::FirstStep => first.v as u64,
            ViolationScope::Horizon => part.v,
        };
        let cand = PredictedTrajectory {
            origin,
            utility: utility_of(first.h, score.multiplier(p.beta(), scored_v), part.r),
            terminal_energy: energy.j[last],
            i0: states.iter().position(|&s| energy.j[s] == 0.0).map(|i| i + 1),
            reward_micro: part.r,
            weight_micro: part.w,
            violation: part.v,
            first_v: first.v,
            first_h: first.h,
            states,
        };
        if best.as_ref().is_none_or(|b| cand.better_than(b)) {
            best = Some(cand);
        }
    }
    best
}

/// Exhaustive enumeration under the same filter, constraint and ranking.
pub fn exhaustive_best(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    origins: &[usize],
    rewards: &[i64],
    n: usize,
    score: Scoring,
    c: Constraint,
) -> Option<PredictedTrajectory> {
    let mut best: Option<PredictedTrajectory> = None;
    for &o in origins {
        for walk in enumerate_paths(p, o, n) {
            if !is_candidate(p, energy, o, &walk, n, c) {
                continue;
            }
            let cand = evaluate(p, energy, o, &walk, rewards, score).expect("admissible walk");
            if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                best = Some(cand);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig {
    pub horizon: usize,
    pub kappa: f64,
    pub scope: ViolationScope,
}

impl PlannerConfig {
    pub fn new(horizon: usize, kappa: f64) -> Self {
        PlannerConfig {
            horizon,
            kappa,
            scope: ViolationScope::default(),
        }
    }

    pub fn scoring(&self) -> Scoring {
        Scoring {
            kappa: self.kappa,
            scope: self.scope,
        }
    }
}

/// Solves the unconstrained initial problem over initial states of finite energy.
pub fn plan_initial(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    rewards: &[i64],
    cfg: PlannerConfig,
) -> Result<PredictedTrajectory> {
    let origins: Vec<usize> = p
        .initial()
        .into_iter()
        .filter(|&s| energy.j[s] < INF && energy.live[s])
        .collect();
    if origins.is_empty() {
        return Err(Error::NoFeasibleStart);
    }
    best_trajectory(p, energy, &origins, rewards, cfg.horizon, cfg.scoring(), Constraint::None)
        .ok_or(Error::NoFeasibleStart)
}

/// Picks the governing case from the current state and the previous prediction.
pub fn select_case(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    current: usize,
    previous: &PredictedTrajectory,
) -> (Case, Constraint) {
    let j = &energy.j;
    if j[current] == INF {
        return (Case::Unreachable, Constraint::None);
    }
    if j[current] == 0.0 {
        return (Case::Accepting, Constraint::Terminal(INF));
    }
    if !tail_usable(p, energy, current, previous) {
        return (Case::Reanchored, reanchor(p, energy, current, previous.states.len()));
    }
    if let Some(i0) = previous.states.iter().position(|&s| j[s] == 0.0) {
        // 0-based position i0 is the 1-based index i0 + 1; it shifts one step closer.
        return (Case::TouchZero, Constraint::ZeroAt(i0));
    }
    let theta = j[*previous.states.last().unwrap()];
    if theta == INF {
        return (Case::Reanchored, reanchor(p, energy, current, previous.states.len()));
    }
    (Case::Decrease, Constraint::Terminal(theta))
}

/// Progress requirement met by the energy descent from `current`: reach zero where
/// the descent does, or else end below the current energy.
fn reanchor(p: &RelaxedProduct, energy: &EnergyTable, current: usize, n: usize) -> Constraint {
    match descent(p, energy, current, n) {
        Some(d) => match d.iter().position(|&s| energy.j[s] == 0.0) {
            Some(i) => Constraint::ZeroAt(i + 1),
            None => Constraint::Terminal(energy.j[current]),
        },
        None => Constraint::Terminal(INF),
    }
}

fn tail_usable(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    current: usize,
    previous: &PredictedTrajectory,
) -> bool {
    if previous.states.first() != Some(&current) {
        return false;
    }
    let mut prev = current;
    for &s in &previous.states[1..] {
        match p.edge(prev, s) {
            Some(e) if energy.admissible(&e) => prev = s,
            _ => return false,
        }
    }
    true
}

fn lowest_admissible_successor(p: &RelaxedProduct, energy: &EnergyTable, s: usize) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    p.for_each_succ(s, |e| {
        if energy.admissible(&e) {
            let key = (energy.j[e.to], e.to);
            if best.is_none_or(|b| key.0 < b.0 || (key.0 == b.0 && key.1 < b.1)) {
                best = Some(key);
            }
        }
    });
    best.map(|b| b.1)
}

fn descent(p: &RelaxedProduct, energy: &EnergyTable, from: usize, steps: usize) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(steps);
    let mut cur = from;
    for _ in 0..steps {
        let nxt = if energy.j[cur] > 0.0 && energy.next[cur] != usize::MAX {
            energy.next[cur]
        } else {
            lowest_admissible_successor(p, energy, cur)?
        };
        out.push(nxt);
        cur = nxt;
    }
    Some(out)
}

/// The constructive witness: the previous prediction shifted by one and extended,
/// or a descent along the energy from the current state.
pub fn fallback_path(
    p: &RelaxedProduct,
    energy: &EnergyTable,
    current: usize,
    previous: &PredictedTrajectory,
    case: Case,
) -> Option<Vec<usize>> {
    let n = previous.states.len();
    match case {
        Case::Decrease | Case::TouchZero => {
            let mut path = previous.states[1..].to_vec();
            let last = *previous.states.last().unwrap();
            let ext = if case == Case::Decrease && energy.next[last] != usize::MAX {
                energy.next[last]
            } else {
                lowest_admissible_successor(p, energy, last)?
            };
            path.push(ext);
            Some(path)
        }
        Case::Initial | Case::Accepting | Case::Reanchored | Case::Unreachable => {
            descent(p, energy, current, n)
        }
    }
}

/// Outcome of one constrained step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub trajectory: PredictedTrajectory,
    pub case: Case,
    pub constraint: Constraint,
    /// The constraint actually used; differs from `constraint` only if it had no solution.
    pub solved_under: Constraint,
    pub fallback: Option<Vec<usize>>,
    pub fallback_is_candidate: bool,
}

impl StepPlan {
    pub fn next(&self) -> usize {
        self.trajectory.states[0]
    }

    pub fn widened(&self) -> bool {
        self.constraint != self.solved_under
    }
}

/// Planner memory between steps.
#[derive(Clone, Debug)]
pub struct PlannerState {
    pub current: usize,
    pub previous: PredictedTrajectory,
    pub cfg: PlannerConfig,
    pub k: usize,
}

impl PlannerState {
    /// State after applying the first move of an initial plan.
    pub fn after_initial(plan: PredictedTrajectory, cfg: PlannerConfig) -> Self {
        PlannerState {
            current: plan.states[0],
            previous: plan,
            cfg,
            k: 1,
        }
    }

    pub fn apply(&mut self, plan: &StepPlan) {
        self.current = plan.next();
        self.previous = plan.trajectory.clone();
        self.k += 1;
    }
}

/// Solves the constrained problem for the next step.
pub fn plan_step(
    state: &PlannerState,
    p: &RelaxedProduct,
    energy: &EnergyTable,
    rewards: &[i64],
) -> Result<StepPlan> {
    let n = state.cfg.horizon;
    let (case, constraint) = select_case(p, energy, state.current, &state.previous);
    let fallback = fallback_path(p, energy, state.current, &state.previous, case);
    let fallback_is_candidate = fallback
        .as_ref()
        .is_some_and(|f| is_candidate(p, energy, state.current, f, n, constraint));
    let origins = [state.current];
    let mut ladder = vec![constraint];
    if constraint != Constraint::Terminal(INF) && constraint != Constraint::None {
        ladder.push(Constraint::Terminal(INF));
    }
    if constraint != Constraint::None {
        ladder.push(Constraint::None);
    }
    for c in ladder {
        if let Some(t) = best_trajectory(p, energy, &origins, rewards, n, state.cfg.scoring(), c) {
            return Ok(StepPlan {
                trajectory: t,
                case,
                constraint,
                solved_under: c,
                fallback,
                fallback_is_candidate,
            });
        }
    }
    Err(Error::EmptyCandidates(state.k + 1))
}
