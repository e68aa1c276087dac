//! The online planning loop.

use std::time::Instant;

use serde::Serialize;

use crate::energy::{compute_energy, compute_f_star, verify_decrease, DecreaseReport};
use crate::environment::observe_rewards;
use crate::error::{Error, Result};
use crate::ltl::{translate_to_nba, AtomSet, Label, LassoWord, Nba};
use crate::planner::{
    plan_initial, plan_step, quantize_rewards, Case, PlannerConfig, PlannerState, ViolationScope,
};
use crate::product::RelaxedProduct;
use crate::sensing::{apply_update, sense};

use super::{Scenario, World};

/// Products larger than this are refused instead of exhausting memory.
pub const MAX_PRODUCT_EDGES: usize = 400_000_000;

#[derive(Clone, Copy, Debug, Default)]
pub struct MissionOptions {
    /// Recompute `F*` after every update and record whether it changed.
    pub check_f_star: bool,
    /// Check the energy decrease property on the offline product.
    pub verify_energy: bool,
    pub scope: ViolationScope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub x: usize,
    pub y: usize,
    pub state: usize,
    pub s_h: String,
    pub s_s: String,
    pub energy: f64,
    pub utility: f64,
    pub first_v: u32,
    pub first_h: f64,
    pub reward: f64,
    pub cumulative: f64,
    pub case: String,
    /// The governing constraint had a solution (no widening was needed).
    pub feasible: bool,
    pub fallback_ok: bool,
    pub relabeled: usize,
    pub changed_annotations: usize,
    pub f_star_stable: Option<bool>,
    pub entered_obstacle: bool,
    pub plan_us: u64,
    pub update_us: u64,
    /// Cells of the predicted trajectory.
    pub predicted: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MissionLog {
    pub scenario: String,
    pub seed: u64,
    pub horizon: usize,
    pub width: usize,
    pub height: usize,
    pub start_cell: usize,
    pub atoms: AtomSet,
    pub num_q: usize,
    pub num_sh: usize,
    pub num_ss: usize,
    pub num_sp: usize,
    pub build_ms: f64,
    pub offline_check: Option<DecreaseReport>,
    pub rows: Vec<StepRecord>,
    /// Executed product states `s_0 .. s_K`.
    pub run: Vec<usize>,
    /// Whether each executed state is accepting in both automata.
    pub run_accepting: Vec<bool>,
    /// True label of the cell departed from at each step.
    pub letters: Vec<Label>,
    /// Static labels of the world without obstacles, for rendering.
    pub placed: Vec<Label>,
    pub obstacles_at_end: Vec<usize>,
}

impl MissionLog {
    pub fn energy_trace(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn cumulative_reward(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cumulative).collect()
    }

    pub fn total_violation(&self) -> u64 {
        self.rows.iter().map(|r| r.first_v as u64).sum()
    }

    /// Steps whose applied move carried a soft violation.
    pub fn violation_events(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.first_v > 0).map(|r| r.k).collect()
    }

    /// Steps ending in a zero-energy state.
    pub fn accepting_visits(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.energy == 0.0).map(|r| r.k).collect()
    }

    /// Steps where the logged energy rose.
    pub fn energy_jumps(&self) -> Vec<usize> {
        self.rows
            .windows(2)
            .filter(|w| w[1].energy > w[0].energy)
            .map(|w| w[1].k)
            .collect()
    }

    /// The executed run closed into a lasso at the latest repeated product state
    /// whose loop passes through an accepting state.
    pub fn executed_lasso(&self) -> Option<LassoWord> {
        let m = self.letters.len().min(self.run.len());
        for j in (1..=m).rev() {
            for i in 0..j {
                if self.run[i] == self.run[j] && self.run_accepting[i..j].iter().any(|&a| a) {
                    return Some(LassoWord::new(
                        self.letters[..i].to_vec(),
                        self.letters[i..j].to_vec(),
                    ));
                }
            }
        }
        None
    }
}

/// Executes the scenario end to end.
pub fn run_mission(s: &Scenario, opts: MissionOptions) -> Result<MissionLog> {
    let atoms = s.atom_set();
    let hard = translate_to_nba(&s.hard_formula(), &atoms);
    let soft = translate_to_nba(&s.soft_formula(), &atoms);
    run_mission_with(s, hard, soft, opts)
}

/// Like [`run_mission`] but with the automata supplied by the caller.
pub fn run_mission_with(s: &Scenario, hard: Nba, soft: Nba, opts: MissionOptions) -> Result<MissionLog> {
    let t0 = Instant::now();
    let atoms = s.atom_set();
    let mut p = build_guarded(s, hard, soft)?;
    let f = compute_f_star(&p);
    let mut energy = compute_energy(&p, &f);
    let offline_check = opts.verify_energy.then(|| verify_decrease(&p, &f, &energy));
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;

    let cfg = PlannerConfig {
        horizon: s.params.horizon,
        kappa: s.params.kappa,
        scope: opts.scope,
    };
    let radius = s.radius();
    let mut world = World::new(s);
    let mut log = MissionLog {
        scenario: s.name.clone(),
        seed: s.params.seed,
        horizon: cfg.horizon,
        width: s.grid.width,
        height: s.grid.height,
        start_cell: s.initial_cell(),
        atoms: atoms.clone(),
        num_q: p.dts().num_states(),
        num_sh: p.hard().num_states(),
        num_ss: p.soft().num_states(),
        num_sp: p.num_states(),
        build_ms,
        offline_check,
        rows: Vec::new(),
        run: Vec::new(),
        run_accepting: Vec::new(),
        letters: Vec::new(),
        placed: s.placed_labels(),
        obstacles_at_end: Vec::new(),
    };
    let mut planner: Option<PlannerState> = None;
    let mut cumulative = 0.0;

    for k in 1..=s.params.steps {
        let truth = world.truth();
        let q = match &planner {
            None => p.dts().initial(),
            Some(st) => p.state(st.current).q,
        };
        let tu = Instant::now();
        let report = sense(&truth, &p, q, radius);
        let delta = apply_update(&mut p, &f, &report, &mut energy);
        let update_us = tu.elapsed().as_micros() as u64;
        let f_star_stable = (opts.check_f_star && !delta.is_empty()).then(|| compute_f_star(&p) == f);
        let rewards = quantize_rewards(&observe_rewards(&truth, p.dts(), q, radius), p.dts().num_states());

        let tp = Instant::now();
        let (origin, traj, case, feasible, fallback_ok) = match &mut planner {
            None => {
                let t = plan_initial(&p, &energy, &rewards, cfg)?;
                let origin = t.origin;
                planner = Some(PlannerState::after_initial(t.clone(), cfg));
                (origin, t, Case::Initial, true, true)
            }
            Some(st) => {
                let origin = st.current;
                let plan = plan_step(st, &p, &energy, &rewards)?;
                st.apply(&plan);
                let feasible = !plan.widened();
                (origin, plan.trajectory, plan.case, feasible, plan.fallback_is_candidate)
            }
        };
        let plan_us = tp.elapsed().as_micros() as u64;

        if log.run.is_empty() {
            log.run.push(origin);
            log.run_accepting.push(p.is_accepting(origin));
        }
        log.letters.push(truth.labels[p.state(origin).q]);
        let next = traj.states[0];
        let edge = p.edge(origin, next).ok_or(Error::NotATransition(origin, next))?;
        let ns = p.state(next);
        let reward = truth.rewards[ns.q];
        cumulative += reward;
        log.run.push(next);
        log.run_accepting.push(p.is_accepting(next));
        let w = s.grid.width;
        log.rows.push(StepRecord {
            k,
            x: ns.q % w,
            y: ns.q / w,
            state: next,
            s_h: p.hard().name(ns.sh).to_string(),
            s_s: p.soft().name(ns.ss).to_string(),
            energy: energy.j[next],
            utility: traj.utility,
            first_v: edge.v,
            first_h: edge.h,
            reward,
            cumulative,
            case: case.as_str().to_string(),
            feasible,
            fallback_ok,
            relabeled: delta.relabeled.len(),
            changed_annotations: delta.changed_annotations,
            f_star_stable,
            entered_obstacle: truth.is_obstacle(ns.q),
            plan_us,
            update_us,
            predicted: traj.states.iter().map(|&st| p.state(st).q).collect(),
        });
        world.step_environment(ns.q);
    }
    log.obstacles_at_end = world.obstacles();
    Ok(log)
}

/// Builds the relaxed product for `s`, refusing sizes beyond the memory guard.
pub fn build_guarded(s: &Scenario, hard: Nba, soft: Nba) -> Result<RelaxedProduct> {
    let dts = s.build_dts()?;
    let states = dts.num_states() * hard.num_states() * soft.num_states();
    let edges = dts.num_transitions() * hard.num_transitions() * soft.num_transitions();
    if edges > MAX_PRODUCT_EDGES {
        return Err(Error::TooLarge { states, edges });
    }
    RelaxedProduct::relaxed(dts, hard, soft, s.params.beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_mission_stays_safe() {
        let s = Scenario::bundled("exp61b").unwrap();
        let log = run_mission(&s, MissionOptions { check_f_star: true, verify_energy: true, ..Default::default() }).unwrap();
        assert_eq!(log.rows.len(), s.params.steps);
        assert!(log.offline_check.as_ref().unwrap().ok());
        assert!(log.rows.iter().all(|r| !r.entered_obstacle && r.first_h == 0.0));
        assert!(log.rows.iter().all(|r| r.f_star_stable != Some(false)));
        assert_eq!(log.run.len(), log.rows.len() + 1);
    }
}
