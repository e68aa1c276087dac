//! Environment evolution: reward resampling, obstacle motion and label toggles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::EnvironmentTruth;
use crate::ltl::Label;

use super::Scenario;

/// What changed when the world advanced one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepEffects {
    pub k: usize,
    pub moved_obstacles: usize,
    pub toggled: bool,
}

/// Ground-truth simulator for one episode. Steps are numbered from 1.
#[derive(Clone, Debug)]
pub struct World {
    width: usize,
    height: usize,
    placed: Vec<Label>,
    stations: Vec<bool>,
    fixed: Vec<usize>,
    walkers: Vec<usize>,
    move_probability: f64,
    obstacle_atom: usize,
    toggles: Vec<(usize, usize, usize)>,
    low: f64,
    high: f64,
    reward_rng: ChaCha8Rng,
    motion_rng: ChaCha8Rng,
    rewards: Vec<f64>,
    k: usize,
}

impl World {
    pub fn new(s: &Scenario) -> World {
        let atoms = s.atom_set();
        let placed = s.placed_labels();
        let stations = placed.iter().map(|l| *l != Label::EMPTY).collect();
        let seed = s.params.seed;
        let mut w = World {
            width: s.grid.width,
            height: s.grid.height,
            placed,
            stations,
            fixed: s.obstacles.fixed.iter().map(|&c| s.cell(c)).collect(),
            walkers: s.obstacles.walkers.iter().map(|&c| s.cell(c)).collect(),
            move_probability: s.obstacles.move_probability,
            obstacle_atom: s.obstacle_index(),
            toggles: s
                .toggles
                .iter()
                .map(|t| (atoms.position(&t.atom).unwrap(), t.off_from, t.off_to))
                .collect(),
            low: s.rewards.low,
            high: s.rewards.high,
            reward_rng: ChaCha8Rng::seed_from_u64(seed),
            motion_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
            rewards: Vec::new(),
            k: 1,
        };
        w.resample();
        w
    }

    fn resample(&mut self) {
        let n = self.width * self.height;
        let (lo, hi) = (self.low, self.high);
        self.rewards = (0..n)
            .map(|_| {
                if hi > lo {
                    self.reward_rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn obstacles(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.fixed.iter().chain(&self.walkers).copied().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn truth(&self) -> EnvironmentTruth {
        let mut labels = self.placed.clone();
        for &(atom, from, to) in &self.toggles {
            if (from..=to).contains(&self.k) {
                for l in labels.iter_mut() {
                    *l = l.without(atom);
                }
            }
        }
        for q in self.obstacles() {
            labels[q] = labels[q].with(self.obstacle_atom);
        }
        EnvironmentTruth {
            k: self.k,
            labels,
            rewards: self.rewards.clone(),
            obstacle_atom: Some(self.obstacle_atom),
        }
    }

    fn toggles_active(&self, k: usize) -> Vec<bool> {
        self.toggles
            .iter()
            .map(|&(_, from, to)| (from..=to).contains(&k))
            .collect()
    }

    /// Advances to step `k + 1`. Walkers never enter `agent`, a station or another obstacle.
    pub fn step_environment(&mut self, agent: usize) -> StepEffects {
        let before = self.toggles_active(self.k);
        self.k += 1;
        self.resample();
        let mut moved = 0;
        for i in 0..self.walkers.len() {
            let roll: f64 = self.motion_rng.gen();
            let cur = self.walkers[i];
            let free: Vec<usize> = self
                .neighbours(cur)
                .into_iter()
                .filter(|&c| {
                    c != agent
                        && !self.stations[c]
                        && !self.fixed.contains(&c)
                        && !self.walkers.contains(&c)
                })
                .collect();
            let pick = self.motion_rng.gen_range(0..free.len().max(1));
            if roll < self.move_probability && !free.is_empty() {
                self.walkers[i] = free[pick];
                moved += 1;
            }
        }
        StepEffects {
            k: self.k,
            moved_obstacles: moved,
            toggled: before != self.toggles_active(self.k),
        }
    }

    fn neighbours(&self, q: usize) -> Vec<usize> {
        let (x, y, w) = (q % self.width, q / self.width, self.width);
        let mut out = Vec::with_capacity(4);
        if x > 0 {
            out.push(q - 1);
        }
        if x + 1 < w {
            out.push(q + 1);
        }
        if y > 0 {
            out.push(q - w);
        }
        if y + 1 < self.height {
            out.push(q + w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_switches_off_at_101() {
        let s = Scenario::bundled("sim61a").unwrap();
        let survey = s.atom_set().position("Survey").unwrap();
        let mut w = World::new(&s);
        let agent = s.initial_cell();
        while w.k() < 100 {
            w.step_environment(agent);
        }
        assert!(w.truth().labels.iter().any(|l| l.contains(survey)));
        let fx = w.step_environment(agent);
        assert_eq!(fx.k, 101);
        assert!(fx.toggled);
        assert!(w.truth().labels.iter().all(|l| !l.contains(survey)));
    }

    #[test]
    fn seeded_rerun_is_identical() {
        let s = Scenario::bundled("sim61a").unwrap();
        let (mut a, mut b) = (World::new(&s), World::new(&s));
        for _ in 0..30 {
            assert_eq!(a.truth(), b.truth());
            a.step_environment(0);
            b.step_environment(0);
        }
    }

    #[test]
    fn static_obstacles_stay_and_walkers_avoid_agent() {
        let mut s = Scenario::bundled("exp61b").unwrap();
        s.obstacles.move_probability = 1.0;
        let mut w = World::new(&s);
        let agent = s.cell([3, 2]);
        for _ in 0..50 {
            w.step_environment(agent);
            let obs = w.obstacles();
            assert!(obs.contains(&s.cell([6, 3])) && obs.contains(&s.cell([7, 2])));
            assert!(!obs.contains(&agent));
            assert_eq!(obs.len(), 4);
        }
    }

    #[test]
    fn rewards_within_bounds() {
        let s = Scenario::bundled("sim61a").unwrap();
        let w = World::new(&s);
        assert!(w.truth().rewards.iter().all(|&r| (10.0..=25.0).contains(&r)));
    }
}
