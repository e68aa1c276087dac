//! Ground truth of the world at a single step, as seen by the simulator.

use std::collections::BTreeMap;

use crate::dts::Dts;
use crate::ltl::Label;

/// True labels and rewards of every state at step `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentTruth {
    pub k: usize,
    pub labels: Vec<Label>,
    pub rewards: Vec<f64>,
    /// Index of the obstacle atom, if the atom set has one.
    pub obstacle_atom: Option<usize>,
}

impl EnvironmentTruth {
    pub fn obstacle_set(&self) -> Vec<usize> {
        match self.obstacle_atom {
            Some(a) => (0..self.labels.len())
                .filter(|&q| self.labels[q].contains(a))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn is_obstacle(&self, q: usize) -> bool {
        self.obstacle_atom
            .is_some_and(|a| self.labels[q].contains(a))
    }
}

/// Rewards of all states within Chebyshev distance `radius` of `q`.
pub fn observe_rewards(
    env: &EnvironmentTruth,
    d: &Dts,
    q: usize,
    radius: usize,
) -> BTreeMap<usize, f64> {
    d.ball(q, radius)
        .into_iter()
        .map(|r| (r, env.rewards[r]))
        .collect()
}

/// Rewards collected along an executed run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewardTrace {
    pub collected: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RewardTrace {
    pub fn push(&mut self, r: f64) {
        let total = self.total() + r;
        self.collected.push(r);
        self.cumulative.push(total);
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dts::build_grid_dts;
    use crate::ltl::AtomSet;

    fn env(d: &Dts) -> EnvironmentTruth {
        EnvironmentTruth {
            k: 1,
            labels: d.labels().to_vec(),
            rewards: (0..d.num_states()).map(|q| q as f64).collect(),
            obstacle_atom: Some(0),
        }
    }

    #[test]
    fn radius_zero_sees_only_self() {
        let atoms = AtomSet::new(["Obstacle"]).unwrap();
        let d = build_grid_dts(5, 5, (2, 2), atoms, |_, _| Label::EMPTY).unwrap();
        let r = observe_rewards(&env(&d), &d, 12, 0);
        assert_eq!(r.into_iter().collect::<Vec<_>>(), vec![(12, 12.0)]);
    }

    #[test]
    fn large_radius_sees_everything() {
        let atoms = AtomSet::new(["Obstacle"]).unwrap();
        let d = build_grid_dts(5, 5, (2, 2), atoms, |_, _| Label::EMPTY).unwrap();
        assert_eq!(observe_rewards(&env(&d), &d, 0, 10).len(), 25);
    }

    #[test]
    fn cumulative_is_running_sum() {
        let mut t = RewardTrace::default();
        for r in [1.5, 2.0, 0.5] {
            t.push(r);
        }
        assert_eq!(t.cumulative, vec![1.5, 3.5, 4.0]);
        assert_eq!(t.total(), 4.0);
    }
}
