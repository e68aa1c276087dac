//! Local sensing and the automaton update that follows it.

use std::collections::BTreeMap;

use crate::energy::{compute_energy, EnergyTable, FStarSet};
use crate::environment::EnvironmentTruth;
use crate::ltl::Label;
use crate::product::RelaxedProduct;

/// True labels inside the sensing window, and which of them contradict knowledge.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SenseReport {
    pub sensed: BTreeMap<usize, Label>,
    pub info: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateDelta {
    pub relabeled: Vec<usize>,
    pub changed_annotations: usize,
    pub energy_refreshed: bool,
}

impl UpdateDelta {
    pub fn is_empty(&self) -> bool {
        self.relabeled.is_empty()
    }
}

/// Snapshot of the true labels within Chebyshev `radius` of `q`, diffed against
/// the product's current label knowledge.
pub fn sense(env: &EnvironmentTruth, p: &RelaxedProduct, q: usize, radius: usize) -> SenseReport {
    let mut rep = SenseReport::default();
    for r in p.dts().ball(q, radius) {
        let l = env.labels[r];
        rep.sensed.insert(r, l);
        if p.dts().label(r) != l {
            rep.info.push(r);
        }
    }
    rep
}

/// Patches label knowledge, refreshes the affected annotations and recomputes the
/// energy table. `F*` is left untouched.
pub fn apply_update(
    p: &mut RelaxedProduct,
    f: &FStarSet,
    report: &SenseReport,
    energy: &mut EnergyTable,
) -> UpdateDelta {
    let mut delta = UpdateDelta::default();
    for &q in &report.info {
        let l = report.sensed[&q];
        if p.dts().label(q) != l {
            delta.changed_annotations += p.relabel(q, l);
            delta.relabeled.push(q);
        }
    }
    if !delta.relabeled.is_empty() {
        *energy = compute_energy(p, f);
        delta.energy_refreshed = true;
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dts::build_grid_dts;
    use crate::energy::compute_f_star;
    use crate::ltl::{parse_ltl, translate_to_nba, AtomSet, Nba};

    #[test]
    fn consistent_knowledge_yields_no_info() {
        let atoms = AtomSet::new(["Obstacle"]).unwrap();
        let d = build_grid_dts(3, 3, (0, 0), atoms.clone(), |_, _| Label::EMPTY).unwrap();
        let hard = translate_to_nba(&parse_ltl("[] !Obstacle", &atoms).unwrap(), &atoms);
        let mut p = RelaxedProduct::relaxed(d, hard, Nba::universal(atoms), 500.0).unwrap();
        let env = EnvironmentTruth {
            k: 1,
            labels: vec![Label::EMPTY; 9],
            rewards: vec![0.0; 9],
            obstacle_atom: Some(0),
        };
        let f = compute_f_star(&p);
        let mut t = compute_energy(&p, &f);
        let before = t.clone();
        for radius in [0, 1, 5] {
            let rep = sense(&env, &p, 4, radius);
            assert!(rep.info.is_empty());
            assert!(apply_update(&mut p, &f, &rep, &mut t).is_empty());
        }
        assert_eq!(t, before);
    }

    #[test]
    fn moved_obstacle_is_reported_and_applied_idempotently() {
        let atoms = AtomSet::new(["Obstacle"]).unwrap();
        let d = build_grid_dts(3, 3, (0, 0), atoms.clone(), |_, _| Label::EMPTY).unwrap();
        let hard = translate_to_nba(&parse_ltl("[] !Obstacle", &atoms).unwrap(), &atoms);
        let mut p = RelaxedProduct::relaxed(d, hard, Nba::universal(atoms), 500.0).unwrap();
        let mut labels = vec![Label::EMPTY; 9];
        labels[5] = Label(1);
        let env = EnvironmentTruth {
            k: 2,
            labels,
            rewards: vec![0.0; 9],
            obstacle_atom: Some(0),
        };
        let f = compute_f_star(&p);
        let mut t = compute_energy(&p, &f);
        let rep = sense(&env, &p, 4, 1);
        assert_eq!(rep.info, vec![5]);
        let delta = apply_update(&mut p, &f, &rep, &mut t);
        assert_eq!(delta.relabeled, vec![5]);
        assert!(!t.live[5]);
        assert_eq!(compute_f_star(&p), f);
        assert_eq!(t, compute_energy(&p, &f));
        let again = t.clone();
        assert!(apply_update(&mut p, &f, &rep, &mut t).is_empty());
        assert_eq!(t, again);
    }
}
