//! Scenario files (TOML, schema version 1).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dts::{build_grid_dts, cell_index, Dts};
use crate::error::{Error, Result};
use crate::ltl::{parse_ltl, AtomSet, Label, Ltl};

pub const SCHEMA_VERSION: u32 = 1;

const SIM61A: &str = include_str!("../../scenarios/sim61a.toml");
const EXP61B: &str = include_str!("../../scenarios/exp61b.toml");

/// Names accepted by [`Scenario::bundled`].
pub const BUNDLED: &[&str] = &["sim61a", "exp61b"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub initial: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub atom: String,
    pub cells: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Task {
    pub hard: String,
    pub soft: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub beta: f64,
    pub kappa: f64,
    pub horizon: usize,
    /// Chebyshev sensing radius; defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    pub steps: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    /// Cells that stay blocked for the whole episode.
    #[serde(default, rename = "static")]
    pub fixed: Vec<[usize; 2]>,
    /// Start cells of randomly walking obstacles.
    #[serde(default)]
    pub walkers: Vec<[usize; 2]>,
    #[serde(default)]
    pub move_probability: f64,
}

/// `atom` is absent from the world for `off_from <= k <= off_to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggle {
    pub atom: String,
    pub off_from: usize,
    pub off_to: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub grid: GridSpec,
    pub atoms: Vec<String>,
    #[serde(default = "default_obstacle_atom")]
    pub obstacle_atom: String,
    /// Atoms whose placements the agent knows before sensing anything.
    #[serde(default)]
    pub known: Vec<String>,
    #[serde(default)]
    pub labels: Vec<Placement>,
    pub task: Task,
    pub params: Params,
    pub rewards: RewardSpec,
    #[serde(default)]
    pub obstacles: ObstacleSpec,
    #[serde(default)]
    pub toggles: Vec<Toggle>,
}

fn default_obstacle_atom() -> String {
    "Obstacle".into()
}

fn bad(path: &str, msg: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        msg: msg.into(),
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Scenario::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            bad(&locate(text, e.span()), msg)
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn bundled(name: &str) -> Result<Scenario> {
        match name {
            "sim61a" => Scenario::from_toml(SIM61A),
            "exp61b" => Scenario::from_toml(EXP61B),
            _ => Err(bad("name", format!("no bundled scenario `{name}`"))),
        }
    }

    /// A bundled name or a path to a scenario file.
    pub fn resolve(name_or_path: &str) -> Result<Scenario> {
        if BUNDLED.contains(&name_or_path) {
            Scenario::bundled(name_or_path)
        } else {
            Scenario::load(name_or_path)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(bad(
                "version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version),
            ));
        }
        let (w, h) = (self.grid.width, self.grid.height);
        if w == 0 || h == 0 {
            return Err(bad("grid", "width and height must be positive"));
        }
        let atoms = AtomSet::new(self.atoms.iter().cloned()).map_err(|e| bad("atoms", e.to_string()))?;
        let in_grid = |path: &str, c: [usize; 2]| {
            if c[0] < w && c[1] < h {
                Ok(())
            } else {
                Err(bad(path, format!("cell [{}, {}] outside {w}x{h} grid", c[0], c[1])))
            }
        };
        in_grid("grid.initial", self.grid.initial)?;
        let require = |path: &str, name: &str| {
            atoms
                .position(name)
                .map(|_| ())
                .ok_or_else(|| bad(path, format!("undeclared atom `{name}`")))
        };
        require("obstacle_atom", &self.obstacle_atom)?;
        for (i, name) in self.known.iter().enumerate() {
            require(&format!("known[{i}]"), name)?;
        }
        for (i, pl) in self.labels.iter().enumerate() {
            require(&format!("labels[{i}].atom"), &pl.atom)?;
            if pl.atom == self.obstacle_atom {
                return Err(bad(
                    &format!("labels[{i}].atom"),
                    "place obstacles under [obstacles]",
                ));
            }
            for (j, &c) in pl.cells.iter().enumerate() {
                in_grid(&format!("labels[{i}].cells[{j}]"), c)?;
            }
        }
        for (i, &c) in self.obstacles.fixed.iter().enumerate() {
            in_grid(&format!("obstacles.static[{i}]"), c)?;
        }
        for (i, &c) in self.obstacles.walkers.iter().enumerate() {
            in_grid(&format!("obstacles.walkers[{i}]"), c)?;
        }
        if self.obstacle_cells().contains(&self.initial_cell()) {
            return Err(bad("grid.initial", "initial cell is an obstacle"));
        }
        if !(0.0..=1.0).contains(&self.obstacles.move_probability) {
            return Err(bad("obstacles.move_probability", "must lie in [0, 1]"));
        }
        for (i, t) in self.toggles.iter().enumerate() {
            require(&format!("toggles[{i}].atom"), &t.atom)?;
            if t.off_from > t.off_to {
                return Err(bad(&format!("toggles[{i}]"), "off_from exceeds off_to"));
            }
        }
        parse_ltl(&self.task.hard, &atoms).map_err(|e| bad("task.hard", e.to_string()))?;
        parse_ltl(&self.task.soft, &atoms).map_err(|e| bad("task.soft", e.to_string()))?;
        let p = &self.params;
        if !(p.beta > 0.0 && p.beta.is_finite()) {
            return Err(bad("params.beta", "must be positive"));
        }
        if !(p.kappa >= 0.0 && p.kappa.is_finite()) {
            return Err(bad("params.kappa", "must be nonnegative"));
        }
        if p.horizon == 0 {
            return Err(bad("params.horizon", "must be at least 1"));
        }
        let r = &self.rewards;
        if !(r.low >= 0.0 && r.low <= r.high && r.high.is_finite()) {
            return Err(bad("rewards", "need 0 <= low <= high"));
        }
        Ok(())
    }

    pub fn atom_set(&self) -> AtomSet {
        AtomSet::new(self.atoms.iter().cloned()).expect("validated atoms")
    }

    pub fn obstacle_index(&self) -> usize {
        self.atom_set().position(&self.obstacle_atom).expect("validated")
    }

    pub fn hard_formula(&self) -> Ltl {
        parse_ltl(&self.task.hard, &self.atom_set()).expect("validated formula")
    }

    pub fn soft_formula(&self) -> Ltl {
        parse_ltl(&self.task.soft, &self.atom_set()).expect("validated formula")
    }

    pub fn radius(&self) -> usize {
        self.params.radius.unwrap_or(self.params.horizon)
    }

    pub fn num_cells(&self) -> usize {
        self.grid.width * self.grid.height
    }

    pub fn cell(&self, c: [usize; 2]) -> usize {
        cell_index(c[0], c[1], self.grid.width)
    }

    pub fn initial_cell(&self) -> usize {
        self.cell(self.grid.initial)
    }

    /// Cells occupied by obstacles at the start of the episode.
    pub fn obstacle_cells(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .obstacles
            .fixed
            .iter()
            .chain(&self.obstacles.walkers)
            .map(|&c| self.cell(c))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Static placements of every atom except obstacles.
    pub fn placed_labels(&self) -> Vec<Label> {
        self.placed_labels_where(|_| true)
    }

    /// Static placements restricted to atoms known a priori.
    pub fn known_labels(&self) -> Vec<Label> {
        self.placed_labels_where(|name| self.known.iter().any(|k| k == name))
    }

    fn placed_labels_where(&self, keep: impl Fn(&str) -> bool) -> Vec<Label> {
        let atoms = self.atom_set();
        let mut out = vec![Label::EMPTY; self.num_cells()];
        for pl in &self.labels {
            if !keep(&pl.atom) {
                continue;
            }
            let a = atoms.position(&pl.atom).expect("validated");
            for &c in &pl.cells {
                let q = self.cell(c);
                out[q] = out[q].with(a);
            }
        }
        out
    }

    /// Grid DTS carrying the agent's a-priori label knowledge.
    pub fn build_dts(&self) -> Result<Dts> {
        let known = self.known_labels();
        let w = self.grid.width;
        build_grid_dts(
            w,
            self.grid.height,
            (self.grid.initial[0], self.grid.initial[1]),
            self.atom_set(),
            |x, y| known[cell_index(x, y, w)],
        )
    }

    /// Same scenario with every label toggle removed.
    pub fn without_toggles(&self) -> Scenario {
        let mut s = self.clone();
        s.toggles.clear();
        s.name = format!("{}-feasible", self.name);
        s
    }
}

// Best-effort dotted path of the table enclosing a byte span.
fn locate(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else {
        return "<root>".into();
    };
    let before = &text[..span.start.min(text.len())];
    let mut table = String::from("<root>");
    for line in before.lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').to_string();
        }
    }
    let key = text[span.start.min(text.len())..]
        .lines()
        .next()
        .and_then(|l| l.split('=').next())
        .map(str::trim)
        .filter(|k| !k.is_empty() && !k.starts_with('['))
        .unwrap_or("");
    if key.is_empty() {
        table
    } else {
        format!("{table}.{key}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_case_study() {
        let s = Scenario::bundled("sim61a").unwrap();
        assert_eq!((s.grid.width, s.grid.height), (10, 10));
        assert_eq!(s.params.steps, 200);
        assert_eq!(s.params.horizon, 4);
        assert_eq!(s.params.beta, 500.0);
        assert_eq!(s.params.kappa, 100.0);
        assert_eq!(s.toggles.len(), 1);
        assert_eq!(s.toggles[0].atom, "Survey");
        assert_eq!((s.toggles[0].off_from, s.toggles[0].off_to), (101, 200));
        assert_eq!(s.radius(), 4);
    }

    #[test]
    fn bundled_experiment() {
        let s = Scenario::bundled("exp61b").unwrap();
        assert_eq!((s.grid.width, s.grid.height), (8, 4));
        assert_eq!((s.rewards.low, s.rewards.high), (5.0, 15.0));
        assert_eq!(s.soft_formula().conjuncts().len(), 3);
    }

    #[test]
    fn missing_formula_is_reported() {
        let text = Scenario::bundled("sim61a")
            .unwrap()
            .to_toml()
            .replace("soft = ", "sfot = ");
        match Scenario::from_toml(&text) {
            Err(Error::Scenario { msg, .. }) => assert!(msg.contains("soft") || msg.contains("sfot"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_formula_names_its_field() {
        let mut s = Scenario::bundled("sim61a").unwrap();
        s.task.soft = "[]<> Nowhere".into();
        match Scenario::from_toml(&s.to_toml()) {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "task.soft"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toml_roundtrip() {
        for name in BUNDLED {
            let s = Scenario::bundled(name).unwrap();
            assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
        }
    }
}
