//! Scalability benchmark over subdivided workspaces.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ltl::translate_to_nba;
use crate::planner::ViolationScope;

use super::{build_guarded, run_mission, MissionOptions, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRow {
    /// Each base cell becomes a `scale x scale` block.
    pub scale: usize,
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
}

fn default_steps() -> usize {
    20
}

fn default_repetitions() -> usize {
    3
}

impl Default for BenchConfig {
    /// 10x10 with N = 4 and 6, 30x30 with N = 4 and 8, 50x50 with N = 4.
    fn default() -> Self {
        let row = |scale, horizon| BenchRow { scale, horizon };
        BenchConfig {
            steps: default_steps(),
            repetitions: default_repetitions(),
            rows: vec![row(1, 4), row(1, 6), row(3, 4), row(3, 8), row(5, 4)],
        }
    }
}

impl BenchConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Scenario {
            path: path.display().to_string(),
            msg: e.message().to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub width: usize,
    pub height: usize,
    pub num_q: usize,
    pub num_sh: usize,
    pub num_ss: usize,
    pub num_sp: usize,
    pub horizon: usize,
    pub steps: usize,
    pub repetitions: usize,
    /// Per-step planning time in seconds.
    pub min_s: f64,
    pub max_s: f64,
    pub mean_s: f64,
    /// Mean time spent applying sensing updates, energy recomputation included.
    pub mean_update_s: f64,
    /// Reference mean for the same row from an earlier MATLAB implementation.
    pub reference_mean_s: Option<f64>,
}

/// (width, horizon, mean seconds) of the reference implementation.
const REFERENCE: &[(usize, usize, f64)] = &[
    (10, 4, 1.70),
    (10, 6, 1.81),
    (30, 4, 3.12),
    (30, 8, 4.83),
    (50, 4, 6.11),
];

/// `base` with every cell split into a `f x f` block. Stations and fixed obstacles
/// cover whole blocks; the start and the walkers sit at block centres.
pub fn scaled_scenario(base: &Scenario, f: usize) -> Scenario {
    let f = f.max(1);
    let centre = |c: [usize; 2]| [c[0] * f + f / 2, c[1] * f + f / 2];
    let block = |cells: &[[usize; 2]]| {
        let mut out = Vec::with_capacity(cells.len() * f * f);
        for c in cells {
            for dy in 0..f {
                for dx in 0..f {
                    out.push([c[0] * f + dx, c[1] * f + dy]);
                }
            }
        }
        out
    };
    let mut s = base.clone();
    s.name = format!("{}-x{f}", base.name);
    s.grid.width *= f;
    s.grid.height *= f;
    s.grid.initial = centre(base.grid.initial);
    for p in &mut s.labels {
        p.cells = block(&p.cells);
    }
    s.obstacles.fixed = block(&base.obstacles.fixed);
    s.obstacles.walkers = base.obstacles.walkers.iter().map(|&c| centre(c)).collect();
    s
}

/// Times `config.steps` mission steps per repetition for every row.
pub fn run_benchmark(base: &Scenario, config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let atoms = base.atom_set();
    let hard = translate_to_nba(&base.hard_formula(), &atoms);
    let soft = translate_to_nba(&base.soft_formula(), &atoms);
    let mut out = Vec::with_capacity(config.rows.len());
    for row in &config.rows {
        let mut s = scaled_scenario(base, row.scale);
        s.params.horizon = row.horizon;
        s.params.radius = None;
        s.params.steps = config.steps;
        // Fail fast before any repetition allocates the product.
        drop(build_guarded(&s, hard.clone(), soft.clone())?);
        let mut plan = Vec::new();
        let mut update = Vec::new();
        let mut sizes = (0, 0, 0, 0);
        for rep in 0..config.repetitions.max(1) {
            s.params.seed = base.params.seed + rep as u64;
            let log = run_mission(
                &s,
                MissionOptions {
                    scope: ViolationScope::default(),
                    ..Default::default()
                },
            )?;
            sizes = (log.num_q, log.num_sh, log.num_ss, log.num_sp);
            plan.extend(log.rows.iter().map(|r| r.plan_us as f64 * 1e-6));
            update.extend(log.rows.iter().map(|r| r.update_us as f64 * 1e-6));
        }
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let min_s = plan.iter().copied().fold(f64::INFINITY, f64::min);
        let max_s = plan.iter().copied().fold(0.0, f64::max);
        out.push(BenchRecord {
            width: s.grid.width,
            height: s.grid.height,
            num_q: sizes.0,
            num_sh: sizes.1,
            num_ss: sizes.2,
            num_sp: sizes.3,
            horizon: row.horizon,
            steps: config.steps,
            repetitions: config.repetitions.max(1),
            min_s: if plan.is_empty() { 0.0 } else { min_s },
            max_s,
            mean_s: mean(&plan),
            mean_update_s: mean(&update),
            reference_mean_s: REFERENCE
                .iter()
                .find(|r| r.0 == s.grid.width && r.1 == row.horizon && s.grid.width == s.grid.height)
                .map(|r| r.2),
        });
    }
    Ok(out)
}

pub fn bench_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(
        "workspace,Q,S_h,S_s,S_P,horizon,steps,repetitions,min_s,max_s,mean_s,mean_update_s,reference_mean_s\n",
    );
    for r in records {
        let reference = r.reference_mean_s.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}x{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.width,
            r.height,
            r.num_q,
            r.num_sh,
            r.num_ss,
            r.num_sp,
            r.horizon,
            r.steps,
            r.repetitions,
            r.min_s,
            r.max_s,
            r.mean_s,
            r.mean_update_s,
            reference
        );
    }
    out
}
