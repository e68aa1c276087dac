//! Writes mission artifacts: text series and an SVG overview.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::ltl::{AtomSet, Label};

use super::MissionLog;

pub const MISSION_LOG: &str = "mission.log";
pub const ENERGY_CSV: &str = "energy.csv";
pub const REWARD_CSV: &str = "reward.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const TIMING_CSV: &str = "timing.csv";
pub const RENDER_SVG: &str = "render.svg";

/// Tab-separated step table. Latencies live in [`timing_csv`] so that reruns with
/// the same seed produce identical logs.
pub fn mission_log(log: &MissionLog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# scenario\t{}", log.scenario);
    let _ = writeln!(out, "# seed\t{}", log.seed);
    let _ = writeln!(out, "# horizon\t{}", log.horizon);
    let _ = writeln!(
        out,
        "# sizes\tQ={}\tS_h={}\tS_s={}\tS_P={}",
        log.num_q, log.num_sh, log.num_ss, log.num_sp
    );
    out.push_str(
        "k\tx\ty\tstate\ts_h\ts_s\tenergy\tutility\tv\th\treward\tcumulative\tcase\tfeasible\tfallback_ok\trelabeled\tchanged\tfstar_stable\tobstacle\n",
    );
    for r in &log.rows {
        let stable = match r.f_star_stable {
            Some(b) => b.to_string(),
            None => "-".into(),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.k,
            r.x,
            r.y,
            r.state,
            r.s_h,
            r.s_s,
            num(r.energy),
            num(r.utility),
            r.first_v,
            num(r.first_h),
            r.reward,
            r.cumulative,
            r.case,
            r.feasible,
            r.fallback_ok,
            r.relabeled,
            r.changed_annotations,
            stable,
            r.entered_obstacle
        );
    }
    out
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        x.to_string()
    }
}

pub fn energy_csv(log: &MissionLog) -> String {
    let mut out = String::from("k,energy\n");
    for r in &log.rows {
        let _ = writeln!(out, "{},{}", r.k, num(r.energy));
    }
    out
}

pub fn reward_csv(log: &MissionLog) -> String {
    let mut out = String::from("k,reward,cumulative\n");
    for r in &log.rows {
        let _ = writeln!(out, "{},{},{}", r.k, r.reward, r.cumulative);
    }
    out
}

/// Label map (`cell` rows) followed by the executed cell sequence (`step` rows).
pub fn trajectory_csv(log: &MissionLog) -> String {
    let mut out = String::from("kind,k,x,y,labels\n");
    for (q, &l) in log.placed.iter().enumerate() {
        if l != Label::EMPTY {
            let names = log.atoms.label_names(l).join("|");
            let _ = writeln!(out, "cell,,{},{},{}", q % log.width, q / log.width, names);
        }
    }
    if !log.rows.is_empty() {
        let (x, y) = (log.start_cell % log.width, log.start_cell / log.width);
        let _ = writeln!(out, "step,0,{x},{y},");
    }
    for r in &log.rows {
        let _ = writeln!(out, "step,{},{},{},", r.k, r.x, r.y);
    }
    out
}

pub fn timing_csv(log: &MissionLog) -> String {
    let mut out = String::from("k,update_us,plan_us\n");
    for r in &log.rows {
        let _ = writeln!(out, "{},{},{}", r.k, r.update_us, r.plan_us);
    }
    out
}

const CELL: usize = 40;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

/// What [`render_svg`] draws.
#[derive(Clone, Debug)]
pub struct Scene<'a> {
    pub width: usize,
    pub height: usize,
    pub atoms: &'a AtomSet,
    pub placed: &'a [Label],
    pub obstacles: &'a [usize],
    pub start: usize,
    /// Visited cells after the start.
    pub path: Vec<usize>,
}

impl<'a> Scene<'a> {
    pub fn of_log(log: &'a MissionLog) -> Self {
        Scene {
            width: log.width,
            height: log.height,
            atoms: &log.atoms,
            placed: &log.placed,
            obstacles: &log.obstacles_at_end,
            start: log.start_cell,
            path: log.rows.iter().map(|r| r.y * log.width + r.x).collect(),
        }
    }
}

/// Grid with labelled cells, obstacles and the executed path.
pub fn render_svg(scene: &Scene) -> String {
    let (w, h) = (scene.width * CELL, scene.height * CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    // y grows upwards in the grid, downwards in SVG.
    let px = |q: usize| {
        let (x, y) = (q % scene.width, q / scene.width);
        (x * CELL, (scene.height - 1 - y) * CELL)
    };
    for (q, &l) in scene.placed.iter().enumerate() {
        if l == Label::EMPTY {
            continue;
        }
        let atom = (0..scene.atoms.len()).find(|&a| l.contains(a)).unwrap_or(0);
        let (x, y) = px(q);
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" fill-opacity="0.5"/>"#,
            PALETTE[atom % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="9" text-anchor="middle">{}</text>"#,
            x + CELL / 2,
            y + CELL / 2 + 3,
            scene.atoms.label_names(l).join(" ")
        );
    }
    for i in 0..=scene.width {
        let _ = writeln!(out, r##"<line x1="{0}" y1="0" x2="{0}" y2="{h}" stroke="#cccccc"/>"##, i * CELL);
    }
    for j in 0..=scene.height {
        let _ = writeln!(out, r##"<line x1="0" y1="{0}" x2="{w}" y2="{0}" stroke="#cccccc"/>"##, j * CELL);
    }
    for &q in scene.obstacles {
        let (x, y) = px(q);
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="{}" fill="#000000"/>"##,
            x + CELL / 2,
            y + CELL / 2,
            CELL / 3
        );
    }
    let centre = |q: usize| {
        let (x, y) = px(q);
        (x + CELL / 2, y + CELL / 2)
    };
    if !scene.path.is_empty() {
        let pts: Vec<String> = std::iter::once(scene.start)
            .chain(scene.path.iter().copied())
            .map(|q| {
                let (x, y) = centre(q);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2" stroke-opacity="0.6"/>"##,
            pts.join(" ")
        );
    }
    let (x, y) = centre(scene.start);
    let _ = writeln!(out, r##"<circle cx="{x}" cy="{y}" r="5" fill="#2ca02c"/>"##);
    out.push_str("</svg>\n");
    out
}

/// Writes every artifact into `dir`, creating it if needed. Returns the paths written.
pub fn export_artifacts(log: &MissionLog, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (MISSION_LOG, mission_log(log)),
        (ENERGY_CSV, energy_csv(log)),
        (REWARD_CSV, reward_csv(log)),
        (TRAJECTORY_CSV, trajectory_csv(log)),
        (TIMING_CSV, timing_csv(log)),
        (RENDER_SVG, render_svg(&Scene::of_log(log))),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_mission, MissionOptions, Scenario};

    #[test]
    fn empty_log_writes_headers_only() {
        let mut s = Scenario::bundled("exp61b").unwrap();
        s.params.steps = 0;
        let log = run_mission(&s, MissionOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = export_artifacts(&log, dir.path()).unwrap();
        assert_eq!(paths.len(), 6);
        assert_eq!(fs::read_to_string(dir.path().join(ENERGY_CSV)).unwrap(), "k,energy\n");
        assert_eq!(fs::read_to_string(dir.path().join(REWARD_CSV)).unwrap(), "k,reward,cumulative\n");
    }

    #[test]
    fn series_have_one_row_per_step() {
        let mut s = Scenario::bundled("exp61b").unwrap();
        s.params.steps = 12;
        let log = run_mission(&s, MissionOptions::default()).unwrap();
        assert_eq!(energy_csv(&log).lines().count(), 13);
        assert_eq!(reward_csv(&log).lines().count(), 13);
        let svg = render_svg(&Scene::of_log(&log));
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
        let traj = trajectory_csv(&log);
        assert!(traj.contains("cell,,1,0,P1"));
        assert_eq!(traj.lines().filter(|l| l.starts_with("step,")).count(), 13);
    }
}
