use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ltl_rhc::energy::{compute_energy, compute_f_star};
use ltl_rhc::ltl::{parse_ltl, translate_to_nba, AtomSet, Nba};
use ltl_rhc::planner::ViolationScope;
use ltl_rhc::sim::{
    bench_csv, build_guarded, export_artifacts, render_svg, run_benchmark, run_mission_with,
    BenchConfig, BenchRow, MissionOptions, Scenario, Scene,
};
use ltl_rhc::Error;

const AFTER_HELP: &str = "\
Scenarios are TOML files (schema version 1) or the bundled names `sim61a` and `exp61b`.

Exit codes: 0 success, 1 runtime or I/O error, 2 invalid input (usage, formula,
scenario or automaton file), 3 no initial state can reach the accepting set (this includes an empty hard task).";

#[derive(Parser)]
#[command(name = "ltl-rhc", version, about = "Receding-horizon LTL motion planning on grid worlds")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Translate an LTL formula into a Büchi automaton (JSON).
    Translate {
        formula: String,
        /// Comma-separated atomic propositions.
        #[arg(long, value_delimiter = ',', required = true)]
        atoms: Vec<String>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the relaxed product of a scenario and report its size.
    Build {
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Write a JSON listing of states and edges.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run a mission and write its artifacts.
    Plan {
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Artifact directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Hard-task automaton file, instead of translating the scenario's formula.
        #[arg(long)]
        hard_nba: Option<PathBuf>,
        /// Soft-task automaton file, instead of translating the scenario's formula.
        #[arg(long)]
        soft_nba: Option<PathBuf>,
        /// Recompute the accepting set after each update and log whether it changed.
        #[arg(long)]
        check_fstar: bool,
    },
    /// Time planning on subdivided copies of a scenario.
    Bench {
        #[arg(default_value = "sim61a")]
        scenario: String,
        /// Benchmark table (TOML); the default five rows if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Single row: subdivision factor.
        #[arg(long, requires = "horizon")]
        scale: Option<usize>,
        /// Single row: horizon.
        #[arg(long, requires = "scale")]
        horizon: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a scenario map, optionally with a trajectory.csv path on top.
    Render {
        scenario: String,
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value = "render.svg")]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// `horizon` penalizes every predicted violation, `first-step` only the applied move.
    #[arg(long, default_value = "horizon")]
    violation_scope: ViolationScope,
}

impl Overrides {
    fn load(&self, name: &str) -> Result<Scenario, Error> {
        let mut s = Scenario::resolve(name)?;
        let p = &mut s.params;
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.kappa {
            p.kappa = v;
        }
        if let Some(v) = self.radius {
            p.radius = Some(v);
        }
        if let Some(v) = self.steps {
            p.steps = v;
        }
        s.validate()?;
        Ok(s)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoFeasibleStart | Error::EmptyInitial => 3,
        Error::Syntax { .. }
        | Error::UnknownAtom(..)
        | Error::DuplicateAtom(..)
        | Error::TooManyAtoms(..)
        | Error::Schema(..)
        | Error::AtomMismatch
        | Error::Scenario { .. }
        | Error::Json(..) => 2,
        _ => 1,
    }
}

fn emit(out: Option<&PathBuf>, body: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Translate { formula, atoms, out } => {
            let atoms = AtomSet::new(atoms)?;
            let f = parse_ltl(&formula, &atoms)?;
            let nba = translate_to_nba(&f, &atoms);
            emit(out.as_ref(), &nba.to_json())?;
            eprintln!("states {} accepting {}", nba.num_states(), nba.num_accepting());
        }
        Cmd::Build { scenario, overrides, dump } => {
            let s = overrides.load(&scenario)?;
            let atoms = s.atom_set();
            let hard = translate_to_nba(&s.hard_formula(), &atoms);
            let soft = translate_to_nba(&s.soft_formula(), &atoms);
            let p = build_guarded(&s, hard, soft)?;
            let f = compute_f_star(&p);
            let e = compute_energy(&p, &f);
            let reachable = p.initial().iter().filter(|&&i| e.j[i].is_finite()).count();
            println!("Q\t{}", p.dts().num_states());
            println!("S_h\t{}", p.hard().num_states());
            println!("S_s\t{}", p.soft().num_states());
            println!("S_P\t{}", p.num_states());
            println!("edges\t{}", p.num_edges());
            println!("F*\t{}", f.len());
            println!("initial_with_finite_energy\t{reachable}");
            if let Some(path) = dump {
                fs::write(path, serde_json::to_string_pretty(&p.dump())?)?;
            }
        }
        Cmd::Plan {
            scenario,
            overrides,
            out,
            hard_nba,
            soft_nba,
            check_fstar,
        } => {
            let s = overrides.load(&scenario)?;
            let atoms = s.atom_set();
            let read = |p: &PathBuf| -> Result<Nba, Error> { Nba::from_json(&fs::read_to_string(p)?) };
            let hard = match &hard_nba {
                Some(p) => read(p)?,
                None => translate_to_nba(&s.hard_formula(), &atoms),
            };
            let soft = match &soft_nba {
                Some(p) => read(p)?,
                None => translate_to_nba(&s.soft_formula(), &atoms),
            };
            let opts = MissionOptions {
                check_f_star: check_fstar,
                verify_energy: false,
                scope: overrides.violation_scope,
            };
            let log = run_mission_with(&s, hard, soft, opts)?;
            export_artifacts(&log, &out)?;
            let summary = format!(
                "steps {} reward {:.3} violation {} accepting_visits {} out {}",
                log.rows.len(),
                log.rows.last().map_or(0.0, |r| r.cumulative),
                log.total_violation(),
                log.accepting_visits().len(),
                out.display()
            );
            if io::stdout().is_terminal() {
                eprintln!("{summary}");
            } else {
                println!("{summary}");
            }
        }
        Cmd::Bench {
            scenario,
            config,
            scale,
            horizon,
            steps,
            repetitions,
            out,
        } => {
            let base = Scenario::resolve(&scenario)?;
            let mut cfg = match &config {
                Some(p) => BenchConfig::load(p)?,
                None => BenchConfig::default(),
            };
            if let (Some(scale), Some(horizon)) = (scale, horizon) {
                cfg.rows = vec![BenchRow { scale, horizon }];
            }
            if let Some(v) = steps {
                cfg.steps = v;
            }
            if let Some(v) = repetitions {
                cfg.repetitions = v;
            }
            let rows = run_benchmark(&base, &cfg)?;
            emit(out.as_ref(), &bench_csv(&rows))?;
        }
        Cmd::Render { scenario, trajectory, out } => {
            let s = Scenario::resolve(&scenario)?;
            let atoms = s.atom_set();
            let placed = s.placed_labels();
            let obstacles = s.obstacle_cells();
            let mut path = Vec::new();
            if let Some(t) = &trajectory {
                path = read_path(&fs::read_to_string(t)?, s.grid.width)?;
            }
            let start = if path.is_empty() { s.initial_cell() } else { path.remove(0) };
            let scene = Scene {
                width: s.grid.width,
                height: s.grid.height,
                atoms: &atoms,
                placed: &placed,
                obstacles: &obstacles,
                start,
                path,
            };
            fs::write(&out, render_svg(&scene))?;
        }
    }
    Ok(())
}

/// Cells of the `step` rows of a trajectory.csv, start first.
fn read_path(text: &str, width: usize) -> Result<Vec<usize>, Error> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.first() != Some(&"step") {
            continue;
        }
        let bad = || Error::Scenario {
            path: format!("trajectory line {}", i + 1),
            msg: "expected step,k,x,y,".into(),
        };
        let x: usize = cols.get(2).and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        let y: usize = cols.get(3).and_then(|c| c.parse().ok()).ok_or_else(bad)?;
        out.push(y * width + x);
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
