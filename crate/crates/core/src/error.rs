use thiserror::Error;

/// Errors surfaced by the planning engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("undeclared atom `{0}`")]
    UnknownAtom(String),

    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),

    #[error("too many atoms: {0} (at most {max} supported)", max = crate::ltl::MAX_ATOMS)]
    TooManyAtoms(usize),

    #[error("invalid automaton document: {0}")]
    Schema(String),

    #[error("automata and transition system disagree on the atom set")]
    AtomMismatch,

    #[error("dangling state reference `{0}`")]
    DanglingState(String),

    #[error("cell ({x}, {y}) is outside a {width}x{height} grid")]
    CellOutOfRange {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("({0}, {1}) is not a transition")]
    NotATransition(usize, usize),

    #[error("product has no initial state")]
    EmptyInitial,

    #[error("no initial product state can reach an accepting cycle")]
    NoFeasibleStart,

    #[error("planner found no admissible trajectory at step {0}")]
    EmptyCandidates(usize),

    #[error("scenario error at `{path}`: {msg}")]
    Scenario { path: String, msg: String },

    #[error("product of {states} states and ~{edges} edges exceeds the memory guard")]
    TooLarge { states: usize, edges: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
