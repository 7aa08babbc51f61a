use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by loading, training, and parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),

    #[error("rule `{rule}` uses unknown category `{category}`")]
    UnknownCategory { rule: String, category: String },

    #[error("rule `{0}` is phrasal but carries a marker")]
    MarkerOnPhrasal(String),

    #[error("unknown chunk type `{0}`")]
    UnknownChunkType(String),

    #[error("grammar has no start category")]
    NoStartCategory,

    #[error("duplicate lexical entry `{word}` : {category}")]
    DuplicateLexEntry { word: String, category: String },

    #[error("invalid lattice `{id}`: {message}")]
    InvalidLattice { id: String, message: String },

    #[error("empty lattice")]
    EmptyLattice,

    #[error("parse exceeded the {0:.1}s time limit")]
    Timeout(f64),

    #[error("gold derivation is not valid under the grammar: {0}")]
    InvalidGold(String),

    #[error("gold yield `{0}` does not match any lattice path")]
    YieldMismatch(String),

    #[error("rule `{rule}`: {message}")]
    MarkerInconsistency { rule: String, message: String },

    #[error(
        "chunk of type {parent} cuts at a node of type {child}, violating the dominance order"
    )]
    DominanceViolation { parent: String, child: String },

    #[error("macro rule `{rule}` expects {expected} children, found {found}")]
    TemplateArity {
        rule: String,
        expected: usize,
        found: usize,
    },

    #[error("specialized grammar was built from grammar {expected}, not {found}")]
    GrammarMismatch { expected: String, found: String },

    #[error("cannot generate a sentence from `{0}` within the depth bound")]
    Ungenerable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Reads a whole file, attaching the path to any I/O error.
pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes a whole file, attaching the path to any I/O error.
pub fn write_file(path: impl AsRef<std::path::Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
