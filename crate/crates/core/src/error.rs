use thiserror::Error;

/// Malformed input: the instance cannot even be interpreted as a base graph
/// with two vertex orders. Distinct from a failed hypothesis check.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing section `{0}`")]
    Missing(&'static str),
    #[error("vertex {vertex} out of range for k = {k}")]
    VertexOutOfRange { vertex: usize, k: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("{name} is not a permutation of 0..{k}")]
    NotPermutation { name: &'static str, k: usize },
    #[error("k must be positive")]
    EmptyGraph,
    #[error("{0}")]
    NotHamilton(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("{{{0}, {1}}} is not an edge of the base graph")]
    NotAnEdge(usize, usize),
    #[error("edge towards base vertex {neighbor} already revealed at ({base}, {fiber})")]
    AlreadyRevealed {
        base: usize,
        fiber: usize,
        neighbor: usize,
    },
    #[error("no unmatched partner left on the far side: matching state corrupted")]
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RotationError {
    #[error("pivot position {pivot} outside 1..={max} on a path of {len} vertices")]
    PivotOutOfRange { pivot: usize, max: isize, len: usize },
    #[error("rotation edge between end and pivot is not revealed")]
    EdgeNotRevealed,
    #[error("closing edge between the two ends is not revealed")]
    NoClosingEdge,
    #[error("path needs at least three vertices to close into a cycle")]
    TooShort,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AltPathError {
    #[error(
        "vertex {target} not reachable by an alternating path from {from}: instance hypotheses violated"
    )]
    Unreachable { from: usize, target: usize },
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {size} vertices, above the brute-force cap of {cap}")]
    TooLarge { size: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThresholdError {
    #[error("unknown threshold `{0}`")]
    UnknownKey(String),
    #[error("threshold `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("expected KEY=VALUE, got `{0}`")]
    Syntax(String),
}
