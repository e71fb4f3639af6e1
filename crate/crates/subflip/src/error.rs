use thiserror::Error;

/// Errors shared by all modules of the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex id {0} out of range for graph with {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("self-pair ({0},{0}) in edge list; self-loops belong in the loop set")]
    SelfPairInEdgeList(usize),
    #[error("graphs must have at least one vertex")]
    EmptyGraph,
    #[error("zero order requested from generator")]
    ZeroOrder,
    #[error("instance too large: {0} vertices exceeds cap {1}")]
    TooLarge(usize, usize),
    #[error("empty vertex set not allowed here")]
    EmptySet,
    #[error("vertex sets must be disjoint")]
    OverlappingSides,
    #[error("partition does not cover the host set: {0}")]
    InvalidPartition(String),
    #[error("partition hosts {0} vertices but graph has {1}")]
    SizeMismatch(usize, usize),
    #[error("partitions have different hosts ({0} vs {1})")]
    HostMismatch(usize, usize),
    #[error("part id {0} out of range for partition with {1} parts")]
    PartOutOfRange(usize, usize),
    #[error("graphs must share a vertex set ({0} vs {1} vertices)")]
    VertexSetMismatch(usize, usize),
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("co-matching index of the graph is at least the supplied bound t = {0}")]
    CoMatchingTooLarge(usize),
    #[error("tuples must be pairwise disjoint")]
    NonDisjointTuples,
    #[error("tuple length mismatch: expected {0}, got {1}")]
    TupleLengthMismatch(usize, usize),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{0}` at offset {1}")]
    UnboundVariable(String, usize),
    #[error("formula is not existential positive: {0}")]
    NotEp(String),
    #[error("formula is not positive in set variable `{0}`")]
    NotPositiveIn(String),
    #[error("formula has an ill-scoped or unsupported shape: {0}")]
    IllScoped(String),
    #[error("unassigned free variable `{0}`")]
    UnassignedVariable(String),
    #[error("unknown color `{0}`")]
    UnknownColor(String),
    #[error("color name `{0}` already in use")]
    ColorClash(String),
    #[error("color signatures overlap on `{0}`")]
    OverlappingColors(String),
    #[error("composition requires a total domain on the first transduction")]
    PartialDomain,
    #[error("domain formula must have exactly the free variable x, edge formula exactly x and y")]
    BadInterpretationVariables,
    #[error("flip relation is not pure: parts {0} and {1} are neither fully adjacent nor fully non-adjacent")]
    NotPure(usize, usize),
    #[error("vertex {0} lies in a self-flipped part but has no self-loop")]
    LoopConditionViolated(usize),
    #[error("graph must be reflexive (every vertex needs a self-loop)")]
    NotReflexive,
    #[error("edge set is not covered by the supplied cover vertices")]
    NotACover,
    #[error("edit edges conflict with the graph: {0}")]
    BadEditEdges(String),
    #[error("graph contains an induced irreflexive clique of order {0}")]
    IrreflexiveCliqueFound(usize),
    #[error("witness is defined on the wrong vertex set")]
    BadWitnessDomain,
    #[error("component {{{0}}} has diameter {1}, exceeding the bound {2}")]
    DiameterExceeded(String, usize, usize),
    #[error("sets do not form a {0}-cover")]
    NotAPCover(usize),
    #[error("no semi-induced co-matching of order {0} found")]
    NoCoMatching(usize),
    #[error("no sunflower of size at least 2 among the tuples")]
    NoSunflower,
    #[error("non-equality property does not hold on the instance")]
    NepFails,
    #[error("decomposition tree is not valid for the graph: {0}")]
    InvalidTree(String),
    #[error("sparsify witness is inconsistent: {0}")]
    InvalidWitness(String),
    #[error("rank search exceeded the depth cap {0}")]
    DepthCapExceeded(usize),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
