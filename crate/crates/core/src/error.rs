use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate face {face}: repeated vertex {vertex}")]
    DegenerateFace { face: usize, vertex: usize },

    #[error("face {face} has {size} vertices; at least 3 are required")]
    FaceTooSmall { face: usize, size: usize },

    #[error("face {face} has {size} sides; only triangles and quads are allowed here")]
    FaceTooLarge { face: usize, size: usize },

    #[error("vertex index {index} out of range in face {face} (vertex count {vertex_count})")]
    IndexOutOfRange {
        face: usize,
        index: i64,
        vertex_count: usize,
    },

    #[error("non-manifold edge ({0}, {1}) is used by more than two faces")]
    NonManifoldEdge(usize, usize),

    #[error("inconsistent orientation at edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),

    #[error("non-manifold vertex {0}: incident faces do not form a single fan")]
    NonManifoldVertex(usize),

    #[error("isolated vertex {0}")]
    IsolatedVertex(usize),

    #[error("coordinate table has {got} entries, expected {expected}")]
    CoordinateCount { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mesh has boundary; a closed mesh is required")]
    HasBoundary,

    #[error("mesh has {0} connected components; exactly one is supported")]
    Disconnected(usize),

    #[error("handles unsupported (Euler characteristic {0}, expected 2)")]
    HandlesUnsupported(i64),

    #[error("irreducible configuration: removing valence-two vertex {0} would produce a degenerate face")]
    IrreducibleConfiguration(usize),

    #[error("valence-two table mismatch: {0}")]
    ValenceTwoTable(String),

    #[error("corrupt dummy vertex table: {0}")]
    DummyTable(String),

    #[error("fixed mode requires pure-quad content (triangle at position {0})")]
    FixedRequiresQuads(usize),

    #[error("valence-two vertex present, use entropy mode (L-quad follows C-ending or CR quad at position {0})")]
    AdjacencyViolation(usize),

    #[error("bit pattern not in table at bit {0}")]
    InvalidPattern(usize),

    #[error("bit stream underrun")]
    Underrun,

    #[error("{0} trailing unread bits")]
    TrailingBits(usize),

    #[error("illegal face code {0}")]
    IllegalFaceCode(String),

    #[error("corrupt label sequence: {0}")]
    CorruptSequence(String),

    #[error("unzippable: {0}")]
    Unzippable(String),

    #[error("checksum mismatch")]
    ChecksumMismatch,

    #[error("malformed container: {0}")]
    Container(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at(stage))
    }
}
