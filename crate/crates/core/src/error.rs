use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("truncation cannot be propagated: an image has a nonzero constant term")]
    TruncationLost,

    #[error("defining function is not real-valued")]
    NotReal,

    #[error("defining function has no linear part (dr(0) = 0)")]
    NoLinearPart,

    #[error("defining function does not vanish at the origin")]
    NonzeroConstant,

    #[error("holomorphic part has vanishing differential at the origin")]
    DegenerateLinearPart,

    #[error("curve is constant (all components vanish)")]
    ConstantCurve,

    #[error("curve component {0} has a nonzero constant term")]
    CurveNotBased(usize),

    #[error("pullback vanishes identically below its truncation order")]
    ZeroBelowTruncation,

    #[error("jet order {available} is too small, need at least {needed}")]
    InsufficientJet { needed: u32, available: u32 },

    #[error("block sizes {sizes:?} do not partition {k}")]
    InconsistentSizes { k: u32, sizes: Vec<u32> },

    #[error("count overflows 64 bits")]
    Overflow,

    #[error("curve multiplicity is {found}, expected {expected}")]
    MultiplicityMismatch { expected: u32, found: u32 },

    #[error("pullback order {found} is not 4m = {expected}")]
    ContactNotFourM { expected: u32, found: String },

    #[error("property PS fails along the curve: balanced coefficient {0}")]
    PsViolatedAlongCurve(String),

    #[error("curve leaves the graph frame: last coordinate is not identically zero")]
    NotInGraphFrame,

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("contradictory evidence: {0}")]
    ContradictoryEvidence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("line {line}: {msg}")]
    Input { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
