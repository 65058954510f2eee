use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in `{field}`: expected {expected} entries, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("link {link} is not active in any feasible schedule")]
    NeverSchedulable { link: usize },

    #[error("{what} distribution of link {link} has zero mean")]
    ZeroMean { what: &'static str, link: usize },

    #[error("invalid {what} distribution for link {link}: {reason}")]
    InvalidDistribution {
        what: &'static str,
        link: usize,
        reason: String,
    },

    #[error("warmup ({warmup}) must be smaller than horizon ({horizon})")]
    WarmupTooLong { warmup: u64, horizon: u64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("topology must have at least one link")]
    EmptyTopology,

    #[error("{what} = {value} exceeds the enumeration guard of {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("conflict edge ({0}, {0}) is a self-loop")]
    SelfLoop(usize),

    #[error("conflict edge ({a}, {b}) references a link outside [0, {links})")]
    EdgeOutOfRange { a: usize, b: usize, links: usize },

    #[error("schedule set is invalid: {0}")]
    InvalidScheduleSet(String),

    #[error("round-robin is only defined on single-hop topologies")]
    RoundRobinUnsupported,

    #[error("no slots were counted after warmup")]
    NoCountedSlots,

    #[error("configurations differ beyond the policy: {0}")]
    ConfigMismatch(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),
}
