use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("real normed division algebras have dimension 1, 2 or 4, got {0}")]
    UnsupportedRealDim(usize),
    #[error("defining polynomial {0:?} is reducible mod {1}")]
    ReduciblePoly(Vec<u64>, u64),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("element is too close to zero to invert at this precision")]
    DivisionByNegligible,
    #[error("p-adic quotient is not integral (numerator valuation {num} < denominator valuation {den})")]
    NonIntegral { num: u32, den: u32 },
    #[error("scale exponent {k} outside 0..={m}")]
    ScaleOutOfRange { k: i64, m: u32 },
    #[error("operation needs a nonempty set")]
    EmptyInput,
    #[error("operands live in different algebras")]
    AlgebraMismatch,
    #[error("operands have different scales ({0} vs {1})")]
    ScaleMismatch(u32, u32),
    #[error("budget exceeded at {stage}: {size} > cap {cap}")]
    BudgetExceeded { stage: String, size: u128, cap: u128 },
    #[error("no pair with |c-d| above the threshold")]
    NoAdmissiblePairs,
    #[error("linear map is singular at this precision")]
    SingularMap,
    #[error("greedy escape stalled: reached span of dimension {reached}, best volume {volume}")]
    SubAlgebraTrapped { reached: usize, volume: f64 },
    #[error("operation only defined over the reals")]
    NotRealBase,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("parameter out of range: {0}")]
    RangeError(String),
    #[error("random set generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error("input does not avoid sub-algebras at C = {0}")]
    TrappedInput(f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn budget(stage: impl Into<String>, size: impl Into<u128>, cap: impl Into<u128>) -> Self {
        Error::BudgetExceeded {
            stage: stage.into(),
            size: size.into(),
            cap: cap.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
