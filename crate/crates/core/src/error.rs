use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live in different variable registries")]
    RegistryMismatch,
    #[error("undeclared name `{0}`")]
    UndeclaredName(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("name `{0}` declared twice")]
    DuplicateName(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("{0}")]
    InvalidInput(String),

    #[error("singular linear system ({0}); the exponents may be non-generic")]
    SingularSystem(String),
    #[error("polynomials are not coprime: {0}")]
    NotCoprime(String),
    #[error("critical ideal is not zero-dimensional")]
    NotZeroDimensional,
    #[error("connection matrix entry ({row},{col}) has a higher-order pole in {var}: {entry}")]
    HigherPoleConnection {
        var: String,
        row: usize,
        col: usize,
        entry: String,
    },
    #[error(
        "degenerate fibration in {var}: det numerator has degree {found}, expected {expected}; try `{suggestion}`"
    )]
    DegenerateFibration {
        var: String,
        found: usize,
        expected: usize,
        suggestion: String,
    },
    #[error("non-generic input: {0}")]
    GenericityError(String),
    #[error("pole reduction did not terminate after {0} passes")]
    ReductionLimit(usize),

    #[error("polynomial roots are clustered (separation {0:e})")]
    RootClustering(f64),
    #[error("numeric paths disagree: relative error {rel_err:e} exceeds {tolerance:e}")]
    ToleranceExceeded { rel_err: f64, tolerance: f64 },
    #[error("singular change of variables in Baikov setup")]
    SingularCMatrix,

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_level(self, level: usize) -> Error {
        match self {
            e @ Error::AtLevel { .. } => e,
            e => Error::AtLevel {
                level,
                source: Box::new(e),
            },
        }
    }

    /// The error with any level annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLevel { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_assumption_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::HigherPoleConnection { .. }
                | Error::DegenerateFibration { .. }
                | Error::NotZeroDimensional
        )
    }

    pub fn is_genericity_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::SingularSystem(_)
                | Error::GenericityError(_)
                | Error::NotCoprime(_)
                | Error::ReductionLimit(_)
        )
    }
}
