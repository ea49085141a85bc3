use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsingError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("node index {index} out of range for {p} nodes")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("exact enumeration over {p} nodes exceeds the cap of {cap}")]
    EnumerationCapExceeded { p: usize, cap: usize },

    #[error("node {node} is constant in the data, the unpenalized fit does not exist")]
    Separation { node: usize },

    #[error("column {column} is constant in the data, the unpenalized fit is not identified")]
    ConstantPredictor { column: usize },

    #[error("quadrature over {dims} latent dimensions is not supported (max {max}); use the closed-form Ising probability instead")]
    QuadratureDimension { dims: usize, max: usize },

    #[error("node {node}: {source}")]
    Node {
        node: usize,
        #[source]
        source: Box<IsingError>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<IsingError>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl IsingError {
    pub fn at_node(self, node: usize) -> Self {
        match self {
            e @ IsingError::Node { .. } => e,
            other => IsingError::Node {
                node,
                source: Box::new(other),
            },
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        IsingError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the failure is numerical (cap, separation, quadrature)
    /// rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            IsingError::EnumerationCapExceeded { .. }
            | IsingError::Separation { .. }
            | IsingError::ConstantPredictor { .. }
            | IsingError::QuadratureDimension { .. } => true,
            IsingError::Node { source, .. } | IsingError::Context { source, .. } => {
                source.is_numerical()
            }
            _ => false,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            IsingError::DimensionMismatch { .. } => "dimension_mismatch",
            IsingError::IndexOutOfRange { .. } => "index_out_of_range",
            IsingError::InvalidModel(_) => "invalid_model",
            IsingError::InvalidData(_) => "invalid_data",
            IsingError::InvalidConfig(_) => "invalid_config",
            IsingError::EnumerationCapExceeded { .. } => "enumeration_cap_exceeded",
            IsingError::Separation { .. } => "separation",
            IsingError::ConstantPredictor { .. } => "constant_predictor",
            IsingError::QuadratureDimension { .. } => "quadrature_dimension",
            IsingError::Node { source, .. } | IsingError::Context { source, .. } => source.kind(),
            IsingError::Io(_) => "io",
            IsingError::Csv(_) => "csv",
            IsingError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, IsingError>;
