use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    TreebankParse { offset: usize, message: String },

    #[error("degenerate sentence: empty yield after normalization")]
    DegenerateSentence,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenIdOutOfRange { id: usize, vocab_size: usize },

    #[error("numerical failure: {context}")]
    Numerical { context: String },

    #[error("layer index {layer} out of range (model has {num_layers} layers)")]
    LayerOutOfRange { layer: usize, num_layers: usize },

    #[error("corpus misalignment at sentence {sentence}: {message}")]
    Misalignment { sentence: usize, message: String },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
