use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub embed_dim: usize,
    /// Hidden size per layer; every entry must be divisible by `chunk_factor`.
    pub hidden_dims: Vec<usize>,
    /// Each master-gate value governs a contiguous block of `chunk_factor`
    /// cell dimensions; the master gates have length hidden/chunk_factor.
    pub chunk_factor: usize,
    pub dropout_input: f64,
    pub dropout_recurrent: f64,
    pub dropout_output: f64,
    pub vocab_size: usize,
    /// Share the embedding matrix with the output head.
    pub tie_embeddings: bool,
}

impl ModelConfig {
    /// Desk-scale preset: small enough to train on CPU in minutes.
    pub fn desk(vocab_size: usize) -> Self {
        ModelConfig {
            num_layers: 2,
            embed_dim: 64,
            hidden_dims: vec![64, 64],
            chunk_factor: 4,
            dropout_input: 0.1,
            dropout_recurrent: 0.1,
            dropout_output: 0.1,
            vocab_size,
            tie_embeddings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 || self.num_layers != self.hidden_dims.len() {
            return Err(Error::Config(format!(
                "num_layers {} must match hidden_dims len {}",
                self.num_layers,
                self.hidden_dims.len()
            )));
        }
        if self.embed_dim == 0 || self.vocab_size == 0 || self.chunk_factor == 0 {
            return Err(Error::Config("dimensions must be >= 1".into()));
        }
        for (i, &h) in self.hidden_dims.iter().enumerate() {
            if h == 0 || h % self.chunk_factor != 0 {
                return Err(Error::Config(format!(
                    "hidden_dims[{i}]={h} must be a positive multiple of chunk_factor {}",
                    self.chunk_factor
                )));
            }
        }
        for (name, p) in [
            ("input", self.dropout_input),
            ("recurrent", self.dropout_recurrent),
            ("output", self.dropout_output),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("{name} dropout {p} not in [0,1)")));
            }
        }
        if self.tie_embeddings && *self.hidden_dims.last().unwrap() != self.embed_dim {
            return Err(Error::Config(
                "tied embeddings require the last hidden_dim to equal embed_dim".into(),
            ));
        }
        Ok(())
    }

    /// Master-gate length of layer `layer`.
    pub fn master_dim(&self, layer: usize) -> usize {
        self.hidden_dims[layer] / self.chunk_factor
    }

    /// Input width of layer `layer` (embedding below layer 0).
    pub fn input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.embed_dim
        } else {
            self.hidden_dims[layer - 1]
        }
    }

    /// Rows of the stacked gate pre-activation: f, i, o, candidate (hidden
    /// each) plus the two master gates (master_dim each).
    pub fn gate_rows(&self, layer: usize) -> usize {
        4 * self.hidden_dims[layer] + 2 * self.master_dim(layer)
    }
}
