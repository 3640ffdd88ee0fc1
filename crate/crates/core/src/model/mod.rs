//! Stacked ON-LSTM language model: embedding, recurrent layers with
//! cumax-activated master gates, and a (optionally tied) softmax head.
//! Forward passes expose per-timestep master-forget-gate traces; gradients
//! are computed by hand-written backpropagation through time.

mod cell;
mod checkpoint;
mod config;
mod cumax;
mod params;
mod sequence;
mod trace;

pub use cell::{cell_step, LayerState};
pub use checkpoint::Checkpoint;
pub use config::ModelConfig;
pub use cumax::{cumax, cumax_backward_row, cumax_rows, softmax_rows};
pub use params::ModelParams;
pub use sequence::{
    forward_sequence, loss_and_gradients, stream_nll, train_step, DropoutMasks, SequenceOutput,
};
pub use trace::{height_from_gate, MasterGateTrace};
