use crate::error::{Error, Result};
use crate::model::cell::{step_backward, step_forward, LayerState, StepCache};
use crate::model::{MasterGateTrace, ModelConfig, ModelParams};
use ndarray::{Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Variational dropout masks: one draw per sequence (or BPTT window),
/// constant across timesteps. Inverted scaling, so inference needs no
/// rescaling.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    pub input: Array2<f64>,          // batch x embed
    pub recurrent: Vec<Array2<f64>>, // per layer, batch x hidden
    pub output: Array2<f64>,         // batch x hidden_last
}

impl DropoutMasks {
    pub fn sample(config: &ModelConfig, batch: usize, rng: &mut ChaCha8Rng) -> Self {
        let draw = |rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng| -> Array2<f64> {
            if p == 0.0 {
                Array2::ones((rows, cols))
            } else {
                let keep = 1.0 - p;
                Array2::from_shape_fn((rows, cols), |_| {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
            }
        };
        let input = draw(batch, config.embed_dim, config.dropout_input, rng);
        let recurrent = (0..config.num_layers)
            .map(|l| draw(batch, config.hidden_dims[l], config.dropout_recurrent, rng))
            .collect();
        let output =
            draw(batch, *config.hidden_dims.last().unwrap(), config.dropout_output, rng);
        DropoutMasks { input, recurrent, output }
    }
}

pub struct SequenceOutput {
    /// logits[t] predicts token t+1; shape seq_len x vocab.
    pub logits: Array2<f64>,
    pub trace: MasterGateTrace,
    pub final_states: Vec<LayerState>,
}

struct BatchForward {
    logits: Vec<Array2<f64>>,       // per t: batch x vocab
    caches: Vec<Vec<StepCache>>,    // [t][layer]
    h_out: Vec<Array2<f64>>,        // per t: output-dropout-masked top hidden
    final_states: Vec<LayerState>,
    trace: MasterGateTrace,
}

fn head_weight<'a>(params: &'a ModelParams) -> &'a Array2<f64> {
    params.out_weight.as_ref().unwrap_or(&params.embedding)
}

fn forward_batch(
    params: &ModelParams,
    config: &ModelConfig,
    inputs: &Array2<usize>,
    init: &[LayerState],
    masks: Option<&DropoutMasks>,
    keep_caches: bool,
) -> Result<BatchForward> {
    let (batch, steps) = inputs.dim();
    for &id in inputs.iter() {
        if id >= config.vocab_size {
            return Err(Error::TokenIdOutOfRange { id, vocab_size: config.vocab_size });
        }
    }
    let mut states: Vec<LayerState> = init.to_vec();
    let head = head_weight(params);
    let mut out = BatchForward {
        logits: Vec::with_capacity(steps),
        caches: Vec::new(),
        h_out: Vec::with_capacity(steps),
        final_states: Vec::new(),
        trace: MasterGateTrace::new(config.num_layers),
    };
    for t in 0..steps {
        let mut x = Array2::zeros((batch, config.embed_dim));
        for b in 0..batch {
            x.row_mut(b).assign(&params.embedding.row(inputs[[b, t]]));
        }
        if let Some(m) = masks {
            x *= &m.input;
        }
        let mut step_caches = Vec::with_capacity(config.num_layers);
        for l in 0..config.num_layers {
            let hidden = config.hidden_dims[l];
            let h_prev_m = match masks {
                Some(m) => &states[l].h * &m.recurrent[l],
                None => states[l].h.clone(),
            };
            let (state, cache) =
                step_forward(&params.layers[l], &x, &h_prev_m, &states[l].c, hidden, config.chunk_factor)
                    .map_err(|e| match e {
                        Error::Numerical { context } => Error::Numerical {
                            context: format!("{context} (layer {l}, timestep {t})"),
                        },
                        other => other,
                    })?;
            x = state.h.clone();
            if batch == 1 {
                out.trace.push(l, cache.mf.row(0).to_owned());
            }
            states[l] = state;
            step_caches.push(cache);
        }
        let mut h_out = x;
        if let Some(m) = masks {
            h_out *= &m.output;
        }
        let logits = h_out.dot(&head.t()) + &params.out_bias;
        out.logits.push(logits);
        out.h_out.push(h_out);
        if keep_caches {
            out.caches.push(step_caches);
        }
    }
    out.final_states = states;
    Ok(out)
}

/// Run the model over one token sequence in inference mode (pass `None` for
/// `masks`): returns next-token logits, the master-gate trace of every layer
/// and timestep, and the final states. Deterministic given params and states.
pub fn forward_sequence(
    ids: &[usize],
    params: &ModelParams,
    config: &ModelConfig,
    init: Option<Vec<LayerState>>,
    masks: Option<&DropoutMasks>,
) -> Result<SequenceOutput> {
    let init = init.unwrap_or_else(|| {
        (0..config.num_layers).map(|l| LayerState::zeros(1, config.hidden_dims[l])).collect()
    });
    let inputs = Array2::from_shape_fn((1, ids.len()), |(_, t)| ids[t]);
    let fwd = forward_batch(params, config, &inputs, &init, masks, false)?;
    let mut logits = Array2::zeros((ids.len(), config.vocab_size));
    for (t, l) in fwd.logits.iter().enumerate() {
        logits.row_mut(t).assign(&l.row(0));
    }
    Ok(SequenceOutput { logits, trace: fwd.trace, final_states: fwd.final_states })
}

/// Stable log-sum-exp over one row.
fn log_sum_exp(row: ndarray::ArrayView1<f64>) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|&z| (z - m).exp()).sum::<f64>().ln()
}

/// One training step over a batch of windows: cross-entropy loss (mean over
/// every prediction) and gradients for all parameters. States carry across
/// windows; gradients do not (truncated BPTT).
pub fn train_step(
    params: &ModelParams,
    config: &ModelConfig,
    inputs: &Array2<usize>,
    targets: &Array2<usize>,
    init: &[LayerState],
    masks: Option<&DropoutMasks>,
) -> Result<(f64, ModelParams, Vec<LayerState>)> {
    let (batch, steps) = inputs.dim();
    assert_eq!(targets.dim(), (batch, steps), "inputs/targets shape mismatch");
    let fwd = forward_batch(params, config, inputs, init, masks, true)?;
    let n_pred = (batch * steps) as f64;

    // Loss and dlogits per timestep.
    let mut loss = 0.0;
    let mut dlogits: Vec<Array2<f64>> = Vec::with_capacity(steps);
    for t in 0..steps {
        let l = &fwd.logits[t];
        let mut dl = Array2::zeros(l.raw_dim());
        for b in 0..batch {
            let row = l.row(b);
            let lse = log_sum_exp(row);
            let target = targets[[b, t]];
            if target >= config.vocab_size {
                return Err(Error::TokenIdOutOfRange { id: target, vocab_size: config.vocab_size });
            }
            loss += lse - row[target];
            let mut drow = dl.row_mut(b);
            for (k, &z) in row.iter().enumerate() {
                drow[k] = (z - lse).exp() / n_pred;
            }
            drow[target] -= 1.0 / n_pred;
        }
        dlogits.push(dl);
    }
    loss /= n_pred;
    if !loss.is_finite() {
        return Err(Error::Numerical { context: "non-finite loss".into() });
    }

    // Backward.
    let mut grads = params.zeros_like();
    let head = head_weight(params);
    let mut d_head: Array2<f64> = Array2::zeros(head.raw_dim());
    let top = config.num_layers - 1;

    // Head gradients and dL/dh_top per timestep.
    let mut dh_top: Vec<Array2<f64>> = Vec::with_capacity(steps);
    for t in 0..steps {
        let dl = &dlogits[t];
        d_head += &dl.t().dot(&fwd.h_out[t]);
        grads.out_bias += &dl.sum_axis(Axis(0));
        let mut dh = dl.dot(head);
        if let Some(m) = masks {
            dh *= &m.output;
        }
        dh_top.push(dh);
    }

    let mut dh_next: Vec<Array2<f64>> =
        (0..config.num_layers).map(|l| Array2::zeros((batch, config.hidden_dims[l]))).collect();
    let mut dc_next: Vec<Array2<f64>> =
        (0..config.num_layers).map(|l| Array2::zeros((batch, config.hidden_dims[l]))).collect();

    for t in (0..steps).rev() {
        let mut dx_above: Option<Array2<f64>> = None;
        for l in (0..config.num_layers).rev() {
            let incoming = if l == top {
                dh_top[t].clone()
            } else {
                dx_above.take().expect("layer above must produce dx")
            };
            let dh_total = &incoming + &dh_next[l];
            let cache = &fwd.caches[t][l];
            let (dx, dh_prev_m, dc_prev) = step_backward(
                &params.layers[l],
                &mut grads.layers[l],
                cache,
                &dh_total,
                &dc_next[l],
                config.hidden_dims[l],
                config.chunk_factor,
            );
            dh_next[l] = match masks {
                Some(m) => dh_prev_m * &m.recurrent[l],
                None => dh_prev_m,
            };
            dc_next[l] = dc_prev;
            if l == 0 {
                // Scatter into embedding rows, through the input mask.
                let dx_in = match masks {
                    Some(m) => dx * &m.input,
                    None => dx,
                };
                for b in 0..batch {
                    let id = inputs[[b, t]];
                    grads.embedding.row_mut(id).zip_mut_with(&dx_in.row(b), |a, &b| *a += b);
                }
            } else {
                dx_above = Some(dx);
            }
        }
    }

    match &mut grads.out_weight {
        Some(w) => *w += &d_head,
        None => grads.embedding += &d_head,
    }

    Ok((loss, grads, fwd.final_states))
}

/// Loss and gradients over a single sequence: the model reads tokens
/// 1..n-1 and is scored on predicting tokens 2..n. Pass `None` for `masks`
/// to disable dropout (deterministic; used by gradient checking).
pub fn loss_and_gradients(
    ids: &[usize],
    params: &ModelParams,
    config: &ModelConfig,
    masks: Option<&DropoutMasks>,
) -> Result<(f64, ModelParams)> {
    if ids.len() < 2 {
        return Err(Error::Config("loss needs a sequence of length >= 2".into()));
    }
    let n = ids.len() - 1;
    let inputs = Array2::from_shape_fn((1, n), |(_, t)| ids[t]);
    let targets = Array2::from_shape_fn((1, n), |(_, t)| ids[t + 1]);
    let init: Vec<LayerState> =
        (0..config.num_layers).map(|l| LayerState::zeros(1, config.hidden_dims[l])).collect();
    let (loss, grads, _) = train_step(params, config, &inputs, &targets, &init, masks)?;
    Ok((loss, grads))
}

/// Mean negative log-likelihood of `targets` under the model, streaming over
/// windows of `window` tokens with carried state. Returns (total_nll, count).
pub fn stream_nll(
    params: &ModelParams,
    config: &ModelConfig,
    stream: &[usize],
    window: usize,
) -> Result<(f64, usize)> {
    if stream.len() < 2 {
        return Err(Error::EmptyCorpus);
    }
    let mut states: Vec<LayerState> =
        (0..config.num_layers).map(|l| LayerState::zeros(1, config.hidden_dims[l])).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut pos = 0usize;
    while pos + 1 < stream.len() {
        let end = usize::min(pos + window, stream.len() - 1);
        let ids = &stream[pos..=end];
        let out = forward_sequence(ids, params, config, Some(states), None)?;
        for (t, &target) in ids[1..].iter().enumerate() {
            let row = out.logits.row(t);
            total += log_sum_exp(row) - row[target];
            count += 1;
        }
        states = out.final_states;
        pos = end;
    }
    Ok((total, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tiny_config(vocab: usize) -> ModelConfig {
        ModelConfig {
            num_layers: 2,
            embed_dim: 6,
            hidden_dims: vec![8, 6],
            chunk_factor: 2,
            dropout_input: 0.0,
            dropout_recurrent: 0.0,
            dropout_output: 0.0,
            vocab_size: vocab,
            tie_embeddings: true,
        }
    }

    #[test]
    fn length_one_input_gives_one_logit_row_and_trace() {
        let config = tiny_config(7);
        config.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = ModelParams::init(&config, &mut rng);
        let out = forward_sequence(&[4], &params, &config, None, None).unwrap();
        assert_eq!(out.logits.nrows(), 1);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace.num_layers(), 2);
    }

    #[test]
    fn inference_is_deterministic() {
        let config = tiny_config(9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = ModelParams::init(&config, &mut rng);
        let a = forward_sequence(&[1, 5, 2, 8], &params, &config, None, None).unwrap();
        let b = forward_sequence(&[1, 5, 2, 8], &params, &config, None, None).unwrap();
        assert_eq!(a.logits, b.logits);
    }

    #[test]
    fn logit_softmax_normalizes() {
        let config = tiny_config(9);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = ModelParams::init(&config, &mut rng);
        let out = forward_sequence(&[0, 3, 7], &params, &config, None, None).unwrap();
        for row in out.logits.rows() {
            let lse = log_sum_exp(row);
            let total: f64 = row.iter().map(|&z| (z - lse).exp()).sum();
            assert!((total - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn out_of_range_id_is_an_error() {
        let config = tiny_config(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = ModelParams::init(&config, &mut rng);
        assert!(forward_sequence(&[1, 5], &params, &config, None, None).is_err());
    }

    #[test]
    fn uniform_logits_loss_is_ln_v() {
        // Zero head + zero out_bias gives uniform logits regardless of state.
        let config = tiny_config(11);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params = ModelParams::init(&config, &mut rng);
        params.embedding.fill(0.0); // tied head
        let (loss, _) = loss_and_gradients(&[1, 2, 3, 4], &params, &config, None).unwrap();
        assert!((loss - (11.0_f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn absent_token_embedding_gradient_is_zero() {
        let mut config = tiny_config(10);
        config.tie_embeddings = false;
        config.hidden_dims = vec![8, 8];
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let params = ModelParams::init(&config, &mut rng);
        let (_, grads) = loss_and_gradients(&[1, 2, 3, 2], &params, &config, None).unwrap();
        // Token 7 never appears: its embedding row gets no gradient.
        assert!(grads.embedding.row(7).iter().all(|&g| g == 0.0));
        assert!(grads.embedding.row(1).iter().any(|&g| g != 0.0));
    }
}
