//! Deterministic language-model training: truncated backpropagation through
//! time over a concatenated sentence stream, SGD with no-improvement
//! learning-rate decay, best-validation checkpointing, and seeded restarts.

use crate::error::{Error, Result};
use crate::model::{
    stream_nll, train_step, Checkpoint, DropoutMasks, LayerState, ModelConfig, ModelParams,
};
use crate::treebank::{CorpusSplit, Vocabulary, EOS_ID};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub bptt_length: usize,
    pub learning_rate: f64,
    /// Divide the learning rate by `lr_decay` after `patience` epochs
    /// without validation improvement.
    pub lr_decay: f64,
    pub patience: usize,
    pub clip_norm: f64,
    pub weight_decay: f64,
}

impl TrainConfig {
    pub fn desk(seed: u64) -> Self {
        TrainConfig {
            seed,
            epochs: 10,
            batch_size: 16,
            bptt_length: 35,
            learning_rate: 2.0,
            lr_decay: 4.0,
            patience: 2,
            clip_norm: 0.25,
            weight_decay: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.bptt_length == 0 {
            return Err(Error::Config("batch_size and bptt_length must be >= 1".into()));
        }
        if self.clip_norm <= 0.0 {
            return Err(Error::Config("clip_norm must be positive".into()));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::Config("weight_decay must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_perplexity: f64,
    pub learning_rate: f64,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    /// Set when training aborted on a non-finite loss; the checkpoint then
    /// holds the last good parameters.
    pub diverged: bool,
}

impl TrainLog {
    /// Wall time is deliberately left out so reruns of an unchanged
    /// configuration produce byte-identical artifacts.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tval_perplexity\tlearning_rate\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\n",
                e.epoch, e.train_loss, e.val_perplexity, e.learning_rate
            ));
        }
        out
    }
}

/// Sentence ids concatenated into one stream, each sentence terminated by
/// the end-of-sentence id.
pub fn token_stream(split: &CorpusSplit) -> Vec<usize> {
    let mut stream = Vec::new();
    for (ids, _) in &split.sentences {
        stream.extend_from_slice(ids);
        stream.push(EOS_ID);
    }
    stream
}

/// Perplexity of a checkpoint on a split: exp of the token-mean negative
/// log-likelihood, end-of-sentence tokens included. A leading EOS primes the
/// stream so every token is predicted.
pub fn perplexity(checkpoint: &Checkpoint, split: &CorpusSplit) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut stream = vec![EOS_ID];
    stream.extend(token_stream(split));
    let (total, count) = stream_nll(&checkpoint.params, &checkpoint.config, &stream, 64)?;
    Ok((total / count as f64).exp())
}

fn eval_perplexity(params: &ModelParams, config: &ModelConfig, dev_stream: &[usize]) -> Result<f64> {
    let (total, count) = stream_nll(params, config, dev_stream, 64)?;
    Ok((total / count as f64).exp())
}

/// Train a model on the train split, selecting on dev perplexity per epoch.
/// Fully reproducible from the seed; reads token ids only, never gold trees.
pub fn train(
    train_split: &CorpusSplit,
    dev_split: &CorpusSplit,
    vocab: &Vocabulary,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<(Checkpoint, TrainLog)> {
    model_config.validate()?;
    train_config.validate()?;
    if train_split.is_empty() || dev_split.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let stream = token_stream(train_split);
    let mut dev_stream = vec![EOS_ID];
    dev_stream.extend(token_stream(dev_split));

    let batch = train_config.batch_size;
    let lane_len = stream.len() / batch;
    if lane_len < 2 {
        return Err(Error::Config("corpus too small for this batch size".into()));
    }
    let lanes: Vec<&[usize]> =
        (0..batch).map(|l| &stream[l * lane_len..(l + 1) * lane_len]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);
    let mut params = ModelParams::init(model_config, &mut rng);
    let mut lr = train_config.learning_rate;
    let mut log = TrainLog::default();

    let mut best_ppl = eval_perplexity(&params, model_config, &dev_stream)?;
    let mut best_params = params.clone();
    let mut stale_epochs = 0usize;

    'epochs: for epoch in 1..=train_config.epochs {
        let started = Instant::now();
        let mut states: Vec<LayerState> = (0..model_config.num_layers)
            .map(|l| LayerState::zeros(batch, model_config.hidden_dims[l]))
            .collect();
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        let mut pos = 0usize;
        while pos + 1 < lane_len {
            let steps = train_config.bptt_length.min(lane_len - 1 - pos);
            let inputs = Array2::from_shape_fn((batch, steps), |(b, t)| lanes[b][pos + t]);
            let targets = Array2::from_shape_fn((batch, steps), |(b, t)| lanes[b][pos + t + 1]);
            let masks = DropoutMasks::sample(model_config, batch, &mut rng);
            let step = train_step(&params, model_config, &inputs, &targets, &states, Some(&masks));
            let (loss, mut grads, next_states) = match step {
                Ok(v) => v,
                Err(Error::Numerical { .. }) => {
                    log.diverged = true;
                    break 'epochs;
                }
                Err(e) => return Err(e),
            };
            if train_config.weight_decay > 0.0 {
                grads.axpy(train_config.weight_decay, &params);
            }
            let norm = grads.grad_norm();
            if norm > train_config.clip_norm {
                grads.scale(train_config.clip_norm / norm);
            }
            params.axpy(-lr, &grads);
            if !params.all_finite() {
                log.diverged = true;
                break 'epochs;
            }
            states = next_states;
            loss_sum += loss;
            loss_count += 1;
            pos += steps;
        }

        let val_ppl = eval_perplexity(&params, model_config, &dev_stream)?;
        log.epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / loss_count.max(1) as f64,
            val_perplexity: val_ppl,
            learning_rate: lr,
            wall_secs: started.elapsed().as_secs_f64(),
        });

        if val_ppl < best_ppl {
            best_ppl = val_ppl;
            best_params = params.clone();
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= train_config.patience {
                lr /= train_config.lr_decay;
                stale_epochs = 0;
            }
        }
    }

    let checkpoint = Checkpoint {
        config: model_config.clone(),
        params: best_params,
        vocab: vocab.clone(),
        seed: train_config.seed,
        val_perplexity: best_ppl,
    };
    Ok((checkpoint, log))
}

/// Train `n` independent restarts with seeds base..base+n-1, in parallel.
/// Per-run failures are isolated; successful runs are kept.
pub fn run_restarts(
    n: usize,
    base_seed: u64,
    train_split: &CorpusSplit,
    dev_split: &CorpusSplit,
    vocab: &Vocabulary,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Vec<(u64, Result<(Checkpoint, TrainLog)>)> {
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed + k;
            let cfg = TrainConfig { seed, ..train_config.clone() };
            (seed, train(train_split, dev_split, vocab, model_config, &cfg))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{normalize_tree, parse_ptb, NormalizationPolicy, SplitName};

    fn toy_corpus() -> (CorpusSplit, CorpusSplit, Vocabulary) {
        let sources: Vec<String> = (0..40)
            .map(|i| match i % 4 {
                0 => "(S (NP (D the) (N cat)) (VP (V sees) (NP (D the) (N dog))))",
                1 => "(S (NP (D the) (N dog)) (VP (V sees) (NP (D the) (N cat))))",
                2 => "(S (NP (D a) (N bird)) (VP (V sings)))",
                _ => "(S (NP (D the) (N bird)) (VP (V sees) (NP (D a) (N cat))))",
            }
            .to_string())
            .collect();
        let trees: Vec<_> = sources
            .iter()
            .map(|s| {
                normalize_tree(&parse_ptb(s).unwrap().remove(0), &NormalizationPolicy::default())
                    .unwrap()
            })
            .collect();
        let vocab = Vocabulary::build(
            trees.iter().map(|t| {
                t.tokens().into_iter().map(|tok| tok.surface.as_str()).collect::<Vec<_>>()
            }),
            100,
            1,
        )
        .unwrap();
        let dev_trees = trees[..8].to_vec();
        let train = CorpusSplit::from_trees(SplitName::Train, trees, &vocab);
        let dev = CorpusSplit::from_trees(SplitName::Dev, dev_trees, &vocab);
        (train, dev, vocab)
    }

    fn tiny_model(vocab: usize) -> ModelConfig {
        ModelConfig {
            num_layers: 2,
            embed_dim: 12,
            hidden_dims: vec![12, 12],
            chunk_factor: 2,
            dropout_input: 0.05,
            dropout_recurrent: 0.05,
            dropout_output: 0.05,
            vocab_size: vocab,
            tie_embeddings: true,
        }
    }

    fn tiny_train(seed: u64, epochs: usize) -> TrainConfig {
        TrainConfig {
            seed,
            epochs,
            batch_size: 4,
            bptt_length: 10,
            learning_rate: 1.0,
            lr_decay: 4.0,
            patience: 1,
            clip_norm: 0.25,
            weight_decay: 0.0,
        }
    }

    #[test]
    fn same_seed_same_checkpoint_and_log() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let tc = tiny_train(3, 2);
        let (ck1, log1) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        let (ck2, log2) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        assert_eq!(ck1.to_bytes().unwrap(), ck2.to_bytes().unwrap());
        let strip = |l: &TrainLog| -> Vec<(usize, f64, f64, f64)> {
            l.epochs.iter().map(|e| (e.epoch, e.train_loss, e.val_perplexity, e.learning_rate)).collect()
        };
        assert_eq!(strip(&log1), strip(&log2));
    }

    #[test]
    fn zero_epochs_returns_initialized_checkpoint() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let tc = tiny_train(1, 0);
        let (ck, log) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        assert!(log.epochs.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let expected = ModelParams::init(&mc, &mut rng);
        assert_eq!(ck.params, expected);
    }

    #[test]
    fn best_checkpoint_not_worse_than_init() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let (ck, _) = train(&train_s, &dev_s, &vocab, &mc, &tiny_train(7, 3)).unwrap();
        let init_ck = {
            let (ck0, _) = train(&train_s, &dev_s, &vocab, &mc, &tiny_train(7, 0)).unwrap();
            ck0
        };
        let trained = perplexity(&ck, &dev_s).unwrap();
        let init = perplexity(&init_ck, &dev_s).unwrap();
        assert!(trained <= init + 1e-9, "trained {trained} vs init {init}");
    }

    #[test]
    fn training_ignores_tree_structure() {
        let (train_s, dev_s, vocab) = toy_corpus();
        // Replace every gold tree with a flat one; token ids unchanged.
        let flatten = |s: &CorpusSplit| CorpusSplit {
            name: s.name,
            sentences: s
                .sentences
                .iter()
                .map(|(ids, t)| {
                    let flat = parse_ptb(&format!(
                        "(S {})",
                        t.tokens()
                            .iter()
                            .map(|tok| format!("(X {})", tok.surface))
                            .collect::<Vec<_>>()
                            .join(" ")
                    ))
                    .unwrap()
                    .remove(0);
                    (ids.clone(), flat)
                })
                .collect(),
        };
        let mc = tiny_model(vocab.len());
        let tc = tiny_train(11, 2);
        let (ck1, _) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        let (ck2, _) =
            train(&flatten(&train_s), &flatten(&dev_s), &vocab, &mc, &tc).unwrap();
        assert_eq!(ck1.to_bytes().unwrap()[..100], ck2.to_bytes().unwrap()[..100]);
        assert_eq!(ck1.params, ck2.params);
    }

    #[test]
    fn perplexity_of_uniform_model_is_vocab_size() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let tc = tiny_train(2, 0);
        let (mut ck, _) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        ck.params.embedding.fill(0.0); // tied head: uniform logits
        ck.params.out_bias.fill(0.0);
        let ppl = perplexity(&ck, &dev_s).unwrap();
        assert!((ppl - vocab.len() as f64).abs() < 1e-6, "ppl {ppl}");
    }

    #[test]
    fn perplexity_is_deterministic_and_positive() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let (ck, _) = train(&train_s, &dev_s, &vocab, &mc, &tiny_train(5, 1)).unwrap();
        let a = perplexity(&ck, &dev_s).unwrap();
        let b = perplexity(&ck, &dev_s).unwrap();
        assert_eq!(a, b);
        assert!(a > 1.0);
    }

    #[test]
    fn empty_split_perplexity_is_error() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let (ck, _) = train(&train_s, &dev_s, &vocab, &mc, &tiny_train(5, 0)).unwrap();
        let empty = CorpusSplit { name: SplitName::Test, sentences: vec![] };
        assert!(perplexity(&ck, &empty).is_err());
    }

    #[test]
    fn restarts_are_distinct_and_reproducible() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let tc = tiny_train(0, 1);
        let runs1 = run_restarts(2, 100, &train_s, &dev_s, &vocab, &mc, &tc);
        let runs2 = run_restarts(2, 100, &train_s, &dev_s, &vocab, &mc, &tc);
        let ck = |runs: &[(u64, Result<(Checkpoint, TrainLog)>)], i: usize| {
            runs[i].1.as_ref().unwrap().0.to_bytes().unwrap()
        };
        assert_eq!(ck(&runs1, 0), ck(&runs2, 0));
        assert_eq!(ck(&runs1, 1), ck(&runs2, 1));
        assert_ne!(ck(&runs1, 0), ck(&runs1, 1));
    }

    #[test]
    fn clip_threshold_above_max_norm_changes_nothing() {
        let (train_s, dev_s, vocab) = toy_corpus();
        let mc = tiny_model(vocab.len());
        let mut tc = tiny_train(13, 1);
        tc.clip_norm = 1e9; // far above any observed gradient norm
        let (ck_a, _) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        tc.clip_norm = 2e9;
        let (ck_b, _) = train(&train_s, &dev_s, &vocab, &mc, &tc).unwrap();
        assert_eq!(ck_a.params, ck_b.params);
    }
}
