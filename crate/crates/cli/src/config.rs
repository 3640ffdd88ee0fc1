//! Line-oriented `key = value` configuration with `[section]` headers.
//! Unknown keys are errors so typos cannot silently fall back to defaults.

use anyhow::{bail, Context, Result};
use onlab_core::model::ModelConfig;
use onlab_core::training::TrainConfig;
use serde::{Deserialize, Serialize};

/// Evaluation options threaded through `eval` and `report`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalSettings {
    pub min_count: usize,
    pub sbar_sample: usize,
    pub sbar_seed: u64,
    pub micro: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings { min_count: 5, sbar_sample: 100, sbar_seed: 1, micro: false }
    }
}

/// Resolved configuration for a run: model, training, and evaluation blocks.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Settings {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub eval: EvalSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            model: ModelConfig::desk(0),
            train: TrainConfig::desk(0),
            eval: EvalSettings::default(),
        }
    }
}

impl Settings {
    /// Parse the textual config format. Later assignments win; missing keys
    /// keep their defaults. `vocab_size` is resolved at train time from the
    /// ingested vocabulary, so it is not a config key.
    pub fn parse(text: &str) -> Result<Settings> {
        let mut s = Settings::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .with_context(|| format!("line {}: unterminated section header", lineno + 1))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            s.set(&section, key, value)
                .with_context(|| format!("line {}: `{key} = {value}`", lineno + 1))?;
        }
        Ok(s)
    }

    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match section {
            "model" => self.set_model(key, value),
            "train" => self.set_train(key, value),
            "eval" => self.set_eval(key, value),
            other => bail!("unknown section [{other}] (expected [model], [train], or [eval])"),
        }
    }

    fn set_model(&mut self, key: &str, value: &str) -> Result<()> {
        let m = &mut self.model;
        match key {
            "num_layers" => m.num_layers = value.parse()?,
            "embed_dim" => m.embed_dim = value.parse()?,
            "hidden_dims" => {
                m.hidden_dims = value
                    .split(',')
                    .map(|v| v.trim().parse::<usize>().map_err(anyhow::Error::from))
                    .collect::<Result<_>>()?
            }
            "chunk_factor" => m.chunk_factor = value.parse()?,
            "dropout_input" => m.dropout_input = value.parse()?,
            "dropout_recurrent" => m.dropout_recurrent = value.parse()?,
            "dropout_output" => m.dropout_output = value.parse()?,
            "tie_embeddings" => m.tie_embeddings = parse_bool(value)?,
            other => bail!("unknown [model] key `{other}`"),
        }
        Ok(())
    }

    fn set_train(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "epochs" => t.epochs = value.parse()?,
            "batch_size" => t.batch_size = value.parse()?,
            "bptt_length" => t.bptt_length = value.parse()?,
            "learning_rate" => t.learning_rate = value.parse()?,
            "lr_decay" => t.lr_decay = value.parse()?,
            "patience" => t.patience = value.parse()?,
            "clip_norm" => t.clip_norm = value.parse()?,
            "weight_decay" => t.weight_decay = value.parse()?,
            other => bail!("unknown [train] key `{other}`"),
        }
        Ok(())
    }

    fn set_eval(&mut self, key: &str, value: &str) -> Result<()> {
        let e = &mut self.eval;
        match key {
            "min_count" => e.min_count = value.parse()?,
            "sbar_sample" => e.sbar_sample = value.parse()?,
            "sbar_seed" => e.sbar_seed = value.parse()?,
            "micro" => e.micro = parse_bool(value)?,
            other => bail!("unknown [eval] key `{other}`"),
        }
        Ok(())
    }

    /// Render the configuration in the same format `parse` accepts.
    pub fn dump(&self) -> String {
        let m = &self.model;
        let t = &self.train;
        let e = &self.eval;
        let dims: Vec<String> = m.hidden_dims.iter().map(|d| d.to_string()).collect();
        format!(
            "[model]\n\
             num_layers = {}\n\
             embed_dim = {}\n\
             hidden_dims = {}\n\
             chunk_factor = {}\n\
             dropout_input = {}\n\
             dropout_recurrent = {}\n\
             dropout_output = {}\n\
             tie_embeddings = {}\n\
             \n\
             [train]\n\
             epochs = {}\n\
             batch_size = {}\n\
             bptt_length = {}\n\
             learning_rate = {}\n\
             lr_decay = {}\n\
             patience = {}\n\
             clip_norm = {}\n\
             weight_decay = {}\n\
             \n\
             [eval]\n\
             min_count = {}\n\
             sbar_sample = {}\n\
             sbar_seed = {}\n\
             micro = {}\n",
            m.num_layers,
            m.embed_dim,
            dims.join(","),
            m.chunk_factor,
            m.dropout_input,
            m.dropout_recurrent,
            m.dropout_output,
            m.tie_embeddings,
            t.epochs,
            t.batch_size,
            t.bptt_length,
            t.learning_rate,
            t.lr_decay,
            t.patience,
            t.clip_norm,
            t.weight_decay,
            e.min_count,
            e.sbar_sample,
            e.sbar_seed,
            e.micro,
        )
    }
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        other => bail!("expected a boolean, got `{other}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_parse_roundtrip() {
        let s = Settings::default();
        let parsed = Settings::parse(&s.dump()).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn overrides_and_comments() {
        let text = "# comment\n[train]\nepochs = 3 # trailing\n[model]\nhidden_dims = 32, 32\n";
        let s = Settings::parse(text).unwrap();
        assert_eq!(s.train.epochs, 3);
        assert_eq!(s.model.hidden_dims, vec![32, 32]);
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(Settings::parse("[train]\nepochz = 3\n").is_err());
        assert!(Settings::parse("[nope]\nepochs = 3\n").is_err());
        assert!(Settings::parse("epochs = 3\n").is_err());
    }
}
