use crate::error::{Error, Result};
use crate::model::params::LayerParams;
use crate::model::{ModelConfig, ModelParams};
use crate::treebank::Vocabulary;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

const MAGIC: &[u8; 8] = b"ONLABCK1";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab_tsv: String,
    seed: u64,
    val_perplexity: f64,
}

/// A trained model snapshot: config, parameters, vocabulary, and the
/// validation perplexity it was selected on. Serialized as a versioned,
/// checksummed binary with named row-major f32 tensors.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub vocab: Vocabulary,
    pub seed: u64,
    pub val_perplexity: f64,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        let header = Header {
            config: self.config.clone(),
            vocab_tsv: self.vocab.to_tsv(),
            seed: self.seed,
            val_perplexity: self.val_perplexity,
        };
        let header_json = serde_json::to_vec(&header)?;
        buf.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
        buf.extend_from_slice(&header_json);

        let tensors = self.params.tensors();
        buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (name, data, shape) in tensors {
            buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
            for d in shape {
                buf.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in data {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        let checksum = Sha256::digest(&buf);
        buf.extend_from_slice(&checksum);
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < 32 {
            return Err(Error::Checkpoint("file too short".into()));
        }
        let body_len = bytes.len() - 32;
        let expected = Sha256::digest(&bytes[..body_len]);
        if expected.as_slice() != &bytes[body_len..] {
            return Err(Error::Checkpoint("checksum mismatch".into()));
        }
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        let header_len = r.u64()? as usize;
        let header: Header = serde_json::from_slice(r.take(header_len)?)?;
        header.config.validate()?;
        let vocab = Vocabulary::from_tsv(&header.vocab_tsv)?;

        let n_tensors = r.u32()? as usize;
        let mut tensors: Vec<(String, Vec<usize>, Vec<f64>)> = Vec::with_capacity(n_tensors);
        for _ in 0..n_tensors {
            let name_len = r.u32()? as usize;
            let name = String::from_utf8_lossy(r.take(name_len)?).into_owned();
            let ndim = r.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                shape.push(r.u64()? as usize);
            }
            let count: usize = shape.iter().product();
            let mut data = Vec::with_capacity(count);
            for _ in 0..count {
                data.push(r.f32()? as f64);
            }
            tensors.push((name, shape, data));
        }
        let params = rebuild_params(&header.config, &tensors)?;
        Ok(Checkpoint {
            config: header.config,
            params,
            vocab,
            seed: header.seed,
            val_perplexity: header.val_perplexity,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let tmp = path.with_extension("ckpt.tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}

fn rebuild_params(
    config: &ModelConfig,
    tensors: &[(String, Vec<usize>, Vec<f64>)],
) -> Result<ModelParams> {
    let find = |name: &str| -> Result<&(String, Vec<usize>, Vec<f64>)> {
        tensors
            .iter()
            .find(|(n, _, _)| n == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))
    };
    let arr2 = |name: &str| -> Result<Array2<f64>> {
        let (_, shape, data) = find(name)?;
        if shape.len() != 2 {
            return Err(Error::Checkpoint(format!("tensor {name} is not 2-d")));
        }
        Array2::from_shape_vec((shape[0], shape[1]), data.clone())
            .map_err(|e| Error::Checkpoint(format!("tensor {name}: {e}")))
    };
    let arr1 = |name: &str| -> Result<Array1<f64>> {
        let (_, shape, data) = find(name)?;
        if shape.len() != 1 {
            return Err(Error::Checkpoint(format!("tensor {name} is not 1-d")));
        }
        Ok(Array1::from_vec(data.clone()))
    };

    let embedding = arr2("embedding")?;
    let mut layers = Vec::with_capacity(config.num_layers);
    for l in 0..config.num_layers {
        layers.push(LayerParams {
            w: arr2(&format!("layer{l}.w"))?,
            u: arr2(&format!("layer{l}.u"))?,
            b: arr1(&format!("layer{l}.b"))?,
        });
    }
    let out_weight = if config.tie_embeddings { None } else { Some(arr2("out.weight")?) };
    let out_bias = arr1("out.bias")?;
    Ok(ModelParams { embedding, layers, out_weight, out_bias })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_checkpoint() -> Checkpoint {
        let vocab = Vocabulary::build(vec![vec!["a", "b", "a", "c"]], 10, 1).unwrap();
        let config = ModelConfig {
            num_layers: 2,
            embed_dim: 6,
            hidden_dims: vec![8, 6],
            chunk_factor: 2,
            dropout_input: 0.1,
            dropout_recurrent: 0.2,
            dropout_output: 0.1,
            vocab_size: vocab.len(),
            tie_embeddings: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let params = ModelParams::init(&config, &mut rng);
        Checkpoint { config, params, vocab, seed: 42, val_perplexity: 17.25 }
    }

    #[test]
    fn roundtrip_preserves_everything_at_f32_precision() {
        let ck = sample_checkpoint();
        let bytes = ck.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.seed, 42);
        assert_eq!(back.val_perplexity, 17.25);
        assert_eq!(back.vocab.len(), ck.vocab.len());
        for (a, b) in ck.params.flatten().iter().zip(back.params.flatten()) {
            assert_eq!(*a as f32 as f64, b);
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let ck = sample_checkpoint();
        let mut bytes = ck.to_bytes().unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn bad_magic_rejected() {
        let ck = sample_checkpoint();
        let mut bytes = ck.to_bytes().unwrap();
        bytes[0] = b'X';
        // checksum now also fails, either error is fine
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn serialization_is_deterministic() {
        let ck = sample_checkpoint();
        assert_eq!(ck.to_bytes().unwrap(), ck.to_bytes().unwrap());
    }
}
