use crate::model::ModelConfig;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Weights of one recurrent layer. `w` and `u` stack the four standard gates
/// and the two master gates along rows: [f, i, o, candidate, master_f, master_i].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w: Array2<f64>, // gate_rows x input_dim
    pub u: Array2<f64>, // gate_rows x hidden_dim
    pub b: Array1<f64>, // gate_rows
}

/// All trainable tensors of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub embedding: Array2<f64>, // vocab x embed
    pub layers: Vec<LayerParams>,
    /// Output projection, absent when tied to the embedding.
    pub out_weight: Option<Array2<f64>>, // vocab x hidden_last
    pub out_bias: Array1<f64>,           // vocab
}

impl ModelParams {
    /// Uniform init in [-scale, scale] per tensor, scale = 1/sqrt(fan_in).
    pub fn init(config: &ModelConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut uniform = |rows: usize, cols: usize, fan_in: usize| -> Array2<f64> {
            let scale = 1.0 / (fan_in as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
        };
        let embedding = uniform(config.vocab_size, config.embed_dim, config.embed_dim);
        let mut layers = Vec::with_capacity(config.num_layers);
        for l in 0..config.num_layers {
            let rows = config.gate_rows(l);
            let input_dim = config.input_dim(l);
            let hidden = config.hidden_dims[l];
            let w = uniform(rows, input_dim, input_dim);
            let u = uniform(rows, hidden, hidden);
            let mut b = Array1::zeros(rows);
            // Standard-forget-gate bias of 1 helps early gradient flow.
            b.slice_mut(ndarray::s![..hidden]).fill(1.0);
            layers.push(LayerParams { w, u, b });
        }
        let out_weight = if config.tie_embeddings {
            None
        } else {
            Some(uniform(config.vocab_size, *config.hidden_dims.last().unwrap(), *config.hidden_dims.last().unwrap()))
        };
        let out_bias = Array1::zeros(config.vocab_size);
        ModelParams { embedding, layers, out_weight, out_bias }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            embedding: Array2::zeros(self.embedding.raw_dim()),
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    w: Array2::zeros(l.w.raw_dim()),
                    u: Array2::zeros(l.u.raw_dim()),
                    b: Array1::zeros(l.b.raw_dim()),
                })
                .collect(),
            out_weight: self.out_weight.as_ref().map(|w| Array2::zeros(w.raw_dim())),
            out_bias: Array1::zeros(self.out_bias.raw_dim()),
        }
    }

    /// Named tensors in a fixed order, flattened views for generic traversal.
    pub fn tensors(&self) -> Vec<(String, Vec<f64>, Vec<usize>)> {
        let mut out = Vec::new();
        let push2 = |out: &mut Vec<(String, Vec<f64>, Vec<usize>)>, name: String, a: &Array2<f64>| {
            out.push((name, a.iter().cloned().collect(), a.shape().to_vec()));
        };
        push2(&mut out, "embedding".into(), &self.embedding);
        for (i, l) in self.layers.iter().enumerate() {
            push2(&mut out, format!("layer{i}.w"), &l.w);
            push2(&mut out, format!("layer{i}.u"), &l.u);
            out.push((format!("layer{i}.b"), l.b.to_vec(), vec![l.b.len()]));
        }
        if let Some(w) = &self.out_weight {
            push2(&mut out, "out.weight".into(), w);
        }
        out.push(("out.bias".into(), self.out_bias.to_vec(), vec![self.out_bias.len()]));
        out
    }

    /// Flatten every parameter into one vector (fixed tensor order).
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        self.for_each(|x| v.push(x));
        v
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        self.for_each_mut(|x| *x = *it.next().expect("flat vector too short"));
        assert!(it.next().is_none(), "flat vector too long");
    }

    pub fn num_params(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }

    fn for_each(&self, mut f: impl FnMut(f64)) {
        for &x in self.embedding.iter() {
            f(x);
        }
        for l in &self.layers {
            for &x in l.w.iter() {
                f(x);
            }
            for &x in l.u.iter() {
                f(x);
            }
            for &x in l.b.iter() {
                f(x);
            }
        }
        if let Some(w) = &self.out_weight {
            for &x in w.iter() {
                f(x);
            }
        }
        for &x in self.out_bias.iter() {
            f(x);
        }
    }

    fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for x in self.embedding.iter_mut() {
            f(x);
        }
        for l in &mut self.layers {
            for x in l.w.iter_mut() {
                f(x);
            }
            for x in l.u.iter_mut() {
                f(x);
            }
            for x in l.b.iter_mut() {
                f(x);
            }
        }
        if let Some(w) = &mut self.out_weight {
            for x in w.iter_mut() {
                f(x);
            }
        }
        for x in self.out_bias.iter_mut() {
            f(x);
        }
    }

    /// self += alpha * other, elementwise over every tensor.
    pub fn axpy(&mut self, alpha: f64, other: &ModelParams) {
        self.embedding.zip_mut_with(&other.embedding, |a, &b| *a += alpha * b);
        for (l, ol) in self.layers.iter_mut().zip(&other.layers) {
            l.w.zip_mut_with(&ol.w, |a, &b| *a += alpha * b);
            l.u.zip_mut_with(&ol.u, |a, &b| *a += alpha * b);
            l.b.zip_mut_with(&ol.b, |a, &b| *a += alpha * b);
        }
        if let (Some(w), Some(ow)) = (&mut self.out_weight, &other.out_weight) {
            w.zip_mut_with(ow, |a, &b| *a += alpha * b);
        }
        self.out_bias.zip_mut_with(&other.out_bias, |a, &b| *a += alpha * b);
    }

    /// Global L2 norm over every tensor.
    pub fn grad_norm(&self) -> f64 {
        let mut sq = 0.0;
        self.for_each(|x| sq += x * x);
        sq.sqrt()
    }

    pub fn scale(&mut self, alpha: f64) {
        self.for_each_mut(|x| *x *= alpha);
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = true;
        self.for_each(|x| ok &= x.is_finite());
        ok
    }
}
