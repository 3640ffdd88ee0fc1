use crate::error::{Error, Result};
use crate::model::cumax::{cumax_backward_rows, cumax_rows};
use crate::model::params::LayerParams;
use ndarray::{s, Array1, Array2, Axis};

/// Hidden and cell vectors of one layer. Batched: rows are batch lanes.
#[derive(Debug, Clone)]
pub struct LayerState {
    pub h: Array2<f64>,
    pub c: Array2<f64>,
}

impl LayerState {
    pub fn zeros(batch: usize, hidden: usize) -> Self {
        LayerState { h: Array2::zeros((batch, hidden)), c: Array2::zeros((batch, hidden)) }
    }
}

/// Everything the backward pass needs from one (layer, timestep) forward step.
pub struct StepCache {
    pub x: Array2<f64>,        // layer input, post-dropout (batch x input_dim)
    pub h_prev_m: Array2<f64>, // masked previous hidden
    pub c_prev: Array2<f64>,
    pub f: Array2<f64>,
    pub i: Array2<f64>,
    pub o: Array2<f64>,
    pub g: Array2<f64>, // candidate values
    pub sf: Array2<f64>, // softmax behind the master forget gate
    pub si: Array2<f64>, // softmax behind the master input gate
    pub mf: Array2<f64>, // master forget gate (batch x master_dim)
    pub mi: Array2<f64>, // master input gate
    pub omega: Array2<f64>,
    pub fhat: Array2<f64>,
    pub ihat: Array2<f64>,
    pub tanh_c: Array2<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Repeat each master-gate column over its chunk of cell dimensions.
fn expand_chunks(m: &Array2<f64>, chunk: usize) -> Array2<f64> {
    let (batch, dm) = m.dim();
    Array2::from_shape_fn((batch, dm * chunk), |(b, d)| m[[b, d / chunk]])
}

/// Sum cell-dimension gradients back onto their master-gate chunk.
fn collapse_chunks(d: &Array2<f64>, chunk: usize) -> Array2<f64> {
    let (batch, dim) = d.dim();
    let dm = dim / chunk;
    let mut out = Array2::zeros((batch, dm));
    for b in 0..batch {
        for k in 0..dim {
            out[[b, k / chunk]] += d[[b, k]];
        }
    }
    out
}

/// One ON-LSTM cell step over a batch.
///
/// `x` is the layer input, `h_prev_m` the (dropout-masked) previous hidden
/// state, `c_prev` the previous cell state. Returns the new state and the
/// full cache. The cell update follows the ordered-neuron formulation:
/// master gates from cumax, overlap term omega = F * I mixing master and
/// standard gates.
pub fn step_forward(
    params: &LayerParams,
    x: &Array2<f64>,
    h_prev_m: &Array2<f64>,
    c_prev: &Array2<f64>,
    hidden: usize,
    chunk: usize,
) -> Result<(LayerState, StepCache)> {
    let dm = hidden / chunk;
    let pre = x.dot(&params.w.t()) + h_prev_m.dot(&params.u.t()) + &params.b;
    if pre.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical { context: "non-finite gate pre-activation".into() });
    }

    let f = pre.slice(s![.., 0..hidden]).mapv(sigmoid);
    let i = pre.slice(s![.., hidden..2 * hidden]).mapv(sigmoid);
    let o = pre.slice(s![.., 2 * hidden..3 * hidden]).mapv(sigmoid);
    let g = pre.slice(s![.., 3 * hidden..4 * hidden]).mapv(f64::tanh);
    let zmf = pre.slice(s![.., 4 * hidden..4 * hidden + dm]).to_owned();
    let zmi = pre.slice(s![.., 4 * hidden + dm..4 * hidden + 2 * dm]).to_owned();

    let (mf, sf) = cumax_rows(&zmf);
    let (cum_i, si) = cumax_rows(&zmi);
    let mi = cum_i.mapv(|v| 1.0 - v);

    let f_exp = expand_chunks(&mf, chunk);
    let i_exp = expand_chunks(&mi, chunk);
    let omega = &f_exp * &i_exp;
    let fhat = &f * &omega + &f_exp - &omega;
    let ihat = &i * &omega + &i_exp - &omega;
    let c = &fhat * c_prev + &ihat * &g;
    let tanh_c = c.mapv(f64::tanh);
    let h = &o * &tanh_c;

    let state = LayerState { h, c };
    let cache = StepCache {
        x: x.clone(),
        h_prev_m: h_prev_m.clone(),
        c_prev: c_prev.clone(),
        f,
        i,
        o,
        g,
        sf,
        si,
        mf,
        mi,
        omega,
        fhat,
        ihat,
        tanh_c,
    };
    Ok((state, cache))
}

/// Backward through one cell step. `dh`/`dc` are gradients w.r.t. this step's
/// outputs. Accumulates into the layer's weight gradients and returns
/// (dx, dh_prev_masked, dc_prev).
#[allow(clippy::too_many_arguments)]
pub fn step_backward(
    params: &LayerParams,
    grads: &mut LayerParams,
    cache: &StepCache,
    dh: &Array2<f64>,
    dc_next: &Array2<f64>,
    hidden: usize,
    chunk: usize,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let dm = hidden / chunk;
    let one_minus_t2 = cache.tanh_c.mapv(|t| 1.0 - t * t);
    let dc = dh * &cache.o * &one_minus_t2 + dc_next;
    let do_ = dh * &cache.tanh_c;

    let dfhat = &dc * &cache.c_prev;
    let dihat = &dc * &cache.g;
    let dg = &dc * &cache.ihat;
    let dc_prev = &dc * &cache.fhat;

    let df = &dfhat * &cache.omega;
    let di = &dihat * &cache.omega;
    let domega = &dfhat * &cache.f.mapv(|v| v - 1.0) + &dihat * &cache.i.mapv(|v| v - 1.0);

    let f_exp = expand_chunks(&cache.mf, chunk);
    let i_exp = expand_chunks(&cache.mi, chunk);
    let d_f_exp = &dfhat + &(&domega * &i_exp);
    let d_i_exp = &dihat + &(&domega * &f_exp);

    let dmf = collapse_chunks(&d_f_exp, chunk);
    let dmi = collapse_chunks(&d_i_exp, chunk);
    let dzmf = cumax_backward_rows(&dmf, &cache.sf);
    let dzmi = cumax_backward_rows(&dmi.mapv(|v| -v), &cache.si);

    let dzf = df * &cache.f * &cache.f.mapv(|v| 1.0 - v);
    let dzi = di * &cache.i * &cache.i.mapv(|v| 1.0 - v);
    let dzo = do_ * &cache.o * &cache.o.mapv(|v| 1.0 - v);
    let dzg = dg * &cache.g.mapv(|v| 1.0 - v * v);

    let batch = dh.nrows();
    let mut dpre = Array2::zeros((batch, 4 * hidden + 2 * dm));
    dpre.slice_mut(s![.., 0..hidden]).assign(&dzf);
    dpre.slice_mut(s![.., hidden..2 * hidden]).assign(&dzi);
    dpre.slice_mut(s![.., 2 * hidden..3 * hidden]).assign(&dzo);
    dpre.slice_mut(s![.., 3 * hidden..4 * hidden]).assign(&dzg);
    dpre.slice_mut(s![.., 4 * hidden..4 * hidden + dm]).assign(&dzmf);
    dpre.slice_mut(s![.., 4 * hidden + dm..4 * hidden + 2 * dm]).assign(&dzmi);

    grads.w += &dpre.t().dot(&cache.x);
    grads.u += &dpre.t().dot(&cache.h_prev_m);
    grads.b += &dpre.sum_axis(Axis(0));

    let dx = dpre.dot(&params.w);
    let dh_prev_m = dpre.dot(&params.u);
    (dx, dh_prev_m, dc_prev)
}

/// Single-example cell step: returns the new state and the master forget
/// gate (length D_m). This is the inference-facing API; training uses the
/// batched path directly.
pub fn cell_step(
    params: &LayerParams,
    x: &Array1<f64>,
    prev: &LayerState,
    hidden: usize,
    chunk: usize,
) -> Result<(LayerState, Array1<f64>)> {
    let xb = x.view().insert_axis(Axis(0)).to_owned();
    let (state, cache) = step_forward(params, &xb, &prev.h, &prev.c, hidden, chunk)?;
    Ok((state, cache.mf.row(0).to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_uniform_cumax_gate() {
        let hidden = 8;
        let chunk = 2;
        let dm = hidden / chunk;
        let rows = 4 * hidden + 2 * dm;
        let params = LayerParams {
            w: Array2::zeros((rows, 4)),
            u: Array2::zeros((rows, hidden)),
            b: Array1::zeros(rows),
        };
        let prev = LayerState::zeros(1, hidden);
        let x = Array1::zeros(4);
        let (_, mf) = cell_step(&params, &x, &prev, hidden, chunk).unwrap();
        for (k, v) in mf.iter().enumerate() {
            let expected = (k + 1) as f64 / dm as f64;
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn master_gate_is_monotone_with_last_entry_one() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let hidden = 12;
        let chunk = 3;
        let dm = hidden / chunk;
        let rows = 4 * hidden + 2 * dm;
        let params = LayerParams {
            w: Array2::from_shape_fn((rows, 5), |_| rng.random_range(-2.0..2.0)),
            u: Array2::from_shape_fn((rows, hidden), |_| rng.random_range(-2.0..2.0)),
            b: Array1::from_shape_fn(rows, |_| rng.random_range(-2.0..2.0)),
        };
        for _ in 0..20 {
            let prev = LayerState {
                h: Array2::from_shape_fn((1, hidden), |_| rng.random_range(-1.0..1.0)),
                c: Array2::from_shape_fn((1, hidden), |_| rng.random_range(-1.0..1.0)),
            };
            let x = Array1::from_shape_fn(5, |_| rng.random_range(-3.0..3.0));
            let (_, mf) = cell_step(&params, &x, &prev, hidden, chunk).unwrap();
            for w in mf.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            assert!((mf[dm - 1] - 1.0).abs() < 1e-6);
        }
    }
}
