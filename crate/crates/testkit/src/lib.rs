//! Independent reference implementations used as test oracles. Everything
//! here is written from the definitions, on purpose sharing no code with the
//! library under test: the language-model loss is recomputed in double-double
//! precision so central finite differences stay meaningful down to ~1e-25,
//! and the tree/F1 oracles are plain brute force.

use onlab_core::model::{ModelConfig, ModelParams};
use std::collections::BTreeSet;
use twofloat::TwoFloat;

type Dd = TwoFloat;

fn dd(v: f64) -> Dd {
    Dd::from(v)
}

// twofloat's `/` is only float-accurate; refine by long division (the
// add/mul primitives are accurate, so each residual step is reliable).
fn dd_div(a: Dd, b: Dd) -> Dd {
    let q1 = dd(a.hi() / b.hi());
    let r1 = a - b * q1;
    let q2 = dd(r1.hi() / b.hi());
    let r2 = r1 - b * q2;
    let q3 = dd(r2.hi() / b.hi());
    q1 + q2 + q3
}

// twofloat's own exp/ln/tanh are only float-accurate (absolute errors around
// 1e-13), which is not enough for a finite-difference oracle. The versions
// below use only its double-double +,-,*,/ primitives: argument reduction
// against a 107-bit ln 2, a short Taylor series on a tiny interval, and
// repeated squaring. ln is recovered from exp by one Newton step.

// ln 2 to double-double precision.
fn ln2() -> Dd {
    Dd::try_from((0.6931471805599453, 2.3190468138462996e-17)).unwrap()
}

fn dd_exp(x: Dd) -> Dd {
    let k = f64::from(x / ln2()).round();
    let r = x - ln2() * dd(k);
    // exp(r) with |r| <= ln2/2, squared down: exp(r) = exp(r/32)^32.
    let rsmall = r / dd(32.0);
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for n in 1..12 {
        term = dd_div(term * rsmall, dd(n as f64));
        sum = sum + term;
    }
    let mut y = sum;
    for _ in 0..5 {
        y = y * y;
    }
    // scale by 2^k; k is modest for all inputs the oracle sees
    y * dd(2.0f64.powi(k as i32))
}

fn dd_ln(x: Dd) -> Dd {
    // Newton refinement of the f64 logarithm: y' = y + x*exp(-y) - 1.
    let y0 = dd(f64::from(x).ln());
    let y1 = y0 + x * dd_exp(-y0) - dd(1.0);
    y1 + x * dd_exp(-y1) - dd(1.0)
}

fn dd_tanh(x: Dd) -> Dd {
    // tanh(x) = 1 - 2/(e^{2x}+1), stable for either sign via symmetry.
    if x < dd(0.0) {
        -dd_tanh(-x)
    } else {
        dd(1.0) - dd_div(dd(2.0), dd_exp(x * dd(2.0)) + dd(1.0))
    }
}

fn sigmoid(x: Dd) -> Dd {
    if x >= dd(0.0) {
        dd_div(dd(1.0), dd(1.0) + dd_exp(-x))
    } else {
        let e = dd_exp(x);
        dd_div(e, dd(1.0) + e)
    }
}

/// cumax = cumulative sum of a max-stabilized softmax.
fn cumax(z: &[Dd]) -> Vec<Dd> {
    let m = z.iter().cloned().reduce(|a, b| if b > a { b } else { a }).unwrap();
    let exps: Vec<Dd> = z.iter().map(|&v| dd_exp(v - m)).collect();
    let total = exps.iter().cloned().reduce(|a, b| a + b).unwrap();
    let mut acc = dd(0.0);
    exps.iter()
        .map(|&e| {
            acc = acc + dd_div(e, total);
            acc
        })
        .collect()
}

fn log_sum_exp(row: &[Dd]) -> Dd {
    let m = row.iter().cloned().reduce(|a, b| if b > a { b } else { a }).unwrap();
    let total = row.iter().map(|&v| dd_exp(v - m)).reduce(|a, b| a + b).unwrap();
    m + dd_ln(total)
}

/// Mean next-token NLL of `ids` (inputs ids[..n-1], targets ids[1..]),
/// computed in double-double precision. Matches the contract of
/// `loss_and_gradients` with dropout disabled.
pub fn reference_loss(ids: &[usize], params: &ModelParams, config: &ModelConfig) -> f64 {
    f64::from(reference_loss_dd(ids, params, config))
}

fn reference_loss_dd(ids: &[usize], params: &ModelParams, config: &ModelConfig) -> Dd {
    assert!(ids.len() >= 2);
    let steps = ids.len() - 1;
    let chunk = config.chunk_factor;

    let mut h: Vec<Vec<Dd>> =
        config.hidden_dims.iter().map(|&d| vec![dd(0.0); d]).collect();
    let mut c: Vec<Vec<Dd>> =
        config.hidden_dims.iter().map(|&d| vec![dd(0.0); d]).collect();

    let head = params.out_weight.as_ref().unwrap_or(&params.embedding);
    let mut total = dd(0.0);

    for t in 0..steps {
        let mut x: Vec<Dd> =
            params.embedding.row(ids[t]).iter().map(|&v| dd(v)).collect();
        for l in 0..config.num_layers {
            let hidden = config.hidden_dims[l];
            let dm = hidden / chunk;
            let lp = &params.layers[l];
            let rows = lp.b.len();
            let mut pre = vec![dd(0.0); rows];
            for (r, p) in pre.iter_mut().enumerate() {
                let mut acc = dd(lp.b[r]);
                for (j, &xv) in x.iter().enumerate() {
                    acc = acc + dd(lp.w[[r, j]]) * xv;
                }
                for (j, &hv) in h[l].iter().enumerate() {
                    acc = acc + dd(lp.u[[r, j]]) * hv;
                }
                *p = acc;
            }
            let f: Vec<Dd> = (0..hidden).map(|k| sigmoid(pre[k])).collect();
            let i: Vec<Dd> = (0..hidden).map(|k| sigmoid(pre[hidden + k])).collect();
            let o: Vec<Dd> = (0..hidden).map(|k| sigmoid(pre[2 * hidden + k])).collect();
            let g: Vec<Dd> = (0..hidden).map(|k| dd_tanh(pre[3 * hidden + k])).collect();
            let mf = cumax(&pre[4 * hidden..4 * hidden + dm]);
            let mi: Vec<Dd> = cumax(&pre[4 * hidden + dm..4 * hidden + 2 * dm])
                .into_iter()
                .map(|v| dd(1.0) - v)
                .collect();

            let mut new_c = vec![dd(0.0); hidden];
            let mut new_h = vec![dd(0.0); hidden];
            for k in 0..hidden {
                let fm = mf[k / chunk];
                let im = mi[k / chunk];
                let omega = fm * im;
                let fhat = f[k] * omega + fm - omega;
                let ihat = i[k] * omega + im - omega;
                new_c[k] = fhat * c[l][k] + ihat * g[k];
                new_h[k] = o[k] * dd_tanh(new_c[k]);
            }
            c[l] = new_c;
            x = new_h.clone();
            h[l] = new_h;
        }
        let logits: Vec<Dd> = (0..config.vocab_size)
            .map(|v| {
                let mut acc = dd(params.out_bias[v]);
                for (j, &hv) in x.iter().enumerate() {
                    acc = acc + dd(head[[v, j]]) * hv;
                }
                acc
            })
            .collect();
        total = total + log_sum_exp(&logits) - logits[ids[t + 1]];
    }
    dd_div(total, dd(steps as f64))
}

/// Central finite-difference gradients of `reference_loss` at the parameter
/// coordinates `indices` (into `ModelParams::flatten` order).
pub fn fd_gradients(
    ids: &[usize],
    params: &ModelParams,
    config: &ModelConfig,
    indices: &[usize],
    eps: f64,
) -> Vec<f64> {
    let flat = params.flatten();
    let mut work = params.clone();
    indices
        .iter()
        .map(|&k| {
            let xp = flat[k] + eps;
            let xm = flat[k] - eps;
            let mut v = flat.clone();
            v[k] = xp;
            work.assign_flat(&v);
            let lp = reference_loss_dd(ids, &work, config);
            v[k] = xm;
            work.assign_flat(&v);
            let lm = reference_loss_dd(ids, &work, config);
            // The subtraction must happen in extended precision: rounding the
            // two losses to f64 first would wipe out small gradients.
            f64::from(dd_div(lp - lm, dd(xp - xm)))
        })
        .collect()
}

/// Relative error with the denominator floored, so near-zero gradients are
/// compared on an absolute scale.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / f64::max(analytic.abs().max(numeric.abs()), floor)
}

/// Brute-force split-point tree oracle: repeatedly remove the global maximum
/// height (leftmost on ties) and recurse on the two sides. Returns all spans
/// (start, end inclusive) of internal nodes.
pub fn oracle_spans(heights: &[f64]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    oracle_range(heights, 0, heights.len() + 1, &mut out);
    out
}

fn oracle_range(heights: &[f64], start: usize, len: usize, out: &mut BTreeSet<(usize, usize)>) {
    if len <= 1 {
        return;
    }
    out.insert((start, start + len - 1));
    // Split boundaries inside [start, start+len): boundary b sits after token
    // start+b, with height heights[start + b].
    let mut best = 0usize;
    for b in 1..len - 1 {
        if heights[start + b] > heights[start + best] {
            best = b;
        }
    }
    oracle_range(heights, start, best + 1, out);
    oracle_range(heights, start + best + 1, len - best - 1, out);
}

/// Set-intersection F1 over two span sets, written from the definition.
pub fn oracle_f1(pred: &BTreeSet<(usize, usize)>, gold: &BTreeSet<(usize, usize)>) -> f64 {
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    let matched = pred.intersection(gold).count() as f64;
    if matched == 0.0 {
        return 0.0;
    }
    let p = matched / pred.len() as f64;
    let r = matched / gold.len() as f64;
    2.0 * p * r / (p + r)
}
