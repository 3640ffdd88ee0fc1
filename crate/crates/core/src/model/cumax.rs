use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};

/// Numerically stabilized softmax over a single row.
pub fn softmax_row(logits: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits.iter()) {
        let e = (z - max).exp();
        *o = e;
        sum += e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(logits.raw_dim());
    for (row, orow) in logits.rows().into_iter().zip(out.rows_mut()) {
        softmax_row(row, orow);
    }
    out
}

/// cumax(z) = cumsum(softmax(z)): nondecreasing, in [0,1], last entry 1.
/// The running sum is capped at 1, since accumulated rounding can otherwise
/// push it a few ulps above.
pub fn cumax(logits: ArrayView1<f64>) -> Array1<f64> {
    let mut s = Array1::zeros(logits.len());
    softmax_row(logits, s.view_mut());
    let mut acc = 0.0;
    for v in s.iter_mut() {
        acc += *v;
        *v = acc.min(1.0);
    }
    s
}

/// Row-wise cumax; also returns the softmax rows, which the backward pass needs.
pub fn cumax_rows(logits: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let s = softmax_rows(logits);
    let mut y = s.clone();
    for mut row in y.rows_mut() {
        let mut acc = 0.0;
        for v in row.iter_mut() {
            acc += *v;
            *v = acc.min(1.0);
        }
    }
    (y, s)
}

/// Gradient of cumax w.r.t. its logits for one row.
/// `dy` is dL/d(cumax output), `s` the softmax computed in the forward pass.
pub fn cumax_backward_row(dy: ArrayView1<f64>, s: ArrayView1<f64>) -> Array1<f64> {
    // ds_j = sum_{k>=j} dy_k; dz = s * (ds - <s, ds>)
    let n = dy.len();
    let mut ds = Array1::zeros(n);
    let mut acc = 0.0;
    for j in (0..n).rev() {
        acc += dy[j];
        ds[j] = acc;
    }
    let dot: f64 = s.iter().zip(ds.iter()).map(|(a, b)| a * b).sum();
    Array1::from_iter(s.iter().zip(ds.iter()).map(|(&sj, &dsj)| sj * (dsj - dot)))
}

/// Row-wise cumax backward.
pub fn cumax_backward_rows(dy: &Array2<f64>, s: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(dy.raw_dim());
    for ((dyr, sr), mut or) in dy.rows().into_iter().zip(s.rows()).zip(out.rows_mut()) {
        or.assign(&cumax_backward_row(dyr, sr));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_logits_give_equal_increments() {
        let y = cumax(array![0.0, 0.0, 0.0, 0.0].view());
        let expected = [0.25, 0.5, 0.75, 1.0];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_two_logits() {
        let y = cumax(array![0.0, 2.0_f64.ln()].view());
        assert!((y[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_logit_saturates() {
        let y = cumax(array![1e9, 0.0, 0.0].view());
        for v in y.iter() {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let z = array![0.3, -1.2, 0.7, 2.0, -0.5];
        let dy = array![0.11, -0.7, 0.35, 1.3, -0.2];
        let (_, s) = cumax_rows(&z.clone().insert_axis(ndarray::Axis(0)));
        let dz = cumax_backward_row(dy.view(), s.row(0));
        let eps = 1e-6;
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += eps;
            zm[k] -= eps;
            let fp: f64 = cumax(zp.view()).iter().zip(dy.iter()).map(|(a, b)| a * b).sum();
            let fm: f64 = cumax(zm.view()).iter().zip(dy.iter()).map(|(a, b)| a * b).sum();
            let fd = (fp - fm) / (2.0 * eps);
            assert!((dz[k] - fd).abs() < 1e-7, "k={k}: {} vs {}", dz[k], fd);
        }
    }
}
