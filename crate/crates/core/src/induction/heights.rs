use crate::error::{Error, Result};
use crate::model::MasterGateTrace;

/// Split-point heights for an n-token sentence: `heights[t]` is the height
/// of the boundary between token t and token t+1 (n-1 entries).
pub type HeightVector = Vec<f64>;

/// Derive split-point heights from the master-gate trace of one layer
/// (1-based layer index). The boundary before token t+1 takes that token's
/// gate height; the first boundary takes the max of the first two tokens'
/// heights, which have no boundary of their own otherwise.
pub fn heights_from_trace(trace: &MasterGateTrace, layer: usize) -> Result<HeightVector> {
    if layer == 0 || layer > trace.num_layers() {
        return Err(Error::LayerOutOfRange { layer, num_layers: trace.num_layers() });
    }
    let d = &trace.heights[layer - 1];
    let n = d.len();
    if n <= 1 {
        return Ok(Vec::new());
    }
    let mut heights = Vec::with_capacity(n - 1);
    heights.push(d[0].max(d[1]));
    for t in 2..n {
        heights.push(d[t]);
    }
    Ok(heights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn trace_with_heights(per_layer: Vec<Vec<f64>>) -> MasterGateTrace {
        // Build gates whose height_from_gate equals the requested value:
        // for a length-D gate of all ones except a prefix of zeros we can't
        // hit arbitrary reals, so use a single-entry tail trick instead:
        // gate of length D with first D-1 entries equal and last 1 such that
        // D - sum = target.
        let dm = 16usize;
        let mut trace = MasterGateTrace::new(per_layer.len());
        for (l, hs) in per_layer.iter().enumerate() {
            for &h in hs {
                // entries: (dm-1) values v and final 1.0; dm - ((dm-1)v + 1) = h
                let v = (dm as f64 - 1.0 - h) / (dm as f64 - 1.0);
                let mut gate = Array1::from_elem(dm, v);
                gate[dm - 1] = 1.0;
                trace.push(l, gate);
            }
        }
        trace
    }

    #[test]
    fn first_boundary_takes_max_of_first_two() {
        let trace = trace_with_heights(vec![vec![5.0, 2.0, 7.0, 1.0]]);
        let h = heights_from_trace(&trace, 1).unwrap();
        assert_eq!(h.len(), 3);
        assert!((h[0] - 5.0).abs() < 1e-9);
        assert!((h[1] - 7.0).abs() < 1e-9);
        assert!((h[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_token_sentence_has_no_heights() {
        let trace = trace_with_heights(vec![vec![3.0]]);
        assert!(heights_from_trace(&trace, 1).unwrap().is_empty());
    }

    #[test]
    fn two_tokens_use_max_rule() {
        let trace = trace_with_heights(vec![vec![1.0, 9.0]]);
        let h = heights_from_trace(&trace, 1).unwrap();
        assert_eq!(h.len(), 1);
        assert!((h[0] - 9.0).abs() < 1e-9);
    }

    #[test]
    fn only_selected_layer_matters() {
        let trace = trace_with_heights(vec![vec![5.0, 2.0, 7.0], vec![1.0, 1.0, 1.0]]);
        let h1 = heights_from_trace(&trace, 1).unwrap();
        let h2 = heights_from_trace(&trace, 2).unwrap();
        assert!((h1[1] - 7.0).abs() < 1e-9);
        assert!((h2[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn layer_out_of_range_rejected() {
        let trace = trace_with_heights(vec![vec![1.0, 2.0]]);
        assert!(heights_from_trace(&trace, 0).is_err());
        assert!(heights_from_trace(&trace, 2).is_err());
    }
}
