use ndarray::Array1;

/// Expected index of the 0-to-1 transition in a master forget gate:
/// d = D_m - sum_k gate[k]. Hard gates [0,..,0,1,..,1] give the index of
/// the first 1 exactly.
pub fn height_from_gate(gate: &Array1<f64>) -> f64 {
    gate.len() as f64 - gate.sum()
}

/// Per-layer, per-timestep master forget gates and their derived heights.
#[derive(Debug, Clone)]
pub struct MasterGateTrace {
    /// gates[layer][t] is the D_m-length master forget gate at timestep t.
    pub gates: Vec<Vec<Array1<f64>>>,
    /// heights[layer][t] = height_from_gate(gates[layer][t]).
    pub heights: Vec<Vec<f64>>,
}

impl MasterGateTrace {
    pub fn new(num_layers: usize) -> Self {
        MasterGateTrace {
            gates: vec![Vec::new(); num_layers],
            heights: vec![Vec::new(); num_layers],
        }
    }

    pub fn push(&mut self, layer: usize, gate: Array1<f64>) {
        self.heights[layer].push(height_from_gate(&gate));
        self.gates[layer].push(gate);
    }

    pub fn num_layers(&self) -> usize {
        self.gates.len()
    }

    pub fn len(&self) -> usize {
        self.gates.first().map_or(0, |g| g.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn all_ones_gate_has_height_zero() {
        assert_eq!(height_from_gate(&array![1.0, 1.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn hard_transition_at_last_dim() {
        assert_eq!(height_from_gate(&array![0.0, 0.0, 0.0, 1.0]), 3.0);
    }

    #[test]
    fn soft_gate_height() {
        let h = height_from_gate(&array![0.25, 0.5, 0.75, 1.0]);
        assert!((h - 1.5).abs() < 1e-12);
    }
}
