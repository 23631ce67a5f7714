// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::graph::Graph;
use crate::numerics::UnitaryMatrix;

/// One position in an ansatz gate sequence. `offset` indexes the first of the
/// three `U3` parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AnsatzOp {
    U3 { qubit: usize, offset: usize },
    Cnot { control: usize, target: usize },
}

/// QSearch-style ansatz: a layer of one `U3` per qubit, then blocks of
/// `CNOT(c, t)` followed by `U3` on `c` and on `t`.
///
/// Parameter layout: `3q..3q+3` for the initial gate on qubit `q`, then six
/// per block (control's `U3`, then target's).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzCircuit {
    width: usize,
    blocks: Vec<(usize, usize)>,
}

impl AnsatzCircuit {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            blocks: Vec::new(),
        }
    }

    pub fn with_blocks(width: usize, blocks: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut a = Self::new(width);
        for (c, t) in blocks {
            a.push_block(c, t);
        }
        a
    }

    pub fn push_block(&mut self, control: usize, target: usize) {
        assert!(control != target && control < self.width && target < self.width);
        self.blocks.push((control, target));
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_params(&self) -> usize {
        3 * (self.width + 2 * self.blocks.len())
    }

    /// Every CNOT lies on an edge of `g`.
    pub fn obeys(&self, g: &Graph) -> bool {
        self.blocks.iter().all(|&(c, t)| g.has_edge(c, t))
    }

    pub(crate) fn ops(&self) -> Vec<AnsatzOp> {
        let mut ops = Vec::with_capacity(self.width + 3 * self.blocks.len());
        for q in 0..self.width {
            ops.push(AnsatzOp::U3 { qubit: q, offset: 3 * q });
        }
        for (b, &(control, target)) in self.blocks.iter().enumerate() {
            let base = 3 * self.width + 6 * b;
            ops.push(AnsatzOp::Cnot { control, target });
            ops.push(AnsatzOp::U3 {
                qubit: control,
                offset: base,
            });
            ops.push(AnsatzOp::U3 {
                qubit: target,
                offset: base + 3,
            });
        }
        ops
    }

    /// Concrete circuit for `params`.
    pub fn circuit(&self, params: &[f64]) -> Circuit {
        assert_eq!(params.len(), self.num_params(), "parameter count mismatch");
        let gates = self.ops().into_iter().map(|op| match op {
            AnsatzOp::U3 { qubit, offset } => {
                Gate::u3(qubit, params[offset], params[offset + 1], params[offset + 2])
            }
            AnsatzOp::Cnot { control, target } => Gate::cnot(control, target),
        });
        Circuit::from_gates(self.width, gates).expect("ansatz gates are in range")
    }

    pub fn unitary(&self, params: &[f64]) -> UnitaryMatrix {
        let c = self.circuit(params);
        let mut u = UnitaryMatrix::identity(1 << self.width);
        for g in c.gates() {
            u.apply_gate_left(g, self.width);
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_count_and_layout() {
        let a = AnsatzCircuit::with_blocks(3, [(0, 1), (1, 2)]);
        assert_eq!(a.num_params(), 3 * (3 + 4));
        let ops = a.ops();
        assert_eq!(ops.len(), 3 + 6);
        assert_eq!(ops[3], AnsatzOp::Cnot { control: 0, target: 1 });
        assert_eq!(ops[8], AnsatzOp::U3 { qubit: 2, offset: 9 + 9 });
        let line = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(a.obeys(&line));
        assert!(!AnsatzCircuit::with_blocks(3, [(0, 2)]).obeys(&line));
    }

    #[test]
    fn zero_params_layer_is_identity() {
        let a = AnsatzCircuit::new(2);
        let u = a.unitary(&[0.0; 6]);
        assert_eq!(u, UnitaryMatrix::identity(4));
    }
}
