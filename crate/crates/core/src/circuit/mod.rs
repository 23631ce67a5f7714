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

//! Circuit IR over the `{U3, CNOT}` gate set (plus transient SWAPs).

mod qasm;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopasError};
use crate::graph::WeightedGraph;
use crate::numerics::UnitaryMatrix;

pub use qasm::{emit_qasm, parse_qasm};

/// Default qubit cap for dense unitary simulation (1024 x 1024).
pub const SIMULATION_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// OpenQASM 2 `u3(theta, phi, lambda)`:
    /// `[[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]]`.
    U3 {
        qubit: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
}

impl Gate {
    pub fn u3(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::U3 {
            qubit,
            theta,
            phi,
            lambda,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::Swap { a, b }
    }

    /// Hadamard as `U3(pi/2, 0, pi)`.
    pub fn h(qubit: usize) -> Self {
        Gate::u3(qubit, std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::PI)
    }

    /// Pauli-X as `U3(pi, 0, pi)`.
    pub fn x(qubit: usize) -> Self {
        Gate::u3(qubit, std::f64::consts::PI, 0.0, std::f64::consts::PI)
    }

    /// Z rotation up to global phase, `U3(0, 0, lambda)`.
    pub fn rz(qubit: usize, lambda: f64) -> Self {
        Gate::u3(qubit, 0.0, 0.0, lambda)
    }

    pub fn ry(qubit: usize, theta: f64) -> Self {
        Gate::u3(qubit, theta, 0.0, 0.0)
    }

    pub fn rx(qubit: usize, theta: f64) -> Self {
        Gate::u3(
            qubit,
            theta,
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
        )
    }

    /// First qubit and, for two-qubit gates, the second.
    pub fn operands(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::U3 { qubit, .. } => (qubit, None),
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Swap { a, b } => (a, Some(b)),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = self.operands();
        std::iter::once(a).chain(b)
    }

    /// The qubit pair of a two-qubit gate.
    pub fn pair(&self) -> Option<(usize, usize)> {
        match self.operands() {
            (a, Some(b)) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.pair().is_some()
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().any(|x| x == q)
    }

    /// CNOT cost: SWAP counts as three.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::U3 { .. } => 0,
            Gate::Cnot { .. } => 1,
            Gate::Swap { .. } => 3,
        }
    }

    /// Same gate with every qubit index passed through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Self {
        match *self {
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => Gate::U3 {
                qubit: map(qubit),
                theta,
                phi,
                lambda,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: map(control),
                target: map(target),
            },
            Gate::Swap { a, b } => Gate::Swap { a: map(a), b: map(b) },
        }
    }

    fn validate(&self, width: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= width {
                return Err(TopasError::QubitOutOfRange { index: q, width });
            }
        }
        if let Some((a, b)) = self.pair() {
            if a == b {
                return Err(TopasError::InvalidGate(format!(
                    "two-qubit gate with repeated qubit {a}"
                )));
            }
        }
        if let Gate::U3 {
            theta, phi, lambda, ..
        } = self
        {
            if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) {
                return Err(TopasError::InvalidGate("non-finite U3 angle".into()));
            }
        }
        Ok(())
    }
}

/// Gate range of a reassembled partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionMarker {
    pub gates: Range<usize>,
    pub partition: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub cnot_count: usize,
    pub depth: usize,
    pub width: usize,
}

/// Time-ordered gate list over `width` wires. Execution order is list order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    markers: Vec<PartitionMarker>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            gates: Vec::new(),
            markers: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Self::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn markers(&self) -> &[PartitionMarker] {
        &self.markers
    }

    /// Records that `gates` (already present) belong to `partition`.
    pub fn mark_partition(&mut self, gates: Range<usize>, partition: usize) {
        debug_assert!(gates.end <= self.gates.len());
        self.markers.push(PartitionMarker { gates, partition });
    }

    /// Per-gate partition tags derived from the markers.
    pub fn partition_tags(&self) -> Vec<Option<usize>> {
        let mut tags = vec![None; self.gates.len()];
        for m in &self.markers {
            for t in &mut tags[m.gates.clone()] {
                *t = Some(m.partition);
            }
        }
        tags
    }

    /// Appends all gates of `other`, which must not be wider.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        for g in &other.gates {
            self.push(*g)?;
        }
        Ok(())
    }

    /// Gates relabeled through `map` onto a circuit of `width` wires.
    pub fn remapped(&self, width: usize, map: impl Fn(usize) -> usize) -> Result<Circuit> {
        Circuit::from_gates(width, self.gates.iter().map(|g| g.remap(&map)))
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    /// Critical path length where each gate takes one step on each of its
    /// qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.width];
        for g in &self.gates {
            let t = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = t;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn stats(&self) -> CircuitStats {
        CircuitStats {
            cnot_count: self.cnot_count(),
            depth: self.depth(),
            width: self.width,
        }
    }

    /// Interaction counts per qubit pair. A SWAP counts once for its pair.
    pub fn connectivity_graph(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.width);
        for (a, b) in self.gates.iter().filter_map(Gate::pair) {
            g.add_weight(a, b, 1);
        }
        g
    }

    /// Replaces each `SWAP(a, b)` in place by `CX(a,b) CX(b,a) CX(a,b)`.
    /// Partition markers are shifted accordingly.
    pub fn decompose_swaps(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        let mut new_index = Vec::with_capacity(self.gates.len() + 1);
        for g in &self.gates {
            new_index.push(gates.len());
            match *g {
                Gate::Swap { a, b } => {
                    gates.push(Gate::cnot(a, b));
                    gates.push(Gate::cnot(b, a));
                    gates.push(Gate::cnot(a, b));
                }
                other => gates.push(other),
            }
        }
        new_index.push(gates.len());
        let markers = self
            .markers
            .iter()
            .map(|m| PartitionMarker {
                gates: new_index[m.gates.start]..new_index[m.gates.end],
                partition: m.partition,
            })
            .collect();
        Circuit {
            width: self.width,
            gates,
            markers,
        }
    }

    /// Dense unitary of the circuit under the default simulation cap.
    pub fn unitary(&self) -> Result<UnitaryMatrix> {
        self.unitary_with_cap(SIMULATION_CAP)
    }

    /// Product `G_m ... G_1` of the full-space gate unitaries.
    pub fn unitary_with_cap(&self, cap: usize) -> Result<UnitaryMatrix> {
        if self.width > cap {
            return Err(TopasError::WidthOverCap {
                width: self.width,
                cap,
            });
        }
        let mut u = UnitaryMatrix::identity(1 << self.width);
        for g in &self.gates {
            u.apply_gate_left(g, self.width);
        }
        Ok(u)
    }

    /// The same gates in reverse order (used by bidirectional layout passes;
    /// gate parameters are not inverted).
    pub fn reversed(&self) -> Circuit {
        Circuit {
            width: self.width,
            gates: self.gates.iter().rev().copied().collect(),
            markers: Vec::new(),
        }
    }

    /// Drops adjacent identical CNOT pairs (no gate on either qubit in
    /// between), repeating until none remain.
    pub fn cancel_adjacent_cnots(&self) -> Circuit {
        let mut out: Vec<Gate> = Vec::with_capacity(self.gates.len());
        // last[q] = index into `out` of the latest gate touching q
        let mut last: Vec<Option<usize>> = vec![None; self.width];
        let mut alive: Vec<bool> = Vec::with_capacity(self.gates.len());
        let mut history: Vec<Vec<usize>> = vec![Vec::new(); self.width];
        for g in &self.gates {
            if let Gate::Cnot { control, target } = *g {
                if let (Some(i), Some(j)) = (last[control], last[target]) {
                    if i == j && out[i] == *g {
                        alive[i] = false;
                        for q in [control, target] {
                            history[q].pop();
                            last[q] = history[q].last().copied();
                        }
                        continue;
                    }
                }
            }
            let idx = out.len();
            out.push(*g);
            alive.push(true);
            for q in g.qubits() {
                history[q].push(idx);
                last[q] = Some(idx);
            }
        }
        Circuit {
            width: self.width,
            gates: out
                .into_iter()
                .zip(alive)
                .filter_map(|(g, keep)| keep.then_some(g))
                .collect(),
            markers: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hs_distance;
    use num_complex::Complex64;

    #[test]
    fn depth_examples() {
        let c = Circuit::from_gates(4, [Gate::cnot(0, 1), Gate::cnot(2, 3)]).unwrap();
        assert_eq!(c.stats(), CircuitStats { cnot_count: 2, depth: 1, width: 4 });
        let c = Circuit::from_gates(3, [Gate::cnot(0, 1), Gate::cnot(1, 2)]).unwrap();
        assert_eq!(c.depth(), 2);
        let c = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        assert_eq!(c.cnot_count(), 3);
        assert_eq!(Circuit::new(3).depth(), 0);
    }

    #[test]
    fn rejects_bad_gates() {
        assert!(matches!(
            Circuit::from_gates(2, [Gate::cnot(0, 2)]),
            Err(TopasError::QubitOutOfRange { index: 2, width: 2 })
        ));
        assert!(Circuit::from_gates(2, [Gate::cnot(1, 1)]).is_err());
        assert!(Circuit::from_gates(1, [Gate::u3(0, f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn connectivity_counts() {
        let c = Circuit::from_gates(
            3,
            [Gate::cnot(0, 1), Gate::cnot(0, 1), Gate::cnot(1, 2), Gate::h(2)],
        )
        .unwrap();
        let g = c.connectivity_graph();
        assert_eq!(g.weight(0, 1), 2);
        assert_eq!(g.weight(1, 2), 1);
        assert_eq!(g.edge_count(), 2);
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::x(1)]).unwrap();
        assert_eq!(c.connectivity_graph().edge_count(), 0);
        let c = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        assert_eq!(c.connectivity_graph().weight(0, 1), 1);
    }

    #[test]
    fn swap_decomposition() {
        let c = Circuit::from_gates(2, [Gate::swap(0, 1)]).unwrap();
        assert_eq!(
            c.decompose_swaps().gates(),
            &[Gate::cnot(0, 1), Gate::cnot(1, 0), Gate::cnot(0, 1)]
        );
        let plain = Circuit::from_gates(2, [Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        assert_eq!(plain.decompose_swaps(), plain);
    }

    #[test]
    fn swap_decomposition_shifts_markers() {
        let mut c = Circuit::from_gates(2, [Gate::swap(0, 1), Gate::h(0), Gate::cnot(0, 1)]).unwrap();
        c.mark_partition(0..1, 0);
        c.mark_partition(1..3, 1);
        let d = c.decompose_swaps();
        assert_eq!(d.markers()[0].gates, 0..3);
        assert_eq!(d.markers()[1].gates, 3..5);
    }

    #[test]
    fn cnot_unitary_is_permutation_of_10_and_11() {
        let u = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap().unitary().unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let expected = [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [zero, zero, zero, one],
            [zero, zero, one, zero],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert_eq!(u.get(r, c), *v);
            }
        }
    }

    #[test]
    fn empty_circuit_is_identity_and_cap_enforced() {
        let u = Circuit::new(2).unitary().unwrap();
        assert_eq!(hs_distance(&u, &UnitaryMatrix::identity(4)).unwrap(), 0.0);
        assert!(matches!(
            Circuit::new(11).unitary(),
            Err(TopasError::WidthOverCap { width: 11, cap: 10 })
        ));
    }

    #[test]
    fn adjacent_cnot_cancellation() {
        let c = Circuit::from_gates(
            3,
            [
                Gate::cnot(0, 1),
                Gate::cnot(0, 1),
                Gate::cnot(1, 2),
                Gate::h(0),
                Gate::cnot(1, 2),
                Gate::cnot(0, 1),
            ],
        )
        .unwrap();
        let d = c.cancel_adjacent_cnots();
        assert_eq!(d.gates(), &[Gate::h(0), Gate::cnot(0, 1)]);
        let blocked = Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::h(1), Gate::cnot(0, 1)]).unwrap();
        assert_eq!(blocked.cancel_adjacent_cnots().len(), 3);
    }
}
