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

//! Topology-aware logical circuit synthesis.
//!
//! The compiler partitions a logical circuit into blocks of at most `k`
//! qubits, picks a sparse synthesis subtopology for every block that is
//! embedded in the target device graph, re-synthesizes the block onto that
//! subtopology with an A* search over `{U3, CNOT}` ansatz circuits, and
//! finally places and routes the reassembled circuit with SABRE.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis-state
//! index everywhere in this crate.

pub mod circuit;
pub mod error;
pub mod graph;
pub mod mapper;
pub mod numerics;
pub mod partitioner;
pub mod pipeline;
pub mod selector;
pub mod synthesizer;
pub mod topology;

pub use circuit::{Circuit, Gate};
pub use error::{Result, TopasError};
pub use graph::{Graph, WeightedGraph};
pub use numerics::UnitaryMatrix;
