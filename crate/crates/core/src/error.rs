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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TopasError>;

#[derive(Debug, Error)]
pub enum TopasError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported gate `{name}` at line {line}")]
    UnsupportedGate { name: String, line: usize },
    #[error("unsupported statement `{keyword}` at line {line}")]
    UnsupportedStatement { keyword: String, line: usize },
    #[error("qubit index {index} out of range for width {width}")]
    QubitOutOfRange { index: usize, width: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("width {width} exceeds the simulation cap of {cap} qubits")]
    WidthOverCap { width: usize, cap: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("unknown topology spec `{0}`")]
    UnknownTopology(String),
    #[error("invalid partition id {0}")]
    InvalidPartition(usize),
    #[error("circuit width {width} exceeds device size {device}")]
    CircuitTooWide { width: usize, device: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed matrix dump: {0}")]
    MatrixDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
