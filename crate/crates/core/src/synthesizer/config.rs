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

use crate::error::{Result, TopasError};
use crate::numerics::GradientMethod;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    LevenbergMarquardt,
    /// Coordinate sweeps over the one-qubit gates, then LM once the fit is
    /// close to the target.
    Hybrid,
    GradientDescent(GradientMethod),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Optimizer,
    /// Random starts per node, on top of any warm start.
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Optimizer::Hybrid,
            restarts: 4,
            max_iters: 1000,
            grad_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Success threshold on the Hilbert-Schmidt distance.
    pub epsilon: f64,
    pub max_blocks: usize,
    pub optimizer: OptimizerConfig,
    /// Minimum blocks between prefix-freezing checkpoints.
    pub leap_gap: usize,
    /// Distance improvement factor that triggers a checkpoint.
    pub leap_factor: f64,
    /// At a checkpoint, also fix the prefix parameters and fit only the
    /// remainder `V P^dag`. When false the prefix structure is kept but its
    /// parameters stay free.
    pub freeze_prefix_params: bool,
    /// Weight of one block in the A* node cost `distance + w * blocks`.
    pub block_weight: f64,
    /// Upper bound on instantiated search nodes per call.
    pub max_nodes: usize,
    /// Random starts per search node on top of the warm start inherited from
    /// the parent. `optimizer.restarts` applies to direct instantiation and
    /// pruning refits.
    pub node_restarts: usize,
    /// Try removing blocks from a converged result.
    pub prune: bool,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-10,
            max_blocks: 14,
            optimizer: OptimizerConfig::default(),
            leap_gap: 3,
            leap_factor: 10.0,
            freeze_prefix_params: false,
            block_weight: 0.5,
            max_nodes: 2500,
            node_restarts: 0,
            prune: true,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(TopasError::Config("epsilon must be positive".into()));
        }
        if !(self.leap_factor > 1.0) {
            return Err(TopasError::Config("leap_factor must exceed 1".into()));
        }
        if !(self.block_weight >= 0.0) {
            return Err(TopasError::Config("block_weight must be non-negative".into()));
        }
        Ok(())
    }
}
