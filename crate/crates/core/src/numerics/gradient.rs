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

use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{apply_1q_cols, apply_1q_rows, apply_cnot_cols, apply_cnot_rows, distance_raw, matmul, Mat2, UnitaryMatrix};
use crate::error::{Result, TopasError};
use crate::synthesizer::{AnsatzCircuit, AnsatzOp};

/// Free parameters of an ansatz, three radians per `U3`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TopasError::Config("non-finite parameter".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    #[default]
    Analytic,
    /// Central differences with step `1e-6`.
    FiniteDifference,
}

/// Below this distance the gradient is reported as zero: the distance has a
/// conical minimum, so any subgradient is valid there.
const STATIONARY_DISTANCE: f64 = 1e-12;

const FD_STEP: f64 = 1e-6;

/// Partial derivatives of `U3(theta, phi, lambda)` w.r.t. each angle.
pub(crate) fn u3_derivatives(theta: f64, phi: f64, lambda: f64) -> [Mat2; 3] {
    let (s, c) = (theta / 2.0).sin_cos();
    let i = Complex64::i();
    let el = Complex64::from_polar(1.0, lambda);
    let ep = Complex64::from_polar(1.0, phi);
    let epl = Complex64::from_polar(1.0, phi + lambda);
    let z = Complex64::new(0.0, 0.0);
    [
        [
            [Complex64::new(-s / 2.0, 0.0), -el * (c / 2.0)],
            [ep * (c / 2.0), -epl * (s / 2.0)],
        ],
        [[z, z], [i * ep * s, i * epl * c]],
        [[z, -i * el * s], [z, i * epl * c]],
    ]
}

fn adjoint2(g: &Mat2) -> Mat2 {
    [
        [g[0][0].conj(), g[1][0].conj()],
        [g[0][1].conj(), g[1][1].conj()],
    ]
}

/// Gradient of `hs_distance(ansatz(params), target)` with respect to every
/// parameter.
pub fn distance_gradient(
    ansatz: &AnsatzCircuit,
    params: &[f64],
    target: &UnitaryMatrix,
) -> Result<ParamVector> {
    distance_gradient_with(ansatz, params, target, GradientMethod::Analytic)
}

pub fn distance_gradient_with(
    ansatz: &AnsatzCircuit,
    params: &[f64],
    target: &UnitaryMatrix,
    method: GradientMethod,
) -> Result<ParamVector> {
    if params.len() != ansatz.num_params() {
        return Err(TopasError::DimensionMismatch {
            left: ansatz.num_params(),
            right: params.len(),
        });
    }
    let dim = 1usize << ansatz.width();
    if target.dim() != dim {
        return Err(TopasError::DimensionMismatch {
            left: dim,
            right: target.dim(),
        });
    }
    Ok(ParamVector(match method {
        GradientMethod::Analytic => analytic(ansatz, params, target),
        GradientMethod::FiniteDifference => finite_difference(ansatz, params, target),
    }))
}

fn finite_difference(ansatz: &AnsatzCircuit, params: &[f64], target: &UnitaryMatrix) -> Vec<f64> {
    let dim = target.dim();
    let mut p = params.to_vec();
    (0..params.len())
        .map(|j| {
            p[j] = params[j] + FD_STEP;
            let plus = distance_raw(dim, ansatz.unitary(&p).as_slice(), target.as_slice());
            p[j] = params[j] - FD_STEP;
            let minus = distance_raw(dim, ansatz.unitary(&p).as_slice(), target.as_slice());
            p[j] = params[j];
            (plus - minus) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Environment sweep: with `U = R_k G_k L_k`, `dTr(V^dag U) = Tr(dG_k E_k)`
/// where `E_k = L_k V^dag R_k` and `E_{k+1} = G_k E_k G_{k+1}^dag`.
fn analytic(ansatz: &AnsatzCircuit, params: &[f64], target: &UnitaryMatrix) -> Vec<f64> {
    let width = ansatz.width();
    let dim = target.dim();
    let n = dim as f64;
    let u = ansatz.unitary(params);
    let d = distance_raw(dim, u.as_slice(), target.as_slice());
    let mut grad = vec![0.0; params.len()];
    if d < STATIONARY_DISTANCE {
        return grad;
    }
    let vdag = target.adjoint();
    let t: Complex64 = vdag.trace_of_product(&u);

    let ops = ansatz.ops();
    let mats: Vec<Option<Mat2>> = ops
        .iter()
        .map(|op| match *op {
            AnsatzOp::U3 { offset, .. } => Some(super::u3_matrix(
                params[offset],
                params[offset + 1],
                params[offset + 2],
            )),
            AnsatzOp::Cnot { .. } => None,
        })
        .collect();

    let mut env = matmul(dim, vdag.as_slice(), u.as_slice());
    apply_adjoint_right(&mut env, dim, width, &ops[0], mats[0].as_ref());
    for k in 0..ops.len() {
        if let AnsatzOp::U3 { qubit, offset } = ops[k] {
            let local = partial_trace(&env, dim, width, qubit);
            let derivs = u3_derivatives(params[offset], params[offset + 1], params[offset + 2]);
            for (j, dg) in derivs.iter().enumerate() {
                let mut dt = Complex64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        dt += dg[a][b] * local[b][a];
                    }
                }
                grad[offset + j] = -(t.conj() * dt).re / (n * n * d);
            }
        }
        if k + 1 < ops.len() {
            match ops[k] {
                AnsatzOp::U3 { qubit, .. } => {
                    apply_1q_rows(&mut env, dim, width, qubit, mats[k].as_ref().expect("u3"))
                }
                AnsatzOp::Cnot { control, target } => apply_cnot_rows(&mut env, dim, width, control, target),
            }
            apply_adjoint_right(&mut env, dim, width, &ops[k + 1], mats[k + 1].as_ref());
        }
    }
    grad
}

fn apply_adjoint_right(m: &mut [Complex64], dim: usize, width: usize, op: &AnsatzOp, mat: Option<&Mat2>) {
    match *op {
        AnsatzOp::U3 { qubit, .. } => apply_1q_cols(m, dim, width, qubit, &adjoint2(mat.expect("u3"))),
        AnsatzOp::Cnot { control, target } => apply_cnot_cols(m, dim, width, control, target),
    }
}

/// `M[b][a] = sum over the other wires of E[(b, rest), (a, rest)]`.
pub(crate) fn partial_trace(e: &[Complex64], dim: usize, width: usize, q: usize) -> Mat2 {
    let mask = 1usize << (width - 1 - q);
    let z = Complex64::new(0.0, 0.0);
    let mut m = [[z, z], [z, z]];
    for x in (0..dim).filter(|x| x & mask == 0) {
        for (b, rb) in [x, x | mask].into_iter().enumerate() {
            for (a, ca) in [x, x | mask].into_iter().enumerate() {
                m[b][a] += e[rb * dim + ca];
            }
        }
    }
    m
}

impl UnitaryMatrix {
    /// `Tr(self * other)` without forming the product.
    pub(crate) fn trace_of_product(&self, other: &UnitaryMatrix) -> Complex64 {
        let n = self.dim();
        let (a, b) = (self.as_slice(), other.as_slice());
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                t += a[i * n + k] * b[k * n + i];
            }
        }
        t
    }
}
