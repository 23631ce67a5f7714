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

//! Numerical parameter fitting for a fixed ansatz structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ansatz::{AnsatzCircuit, AnsatzOp};
use super::config::{Optimizer, SynthesisConfig};
use crate::numerics::{
    apply_1q_cols, apply_1q_rows, apply_cnot_cols, apply_cnot_rows, distance_gradient_with, distance_raw, matmul,
    u3_angles, u3_derivatives, u3_matrix, Mat2, ParamVector, UnitaryMatrix,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instantiation {
    pub params: ParamVector,
    pub distance: f64,
}

/// LM stops refining once the distance is this small.
const DISTANCE_FLOOR: f64 = 1e-15;
/// A fit still above `PLATEAU_DISTANCE` whose cost fell by less than
/// `PLATEAU_DROP` (relative) over the last `PLATEAU_WINDOW` accepted steps is
/// treated as stuck in a local minimum.
const PLATEAU_WINDOW: usize = 10;
const PLATEAU_DROP: f64 = 1e-3;
const PLATEAU_DISTANCE: f64 = 1e-6;
/// The hybrid optimizer hands sweep results closer than this to LM.
const POLISH_BELOW: f64 = 2e-1;
/// Sweeps stop when the infidelity fell by less than this fraction over the
/// last `PLATEAU_WINDOW` sweeps.
const SWEEP_DROP: f64 = 0.1;
/// Sweeps hand over to LM once the distance is this small.
const SWEEP_HANDOFF: f64 = 1e-6;

/// Fits `ansatz` to `target` from the zero point plus `cfg.optimizer.restarts`
/// random starts drawn from `rng`; returns the best fit.
pub fn instantiate(ansatz: &AnsatzCircuit, target: &UnitaryMatrix, cfg: &SynthesisConfig) -> Instantiation {
    let mut rng = super::node_rng(cfg.seed, 0, ansatz.blocks());
    instantiate_from(ansatz, target, cfg, &[vec![0.0; ansatz.num_params()]], &mut rng)
}

/// Runs the optimizer from each of `warm` and then from
/// `cfg.optimizer.restarts` random points, stopping early once a start
/// reaches `cfg.epsilon`.
pub(crate) fn instantiate_from(
    ansatz: &AnsatzCircuit,
    target: &UnitaryMatrix,
    cfg: &SynthesisConfig,
    warm: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
) -> Instantiation {
    assert_eq!(target.dim(), 1 << ansatz.width(), "target dimension");
    let np = ansatz.num_params();
    let randoms: Vec<Vec<f64>> = (0..cfg.optimizer.restarts)
        .map(|_| (0..np).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect())
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in warm.iter().chain(&randoms) {
        let (p, d) = match cfg.optimizer.method {
            Optimizer::LevenbergMarquardt => levenberg_marquardt(ansatz, target, start.clone(), cfg),
            Optimizer::Hybrid => {
                let (p, d) = sweep_optimize(ansatz, target, start.clone(), cfg);
                if d <= cfg.epsilon || d > POLISH_BELOW {
                    (p, d)
                } else {
                    levenberg_marquardt(ansatz, target, p, cfg)
                }
            }
            Optimizer::GradientDescent(method) => gradient_descent(ansatz, target, start.clone(), cfg, method),
        };
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((p, d));
        }
        if best.as_ref().is_some_and(|(_, bd)| *bd <= cfg.epsilon) {
            break;
        }
    }
    let (params, distance) = best.unwrap_or_else(|| {
        let p = vec![0.0; np];
        let d = distance_raw(target.dim(), ansatz.unitary(&p).as_slice(), target.as_slice());
        (p, d)
    });
    Instantiation {
        params: ParamVector::new(params).expect("optimizer keeps parameters finite"),
        distance,
    }
}

struct Compiled {
    ops: Vec<AnsatzOp>,
    width: usize,
    dim: usize,
}

impl Compiled {
    fn new(ansatz: &AnsatzCircuit) -> Self {
        Self {
            ops: ansatz.ops(),
            width: ansatz.width(),
            dim: 1 << ansatz.width(),
        }
    }

    fn mats(&self, params: &[f64]) -> Vec<Option<Mat2>> {
        self.ops
            .iter()
            .map(|op| match *op {
                AnsatzOp::U3 { offset, .. } => Some(u3_matrix(params[offset], params[offset + 1], params[offset + 2])),
                AnsatzOp::Cnot { .. } => None,
            })
            .collect()
    }

    fn apply_left(&self, m: &mut [Complex64], k: usize, mat: Option<&Mat2>) {
        match self.ops[k] {
            AnsatzOp::U3 { qubit, .. } => apply_1q_rows(m, self.dim, self.width, qubit, mat.expect("u3")),
            AnsatzOp::Cnot { control, target } => apply_cnot_rows(m, self.dim, self.width, control, target),
        }
    }

    fn apply_right(&self, m: &mut [Complex64], k: usize, mat: Option<&Mat2>) {
        match self.ops[k] {
            AnsatzOp::U3 { qubit, .. } => apply_1q_cols(m, self.dim, self.width, qubit, mat.expect("u3")),
            AnsatzOp::Cnot { control, target } => apply_cnot_cols(m, self.dim, self.width, control, target),
        }
    }

    fn unitary(&self, params: &[f64]) -> Vec<Complex64> {
        let mats = self.mats(params);
        let mut u = identity(self.dim);
        for k in 0..self.ops.len() {
            self.apply_left(&mut u, k, mats[k].as_ref());
        }
        u
    }

    /// Unitary and the derivative of the unitary w.r.t. every parameter, via
    /// `dU = R_k dG_k L_k` with prefix `L_k` and suffix `R_k` products.
    fn unitary_and_jacobian(&self, params: &[f64]) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        let mats = self.mats(params);
        let m = self.ops.len();
        let mut prefixes = Vec::with_capacity(m);
        let mut acc = identity(self.dim);
        for k in 0..m {
            prefixes.push(acc.clone());
            self.apply_left(&mut acc, k, mats[k].as_ref());
        }
        let u = acc;
        let mut jac = vec![Vec::new(); params.len()];
        let mut suffix = identity(self.dim);
        for k in (0..m).rev() {
            if let AnsatzOp::U3 { qubit, offset } = self.ops[k] {
                let derivs = u3_derivatives(params[offset], params[offset + 1], params[offset + 2]);
                for (j, dg) in derivs.iter().enumerate() {
                    let mut x = prefixes[k].clone();
                    apply_1q_rows(&mut x, self.dim, self.width, qubit, dg);
                    jac[offset + j] = matmul(self.dim, &suffix, &x);
                }
            }
            self.apply_right(&mut suffix, k, mats[k].as_ref());
        }
        (u, jac)
    }
}

fn identity(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    v
}

fn inner_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Levenberg-Marquardt on the residual `U(theta) - c V` where the unit phase
/// `c` is re-fitted in closed form each iteration and also carried as an extra
/// coordinate in the step.
fn levenberg_marquardt(
    ansatz: &AnsatzCircuit,
    target: &UnitaryMatrix,
    mut x: Vec<f64>,
    cfg: &SynthesisConfig,
) -> (Vec<f64>, f64) {
    let comp = Compiled::new(ansatz);
    let dim = comp.dim;
    let v = target.as_slice();
    let np = x.len();
    let mut lambda = 1e-3;
    let mut u = comp.unitary(&x);
    let mut dist = distance_raw(dim, &u, v);
    let mut stalls = 0;
    let mut history: Vec<f64> = Vec::new();

    for _ in 0..cfg.optimizer.max_iters {
        if dist <= DISTANCE_FLOOR {
            break;
        }
        let (u_now, jac) = comp.unitary_and_jacobian(&x);
        u = u_now;
        let phase = optimal_phase(&u, v);
        // W = U - c V with c = e^{i phi}; dW/dphi = -i c V
        let w: Vec<Complex64> = u.iter().zip(v).map(|(a, b)| a - phase * b).collect();
        let dphase: Vec<Complex64> = v.iter().map(|b| -Complex64::i() * phase * b).collect();
        let cost = 0.5 * w.iter().map(|z| z.norm_sqr()).sum::<f64>();

        let n = np + 1;
        let col = |i: usize| -> &[Complex64] {
            if i < np {
                &jac[i]
            } else {
                &dphase
            }
        };
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut g = DVector::<f64>::zeros(n);
        for i in 0..n {
            g[i] = inner_re(col(i), &w);
            for j in 0..=i {
                let s = inner_re(col(i), col(j));
                a[(i, j)] = s;
                a[(j, i)] = s;
            }
        }
        if g.amax() < cfg.optimizer.grad_tol {
            break;
        }

        let mut accepted = false;
        for _ in 0..12 {
            let mut damped = a.clone();
            for i in 0..n {
                damped[(i, i)] += lambda * (1.0 + a[(i, i)]);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let tu = comp.unitary(&trial);
            let tphase = optimal_phase(&tu, v);
            let tcost = 0.5 * tu.iter().zip(v).map(|(a, b)| (a - tphase * b).norm_sqr()).sum::<f64>();
            if tcost < cost {
                let rel = (cost - tcost) / cost.max(f64::MIN_POSITIVE);
                x = trial;
                u = tu;
                dist = distance_raw(dim, &u, v);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                stalls = if rel < 1e-9 { stalls + 1 } else { 0 };
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || stalls >= 5 {
            break;
        }
        history.push(dist * dist);
        if dist > PLATEAU_DISTANCE && history.len() > PLATEAU_WINDOW {
            let before = history[history.len() - 1 - PLATEAU_WINDOW];
            if dist * dist > before * (1.0 - PLATEAU_DROP) {
                break;
            }
        }
    }
    for p in &mut x {
        *p = p.rem_euclid(std::f64::consts::TAU);
    }
    let dist = distance_raw(dim, &comp.unitary(&x), v);
    (x, dist)
}

fn adjoint2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

/// Unitary `G` maximizing `Re Tr(G e)`: the polar factor of `e^dag`, in
/// closed form for 2x2 matrices. Returns `None` when `e` vanishes.
fn best_rotation(e: &Mat2) -> Option<(Mat2, f64)> {
    let m = adjoint2(e);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let frob: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let scale = (frob + 2.0 * det.norm()).sqrt();
    if scale < 1e-300 {
        return None;
    }
    let ph = if det.norm() > 0.0 { det / det.norm() } else { Complex64::new(1.0, 0.0) };
    // adj(m)^dag for adj(m) = [[d, -b], [-c, a]]
    let adj_dag = [
        [m[1][1].conj(), -m[1][0].conj()],
        [-m[0][1].conj(), m[0][0].conj()],
    ];
    let mut q = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            q[i][j] = (m[i][j] + ph * adj_dag[i][j]) / scale;
        }
    }
    Some((q, scale))
}

/// `e[b][a] = sum over the other qubits of p[(b, rest), (a, rest)]`, so that
/// `Tr((G on q) p) = Tr(G e)`.
fn reduced(p: &[Complex64], dim: usize, width: usize, q: usize) -> Mat2 {
    let mask = 1 << (width - 1 - q);
    let mut e = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in (0..dim).filter(|r| r & mask == 0) {
        let r1 = r | mask;
        e[0][0] += p[r * dim + r];
        e[0][1] += p[r * dim + r1];
        e[1][0] += p[r1 * dim + r];
        e[1][1] += p[r1 * dim + r1];
    }
    e
}

/// Coordinate sweeps: each `U3` in turn is replaced by the one-qubit unitary
/// that maximizes `|Tr(V^dag U)|` with all other gates fixed. Every update is
/// monotone in the fidelity.
fn sweep_optimize(
    ansatz: &AnsatzCircuit,
    target: &UnitaryMatrix,
    x: Vec<f64>,
    cfg: &SynthesisConfig,
) -> (Vec<f64>, f64) {
    let comp = Compiled::new(ansatz);
    let (dim, width) = (comp.dim, comp.width);
    let vdag = target.adjoint();
    let mut mats = comp.mats(&x);
    let m = comp.ops.len();
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..cfg.optimizer.max_iters {
        if m == 0 {
            break;
        }
        // P = (O_{m-2} ... O_0) V^dag, so that Tr(V^dag U) = Tr(O_{m-1} P)
        let mut p = vdag.as_slice().to_vec();
        for k in 0..m - 1 {
            comp.apply_left(&mut p, k, mats[k].as_ref());
        }
        let mut fidelity = 0.0;
        for k in (0..m).rev() {
            if let AnsatzOp::U3 { qubit, .. } = comp.ops[k] {
                let e = reduced(&p, dim, width, qubit);
                if let Some((g, s)) = best_rotation(&e) {
                    mats[k] = Some(g);
                    fidelity = s / dim as f64;
                }
            }
            if k > 0 {
                let inv = mats[k - 1].as_ref().map(adjoint2);
                comp.apply_left(&mut p, k - 1, inv.as_ref());
                comp.apply_right(&mut p, k, mats[k].as_ref());
            }
        }
        let infidelity = (1.0 - fidelity).max(0.0);
        history.push(infidelity);
        if (infidelity * (2.0 - infidelity)).sqrt() <= SWEEP_HANDOFF {
            break;
        }
        if history.len() > PLATEAU_WINDOW {
            let before = history[history.len() - 1 - PLATEAU_WINDOW];
            if infidelity > before * (1.0 - SWEEP_DROP) {
                break;
            }
        }
    }
    let mut out = x;
    for (op, mat) in comp.ops.iter().zip(&mats) {
        if let (AnsatzOp::U3 { offset, .. }, Some(g)) = (op, mat) {
            let (t, ph, l) = u3_angles(g);
            out[*offset] = t.rem_euclid(std::f64::consts::TAU);
            out[*offset + 1] = ph.rem_euclid(std::f64::consts::TAU);
            out[*offset + 2] = l.rem_euclid(std::f64::consts::TAU);
        }
    }
    let d = distance_raw(dim, &comp.unitary(&out), target.as_slice());
    (out, d)
}

fn optimal_phase(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    // c maximizing Re(conj(c) Tr(V^dag U))
    let s: Complex64 = v.iter().zip(u).map(|(b, a)| b.conj() * a).sum();
    if s.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        s / s.norm()
    }
}

/// Gradient descent on the distance with Armijo backtracking.
fn gradient_descent(
    ansatz: &AnsatzCircuit,
    target: &UnitaryMatrix,
    mut x: Vec<f64>,
    cfg: &SynthesisConfig,
    method: crate::numerics::GradientMethod,
) -> (Vec<f64>, f64) {
    let dim = target.dim();
    let eval = |p: &[f64]| distance_raw(dim, ansatz.unitary(p).as_slice(), target.as_slice());
    let mut d = eval(&x);
    let mut step = 1.0;
    for _ in 0..cfg.optimizer.max_iters {
        if d <= DISTANCE_FLOOR {
            break;
        }
        let g = distance_gradient_with(ansatz, &x, target, method).expect("shapes checked by caller");
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg.sqrt() < cfg.optimizer.grad_tol {
            break;
        }
        step *= 2.0;
        let mut moved = false;
        while step > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(g.iter()).map(|(p, gi)| p - step * gi).collect();
            let td = eval(&trial);
            if td <= d - 1e-4 * step * gg {
                x = trial;
                d = td;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (x, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::numerics::hs_distance;
    use rand::SeedableRng;

    fn cfg() -> SynthesisConfig {
        SynthesisConfig::default()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let a = AnsatzCircuit::with_blocks(2, [(0, 1), (1, 0)]);
        let comp = Compiled::new(&a);
        let p: Vec<f64> = (0..a.num_params()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let (_, jac) = comp.unitary_and_jacobian(&p);
        let h = 1e-6;
        for j in 0..p.len() {
            let mut pp = p.clone();
            pp[j] += h;
            let up = comp.unitary(&pp);
            pp[j] -= 2.0 * h;
            let um = comp.unitary(&pp);
            for e in 0..16 {
                let fd = (up[e] - um[e]) / (2.0 * h);
                assert!((fd - jac[j][e]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn separable_target_needs_no_blocks() {
        let target = Circuit::from_gates(2, [Gate::x(0)]).unwrap().unitary().unwrap();
        let r = instantiate(&AnsatzCircuit::new(2), &target, &cfg());
        assert!(r.distance < 1e-10, "{}", r.distance);
    }

    #[test]
    fn cnot_is_not_separable() {
        let target = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap().unitary().unwrap();
        let mut c = cfg();
        c.optimizer.restarts = 16;
        let r = instantiate(&AnsatzCircuit::new(2), &target, &c);
        assert!(r.distance > 0.1, "{}", r.distance);
    }

    #[test]
    fn one_block_reaches_cnot() {
        let target = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap().unitary().unwrap();
        let a = AnsatzCircuit::with_blocks(2, [(0, 1)]);
        let r = instantiate(&a, &target, &cfg());
        assert!(r.distance < 1e-10, "{}", r.distance);
        let check = hs_distance(&a.unitary(&r.params), &target).unwrap();
        assert!((check - r.distance).abs() < 1e-15);
    }

    #[test]
    fn best_rotation_maximizes_the_trace() {
        let e: Mat2 = [
            [Complex64::new(0.3, -1.2), Complex64::new(0.5, 0.1)],
            [Complex64::new(-0.7, 0.4), Complex64::new(0.2, 0.9)],
        ];
        let (g, s) = best_rotation(&e).unwrap();
        let tr = |g: &Mat2| (0..2).map(|i| (0..2).map(|j| g[i][j] * e[j][i]).sum::<Complex64>()).sum::<Complex64>();
        assert!((tr(&g).re - s).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let r = u3_matrix(rng.random_range(0.0..6.3), rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
            assert!(tr(&r).norm() <= s + 1e-12);
        }
    }

    #[test]
    fn hybrid_reaches_a_three_qubit_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let blocks = [(0, 1), (1, 2), (0, 1), (1, 2)];
        let a = AnsatzCircuit::with_blocks(3, blocks);
        let p: Vec<f64> = (0..a.num_params()).map(|_| rng.random_range(0.0..6.3)).collect();
        let target = a.unitary(&p);
        let r = instantiate(&a, &target, &cfg());
        assert!(r.distance < 1e-10, "{}", r.distance);
    }

    #[test]
    fn gradient_descent_makes_progress() {
        let target = Circuit::from_gates(1, [Gate::u3(0, 1.0, 2.0, 0.5)]).unwrap().unitary().unwrap();
        let mut c = cfg();
        c.optimizer.method = Optimizer::GradientDescent(crate::numerics::GradientMethod::Analytic);
        c.optimizer.max_iters = 3000;
        let r = instantiate(&AnsatzCircuit::new(1), &target, &c);
        assert!(r.distance < 1e-6, "{}", r.distance);
    }
}
