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

//! Dense complex unitary kernels and the Hilbert-Schmidt distance.
//!
//! Matrices are row-major. Qubit 0 is the most significant bit of a basis
//! index, so for `n` qubits the bit of qubit `q` has weight `2^(n-1-q)`.

mod gradient;

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate, SIMULATION_CAP};
use crate::error::{Result, TopasError};

pub use gradient::{distance_gradient, distance_gradient_with, GradientMethod, ParamVector};
pub(crate) use gradient::u3_derivatives;

/// Unitarity tolerance enforced by [`UnitaryMatrix::new`].
pub const UNITARITY_TOL: f64 = 1e-10;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

pub type Mat2 = [[Complex64; 2]; 2];

/// Angles `(theta, phi, lambda)` with `m = e^{i alpha} U3(theta, phi, lambda)`
/// for some global phase `alpha`. `m` must be unitary.
pub fn u3_angles(m: &Mat2) -> (f64, f64, f64) {
    let theta = 2.0 * m[1][0].norm().atan2(m[0][0].norm());
    if m[0][0].norm() < 1e-12 {
        // cos(theta/2) = 0 leaves phi free
        let alpha = m[1][0].arg();
        return (theta, 0.0, (-m[0][1]).arg() - alpha);
    }
    let alpha = m[0][0].arg();
    if m[1][0].norm() < 1e-12 {
        return (theta, 0.0, m[1][1].arg() - alpha);
    }
    (theta, m[1][0].arg() - alpha, (-m[0][1]).arg() - alpha)
}

/// `U3(theta, phi, lambda)` in the OpenQASM 2 convention.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Checked constructor: `dim` must be a power of two and
    /// `max |U^dag U - I| < 1e-10`.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() || data.len() != dim * dim {
            return Err(TopasError::DimensionMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        let m = Self { dim, data };
        let deviation = m.unitarity_deviation();
        if deviation.is_nan() || deviation >= UNITARITY_TOL {
            return Err(TopasError::NotUnitary { deviation });
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C1;
        }
        Self { dim, data }
    }

    /// Basis permutation `|x> -> |perm(x)>` where wire `q` moves to wire
    /// `perm[q]`.
    pub fn qubit_permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let dim = 1usize << n;
        let mut data = vec![C0; dim * dim];
        for x in 0..dim {
            let mut y = 0;
            for (q, &p) in perm.iter().enumerate() {
                if x >> (n - 1 - q) & 1 == 1 {
                    y |= 1 << (n - 1 - p);
                }
            }
            data[y * dim + x] = C1;
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `max_ij |(U^dag U - I)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = C0;
                for k in 0..n {
                    acc += self.data[k * n + i].conj() * self.data[k * n + j];
                }
                if i == j {
                    acc -= C1;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![C0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        Self {
            dim: self.dim,
            data: matmul(self.dim, &self.data, &other.data),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `self <- G self` for a gate on `width` wires.
    pub fn apply_gate_left(&mut self, gate: &Gate, width: usize) {
        apply_gate_rows(&mut self.data, self.dim, width, gate);
    }

    /// `self <- self G` for a gate on `width` wires.
    pub fn apply_gate_right(&mut self, gate: &Gate, width: usize) {
        apply_gate_cols(&mut self.data, self.dim, width, gate);
    }

    /// Tensor product `self (x) other`, `self` on the more significant wires.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut data = vec![C0; n * n];
        for i in 0..a {
            for j in 0..a {
                let x = self.data[i * a + j];
                for k in 0..b {
                    for l in 0..b {
                        data[(i * b + k) * n + (j * b + l)] = x * other.data[k * b + l];
                    }
                }
            }
        }
        Self { dim: n, data }
    }

    /// Haar-random unitary: QR of a complex Gaussian matrix with the phases
    /// of `R`'s diagonal folded back into `Q`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let z = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = z.qr();
        let (q, r) = (qr.q(), qr.r());
        let mut data = vec![C0; dim * dim];
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C1 };
            for i in 0..dim {
                data[i * dim + j] = q[(i, j)] * phase;
            }
        }
        Self { dim, data }
    }

    /// Writes the matrix as `b"TOPASUM1"`, `u32` LE dimension, then `dim^2`
    /// entries in row-major order as interleaved little-endian `f64` re/im.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the format produced by [`UnitaryMatrix::write_binary`]; the
    /// result passes the unitarity check.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(TopasError::MatrixDump("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word) as usize;
        if !dim.is_power_of_two() || dim > 1 << SIMULATION_CAP {
            return Err(TopasError::MatrixDump(format!("bad dimension {dim}")));
        }
        let mut data = Vec::with_capacity(dim * dim);
        let mut buf = [0u8; 16];
        for _ in 0..dim * dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
            data.push(Complex64::new(re, im));
        }
        Self::new(dim, data)
    }
}

pub const DUMP_MAGIC: &[u8; 8] = b"TOPASUM1";

pub(crate) fn matmul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![C0; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let x = a[i * n + k];
            if x == C0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (o, y) in row.iter_mut().zip(brow) {
                *o += x * y;
            }
        }
    }
    out
}

fn bit(width: usize, q: usize) -> usize {
    1 << (width - 1 - q)
}

/// `M <- (g on qubit q) M` for a row-major `dim x dim` matrix.
pub(crate) fn apply_1q_rows(m: &mut [Complex64], dim: usize, width: usize, q: usize, g: &Mat2) {
    let mask = bit(width, q);
    for r0 in (0..dim).filter(|r| r & mask == 0) {
        let r1 = r0 | mask;
        for c in 0..dim {
            let a = m[r0 * dim + c];
            let b = m[r1 * dim + c];
            m[r0 * dim + c] = g[0][0] * a + g[0][1] * b;
            m[r1 * dim + c] = g[1][0] * a + g[1][1] * b;
        }
    }
}

/// `M <- M (g on qubit q)`.
pub(crate) fn apply_1q_cols(m: &mut [Complex64], dim: usize, width: usize, q: usize, g: &Mat2) {
    let mask = bit(width, q);
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for c0 in (0..dim).filter(|c| c & mask == 0) {
            let c1 = c0 | mask;
            let (a, b) = (row[c0], row[c1]);
            row[c0] = a * g[0][0] + b * g[1][0];
            row[c1] = a * g[0][1] + b * g[1][1];
        }
    }
}

pub(crate) fn apply_cnot_rows(m: &mut [Complex64], dim: usize, width: usize, control: usize, target: usize) {
    let (cm, tm) = (bit(width, control), bit(width, target));
    for r in (0..dim).filter(|r| r & cm != 0 && r & tm == 0) {
        let s = r | tm;
        for c in 0..dim {
            m.swap(r * dim + c, s * dim + c);
        }
    }
}

pub(crate) fn apply_cnot_cols(m: &mut [Complex64], dim: usize, width: usize, control: usize, target: usize) {
    let (cm, tm) = (bit(width, control), bit(width, target));
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for c in (0..dim).filter(|c| c & cm != 0 && c & tm == 0) {
            row.swap(c, c | tm);
        }
    }
}

fn apply_swap_rows(m: &mut [Complex64], dim: usize, width: usize, a: usize, b: usize) {
    let (am, bm) = (bit(width, a), bit(width, b));
    for r in (0..dim).filter(|r| r & am != 0 && r & bm == 0) {
        let s = (r & !am) | bm;
        for c in 0..dim {
            m.swap(r * dim + c, s * dim + c);
        }
    }
}

fn apply_swap_cols(m: &mut [Complex64], dim: usize, width: usize, a: usize, b: usize) {
    let (am, bm) = (bit(width, a), bit(width, b));
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for c in (0..dim).filter(|c| c & am != 0 && c & bm == 0) {
            row.swap(c, (c & !am) | bm);
        }
    }
}

fn apply_gate_rows(m: &mut [Complex64], dim: usize, width: usize, gate: &Gate) {
    match *gate {
        Gate::U3 {
            qubit,
            theta,
            phi,
            lambda,
        } => apply_1q_rows(m, dim, width, qubit, &u3_matrix(theta, phi, lambda)),
        Gate::Cnot { control, target } => apply_cnot_rows(m, dim, width, control, target),
        Gate::Swap { a, b } => apply_swap_rows(m, dim, width, a, b),
    }
}

fn apply_gate_cols(m: &mut [Complex64], dim: usize, width: usize, gate: &Gate) {
    match *gate {
        Gate::U3 {
            qubit,
            theta,
            phi,
            lambda,
        } => apply_1q_cols(m, dim, width, qubit, &u3_matrix(theta, phi, lambda)),
        Gate::Cnot { control, target } => apply_cnot_cols(m, dim, width, control, target),
        Gate::Swap { a, b } => apply_swap_cols(m, dim, width, a, b),
    }
}

/// Full `2^width`-dimensional unitary of a single gate.
pub fn gate_unitary(gate: &Gate, width: usize) -> Result<UnitaryMatrix> {
    Circuit::from_gates(width, [*gate])?.unitary()
}

/// Phase-invariant normalized Hilbert-Schmidt distance
/// `sqrt(1 - |Tr(U^dag V)|^2 / N^2)`, in `[0, 1]`.
///
/// Evaluated as `sqrt(f (2 - f))` with
/// `f = min_a ||U - e^{ia} V||_F^2 / 2N = 1 - |Tr(U^dag V)| / N`, which keeps
/// full relative precision for nearly equal arguments instead of bottoming out
/// near `1e-8` like the trace form.
pub fn hs_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim != v.dim {
        return Err(TopasError::DimensionMismatch {
            left: u.dim,
            right: v.dim,
        });
    }
    Ok(distance_raw(u.dim, &u.data, &v.data))
}

pub(crate) fn distance_raw(n: usize, u: &[Complex64], v: &[Complex64]) -> f64 {
    let t: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let mag = t.norm();
    if mag == 0.0 {
        return 1.0;
    }
    // e^{ia} = conj(t)/|t| maximizes Re(e^{ia} t)
    let phase = t.conj() / mag;
    let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - phase * b).norm_sqr()).sum();
    let f = (sq / (2.0 * n as f64)).clamp(0.0, 1.0);
    (f * (2.0 - f)).max(0.0).sqrt()
}
