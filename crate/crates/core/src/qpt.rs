//! Three-qubit quantum process tomography.
//!
//! A map Φ on the 8-dimensional logical space is expanded as
//! Φ(ϱ) = Σ_{mn} χ_{mn} K̂_m ϱ K̂_n† over the fixed operator basis built
//! from {I, X, Y ≡ −iσ_y, Z} per qubit. With Tr[K̂_m†K̂_n] = 8δ_{mn} the
//! reconstruction is an exact linear inversion (the maps here are
//! simulated, not measured, so there is no statistical noise to fight)
//! and Tr χ = 1 for trace-preserving maps.

use crate::error::{Error, Result};
use crate::{C64, CMat};
use ndarray::ShapeBuilder;
use ndarray_linalg::{EigValsh, UPLO};
use rayon::prelude::*;

const DIM: usize = 8;
const NOPS: usize = 64;

/// The 64 basis operators K̂_m and their labels ("IXZ", ...), ordered
/// lexicographically with (I, X, Y, Z) per site and site 1 slowest.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    ops: Vec<CMat>,
    labels: Vec<String>,
    /// 64×64 matrix whose m-th column is the row-major flattening of K̂_m.
    q: CMat,
}

fn single_qubit_ops() -> [CMat; 4] {
    let z = |re: f64| C64::new(re, 0.0);
    let mut i2 = CMat::zeros((2, 2));
    i2[[0, 0]] = z(1.0);
    i2[[1, 1]] = z(1.0);
    let mut x = CMat::zeros((2, 2));
    x[[0, 1]] = z(1.0);
    x[[1, 0]] = z(1.0);
    // Y = -i sigma_y is real
    let mut y = CMat::zeros((2, 2));
    y[[0, 1]] = z(-1.0);
    y[[1, 0]] = z(1.0);
    let mut zz = CMat::zeros((2, 2));
    zz[[0, 0]] = z(1.0);
    zz[[1, 1]] = z(-1.0);
    [i2, x, y, zz]
}

impl OperatorBasis {
    pub fn three_qubit() -> Self {
        let singles = single_qubit_ops();
        let syms = ['I', 'X', 'Y', 'Z'];
        let mut ops = Vec::with_capacity(NOPS);
        let mut labels = Vec::with_capacity(NOPS);
        for m in 0..NOPS {
            let d1 = m / 16;
            let d2 = (m / 4) % 4;
            let d3 = m % 4;
            // logical index i = q1 + 2 q2 + 4 q3, so qubit 3 is the most
            // significant kron factor
            let k = kron2(&singles[d3], &kron2(&singles[d2], &singles[d1]));
            ops.push(k);
            labels.push(format!("{}{}{}", syms[d1], syms[d2], syms[d3]));
        }
        let mut q = CMat::zeros((NOPS, NOPS));
        for (m, k) in ops.iter().enumerate() {
            for a in 0..DIM {
                for i in 0..DIM {
                    q[[a * DIM + i, m]] = k[[a, i]];
                }
            }
        }
        OperatorBasis { ops, labels, q }
    }

    pub fn op(&self, m: usize) -> &CMat {
        &self.ops[m]
    }

    pub fn label(&self, m: usize) -> &str {
        &self.labels[m]
    }

    pub fn len(&self) -> usize {
        NOPS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Expansion coefficients c_m = Tr[K̂_m† M]/8 of an 8×8 matrix.
    pub fn coefficients(&self, m8: &CMat) -> Vec<C64> {
        self.ops
            .iter()
            .map(|k| {
                let mut tr = C64::new(0.0, 0.0);
                for a in 0..DIM {
                    for b in 0..DIM {
                        tr += k[[b, a]].conj() * m8[[b, a]];
                    }
                }
                tr / C64::new(8.0, 0.0)
            })
            .collect()
    }
}

fn kron2(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

/// 64×64 process matrix χ in the fixed three-qubit operator basis.
#[derive(Clone, Debug)]
pub struct ProcessMatrix {
    chi: CMat,
}

impl ProcessMatrix {
    pub fn from_matrix(chi: CMat) -> Result<Self> {
        if chi.nrows() != NOPS || chi.ncols() != NOPS {
            return Err(Error::invalid("process matrix must be 64x64"));
        }
        Ok(ProcessMatrix { chi })
    }

    pub fn matrix(&self) -> &CMat {
        &self.chi
    }

    pub fn trace(&self) -> f64 {
        self.chi.diag().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        crate::hilbert::hermiticity_error(&self.chi)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut f = CMat::zeros(self.chi.raw_dim().f());
        f.assign(&self.chi);
        f.eigvalsh(UPLO::Lower)
            .map(|v| v.iter().cloned().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Moduli of the entries (the quantity the figures plot).
    pub fn moduli(&self) -> ndarray::Array2<f64> {
        self.chi.mapv(|z| z.norm())
    }

    /// Apply the reconstructed map to an 8×8 input.
    pub fn apply(&self, basis: &OperatorBasis, rho: &CMat) -> CMat {
        let mut out = CMat::zeros((DIM, DIM));
        for m in 0..NOPS {
            let km_rho = basis.op(m).dot(rho);
            for n in 0..NOPS {
                let w = self.chi[[m, n]];
                if w.norm() < 1e-16 {
                    continue;
                }
                let kn_dag = basis.op(n).t().mapv(|z| z.conj());
                out = out + km_rho.dot(&kn_dag).mapv(|z| w * z);
            }
        }
        out
    }
}

/// χ of a unitary map: rank one, χ = c c† with c_m = Tr[K̂_m†U]/8.
pub fn chi_of_unitary(u8: &CMat) -> Result<ProcessMatrix> {
    if u8.nrows() != DIM || u8.ncols() != DIM {
        return Err(Error::invalid("unitary must be 8x8"));
    }
    let prod = u8.t().mapv(|z| z.conj()).dot(u8);
    let mut err: f64 = 0.0;
    for r in 0..DIM {
        for c in 0..DIM {
            let want = if r == c { 1.0 } else { 0.0 };
            err = err.max((prod[[r, c]] - C64::new(want, 0.0)).norm());
        }
    }
    if err > 1e-8 {
        return Err(Error::invalid(format!(
            "chi_of_unitary needs a unitary input; ‖U†U − 1‖ = {err:.3e}"
        )));
    }
    let basis = OperatorBasis::three_qubit();
    let c = basis.coefficients(u8);
    let mut chi = CMat::zeros((NOPS, NOPS));
    for m in 0..NOPS {
        for n in 0..NOPS {
            chi[[m, n]] = c[m] * c[n].conj();
        }
    }
    ProcessMatrix::from_matrix(chi)
}

/// The spanning preparation set: the 8 basis projectors |i⟩⟨i| plus, for
/// each pair i < j, (|i⟩+|j⟩)(⟨i|+⟨j|)/2 and (|i⟩+i|j⟩)(⟨i|−i⟨j|)/2.
fn preparations() -> Vec<(usize, usize, u8, CMat)> {
    let mut preps = Vec::with_capacity(NOPS);
    for i in 0..DIM {
        let mut p = CMat::zeros((DIM, DIM));
        p[[i, i]] = C64::new(1.0, 0.0);
        preps.push((i, i, 0u8, p));
    }
    for i in 0..DIM {
        for j in i + 1..DIM {
            let mut v = ndarray::Array1::<C64>::zeros(DIM);
            v[i] = C64::new(1.0, 0.0);
            v[j] = C64::new(1.0, 0.0);
            let p1 = CMat::from_shape_fn((DIM, DIM), |(a, b)| v[a] * v[b].conj() * C64::new(0.5, 0.0));
            preps.push((i, j, 1u8, p1));
            let mut w = ndarray::Array1::<C64>::zeros(DIM);
            w[i] = C64::new(1.0, 0.0);
            w[j] = C64::new(0.0, 1.0);
            let p2 = CMat::from_shape_fn((DIM, DIM), |(a, b)| w[a] * w[b].conj() * C64::new(0.5, 0.0));
            preps.push((i, j, 2u8, p2));
        }
    }
    preps
}

/// Tolerance on the held-out reconstruction residual.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

/// Reconstruct χ of a black-box linear map by probing it with the
/// spanning preparation set, assembling Φ(E_ij) by linearity, and solving
/// the basis expansion (exact here because the K̂ basis is orthogonal).
/// The probe evaluations run in parallel. A held-out input guards against
/// an inconsistent (non-linear or mis-dimensioned) map.
pub fn chi_of_map<F>(map: F) -> Result<ProcessMatrix>
where
    F: Fn(&CMat) -> Result<CMat> + Sync,
{
    let preps = preparations();
    let outputs: Result<Vec<_>> = preps
        .par_iter()
        .map(|(i, j, kind, p)| map(p).map(|out| (*i, *j, *kind, out)))
        .collect();
    let outputs = outputs?;

    // organize
    let mut diag: Vec<Option<CMat>> = vec![None; DIM];
    let mut plus: Vec<Vec<Option<CMat>>> = vec![vec![None; DIM]; DIM];
    let mut phase: Vec<Vec<Option<CMat>>> = vec![vec![None; DIM]; DIM];
    for (i, j, kind, out) in outputs {
        match kind {
            0 => diag[i] = Some(out),
            1 => plus[i][j] = Some(out),
            _ => phase[i][j] = Some(out),
        }
    }
    let diag: Vec<CMat> = diag.into_iter().map(|o| o.unwrap()).collect();

    // Lambda(E_ij) for all ordered pairs, by complex linearity:
    //   E_ij = P1 + i P2 - (1+i)(E_ii + E_jj)/2       (i < j)
    //   E_ji = P1 - i P2 - (1-i)(E_ii + E_jj)/2
    let mut lam = vec![vec![CMat::zeros((DIM, DIM)); DIM]; DIM];
    for i in 0..DIM {
        lam[i][i] = diag[i].clone();
    }
    let half = C64::new(0.5, 0.0);
    for i in 0..DIM {
        for j in i + 1..DIM {
            let p1 = plus[i][j].take().unwrap();
            let p2 = phase[i][j].take().unwrap();
            let s = (&diag[i] + &diag[j]).mapv(|z| z * half);
            let ipos = C64::new(0.0, 1.0);
            lam[i][j] = &p1 + &p2.mapv(|z| ipos * z) - s.mapv(|z| C64::new(1.0, 1.0) * z);
            lam[j][i] = &p1 - &p2.mapv(|z| ipos * z) - s.mapv(|z| C64::new(1.0, -1.0) * z);
        }
    }

    // T[(a,i),(b,j)] = Lambda(E_ij)[a,b]; chi = Q† T Q / 64
    let basis = OperatorBasis::three_qubit();
    let mut t = CMat::zeros((NOPS, NOPS));
    for i in 0..DIM {
        for j in 0..DIM {
            let l = &lam[i][j];
            for a in 0..DIM {
                for b in 0..DIM {
                    t[[a * DIM + i, b * DIM + j]] = l[[a, b]];
                }
            }
        }
    }
    let qdag = basis.q.t().mapv(|z| z.conj());
    let chi = qdag.dot(&t).dot(&basis.q).mapv(|z| z / C64::new(64.0, 0.0));
    let chi = (&chi + &chi.t().mapv(|z| z.conj())).mapv(|z| z * half);
    let chi = ProcessMatrix::from_matrix(chi)?;

    // held-out consistency check: a mixed state with coherences that is
    // not in the preparation set
    let held: CMat = {
        let mut v = ndarray::Array1::<C64>::zeros(DIM);
        for (k, item) in v.iter_mut().enumerate() {
            *item = C64::new(1.0 + 0.2 * k as f64, 0.15 * (k as f64) - 0.4);
        }
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let pure = CMat::from_shape_fn((DIM, DIM), |(a, b)| v[a] * v[b].conj() / C64::new(norm2, 0.0));
        let mix = CMat::eye(DIM).mapv(|z| z / C64::new(DIM as f64, 0.0));
        pure.mapv(|z| z * C64::new(0.7, 0.0)) + mix.mapv(|z| z * C64::new(0.3, 0.0))
    };
    let direct = map(&held)?;
    let reconstructed = chi.apply(&basis, &held);
    let residual = (&direct - &reconstructed)
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::InconsistentReconstruction {
            residual,
            tol: RECONSTRUCTION_TOL,
        });
    }
    Ok(chi)
}

/// Gate fidelity Tr[χ_T χ] (real part; the imaginary residue of the
/// product of Hermitian matrices is numerical noise).
pub fn gate_fidelity(chi_target: &ProcessMatrix, chi: &ProcessMatrix) -> f64 {
    let mut tr = C64::new(0.0, 0.0);
    for m in 0..NOPS {
        for n in 0..NOPS {
            tr += chi_target.matrix()[[m, n]] * chi.matrix()[[n, m]];
        }
    }
    tr.re
}

/// Average state fidelity (d F_g + 1)/(d + 1).
pub fn avg_state_fidelity(f_gate: f64, d: usize) -> f64 {
    (d as f64 * f_gate + 1.0) / (d as f64 + 1.0)
}

/// Per-row maxima of |χ̃ − χ_T| and the global maximum.
pub fn discrepancy_rows(chi_a: &ProcessMatrix, chi_b: &ProcessMatrix) -> (Vec<f64>, f64) {
    let mut rows = Vec::with_capacity(NOPS);
    let mut global: f64 = 0.0;
    for m in 0..NOPS {
        let mut rowmax: f64 = 0.0;
        for n in 0..NOPS {
            let d = (chi_a.matrix()[[m, n]] - chi_b.matrix()[[m, n]]).norm();
            rowmax = rowmax.max(d);
        }
        global = global.max(rowmax);
        rows.push(rowmax);
    }
    (rows, global)
}
