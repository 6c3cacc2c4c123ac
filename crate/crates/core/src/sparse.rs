//! Minimal complex CSR matrix tuned for the master-equation right-hand
//! side, where the dominant cost is sparse × dense products with a dense
//! row-major ρ. Cost per product is O(nnz · D) rather than O(D³).

use crate::{C64, CMat, CVec};
use num_traits::Zero;

/// Square sparse matrix in compressed-sparse-row form.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicate entries are summed,
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| !t.2.is_zero());
        let mut indptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            indptr[r + 1] += 1;
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            dim,
            indptr,
            indices: merged.iter().map(|t| t.1).collect(),
            data: merged.iter().map(|t| t.2).collect(),
        }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        CsrMatrix {
            dim,
            indptr: (0..=dim).collect(),
            indices: (0..dim).collect(),
            data: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Diagonal matrix from real entries.
    pub fn from_diag(d: &[f64]) -> Self {
        CsrMatrix {
            dim: d.len(),
            indptr: (0..=d.len()).collect(),
            indices: (0..d.len()).collect(),
            data: d.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Convert a dense matrix, dropping entries with |z| <= tol.
    pub fn from_dense(m: &CMat, tol: f64) -> Self {
        let dim = m.nrows();
        assert_eq!(dim, m.ncols());
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            for c in 0..dim {
                let z = m[[r, c]];
                if z.norm_sqr() > tol * tol {
                    indices.push(c);
                    data.push(z);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { dim, indptr, indices, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros((self.dim, self.dim));
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[[r, self.indices[k]]] = self.data[k];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let triplets = self
            .iter()
            .map(|(r, c, v)| (c, r, v.conj()))
            .collect::<Vec<_>>();
        CsrMatrix::from_triplets(self.dim, triplets)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1])
                .map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= z;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut triplets = self.iter().collect::<Vec<_>>();
        triplets.extend(other.iter());
        CsrMatrix::from_triplets(self.dim, triplets)
    }

    /// Sparse * sparse product (used only at construction time).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let j = self.indices[k];
                let a = self.data[k];
                for k2 in other.indptr[j]..other.indptr[j + 1] {
                    triplets.push((r, other.indices[k2], a * other.data[k2]));
                }
            }
        }
        CsrMatrix::from_triplets(self.dim, triplets)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &CVec) -> CVec {
        assert_eq!(v.len(), self.dim);
        let vs = v.as_slice().expect("contiguous");
        let mut out = CVec::zeros(self.dim);
        let os = out.as_slice_mut().unwrap();
        for r in 0..self.dim {
            let mut acc = C64::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * vs[self.indices[k]];
            }
            os[r] = acc;
        }
        out
    }

    /// out += alpha * self * b, with b and out dense row-major.
    pub fn mul_dense_acc(&self, b: &CMat, alpha: C64, out: &mut CMat) {
        let n = self.dim;
        assert_eq!(b.nrows(), n);
        let bs = b.as_slice().expect("row-major");
        let os = out.as_slice_mut().expect("row-major");
        for r in 0..n {
            let orow = &mut os[r * n..(r + 1) * n];
            for k in self.indptr[r]..self.indptr[r + 1] {
                let coef = alpha * self.data[k];
                let brow = &bs[self.indices[k] * n..(self.indices[k] + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += coef * bv;
                }
            }
        }
    }

    /// out += alpha * b * self, with b and out dense row-major.
    pub fn rmul_dense_acc(&self, b: &CMat, alpha: C64, out: &mut CMat) {
        let n = self.dim;
        assert_eq!(b.nrows(), n);
        let bs = b.as_slice().expect("row-major");
        let os = out.as_slice_mut().expect("row-major");
        for i in 0..n {
            let brow = &bs[i * n..(i + 1) * n];
            let orow = &mut os[i * n..(i + 1) * n];
            for j in 0..n {
                let bv = brow[j];
                if bv.is_zero() {
                    continue;
                }
                let coef = alpha * bv;
                for k in self.indptr[j]..self.indptr[j + 1] {
                    orow[self.indices[k]] += coef * self.data[k];
                }
            }
        }
    }

    /// Max-norm of (self - self†); zero for Hermitian matrices.
    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.adjoint();
        let mut err: f64 = 0.0;
        let mut diff = self.iter().collect::<Vec<_>>();
        diff.extend(adj.iter().map(|(r, c, v)| (r, c, -v)));
        let merged = CsrMatrix::from_triplets(self.dim, diff);
        for (_, _, v) in merged.iter() {
            err = err.max(v.norm());
        }
        err
    }

    /// Gershgorin bound on the spectral radius (max absolute row sum).
    pub fn gershgorin_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.data[k].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(
            3,
            vec![
                (2, 1, c(1.0, 0.0)),
                (0, 0, c(0.5, 0.0)),
                (0, 0, c(0.5, 1.0)),
                (1, 2, c(0.0, -1.0)),
            ],
        );
        assert_eq!(m.nnz(), 3);
        let d = m.to_dense();
        assert_eq!(d[[0, 0]], c(1.0, 1.0));
        assert_eq!(d[[1, 2]], c(0.0, -1.0));
        assert_eq!(d[[2, 1]], c(1.0, 0.0));
    }

    #[test]
    fn products_match_dense() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(0, 1, c(2.0, 1.0)), (1, 0, c(0.0, -3.0)), (2, 2, c(1.0, 0.0))],
        );
        let b: CMat = array![
            [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            [c(3.0, 0.0), c(0.0, 0.0), c(1.0, -1.0)],
        ];
        let ad = a.to_dense();
        let mut out = CMat::zeros((3, 3));
        a.mul_dense_acc(&b, c(1.0, 0.0), &mut out);
        let want = ad.dot(&b);
        assert!((&out - &want).iter().all(|z| z.norm() < 1e-12));

        let mut out2 = CMat::zeros((3, 3));
        a.rmul_dense_acc(&b, c(0.5, 0.5), &mut out2);
        let want2 = b.dot(&ad) * c(0.5, 0.5);
        assert!((&out2 - &want2).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn adjoint_and_hermiticity() {
        let h = CsrMatrix::from_triplets(
            2,
            vec![(0, 1, c(1.0, -2.0)), (1, 0, c(1.0, 2.0)), (0, 0, c(3.0, 0.0))],
        );
        assert!(h.hermiticity_error() < 1e-15);
        let g = CsrMatrix::from_triplets(2, vec![(0, 1, c(1.0, 0.0))]);
        assert!((g.hermiticity_error() - 1.0).abs() < 1e-15);
        let gd = g.adjoint().to_dense();
        assert_eq!(gd[[1, 0]], c(1.0, 0.0));
    }

    #[test]
    fn matvec_and_gershgorin() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 1, c(0.0, 2.0)), (1, 1, c(1.0, 0.0))]);
        let v: CVec = array![c(1.0, 0.0), c(2.0, 0.0)];
        let w = a.apply(&v);
        assert_eq!(w[0], c(0.0, 4.0));
        assert_eq!(w[1], c(2.0, 0.0));
        assert!((a.gershgorin_norm() - 2.0).abs() < 1e-15);
    }
}
