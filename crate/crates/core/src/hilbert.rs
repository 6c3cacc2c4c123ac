//! Composite Hilbert space of three 3-level ions and one truncated
//! phonon mode, with its elementary operators and the embedding of the
//! 8-dimensional logical basis.
//!
//! Basis ordering is lexicographic over (s₁, s₂, s₃, n) with level order
//! (l, g, e) and the phonon index varying fastest, so every operator built
//! from the same [`HilbertSpec`] is bit-reproducible.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::{C64, CMat, CVec};
use ndarray_linalg::{Eigh, UPLO};

/// Internal ionic levels: the auxiliary level l, the qubit levels g and e.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    L,
    G,
    E,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::L, Level::G, Level::E];

    fn ord(self) -> usize {
        match self {
            Level::L => 0,
            Level::G => 1,
            Level::E => 2,
        }
    }

    fn from_ord(k: usize) -> Level {
        Level::ALL[k]
    }
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Level::L => 'l',
            Level::G => 'g',
            Level::E => 'e',
        };
        write!(f, "{c}")
    }
}

/// Three 3-level ions tensored with a phonon mode truncated at Fock state
/// |N_ph⟩. Total dimension D = 27·(N_ph + 1).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpec {
    phonon_cutoff: usize,
}

/// Build the composite space; the protocol needs at least one phonon.
pub fn build_space(phonon_cutoff: usize) -> Result<HilbertSpec> {
    HilbertSpec::new(phonon_cutoff)
}

impl HilbertSpec {
    pub fn new(phonon_cutoff: usize) -> Result<Self> {
        if phonon_cutoff < 1 {
            return Err(Error::invalid(format!(
                "phonon cutoff must be >= 1, got {phonon_cutoff}"
            )));
        }
        Ok(HilbertSpec { phonon_cutoff })
    }

    pub fn phonon_cutoff(&self) -> usize {
        self.phonon_cutoff
    }

    pub fn phonon_dim(&self) -> usize {
        self.phonon_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        27 * self.phonon_dim()
    }

    /// Flat index of basis state |s₁ s₂ s₃, n⟩.
    pub fn index(&self, levels: [Level; 3], n: usize) -> usize {
        debug_assert!(n <= self.phonon_cutoff);
        ((levels[0].ord() * 3 + levels[1].ord()) * 3 + levels[2].ord()) * self.phonon_dim() + n
    }

    /// Basis label (s₁, s₂, s₃, n) of a flat index.
    pub fn label(&self, idx: usize) -> ([Level; 3], usize) {
        let n = idx % self.phonon_dim();
        let mut s = idx / self.phonon_dim();
        let s3 = s % 3;
        s /= 3;
        let s2 = s % 3;
        let s1 = s / 3;
        (
            [Level::from_ord(s1), Level::from_ord(s2), Level::from_ord(s3)],
            n,
        )
    }

    /// Phonon occupation of a flat index.
    pub fn phonon_of(&self, idx: usize) -> usize {
        idx % self.phonon_dim()
    }

    /// Enumerate all basis labels in index order.
    pub fn labels(&self) -> impl Iterator<Item = ([Level; 3], usize)> + '_ {
        (0..self.dim()).map(move |i| self.label(i))
    }

    fn check_ion(ion: usize) -> Result<()> {
        if !(1..=3).contains(&ion) {
            return Err(Error::invalid(format!("ion index must be 1..=3, got {ion}")));
        }
        Ok(())
    }

    /// |α⟩⟨β| on ion `ion` (1-based), identity on the other ions and the
    /// phonon mode. Sparse with 9·(N_ph+1) nonzeros.
    pub fn ion_op(&self, ion: usize, alpha: Level, beta: Level) -> Result<Operator> {
        Self::check_ion(ion)?;
        let mut triplets = Vec::with_capacity(9 * self.phonon_dim());
        for a in Level::ALL {
            for b in Level::ALL {
                let mut src = [a, b, Level::L];
                let mut dst = [a, b, Level::L];
                // place spectator levels around `ion`
                let spect = [a, b];
                let mut k = 0;
                for j in 0..3 {
                    if j + 1 == ion {
                        src[j] = beta;
                        dst[j] = alpha;
                    } else {
                        src[j] = spect[k];
                        dst[j] = spect[k];
                        k += 1;
                    }
                }
                debug_assert_eq!(k, 2);
                for n in 0..self.phonon_dim() {
                    triplets.push((self.index(dst, n), self.index(src, n), C64::new(1.0, 0.0)));
                }
            }
        }
        Ok(Operator::sparse(CsrMatrix::from_triplets(self.dim(), triplets)))
    }

    /// Projector |level⟩⟨level| on one ion.
    pub fn ion_projector(&self, ion: usize, level: Level) -> Result<Operator> {
        self.ion_op(ion, level, level)
    }

    /// Truncated annihilation operator: â|n⟩ = √n |n−1⟩, â|0⟩ = 0, and no
    /// matrix element above the cutoff.
    pub fn annihilator(&self) -> Operator {
        let np1 = self.phonon_dim();
        let mut triplets = Vec::with_capacity(27 * self.phonon_cutoff);
        for base in 0..27 {
            for n in 1..np1 {
                triplets.push((
                    base * np1 + n - 1,
                    base * np1 + n,
                    C64::new((n as f64).sqrt(), 0.0),
                ));
            }
        }
        Operator::sparse(CsrMatrix::from_triplets(self.dim(), triplets))
    }

    /// Phonon number operator â†â (diagonal).
    pub fn number_op(&self) -> Operator {
        let d: Vec<f64> = (0..self.dim()).map(|i| self.phonon_of(i) as f64).collect();
        Operator::sparse(CsrMatrix::from_diag(&d))
    }
}

/// Complex operator on the composite space. Storage is an internal detail:
/// generators stay sparse, pulse unitaries dense; observable semantics are
/// identical.
#[derive(Clone, Debug)]
pub enum Operator {
    Sparse(CsrMatrix),
    Dense(CMat),
}

impl Operator {
    pub fn sparse(m: CsrMatrix) -> Self {
        Operator::Sparse(m)
    }

    pub fn dense(m: CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Operator::Dense(m)
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Sparse(m) => m.dim(),
            Operator::Dense(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            Operator::Sparse(m) => m.to_dense(),
            Operator::Dense(m) => m.clone(),
        }
    }

    /// Borrow as CSR, converting if dense (entries below 1e-14 dropped).
    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            Operator::Sparse(m) => m.clone(),
            Operator::Dense(m) => CsrMatrix::from_dense(m, 1e-14),
        }
    }

    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Sparse(m) => Operator::Sparse(m.adjoint()),
            Operator::Dense(m) => Operator::Dense(m.t().mapv(|z| z.conj())),
        }
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        match self {
            Operator::Sparse(m) => m.apply(v),
            Operator::Dense(m) => m.dot(v),
        }
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        match (self, other) {
            (Operator::Sparse(a), Operator::Sparse(b)) => Operator::Sparse(a.matmul(b)),
            _ => Operator::Dense(self.to_dense().dot(&other.to_dense())),
        }
    }

    pub fn scale(&self, z: C64) -> Operator {
        match self {
            Operator::Sparse(m) => Operator::Sparse(m.scale(z)),
            Operator::Dense(m) => Operator::Dense(m.mapv(|v| v * z)),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        match (self, other) {
            (Operator::Sparse(a), Operator::Sparse(b)) => Operator::Sparse(a.add(b)),
            _ => Operator::Dense(self.to_dense() + other.to_dense()),
        }
    }

    /// Max-norm of (A − A†).
    pub fn hermiticity_error(&self) -> f64 {
        match self {
            Operator::Sparse(m) => m.hermiticity_error(),
            Operator::Dense(m) => {
                let mut err: f64 = 0.0;
                for r in 0..m.nrows() {
                    for c in r..m.ncols() {
                        err = err.max((m[[r, c]] - m[[c, r]].conj()).norm());
                    }
                }
                err
            }
        }
    }

    /// Max-norm of (U†U − 1).
    pub fn unitarity_error(&self) -> f64 {
        let d = self.to_dense();
        let prod = d.t().mapv(|z| z.conj()).dot(&d);
        let n = prod.nrows();
        let mut err: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                err = err.max((prod[[r, c]] - want).norm());
            }
        }
        err
    }

    /// U ρ U† for a dense ρ.
    pub fn conjugate_density(&self, rho: &CMat) -> CMat {
        match self {
            Operator::Sparse(m) => {
                let mut tmp = CMat::zeros(rho.raw_dim());
                m.mul_dense_acc(rho, C64::new(1.0, 0.0), &mut tmp);
                let madj = m.adjoint();
                let mut out = CMat::zeros(rho.raw_dim());
                madj.rmul_dense_acc(&tmp, C64::new(1.0, 0.0), &mut out);
                out
            }
            Operator::Dense(m) => m.dot(rho).dot(&m.t().mapv(|z| z.conj())),
        }
    }
}

/// Trace of a dense matrix.
pub fn trace(m: &CMat) -> C64 {
    m.diag().iter().sum()
}

/// Max-norm of (ρ − ρ†).
pub fn hermiticity_error(m: &CMat) -> f64 {
    let mut err: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            err = err.max((m[[r, c]] - m[[c, r]].conj()).norm());
        }
    }
    err
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    let (vals, _) = m
        .eigh(UPLO::Lower)
        .expect("hermitian eigendecomposition failed");
    vals.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// The eight logical kets of the computational basis ℬ.
///
/// Qubit encoding: (|0₁⟩, |1₁⟩) = (|g₁⟩, |e₁⟩) on the target ion and
/// (|0ⱼ⟩, |1ⱼ⟩) = (|gⱼ⟩, |lⱼ⟩) on the control ions j = 2, 3, phonon in
/// vacuum. Basis index i has q₁ as the least-significant bit. The last two
/// kets carry the scalar factor −i.
#[derive(Clone, Debug)]
pub struct LogicalBasis {
    spec: HilbertSpec,
    positions: [usize; 8],
    phases: [C64; 8],
}

impl LogicalBasis {
    pub fn new(spec: &HilbertSpec) -> Self {
        let mut positions = [0usize; 8];
        let mut phases = [C64::new(1.0, 0.0); 8];
        for i in 0..8 {
            let q1 = i & 1;
            let q2 = (i >> 1) & 1;
            let q3 = (i >> 2) & 1;
            let s1 = if q1 == 1 { Level::E } else { Level::G };
            let s2 = if q2 == 1 { Level::L } else { Level::G };
            let s3 = if q3 == 1 { Level::L } else { Level::G };
            positions[i] = spec.index([s1, s2, s3], 0);
            if i >= 6 {
                phases[i] = C64::new(0.0, -1.0);
            }
        }
        LogicalBasis { spec: *spec, positions, phases }
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn position(&self, i: usize) -> usize {
        self.positions[i]
    }

    pub fn phase(&self, i: usize) -> C64 {
        self.phases[i]
    }

    /// Full-space ket of logical basis state i (including the −i factors).
    pub fn embed_ket(&self, i: usize) -> Result<CVec> {
        if i >= 8 {
            return Err(Error::invalid(format!("logical index must be 0..8, got {i}")));
        }
        let mut v = CVec::zeros(self.spec.dim());
        v[self.positions[i]] = self.phases[i];
        Ok(v)
    }

    /// Embed a logical density matrix into the full space (phonon vacuum).
    pub fn embed_density(&self, rho8: &CMat) -> CMat {
        assert_eq!(rho8.nrows(), 8);
        let mut out = CMat::zeros((self.spec.dim(), self.spec.dim()));
        for i in 0..8 {
            for j in 0..8 {
                out[[self.positions[i], self.positions[j]]] =
                    self.phases[i] * rho8[[i, j]] * self.phases[j].conj();
            }
        }
        out
    }

    /// M_{ij} = ⟨b_i| ρ |b_j⟩. Projection may lose trace (leakage).
    pub fn project(&self, rho_full: &CMat) -> CMat {
        let mut out = CMat::zeros((8, 8));
        for i in 0..8 {
            for j in 0..8 {
                out[[i, j]] = self.phases[i].conj()
                    * rho_full[[self.positions[i], self.positions[j]]]
                    * self.phases[j];
            }
        }
        out
    }

    /// Gram matrix ⟨b_i|b_j⟩ (identity for an orthonormal basis).
    pub fn gram(&self) -> CMat {
        let mut g = CMat::zeros((8, 8));
        for i in 0..8 {
            for j in 0..8 {
                if self.positions[i] == self.positions[j] {
                    g[[i, j]] = self.phases[i].conj() * self.phases[j];
                }
            }
        }
        g
    }
}

/// The i-th logical basis ket on a given space.
pub fn logical_embed(spec: &HilbertSpec, i: usize) -> Result<CVec> {
    LogicalBasis::new(spec).embed_ket(i)
}

/// Project a full-space density matrix onto the logical basis.
pub fn logical_project(spec: &HilbertSpec, rho_full: &CMat) -> CMat {
    LogicalBasis::new(spec).project(rho_full)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(build_space(1).unwrap().dim(), 54);
        assert_eq!(build_space(5).unwrap().dim(), 162);
        assert_eq!(build_space(25).unwrap().dim(), 702);
        assert!(build_space(0).is_err());
    }

    #[test]
    fn label_roundtrip() {
        let spec = build_space(3).unwrap();
        for i in 0..spec.dim() {
            let (s, n) = spec.label(i);
            assert_eq!(spec.index(s, n), i);
        }
    }

    #[test]
    fn ion_op_action() {
        let spec = build_space(1).unwrap();
        // ion_op(1, g, e) applied to |e g g, 0> gives |g g g, 0>
        let op = spec.ion_op(1, Level::G, Level::E).unwrap();
        let mut v = CVec::zeros(spec.dim());
        v[spec.index([Level::E, Level::G, Level::G], 0)] = C64::new(1.0, 0.0);
        let w = op.apply(&v);
        assert_eq!(
            w[spec.index([Level::G, Level::G, Level::G], 0)],
            C64::new(1.0, 0.0)
        );
        assert!((w.mapv(|z| z.norm_sqr()).sum() - 1.0).abs() < 1e-14);
        // nnz count 9*(Nph+1)
        assert_eq!(op.to_csr().nnz(), 9 * 2);
        // bad indices rejected
        assert!(spec.ion_op(0, Level::G, Level::E).is_err());
        assert!(spec.ion_op(4, Level::G, Level::E).is_err());
    }

    #[test]
    fn ion_op_products_give_projector() {
        let spec = build_space(1).unwrap();
        let lg = spec.ion_op(2, Level::L, Level::G).unwrap();
        let gl = spec.ion_op(2, Level::G, Level::L).unwrap();
        let proj = lg.matmul(&gl).to_dense();
        let want = spec.ion_projector(2, Level::L).unwrap().to_dense();
        assert!((&proj - &want).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn ion_op_plus_adjoint_hermitian() {
        let spec = build_space(2).unwrap();
        let op = spec.ion_op(1, Level::G, Level::E).unwrap();
        let h = op.add(&op.adjoint());
        assert!(h.hermiticity_error() < 1e-12);
    }

    #[test]
    fn annihilator_matrix_elements() {
        let spec = build_space(3).unwrap();
        let a = spec.annihilator();
        let mut v = CVec::zeros(spec.dim());
        v[spec.index([Level::G, Level::G, Level::G], 1)] = C64::new(1.0, 0.0);
        let w = a.apply(&v);
        assert_eq!(
            w[spec.index([Level::G, Level::G, Level::G], 0)],
            C64::new(1.0, 0.0)
        );
        // a|0> = 0
        let mut v0 = CVec::zeros(spec.dim());
        v0[spec.index([Level::G, Level::G, Level::G], 0)] = C64::new(1.0, 0.0);
        assert!(a.apply(&v0).iter().all(|z| z.norm() == 0.0));
        // <3| a†a |3> = 3
        let n_op = a.adjoint().matmul(&a);
        let mut v3 = CVec::zeros(spec.dim());
        v3[spec.index([Level::G, Level::G, Level::G], 3)] = C64::new(1.0, 0.0);
        let w3 = n_op.apply(&v3);
        let expect = v3.mapv(|z| z.conj()).dot(&w3);
        assert!((expect - C64::new(3.0, 0.0)).norm() < 1e-14);
        // truncation: no element creating |N_ph+1>
        assert_eq!(a.to_csr().nnz(), 27 * 3);
        // matches number_op
        let diff = &n_op.to_dense() - &spec.number_op().to_dense();
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn embedded_single_site_operators_commute() {
        let spec = build_space(1).unwrap();
        let a = spec.ion_op(1, Level::G, Level::E).unwrap().to_dense();
        let b = spec.ion_op(3, Level::L, Level::G).unwrap().to_dense();
        let comm = a.dot(&b) - b.dot(&a);
        assert!(comm.iter().all(|z| z.norm() < 1e-14));
        let ph = spec.annihilator().to_dense();
        let comm2 = a.dot(&ph) - ph.dot(&a);
        assert!(comm2.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn logical_basis_orthonormal_with_phases() {
        let spec = build_space(2).unwrap();
        let basis = LogicalBasis::new(&spec);
        let g = basis.gram();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                assert!((g[[i, j]] - want).norm() < 1e-12);
            }
        }
        // embed(6) = -i |g l l, 0>
        let v = basis.embed_ket(6).unwrap();
        let pos = spec.index([Level::G, Level::L, Level::L], 0);
        assert!((v[pos] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!(basis.embed_ket(8).is_err());
    }

    #[test]
    fn projection_of_basis_state_is_matrix_unit() {
        let spec = build_space(1).unwrap();
        let basis = LogicalBasis::new(&spec);
        let k = basis.embed_ket(2).unwrap();
        let rho = CMat::from_shape_fn((spec.dim(), spec.dim()), |(r, c)| k[r] * k[c].conj());
        let m = basis.project(&rho);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == 2 && j == 2 { 1.0 } else { 0.0 };
                assert!((m[[i, j]] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_of_one_phonon_state_vanishes() {
        let spec = build_space(1).unwrap();
        let basis = LogicalBasis::new(&spec);
        let pos = spec.index([Level::G, Level::G, Level::G], 1);
        let mut rho = CMat::zeros((spec.dim(), spec.dim()));
        rho[[pos, pos]] = C64::new(1.0, 0.0);
        let m = basis.project(&rho);
        assert!(m.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn embed_project_roundtrip() {
        let spec = build_space(1).unwrap();
        let basis = LogicalBasis::new(&spec);
        let rho8 = CMat::from_shape_fn((8, 8), |(i, j)| {
            C64::new((i + 1) as f64, (j as f64) - 3.5) / C64::new(40.0, 0.0)
        });
        let back = basis.project(&basis.embed_density(&rho8));
        assert!((&back - &rho8).iter().all(|z| z.norm() < 1e-13));
    }
}
