//! Unitary time evolution e^{−iHt} for Hermitian generators, computed
//! spectrally through the eigendecomposition of H. Exact for any step
//! size, unlike low-order truncations.

use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::{C64, CMat};
use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};

/// Tolerance on ‖H − H†‖_max accepted by [`expm_unitary`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// e^{−iHt} for Hermitian H (sign convention: forward evolution carries
/// the negative sign; pass a negative `t` for the e^{+iHτ} pulse variant).
pub fn expm_unitary(h: &Operator, t: f64) -> Result<Operator> {
    let herm = h.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::invalid(format!(
            "expm_unitary requires a Hermitian generator; ‖H − H†‖ = {herm:.3e}"
        )));
    }
    let dense = h.to_dense();
    // LAPACK expects column-major storage; a row-major complex array would
    // be read as the conjugate matrix and yield conjugated eigenvectors.
    let mut fortran = Array2::<C64>::zeros(dense.raw_dim().f());
    fortran.assign(&dense);
    let (vals, vecs) = fortran
        .eigh(UPLO::Lower)
        .map_err(|e| Error::invalid(format!("eigendecomposition failed: {e}")))?;
    let phases: Array1<C64> = vals.mapv(|w| C64::new(0.0, -w * t).exp());
    // U = V diag(e^{-i w t}) V†
    let scaled = &vecs * &phases; // scales columns
    let u: CMat = scaled.dot(&vecs.t().mapv(|z| z.conj()));
    Ok(Operator::dense(u))
}
