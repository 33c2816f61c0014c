//! Thin LAPACK/BLAS bindings for the dense kernels used by the crate:
//! symmetric eigendecomposition, general complex eigenvalues, and matrix
//! products. Matrices are `ndarray::Array2<f64>` in row-major layout;
//! symmetry makes the row/column-major distinction immaterial wherever a
//! transpose would otherwise be needed.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
    fn dgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const f64,
        a: *const f64,
        lda: *const i32,
        b: *const f64,
        ldb: *const i32,
        beta: *const f64,
        c: *mut f64,
        ldc: *const i32,
    );
}

/// Eigenvalues and eigenvectors of a real symmetric matrix, ascending order.
/// Returns (eigenvalues, eigenvectors-as-columns).
pub fn eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Structural("eigh: matrix not square".into()));
    }
    let ni = n as i32;
    // LAPACK is column-major; a symmetric input needs no transpose.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    // workspace query
    let mut work_q = [0.0f64];
    let mut iwork_q = [0i32];
    let m1 = -1i32;
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_q.as_mut_ptr(),
            &m1,
            iwork_q.as_mut_ptr(),
            &m1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("dsyevd workspace query failed: info={info}")));
    }
    let lwork = work_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("dsyevd failed: info={info}")));
    }
    // buf holds eigenvectors column-major: column j = eigenvector j.
    // Reading it row-major gives the transpose, so vecs[(i, j)] below is
    // LAPACK's (j, i); we want eigenvectors as columns of a row-major array.
    let vecs_t = Array2::from_shape_vec((n, n), buf)
        .map_err(|e| Error::Structural(e.to_string()))?;
    Ok((Array1::from(w), vecs_t.reversed_axes()))
}

/// Eigenvalues only of a real symmetric matrix, ascending.
pub fn eigh_values(a: &Array2<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    let ni = n as i32;
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let mut work_q = [0.0f64];
    let mut iwork_q = [0i32];
    let m1 = -1i32;
    unsafe {
        dsyevd_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_q.as_mut_ptr(),
            &m1,
            iwork_q.as_mut_ptr(),
            &m1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("dsyevd query failed: info={info}")));
    }
    let lwork = work_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        dsyevd_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("dsyevd failed: info={info}")));
    }
    Ok(Array1::from(w))
}

/// Eigenvalues of a general complex matrix (no eigenvectors).
pub fn eig_complex(a: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Structural("eig_complex: matrix not square".into()));
    }
    let ni = n as i32;
    // zgeev on A^T has the same eigenvalues as on A, so the row-major buffer
    // can be passed directly.
    let mut buf: Vec<Complex64> = a.iter().copied().collect();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut work_q = [Complex64::new(0.0, 0.0)];
    let m1 = -1i32;
    let one = 1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work_q.as_mut_ptr(),
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("zgeev query failed: info={info}")));
    }
    let lwork = work_q[0].re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Degenerate(format!("zgeev failed: info={info}")));
    }
    Ok(w)
}

/// C = A · B via dgemm. Row-major arrays: computes (Bᵀ·Aᵀ)ᵀ in column-major,
/// which is exactly A·B read back row-major.
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (m, k) = (a.nrows() as i32, a.ncols() as i32);
    let n = b.ncols() as i32;
    assert_eq!(a.ncols(), b.nrows());
    let a_buf: Vec<f64> = a.iter().copied().collect();
    let b_buf: Vec<f64> = b.iter().copied().collect();
    let mut c_buf = vec![0.0f64; (m * n) as usize];
    let alpha = 1.0f64;
    let beta = 0.0f64;
    unsafe {
        // column-major view: op(B)=B (n x k stored with ld n), op(A)=A (k x m, ld k)
        dgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &n,
            &m,
            &k,
            &alpha,
            b_buf.as_ptr(),
            &n,
            a_buf.as_ptr(),
            &k,
            &beta,
            c_buf.as_mut_ptr(),
            &n,
        );
    }
    Array2::from_shape_vec((m as usize, n as usize), c_buf).expect("matmul shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn eigh_2x2() {
        let a = arr2(&[[2.0, 1.0], [1.0, 2.0]]);
        let (w, v) = eigh(&a).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!((w[1] - 3.0).abs() < 1e-12);
        // reconstruct
        let mut rec = Array2::<f64>::zeros((2, 2));
        for j in 0..2 {
            for i in 0..2 {
                for l in 0..2 {
                    rec[(i, l)] += v[(i, j)] * w[j] * v[(l, j)];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_matches_ndarray() {
        let a = arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let b = arr2(&[[7.0, 8.0], [9.0, 10.0], [11.0, 12.0]]);
        let c = matmul(&a, &b);
        let d = a.dot(&b);
        assert!(c.iter().zip(d.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn complex_eigenvalues_of_companion() {
        // roots of z^2 - 3z + 2 = (z-1)(z-2)
        let a = arr2(&[
            [Complex64::new(3.0, 0.0), Complex64::new(-2.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        let mut w = eig_complex(&a).unwrap();
        w.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((w[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((w[1] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
