//! Eigenvalues through the LAPACK bundled with the system OpenBLAS (`dgeev`,
//! no eigenvectors).

use std::os::raw::{c_char, c_int};
use std::sync::Once;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[link(name = "openblas")]
extern "C" {
    fn openblas_set_num_threads(n: c_int);

    fn dgeev_(
        jobvl: *const c_char,
        jobvr: *const c_char,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        wr: *mut f64,
        wi: *mut f64,
        vl: *mut f64,
        ldvl: *const c_int,
        vr: *mut f64,
        ldvr: *const c_int,
        work: *mut f64,
        lwork: *const c_int,
        info: *mut c_int,
    );
}

static SINGLE_THREADED: Once = Once::new();

/// Eigenvalues of the column-major `n`×`n` matrix `a`, destroying it.
pub(crate) fn eigenvalues_in_place(a: &mut [f64], n: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    // Parallelism lives at the sweep level; nested BLAS threads only contend.
    // SAFETY: plain setter with no preconditions.
    SINGLE_THREADED.call_once(|| unsafe { openblas_set_num_threads(1) });
    if n == 0 {
        return Ok(Vec::new());
    }
    let n_i = c_int::try_from(n).map_err(|_| Error::TooLarge { n, cap: c_int::MAX as usize })?;
    let no = b'N' as c_char;
    let one: c_int = 1;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut dummy = [0.0f64; 1];
    let mut info: c_int = 0;

    // Workspace query.
    let mut query = 0.0f64;
    let lwork: c_int = -1;
    // SAFETY: every pointer refers to a live buffer of the size dgeev expects
    // for JOBVL = JOBVR = 'N' (vl/vr are never referenced, ld = 1 is allowed).
    unsafe {
        dgeev_(
            &no, &no, &n_i, a.as_mut_ptr(), &n_i, wr.as_mut_ptr(), wi.as_mut_ptr(),
            dummy.as_mut_ptr(), &one, dummy.as_mut_ptr(), &one, &mut query, &lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Precondition(format!("dgeev workspace query failed (info {info})")));
    }
    let lwork = (query as c_int).max(3 * n_i);
    let mut work = vec![0.0; lwork as usize];
    // SAFETY: as above, with a workspace of the queried length.
    unsafe {
        dgeev_(
            &no, &no, &n_i, a.as_mut_ptr(), &n_i, wr.as_mut_ptr(), wi.as_mut_ptr(),
            dummy.as_mut_ptr(), &one, dummy.as_mut_ptr(), &one, work.as_mut_ptr(), &lwork, &mut info,
        );
    }
    if info > 0 {
        // Eigenvalues info..n converged; the rest did not.
        return Err(Error::NoConvergence {
            sweeps: 0,
            remaining: info as usize,
            residual: f64::NAN,
        });
    }
    if info < 0 {
        return Err(Error::Precondition(format!("dgeev rejected argument {}", -info)));
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}
