//! Dense eigenvalues through LAPACK: `dsyevd` for symmetric matrices and
//! `zgeev` for general complex ones.

use num_complex::Complex64 as C64;
use std::os::raw::{c_char, c_int};

/// Eigenvalues (ascending) of the symmetric `n × n` matrix stored
/// row-major in `a`. The contents of `a` are destroyed.
pub fn eigvalsh(a: &mut [f64], n: usize) -> Result<Vec<f64>, i32> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let jobz = b'N' as c_char;
    let uplo = b'U' as c_char;
    let nn = n as c_int;
    let mut w = vec![0.0; n];
    let mut info: c_int = 0;
    let mut work_q = 0.0f64;
    let mut iwork_q: c_int = 0;
    let query: c_int = -1;
    // SAFETY: pointers reference live buffers of the sizes LAPACK expects.
    unsafe {
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), &mut work_q, &query,
            &mut iwork_q, &query, &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    let lwork = work_q as c_int;
    let liwork = iwork_q;
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0 as c_int; liwork.max(1) as usize];
    // SAFETY: as above, with workspace sized from the query.
    unsafe {
        lapack_sys::dsyevd_(
            &jobz, &uplo, &nn, a.as_mut_ptr(), &nn, w.as_mut_ptr(), work.as_mut_ptr(), &lwork,
            iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    Ok(w)
}

/// Eigenvalues of the general complex `n × n` matrix stored column-major
/// in `a`. The contents of `a` are destroyed.
pub fn eigvals_complex(a: &mut [C64], n: usize) -> Result<Vec<C64>, i32> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let no = b'N' as c_char;
    let nn = n as c_int;
    let one: c_int = 1;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vl = [C64::new(0.0, 0.0)];
    let mut vr = [C64::new(0.0, 0.0)];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info: c_int = 0;
    let mut work_q = C64::new(0.0, 0.0);
    let query: c_int = -1;
    // SAFETY: num_complex::Complex64 is #[repr(C)] with the same layout as
    // LAPACK's double complex, and every buffer has the size LAPACK expects.
    unsafe {
        lapack_sys::zgeev_(
            &no, &no, &nn, a.as_mut_ptr().cast(), &nn, w.as_mut_ptr().cast(), vl.as_mut_ptr().cast(), &one,
            vr.as_mut_ptr().cast(), &one, (&mut work_q as *mut C64).cast(), &query, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    let lwork = (work_q.re as c_int).max(2 * nn);
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    // SAFETY: as above, with workspace sized from the query.
    unsafe {
        lapack_sys::zgeev_(
            &no, &no, &nn, a.as_mut_ptr().cast(), &nn, w.as_mut_ptr().cast(), vl.as_mut_ptr().cast(), &one,
            vr.as_mut_ptr().cast(), &one, work.as_mut_ptr().cast(), &lwork, rwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(info);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let mut a = vec![2.0, 1.0, 1.0, 2.0];
        let w = eigvalsh(&mut a, 2).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_eigenvalues() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        // Column-major [[c, −s], [s, c]].
        let mut a = vec![C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)];
        let mut w = eigvals_complex(&mut a, 2).unwrap();
        w.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((w[0] - C64::new(c, -s)).norm() < 1e-14 && (w[1] - C64::new(c, s)).norm() < 1e-14);
    }
}
