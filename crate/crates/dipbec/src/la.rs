//! Small dense linear algebra for the 2x2/3x3 systems in this crate.

use num_complex::Complex64;

pub(crate) fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn solve2(m: &[[f64; 2]; 2], b: &[f64; 2]) -> Option<[f64; 2]> {
    let d = det2(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([
        (b[0] * m[1][1] - b[1] * m[0][1]) / d,
        (m[0][0] * b[1] - m[1][0] * b[0]) / d,
    ])
}

pub(crate) fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    // Gaussian elimination with partial pivoting
    let mut a = *m;
    let mut rhs = *b;
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

pub(crate) fn solve2c(m: &[[Complex64; 2]; 2], b: &[Complex64; 2]) -> Option<[Complex64; 2]> {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    Some([
        (b[0] * m[1][1] - b[1] * m[0][1]) / d,
        (m[0][0] * b[1] - m[1][0] * b[0]) / d,
    ])
}

/// Eigenvalues of a symmetric real 2x2 matrix, ascending.
pub(crate) fn eigvals2_sym(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let diff = m[0][0] - m[1][1];
    let disc = (diff * diff + 4.0 * m[0][1] * m[1][0]).max(0.0).sqrt();
    [(tr - disc) / 2.0, (tr + disc) / 2.0]
}

/// Eigenpairs of a general real 2x2 matrix as complex values. Real and
/// complex-conjugate spectra are constructed exactly (no residual imaginary
/// or real parts from a complex square root).
pub(crate) fn eig2_general(m: &[[f64; 2]; 2]) -> [(Complex64, [Complex64; 2]); 2] {
    let tr = m[0][0] + m[1][1];
    let det = det2(m);
    let d = tr * tr - 4.0 * det;
    let disc = if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    };
    let l1 = (Complex64::new(tr, 0.0) - disc) / 2.0;
    let l2 = (Complex64::new(tr, 0.0) + disc) / 2.0;
    let vec_for = |l: Complex64| -> [Complex64; 2] {
        // (m - l I) v = 0; pick the better-conditioned row
        let r0 = [Complex64::new(m[0][0], 0.0) - l, Complex64::new(m[0][1], 0.0)];
        let r1 = [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0) - l];
        let n0 = r0[0].norm() + r0[1].norm();
        let n1 = r1[0].norm() + r1[1].norm();
        let v = if n0 >= n1 { [r0[1], -r0[0]] } else { [r1[1], -r1[0]] };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n == 0.0 {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [v[0] / n, v[1] / n]
        }
    };
    [(l1, vec_for(l1)), (l2, vec_for(l2))]
}
