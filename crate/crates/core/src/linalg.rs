//! Fixed-size dense complex linear algebra for the drift system.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vector<const N: usize> = [Complex64; N];
pub type Matrix<const N: usize> = [[Complex64; N]; N];

pub fn mat_vec<const N: usize>(m: &Matrix<N>, x: &Vector<N>) -> Vector<N> {
    let mut out = [Complex64::new(0.0, 0.0); N];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn inf_norm<const N: usize>(x: &Vector<N>) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `m·x = rhs` by Gaussian elimination with partial pivoting.
///
/// Pivots are chosen by largest modulus. A pivot below `N·ε·max|m|` is
/// reported as [`Error::Singular`].
pub fn solve<const N: usize>(m: &Matrix<N>, rhs: &Vector<N>) -> Result<Vector<N>> {
    let mut a = *m;
    let mut b = *rhs;
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let tiny = (N as f64) * f64::EPSILON * scale;

    for col in 0..N {
        let (piv_row, piv_abs) = (col..N)
            .map(|r| (r, a[r][col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(piv_abs > tiny) {
            return Err(Error::Singular { column: col, pivot: piv_abs });
        }
        if piv_row != col {
            a.swap(piv_row, col);
            b.swap(piv_row, col);
        }
        let inv = a[col][col].inv();
        for r in col + 1..N {
            let factor = a[r][col] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            a[r][col] = Complex64::new(0.0, 0.0);
            for c in col + 1..N {
                let upd = factor * a[col][c];
                a[r][c] -= upd;
            }
            let upd = factor * b[col];
            b[r] -= upd;
        }
    }

    let mut x = [Complex64::new(0.0, 0.0); N];
    for r in (0..N).rev() {
        let tail: Complex64 = (r + 1..N).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}
