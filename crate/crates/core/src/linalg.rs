//! Tiny dense solves for the fixed-size mode systems.

use crate::error::{NlkgError, Result};

/// Gaussian elimination with partial pivoting; returns `(x, det)`.
pub fn solve<const N: usize>(a: &[[f64; N]; N], b: &[f64; N]) -> Result<([f64; N], f64)> {
    let mut m = *a;
    let mut x = *b;
    let mut det = 1.0;
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if !(m[piv][col].abs() > 1e-300 + 1e-15 * scale) {
            return Err(NlkgError::Singular(format!("pivot {col} vanishes")));
        }
        if piv != col {
            m.swap(piv, col);
            x.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..N {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..N {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..N).rev() {
        let mut acc = x[r];
        for c in r + 1..N {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Ok((x, det))
}

pub fn transpose<const N: usize>(a: &[[f64; N]; N]) -> [[f64; N]; N] {
    let mut t = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn matvec<const N: usize>(a: &[[f64; N]; N], x: &[f64; N]) -> [f64; N] {
    let mut y = [0.0; N];
    for i in 0..N {
        y[i] = (0..N).map(|j| a[i][j] * x[j]).sum();
    }
    y
}

/// Determinant by elimination (0 for singular input).
pub fn det<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    solve(a, &[0.0; N]).map(|(_, d)| d).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_determinant() {
        let a = [[0.0, 2.0, 1.0], [1.0, -1.0, 0.5], [3.0, 0.0, 4.0]];
        let x = [0.3, -1.2, 2.0];
        let b = matvec(&a, &x);
        let (y, d) = solve(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
        // cofactor expansion
        let expect = 0.0 * (-4.0) - 2.0 * (4.0 - 1.5) + 1.0 * (0.0 + 3.0);
        assert!((d - expect).abs() < 1e-14);
        assert!(solve(&[[1.0, 2.0], [2.0, 4.0]], &[1.0, 1.0]).is_err());
    }
}
