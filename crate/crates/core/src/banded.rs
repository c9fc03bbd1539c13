//! Symmetric banded matrices: `LDLᵀ` factorization, Sylvester inertia counts
//! and linear solves. Used for the discrete Schrödinger operators.

use crate::error::{NlkgError, Result};

/// Symmetric matrix with half-bandwidth `bw`; `band[i][k] = A[i][i+k]`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    band: Vec<Vec<f64>>,
}

pub struct Ldlt {
    bw: usize,
    d: Vec<f64>,
    /// `l[i][k] = L[i+k][i]` for `k = 1..=bw`.
    l: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> SymBanded {
        SymBanded { n, bw, band: vec![vec![0.0; bw + 1]; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Set `A[i][j] = A[j][i] = v` (`|i − j| ≤ bw`).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        assert!(b - a <= self.bw, "entry outside band");
        self.band[a][b - a] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        if b - a > self.bw {
            0.0
        } else {
            self.band[a][b - a]
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[i][0] * x[i];
            for k in 1..=self.bw {
                if i + k < self.n {
                    let a = self.band[i][k];
                    y[i] += a * x[i + k];
                    y[i + k] += a * x[i];
                }
            }
        }
        y
    }

    /// `LDLᵀ` of `A − shift·I` without pivoting.
    pub fn ldlt(&self, shift: f64) -> Ldlt {
        let (n, bw) = (self.n, self.bw);
        let mut d = vec![0.0; n];
        let mut l = vec![vec![0.0; bw + 1]; n];
        for j in 0..n {
            let mut dj = self.band[j][0] - shift;
            for k in 1..=bw.min(j) {
                let i = j - k;
                dj -= l[i][k] * l[i][k] * d[i];
            }
            d[j] = dj;
            for r in 1..=bw {
                if j + r >= n {
                    break;
                }
                // L[j+r][j] = (A[j+r][j] − Σ_i L[j+r][i] L[j][i] d[i]) / d[j]
                let mut v = self.band[j][r];
                for k in 1..=bw {
                    if k > j {
                        break;
                    }
                    let i = j - k;
                    if j + r - i <= bw {
                        v -= l[i][j + r - i] * l[i][k] * d[i];
                    }
                }
                l[j][r] = v / dj;
            }
        }
        Ldlt { bw, d, l }
    }

    /// Number of eigenvalues strictly below `shift` (Sylvester's law of inertia).
    pub fn count_below(&self, shift: f64) -> usize {
        self.ldlt(shift).d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Eigenvalues below `upper`, by bisection on inertia counts.
    pub fn eigenvalues_below(&self, lower: f64, upper: f64, tol: f64) -> Vec<f64> {
        let m = self.count_below(upper);
        (0..m)
            .map(|k| {
                let (mut lo, mut hi) = (lower, upper);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if self.count_below(mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Solve `(A − shift·I) x = b`.
    pub fn solve(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
        let f = self.ldlt(shift);
        let scale = self.band.iter().map(|r| r[0].abs()).fold(1.0, f64::max);
        if f.d.iter().any(|v| v.abs() < 1e-14 * scale || !v.is_finite()) {
            return Err(NlkgError::Singular(format!("pivot breakdown at shift {shift}")));
        }
        Ok(f.solve(b))
    }
}

impl Ldlt {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let bw = self.bw;
        let mut y = b.to_vec();
        for j in 0..n {
            for r in 1..=bw {
                if j + r < n {
                    y[j + r] -= self.l[j][r] * y[j];
                }
            }
        }
        for (yj, dj) in y.iter_mut().zip(&self.d) {
            *yj /= dj;
        }
        for j in (0..n).rev() {
            for r in 1..=bw {
                if j + r < n {
                    y[j] -= self.l[j][r] * y[j + r];
                }
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymBanded {
        let mut a = SymBanded::zeros(n, 1);
        for i in 0..n {
            a.set(i, i, 2.0);
            if i + 1 < n {
                a.set(i, i + 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn tridiagonal_spectrum() {
        let n = 50;
        let a = laplacian(n);
        let ev = a.eigenvalues_below(-1.0, 0.5, 1e-13);
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .filter(|&e| e < 0.5)
            .collect();
        assert_eq!(ev.len(), exact.len());
        for (a, b) in ev.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pentadiagonal_solve() {
        let n = 40;
        let mut a = SymBanded::zeros(n, 2);
        for i in 0..n {
            a.set(i, i, 6.0 + (i as f64).sin());
            if i + 1 < n {
                a.set(i, i + 1, -1.5);
            }
            if i + 2 < n {
                a.set(i, i + 2, 0.25);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
        let b = a.matvec(&x);
        let shift = 0.7;
        let bs: Vec<f64> = b.iter().zip(&x).map(|(b, x)| b - shift * x).collect();
        let y = a.solve(shift, &bs).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
