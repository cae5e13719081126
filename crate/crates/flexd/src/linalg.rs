//! Complex matrices and the Hermitian positive-definite solves used by the
//! eavesdropper SINR computation.

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        CMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// `sigma2 * I` for a square matrix.
    pub fn scaled_identity(n: usize, sigma2: f64) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(sigma2, 0.0));
        }
        m
    }

    /// Rank-one Hermitian update `self += w * g * g^H`.
    pub fn add_scaled_outer(&mut self, w: f64, g: &[C64]) {
        assert_eq!(self.rows, g.len());
        assert_eq!(self.cols, g.len());
        let n = g.len();
        for r in 0..n {
            let gr = g[r];
            let row = &mut self.data[r * n..(r + 1) * n];
            for (c, out) in row.iter_mut().enumerate() {
                *out += w * gr * g[c].conj();
            }
        }
    }
}

/// Conjugate-transposed dot product `a^H b`.
pub fn herm_dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// In-place lower Cholesky factor of a Hermitian positive-definite matrix.
/// Returns `Err` when a pivot is non-positive or not finite.
fn cholesky_in_place(a: &mut CMat) -> Result<(), LinalgError> {
    let n = a.rows();
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= a.get(j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(LinalgError::Singular);
        }
        let d = d.sqrt();
        a.set(j, j, C64::new(d, 0.0));
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= a.get(i, k) * a.get(j, k).conj();
            }
            a.set(i, j, s / d);
        }
    }
    Ok(())
}

/// Solves `L L^H x = b` given the lower factor computed by `cholesky_in_place`.
fn cholesky_solve_factored(l: &CMat, b: &[C64]) -> Vec<C64> {
    let n = l.rows();
    // Forward: L y = b.
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i).re;
    }
    // Backward: L^H x = y.
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.get(k, i).conj() * y[k];
        }
        y[i] = s / l.get(i, i).re;
    }
    y
}

/// Partial-pivot LU solve, fallback path for numerically awkward systems.
fn lu_solve(a: &CMat, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
    let n = a.rows();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, m.get(r, col).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(LinalgError::Singular);
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = m.get(col, c);
                m.set(col, c, m.get(pivot_row, c));
                m.set(pivot_row, c, tmp);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m.get(col, col);
        for r in (col + 1)..n {
            let factor = m.get(r, col) / pivot;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            m.set(r, col, C64::new(0.0, 0.0));
            for c in (col + 1)..n {
                let v = m.get(r, c) - factor * m.get(col, c);
                m.set(r, c, v);
            }
            let xc = x[col];
            x[r] -= factor * xc;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= m.get(i, k) * x[k];
        }
        x[i] = s / m.get(i, i);
    }
    Ok(x)
}

fn residual_norm(a: &CMat, x: &[C64], b: &[C64]) -> f64 {
    let n = a.rows();
    let mut r2 = 0.0;
    for i in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..n {
            s += a.get(i, k) * x[k];
        }
        r2 += (s - b[i]).norm_sqr();
    }
    r2.sqrt()
}

const RESIDUAL_TOL: f64 = 1e-12;

/// Solves `A x = b` for Hermitian positive-definite `A` via Cholesky, falling
/// back to a pivoted LU solve if factorization fails or the relative residual
/// exceeds 1e-12.
pub fn solve_hpd(a: &CMat, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
    assert_eq!(a.rows(), a.cols());
    assert_eq!(a.rows(), b.len());
    let mut factor = a.clone();
    if cholesky_in_place(&mut factor).is_ok() {
        let x = cholesky_solve_factored(&factor, b);
        let b_norm = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let res = residual_norm(a, &x, b);
        if res <= RESIDUAL_TOL * b_norm.max(1.0) {
            return Ok(x);
        }
    }
    let x = lu_solve(a, b)?;
    let b_norm = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let res = residual_norm(a, &x, b);
    let tol = RESIDUAL_TOL * b_norm.max(1.0);
    if res > tol * 1e3 {
        return Err(LinalgError::ResidualTooLarge { residual: res, tol });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_hpd(n: usize, rng: &mut impl Rng) -> CMat {
        // sigma2 I + sum of random rank-one terms is Hermitian PD.
        let mut a = CMat::scaled_identity(n, 0.5);
        for _ in 0..(2 * n) {
            let g: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            a.add_scaled_outer(rng.gen_range(0.1..2.0), &g);
        }
        a
    }

    #[test]
    fn solve_matches_direct_substitution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for n in 1..=8 {
            let a = random_hpd(n, &mut rng);
            let x_true: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut b = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                for k in 0..n {
                    b[i] += a.get(i, k) * x_true[k];
                }
            }
            let x = solve_hpd(&a, &b).unwrap();
            for (got, want) in x.iter().zip(&x_true) {
                assert!((got - want).norm() < 1e-9, "n={n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn identity_solve_is_identity() {
        let a = CMat::scaled_identity(3, 2.0);
        let b = vec![
            C64::new(2.0, 0.0),
            C64::new(0.0, 4.0),
            C64::new(-6.0, 2.0),
        ];
        let x = solve_hpd(&a, &b).unwrap();
        assert!((x[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - C64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((x[2] - C64::new(-3.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn non_hpd_falls_back_to_lu() {
        // Indefinite but invertible: Cholesky must fail, LU must succeed.
        let mut a = CMat::zeros(2, 2);
        a.set(0, 0, C64::new(0.0, 0.0));
        a.set(0, 1, C64::new(1.0, 0.0));
        a.set(1, 0, C64::new(1.0, 0.0));
        a.set(1, 1, C64::new(0.0, 0.0));
        let b = vec![C64::new(3.0, 0.0), C64::new(5.0, 0.0)];
        let x = solve_hpd(&a, &b).unwrap();
        assert!((x[0] - C64::new(5.0, 0.0)).norm() < 1e-12);
        assert!((x[1] - C64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn singular_matrix_errors() {
        let a = CMat::zeros(2, 2);
        let b = vec![C64::new(1.0, 0.0); 2];
        assert!(solve_hpd(&a, &b).is_err());
    }
}
