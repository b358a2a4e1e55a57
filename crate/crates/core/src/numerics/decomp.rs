//! Dense factorizations: Cholesky, LU solve, symmetric eigendecomposition.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::numerics::{EigenPairs, Matrix};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// so that `L * L^T` reconstructs the input.
pub fn cholesky(s: &Matrix) -> Result<Matrix> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let mut diag = s.get(j, j);
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: diag,
            });
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut sum = s.get(i, j);
            let (rj, ri) = (&l[j * n..j * n + j], &l[i * n..i * n + j]);
            for (a, b) in ri.iter().zip(rj) {
                sum -= a * b;
            }
            l[i * n + j] = sum / ljj;
        }
    }
    Matrix::from_vec(n, n, l)
}

/// LU factorization with partial pivoting, kept for repeated solves.
pub struct LuFactor {
    lu: Vec<f64>,
    piv: Vec<usize>,
    n: usize,
}

impl LuFactor {
    /// Factorizes `a`; fails when a pivot falls below `1e-12` of the matrix scale.
    pub fn new(a: &Matrix) -> Result<LuFactor> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let scale = a.max_abs();
        let tol = 1e-12 * scale;
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut pmax = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax <= tol || pmax == 0.0 {
                return Err(Error::SingularMatrix {
                    step: k,
                    pivot: pmax,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                let (top, bottom) = lu.split_at_mut(i * n);
                let krow = &top[k * n + k + 1..k * n + n];
                let irow = &mut bottom[k + 1..n];
                for (x, &y) in irow.iter_mut().zip(krow) {
                    *x -= f * y;
                }
            }
        }
        Ok(LuFactor { lu, piv, n })
    }

    /// Solves `A * x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} for a {n}x{n} system",
                b.len()
            )));
        }
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            let row = &self.lu[i * n..i * n + i];
            for (j, &lij) in row.iter().enumerate() {
                acc -= lij * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            let row = &self.lu[i * n + i + 1..i * n + n];
            for (off, &uij) in row.iter().enumerate() {
                acc -= uij * x[i + 1 + off];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// Solves `A * X = B` with partial-pivoting LU.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    let lu = LuFactor::new(a)?;
    let n = a.rows();
    let m = b.cols();
    let mut out = Array2::zeros((n, m));
    let mut col = vec![0.0f64; n];
    for c in 0..m {
        for i in 0..n {
            col[i] = b.get(i, c);
        }
        let x = lu.solve_vec(&col)?;
        for i in 0..n {
            out[(i, c)] = x[i];
        }
    }
    Ok(Matrix::from_array(out))
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
///
/// Householder tridiagonalization followed by shifted QL iterations; the
/// classic EISPACK tred2/tql2 pair.
pub fn sym_eigen(s: &Matrix) -> Result<EigenPairs> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    // Work on the symmetrized matrix; callers may carry ~1e-10 asymmetry.
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = 0.5 * (s.get(i, j) + s.get(j, i));
        }
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n)?;

    // Sort descending by eigenvalue, gather columns, fix signs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (new_c, &old_c) in order.iter().enumerate() {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for r in 0..n {
            let a = v[r * n + old_c].abs();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        let flip = if v[best * n + old_c] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, new_c)] = flip * v[r * n + old_c];
        }
    }
    Ok(EigenPairs {
        values,
        vectors: Matrix::from_array(vectors),
    })
}

/// The `k` algebraically largest eigenpairs of a symmetric matrix.
pub fn top_k_eigenpairs(s: &Matrix, k: usize) -> Result<EigenPairs> {
    let full = sym_eigen(s)?;
    let n = s.rows();
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let cols: Vec<usize> = (0..k).collect();
    Ok(EigenPairs {
        values: full.values[..k].to_vec(),
        vectors: full.vectors.select_columns(&cols)?,
    })
}

// Householder reduction to tridiagonal form (EISPACK tred2).
fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    if n == 0 {
        return;
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0f64;
        let mut h = 0.0f64;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in (j + 1)..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..(n - 1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0f64;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

// Shifted QL iterations on the tridiagonal form (EISPACK tql2).
fn tql2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::NonFinite(format!(
                        "QL iteration failed to converge at eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
