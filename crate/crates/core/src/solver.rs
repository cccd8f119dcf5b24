//! Compressed sparse row matrices, restarted GMRES and a condition-number estimator.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::io::Write;

/// Square sparse matrix in row-compressed form with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given per-row column sets (sorted and deduplicated here).
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            if let Some(&last) = row.last() {
                if last >= n {
                    return Err(Error::Assembly(format!(
                        "column {last} out of range for dimension {n}"
                    )));
                }
            }
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        let n = a.nrows();
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| a[(i, j)] != 0.0).collect())
            .collect();
        let mut m = Self::from_pattern(rows)?;
        for i in 0..n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] = a[(i, m.col_idx[k])];
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Storage position of entry `(i, j)`, if it is in the pattern.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry `(i, j)`; the entry must be in the pattern.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        match self.position(i, j) {
            Some(k) => {
                self.values[k] += v;
                Ok(())
            }
            None => Err(Error::Assembly(format!(
                "entry ({i}, {j}) is outside the sparsity pattern"
            ))),
        }
    }

    /// Same pattern, all values zero.
    pub fn zeroed(&self) -> Self {
        Self {
            values: vec![0.0; self.values.len()],
            ..self.clone()
        }
    }

    /// `Σ c_k M_k` for matrices sharing one pattern.
    pub fn combine(terms: &[(f64, &CsrMatrix)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("empty linear combination".into()))?
            .1;
        let mut out = first.zeroed();
        for (c, m) in terms {
            if m.row_ptr != first.row_ptr || m.col_idx != first.col_idx {
                return Err(Error::Assembly(
                    "linear combination of matrices with different patterns".into(),
                ));
            }
            for (o, v) in out.values.iter_mut().zip(&m.values) {
                *o += c * v;
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * x[i];
            }
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[k] * y[self.col_idx[k]];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                col_idx[next[j]] = i;
                values[next[j]] = self.values[k];
                next[j] += 1;
            }
        }
        Self {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `D^{-1/2} A D^{-1/2}` with `D = |diag A|`.
    pub fn jacobi_scaled(&self) -> Result<Self> {
        let d: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|v| {
                if v.abs() > 0.0 {
                    Ok(1.0 / v.abs().sqrt())
                } else {
                    Err(Error::Assembly("zero diagonal entry".into()))
                }
            })
            .collect::<Result<_>>()?;
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] *= d[i] * d[self.col_idx[k]];
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[(i, self.col_idx[k])] = self.values[k];
            }
        }
        a
    }

    /// Coordinate text format: a header line `n n nnz`, then `i j value` (1-based) per entry.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(
                    out,
                    "{} {} {:.17e}",
                    i + 1,
                    self.col_idx[k] + 1,
                    self.values[k]
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `‖Ax - b‖ <= tol ‖b‖`.
    pub tol: f64,
    /// Total inner iterations.
    pub max_iter: usize,
    pub restart: usize,
    /// Dimension up to which a dense LU solve is attempted when GMRES fails.
    pub dense_fallback_max: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 2000,
            restart: 50,
            dense_fallback_max: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Gmres,
    DenseLu,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final true relative residual.
    pub residual: f64,
    /// Relative residual after each inner iteration (the GMRES least-squares value).
    pub history: Vec<f64>,
    pub method: SolveMethod,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = a.mul(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Restarted GMRES with right Jacobi preconditioning, so the minimized quantity is the
/// true residual. Falls back to dense LU for small systems if GMRES does not converge.
pub fn solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<SolveOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::InvalidInput(format!(
            "rhs length {} != dimension {n}",
            b.len()
        )));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(SolveOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            history: vec![],
            method: SolveMethod::Gmres,
        });
    }
    match gmres(a, b, x0, opts, bnorm) {
        Ok(out) => Ok(out),
        Err(Error::SolverFailure {
            iterations,
            residual,
        }) if n <= opts.dense_fallback_max => {
            log::warn!(
                "GMRES stalled at {residual:.3e} after {iterations} iterations, using dense LU"
            );
            dense_solve(a, b, opts.tol)
        }
        Err(e) => Err(e),
    }
}

fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &SolverOptions,
    bnorm: f64,
) -> Result<SolveOutcome> {
    let n = a.dim();
    let m = opts.restart.max(1).min(n.max(1));
    let minv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut r = true_residual(a, &x, b);
    let mut beta = norm(&r);
    let mut rel = beta / bnorm;

    let mut v: Vec<Vec<f64>> = vec![vec![0.0; n]; m + 1];
    let mut hess = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];

    while rel > opts.tol && iterations < opts.max_iter {
        for (vi, ri) in v[0].iter_mut().zip(&r) {
            *vi = ri / beta;
        }
        g.iter_mut().for_each(|e| *e = 0.0);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            for i in 0..n {
                z[i] = minv[i] * v[k][i];
            }
            a.matvec(&z, &mut w);
            for j in 0..=k {
                let hjk = dot(&w, &v[j]);
                hess[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(&v[j]) {
                    *wi -= hjk * vi;
                }
            }
            let hnext = norm(&w);
            hess[k + 1][k] = hnext;
            if hnext > 0.0 {
                for (vi, wi) in v[k + 1].iter_mut().zip(&w) {
                    *vi = wi / hnext;
                }
            }
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let d = hess[k][k].hypot(hess[k + 1][k]);
            if d == 0.0 {
                break;
            }
            cs[k] = hess[k][k] / d;
            sn[k] = hess[k + 1][k] / d;
            hess[k][k] = d;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            history.push(rel);
            if rel <= opts.tol || iterations >= opts.max_iter || hnext == 0.0 {
                break;
            }
        }
        if k_used == 0 {
            break;
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..k_used {
                s += v[j][i] * y[j];
            }
            x[i] += minv[i] * s;
        }
        r = true_residual(a, &x, b);
        beta = norm(&r);
        rel = beta / bnorm;
    }
    if !x.iter().all(|v| v.is_finite()) || rel > opts.tol {
        return Err(Error::SolverFailure {
            iterations,
            residual: rel,
        });
    }
    Ok(SolveOutcome {
        x,
        iterations,
        residual: rel,
        history,
        method: SolveMethod::Gmres,
    })
}

fn dense_solve(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<SolveOutcome> {
    let lu = a.to_dense().lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(Error::SolverFailure {
            iterations: 0,
            residual: f64::INFINITY,
        })?;
    let x: Vec<f64> = x.iter().copied().collect();
    let rel = norm(&true_residual(a, &x, b)) / norm(b);
    if !(rel <= tol.max(1e-12)) {
        return Err(Error::SolverFailure {
            iterations: 0,
            residual: rel,
        });
    }
    Ok(SolveOutcome {
        x,
        iterations: 0,
        residual: rel,
        history: vec![],
        method: SolveMethod::DenseLu,
    })
}

/// Estimate of `κ₂(A) = σ_max / σ_min`: power iteration on `AᵀA` for the largest singular
/// value and inverse iteration (solves with `A` and `Aᵀ`) for the smallest.
pub fn condition_estimate(a: &CsrMatrix) -> Result<f64> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::EstimateUnavailable("empty matrix".into()));
    }
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i * 7919 % 101) as f64 / 101.0))
        .collect();
    let normalize = |v: &mut Vec<f64>| -> f64 {
        let s = norm(v);
        v.iter_mut().for_each(|x| *x /= s);
        s
    };

    let mut v = start.clone();
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut atav = vec![0.0; n];
    let mut smax2 = 0.0;
    for _ in 0..500 {
        a.matvec(&v, &mut av);
        a.matvec_transpose(&av, &mut atav);
        let lam = normalize(&mut atav);
        std::mem::swap(&mut v, &mut atav);
        let done = (lam - smax2).abs() <= 1e-8 * lam;
        smax2 = lam;
        if done {
            break;
        }
    }

    let dense_ok = n <= 3000;
    let (lu, lut) = if dense_ok {
        let d = a.to_dense();
        (Some(d.clone().lu()), Some(d.transpose().lu()))
    } else {
        (None, None)
    };
    let opts = SolverOptions {
        tol: 1e-12,
        max_iter: 20_000,
        restart: 100,
        dense_fallback_max: 0,
    };
    let at = a.transpose();
    let solve_with = |m: &CsrMatrix,
                      f: &Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
                      rhs: &[f64]|
     -> Result<Vec<f64>> {
        match f {
            Some(lu) => lu
                .solve(&DVector::from_column_slice(rhs))
                .map(|x| x.iter().copied().collect())
                .ok_or_else(|| Error::EstimateUnavailable("singular matrix".into())),
            None => solve(m, rhs, None, &opts)
                .map(|o| o.x)
                .map_err(|e| Error::EstimateUnavailable(e.to_string())),
        }
    };
    let mut v = start;
    normalize(&mut v);
    let mut inv_smin2 = 0.0;
    for _ in 0..300 {
        let y = solve_with(&at, &lut, &v)?;
        let mut z = solve_with(a, &lu, &y)?;
        let lam = normalize(&mut z);
        if !lam.is_finite() {
            return Err(Error::EstimateUnavailable(
                "inverse iteration diverged".into(),
            ));
        }
        v = z;
        let done = (lam - inv_smin2).abs() <= 1e-8 * lam;
        inv_smin2 = lam;
        if done {
            break;
        }
    }
    let kappa = (smax2 * inv_smin2).sqrt();
    if kappa.is_finite() && kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(Error::EstimateUnavailable("non-finite estimate".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d(n: usize, shift: f64, skew: f64) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| (i.saturating_sub(1)..=(i + 1).min(n - 1)).collect())
            .collect();
        let mut a = CsrMatrix::from_pattern(rows).unwrap();
        for i in 0..n {
            a.add(i, i, 2.0 + shift).unwrap();
            if i + 1 < n {
                a.add(i, i + 1, -1.0 + skew).unwrap();
                a.add(i + 1, i, -1.0 - skew).unwrap();
            }
        }
        a
    }

    #[test]
    fn identity_solves_in_one_iteration() {
        let a = CsrMatrix::identity(10);
        let b: Vec<f64> = (0..10).map(|i| i as f64 - 3.5).collect();
        let out = solve(&a, &b, None, &SolverOptions::default()).unwrap();
        assert!(out.iterations <= 1);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn nonsymmetric_system_meets_residual_contract() {
        let a = laplacian_1d(300, 0.01, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = solve(&a, &b, None, &SolverOptions::default()).unwrap();
        let r = norm(&true_residual(&a, &out.x, &b)) / norm(&b);
        assert!(r <= 1e-10, "{r}");
        assert_eq!(out.method, SolveMethod::Gmres);
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn symmetric_residual_history_is_monotone() {
        let a = laplacian_1d(200, 0.05, 0.0);
        let b = vec![1.0; 200];
        let out = solve(&a, &b, None, &SolverOptions::default()).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn dense_fallback_when_iterations_exhausted() {
        let a = laplacian_1d(100, 0.0, 0.0);
        let b = vec![1.0; 100];
        let opts = SolverOptions {
            max_iter: 3,
            ..Default::default()
        };
        let out = solve(&a, &b, None, &opts).unwrap();
        assert_eq!(out.method, SolveMethod::DenseLu);
        assert!(out.residual < 1e-10);
        let opts = SolverOptions {
            max_iter: 3,
            dense_fallback_max: 10,
            ..Default::default()
        };
        assert!(matches!(
            solve(&a, &b, None, &opts),
            Err(Error::SolverFailure { .. })
        ));
    }

    #[test]
    fn transpose_and_matvec_agree_with_dense() {
        let a = laplacian_1d(20, 0.3, 0.7);
        let d = a.to_dense();
        let at = a.transpose();
        assert_eq!(at.to_dense(), d.transpose());
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 20];
        a.matvec_transpose(&x, &mut y);
        let yd = d.transpose() * DVector::from_column_slice(&x);
        for i in 0..20 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
        assert_eq!(CsrMatrix::from_dense(&d).unwrap(), a);
        assert!(a.clone().add(0, 5, 1.0).is_err());
    }

    #[test]
    fn condition_estimates() {
        let id = CsrMatrix::identity(12);
        assert!((condition_estimate(&id).unwrap() - 1.0).abs() < 1e-6);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(10, (1..=10).map(f64::from)));
        let k = condition_estimate(&CsrMatrix::from_dense(&d).unwrap()).unwrap();
        assert!(k > 5.0 && k < 15.0, "{k}");
        // Against the exact value for a nonsymmetric matrix.
        let a = laplacian_1d(40, 0.1, 0.3);
        let sv = a.to_dense().singular_values();
        let exact = sv.max() / sv.min();
        let k = condition_estimate(&a).unwrap();
        assert!((k / exact - 1.0).abs() < 0.5, "{k} vs {exact}");
    }

    #[test]
    fn coordinate_dump() {
        let a = laplacian_1d(3, 0.0, 0.0);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "3 3 7");
        assert_eq!(lines.len(), 9);
        assert!(lines[2].starts_with("1 1 2.0"));
    }

    #[test]
    fn combine_requires_matching_patterns() {
        let a = laplacian_1d(5, 0.0, 0.0);
        let c = CsrMatrix::combine(&[(2.0, &a), (-1.0, &a)]).unwrap();
        assert_eq!(c, a);
        assert!(CsrMatrix::combine(&[(1.0, &a), (1.0, &CsrMatrix::identity(5))]).is_err());
    }
}
