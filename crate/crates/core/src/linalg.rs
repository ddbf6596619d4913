//! Solvers for the symmetric positive definite systems produced by circuits.

#![allow(clippy::needless_range_loop)]

/// Symmetric sparse matrix stored as per-row off-diagonal entries plus a diagonal.
#[derive(Clone, Debug)]
pub(crate) struct SparseSym {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn new(n: usize) -> Self {
        SparseSym {
            diag: vec![0.0; n],
            off: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                self.diag[i] * x[i] + self.off[i].iter().map(|&(j, a)| a * x[j]).sum::<f64>()
            })
            .collect()
    }

    /// `max_i |(A x - b)_i| / max(max_i |b_i|, tiny)`.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul(x);
        let worst = ax
            .iter()
            .zip(b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max);
        let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        worst / scale
    }
}

/// Dense Cholesky factor `L` with `A = L L^T`, row-major lower triangle.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn factor(a: &SparseSym) -> Option<Self> {
        let n = a.dim();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = a.diag[i];
            for &(j, v) in &a.off[i] {
                if j < i {
                    l[i * n + j] += v;
                }
            }
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= 0.0 {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Cholesky { n, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Largest system handed to the dense factorization.
pub(crate) const DENSE_LIMIT: usize = 2000;

/// Solves `A x = b` for SPD `A`.
///
/// Systems up to [`DENSE_LIMIT`] unknowns use a dense Cholesky factorization
/// followed by one step of iterative refinement; larger ones use Gauss-Seidel.
pub(crate) fn solve_spd(a: &SparseSym, b: &[f64], tolerance: f64) -> Vec<f64> {
    if a.dim() == 0 {
        return Vec::new();
    }
    if a.dim() <= DENSE_LIMIT {
        if let Some(chol) = Cholesky::factor(a) {
            let mut x = chol.solve(b);
            let ax = a.mul(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
            let dx = chol.solve(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
            return x;
        }
    }
    gauss_seidel(a, b, tolerance, 100_000)
}

/// Gauss-Seidel sweeps until the relative residual drops to `tolerance`.
pub(crate) fn gauss_seidel(a: &SparseSym, b: &[f64], tolerance: f64, max_sweeps: usize) -> Vec<f64> {
    let n = a.dim();
    let mut x = vec![0.0; n];
    for sweep in 0..max_sweeps {
        for i in 0..n {
            let s: f64 = a.off[i].iter().map(|&(j, v)| v * x[j]).sum();
            x[i] = (b[i] - s) / a.diag[i];
        }
        if sweep % 8 == 7 && a.relative_residual(&x, b) <= tolerance {
            break;
        }
    }
    x
}
