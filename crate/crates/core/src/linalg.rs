//! Dense LU factorization with partial pivoting for the small square
//! systems (d <= ~10) that appear in simplex and cone computations.

/// LU factors of a square matrix, `P A = L U`, packed row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Lu {
    n: usize,
    // Unit-lower L below the diagonal, U on and above it.
    factors: Vec<f64>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    /// Factor the `n x n` row-major matrix `a`.
    pub fn new(n: usize, a: &[f64]) -> Self {
        assert_eq!(a.len(), n * n, "matrix storage must be n*n");
        let mut f = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_abs = f[k * n + k].abs();
            for r in k + 1..n {
                let v = f[r * n + k].abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_row != k {
                for c in 0..n {
                    f.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
                swaps += 1;
            }
            let pivot = f[k * n + k];
            if pivot == 0.0 {
                singular = true;
                continue;
            }
            for r in k + 1..n {
                let m = f[r * n + k] / pivot;
                f[r * n + k] = m;
                if m != 0.0 {
                    for c in k + 1..n {
                        f[r * n + c] -= m * f[k * n + c];
                    }
                }
            }
        }
        Self {
            n,
            factors: f,
            perm,
            swaps,
            singular,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// True when an exactly zero pivot was met.
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let diag: f64 = (0..n).map(|k| self.factors[k * n + k]).product();
        if self.swaps.is_multiple_of(2) {
            diag
        } else {
            -diag
        }
    }

    /// Solve `A x = b`, writing into `x`. Both slices have length `n`.
    #[inline]
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.factors[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.factors[i * n + j] * x[j];
            }
            x[i] = s / self.factors[i * n + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }
}
