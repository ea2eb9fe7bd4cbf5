//! Least-squares FFE/DFE training on symbol-strided regressors.

use crate::scalar::Scalar;

/// Regression problem: per-symbol feedforward samples of `y` plus past symbols.
///
/// Feedforward entry `u` of symbol `k` reads `y[k·sps + (top − u)·step + phase]`,
/// feedback entry `j` (1-based) reads `alpha[k − j]`; all indices are circular.
pub struct Regressors<'a, S> {
    pub y: &'a [S],
    pub alpha: &'a [S],
    pub sps: usize,
    pub step: usize,
    pub phase: isize,
    pub top: isize,
    pub n_ff: usize,
    pub n_fb: usize,
}

impl<S: Scalar> Regressors<'_, S> {
    pub fn dim(&self) -> usize {
        self.n_ff + self.n_fb
    }

    fn n_symbols(&self) -> usize {
        self.alpha.len()
    }

    fn ff_index(&self, u: usize, k: isize) -> usize {
        let n = self.y.len() as isize;
        let pos = k * self.sps as isize + (self.top - u as isize) * self.step as isize + self.phase;
        pos.rem_euclid(n) as usize
    }

    /// Entry `e` of the regressor of symbol `k` (k may be out of range; it wraps).
    #[inline]
    pub fn value(&self, e: usize, k: isize) -> S {
        if e < self.n_ff {
            self.y[self.ff_index(e, k)]
        } else {
            let j = (e - self.n_ff + 1) as isize;
            self.alpha[(k - j).rem_euclid(self.n_symbols() as isize) as usize]
        }
    }

    /// Shifting the regressor by one symbol maps entry `e` onto `succ(e)`.
    fn pred(&self, e: usize) -> Option<usize> {
        let r = self.sps / self.step;
        if e < self.n_ff {
            (e >= r).then(|| e - r)
        } else {
            (e > self.n_ff).then(|| e - 1)
        }
    }

    pub fn row(&self, k: isize, out: &mut [S]) {
        for (e, o) in out.iter_mut().enumerate() {
            *o = self.value(e, k);
        }
    }

    /// Σ_k x_k x_kᵀ over `k ∈ [a, b)` by brute force.
    pub fn gram_direct(&self, a: usize, b: usize) -> Vec<S> {
        let d = self.dim();
        let mut g = vec![S::zero(); d * d];
        let mut x = vec![S::zero(); d];
        for k in a..b {
            self.row(k as isize, &mut x);
            for i in 0..d {
                let xi = x[i];
                for j in 0..=i {
                    g[i * d + j] += xi * x[j];
                }
            }
        }
        symmetrize(&mut g, d);
        g
    }

    /// Same as [`gram_direct`](Self::gram_direct), using the shift structure:
    /// only entries without a predecessor are summed explicitly.
    pub fn gram(&self, a: usize, b: usize) -> Vec<S> {
        let d = self.dim();
        let mut g = vec![S::zero(); d * d];
        let roots: Vec<usize> = (0..d).filter(|&e| self.pred(e).is_none()).collect();
        let mut cols = vec![S::zero(); d];
        for &r in &roots {
            cols.iter_mut().for_each(|c| *c = S::zero());
            for k in a..b {
                let k = k as isize;
                let vr = self.value(r, k);
                for (e, c) in cols.iter_mut().enumerate() {
                    *c += vr * self.value(e, k);
                }
            }
            for e in 0..d {
                g[r * d + e] = cols[e];
                g[e * d + r] = cols[e];
            }
        }
        let (first, last) = (a as isize - 1, b as isize - 1);
        for e in 0..d {
            let Some(pe) = self.pred(e) else { continue };
            for f in 0..=e {
                let Some(pf) = self.pred(f) else { continue };
                let v = g[pe * d + pf] + self.value(pe, first) * self.value(pf, first)
                    - self.value(pe, last) * self.value(pf, last);
                g[e * d + f] = v;
                g[f * d + e] = v;
            }
        }
        g
    }

    /// Σ_k x_k·alpha[k] over `k ∈ [a, b)`.
    pub fn cross(&self, a: usize, b: usize) -> Vec<S> {
        let d = self.dim();
        let mut p = vec![S::zero(); d];
        for k in a..b {
            let t = self.alpha[k];
            for (e, pe) in p.iter_mut().enumerate() {
                *pe += t * self.value(e, k as isize);
            }
        }
        p
    }
}

fn symmetrize<S: Scalar>(g: &mut [S], d: usize) {
    for i in 0..d {
        for j in 0..i {
            g[j * d + i] = g[i * d + j];
        }
    }
}

/// Solves `(A + λI)x = b` for symmetric positive-definite `A` (row-major `d×d`).
pub fn cholesky_solve<S: Scalar>(a: &[S], b: &[S], ridge: S) -> Option<Vec<S>> {
    let d = b.len();
    let mut l = vec![S::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            if i == j {
                s += ridge;
            }
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > S::zero()) || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    let mut z = vec![S::zero(); d];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * z[k];
        }
        z[i] = s / l[i * d + i];
    }
    let mut x = vec![S::zero(); d];
    for i in (0..d).rev() {
        let mut s = z[i];
        for k in i + 1..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    Some(x)
}

/// Ridge-regularised least squares; λ starts at 10⁻⁸·trace and grows until the
/// factorisation succeeds. Returns the solution and whether λ had to grow.
pub fn solve_regularized<S: Scalar>(g: &[S], p: &[S]) -> Option<(Vec<S>, bool)> {
    let d = p.len();
    let trace: S = (0..d).map(|i| g[i * d + i]).sum();
    let mut ridge = S::of(1e-8) * trace.max(S::min_positive_value());
    for attempt in 0..12 {
        if let Some(w) = cholesky_solve(g, p, ridge) {
            return Some((w, attempt > 0));
        }
        ridge *= S::of(100.0);
    }
    None
}

/// `target_energy − 2wᵀp + wᵀGw`.
pub fn residual<S: Scalar>(g: &[S], p: &[S], w: &[S], target_energy: S) -> S {
    let d = w.len();
    let mut quad = S::zero();
    for i in 0..d {
        let mut row = S::zero();
        for j in 0..d {
            row += g[i * d + j] * w[j];
        }
        quad += w[i] * row;
    }
    let lin: S = w.iter().zip(p).map(|(a, b)| *a * *b).sum();
    target_energy - S::of(2.0) * lin + quad
}

/// Principal submatrix on `idx`.
pub fn submatrix<S: Scalar>(g: &[S], d: usize, idx: &[usize]) -> Vec<S> {
    let m = idx.len();
    let mut out = vec![S::zero(); m * m];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[a * m + b] = g[i * d + j];
        }
    }
    out
}
