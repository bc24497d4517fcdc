use ndarray::ArrayView2;

use super::{ModelError, Result};

/// `sign(z)·max(|z| − g, 0)`.
pub fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// A fit on standardized columns: `ŷ = intercept + Xs·beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardFit {
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub alpha: f64,
    pub sweeps: usize,
}

impl StandardFit {
    pub fn active_set_size(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

/// Coordinate-descent state over a fixed standardized matrix. Coefficients
/// persist between calls, so successive [`fit`](Self::fit) calls along a
/// decreasing λ path are warm-started.
pub struct CoordinateDescent {
    n: usize,
    p: usize,
    /// Column-major copy of the matrix.
    cols: Vec<f64>,
    y_mean: f64,
    yc: Vec<f64>,
    resid: Vec<f64>,
    beta: Vec<f64>,
    lambda: f64,
    alpha: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl CoordinateDescent {
    pub fn new(xs: ArrayView2<f64>, y: &[f64]) -> Self {
        let (n, p) = xs.dim();
        assert_eq!(n, y.len(), "row count of X and y differ");
        let mut cols = Vec::with_capacity(n * p);
        for c in xs.columns() {
            cols.extend(c.iter().copied());
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
        CoordinateDescent {
            n,
            p,
            cols,
            y_mean,
            resid: yc.clone(),
            yc,
            beta: vec![0.0; p],
            lambda: 0.0,
            alpha: 1.0,
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Replaces the coefficients and recomputes the residual.
    pub fn set_beta(&mut self, beta: &[f64]) {
        assert_eq!(beta.len(), self.p);
        self.beta = beta.to_vec();
        let fit = self.current_fit();
        self.resid = self.yc.iter().zip(&fit).map(|(y, f)| y - f).collect();
    }

    fn current_fit(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.n];
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                for (v, x) in f.iter_mut().zip(self.col(j)) {
                    *v += x * b;
                }
            }
        }
        f
    }

    pub fn set_penalty(&mut self, lambda: f64, alpha: f64) {
        self.lambda = lambda;
        self.alpha = alpha;
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `x_jᵀr / n` for every column.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.p)
            .map(|j| dot(self.col(j), &self.resid) / self.n as f64)
            .collect()
    }

    /// One cyclic pass over `coords` (all columns when `None`). Returns the
    /// largest coefficient change.
    pub fn sweep(&mut self, coords: Option<&[usize]>) -> f64 {
        let l1 = self.lambda * self.alpha;
        let denom = 1.0 + self.lambda * (1.0 - self.alpha);
        let mut max_delta = 0.0f64;
        let mut step = |j: usize, this: &mut Self| {
            let old = this.beta[j];
            let col = &this.cols[j * this.n..(j + 1) * this.n];
            let z = dot(col, &this.resid) / this.n as f64 + old;
            let new = soft_threshold(z, l1) / denom;
            let delta = new - old;
            if delta != 0.0 {
                for (r, x) in this.resid.iter_mut().zip(col) {
                    *r -= x * delta;
                }
                this.beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        };
        match coords {
            Some(c) => c.iter().for_each(|&j| step(j, self)),
            None => (0..self.p).for_each(|j| step(j, self)),
        }
        max_delta
    }

    /// The penalized objective, computed from scratch rather than from the
    /// tracked residual.
    pub fn objective(&self) -> f64 {
        let fit = self.current_fit();
        let rss: f64 = self.yc.iter().zip(&fit).map(|(y, f)| (y - f) * (y - f)).sum();
        let l1: f64 = self.beta.iter().map(|b| b.abs()).sum();
        let l2: f64 = self.beta.iter().map(|b| b * b).sum();
        rss / (2.0 * self.n as f64) + self.lambda * (self.alpha * l1 + (1.0 - self.alpha) / 2.0 * l2)
    }

    /// Moves toward the exact minimizer over the active set. With the signs
    /// of the current coefficients fixed the objective is a quadratic whose
    /// minimizer solves `(X_AᵀX_A/n + λ(1−α)I)β = X_Aᵀy/n − λα·s`. If that
    /// point flips a sign, the step stops where the first coefficient hits
    /// zero, the coefficient leaves the set, and the solve repeats. Every
    /// step stays inside one orthant, so the objective never rises.
    fn try_active_solve(&mut self, active: &[usize]) {
        let n = self.n as f64;
        let l1 = self.lambda * self.alpha;
        let l2 = self.lambda * (1.0 - self.alpha);
        let k0 = active.len();
        let mut gram = vec![0.0; k0 * k0];
        let mut xty = vec![0.0; k0];
        for (a, &i) in active.iter().enumerate() {
            let ci = self.col(i);
            for (b, &j) in active.iter().enumerate().take(a + 1) {
                let v = dot(ci, self.col(j)) / n;
                gram[a * k0 + b] = v;
                gram[b * k0 + a] = v;
            }
            xty[a] = dot(ci, &self.yc) / n;
        }

        let before = self.objective();
        let saved = self.beta.clone();
        let mut beta = saved.clone();
        let mut set: Vec<usize> = (0..k0).filter(|&a| beta[active[a]] != 0.0).collect();
        while !set.is_empty() {
            let k = set.len();
            let mut g = vec![0.0; k * k];
            let mut rhs = vec![0.0; k];
            for (a, &ia) in set.iter().enumerate() {
                for (b, &ib) in set.iter().enumerate() {
                    g[a * k + b] = gram[ia * k0 + ib];
                }
                g[a * k + a] += l2;
                rhs[a] = xty[ia] - l1 * beta[active[ia]].signum();
            }
            let Some(sol) = cholesky_solve(&mut g, &mut rhs, k) else {
                break;
            };
            if sol.iter().any(|v| !v.is_finite()) {
                break;
            }
            // Largest step in [0, 1] that keeps every sign, and the
            // coefficients that hit zero at that step.
            let mut t = 1.0f64;
            let mut blocking = Vec::new();
            for (a, &ia) in set.iter().enumerate() {
                let (old, new) = (beta[active[ia]], sol[a]);
                if new == 0.0 || new.signum() != old.signum() {
                    let r = old / (old - new);
                    if r < t {
                        t = r;
                        blocking.clear();
                    }
                    if r <= t {
                        blocking.push(a);
                    }
                }
            }
            for (a, &ia) in set.iter().enumerate() {
                let j = active[ia];
                beta[j] += t * (sol[a] - beta[j]);
            }
            if blocking.is_empty() {
                break;
            }
            for &a in &blocking {
                beta[active[set[a]]] = 0.0;
            }
            set = set
                .iter()
                .enumerate()
                .filter(|(a, _)| !blocking.contains(a))
                .map(|(_, &ia)| ia)
                .collect();
        }

        self.set_beta(&beta);
        if self.objective() > before {
            self.set_beta(&saved);
        }
    }

    /// Runs to convergence at the current penalty: full sweeps alternate with
    /// passes over the active set until a full sweep moves no coefficient by
    /// `tol` or more.
    pub fn fit(&mut self, tol: f64, max_sweeps: usize) -> Result<StandardFit> {
        let lambda = self.lambda;
        let mut sweeps = 0;
        let budget = |sweeps: &mut usize| {
            *sweeps += 1;
            if *sweeps > max_sweeps {
                Err(ModelError::NotConverged {
                    lambda,
                    sweeps: max_sweeps,
                })
            } else {
                Ok(())
            }
        };
        loop {
            budget(&mut sweeps)?;
            if self.sweep(None) < tol {
                break;
            }
            let active: Vec<usize> = (0..self.p).filter(|&j| self.beta[j] != 0.0).collect();
            let mut inner = 0usize;
            loop {
                budget(&mut sweeps)?;
                if self.sweep(Some(&active)) < tol {
                    break;
                }
                inner += 1;
                if inner.is_multiple_of(NEWTON_EVERY) {
                    self.try_active_solve(&active);
                }
            }
        }
        Ok(StandardFit {
            intercept: self.y_mean,
            beta: self.beta.clone(),
            lambda: self.lambda,
            alpha: self.alpha,
            sweeps,
        })
    }
}

/// Active-set passes between exact solve attempts.
const NEWTON_EVERY: usize = 10;

/// Solves `G x = b` in place for symmetric positive definite `G` (row-major
/// `k x k`); `None` when `G` is not numerically positive definite.
fn cholesky_solve<'a>(g: &mut [f64], b: &'a mut [f64], k: usize) -> Option<&'a [f64]> {
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[i * k + j];
            for m in 0..j {
                s -= g[i * k + m] * g[j * k + m];
            }
            if i == j {
                if !(s > 1e-12) {
                    return None;
                }
                g[i * k + i] = s.sqrt();
            } else {
                g[i * k + j] = s / g[j * k + j];
            }
        }
    }
    for i in 0..k {
        let mut s = b[i];
        for m in 0..i {
            s -= g[i * k + m] * b[m];
        }
        b[i] = s / g[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for m in i + 1..k {
            s -= g[m * k + i] * b[m];
        }
        b[i] = s / g[i * k + i];
    }
    Some(b)
}

/// Fits one λ on standardized columns; `y` is centered internally.
pub fn fit_at_lambda(
    xs: ArrayView2<f64>,
    y: &[f64],
    lambda: f64,
    alpha: f64,
    warm_start: Option<&[f64]>,
    tol: f64,
    max_sweeps: usize,
) -> Result<StandardFit> {
    let mut cd = CoordinateDescent::new(xs, y);
    if let Some(b) = warm_start {
        cd.set_beta(b);
    }
    cd.set_penalty(lambda, alpha);
    cd.fit(tol, max_sweeps)
}

/// Optimality check: every zero coefficient has `|x_jᵀr/n| ≤ λα + 10·tol`,
/// and every nonzero one satisfies its stationarity condition to the same
/// slack.
pub fn check_kkt(xs: ArrayView2<f64>, y: &[f64], fit: &StandardFit, tol: f64) -> bool {
    let n = y.len() as f64;
    let resid: Vec<f64> = (0..y.len())
        .map(|i| y[i] - fit.intercept - xs.row(i).iter().zip(&fit.beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let slack = 10.0 * tol;
    xs.columns().into_iter().zip(&fit.beta).all(|(col, &b)| {
        let g = col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / n;
        if b == 0.0 {
            g.abs() <= fit.lambda * fit.alpha + slack
        } else {
            let want = fit.lambda * fit.alpha * b.signum() + fit.lambda * (1.0 - fit.alpha) * b;
            (g - want).abs() <= slack
        }
    })
}
