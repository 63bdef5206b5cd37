//! Shared numerical machinery: derivative-free simplex search, damped
//! Newton–Raphson with finite-difference Hessian, k-fold splitting and
//! seeded RNG streams.
//!
//! Objectives are minimised. Infeasible points are signalled by returning
//! `f64::INFINITY` from the objective; callers keep both minimisers
//! unconstrained by reparameterising (log scales for positive parameters,
//! tanh for box constraints).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Outcome of a minimisation run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x_min: Vec<f64>,
    pub f_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Tolerances for [`nelder_mead`].
#[derive(Debug, Clone)]
pub struct NmOptions {
    /// Stop when the simplex f-spread falls below this.
    pub tol_f: f64,
    /// Stop when the simplex x-spread (max coordinate distance to the best
    /// vertex) falls below this.
    pub tol_x: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions { tol_f: 1e-8, tol_x: 1e-8, max_iter: 5000 }
    }
}

/// Nelder–Mead simplex minimisation with the standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NmOptions,
) -> Result<OptimResult> {
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::config("nelder_mead: empty parameter vector"));
    }
    let f0 = objective(x0);
    if !f0.is_finite() {
        return Err(Error::numerical(format!(
            "nelder_mead: objective not finite at start ({f0})"
        )));
    }

    // Initial simplex: relative 5% perturbation per coordinate, absolute
    // step for coordinates near zero.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-4 { 0.05 * p[i].abs() } else { 2.5e-4 };
        simplex.push(p);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|p| objective(p)).collect();
    fvals[0] = f0;

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;

        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        // Convergence on both the f-spread and the x-spread.
        let f_spread = if fvals[worst].is_finite() {
            fvals[worst] - fvals[best]
        } else {
            f64::INFINITY
        };
        let x_spread = simplex
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if f_spread.abs() < opts.tol_f && x_spread < opts.tol_x {
            converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; dim];
        for &idx in order.iter().take(dim) {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + alpha * (centroid[d] - simplex[worst][d]))
            .collect();
        let f_reflect = objective(&reflect);

        if f_reflect < fvals[best] {
            let expand: Vec<f64> = (0..dim)
                .map(|d| centroid[d] + gamma * (reflect[d] - centroid[d]))
                .collect();
            let f_expand = objective(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fvals[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = f_reflect;
            continue;
        }

        // Contraction toward the centroid, on the better of worst/reflected.
        let (base, f_base) = if f_reflect < fvals[worst] {
            (&reflect, f_reflect)
        } else {
            (&simplex[worst], fvals[worst])
        };
        let contract: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + rho * (base[d] - centroid[d]))
            .collect();
        let f_contract = objective(&contract);
        if f_contract < f_base {
            simplex[worst] = contract;
            fvals[worst] = f_contract;
            continue;
        }

        // Shrink toward the best vertex.
        let best_point = simplex[best].clone();
        for &idx in order.iter().skip(1) {
            for d in 0..dim {
                simplex[idx][d] = best_point[d] + sigma * (simplex[idx][d] - best_point[d]);
            }
            fvals[idx] = objective(&simplex[idx]);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    Ok(OptimResult {
        x_min: simplex[best].clone(),
        f_min: fvals[best],
        iterations,
        converged,
    })
}

/// [`nelder_mead`] with restarts: re-runs from the previous optimum until
/// the improvement drops below `tol_f` (at most `restarts` extra runs).
/// Helps the simplex out of premature collapse on ill-scaled objectives.
pub fn nelder_mead_restarts(
    mut objective: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NmOptions,
    restarts: usize,
) -> Result<OptimResult> {
    let mut result = nelder_mead(&mut objective, x0, opts)?;
    for _ in 0..restarts {
        let next = nelder_mead(&mut objective, &result.x_min, opts)?;
        let improved = result.f_min - next.f_min;
        let total_iterations = result.iterations + next.iterations;
        if next.f_min <= result.f_min {
            result = next;
        }
        result.iterations = total_iterations;
        if improved < opts.tol_f {
            break;
        }
    }
    Ok(result)
}

/// Options for [`newton_raphson`].
#[derive(Debug, Clone)]
pub struct NewtonOptions {
    /// Converged when the gradient sup-norm falls below this.
    pub tol_g: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol_g: 1e-6, max_iter: 5000 }
    }
}

const MAX_HALVINGS: usize = 30;

/// Damped Newton–Raphson minimisation.
///
/// The Hessian is built by central finite differences of the supplied
/// gradient. Steps are halved until the objective decreases (at most 30
/// halvings); when the Hessian solve fails or the Newton direction is not
/// a descent direction, the step falls back to steepest descent.
pub fn newton_raphson(
    mut objective: impl FnMut(&[f64]) -> f64,
    mut gradient: impl FnMut(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &NewtonOptions,
) -> Result<OptimResult> {
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::config("newton_raphson: empty parameter vector"));
    }
    let mut x = x0.to_vec();
    let mut f = objective(&x);
    if !f.is_finite() {
        return Err(Error::numerical(format!(
            "newton_raphson: objective not finite at start ({f})"
        )));
    }
    let mut g = gradient(&x);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("newton_raphson: gradient not finite at start".to_string()));
    }

    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, &a| m.max(a.abs()));
    let mut iterations = 0;
    let mut converged = sup(&g) < opts.tol_g;

    while !converged && iterations < opts.max_iter {
        iterations += 1;

        // Central-difference Hessian columns from the gradient.
        let mut hessian = vec![vec![0.0; dim]; dim];
        for j in 0..dim {
            let h = 1e-5 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let gp = gradient(&xp);
            let gm = gradient(&xm);
            for i in 0..dim {
                hessian[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }

        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut step = solve_linear(&hessian, &neg_g);
        // Require a finite descent direction; otherwise steepest descent.
        let descent_ok = match &step {
            Some(s) => {
                s.iter().all(|v| v.is_finite())
                    && s.iter().zip(&g).map(|(si, gi)| si * gi).sum::<f64>() < 0.0
            }
            None => false,
        };
        if !descent_ok {
            step = Some(g.iter().map(|v| -v).collect());
        }
        let step = step.unwrap();

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            let fc = objective(&cand);
            if fc.is_finite() && fc < f {
                x = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No decrease along either direction at the smallest step.
            break;
        }

        g = gradient(&x);
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        converged = sup(&g) < opts.tol_g;
    }

    Ok(OptimResult { x_min: x, f_min: f, iterations, converged })
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Split `0..n` into `k` disjoint folds of size ⌊n/k⌋ or ⌈n/k⌉ after a
/// seeded random permutation. Deterministic given `seed`.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::config(format!("kfold_split: k={k} must be at least 2")));
    }
    if k > n {
        return Err(Error::config(format!("kfold_split: k={k} exceeds n={n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = rng_stream(seed, 0);
    idx.shuffle(&mut rng);

    let base = n / k;
    let remainder = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut offset = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < remainder);
        folds.push(idx[offset..offset + size].to_vec());
        offset += size;
    }
    Ok(folds)
}

/// Independent deterministic RNG stream for a `(master_seed, stream_id)`
/// pair. Parallel work items each take their own stream so results do not
/// depend on scheduling.
pub fn rng_stream(master_seed: u64, stream_id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
