//! Convex quadratic minimization over the probability simplex.

use crate::linalg::{self, Matrix, Vector};

/// Euclidean projection onto `{λ ≥ 0, Σλ = 1}` (sort-based).
pub fn project_simplex(v: &Vector) -> Vector {
    let n = v.len();
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    Vector::from_iterator(n, v.iter().map(|x| (x - theta).max(0.0)))
}

/// Minimizes `½ λᵀHλ − bᵀλ` over the simplex by accelerated projected
/// gradient, starting from the barycenter. `h` must be symmetric positive
/// semidefinite. The iteration is deterministic.
pub fn simplex_qp(h: &Matrix, b: &Vector, max_iter: usize, tol: f64) -> Vector {
    let n = b.len();
    let bary = Vector::from_element(n, 1.0 / n as f64);
    if n == 1 {
        return bary;
    }
    let lipschitz = linalg::sym_eigen(h).0.iter().copied().fold(0.0f64, f64::max);
    if lipschitz <= 0.0 {
        return project_simplex(&(bary + b));
    }
    let step = 1.0 / lipschitz;
    let mut x = bary.clone();
    let mut y = bary;
    let mut t = 1.0f64;
    for _ in 0..max_iter {
        let grad = h * &y - b;
        let next = project_simplex(&(&y - grad * step));
        let moved = (&next - &x).amax();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
        if moved <= tol {
            break;
        }
    }
    x
}
