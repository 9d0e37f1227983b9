//! Dual quadratic program `max -1/2 a'Qa + R'a + D` subject to `a'y = 0` and
//! per-coordinate bounds, solved by a generalized two-variable SMO.
//!
//! The bounds may be infinite above (coordinates whose stationarity condition
//! does not cap the multiplier); such coordinates are required to carry a
//! strictly positive diagonal so every two-variable subproblem stays bounded.
//! A dense projected-gradient solver with exact feasible-set projection is
//! provided as an independent reference for tests.

use serde::{Deserialize, Serialize};

use crate::error::EdsvmError;
use crate::matrix::Matrix;

/// The common dual form shared by every model variant in this crate.
#[derive(Debug, Clone)]
pub struct DualQP {
    /// Symmetric `n x n` quadratic term, `Q = H + diag(d)`.
    pub q: Matrix,
    /// Linear term.
    pub r: Vec<f64>,
    /// Additive constant; does not move the optimizer but is part of the
    /// reported objective, which duality-gap checks depend on.
    pub d_const: f64,
    /// Labels in {-1, +1} defining the equality constraint `a'y = 0`.
    pub y: Vec<f64>,
    /// Per-coordinate lower bounds (all zeros for the duals in this crate).
    pub lower: Vec<f64>,
    /// Per-coordinate upper bounds; `f64::INFINITY` marks an uncapped coordinate.
    pub upper: Vec<f64>,
}

impl DualQP {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn validate(&self) -> Result<(), EdsvmError> {
        let n = self.n();
        if self.q.rows() != n || self.q.cols() != n || self.y.len() != n
            || self.lower.len() != n || self.upper.len() != n
        {
            return Err(EdsvmError::Shape("inconsistent dual QP dimensions".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.q.get(i, j) - self.q.get(j, i)).abs() > 1e-12 {
                    return Err(EdsvmError::InvalidData("Q is not symmetric".into()));
                }
            }
        }
        for i in 0..n {
            if self.lower[i] > self.upper[i] {
                return Err(EdsvmError::Infeasible(format!(
                    "lower[{i}] = {} > upper[{i}] = {}",
                    self.lower[i], self.upper[i]
                )));
            }
            if self.lower[i] > 0.0 || self.upper[i] < 0.0 {
                return Err(EdsvmError::Infeasible(
                    "origin must be feasible (lower <= 0 <= upper)".into(),
                ));
            }
            if self.upper[i].is_infinite() && self.q.get(i, i) <= 0.0 {
                return Err(EdsvmError::InvalidData(format!(
                    "coordinate {i} is unbounded above but Q[{i},{i}] <= 0"
                )));
            }
            if self.y[i] != 1.0 && self.y[i] != -1.0 {
                return Err(EdsvmError::InvalidData("labels must be -1 or +1".into()));
            }
        }
        Ok(())
    }

    /// `-1/2 a'Qa + R'a + D`.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let qa = self.q.matvec(alpha);
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..self.n() {
            quad += alpha[i] * qa[i];
            lin += alpha[i] * self.r[i];
        }
        -0.5 * quad + lin + self.d_const
    }

    fn check_feasible(&self, alpha: &[f64], tol: f64) -> Result<(), EdsvmError> {
        if alpha.len() != self.n() {
            return Err(EdsvmError::Shape("alpha length mismatch".into()));
        }
        let mut eq = 0.0;
        let mut scale: f64 = 1.0;
        for (i, &ai) in alpha.iter().enumerate() {
            if ai < self.lower[i] - tol || ai > self.upper[i] + tol {
                return Err(EdsvmError::Infeasible(format!(
                    "alpha[{i}] = {ai} out of [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
            eq += ai * self.y[i];
            scale = scale.max(ai.abs());
        }
        if eq.abs() > tol * scale.max(1.0) * self.n() as f64 {
            return Err(EdsvmError::Infeasible(format!(
                "equality constraint violated: a'y = {eq}"
            )));
        }
        Ok(())
    }
}

/// Result of a dual solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QPSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ETA_MIN: f64 = 1e-12;
const SNAP: f64 = 1e-12;

/// Default SMO stopping tolerance on the maximal violating-pair gap.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default cap on two-variable pair updates.
pub const DEFAULT_MAX_ITER: usize = 10_000_000;

/// Maximal violating pair over the label-projected gradient.
///
/// `g` is the gradient of the minimization form `1/2 a'Qa - R'a`. Returns
/// `(i, j, gap)` where `gap = max_{I_up} -y g - min_{I_low} -y g`; `None`
/// when either index set is empty (no feasible ascent direction exists).
fn max_violating_pair(qp: &DualQP, alpha: &[f64], g: &[f64]) -> Option<(usize, usize, f64)> {
    let n = qp.n();
    let mut i_best = None;
    let mut m_up = f64::NEG_INFINITY;
    let mut j_best = None;
    let mut m_low = f64::INFINITY;
    for t in 0..n {
        let v = -qp.y[t] * g[t];
        let can_up = if qp.y[t] > 0.0 { alpha[t] < qp.upper[t] } else { alpha[t] > qp.lower[t] };
        let can_low = if qp.y[t] > 0.0 { alpha[t] > qp.lower[t] } else { alpha[t] < qp.upper[t] };
        if can_up && v > m_up {
            m_up = v;
            i_best = Some(t);
        }
        if can_low && v < m_low {
            m_low = v;
            j_best = Some(t);
        }
    }
    match (i_best, j_best) {
        (Some(i), Some(j)) if i != j => Some((i, j, m_up - m_low)),
        _ => None,
    }
}

fn snap_to_bound(v: f64, lo: f64, hi: f64) -> f64 {
    let mut v = v;
    if v - lo < SNAP * lo.abs().max(1.0) {
        v = lo;
    }
    if hi.is_finite() && hi - v < SNAP * hi.abs().max(1.0) {
        v = hi;
    }
    v.clamp(lo, hi)
}

fn smo_loop(
    qp: &DualQP,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<QPSolution, EdsvmError> {
    qp.validate()?;
    if tol <= 0.0 {
        return Err(EdsvmError::InvalidHyper("tol must be positive".into()));
    }
    let n = qp.n();
    let mut alpha = vec![0.0; n];
    // Gradient of the minimization form at alpha = 0.
    let mut g: Vec<f64> = qp.r.iter().map(|&r| -r).collect();
    let mut iterations = 0usize;
    let mut residual;
    let mut pair = max_violating_pair(qp, &alpha, &g);

    loop {
        let (i, j, gap) = match pair {
            Some(p) => p,
            None => {
                residual = 0.0;
                break;
            }
        };
        residual = gap;
        if gap <= tol {
            break;
        }
        if iterations >= max_iter {
            let objective = qp.objective(&alpha);
            return Ok(QPSolution { alpha, objective, kkt_residual: residual, iterations, converged: false });
        }

        // Feasible direction: alpha_i moves by +y_i*delta, alpha_j by -y_j*delta.
        let s = qp.y[i] * qp.y[j];
        let eta = qp.q.get(i, i) + qp.q.get(j, j) - 2.0 * s * qp.q.get(i, j);

        let room_i = if qp.y[i] > 0.0 { qp.upper[i] - alpha[i] } else { alpha[i] - qp.lower[i] };
        let room_j = if qp.y[j] > 0.0 { alpha[j] - qp.lower[j] } else { qp.upper[j] - alpha[j] };
        let delta_max = room_i.min(room_j);

        let delta = if eta > ETA_MIN {
            (gap / eta).min(delta_max)
        } else {
            // Linear along this direction; the objective improves all the way
            // to the nearest finite bound. An infinite delta_max cannot occur:
            // uncapped coordinates carry positive diagonal, forcing eta > 0.
            if delta_max.is_infinite() {
                return Err(EdsvmError::NonConvergence(
                    "unbounded ascent direction in degenerate subproblem".into(),
                ));
            }
            delta_max
        };
        if delta.is_nan() || delta <= 0.0 {
            // Numerically pinned pair; the residual is already the honest gap.
            break;
        }

        let di = qp.y[i] * delta;
        let dj = -qp.y[j] * delta;
        alpha[i] = snap_to_bound(alpha[i] + di, qp.lower[i], qp.upper[i]);
        alpha[j] = snap_to_bound(alpha[j] + dj, qp.lower[j], qp.upper[j]);

        // Single fused pass: push the rank-two gradient update (Q symmetric,
        // rows double as columns) and select the next violating pair.
        let qi = qp.q.row(i);
        let qj = qp.q.row(j);
        let mut i_best = None;
        let mut m_up = f64::NEG_INFINITY;
        let mut j_best = None;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let gt = g[t] + qi[t] * di + qj[t] * dj;
            g[t] = gt;
            let v = -qp.y[t] * gt;
            let (can_up, can_low) = if qp.y[t] > 0.0 {
                (alpha[t] < qp.upper[t], alpha[t] > qp.lower[t])
            } else {
                (alpha[t] > qp.lower[t], alpha[t] < qp.upper[t])
            };
            if can_up && v > m_up {
                m_up = v;
                i_best = Some(t);
            }
            if can_low && v < m_low {
                m_low = v;
                j_best = Some(t);
            }
        }
        pair = match (i_best, j_best) {
            (Some(a), Some(b)) if a != b => Some((a, b, m_up - m_low)),
            _ => None,
        };
        iterations += 1;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(qp.objective(&alpha));
        }
    }

    let objective = qp.objective(&alpha);
    Ok(QPSolution { alpha, objective, kkt_residual: residual, iterations, converged: true })
}

/// Solves the dual by sequential minimal optimization with maximal
/// violating-pair selection. Returns a non-converged solution (best iterate)
/// when `max_iter` pair updates are exhausted.
pub fn solve_smo(qp: &DualQP, tol: f64, max_iter: usize) -> Result<QPSolution, EdsvmError> {
    smo_loop(qp, tol, max_iter, None)
}

/// Maximal violating-pair gap at a given feasible point.
pub fn kkt_report(qp: &DualQP, alpha: &[f64]) -> Result<f64, EdsvmError> {
    qp.validate()?;
    qp.check_feasible(alpha, 1e-9)?;
    let qa = qp.q.matvec(alpha);
    let g: Vec<f64> = (0..qp.n()).map(|i| qa[i] - qp.r[i]).collect();
    Ok(match max_violating_pair(qp, alpha, &g) {
        Some((_, _, gap)) => gap.max(0.0),
        None => 0.0,
    })
}

/// Euclidean projection onto `{x : y'x = 0, lower <= x <= upper}` by
/// bisection on the multiplier of the equality constraint.
fn project_feasible(z: &[f64], y: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let n = z.len();
    let clipped = |nu: f64| -> Vec<f64> {
        (0..n)
            .map(|i| (z[i] - nu * y[i]).clamp(lower[i], upper[i]))
            .collect()
    };
    let phi = |nu: f64| -> f64 {
        (0..n).map(|i| y[i] * (z[i] - nu * y[i]).clamp(lower[i], upper[i])).sum()
    };
    // phi is continuous and nonincreasing in nu; bracket a root by expansion.
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        if phi(lo) >= 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..200 {
        if phi(hi) <= 0.0 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * hi.abs().max(1.0) {
            break;
        }
    }
    clipped(0.5 * (lo + hi))
}

const REFERENCE_CAP: usize = 4_000_000;

/// Dense projected-gradient ascent with exact projection; independent
/// reference used to cross-check [`solve_smo`]. Intended for `n <= 200`.
pub fn solve_reference(qp: &DualQP, tol: f64) -> Result<QPSolution, EdsvmError> {
    qp.validate()?;
    if tol <= 0.0 {
        return Err(EdsvmError::InvalidHyper("tol must be positive".into()));
    }
    let n = qp.n();
    if n > 200 {
        return Err(EdsvmError::InvalidData(
            "reference solver is limited to n <= 200".into(),
        ));
    }

    // Spectral-norm estimate of Q by power iteration, for the step size.
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lmax = 0.0f64;
    for _ in 0..100 {
        let w = qp.q.matvec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            break;
        }
        lmax = norm;
        for i in 0..n {
            v[i] = w[i] / norm;
        }
    }
    let step = 1.0 / lmax.max(1e-8);

    let mut alpha = project_feasible(&vec![0.0; n], &qp.y, &qp.lower, &qp.upper);
    let mut obj = qp.objective(&alpha);
    for it in 0..REFERENCE_CAP {
        let qa = qp.q.matvec(&alpha);
        let z: Vec<f64> = (0..n)
            .map(|i| alpha[i] + step * (qp.r[i] - qa[i]))
            .collect();
        let next = project_feasible(&z, &qp.y, &qp.lower, &qp.upper);
        let next_obj = qp.objective(&next);
        let moved = alpha
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        alpha = next;
        let improved = next_obj - obj;
        obj = next_obj;
        if improved.abs() < tol && moved < tol.sqrt() {
            let residual = kkt_report(qp, &alpha).unwrap_or(f64::NAN);
            return Ok(QPSolution {
                alpha,
                objective: obj,
                kkt_residual: residual,
                iterations: it + 1,
                converged: true,
            });
        }
    }
    Err(EdsvmError::NonConvergence(format!(
        "projected gradient exceeded {REFERENCE_CAP} iterations"
    )))
}
