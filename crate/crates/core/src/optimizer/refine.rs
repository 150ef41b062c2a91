//! Reduced-support optimization: `k` cluster vectors with fixed multiplicities.
//!
//! After smoothing, the active pairs are polished by Newton's method on the
//! KKT system of
//!
//! ```text
//! minimize t  subject to  D_p(w) <= t,  sum_c m_c w_c = 0,  sum_c m_c |w_c| = 1
//! ```
//!
//! restricted to the active set. The rotation gauge makes the Jacobian
//! singular, so each step is the minimum-norm least-squares solution.

use nalgebra::{DMatrix, DVector};

use super::lbfgs::{self, LbfgsOptions};
use super::objective::PairObjective;
use super::Schedule;

/// Result of the smoothing + Newton pipeline on one support.
#[derive(Clone, Debug)]
pub struct ClusterFit {
    /// Closed cluster vectors at unit perimeter, flattened `k * dim`.
    pub w: Vec<f64>,
    /// Final KKT residual norm when the Newton polish was adopted.
    pub kkt_residual: Option<f64>,
    /// Some cluster vector shrank to (numerically) zero length.
    pub collapsed: bool,
    pub iterations: usize,
    pub converged: bool,
}

fn unit(x: &[f64]) -> Vec<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter().map(|v| v / n).collect()
    } else {
        vec![0.0; x.len()]
    }
}

fn vnorm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Rescales closed edges to unit (weighted) perimeter and re-centers them.
pub(crate) fn normalize(obj: &PairObjective, w: &[f64]) -> Vec<f64> {
    let w = obj.edges(w);
    let p = obj.perimeter(&w);
    w.iter().map(|v| v / p).collect()
}

/// Runs the annealed smoothing stages from `z0`.
pub(crate) fn smooth(
    obj: &PairObjective,
    z0: Vec<f64>,
    schedule: &Schedule,
    freeze_floor: Option<f64>,
) -> (Vec<f64>, usize, bool) {
    let stages = schedule.stages();
    let d = obj.dim();
    let mut z = normalize(obj, &z0);
    let mut remaining = schedule.max_iters;
    let mut total_iters = 0;
    let mut converged = false;
    // deficits at unit perimeter are O(1/n)
    let scale = obj.total_weight();
    for (s, (beta, eps)) in stages.iter().enumerate() {
        z = normalize(obj, &z);
        let frozen: Option<Vec<bool>> = freeze_floor
            .map(|floor| (0..obj.n_vars()).map(|v| vnorm(&z[(v / d) * d..(v / d + 1) * d]) < floor).collect());
        let budget = remaining / (stages.len() - s);
        let out = lbfgs::minimize(
            |x, g| obj.smoothed(x, beta * scale, *eps, Some(g)),
            z,
            frozen.as_deref(),
            LbfgsOptions { max_iters: budget, grad_tol: schedule.grad_tol, memory: 12 },
        );
        remaining = remaining.saturating_sub(out.iterations);
        total_iters += out.iterations;
        converged = out.converged;
        z = out.x;
    }
    (normalize(obj, &z), total_iters, converged)
}

struct Kkt<'a> {
    obj: &'a PairObjective,
    active: Vec<usize>,
}

impl<'a> Kkt<'a> {
    fn nw(&self) -> usize {
        self.obj.n_vars()
    }

    fn size(&self) -> usize {
        self.nw() + 1 + self.active.len() + self.obj.dim() + 1
    }

    fn hess_norm(x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        let n = vnorm(x);
        let u = unit(x);
        DMatrix::from_fn(d, d, |a, b| {
            let id = if a == b { 1.0 } else { 0.0 };
            if n > 0.0 {
                (id - u[a] * u[b]) / n
            } else {
                0.0
            }
        })
    }

    /// Residual and Jacobian at packed unknowns `(w, t, lambda, nu, mu)`.
    fn eval(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.obj.dim();
        let k = self.obj.groups();
        let nw = self.nw();
        let a = self.active.len();
        let (it, il, inu, imu) = (nw, nw + 1, nw + 1 + a, nw + 1 + a + d);
        let m = self.obj.weights();
        let w = &x[..nw];
        let t = x[it];
        let lam = &x[il..il + a];
        let nu = &x[inu..inu + d];
        let mu = x[imu];
        let size = self.size();
        let mut r = DVector::zeros(size);
        let mut jac = DMatrix::zeros(size, size);

        for c in 0..k {
            let wc = &w[c * d..(c + 1) * d];
            let uc = unit(wc);
            let hc = Self::hess_norm(wc);
            for q in 0..d {
                r[c * d + q] += m[c] * nu[q] + mu * m[c] * uc[q];
                jac[(c * d + q, inu + q)] = m[c];
                jac[(inu + q, c * d + q)] = m[c];
                r[inu + q] += m[c] * wc[q];
                jac[(c * d + q, imu)] = m[c] * uc[q];
                jac[(imu, c * d + q)] = m[c] * uc[q];
                for s in 0..d {
                    jac[(c * d + q, c * d + s)] += mu * m[c] * hc[(q, s)];
                }
            }
            r[imu] += m[c] * vnorm(wc);
        }
        r[imu] -= 1.0;

        r[it] = 1.0;
        for (slot, &p) in self.active.iter().enumerate() {
            let (c, e) = self.obj.pairs()[p];
            let wc = &w[c * d..(c + 1) * d];
            let we = &w[e * d..(e + 1) * d];
            let s: Vec<f64> = (0..d).map(|q| wc[q] + we[q]).collect();
            let (uc, ue, us) = (unit(wc), unit(we), unit(&s));
            let (hc, he, hs) = (Self::hess_norm(wc), Self::hess_norm(we), Self::hess_norm(&s));
            let lp = lam[slot];
            let row = il + slot;

            r[it] -= lp;
            jac[(it, row)] = -1.0;
            r[row] = vnorm(wc) + vnorm(we) - vnorm(&s) - t;
            jac[(row, it)] = -1.0;
            for q in 0..d {
                let gc = uc[q] - us[q];
                let ge = ue[q] - us[q];
                r[c * d + q] += lp * gc;
                r[e * d + q] += lp * ge;
                jac[(c * d + q, row)] = gc;
                jac[(e * d + q, row)] = ge;
                jac[(row, c * d + q)] = gc;
                jac[(row, e * d + q)] = ge;
                for s2 in 0..d {
                    jac[(c * d + q, c * d + s2)] += lp * (hc[(q, s2)] - hs[(q, s2)]);
                    jac[(e * d + q, e * d + s2)] += lp * (he[(q, s2)] - hs[(q, s2)]);
                    jac[(c * d + q, e * d + s2)] -= lp * hs[(q, s2)];
                    jac[(e * d + q, c * d + s2)] -= lp * hs[(q, s2)];
                }
            }
        }
        (r, jac)
    }

    /// Damped Gauss-Newton iterations; returns the final unknowns and residual.
    fn solve(&self, mut x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
        let (mut r, mut jac) = self.eval(&x);
        let mut rn = r.norm();
        for _ in 0..80 {
            if rn < 1e-15 {
                break;
            }
            let svd = jac.clone().svd(true, true);
            let cut = 1e-11 * svd.singular_values.max();
            let step = svd.solve(&(-&r), cut).ok()?;
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-6 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + alpha * b).collect();
                let (r2, j2) = self.eval(&trial);
                let n2 = r2.norm();
                if n2.is_finite() && n2 < (1.0 - 1e-4 * alpha) * rn {
                    x = trial;
                    r = r2;
                    jac = j2;
                    rn = n2;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        rn.is_finite().then_some((x, rn))
    }
}

/// Newton polish of the KKT system starting from smoothed closed edges `w0`.
/// Returns polished unit-perimeter edges and the residual, or `None` when no
/// consistent active set is found.
pub(crate) fn kkt_polish(obj: &PairObjective, w0: &[f64], beta: f64) -> Option<(Vec<f64>, f64)> {
    let vals = obj.normalized_deficits(w0);
    if vals.is_empty() {
        return None;
    }
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let delta = 1e-3 * top + 10.0 / beta;
    let mut active: Vec<usize> = (0..vals.len()).filter(|&p| vals[p] >= top - delta).collect();
    let d = obj.dim();

    for _round in 0..10 {
        let kkt = Kkt { obj, active: active.clone() };
        let weights: Vec<f64> = active.iter().map(|&p| (beta * (vals[p] - top)).exp()).collect();
        let wsum: f64 = weights.iter().sum();
        let mut x = w0.to_vec();
        x.push(top);
        x.extend(weights.iter().map(|v| v / wsum));
        x.extend(std::iter::repeat_n(0.0, d));
        x.push(-top);

        let (sol, res) = kkt.solve(x)?;
        if res > 1e-10 {
            return None;
        }
        let nw = obj.n_vars();
        let lam = &sol[nw + 1..nw + 1 + active.len()];
        let w = normalize(obj, &sol[..nw]);
        let t = sol[nw];

        let (min_slot, min_lam) =
            lam.iter().enumerate().fold((0, f64::INFINITY), |acc, (s, &l)| if l < acc.1 { (s, l) } else { acc });
        if min_lam < -1e-9 && active.len() > 1 {
            active.remove(min_slot);
            continue;
        }
        let now = obj.normalized_deficits(&w);
        let violated: Vec<usize> = (0..now.len()).filter(|p| !active.contains(p) && now[*p] > t + 1e-12).collect();
        if !violated.is_empty() {
            active.extend(violated);
            active.sort_unstable();
            continue;
        }
        return Some((w, res));
    }
    None
}

/// Smoothing followed by the KKT polish; keeps whichever point is better.
pub(crate) fn fit_clusters(obj: &PairObjective, z0: Vec<f64>, schedule: &Schedule) -> ClusterFit {
    let (w_smooth, iterations, converged) = smooth(obj, z0, schedule, None);
    let smooth_value = obj.true_value(&w_smooth);
    let beta = schedule.beta.last().copied().unwrap_or(1.0);
    let mut best = (w_smooth, smooth_value, None);
    if let Some((w, res)) = kkt_polish(obj, &best.0, beta) {
        let v = obj.true_value(&w);
        if v <= best.1 {
            best = (w, v, Some(res));
        }
    }
    let d = obj.dim();
    let collapsed = (0..obj.groups()).any(|c| vnorm(&best.0[c * d..(c + 1) * d]) < 1e-8);
    ClusterFit { w: best.0, kkt_residual: best.2, collapsed, iterations, converged }
}
