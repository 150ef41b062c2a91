//! Scale-invariant min-max deficit objective over centered edge variables.
//!
//! Free variables `z_c` (one `dim`-vector per edge or per cluster) are mapped
//! to closed edges `w_c = z_c - (sum_e m_e z_e) / M`, where `m_c` is the
//! multiplicity of cluster `c` and `M = sum m_c`. The objective is the maximum
//! over the listed pairs of `deficit(w_c, w_e) / P(w)` with `P = sum m_c |w_c|`.
//! The smoothed version replaces the max by log-sum-exp at inverse temperature
//! `beta` and every norm by `sqrt(|x|^2 + eps^2)`.

use crate::polygons::deficit;

#[derive(Clone, Debug)]
pub struct PairObjective {
    dim: usize,
    weights: Vec<f64>,
    total_weight: f64,
    pairs: Vec<(usize, usize)>,
}

fn reg_norm(x: &[f64], eps: f64) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() + eps * eps).sqrt()
}

impl PairObjective {
    /// Unit weights and every pair `i < j` of `n` edges.
    pub fn full(n: usize, dim: usize) -> Self {
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        PairObjective { dim, weights: vec![1.0; n], total_weight: n as f64, pairs }
    }

    /// Clusters with the given multiplicities; only distinct-cluster pairs are
    /// listed since same-cluster pairs have zero deficit.
    pub fn clustered(multiplicities: &[usize], dim: usize) -> Self {
        let k = multiplicities.len();
        let weights: Vec<f64> = multiplicities.iter().map(|&m| m as f64).collect();
        let pairs = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
        PairObjective { dim, total_weight: weights.iter().sum(), weights, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn groups(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_vars(&self) -> usize {
        self.dim * self.weights.len()
    }

    /// Closed edge vectors `w` from free variables `z`.
    pub fn edges(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut mean = vec![0.0; d];
        for (c, &m) in self.weights.iter().enumerate() {
            for k in 0..d {
                mean[k] += m * z[c * d + k];
            }
        }
        mean.iter_mut().for_each(|v| *v /= self.total_weight);
        let mut w = z.to_vec();
        for c in 0..self.weights.len() {
            for k in 0..d {
                w[c * d + k] -= mean[k];
            }
        }
        w
    }

    /// Weighted perimeter of closed edges `w`.
    pub fn perimeter(&self, w: &[f64]) -> f64 {
        self.weights.iter().enumerate().map(|(c, &m)| m * reg_norm(&w[c * self.dim..(c + 1) * self.dim], 0.0)).sum()
    }

    fn pair_deficit_exact(&self, w: &[f64], (c, e): (usize, usize)) -> f64 {
        let d = self.dim;
        match d {
            2 => deficit::<2>(w[c * 2..c * 2 + 2].try_into().unwrap(), w[e * 2..e * 2 + 2].try_into().unwrap()),
            3 => deficit::<3>(w[c * 3..c * 3 + 3].try_into().unwrap(), w[e * 3..e * 3 + 3].try_into().unwrap()),
            _ => {
                let s: Vec<f64> = (0..d).map(|k| w[c * d + k] + w[e * d + k]).collect();
                reg_norm(&w[c * d..(c + 1) * d], 0.0) + reg_norm(&w[e * d..(e + 1) * d], 0.0) - reg_norm(&s, 0.0)
            }
        }
    }

    /// Per-pair deficits of `w` divided by the perimeter, in pair order.
    pub fn normalized_deficits(&self, w: &[f64]) -> Vec<f64> {
        let p = self.perimeter(w);
        self.pairs.iter().map(|&pr| self.pair_deficit_exact(w, pr) / p).collect()
    }

    /// Exact objective `max_p deficit_p / P` at free variables `z`.
    pub fn true_value(&self, z: &[f64]) -> f64 {
        let w = self.edges(z);
        self.normalized_deficits(&w).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smoothed objective; writes the gradient with respect to `z` into `grad`
    /// when given.
    pub fn smoothed(&self, z: &[f64], beta: f64, eps: f64, grad: Option<&mut [f64]>) -> f64 {
        let d = self.dim;
        let k = self.weights.len();
        let w = self.edges(z);
        let norms: Vec<f64> = (0..k).map(|c| reg_norm(&w[c * d..(c + 1) * d], eps)).collect();
        let perim: f64 = self.weights.iter().zip(&norms).map(|(m, n)| m * n).sum();

        let mut sums = Vec::with_capacity(self.pairs.len() * d);
        let mut sum_norms = Vec::with_capacity(self.pairs.len());
        let mut vals = Vec::with_capacity(self.pairs.len());
        for &(c, e) in &self.pairs {
            let start = sums.len();
            for t in 0..d {
                sums.push(w[c * d + t] + w[e * d + t]);
            }
            let ns = reg_norm(&sums[start..], eps);
            sum_norms.push(ns);
            vals.push((norms[c] + norms[e] - ns) / perim);
        }
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut weights: Vec<f64> = vals.iter().map(|v| (beta * (v - top)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let value = top + total.ln() / beta;

        if let Some(grad) = grad {
            weights.iter_mut().for_each(|x| *x /= total);
            // d value / d w = sum_p pi_p (grad D_p - f_p grad P) / P
            let mut gw = vec![0.0; k * d];
            let mut weighted_f = 0.0;
            for (p, &(c, e)) in self.pairs.iter().enumerate() {
                let pi = weights[p] / perim;
                if pi == 0.0 {
                    continue;
                }
                weighted_f += weights[p] * vals[p];
                let s = &sums[p * d..(p + 1) * d];
                for t in 0..d {
                    let gs = if sum_norms[p] > 0.0 { s[t] / sum_norms[p] } else { 0.0 };
                    let gc = if norms[c] > 0.0 { w[c * d + t] / norms[c] } else { 0.0 };
                    let ge = if norms[e] > 0.0 { w[e * d + t] / norms[e] } else { 0.0 };
                    gw[c * d + t] += pi * (gc - gs);
                    gw[e * d + t] += pi * (ge - gs);
                }
            }
            let scale = weighted_f / perim;
            for c in 0..k {
                if norms[c] > 0.0 {
                    for t in 0..d {
                        gw[c * d + t] -= scale * self.weights[c] * w[c * d + t] / norms[c];
                    }
                }
            }
            self.pull_back(&gw, grad);
        }
        value
    }

    /// Subgradient of the exact objective at `z` (gradient of the active pair).
    pub fn subgradient(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dim;
        let w = self.edges(z);
        let vals = self.normalized_deficits(&w);
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        for (p, &v) in vals.iter().enumerate() {
            if v > best {
                best = v;
                arg = p;
            }
        }
        let perim = self.perimeter(&w);
        let (c, e) = self.pairs[arg];
        let unit = |x: &[f64]| -> Vec<f64> {
            let n = reg_norm(x, 0.0);
            if n > 0.0 {
                x.iter().map(|v| v / n).collect()
            } else {
                vec![0.0; x.len()]
            }
        };
        let s: Vec<f64> = (0..d).map(|t| w[c * d + t] + w[e * d + t]).collect();
        let (uc, ue, us) = (unit(&w[c * d..(c + 1) * d]), unit(&w[e * d..(e + 1) * d]), unit(&s));
        let mut gw = vec![0.0; w.len()];
        for t in 0..d {
            gw[c * d + t] += (uc[t] - us[t]) / perim;
            gw[e * d + t] += (ue[t] - us[t]) / perim;
        }
        for g in 0..self.weights.len() {
            let u = unit(&w[g * d..(g + 1) * d]);
            for t in 0..d {
                gw[g * d + t] -= best * self.weights[g] * u[t] / perim;
            }
        }
        self.pull_back(&gw, grad);
        best
    }

    // Chain rule through the centering map: dz_c = dw_c - (m_c / M) sum_e dw_e.
    fn pull_back(&self, gw: &[f64], grad: &mut [f64]) {
        let d = self.dim;
        let mut total = vec![0.0; d];
        for c in 0..self.weights.len() {
            for t in 0..d {
                total[t] += gw[c * d + t];
            }
        }
        for (c, &m) in self.weights.iter().enumerate() {
            for t in 0..d {
                grad[c * d + t] = gw[c * d + t] - m / self.total_weight * total[t];
            }
        }
    }
}
