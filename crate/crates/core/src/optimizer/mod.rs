//! Numerical estimation of `B_n^2`: the smallest possible value of the largest
//! pair deficit over closed unit-perimeter polygons with `n` edges.
//!
//! [`estimate_bn2`] runs independent restarts of an annealed log-sum-exp
//! smoothing over centered free edge variables, followed by a short
//! subgradient polish on the exact objective. [`refine_with_support`] then
//! re-optimizes inside a fixed support structure (`k` distinct edges with
//! given multiplicities), finishing with a Newton solve of the KKT system.

mod lbfgs;
pub mod objective;
mod refine;
pub mod support;
pub mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polygons::{AnyPolygon, Polygon};

pub use objective::PairObjective;
pub use support::{detect_support, multiplicities, SupportCluster, DEFAULT_ANGLE_TOL, DEFAULT_LENGTH_TOL};
pub use sweep::{sweep, write_sweep_csv, SweepRow};

/// Ambient space of the polygons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Planar,
    Spatial,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Planar => 2,
            Space::Spatial => 3,
        }
    }

    /// Number of distinct edges in the conjectured extremal supports.
    pub fn support_size(self) -> usize {
        match self {
            Space::Planar => 3,
            Space::Spatial => 4,
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Planar => "planar",
            Space::Spatial => "spatial",
        })
    }
}

/// Annealing schedule shared by the full and the reduced problems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub beta: Vec<f64>,
    pub eps: Vec<f64>,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Schedule {
    /// Paired `(beta, eps)` stages; the shorter list repeats its last entry.
    pub fn stages(&self) -> Vec<(f64, f64)> {
        let len = self.beta.len().max(self.eps.len());
        (0..len).map(|k| (self.beta[k.min(self.beta.len() - 1)], self.eps[k.min(self.eps.len() - 1)])).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub n: usize,
    pub space: Space,
    pub restarts: usize,
    pub max_iters: usize,
    pub beta_schedule: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    pub grad_tol: f64,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(n: usize, space: Space) -> Self {
        OptimizerConfig {
            n,
            space,
            restarts: 32,
            max_iters: 5000,
            beta_schedule: (4..=14).map(|k| 2f64.powi(k)).collect(),
            eps_schedule: (3..=12).map(|k| 10f64.powi(-k)).collect(),
            grad_tol: 1e-10,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::invalid(format!("n must be ≥ 3, got {}", self.n)));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be positive"));
        }
        let increasing = |s: &[f64]| s.windows(2).all(|w| w[0] < w[1]);
        let decreasing = |s: &[f64]| s.windows(2).all(|w| w[0] > w[1]);
        if self.beta_schedule.is_empty() || !increasing(&self.beta_schedule) || self.beta_schedule[0] <= 0.0 {
            return Err(Error::invalid("beta schedule must be nonempty, positive and increasing"));
        }
        if self.eps_schedule.is_empty() || !decreasing(&self.eps_schedule) || self.eps_schedule.iter().any(|&e| e < 0.0)
        {
            return Err(Error::invalid("eps schedule must be nonempty, nonnegative and decreasing"));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            beta: self.beta_schedule.clone(),
            eps: self.eps_schedule.clone(),
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub index: usize,
    pub seed: u64,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementStatus {
    /// Reduced optimum is at least as good and was adopted.
    Improved,
    /// Reduced optimum was worse than the current estimate and was discarded.
    NotImproved,
    /// Some cluster collapsed, so the requested support cannot be realized.
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refinement {
    pub multiplicities: Vec<usize>,
    pub value: f64,
    pub status: RefinementStatus,
    pub kkt_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub n: usize,
    pub space: Space,
    /// Estimate of `B_n^2`: the certificate's largest pair deficit at unit perimeter.
    pub best_value: f64,
    pub n_times_value: f64,
    #[serde(serialize_with = "crate::io::serialize_polygon")]
    pub certificate: AnyPolygon,
    pub best_restart: usize,
    pub restarts: Vec<RestartOutcome>,
    pub support: Vec<SupportCluster>,
    pub trace_lengths: Vec<usize>,
    pub refinements: Vec<Refinement>,
}

impl OptimizationReport {
    pub fn restarts_converged(&self) -> usize {
        self.restarts.iter().filter(|r| r.converged).count()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        support::multiplicities(&self.support)
    }
}

/// Per-restart seed, a SplitMix64 step over `(seed, index)`.
pub fn derive_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform directions with lengths `|N(0, 1)| + 0.1`.
fn initial_edges(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut z = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let dir: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let g: f64 = StandardNormal.sample(rng);
        let len = g.abs() + 0.1;
        z.extend(dir.iter().map(|x| x * len / norm));
    }
    z
}

const COLLAPSE_FLOOR: f64 = 1e-8;
const POLISH_STEPS: usize = 400;

fn subgradient_polish(obj: &PairObjective, z0: Vec<f64>) -> (Vec<f64>, f64) {
    let mut best_value = obj.true_value(&z0);
    let mut best = z0.clone();
    let mut z = z0;
    let mut g = vec![0.0; z.len()];
    let step0 = 1e-4 * z.iter().map(|v| v * v).sum::<f64>().sqrt();
    for k in 0..POLISH_STEPS {
        obj.subgradient(&z, &mut g);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn.is_nan() || gn <= 0.0 {
            break;
        }
        let step = step0 / (1.0 + k as f64);
        z.iter_mut().zip(&g).for_each(|(x, gi)| *x -= step * gi / gn);
        let v = obj.true_value(&z);
        if v < best_value {
            best_value = v;
            best.copy_from_slice(&z);
        }
    }
    (best, best_value)
}

/// Unit-perimeter polygon from cluster vectors repeated by multiplicity.
pub(crate) fn expand_polygon(space: Space, w: &[f64], multiplicities: &[usize]) -> Result<AnyPolygon> {
    let d = space.dim();
    let mut edges: Vec<Vec<f64>> = Vec::new();
    for (c, &m) in multiplicities.iter().enumerate() {
        for _ in 0..m {
            edges.push(w[c * d..(c + 1) * d].to_vec());
        }
    }
    let poly = match space {
        Space::Planar => {
            let p = Polygon::<2>::center_and_close(edges.iter().map(|e| [e[0], e[1]]).collect())?;
            AnyPolygon::Planar(p.normalize_perimeter(1.0)?)
        }
        Space::Spatial => {
            let p = Polygon::<3>::center_and_close(edges.iter().map(|e| [e[0], e[1], e[2]]).collect())?;
            AnyPolygon::Spatial(p.normalize_perimeter(1.0)?)
        }
    };
    Ok(poly)
}

struct RestartRun {
    outcome: RestartOutcome,
    w: Vec<f64>,
}

fn run_restart(config: &OptimizerConfig, obj: &PairObjective, index: usize) -> RestartRun {
    let seed = derive_seed(config.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // burn one draw so that neighbouring seeds decorrelate in the first edge
    let _: u64 = rng.gen();
    let z0 = initial_edges(config.n, config.space.dim(), &mut rng);
    let (z, iterations, converged) = refine::smooth(obj, z0, &config.schedule(), Some(COLLAPSE_FLOOR));
    let (z, value) = subgradient_polish(obj, z);
    let w = refine::normalize(obj, &z);
    RestartRun { outcome: RestartOutcome { index, seed, value, converged, iterations }, w }
}

/// Multistart estimate of `B_n^2` for the given configuration.
pub fn estimate_bn2(config: &OptimizerConfig) -> Result<OptimizationReport> {
    config.validate()?;
    let obj = PairObjective::full(config.n, config.space.dim());
    let runs: Vec<RestartRun> = (0..config.restarts).into_par_iter().map(|k| run_restart(config, &obj, k)).collect();
    let best = runs
        .iter()
        .min_by(|a, b| a.outcome.value.total_cmp(&b.outcome.value).then(a.outcome.index.cmp(&b.outcome.index)))
        .expect("at least one restart");
    let certificate = expand_polygon(config.space, &best.w, &vec![1; config.n])?;
    let best_value = certificate.max_pair_deficit().0;
    let support = detect_support(&certificate, DEFAULT_ANGLE_TOL, DEFAULT_LENGTH_TOL);
    Ok(OptimizationReport {
        n: config.n,
        space: config.space,
        best_value,
        n_times_value: config.n as f64 * best_value,
        certificate,
        best_restart: best.outcome.index,
        trace_lengths: runs.iter().map(|r| r.outcome.iterations).collect(),
        restarts: runs.into_iter().map(|r| r.outcome).collect(),
        support,
        refinements: Vec::new(),
    })
}

/// Result of optimizing inside a fixed support.
#[derive(Clone, Debug)]
pub struct SupportFit {
    pub multiplicities: Vec<usize>,
    /// Cluster edge vectors at unit perimeter.
    pub cluster_edges: Vec<Vec<f64>>,
    pub value: f64,
    pub polygon: AnyPolygon,
    pub kkt_residual: Option<f64>,
    pub collapsed: bool,
    pub iterations: usize,
    pub converged: bool,
}

fn check_multiplicities(space: Space, n: usize, multiplicities: &[usize]) -> Result<()> {
    if multiplicities.len() != space.support_size() {
        return Err(Error::invalid(format!(
            "{space} supports have {} distinct edges, got {} multiplicities",
            space.support_size(),
            multiplicities.len()
        )));
    }
    if multiplicities.contains(&0) || multiplicities.iter().sum::<usize>() != n {
        return Err(Error::invalid(format!("multiplicities {multiplicities:?} must be positive and sum to {n}")));
    }
    Ok(())
}

/// Optimizes `k` cluster vectors with the given multiplicities from the
/// starting vectors `init` (one per cluster).
pub fn fit_support(
    space: Space,
    multiplicities: &[usize],
    init: &[Vec<f64>],
    schedule: &Schedule,
) -> Result<SupportFit> {
    let n: usize = multiplicities.iter().sum();
    check_multiplicities(space, n, multiplicities)?;
    let d = space.dim();
    if init.len() != multiplicities.len() || init.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("one starting vector of the space's dimension is needed per cluster"));
    }
    let obj = PairObjective::clustered(multiplicities, d);
    let z0: Vec<f64> = init.iter().flatten().copied().collect();
    let fit = refine::fit_clusters(&obj, z0, schedule);
    let polygon = expand_polygon(space, &fit.w, multiplicities)?;
    let value = polygon.max_pair_deficit().0;
    Ok(SupportFit {
        multiplicities: multiplicities.to_vec(),
        cluster_edges: fit.w.chunks(d).map(|c| c.to_vec()).collect(),
        value,
        polygon,
        kkt_residual: fit.kkt_residual,
        collapsed: fit.collapsed,
        iterations: fit.iterations,
        converged: fit.converged,
    })
}

/// Starting cluster vectors for a support refinement. Uses the report's own
/// clusters when they match `multiplicities`, otherwise a symmetric
/// configuration (regular triangle or tetrahedron).
fn support_start(report: &OptimizationReport, multiplicities: &[usize]) -> Vec<Vec<f64>> {
    let detected = report.multiplicities();
    let mut sorted = multiplicities.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = report.n as f64;
    if detected == sorted && report.support.iter().all(|c| c.length > 0.0) {
        let mut used = vec![false; report.support.len()];
        return multiplicities
            .iter()
            .map(|&m| {
                let k = (0..report.support.len())
                    .find(|&k| !used[k] && report.support[k].multiplicity == m)
                    .expect("matching cluster");
                used[k] = true;
                let c = &report.support[k];
                c.direction.iter().map(|x| x * c.length).collect()
            })
            .collect();
    }
    match report.space {
        Space::Planar => (0..3)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 3.0;
                vec![a.cos() / n, a.sin() / n]
            })
            .collect(),
        Space::Spatial => crate::constructions::TETRAHEDRON.iter().map(|d| d.iter().map(|x| x / n).collect()).collect(),
    }
}

/// Re-optimizes inside the support structure `multiplicities`, adopting the
/// result when it does not worsen the estimate by more than `1e-12`.
pub fn refine_with_support(
    report: &OptimizationReport,
    multiplicities: &[usize],
    schedule: &Schedule,
) -> Result<OptimizationReport> {
    check_multiplicities(report.space, report.n, multiplicities)?;
    let init = support_start(report, multiplicities);
    let fit = fit_support(report.space, multiplicities, &init, schedule)?;
    let mut out = report.clone();
    let status = if fit.collapsed {
        RefinementStatus::Infeasible
    } else if fit.value <= report.best_value + 1e-12 {
        RefinementStatus::Improved
    } else {
        RefinementStatus::NotImproved
    };
    if status == RefinementStatus::Improved {
        out.best_value = fit.value;
        out.n_times_value = report.n as f64 * fit.value;
        out.certificate = fit.polygon;
        out.support = detect_support(&out.certificate, DEFAULT_ANGLE_TOL, DEFAULT_LENGTH_TOL);
    }
    out.refinements.push(Refinement {
        multiplicities: multiplicities.to_vec(),
        value: fit.value,
        status,
        kkt_residual: fit.kkt_residual,
    });
    Ok(out)
}

/// Parts of `n` into `k` near-equal pieces, nonincreasing.
pub fn balanced_partition(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}
