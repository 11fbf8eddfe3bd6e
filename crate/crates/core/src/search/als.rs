use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::decomposition::{Decomposition, ProductState, Term};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{FloatTensor, Tensor};

/// Alternating least squares settings. All artifact choices, not derived values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlsConfig {
    pub max_sweeps: usize,
    /// Stop when the relative residual change over one sweep drops below this.
    pub tolerance: f64,
    /// Stop when the residual drops below this.
    pub residual_target: f64,
    /// Added to the Gram diagonal of every least-squares step.
    pub regularization: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Factor norm (after rebalancing) beyond which a converged fit is suspect.
    pub blowup_threshold: f64,
    /// An unconverged fit whose two terms have normalized inner product at or
    /// below `-degeneracy_congruence` is flagged as diverging toward a border
    /// decomposition.
    pub degeneracy_congruence: f64,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            max_sweeps: 2000,
            tolerance: 1e-12,
            residual_target: 1e-10,
            regularization: 1e-12,
            restarts: 8,
            seed: 0,
            blowup_threshold: 1e6,
            degeneracy_congruence: 0.9,
        }
    }
}

impl AlsConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerance", self.tolerance),
            ("residual_target", self.residual_target),
            ("regularization", self.regularization),
            ("blowup_threshold", self.blowup_threshold),
            ("degeneracy_congruence", self.degeneracy_congruence),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::input(name, "must be positive and finite"));
            }
        }
        if self.degeneracy_congruence > 1.0 {
            return Err(Error::input("degeneracy_congruence", "must not exceed 1"));
        }
        if self.restarts == 0 {
            return Err(Error::input("restarts", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ReachedTarget,
    Converged,
    SweepBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlsResult {
    pub rank: usize,
    /// Best fit; `None` only when every term vanished.
    #[serde(serialize_with = "decomposition_value")]
    pub decomposition: Option<Decomposition<Complex64>>,
    pub residual: f64,
    /// Residual at initialization and after each sweep of the best restart.
    pub trajectory: Vec<f64>,
    pub max_factor_norm: f64,
    /// Smallest normalized inner product between two rank-one terms.
    pub min_term_congruence: Option<f64>,
    pub stop: StopReason,
    pub sweeps: usize,
    pub best_restart: usize,
    pub border_rank_suspicion: bool,
}

fn decomposition_value<S: Serializer>(
    d: &Option<Decomposition<Complex64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => crate::json::decomposition_to_value(d).serialize(s),
        None => s.serialize_none(),
    }
}

/// One line of the rank probe table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub r: usize,
    pub residual: f64,
    pub suspicion: bool,
    pub restart: usize,
}

/// Column-major factor matrices: `data[p][i * rank + k]` is entry `i` of the
/// party-`p` vector of term `k`.
#[derive(Clone, Debug)]
struct Factors {
    rank: usize,
    dims: [usize; 3],
    data: [Vec<Complex64>; 3],
}

impl Factors {
    fn random(dims: [usize; 3], rank: usize, rng: &mut ChaCha8Rng) -> Self {
        let data = dims.map(|d| {
            (0..d * rank)
                .map(|_| Complex64::new(StandardNormal.sample(rng), 0.0))
                .collect()
        });
        Factors { rank, dims, data }
    }

    fn from_decomposition(d: &Decomposition<Complex64>) -> Self {
        let rank = d.len();
        let dims = d.shape();
        let mut data = dims.map(|dim| vec![Complex64::new(0.0, 0.0); dim * rank]);
        for (k, t) in d.terms().iter().enumerate() {
            for p in 0..3 {
                for (i, v) in t.state.factors()[p].iter().enumerate() {
                    data[p][i * rank + k] = if p == 0 { t.weight * v } else { *v };
                }
            }
        }
        Factors { rank, dims, data }
    }

    fn column_norm(&self, p: usize, k: usize) -> f64 {
        (0..self.dims[p])
            .map(|i| self.data[p][i * self.rank + k].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Equalizes the three vector norms of every term without changing the model.
    fn rebalance(&mut self) {
        for k in 0..self.rank {
            let norms = [0, 1, 2].map(|p| self.column_norm(p, k));
            if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
                continue;
            }
            let geo = (norms[0] * norms[1] * norms[2]).cbrt();
            for p in 0..3 {
                let s = geo / norms[p];
                for i in 0..self.dims[p] {
                    self.data[p][i * self.rank + k] *= s;
                }
            }
        }
    }

    fn model(&self) -> Vec<Complex64> {
        let [da, db, dc] = self.dims;
        let r = self.rank;
        let mut out = vec![Complex64::new(0.0, 0.0); da * db * dc];
        for a in 0..da {
            for b in 0..db {
                let ab: Vec<Complex64> = (0..r)
                    .map(|k| self.data[0][a * r + k] * self.data[1][b * r + k])
                    .collect();
                for c in 0..dc {
                    out[(a * db + b) * dc + c] =
                        (0..r).map(|k| ab[k] * self.data[2][c * r + k]).sum();
                }
            }
        }
        out
    }

    fn residual(&self, target: &FloatTensor) -> f64 {
        self.model()
            .iter()
            .zip(target.entries())
            .map(|(m, t)| (m - t).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `G[k,l] = Π_{q≠p} Σ_i X_q[i,k]·conj(X_q[i,l])`.
    fn gram(&self, p: usize) -> DMatrix<Complex64> {
        let r = self.rank;
        let mut g = DMatrix::from_element(r, r, Complex64::new(1.0, 0.0));
        for q in others(p) {
            for k in 0..r {
                for l in 0..r {
                    let s: Complex64 = (0..self.dims[q])
                        .map(|i| self.data[q][i * r + k] * self.data[q][i * r + l].conj())
                        .sum();
                    g[(k, l)] *= s;
                }
            }
        }
        g
    }

    /// `M[i,l] = Σ t[..i..] · Π_{q≠p} conj(X_q[i_q, l])` over the nonzero entries.
    fn mttkrp(&self, p: usize, nonzero: &[([usize; 3], Complex64)]) -> DMatrix<Complex64> {
        let r = self.rank;
        let [q1, q2] = others(p);
        let mut m = DMatrix::from_element(self.dims[p], r, Complex64::new(0.0, 0.0));
        for (idx, v) in nonzero {
            for l in 0..r {
                m[(idx[p], l)] += v
                    * self.data[q1][idx[q1] * r + l].conj()
                    * self.data[q2][idx[q2] * r + l].conj();
            }
        }
        m
    }

    /// Regularized least-squares update of party `p` through the normal
    /// equations `X_p·(G + eps·I) = M`. Returns false when the solve fails.
    fn update(&mut self, p: usize, nonzero: &[([usize; 3], Complex64)], eps: f64) -> bool {
        let r = self.rank;
        let mut g = self.gram(p);
        for k in 0..r {
            g[(k, k)] += Complex64::new(eps, 0.0);
        }
        let m = self.mttkrp(p, nonzero);
        // X_p·G = M  ⇔  Gᵀ·X_pᵀ = Mᵀ
        let Some(sol) = g.transpose().lu().solve(&m.transpose()) else {
            return false;
        };
        if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return false;
        }
        for i in 0..self.dims[p] {
            for k in 0..r {
                self.data[p][i * r + k] = sol[(k, i)];
            }
        }
        true
    }

    fn max_norm(&self) -> f64 {
        (0..3)
            .flat_map(|p| (0..self.rank).map(move |k| (p, k)))
            .map(|(p, k)| self.column_norm(p, k))
            .fold(0.0, f64::max)
    }

    /// Minimum over term pairs of `Re ⟨t_k, t_l⟩ / (‖t_k‖‖t_l‖)`.
    fn min_congruence(&self) -> Option<f64> {
        let r = self.rank;
        let mut best: Option<f64> = None;
        for k in 0..r {
            for l in k + 1..r {
                let mut prod = Complex64::new(1.0, 0.0);
                let mut degenerate = false;
                for p in 0..3 {
                    let (nk, nl) = (self.column_norm(p, k), self.column_norm(p, l));
                    if nk == 0.0 || nl == 0.0 {
                        degenerate = true;
                        break;
                    }
                    let ip: Complex64 = (0..self.dims[p])
                        .map(|i| self.data[p][i * r + k].conj() * self.data[p][i * r + l])
                        .sum();
                    prod *= ip / (nk * nl);
                }
                if !degenerate {
                    best = Some(best.map_or(prod.re, |b: f64| b.min(prod.re)));
                }
            }
        }
        best
    }

    fn into_decomposition(self) -> Option<Decomposition<Complex64>> {
        let r = self.rank;
        let terms: Vec<Term<Complex64>> = (0..r)
            .filter_map(|k| {
                let factors =
                    [0, 1, 2].map(|p| (0..self.dims[p]).map(|i| self.data[p][i * r + k]).collect());
                ProductState::new(factors).ok().map(|state| Term {
                    weight: Complex64::new(1.0, 0.0),
                    state,
                })
            })
            .collect();
        Decomposition::new(self.dims, terms).ok()
    }
}

fn others(p: usize) -> [usize; 2] {
    match p {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

struct Run {
    factors: Factors,
    residual: f64,
    trajectory: Vec<f64>,
    stop: StopReason,
    sweeps: usize,
}

fn run(target: &FloatTensor, mut f: Factors, cfg: &AlsConfig) -> Run {
    let nonzero: Vec<([usize; 3], Complex64)> = target.nonzero().map(|(i, v)| (i, *v)).collect();
    f.rebalance();
    let mut res = f.residual(target);
    let mut trajectory = vec![res];
    let mut stop = StopReason::SweepBudget;
    let mut sweeps = 0;
    if res < cfg.residual_target {
        stop = StopReason::ReachedTarget;
    } else {
        while sweeps < cfg.max_sweeps {
            let before = res;
            for p in 0..3 {
                let saved = f.data[p].clone();
                if f.update(p, &nonzero, cfg.regularization) {
                    let r = f.residual(target);
                    // The regularized step may overshoot; keep the residual monotone.
                    if r <= res {
                        res = r;
                        continue;
                    }
                }
                f.data[p] = saved;
            }
            f.rebalance();
            res = f.residual(target);
            trajectory.push(res);
            sweeps += 1;
            if res < cfg.residual_target {
                stop = StopReason::ReachedTarget;
                break;
            }
            if (before - res).abs() <= cfg.tolerance * before {
                stop = StopReason::Converged;
                break;
            }
        }
    }
    Run {
        factors: f,
        residual: res,
        trajectory,
        stop,
        sweeps,
    }
}

fn finish(run: Run, best_restart: usize, cfg: &AlsConfig) -> AlsResult {
    let max_factor_norm = run.factors.max_norm();
    let min_term_congruence = run.factors.min_congruence();
    let converged_but_blown_up =
        run.residual < cfg.residual_target && max_factor_norm > cfg.blowup_threshold;
    let still_cancelling = run.stop == StopReason::SweepBudget
        && run.residual >= cfg.residual_target
        && min_term_congruence.is_some_and(|c| c <= -cfg.degeneracy_congruence);
    AlsResult {
        rank: run.factors.rank,
        decomposition: run.factors.into_decomposition(),
        residual: run.residual,
        trajectory: run.trajectory,
        max_factor_norm,
        min_term_congruence,
        stop: run.stop,
        sweeps: run.sweeps,
        best_restart,
        border_rank_suspicion: converged_but_blown_up || still_cancelling,
    }
}

/// Rank-`r` CP fit by alternating least squares over `cfg.restarts` seeded
/// random starts. Restart `i` draws its initial factors from a ChaCha stream
/// keyed by `(cfg.seed, i)`; the best final residual wins, lowest index on ties.
pub fn als_search<S: Scalar>(t: &Tensor<S>, r: usize, cfg: &AlsConfig) -> Result<AlsResult> {
    cfg.validate()?;
    if r == 0 {
        return Err(Error::input("rank", "must be at least 1"));
    }
    let target = t.to_float();
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            run(&target, Factors::random(target.shape(), r, &mut rng), cfg)
        })
        .collect();
    let (best, run) = runs
        .into_iter()
        .enumerate()
        .reduce(|acc, cur| if cur.1.residual < acc.1.residual { cur } else { acc })
        .expect("at least one restart");
    Ok(finish(run, best, cfg))
}

/// ALS started from a given decomposition instead of random factors.
pub fn warm_start_search<S: Scalar, D: Scalar>(
    t: &Tensor<S>,
    d0: &Decomposition<D>,
    cfg: &AlsConfig,
) -> Result<AlsResult> {
    cfg.validate()?;
    if d0.shape() != t.shape() {
        return Err(Error::input(
            "decomposition.shape",
            format!("{:?} does not match target {:?}", d0.shape(), t.shape()),
        ));
    }
    let target = t.to_float();
    let f = Factors::from_decomposition(&d0.to_float());
    Ok(finish(run(&target, f, cfg), 0, cfg))
}

/// Best residual and suspicion flag for every rank `1..=r_max`.
///
/// Exploratory only: a small residual is not a rank certificate, and the
/// flag marks fits that look like limits of diverging decompositions.
pub fn numeric_rank_probe<S: Scalar>(
    t: &Tensor<S>,
    r_max: usize,
    cfg: &AlsConfig,
) -> Result<Vec<ProbeRow>> {
    if r_max == 0 {
        return Err(Error::input("max_rank", "must be at least 1"));
    }
    (1..=r_max)
        .map(|r| {
            let res = als_search(t, r, cfg)?;
            Ok(ProbeRow {
                r,
                residual: res.residual,
                suspicion: res.border_rank_suspicion,
                restart: res.best_restart,
            })
        })
        .collect()
}
