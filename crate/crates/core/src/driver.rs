//! Outer-iteration orchestration for every supported method.
//!
//! One outer iteration on `P` nodes:
//!
//! 1. each node forms its block gradient `g_B = X_B^T b` from the replicated
//!    `y`, selects `S_p` (random-cyclic or greedy) and computes a direction
//!    over `S_p` (decoupled quadratic step or proximal-Jacobi inner solve);
//! 2. `dy = sum_p X_{B_p} d_{B_p}` is formed with one AllReduce;
//! 3. line-search methods backtrack on `F(w + alpha d)`, evaluating the loss
//!    locally from `y + alpha dy` and combining per-node l1 sums with a scalar
//!    AllReduce per trial; fixed-step methods take `alpha = 1`;
//! 4. `w += alpha d`, `y += alpha dy`.
//!
//! The smooth part of the predicted decrease needs no extra communication:
//! `g^T d = b^T X d = b^T dy`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::cluster::{Cluster, ClusterConfig, CostLedger};
use crate::data::{partition_features, Dataset, Partition};
use crate::error::{Error, Result};
use crate::metrics::{cost_estimate, rfvd, CostParams, IterationRecord};
use crate::model::{
    gradient_block, hessian_diag_block, kkt_violation, mean_loss, mean_loss_along,
    scaled_curvatures, scaled_derivs, ModelState,
};
use crate::scalar::Scalar;
use crate::subprob::{
    decoupled_step, greedy_scores, select_s, sequential_cdn, solve_prox_jacobi, InnerParams,
    InnerResult, Scheme, SelectionState, MAX_LS_TRIALS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hydra,
    PcdR,
    PcdS,
    DbcdR,
    DbcdS,
    Grock,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Hydra,
        Method::PcdR,
        Method::PcdS,
        Method::DbcdR,
        Method::DbcdS,
        Method::Grock,
    ];

    pub fn scheme(self) -> Scheme {
        match self {
            Method::Hydra | Method::PcdR | Method::DbcdR => Scheme::R,
            Method::PcdS | Method::DbcdS | Method::Grock => Scheme::S,
        }
    }

    /// Armijo line search (`true`) or fixed unit step.
    pub fn uses_line_search(self) -> bool {
        !matches!(self, Method::Hydra | Method::Grock)
    }

    pub fn uses_prox_jacobi(self) -> bool {
        matches!(self, Method::DbcdR | Method::DbcdS)
    }

    fn needs_hessian_diag(self) -> bool {
        matches!(self, Method::PcdR | Method::PcdS | Method::DbcdS)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Hydra => "hydra",
            Method::PcdR => "pcd-r",
            Method::PcdS => "pcd-s",
            Method::DbcdR => "dbcd-r",
            Method::DbcdS => "dbcd-s",
            Method::Grock => "grock",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// How the proximal-Jacobi inner solve terminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerStop {
    /// Exactly `k` cycles.
    #[default]
    FixedCycles,
    /// Up to `k` cycles, stopping early once `|delta_j| <= (mu/2) |d_j|` on the working set.
    EpsMuOverTwo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig<T> {
    pub method: Method,
    pub lambda: T,
    pub nodes: usize,
    /// Working set fraction `r`; `WSS = ceil(r m / P)`.
    pub wss_frac: f64,
    pub mu: T,
    pub nu: T,
    pub k: usize,
    pub beta_ls: T,
    pub sigma: T,
    pub max_outer: usize,
    pub kkt_tol: T,
    pub seed: u64,
    pub inner_stop: InnerStop,
    /// Communication-to-computation cost ratio for the ledger.
    pub beta_comm: f64,
    pub threads: usize,
    /// ESO multiplier on HYDRA's Lipschitz bounds.
    pub hydra_omega: T,
    /// Exact `y = Xw` refresh period, in outer iterations.
    pub refresh_every: usize,
    pub f_star: Option<T>,
    pub rfvd_stop: Option<T>,
    /// Abort fixed-step runs once `F > explosion_factor * F(w^0)`.
    pub explosion_factor: T,
}

impl<T: Scalar> MethodConfig<T> {
    pub fn new(method: Method, lambda: T, nodes: usize) -> Self {
        MethodConfig {
            method,
            lambda,
            nodes,
            wss_frac: 0.1,
            mu: T::of(1e-12),
            nu: T::of(1e-12),
            k: 10,
            beta_ls: T::half(),
            sigma: T::of(0.01),
            max_outer: 800,
            kkt_tol: T::of(1e-6),
            seed: 0,
            inner_stop: InnerStop::FixedCycles,
            beta_comm: 1.0,
            threads: 1,
            hydra_omega: T::of(2.0),
            refresh_every: 50,
            f_star: None,
            rfvd_stop: None,
            explosion_factor: T::of(1e6),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda > T::zero()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if self.nodes == 0 || self.nodes > m {
            return bad(format!(
                "need 1 <= P <= m, got P = {} with m = {m}",
                self.nodes
            ));
        }
        if !(self.wss_frac > 0.0 && self.wss_frac <= 1.0) {
            return bad(format!(
                "wss fraction must lie in (0, 1], got {}",
                self.wss_frac
            ));
        }
        if !(self.beta_ls > T::zero() && self.beta_ls < T::one()) {
            return bad(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.beta_ls
            ));
        }
        if !(self.sigma > T::zero() && self.sigma < T::one()) {
            return bad(format!(
                "sufficient decrease constant must lie in (0, 1), got {}",
                self.sigma
            ));
        }
        if !(self.mu >= T::zero()) {
            return bad(format!("mu must be >= 0, got {}", self.mu));
        }
        if !(self.nu > T::zero()) {
            return bad(format!("nu must be > 0, got {}", self.nu));
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if !(self.beta_comm >= 0.0) {
            return bad(format!(
                "communication ratio must be >= 0, got {}",
                self.beta_comm
            ));
        }
        if !(self.hydra_omega > T::zero()) {
            return bad(format!(
                "ESO multiplier must be > 0, got {}",
                self.hydra_omega
            ));
        }
        if let Some(fs) = self.f_star {
            if !(fs > T::zero()) {
                return bad(format!("reference objective must be > 0, got {fs}"));
            }
        }
        if self.rfvd_stop.is_some() && self.f_star.is_none() {
            return bad("RFVD stopping needs a reference objective".into());
        }
        Ok(())
    }

    /// Working set size per node.
    pub fn wss(&self, m: usize) -> usize {
        ((self.wss_frac * m as f64 / self.nodes as f64).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStop {
    /// Max-norm KKT violation reached the tolerance.
    Converged,
    /// RFVD reached the requested level.
    RfvdTarget,
    MaxOuter,
    /// Fixed-step run exceeded the explosion guard.
    Diverged,
}

impl fmt::Display for RunStop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStop::Converged => "converged",
            RunStop::RfvdTarget => "rfvd-target",
            RunStop::MaxOuter => "max-outer",
            RunStop::Diverged => "diverged",
        })
    }
}

pub struct Trajectory<T> {
    pub records: Vec<IterationRecord>,
    pub state: ModelState<T>,
    pub stop: RunStop,
    pub partition: Partition,
    pub ledger: CostLedger,
}

impl<T: Scalar> Trajectory<T> {
    /// Outer iterations until `rfvd <= level`, if reached.
    pub fn iterations_to_rfvd(&self, level: f64) -> Option<usize> {
        self.records.iter().find(|r| r.rfvd <= level).map(|r| r.t)
    }

    pub fn final_kkt(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.kkt)
    }
}

/// What happened in one accepted outer step, for observers.
#[derive(Debug, Clone)]
pub struct StepDiagnostics<T> {
    /// Index of the iterate the step started from.
    pub t: usize,
    pub f_before: T,
    pub f_after: T,
    pub alpha: T,
    /// Predicted decrease; `None` for fixed-step methods.
    pub delta: Option<T>,
    pub tau_ls: usize,
    /// Selected features over all nodes, ascending within each node.
    pub support: Vec<usize>,
    pub d: Vec<T>,
    /// Gradient at `w^t` on the support.
    pub g: Vec<T>,
    /// `w^t` on the support.
    pub w_before: Vec<T>,
}

impl<T: Scalar> StepDiagnostics<T> {
    pub fn direction_is_zero(&self) -> bool {
        self.d.iter().all(|v| *v == T::zero())
    }
}

/// `Delta = g^T d + u(w + d) - u(w)` with `u = lambda ||.||_1`; slices aligned.
pub fn compute_delta_t<T: Scalar>(g: &[T], d: &[T], w: &[T], lambda: T) -> T {
    g.iter()
        .zip(d)
        .zip(w)
        .map(|((&gj, &dj), &wj)| gj * dj + lambda * ((wj + dj).abs() - wj.abs()))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome<T> {
    pub alpha: T,
    /// Step sizes tried, including the accepted one.
    pub trials: usize,
    pub f_new: T,
    pub loss_new: T,
    pub l1_new: T,
}

/// Armijo backtracking over `alpha = beta^k`, `k = 0, 1, ...`: returns the
/// first `alpha` with `F(w + alpha d) <= F(w) + alpha sigma Delta`.
///
/// The loss part of `F(w + alpha d)` is evaluated from `y + alpha dy`;
/// `l1_at(alpha)` supplies the regularizer value (the driver backs it with a
/// scalar AllReduce).
#[allow(clippy::too_many_arguments)]
pub fn line_search<T, L>(
    dataset: &Dataset<T>,
    y: &[T],
    dy: &[T],
    f0: T,
    delta: T,
    beta: T,
    sigma: T,
    mut l1_at: L,
) -> Result<LineSearchOutcome<T>>
where
    T: Scalar,
    L: FnMut(T) -> Result<T>,
{
    let mut alpha = T::one();
    for trial in 1..=MAX_LS_TRIALS + 1 {
        let loss = mean_loss_along(dataset.loss, y, dy, alpha, &dataset.labels);
        let l1 = l1_at(alpha)?;
        let f = loss + l1;
        if f <= f0 + alpha * sigma * delta {
            return Ok(LineSearchOutcome {
                alpha,
                trials: trial,
                f_new: f,
                loss_new: loss,
                l1_new: l1,
            });
        }
        alpha *= beta;
    }
    Err(Error::LineSearch {
        trials: MAX_LS_TRIALS + 1,
    })
}

struct Node {
    selection: SelectionState,
}

/// Read-only context shared by all node tasks of one iteration.
struct StepContext<'a, T> {
    dataset: &'a Dataset<T>,
    config: &'a MethodConfig<T>,
    w: &'a [T],
    y: &'a [T],
    b: &'a [T],
    curv: &'a [T],
    wss: usize,
}

struct NodeOutput<T> {
    kkt: T,
    inner: InnerResult<T>,
    g_support: Vec<T>,
    dy: Vec<T>,
    support_nnz: usize,
}

impl Node {
    fn step<T: Scalar>(&mut self, ctx: &StepContext<'_, T>) -> NodeOutput<T> {
        let ds = ctx.dataset;
        let cfg = ctx.config;
        let lambda = cfg.lambda;
        let block = self.selection.block().to_vec();
        let g_block = gradient_block(ds, &block, ctx.b);
        let kkt = block
            .iter()
            .zip(&g_block)
            .map(|(&j, &g)| kkt_violation(ctx.w[j], g, lambda))
            .fold(T::zero(), T::max);
        let w_block: Vec<T> = block.iter().map(|&j| ctx.w[j]).collect();
        let h_block = if cfg.method.needs_hessian_diag() {
            hessian_diag_block(ds, &block, ctx.curv)
        } else {
            Vec::new()
        };
        let inv_n = T::one() / T::of_usize(ds.n().max(1));
        let lipschitz = |j: usize, omega: T| {
            (ds.loss.deriv_lipschitz::<T>() * inv_n * ds.matrix.col_sq_norm()[j] * omega)
                .max(cfg.nu)
        };

        let support = match cfg.method {
            Method::Hydra | Method::PcdR | Method::DbcdR => self.selection.select_r(),
            Method::PcdS | Method::DbcdS => select_s(
                &greedy_scores(&block, &w_block, &g_block, &h_block, cfg.nu, lambda),
                ctx.wss,
            ),
            Method::Grock => {
                let coeff: Vec<T> = block.iter().map(|&j| lipschitz(j, T::one())).collect();
                select_s(
                    &greedy_scores(&block, &w_block, &g_block, &coeff, T::zero(), lambda),
                    ctx.wss,
                )
            }
        };

        // position of each block feature, for pulling aligned values
        let pos = |j: usize| {
            block
                .iter()
                .position(|&b| b == j)
                .expect("support within block")
        };
        let positions: Vec<usize> = support.iter().map(|&j| pos(j)).collect();
        let g_support: Vec<T> = positions.iter().map(|&k| g_block[k]).collect();
        let w_support: Vec<T> = positions.iter().map(|&k| w_block[k]).collect();

        let inner = match cfg.method {
            Method::DbcdR | Method::DbcdS => {
                let params = InnerParams {
                    lambda,
                    mu: cfg.mu,
                    cycles: cfg.k,
                    eps: match cfg.inner_stop {
                        InnerStop::FixedCycles => None,
                        InnerStop::EpsMuOverTwo => Some(cfg.mu * T::half()),
                    },
                    beta_ls: cfg.beta_ls,
                    sigma: cfg.sigma,
                    track_objective: false,
                };
                solve_prox_jacobi(ds, &support, ctx.w, ctx.y, &params)
            }
            Method::Hydra | Method::Grock => {
                let omega = if cfg.method == Method::Hydra {
                    cfg.hydra_omega
                } else {
                    T::one()
                };
                let coeff: Vec<T> = support.iter().map(|&j| lipschitz(j, omega)).collect();
                decoupled_step(&support, &g_support, &w_support, &coeff, lambda)
                    .expect("Lipschitz bounds are floored at nu > 0")
            }
            Method::PcdR | Method::PcdS => {
                let coeff: Vec<T> = positions.iter().map(|&k| h_block[k] + cfg.nu).collect();
                decoupled_step(&support, &g_support, &w_support, &coeff, lambda)
                    .expect("nu > 0 keeps curvature positive")
            }
        };

        let mut dy = vec![T::zero(); ds.n()];
        for (&j, &dj) in inner.support.iter().zip(&inner.d) {
            if dj != T::zero() {
                ds.matrix.axpy_column(j, dj, &mut dy);
            }
        }
        let support_nnz = inner.support.iter().map(|&j| ds.matrix.col_nnz()[j]).sum();
        NodeOutput {
            kkt,
            inner,
            g_support,
            dy,
            support_nnz,
        }
    }
}

/// Per-node l1 partial sums `lambda sum_{j in B_p} |w_j + alpha d_j|`.
fn l1_partials<T: Scalar>(blocks: &[Vec<usize>], w: &[T], d: &[T], alpha: T, lambda: T) -> Vec<T> {
    blocks
        .iter()
        .map(|block| {
            lambda
                * block
                    .iter()
                    .map(|&j| (w[j] + alpha * d[j]).abs())
                    .sum::<T>()
        })
        .collect()
}

/// Runs `config.method` from `w = 0` on the given dataset.
pub fn run_method<T: Scalar>(
    config: &MethodConfig<T>,
    dataset: &Dataset<T>,
) -> Result<Trajectory<T>> {
    run_method_observed(config, dataset, |_, _| {})
}

/// Like [`run_method`], calling `observer` after every accepted step with the
/// step's diagnostics and the updated state.
pub fn run_method_observed<T, O>(
    config: &MethodConfig<T>,
    dataset: &Dataset<T>,
    mut observer: O,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    O: FnMut(&StepDiagnostics<T>, &ModelState<T>),
{
    let m = dataset.m();
    let n = dataset.n();
    config.validate(m)?;
    let partition = partition_features(m, config.nodes, config.seed)?;
    let mut cluster = Cluster::new(ClusterConfig::new(
        config.nodes,
        config.beta_comm,
        config.threads,
    )?)?;
    let wss = config.wss(m);
    let lambda = config.lambda;
    let method = config.method;

    let mut nodes: Vec<Node> = partition
        .blocks
        .iter()
        .enumerate()
        .map(|(p, block)| Node {
            selection: SelectionState::new(method.scheme(), block.clone(), wss, p, config.seed),
        })
        .collect();

    let mut state = ModelState::zeros(dataset, lambda);
    let mut loss_cur = mean_loss(dataset.loss, &state.y, &dataset.labels);
    let mut l1_cur = lambda * state.w.iter().map(|v| v.abs()).sum::<T>();
    state.f_value = loss_cur + l1_cur;
    let f_initial = state.f_value;

    let nz = dataset.matrix.nz() as f64;
    let mut records = Vec::new();
    // stats of the step that produced the current iterate
    let mut pending = (0.0f64, 0usize, 0.0f64, 0.0f64, 0usize, 0.0f64);
    let mut diverged = false;
    let stop;

    let mut t = 0usize;
    loop {
        let iter_start = Instant::now();
        if t > 0 && config.refresh_every > 0 && t.is_multiple_of(config.refresh_every) {
            state.y = dataset.matrix.mul_vec(&state.w);
            loss_cur = mean_loss(dataset.loss, &state.y, &dataset.labels);
            state.f_value = loss_cur + l1_cur;
        }

        let b = scaled_derivs(dataset.loss, &state.y, &dataset.labels);
        let curv = if method.needs_hessian_diag() {
            scaled_curvatures(dataset.loss, &state.y, &dataset.labels)
        } else {
            Vec::new()
        };
        let outputs = {
            let ctx = StepContext {
                dataset,
                config,
                w: &state.w,
                y: &state.y,
                b: &b,
                curv: &curv,
                wss,
            };
            let ctx = &ctx;
            let tasks: Vec<_> = nodes
                .iter_mut()
                .map(|node| move || node.step(ctx))
                .collect();
            cluster.barrier_run(tasks)?
        };

        let kkt = outputs.iter().map(|o| o.kkt).fold(T::zero(), T::max);
        let rfvd_now = match config.f_star {
            Some(fs) => rfvd(state.f_value, fs)?.as_f64(),
            None => f64::NAN,
        };
        let (alpha_prev, s_prev, comp_prev, comm_prev, tau_prev, wall_prev) = pending;
        records.push(IterationRecord {
            t,
            f: state.f_value.as_f64(),
            rfvd: rfvd_now,
            kkt: kkt.as_f64(),
            alpha: alpha_prev,
            s_size: s_prev,
            nnz_pct: 100.0 * state.nnz() as f64 / m.max(1) as f64,
            comp_model: comp_prev,
            comm_model: comm_prev,
            tau_ls: tau_prev,
            wall_ms: wall_prev,
        });

        if diverged {
            stop = RunStop::Diverged;
            break;
        }
        if kkt <= config.kkt_tol {
            stop = RunStop::Converged;
            break;
        }
        if let Some(level) = config.rfvd_stop {
            if rfvd_now <= level.as_f64() {
                stop = RunStop::RfvdTarget;
                break;
            }
        }
        if t >= config.max_outer {
            stop = RunStop::MaxOuter;
            break;
        }

        let hops_before = cluster.ledger.comm_hops;
        let mut d_dense = vec![T::zero(); m];
        let mut support = Vec::new();
        let mut g_support = Vec::new();
        let mut support_nnz = 0usize;
        let mut max_cycles = 0usize;
        let mut dy_parts = Vec::with_capacity(outputs.len());
        for out in outputs {
            for (&j, &dj) in out.inner.support.iter().zip(&out.inner.d) {
                d_dense[j] = dj;
            }
            support.extend_from_slice(&out.inner.support);
            g_support.extend(out.g_support);
            support_nnz += out.support_nnz;
            max_cycles = max_cycles.max(out.inner.cycles_used);
            dy_parts.push(out.dy);
        }
        let dy = cluster.allreduce_sum(dy_parts)?;
        let w_support: Vec<T> = support.iter().map(|&j| state.w[j]).collect();
        let d_support: Vec<T> = support.iter().map(|&j| d_dense[j]).collect();
        let f_before = state.f_value;

        let (alpha, tau_ls, delta) = if method.uses_line_search() {
            let smooth: T = b.iter().zip(&dy).map(|(&bi, &di)| bi * di).sum();
            let blocks = &partition.blocks;
            let l1_unit = cluster.allreduce_scalar(l1_partials(
                blocks,
                &state.w,
                &d_dense,
                T::one(),
                lambda,
            ))?;
            let delta = smooth + l1_unit - l1_cur;
            // the unit step's l1 value is already known; later trials need a fresh reduction
            let mut unit_l1 = Some(l1_unit);
            let mut l1_cached = |alpha: T| -> Result<T> {
                if alpha == T::one() {
                    if let Some(v) = unit_l1.take() {
                        return Ok(v);
                    }
                }
                cluster.allreduce_scalar(l1_partials(blocks, &state.w, &d_dense, alpha, lambda))
            };
            let ls = line_search(
                dataset,
                &state.y,
                &dy,
                state.f_value,
                delta,
                config.beta_ls,
                config.sigma,
                &mut l1_cached,
            )?;
            loss_cur = ls.loss_new;
            l1_cur = ls.l1_new;
            (ls.alpha, ls.trials, Some(delta))
        } else {
            (T::one(), 0, None)
        };

        for &j in &support {
            state.w[j] += alpha * d_dense[j];
        }
        for (yi, &di) in state.y.iter_mut().zip(&dy) {
            *yi += alpha * di;
        }
        if !method.uses_line_search() {
            loss_cur = mean_loss(dataset.loss, &state.y, &dataset.labels);
            l1_cur = lambda * state.w.iter().map(|v| v.abs()).sum::<T>();
        }
        state.f_value = loss_cur + l1_cur;
        if !method.uses_line_search() && !(state.f_value <= config.explosion_factor * f_initial) {
            diverged = true;
        }

        let s_size = support.len();
        let q = if method.scheme() == Scheme::S && s_size > 0 && nz > 0.0 {
            let mean_sel = support_nnz as f64 / s_size as f64;
            (mean_sel / (nz / m as f64)).clamp(1.0, (m as f64 / s_size as f64).max(1.0))
        } else {
            1.0
        };
        let comp = cost_estimate(
            method,
            &CostParams {
                nz,
                n: n as f64,
                m: m as f64,
                nodes: config.nodes as f64,
                s_size: s_size as f64,
                beta: config.beta_comm,
                tau_ls: tau_ls as f64,
                k: if method.uses_prox_jacobi() {
                    max_cycles as f64
                } else {
                    config.k as f64
                },
                q,
            },
        )?
        .comp;
        cluster.ledger.add_comp(comp);
        let comm = cluster
            .ledger
            .units_for_hops(cluster.ledger.comm_hops - hops_before);

        observer(
            &StepDiagnostics {
                t,
                f_before,
                f_after: state.f_value,
                alpha,
                delta,
                tau_ls,
                support,
                d: d_support,
                g: g_support,
                w_before: w_support,
            },
            &state,
        );

        pending = (
            alpha.as_f64(),
            s_size,
            comp,
            comm,
            tau_ls,
            iter_start.elapsed().as_secs_f64() * 1e3,
        );
        t += 1;
    }

    Ok(Trajectory {
        records,
        state,
        stop,
        partition,
        ledger: cluster.ledger,
    })
}

/// Result of the sequential reference solve.
#[derive(Debug, Clone)]
pub struct Reference<T> {
    pub w: Vec<T>,
    pub f_star: T,
    pub kkt: T,
    pub sweeps: usize,
}

/// Sequential coordinate descent Newton over all features (one node, exact
/// coordinate minimization) until the KKT violation reaches `tol`.
pub fn reference_solve<T: Scalar>(
    dataset: &Dataset<T>,
    lambda: T,
    tol: T,
    max_sweeps: usize,
) -> Reference<T> {
    let (w, _, sweeps) = sequential_cdn(dataset, lambda, tol, max_sweeps);
    let state = ModelState::from_weights(dataset, w, lambda);
    let g = crate::model::full_gradient(&state, dataset);
    let kkt = crate::model::kkt_violation_max(&state.w, &g, lambda);
    Reference {
        f_star: state.f_value,
        w: state.w,
        kkt,
        sweeps,
    }
}
