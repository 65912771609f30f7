//! Node-local subproblems: variable selection and direction finding.
//!
//! Everything here reads the synchronized iterate `(w^t, y^t)` and works on
//! node-private copies, so one call per node can run concurrently.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::min_norm_subgradient;
use crate::scalar::Scalar;

/// Curvature floor applied inside the inner coordinate descent.
pub const CURVATURE_FLOOR: f64 = 1e-12;

/// Backtracking limit shared by the coordinate and global line searches.
pub const MAX_LS_TRIALS: usize = 60;

/// Closed-form minimizer of `g d + (h/2) d^2 + lambda |w + d| - lambda |w|`.
#[inline]
pub fn minimize_1d<T: Scalar>(g: T, h: T, lambda: T, w: T) -> Result<T> {
    if !(h > T::zero()) {
        return Err(Error::Domain(format!(
            "curvature must be positive, got {h}"
        )));
    }
    Ok(if g - lambda >= h * w {
        -(g - lambda) / h
    } else if g + lambda <= h * w {
        -(g + lambda) / h
    } else {
        -w
    })
}

/// Value of the one-variable model at displacement `d`.
#[inline]
pub fn quad_model<T: Scalar>(g: T, h: T, lambda: T, w: T, d: T) -> T {
    g * d + T::half() * h * d * d + lambda * ((w + d).abs() - w.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyScore<T> {
    pub j: usize,
    pub q_bar: T,
    pub d_star: T,
}

/// Scores each feature by the optimal decrease of its one-variable model
/// with curvature `H_jj + nu`. All slices are aligned with `block`.
pub fn greedy_scores<T: Scalar>(
    block: &[usize],
    w: &[T],
    g: &[T],
    h_diag: &[T],
    nu: T,
    lambda: T,
) -> Vec<GreedyScore<T>> {
    block
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let h = h_diag[k] + nu;
            // nu > 0 keeps h positive
            let d = minimize_1d(g[k], h, lambda, w[k]).unwrap_or_else(|_| T::zero());
            let q = quad_model(g[k], h, lambda, w[k], d);
            // rounding can leave q a hair above zero
            let q_bar = q.min(T::zero());
            GreedyScore {
                j,
                q_bar,
                d_star: if q_bar == T::zero() { T::zero() } else { d },
            }
        })
        .collect()
}

/// The `wss` most negative scores; ties go to the lower feature index.
/// Returned in ascending feature order.
pub fn select_s<T: Scalar>(scores: &[GreedyScore<T>], wss: usize) -> Vec<usize> {
    let mut order: Vec<&GreedyScore<T>> = scores.iter().collect();
    order.sort_by(|a, b| {
        a.q_bar
            .partial_cmp(&b.q_bar)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.j.cmp(&b.j))
    });
    let mut picked: Vec<usize> = order.into_iter().take(wss).map(|s| s.j).collect();
    picked.sort_unstable();
    picked
}

/// Mixes `(seed, node, cycle)` into one 64-bit RNG seed (splitmix64 finalizer).
pub fn node_seed(seed: u64, node: usize, cycle: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ node as u64) ^ cycle)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Random cyclic (Gauss-Seidel) selection.
    R,
    /// Distributed greedy selection.
    S,
}

/// Per-node selection bookkeeping.
#[derive(Debug, Clone)]
pub struct SelectionState {
    pub scheme: Scheme,
    pub wss: usize,
    block: Vec<usize>,
    chunks: usize,
    perm: Vec<usize>,
    cursor: usize,
    cycle: u64,
    node: usize,
    seed: u64,
}

impl SelectionState {
    /// `wss` also fixes the number of chunks per cycle for the R-scheme,
    /// `T = ceil(|B| / wss)`.
    pub fn new(scheme: Scheme, block: Vec<usize>, wss: usize, node: usize, seed: u64) -> Self {
        let wss = wss.max(1);
        let chunks = block.len().div_ceil(wss).max(1);
        Self::with_chunks(scheme, block, wss, chunks, node, seed)
    }

    pub fn with_chunks(
        scheme: Scheme,
        block: Vec<usize>,
        wss: usize,
        chunks: usize,
        node: usize,
        seed: u64,
    ) -> Self {
        SelectionState {
            scheme,
            wss: wss.max(1),
            block,
            chunks: chunks.max(1),
            perm: Vec::new(),
            cursor: 0,
            cycle: 0,
            node,
            seed,
        }
    }

    pub fn block(&self) -> &[usize] {
        &self.block
    }

    /// Next chunk of the current cycle's random permutation of the block,
    /// of size `ceil(|B| / T)` (the last chunk may be shorter).
    pub fn select_r(&mut self) -> Vec<usize> {
        if self.block.is_empty() {
            return Vec::new();
        }
        if self.cursor == 0 {
            self.perm = self.block.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(node_seed(self.seed, self.node, self.cycle));
            self.perm.shuffle(&mut rng);
        }
        let size = self.block.len().div_ceil(self.chunks);
        let end = (self.cursor + size).min(self.perm.len());
        let mut out = self.perm[self.cursor..end].to_vec();
        self.cursor = end;
        if self.cursor >= self.perm.len() {
            self.cursor = 0;
            self.cycle += 1;
        }
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    CycleBudget,
    ApproxCriterion,
}

/// Direction over the selected features of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult<T> {
    /// Selected features, ascending.
    pub support: Vec<usize>,
    /// Displacement aligned with `support`.
    pub d: Vec<T>,
    pub cycles_used: usize,
    pub stop_reason: StopReason,
    /// Subproblem objective after each cycle, when tracking was requested.
    pub cycle_objectives: Vec<T>,
}

impl<T: Scalar> InnerResult<T> {
    pub fn empty() -> Self {
        InnerResult {
            support: Vec::new(),
            d: Vec::new(),
            cycles_used: 0,
            stop_reason: StopReason::CycleBudget,
            cycle_objectives: Vec::new(),
        }
    }

    /// Dense length-`m` direction, zero off the support.
    pub fn scatter(&self, m: usize) -> Vec<T> {
        let mut out = vec![T::zero(); m];
        for (&j, &dj) in self.support.iter().zip(&self.d) {
            out[j] = dj;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|v| *v == T::zero())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InnerParams<T> {
    pub lambda: T,
    pub mu: T,
    /// Cycle budget `k`.
    pub cycles: usize,
    /// Relative residual tolerance for early stopping, if any.
    pub eps: Option<T>,
    pub beta_ls: T,
    pub sigma: T,
    pub track_objective: bool,
}

/// Outcome of one safeguarded coordinate Newton step.
struct CoordinateStep<T> {
    displacement: T,
}

/// One coordinate descent Newton step on
/// `f(w) + (mu/2)(w_j - anchor)^2 + lambda |w_j|`, with a one-dimensional
/// Armijo backtrack. Updates `y` in place and returns the accepted move.
fn coordinate_newton_step<T: Scalar>(
    dataset: &Dataset<T>,
    j: usize,
    w_j: T,
    anchor: T,
    y: &mut [T],
    params: &InnerParams<T>,
) -> CoordinateStep<T> {
    let loss = dataset.loss;
    let inv_n = T::one() / T::of_usize(dataset.n().max(1));
    let (rows, vals) = dataset.matrix.column(j);

    let mut g = T::zero();
    let mut h = T::zero();
    for (&i, &x) in rows.iter().zip(vals) {
        let c = dataset.labels[i];
        g += x * loss.deriv(y[i], c);
        h += x * x * loss.second_deriv(y[i], c);
    }
    let lambda = params.lambda;
    let g = g * inv_n + params.mu * (w_j - anchor);
    let h = (h * inv_n + params.mu).max(T::of(CURVATURE_FLOOR));

    let d = minimize_1d(g, h, lambda, w_j).expect("floored curvature is positive");
    if d == T::zero() {
        return CoordinateStep {
            displacement: T::zero(),
        };
    }
    let model_decrease = g * d + lambda * ((w_j + d).abs() - w_j.abs());

    let offset = w_j - anchor;
    let mut alpha = T::one();
    for _ in 0..MAX_LS_TRIALS {
        let step = alpha * d;
        let loss_change: T = rows
            .iter()
            .zip(vals)
            .map(|(&i, &x)| loss.value_change(y[i], dataset.labels[i], step * x))
            .sum::<T>();
        let w_new = w_j + step;
        let change = loss_change * inv_n
            + T::half() * params.mu * step * (offset + offset + step)
            + lambda * (w_new.abs() - w_j.abs());
        if change <= params.sigma * alpha * model_decrease {
            for (&i, &x) in rows.iter().zip(vals) {
                y[i] += step * x;
            }
            return CoordinateStep { displacement: step };
        }
        alpha *= params.beta_ls;
    }
    CoordinateStep {
        displacement: T::zero(),
    }
}

/// Smooth gradient plus proximal term at the current local iterate.
fn local_prox_gradient<T: Scalar>(
    dataset: &Dataset<T>,
    j: usize,
    w_j: T,
    anchor: T,
    y: &[T],
    mu: T,
) -> T {
    let loss = dataset.loss;
    let (rows, vals) = dataset.matrix.column(j);
    let g: T = rows
        .iter()
        .zip(vals)
        .map(|(&i, &x)| x * loss.deriv(y[i], dataset.labels[i]))
        .sum();
    g / T::of_usize(dataset.n().max(1)) + mu * (w_j - anchor)
}

/// Objective of the proximal-Jacobi subproblem at a local iterate, up to
/// terms that do not depend on the free variables. `w_anchor`/`w_local`
/// are aligned with the support.
pub fn prox_jacobi_objective<T: Scalar>(
    dataset: &Dataset<T>,
    w_anchor: &[T],
    w_local: &[T],
    y_local: &[T],
    mu: T,
    lambda: T,
) -> T {
    let f = crate::model::mean_loss(dataset.loss, y_local, &dataset.labels);
    let prox: T = w_local
        .iter()
        .zip(w_anchor)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    f + T::half() * mu * prox + lambda * w_local.iter().map(|v| v.abs()).sum::<T>()
}

/// Approximately minimizes the proximal-Jacobi model over `support` with up
/// to `k` cycles of coordinate descent Newton, visiting features in
/// ascending order. `w` and `y` are the synchronized `w^t` (length `m`) and
/// `y^t`; the node works on private copies.
pub fn solve_prox_jacobi<T: Scalar>(
    dataset: &Dataset<T>,
    support: &[usize],
    w: &[T],
    y: &[T],
    params: &InnerParams<T>,
) -> InnerResult<T> {
    let mut support = support.to_vec();
    support.sort_unstable();
    if support.is_empty() {
        return InnerResult::empty();
    }
    let anchor: Vec<T> = support.iter().map(|&j| w[j]).collect();
    let mut local_w = anchor.clone();
    let mut local_y = y.to_vec();
    let mut cycle_objectives = Vec::new();
    if params.track_objective {
        cycle_objectives.push(prox_jacobi_objective(
            dataset,
            &anchor,
            &local_w,
            &local_y,
            params.mu,
            params.lambda,
        ));
    }

    let mut cycles_used = 0;
    let mut stop_reason = StopReason::CycleBudget;
    for _ in 0..params.cycles.max(1) {
        for (k, &j) in support.iter().enumerate() {
            let step =
                coordinate_newton_step(dataset, j, local_w[k], anchor[k], &mut local_y, params);
            local_w[k] += step.displacement;
        }
        cycles_used += 1;
        if params.track_objective {
            cycle_objectives.push(prox_jacobi_objective(
                dataset,
                &anchor,
                &local_w,
                &local_y,
                params.mu,
                params.lambda,
            ));
        }
        if let Some(eps) = params.eps {
            let (delta, disp): (Vec<T>, Vec<T>) = support
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    let g =
                        local_prox_gradient(dataset, j, local_w[k], anchor[k], &local_y, params.mu);
                    (
                        min_norm_subgradient(local_w[k], g, params.lambda).1,
                        local_w[k] - anchor[k],
                    )
                })
                .unzip();
            if check_approx_stop(&delta, &disp, eps) {
                stop_reason = StopReason::ApproxCriterion;
                break;
            }
        }
    }

    let d = local_w.iter().zip(&anchor).map(|(&a, &b)| a - b).collect();
    InnerResult {
        support,
        d,
        cycles_used,
        stop_reason,
        cycle_objectives,
    }
}

/// Decoupled quadratic step: `d_j = minimize_1d(g_j, L_j, lambda, w_j)` for
/// each selected feature. Slices are aligned with `support`.
pub fn decoupled_step<T: Scalar>(
    support: &[usize],
    g: &[T],
    w: &[T],
    coeff: &[T],
    lambda: T,
) -> Result<InnerResult<T>> {
    let d = (0..support.len())
        .map(|k| {
            if !(coeff[k] > T::zero()) {
                return Err(Error::Domain(format!(
                    "coefficient for feature {} must be positive, got {}",
                    support[k], coeff[k]
                )));
            }
            minimize_1d(g[k], coeff[k], lambda, w[k])
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(InnerResult {
        support: support.to_vec(),
        d,
        cycles_used: usize::from(!support.is_empty()),
        stop_reason: StopReason::CycleBudget,
        cycle_objectives: Vec::new(),
    })
}

/// True iff `|delta_j| <= eps |d_j|` for every `j`.
pub fn check_approx_stop<T: Scalar>(delta: &[T], d: &[T], eps: T) -> bool {
    delta
        .iter()
        .zip(d)
        .all(|(&dl, &dj)| dl.abs() <= eps * dj.abs())
}

/// Full-sweep coordinate descent Newton over every feature, used as the
/// sequential reference solver. Runs until the max-norm KKT violation drops
/// to `tol` or `max_cycles` sweeps are done; returns `(w, y, sweeps)`.
pub fn sequential_cdn<T: Scalar>(
    dataset: &Dataset<T>,
    lambda: T,
    tol: T,
    max_cycles: usize,
) -> (Vec<T>, Vec<T>, usize) {
    let m = dataset.m();
    let mut w = vec![T::zero(); m];
    let mut y = vec![T::zero(); dataset.n()];
    let params = InnerParams {
        lambda,
        mu: T::zero(),
        cycles: 1,
        eps: None,
        beta_ls: T::half(),
        sigma: T::of(0.01),
        track_objective: false,
    };
    for sweep in 0..max_cycles {
        if sweep % 50 == 49 {
            y = dataset.matrix.mul_vec(&w);
        }
        let b = crate::model::scaled_derivs(dataset.loss, &y, &dataset.labels);
        let kkt = (0..m)
            .map(|j| crate::model::kkt_violation(w[j], dataset.matrix.dot_column(j, &b), lambda))
            .fold(T::zero(), T::max);
        if kkt <= tol {
            return (w, y, sweep);
        }
        for (j, wj) in w.iter_mut().enumerate() {
            let step = coordinate_newton_step(dataset, j, *wj, *wj, &mut y, &params);
            *wj += step.displacement;
        }
    }
    (w, y, max_cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SparseMatrix;
    use crate::model::{scaled_derivs, LossKind};
    use rand::{Rng, SeedableRng};

    /// Grid search over `[lo, hi]` with the given step.
    fn brute_1d(g: f64, h: f64, lambda: f64, w: f64, lo: f64, hi: f64, step: f64) -> f64 {
        let steps = ((hi - lo) / step).ceil() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=steps {
            let d = lo + k as f64 * step;
            let v = quad_model(g, h, lambda, w, d);
            if v < best.0 {
                best = (v, d);
            }
        }
        best.1
    }

    #[test]
    fn minimize_1d_examples() {
        assert_eq!(minimize_1d(0.0, 1.0, 0.5, 0.0).unwrap(), 0.0);
        assert_eq!(minimize_1d(2.0, 1.0, 1.0, 0.0).unwrap(), -1.0);
        assert_eq!(minimize_1d(0.0, 1.0, 2.0, 1.0).unwrap(), -1.0);
        assert_eq!(minimize_1d(-3.0, 2.0, 1.0, 0.0).unwrap(), 1.0);
        for (g, h, l, w) in [
            (2.0, 1.0, 1.0, 0.0),
            (0.0, 1.0, 2.0, 1.0),
            (-3.0, 2.0, 1.0, 0.0),
        ] {
            let brute = brute_1d(g, h, l, w, -5.0, 5.0, 1e-4);
            assert!((brute - minimize_1d(g, h, l, w).unwrap()).abs() < 1e-3);
        }
        assert!(matches!(
            minimize_1d(1.0, 0.0, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            minimize_1d(1.0, -1.0, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn greedy_score_examples() {
        let s = greedy_scores(&[0], &[0.0], &[0.0], &[1.0], 1e-12, 0.7);
        assert_eq!(s[0].q_bar, 0.0);
        assert_eq!(s[0].d_star, 0.0);

        let s = greedy_scores(&[3], &[0.0], &[2.0], &[1.0], 0.0, 1.0);
        assert_eq!((s[0].j, s[0].d_star, s[0].q_bar), (3, -1.0, -0.5));

        let s = greedy_scores(&[0], &[1.0], &[0.0], &[0.0], 1.0, 2.0);
        assert_eq!((s[0].d_star, s[0].q_bar), (-1.0, -1.5));
    }

    fn scores(q: &[f64]) -> Vec<GreedyScore<f64>> {
        q.iter()
            .enumerate()
            .map(|(j, &q_bar)| GreedyScore {
                j,
                q_bar,
                d_star: 0.0,
            })
            .collect()
    }

    #[test]
    fn select_s_examples() {
        assert_eq!(select_s(&scores(&[-0.5, 0.0, -2.0]), 2), vec![0, 2]);
        assert_eq!(select_s(&scores(&[0.0, 0.0, 0.0, 0.0]), 2), vec![0, 1]);
        assert_eq!(select_s(&scores(&[-1.0, 0.0]), 5), vec![0, 1]);
    }

    #[test]
    fn select_r_examples() {
        let mut st = SelectionState::with_chunks(Scheme::R, vec![10, 11, 12, 13], 2, 2, 0, 9);
        let a = st.select_r();
        let b = st.select_r();
        assert_eq!((a.len(), b.len()), (2, 2));
        let mut all = [a, b].concat();
        all.sort();
        assert_eq!(all, vec![10, 11, 12, 13]);

        let mut st = SelectionState::with_chunks(Scheme::R, vec![4, 2, 7], 3, 1, 0, 9);
        assert_eq!(st.select_r(), vec![2, 4, 7]);
        assert_eq!(st.select_r(), vec![2, 4, 7]);

        let mut st = SelectionState::with_chunks(Scheme::R, (0..5).collect(), 3, 2, 1, 9);
        let sizes = [st.select_r().len(), st.select_r().len()];
        assert_eq!(sizes, [3, 2]);
    }

    #[test]
    fn select_r_cycles_cover_block_exactly_once() {
        let block: Vec<usize> = (0..37).map(|k| 3 * k + 1).collect();
        for (wss, node) in [(1usize, 0usize), (4, 1), (10, 2), (37, 3), (50, 4)] {
            let mut st = SelectionState::new(Scheme::R, block.clone(), wss, node, 123);
            let chunks = block.len().div_ceil(wss.max(1));
            for _cycle in 0..3 {
                let mut seen: Vec<usize> = (0..chunks).flat_map(|_| st.select_r()).collect();
                seen.sort();
                assert_eq!(seen, block);
            }
        }
    }

    #[test]
    fn check_approx_stop_examples() {
        assert!(check_approx_stop(&[0.0, 0.0], &[0.0, 3.0], 0.05));
        assert!(!check_approx_stop(&[0.1], &[1.0], 0.05));
        assert!(check_approx_stop(&[0.04], &[1.0], 0.05));
        assert!(!check_approx_stop(&[1e-20], &[0.0], 0.05));
    }

    #[test]
    fn decoupled_step_examples() {
        let r = decoupled_step(&[0], &[2.0], &[0.0], &[1.0], 1.0).unwrap();
        assert_eq!(r.d, vec![-1.0]);
        let r = decoupled_step(&[0, 1], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 3.0], 1.0).unwrap();
        assert!(r.is_zero());
        let a = decoupled_step(&[0], &[5.0], &[0.0], &[1.0], 1.0).unwrap().d[0];
        let b = decoupled_step(&[0], &[5.0], &[0.0], &[2.0], 1.0).unwrap().d[0];
        assert_eq!(a, 2.0 * b);
        assert!(matches!(
            decoupled_step(&[0], &[1.0], &[0.0], &[0.0], 1.0),
            Err(Error::Domain(_))
        ));
    }

    fn params(lambda: f64, mu: f64, cycles: usize) -> InnerParams<f64> {
        InnerParams {
            lambda,
            mu,
            cycles,
            eps: None,
            beta_ls: 0.5,
            sigma: 0.01,
            track_objective: true,
        }
    }

    #[test]
    fn prox_jacobi_examples() {
        let ds = Dataset::new(
            SparseMatrix::from_dense(1, 1, &[1.0]).unwrap(),
            vec![1.0],
            LossKind::LeastSquares,
        )
        .unwrap();
        let r = solve_prox_jacobi(&ds, &[], &[0.0], &[0.0], &params(0.5, 0.0, 10));
        assert_eq!((r.d.len(), r.cycles_used), (0, 0));

        let r = solve_prox_jacobi(&ds, &[0], &[0.0], &[0.0], &params(0.5, 0.0, 50));
        assert!((r.d[0] - 0.5).abs() < 1e-12);
        let r = solve_prox_jacobi(&ds, &[0], &[0.0], &[0.0], &params(2.0, 0.0, 50));
        assert_eq!(r.d[0], 0.0);
    }

    fn random_dataset(seed: u64, n: usize, m: usize, loss: LossKind) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dense: Vec<f64> = (0..n * m)
            .map(|_| {
                if rng.random_bool(0.6) {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let labels = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        Dataset::new(
            SparseMatrix::from_dense(n, m, &dense).unwrap(),
            labels,
            loss,
        )
        .unwrap()
    }

    #[test]
    fn prox_jacobi_inner_descent_is_monotone() {
        for (seed, loss) in [
            (1, LossKind::Logistic),
            (2, LossKind::SquaredHinge),
            (3, LossKind::LeastSquares),
        ] {
            let ds = random_dataset(seed, 30, 12, loss);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let w: Vec<f64> = (0..12).map(|_| rng.random_range(-0.5..0.5)).collect();
            let y = ds.matrix.mul_vec(&w);
            let r = solve_prox_jacobi(&ds, &[0, 2, 3, 5, 8, 11], &w, &y, &params(0.01, 0.3, 20));
            for pair in r.cycle_objectives.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-15, "{loss}: {pair:?}");
            }
            let dense = r.scatter(12);
            for j in [1, 4, 6, 7, 9, 10] {
                assert_eq!(dense[j], 0.0);
            }
        }
    }

    /// Proximal gradient (ISTA) on the same subproblem, run to convergence.
    fn ista_oracle(
        ds: &Dataset<f64>,
        support: &[usize],
        w: &[f64],
        mu: f64,
        lambda: f64,
    ) -> Vec<f64> {
        let lip = support
            .iter()
            .map(|&j| ds.matrix.col_sq_norm()[j])
            .sum::<f64>()
            / ds.n() as f64
            * ds.loss.deriv_lipschitz::<f64>()
            + mu;
        let step = 1.0 / lip;
        let mut cur = w.to_vec();
        for _ in 0..200_000 {
            let y = ds.matrix.mul_vec(&cur);
            let b = scaled_derivs(ds.loss, &y, &ds.labels);
            for &j in support {
                let g = ds.matrix.dot_column(j, &b) + mu * (cur[j] - w[j]);
                let z = cur[j] - step * g;
                cur[j] = z.signum() * (z.abs() - step * lambda).max(0.0);
            }
        }
        support.iter().map(|&j| cur[j] - w[j]).collect()
    }

    #[test]
    fn exact_inner_solve_satisfies_subproblem_optimality() {
        for (seed, loss) in [
            (7, LossKind::LeastSquares),
            (8, LossKind::Logistic),
            (9, LossKind::SquaredHinge),
        ] {
            let ds = random_dataset(seed, 25, 8, loss);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w: Vec<f64> = (0..8).map(|_| rng.random_range(-0.3..0.3)).collect();
            let y = ds.matrix.mul_vec(&w);
            let support = [1usize, 2, 4, 6, 7];
            let (mu, lambda) = (0.05, 0.02);
            let r = solve_prox_jacobi(&ds, &support, &w, &y, &params(lambda, mu, 5000));
            let mut w_bar = w.clone();
            for (k, &j) in support.iter().enumerate() {
                w_bar[j] += r.d[k];
            }
            let y_bar = ds.matrix.mul_vec(&w_bar);
            let b = scaled_derivs(ds.loss, &y_bar, &ds.labels);
            for &j in &support {
                let g = ds.matrix.dot_column(j, &b) + mu * (w_bar[j] - w[j]);
                let (_, delta) = min_norm_subgradient(w_bar[j], g, lambda);
                assert!(delta.abs() <= 1e-8, "{loss}: residual {delta} at {j}");
            }
            let oracle = ista_oracle(&ds, &support, &w, mu, lambda);
            for (a, b) in r.d.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-6, "{loss}: {a} vs oracle {b}");
            }
        }
    }

    #[test]
    fn eps_stop_triggers_before_budget() {
        let ds = random_dataset(21, 40, 6, LossKind::LeastSquares);
        let w = vec![0.0; 6];
        let y = vec![0.0; 40];
        let mut p = params(0.01, 1.0, 10_000);
        p.eps = Some(0.5);
        let r = solve_prox_jacobi(&ds, &[0, 1, 2, 3, 4, 5], &w, &y, &p);
        assert_eq!(r.stop_reason, StopReason::ApproxCriterion);
        assert!(r.cycles_used < 10_000);
    }

    #[test]
    fn node_seed_separates_streams() {
        let a = node_seed(1, 0, 0);
        assert_ne!(a, node_seed(1, 1, 0));
        assert_ne!(a, node_seed(1, 0, 1));
        assert_ne!(a, node_seed(2, 0, 0));
        assert_eq!(a, node_seed(1, 0, 0));
    }
}
