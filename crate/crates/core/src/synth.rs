//! Seeded synthetic classification problems with a planted sparse model.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, SparseMatrix};
use crate::error::{Error, Result};
use crate::model::LossKind;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub m: usize,
    /// Probability that an entry of `X` is nonzero.
    pub density: f64,
    /// Fraction of features in the planted support.
    pub sparsity: f64,
    pub seed: u64,
    /// Standard deviation of the label noise added to `x_i^T w*`.
    pub noise: f64,
    /// Extra held-out rows drawn from the same model.
    pub n_test: usize,
    pub loss: LossKind,
    /// Consecutive features sharing one row pattern; 1 gives independent columns.
    pub group_size: usize,
    /// Pairwise correlation of values inside a group, in `[0, 1)`.
    pub correlation: f64,
}

impl SynthConfig {
    pub fn new(n: usize, m: usize, density: f64, sparsity: f64, seed: u64) -> Self {
        SynthConfig {
            n,
            m,
            density,
            sparsity,
            seed,
            noise: 0.0,
            n_test: 0,
            loss: LossKind::Logistic,
            group_size: 1,
            correlation: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic<T> {
    pub train: Dataset<T>,
    /// Empty (zero rows) unless `n_test > 0`.
    pub test: Dataset<T>,
    pub w_star: Vec<T>,
    /// Ascending indices of the planted nonzeros.
    pub support: Vec<usize>,
}

/// Draws `X` with standard normal entries at the given density, a planted
/// `w*` with `ceil(sparsity m)` nonzeros and labels
/// `c_i = sign(x_i^T w* + noise)`; an exactly zero margin gets a fair coin.
///
/// With `group_size > 1` the columns of each group share their sparsity
/// pattern and are equicorrelated: `x_ij = sqrt(rho) z_i + sqrt(1 - rho) e_ij`,
/// so every entry stays marginally standard normal.
pub fn synth_dataset<T: Scalar>(cfg: &SynthConfig) -> Result<Synthetic<T>> {
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(Error::Config(format!(
            "density must lie in (0, 1], got {}",
            cfg.density
        )));
    }
    if !(0.0..=1.0).contains(&cfg.sparsity) {
        return Err(Error::Config(format!(
            "sparsity must lie in [0, 1], got {}",
            cfg.sparsity
        )));
    }
    if cfg.n == 0 || cfg.m == 0 {
        return Err(Error::Config("need n >= 1 and m >= 1".into()));
    }
    if cfg.group_size == 0 || !(0.0..1.0).contains(&cfg.correlation) {
        return Err(Error::Config(format!(
            "need group size >= 1 and correlation in [0, 1), got {} and {}",
            cfg.group_size, cfg.correlation
        )));
    }
    if !(cfg.noise >= 0.0) {
        return Err(Error::Config(format!(
            "noise must be >= 0, got {}",
            cfg.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.m;

    let k = ((cfg.sparsity * m as f64).ceil() as usize).min(m);
    let mut support = sample(&mut rng, m, k).into_vec();
    support.sort_unstable();
    let mut w_star = vec![0.0f64; m];
    for &j in &support {
        let mag: f64 = 1.0 + rng.sample::<f64, _>(StandardNormal).abs();
        w_star[j] = if rng.random_bool(0.5) { mag } else { -mag };
    }

    let total = cfg.n + cfg.n_test;
    let mut train_cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); m];
    let mut test_cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); m];
    let mut train_labels = Vec::with_capacity(cfg.n);
    let mut test_labels = Vec::with_capacity(cfg.n_test);
    for i in 0..total {
        let (cols, row) = if i < cfg.n {
            (&mut train_cols, i)
        } else {
            (&mut test_cols, i - cfg.n)
        };
        let mut margin = 0.0f64;
        let (shared_w, own_w) = (cfg.correlation.sqrt(), (1.0 - cfg.correlation).sqrt());
        for (g, group) in cols.chunks_mut(cfg.group_size).enumerate() {
            if !(cfg.density >= 1.0 || rng.random_bool(cfg.density)) {
                continue;
            }
            let shared: f64 = if cfg.group_size > 1 {
                rng.sample(StandardNormal)
            } else {
                0.0
            };
            for (k, col) in group.iter_mut().enumerate() {
                let e: f64 = rng.sample(StandardNormal);
                let v = if cfg.group_size > 1 {
                    shared_w * shared + own_w * e
                } else {
                    e
                };
                // the margin uses the value as stored in T
                let vt = T::of(v);
                margin += vt.as_f64() * w_star[g * cfg.group_size + k];
                col.push((row, vt));
            }
        }
        if cfg.noise > 0.0 {
            margin += cfg.noise * rng.sample::<f64, _>(StandardNormal);
        }
        let positive = if margin == 0.0 {
            rng.random_bool(0.5)
        } else {
            margin > 0.0
        };
        let label = if positive { T::one() } else { -T::one() };
        if i < cfg.n {
            train_labels.push(label);
        } else {
            test_labels.push(label);
        }
    }

    let train = Dataset::new(
        SparseMatrix::from_columns(cfg.n, train_cols)?,
        train_labels,
        cfg.loss,
    )?;
    let test = Dataset::new(
        SparseMatrix::from_columns(cfg.n_test, test_cols)?,
        test_labels,
        cfg.loss,
    )?;
    Ok(Synthetic {
        train,
        test,
        w_star: w_star.into_iter().map(T::of).collect(),
        support,
    })
}
