//! Loss kernels, the l1-regularized objective and gradient/KKT machinery.
//!
//! All gradients are taken through the output vector `y = Xw`: with
//! `b_i = l'(y_i; c_i) / n`, the gradient restricted to a feature block is
//! `X_B^T b`, which a node can form from its own columns and a replica of `y`.

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::Error;
use crate::scalar::Scalar;

/// Per-example loss `l(y; c)` for labels `c` in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Logistic,
    SquaredHinge,
    LeastSquares,
}

impl LossKind {
    #[inline]
    pub fn value<T: Scalar>(self, y: T, c: T) -> T {
        match self {
            LossKind::Logistic => {
                let z = c * y;
                if z > T::zero() {
                    (-z).exp().ln_1p()
                } else {
                    -z + z.exp().ln_1p()
                }
            }
            LossKind::SquaredHinge => {
                let slack = (T::one() - c * y).max(T::zero());
                T::half() * slack * slack
            }
            LossKind::LeastSquares => {
                let r = y - c;
                T::half() * r * r
            }
        }
    }

    #[inline]
    pub fn deriv<T: Scalar>(self, y: T, c: T) -> T {
        match self {
            LossKind::Logistic => {
                let z = c * y;
                if z > T::zero() {
                    let e = (-z).exp();
                    -c * e / (T::one() + e)
                } else {
                    -c / (T::one() + z.exp())
                }
            }
            LossKind::SquaredHinge => -c * (T::one() - c * y).max(T::zero()),
            LossKind::LeastSquares => y - c,
        }
    }

    /// Second derivative; for the squared hinge this is the one-sided
    /// generalized value (1 on the active side including the kink, else 0).
    #[inline]
    pub fn second_deriv<T: Scalar>(self, y: T, c: T) -> T {
        match self {
            LossKind::Logistic => {
                let z = c * y;
                let e = (-z.abs()).exp();
                e / ((T::one() + e) * (T::one() + e))
            }
            LossKind::SquaredHinge => {
                if c * y <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            LossKind::LeastSquares => T::one(),
        }
    }

    /// `l(y + delta; c) - l(y; c)` without cancellation between two nearly
    /// equal loss values.
    #[inline]
    pub fn value_change<T: Scalar>(self, y: T, c: T, delta: T) -> T {
        match self {
            LossKind::Logistic => {
                let z = c * y;
                let tail = if z > T::zero() {
                    let e = (-z).exp();
                    e / (T::one() + e)
                } else {
                    T::one() / (T::one() + z.exp())
                };
                let change = (tail * (-(c * delta)).exp_m1()).ln_1p();
                if change.is_finite() {
                    change
                } else {
                    self.value(y + delta, c) - self.value(y, c)
                }
            }
            LossKind::SquaredHinge => {
                let a = (T::one() - c * y).max(T::zero());
                let b = (T::one() - c * (y + delta)).max(T::zero());
                if a > T::zero() && b > T::zero() {
                    let cd = c * delta;
                    -cd * (a - T::half() * cd)
                } else {
                    T::half() * (b - a) * (b + a)
                }
            }
            LossKind::LeastSquares => delta * (y - c + T::half() * delta),
        }
    }

    /// Lipschitz constant of `l'` in `y`.
    pub fn deriv_lipschitz<T: Scalar>(self) -> T {
        match self {
            LossKind::Logistic => T::of(0.25),
            LossKind::SquaredHinge | LossKind::LeastSquares => T::one(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Logistic => "logistic",
            LossKind::SquaredHinge => "squared-hinge",
            LossKind::LeastSquares => "least-squares",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "squared-hinge" | "l2svm" => Ok(LossKind::SquaredHinge),
            "least-squares" | "ls" => Ok(LossKind::LeastSquares),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

/// `(1/n) sum_i l(y_i; c_i)`.
pub fn mean_loss<T: Scalar>(loss: LossKind, y: &[T], labels: &[T]) -> T {
    let total: T = y
        .iter()
        .zip(labels)
        .map(|(&yi, &ci)| loss.value(yi, ci))
        .sum();
    total / T::of_usize(labels.len().max(1))
}

/// Mean loss evaluated at `y + alpha * dy` without materializing the vector.
pub fn mean_loss_along<T: Scalar>(loss: LossKind, y: &[T], dy: &[T], alpha: T, labels: &[T]) -> T {
    let total: T = y
        .iter()
        .zip(dy)
        .zip(labels)
        .map(|((&yi, &di), &ci)| loss.value(yi + alpha * di, ci))
        .sum();
    total / T::of_usize(labels.len().max(1))
}

/// `b_i = l'(y_i; c_i) / n`.
pub fn scaled_derivs<T: Scalar>(loss: LossKind, y: &[T], labels: &[T]) -> Vec<T> {
    let inv_n = T::one() / T::of_usize(labels.len().max(1));
    y.iter()
        .zip(labels)
        .map(|(&yi, &ci)| loss.deriv(yi, ci) * inv_n)
        .collect()
}

/// `l''(y_i; c_i) / n`.
pub fn scaled_curvatures<T: Scalar>(loss: LossKind, y: &[T], labels: &[T]) -> Vec<T> {
    let inv_n = T::one() / T::of_usize(labels.len().max(1));
    y.iter()
        .zip(labels)
        .map(|(&yi, &ci)| loss.second_deriv(yi, ci) * inv_n)
        .collect()
}

/// `l1` term `lambda * sum_j |w_j|` over a slice.
pub fn l1_norm_scaled<T: Scalar>(w: &[T], lambda: T) -> T {
    lambda * w.iter().map(|v| v.abs()).sum::<T>()
}

/// `g_B = X_B^T b`.
pub fn gradient_block<T: Scalar>(dataset: &Dataset<T>, block: &[usize], b: &[T]) -> Vec<T> {
    block
        .iter()
        .map(|&j| dataset.matrix.dot_column(j, b))
        .collect()
}

/// Diagonal Hessian entries `H_jj = sum_i X_ij^2 h_i` for `j` in the block.
pub fn hessian_diag_block<T: Scalar>(dataset: &Dataset<T>, block: &[usize], h: &[T]) -> Vec<T> {
    block
        .iter()
        .map(|&j| {
            let (rows, vals) = dataset.matrix.column(j);
            rows.iter()
                .zip(vals)
                .fold(T::zero(), |acc, (&i, &x)| acc + x * x * h[i])
        })
        .collect()
}

/// Violation of the l1 optimality conditions for one coordinate.
#[inline]
pub fn kkt_violation<T: Scalar>(w: T, g: T, lambda: T) -> T {
    if w != T::zero() {
        (g + lambda * w.signum()).abs()
    } else {
        (g.abs() - lambda).max(T::zero())
    }
}

/// Max-norm KKT violation over paired `(w_j, g_j)` slices.
pub fn kkt_violation_max<T: Scalar>(w: &[T], g: &[T], lambda: T) -> T {
    w.iter()
        .zip(g)
        .map(|(&wj, &gj)| kkt_violation(wj, gj, lambda))
        .fold(T::zero(), T::max)
}

/// Minimum-norm subgradient choice: returns `(xi, delta)` with `xi` in the
/// subdifferential of `lambda |w|` and `delta = g + xi` of least magnitude.
#[inline]
pub fn min_norm_subgradient<T: Scalar>(w: T, g: T, lambda: T) -> (T, T) {
    let xi = if w != T::zero() {
        lambda * w.signum()
    } else {
        (-g).max(-lambda).min(lambda)
    };
    (xi, g + xi)
}

/// Weights plus the replicated output vector `y = Xw`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T> {
    pub w: Vec<T>,
    pub y: Vec<T>,
    pub f_value: T,
}

impl<T: Scalar> ModelState<T> {
    /// `w = 0`, `y = 0`.
    pub fn zeros(dataset: &Dataset<T>, lambda: T) -> Self {
        Self::from_weights(dataset, vec![T::zero(); dataset.m()], lambda)
    }

    pub fn from_weights(dataset: &Dataset<T>, w: Vec<T>, lambda: T) -> Self {
        let y = dataset.matrix.mul_vec(&w);
        let mut state = ModelState {
            w,
            y,
            f_value: T::zero(),
        };
        state.f_value = objective(&state, dataset, lambda);
        state
    }

    /// Recomputes `y = Xw` exactly and the objective with it.
    pub fn refresh(&mut self, dataset: &Dataset<T>, lambda: T) {
        self.y = dataset.matrix.mul_vec(&self.w);
        self.f_value = objective(self, dataset, lambda);
    }

    /// `||y - Xw||_inf`.
    pub fn drift(&self, dataset: &Dataset<T>) -> T {
        dataset
            .matrix
            .mul_vec(&self.w)
            .iter()
            .zip(&self.y)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn nnz(&self) -> usize {
        self.w.iter().filter(|v| **v != T::zero()).count()
    }
}

/// `F(w) = (1/n) sum_i l(y_i; c_i) + lambda ||w||_1`, using the cached `y`.
pub fn objective<T: Scalar>(state: &ModelState<T>, dataset: &Dataset<T>, lambda: T) -> T {
    mean_loss(dataset.loss, &state.y, &dataset.labels) + l1_norm_scaled(&state.w, lambda)
}

/// Full gradient of the smooth part at the state's `y`.
pub fn full_gradient<T: Scalar>(state: &ModelState<T>, dataset: &Dataset<T>) -> Vec<T> {
    let b = scaled_derivs(dataset.loss, &state.y, &dataset.labels);
    (0..dataset.m())
        .map(|j| dataset.matrix.dot_column(j, &b))
        .collect()
}
