//! Sparse dataset ingestion, column statistics and feature partitioning.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::LossKind;
use crate::scalar::Scalar;

/// Column-compressed `n x m` design matrix.
///
/// Column `j` occupies `col_ptr[j]..col_ptr[j + 1]` of `row_idx`/`values`,
/// with strictly increasing row indices. Explicit zeros are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    m: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
    col_sq_norm: Vec<T>,
    col_nnz: Vec<usize>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Builds a matrix from per-column `(row, value)` lists.
    pub fn from_columns(n: usize, columns: Vec<Vec<(usize, T)>>) -> Result<Self> {
        let m = columns.len();
        let nz: usize = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(m + 1);
        let mut row_idx = Vec::with_capacity(nz);
        let mut values = Vec::with_capacity(nz);
        col_ptr.push(0);
        for (j, col) in columns.into_iter().enumerate() {
            let mut prev: Option<usize> = None;
            for (i, v) in col {
                if i >= n {
                    return Err(Error::Contract(format!(
                        "row index {i} out of range in column {j} (n = {n})"
                    )));
                }
                if prev.is_some_and(|p| p >= i) {
                    return Err(Error::Contract(format!(
                        "row indices not strictly increasing in column {j}"
                    )));
                }
                prev = Some(i);
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        let mut mat = SparseMatrix {
            n,
            m,
            col_ptr,
            row_idx,
            values,
            col_sq_norm: Vec::new(),
            col_nnz: Vec::new(),
        };
        let (sq, cnt) = column_stats(&mat);
        mat.col_sq_norm = sq;
        mat.col_nnz = cnt;
        Ok(mat)
    }

    /// Builds a matrix from a dense row-major slice, storing only nonzeros.
    pub fn from_dense(n: usize, m: usize, data: &[T]) -> Result<Self> {
        if data.len() != n * m {
            return Err(Error::Contract(format!(
                "dense buffer has {} entries, expected {}",
                data.len(),
                n * m
            )));
        }
        let columns = (0..m)
            .map(|j| {
                (0..n)
                    .filter_map(|i| {
                        let v = data[i * m + j];
                        (v != T::zero()).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_columns(n, columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Total stored entries.
    pub fn nz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[T]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn col_sq_norm(&self) -> &[T] {
        &self.col_sq_norm
    }

    pub fn col_nnz(&self) -> &[usize] {
        &self.col_nnz
    }

    /// `out += scale * X[:, j]`.
    #[inline]
    pub fn axpy_column(&self, j: usize, scale: T, out: &mut [T]) {
        let (rows, vals) = self.column(j);
        for (&i, &v) in rows.iter().zip(vals) {
            out[i] += scale * v;
        }
    }

    /// `X[:, j]^T v`.
    #[inline]
    pub fn dot_column(&self, j: usize, v: &[T]) -> T {
        let (rows, vals) = self.column(j);
        rows.iter()
            .zip(vals)
            .fold(T::zero(), |acc, (&i, &x)| acc + x * v[i])
    }

    /// Exact `y = X w`, accumulated column by column in index order.
    pub fn mul_vec(&self, w: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for (j, &wj) in w.iter().enumerate() {
            if wj != T::zero() {
                self.axpy_column(j, wj, &mut y);
            }
        }
        y
    }

    /// Row-major view used for serialization: per row, `(col, value)` in column order.
    pub fn rows(&self) -> Vec<Vec<(usize, T)>> {
        let mut rows = vec![Vec::new(); self.n];
        for j in 0..self.m {
            let (ri, vals) = self.column(j);
            for (&i, &v) in ri.iter().zip(vals) {
                rows[i].push((j, v));
            }
        }
        rows
    }
}

/// Per-column `||X[:, j]||^2` and nonzero counts.
pub fn column_stats<T: Scalar>(matrix: &SparseMatrix<T>) -> (Vec<T>, Vec<usize>) {
    (0..matrix.m)
        .map(|j| {
            let (rows, vals) = matrix.column(j);
            (vals.iter().map(|&v| v * v).sum::<T>(), rows.len())
        })
        .unzip()
}

/// Design matrix, `+1/-1` labels and the loss used for training.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub matrix: SparseMatrix<T>,
    pub labels: Vec<T>,
    pub loss: LossKind,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(matrix: SparseMatrix<T>, labels: Vec<T>, loss: LossKind) -> Result<Self> {
        if labels.len() != matrix.n() {
            return Err(Error::Contract(format!(
                "{} labels for {} examples",
                labels.len(),
                matrix.n()
            )));
        }
        if let Some(i) = labels.iter().position(|&c| c != T::one() && c != -T::one()) {
            return Err(Error::Contract(format!("label {i} is not +1 or -1")));
        }
        Ok(Dataset {
            matrix,
            labels,
            loss,
        })
    }

    pub fn with_loss(mut self, loss: LossKind) -> Self {
        self.loss = loss;
        self
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn m(&self) -> usize {
        self.matrix.m()
    }
}

/// Parses LIBSVM/SVMlight text (`label idx:val ...`, 1-based indices).
///
/// Labels are mapped by sign; a zero label is rejected. `dim` pins the
/// feature count, which must not be smaller than the largest index seen.
/// Blank lines and `#` comments are skipped.
pub fn parse_libsvm<T: Scalar, R: BufRead>(
    reader: R,
    dim: Option<usize>,
    loss: LossKind,
) -> Result<Dataset<T>> {
    let mut labels = Vec::new();
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    let mut max_idx = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: lineno, msg };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| perr(format!("malformed label {label_tok:?}")))?;
        if label == 0.0 || label.is_nan() {
            return Err(perr(format!(
                "label {label_tok:?} is neither positive nor negative"
            )));
        }
        let row = labels.len();
        labels.push(if label > 0.0 { T::one() } else { -T::one() });

        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| perr(format!("malformed token {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| perr(format!("malformed feature index in {tok:?}")))?;
            if idx < 1 {
                return Err(perr(format!("feature index must be >= 1, got {idx}")));
            }
            if idx <= prev {
                return Err(perr(format!(
                    "feature indices not increasing ({prev} then {idx})"
                )));
            }
            prev = idx;
            let val: T = val
                .parse()
                .map_err(|_| perr(format!("malformed feature value in {tok:?}")))?;
            max_idx = max_idx.max(idx);
            triplets.push((row, idx - 1, val));
        }
    }

    let m = match dim {
        Some(d) if d < max_idx => {
            return Err(Error::Config(format!(
                "declared dimension {d} is smaller than the largest feature index {max_idx}"
            )))
        }
        Some(d) => d,
        None => max_idx,
    };
    let n = labels.len();
    let mut columns: Vec<Vec<(usize, T)>> = vec![Vec::new(); m];
    // rows arrive in order, so each column stays sorted by row
    for (i, j, v) in triplets {
        columns[j].push((i, v));
    }
    let matrix = SparseMatrix::from_columns(n, columns)?;
    Dataset::new(matrix, labels, loss)
}

/// Writes a dataset in LIBSVM text format. Values use the shortest
/// representation that parses back to the same scalar.
pub fn write_libsvm<T: Scalar, W: Write>(dataset: &Dataset<T>, mut out: W) -> Result<()> {
    for (row, &c) in dataset.matrix.rows().iter().zip(&dataset.labels) {
        write!(out, "{}", if c > T::zero() { "+1" } else { "-1" })?;
        for &(j, v) in row {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Disjoint cover of the feature indices, one block per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Partition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// Random feature partition: Fisher-Yates shuffle of `0..m` with a seeded
/// ChaCha8 stream, split into `nodes` contiguous chunks whose sizes differ
/// by at most one (larger chunks first).
pub fn partition_features(m: usize, nodes: usize, seed: u64) -> Result<Partition> {
    if nodes == 0 || nodes > m {
        return Err(Error::Config(format!(
            "cannot partition {m} features over {nodes} nodes"
        )));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);

    let base = m / nodes;
    let extra = m % nodes;
    let mut blocks = Vec::with_capacity(nodes);
    let mut start = 0;
    for p in 0..nodes {
        let len = base + usize::from(p < extra);
        blocks.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(Partition { blocks, seed })
}
