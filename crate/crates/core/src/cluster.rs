//! Simulated P-node cluster.
//!
//! Nodes share one address space. Communication is modeled: every AllReduce
//! of a length-`len` vector charges `beta * len * ceil(log2 P)` units to the
//! ledger, and sums are formed over a fixed left-leaning binary tree so the
//! result never depends on thread scheduling.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub nodes: usize,
    /// Cost of moving one scalar relative to one floating point operation.
    pub beta: f64,
    /// Worker threads; affects speed only.
    pub threads: usize,
}

impl ClusterConfig {
    pub fn new(nodes: usize, beta: f64, threads: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::Config("cluster needs at least one node".into()));
        }
        if !(beta >= 0.0) {
            return Err(Error::Config(format!(
                "communication ratio must be >= 0, got {beta}"
            )));
        }
        Ok(ClusterConfig {
            nodes,
            beta,
            threads: threads.max(1),
        })
    }

    /// Depth of the reduction tree, `ceil(log2 P)`.
    pub fn tree_depth(&self) -> u64 {
        ceil_log2(self.nodes)
    }
}

/// `ceil(log2 p)` for `p >= 1`.
pub fn ceil_log2(p: usize) -> u64 {
    if p <= 1 {
        0
    } else {
        u64::from(usize::BITS - (p - 1).leading_zeros())
    }
}

/// Modeled and measured cost accumulators.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostLedger {
    pub beta: f64,
    pub depth: u64,
    /// Modeled computation units, per node.
    pub comp_units: Vec<f64>,
    /// Sum over calls of `len * ceil(log2 P)`.
    pub comm_hops: u64,
    pub allreduce_calls: u64,
    pub scalars_moved: u64,
    /// Length of every AllReduce, in call order.
    pub call_log: Vec<usize>,
    /// Measured compute seconds, per node.
    pub wall_comp_seconds: Vec<f64>,
    /// Sum over barriers of the slowest node's compute time.
    pub wall_comp_max_seconds: f64,
}

impl CostLedger {
    pub fn new(config: &ClusterConfig) -> Self {
        CostLedger {
            beta: config.beta,
            depth: config.tree_depth(),
            comp_units: vec![0.0; config.nodes],
            wall_comp_seconds: vec![0.0; config.nodes],
            ..Default::default()
        }
    }

    /// Modeled communication units so far.
    pub fn comm_units(&self) -> f64 {
        self.beta * self.comm_hops as f64
    }

    /// Modeled units for a span of hops, computed the same way as [`Self::comm_units`].
    pub fn units_for_hops(&self, hops: u64) -> f64 {
        self.beta * hops as f64
    }

    fn charge(&mut self, len: usize) {
        self.allreduce_calls += 1;
        self.scalars_moved += len as u64;
        self.comm_hops += len as u64 * self.depth;
        self.call_log.push(len);
    }

    pub fn add_comp(&mut self, per_node_units: f64) {
        for c in &mut self.comp_units {
            *c += per_node_units;
        }
    }
}

/// Node pool plus the cost ledger.
pub struct Cluster {
    config: ClusterConfig,
    pool: rayon::ThreadPool,
    pub ledger: CostLedger,
}

impl Cluster {
    pub fn new(config: ClusterConfig) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Cluster {
            ledger: CostLedger::new(&config),
            config,
            pool,
        })
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn nodes(&self) -> usize {
        self.config.nodes
    }

    /// Elementwise sum of one vector per node, replicated to all nodes.
    pub fn allreduce_sum<T: Scalar>(&mut self, per_node: Vec<Vec<T>>) -> Result<Vec<T>> {
        if per_node.len() != self.config.nodes {
            return Err(Error::Contract(format!(
                "allreduce over {} inputs on a {}-node cluster",
                per_node.len(),
                self.config.nodes
            )));
        }
        let len = per_node[0].len();
        if let Some(p) = per_node.iter().position(|v| v.len() != len) {
            return Err(Error::Contract(format!(
                "node {p} contributed {} entries, node 0 contributed {len}",
                per_node[p].len()
            )));
        }
        let out = tree_reduce(per_node);
        self.ledger.charge(len);
        Ok(out)
    }

    /// Scalar AllReduce.
    pub fn allreduce_scalar<T: Scalar>(&mut self, per_node: Vec<T>) -> Result<T> {
        let wrapped = per_node.into_iter().map(|v| vec![v]).collect();
        Ok(self.allreduce_sum(wrapped)?[0])
    }

    /// Runs one task per node to completion and returns results by node id.
    pub fn barrier_run<R, F>(&mut self, tasks: Vec<F>) -> Result<Vec<R>>
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        if tasks.is_empty() {
            return Err(Error::Contract("barrier with no tasks".into()));
        }
        if tasks.len() != self.config.nodes {
            return Err(Error::Contract(format!(
                "{} tasks for {} nodes",
                tasks.len(),
                self.config.nodes
            )));
        }
        let outcomes: Vec<(std::thread::Result<R>, f64)> = self.pool.install(|| {
            tasks
                .into_par_iter()
                .map(|task| {
                    let start = Instant::now();
                    let res = catch_unwind(AssertUnwindSafe(task));
                    (res, start.elapsed().as_secs_f64())
                })
                .collect()
        });
        let mut results = Vec::with_capacity(outcomes.len());
        let mut slowest = 0.0f64;
        for (node, (res, secs)) in outcomes.into_iter().enumerate() {
            self.ledger.wall_comp_seconds[node] += secs;
            slowest = slowest.max(secs);
            match res {
                Ok(r) => results.push(r),
                Err(payload) => {
                    let msg = payload
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| payload.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "unknown panic".into());
                    return Err(Error::NodePanic { node, msg });
                }
            }
        }
        self.ledger.wall_comp_max_seconds += slowest;
        Ok(results)
    }
}

/// Pairwise reduction by node id: level by level, `(0+1), (2+3), ...`, with
/// an odd trailing node carried up unchanged.
fn tree_reduce<T: Scalar>(mut level: Vec<Vec<T>>) -> Vec<T> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                for (a, b) in left.iter_mut().zip(right) {
                    *a += b;
                }
            }
            next.push(left);
        }
        level = next;
    }
    level.pop().unwrap_or_default()
}
