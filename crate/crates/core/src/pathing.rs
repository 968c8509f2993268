//! Load-aware link weights and next-hop selection.
//!
//! The weight of the directed link `i → j` is `d(i,j)²/D² + f(j)/F`, where `D` is
//! the mean pairwise distance, `f(j)` the bits queued at `j`, and `F` the mean
//! queue. Routes are recomputed every superframe and only the first hop is used.

use crate::error::{Error, Result};
use crate::geometry::NodeLayout;
use crate::scalar::Scalar;

/// Per-node queued bits snapshot plus the network averages used for normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadTable<S> {
    load_per_node: Vec<S>,
    avg_load: S,
    avg_distance: S,
}

impl<S: Scalar> LoadTable<S> {
    pub fn new(load_per_node: Vec<S>, layout: &NodeLayout<S>) -> Self {
        let avg_load = if load_per_node.is_empty() {
            S::zero()
        } else {
            load_per_node.iter().fold(S::zero(), |a, &b| a + b) / S::from_count(load_per_node.len())
        };
        LoadTable {
            load_per_node,
            avg_load,
            avg_distance: layout.mean_pair_distance(),
        }
    }

    pub fn zero(layout: &NodeLayout<S>) -> Self {
        Self::new(vec![S::zero(); layout.len()], layout)
    }

    pub fn load(&self, node: usize) -> S {
        self.load_per_node[node]
    }

    pub fn loads(&self) -> &[S] {
        &self.load_per_node
    }

    pub fn avg_load(&self) -> S {
        self.avg_load
    }

    pub fn avg_distance(&self) -> S {
        self.avg_distance
    }
}

pub fn link_weight<S: Scalar>(dist: S, avg_distance: S, dest_load: S, avg_load: S) -> Result<S> {
    if avg_distance.is_nan() || avg_distance <= S::zero() {
        return Err(Error::NonPositiveAverageDistance(avg_distance.as_f64()));
    }
    let distance_term = (dist * dist) / (avg_distance * avg_distance);
    let load_term = if avg_load > S::zero() {
        dest_load / avg_load
    } else {
        S::zero()
    };
    Ok(distance_term + load_term)
}

/// Dense directed weight matrix; the diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<S> {
    n: usize,
    weights: Vec<S>,
}

impl<S: Scalar> WeightedGraph<S> {
    /// Wraps a row-major `n × n` matrix. Negative or non-finite off-diagonal entries are rejected.
    pub fn from_matrix(n: usize, weights: Vec<S>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::Invalid(format!(
                "expected {} weights, got {}",
                n * n,
                weights.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if i != j && !(w >= S::zero() && w.is_finite()) {
                    return Err(Error::Invalid(format!("weight {i}->{j} is {w}")));
                }
            }
        }
        Ok(WeightedGraph { n, weights })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> S {
        self.weights[i * self.n + j]
    }

    fn check(&self, node: usize) -> Result<()> {
        if node < self.n {
            Ok(())
        } else {
            Err(Error::UnknownNode { node, count: self.n })
        }
    }
}

pub fn build_graph<S: Scalar>(layout: &NodeLayout<S>, loads: &LoadTable<S>) -> WeightedGraph<S> {
    let n = layout.len();
    let mut weights = vec![S::zero(); n * n];
    // all-coincident layouts have D = 0; every distance is 0 there, so unit normalization is exact
    let avg_distance = if loads.avg_distance() > S::zero() {
        loads.avg_distance()
    } else {
        S::one()
    };
    for i in 0..n {
        for j in 0..n {
            if i != j {
                weights[i * n + j] = link_weight(layout.distance(i, j), avg_distance, loads.load(j), loads.avg_load())
                    .expect("positive average distance");
            }
        }
    }
    WeightedGraph { n, weights }
}

/// Shortest-path tree rooted at one destination, computed on reversed edges.
///
/// Ties are broken toward the smallest node id, both when picking the next
/// node to settle and when choosing a successor.
#[derive(Debug, Clone)]
pub struct PathTree<S> {
    destination: usize,
    cost: Vec<S>,
    successor: Vec<usize>,
}

impl<S: Scalar> PathTree<S> {
    pub fn toward(graph: &WeightedGraph<S>, destination: usize) -> Result<Self> {
        graph.check(destination)?;
        let n = graph.len();
        let mut cost = vec![S::infinity(); n];
        let mut successor = vec![usize::MAX; n];
        let mut settled = vec![false; n];
        cost[destination] = S::zero();
        successor[destination] = destination;
        for _ in 0..n {
            let mut best: Option<usize> = None;
            for v in 0..n {
                if settled[v] || cost[v].is_infinite() {
                    continue;
                }
                if best.is_none_or(|b| cost[v] < cost[b]) {
                    best = Some(v);
                }
            }
            let Some(u) = best else { break };
            settled[u] = true;
            for v in 0..n {
                if settled[v] || v == u {
                    continue;
                }
                let candidate = cost[u] + graph.weight(v, u);
                if candidate < cost[v] || (candidate == cost[v] && u < successor[v]) {
                    cost[v] = candidate;
                    successor[v] = u;
                }
            }
        }
        Ok(PathTree {
            destination,
            cost,
            successor,
        })
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    /// Total weight of the shortest path from `src` to the destination.
    pub fn cost(&self, src: usize) -> S {
        self.cost[src]
    }

    pub fn next_hop(&self, src: usize) -> Result<usize> {
        if src == self.destination {
            return Err(Error::SameEndpoints(src));
        }
        match self.successor.get(src) {
            Some(&hop) if hop != usize::MAX => Ok(hop),
            Some(_) => Err(Error::Invalid(format!("no path from {src} to {}", self.destination))),
            None => Err(Error::UnknownNode {
                node: src,
                count: self.successor.len(),
            }),
        }
    }

    /// Full node sequence from `src` to the destination.
    pub fn path(&self, src: usize) -> Result<Vec<usize>> {
        let mut path = vec![src];
        let mut at = src;
        while at != self.destination {
            at = self.next_hop(at)?;
            path.push(at);
            if path.len() > self.successor.len() {
                return Err(Error::Invalid("successor cycle".into()));
            }
        }
        Ok(path)
    }
}

/// First hop on a minimum-weight path from `src` to `dst`.
pub fn next_hop<S: Scalar>(graph: &WeightedGraph<S>, src: usize, dst: usize) -> Result<usize> {
    if src == dst {
        return Err(Error::SameEndpoints(src));
    }
    graph.check(src)?;
    PathTree::toward(graph, dst)?.next_hop(src)
}
