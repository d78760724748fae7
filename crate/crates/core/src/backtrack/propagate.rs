//! Source fractions and accumulated head by upstream-to-downstream
//! propagation over a [`FlowSnapshot`].
//!
//! Both quantities obey the same mixing balance at every node that is not an
//! active source,
//!
//! ```text
//! Q_j y_j - sum_k Q_kj y_k = b_j
//! ```
//!
//! with `y = r` (`b = 0`, `r = 1` at the source itself) for the fractions and
//! `y = r * H` (`b = sum_k Q_kj r_k h_kj`, zero at sources) for the head.
//! When the flow graph is acyclic the balance is evaluated in topological
//! order; otherwise the same equations are solved as one dense linear system.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use thiserror::Error;

use super::snapshot::FlowSnapshot;

/// Row sums of the fractions must be within this of one.
const TRACE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PropagationError {
    #[error("node {node} receives water that cannot be traced to any source")]
    Untraceable { node: usize },
    #[error("flow cycle through nodes {nodes:?} has no source inflow")]
    SingularCycle { nodes: Vec<usize> },
}

/// `r[s][j]`: share of the water at node `j` that left source `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionMatrix {
    pub n_sources: usize,
    pub n_nodes: usize,
    values: Vec<f64>,
}

impl FractionMatrix {
    pub fn get(&self, source: usize, node: usize) -> f64 {
        self.values[source * self.n_nodes + node]
    }

    pub fn node_sum(&self, node: usize) -> f64 {
        (0..self.n_sources).map(|s| self.get(s, node)).sum()
    }

    /// Fractions of every source at `node`.
    pub fn at(&self, node: usize) -> Vec<f64> {
        (0..self.n_sources).map(|s| self.get(s, node)).collect()
    }
}

/// `H[s][j]`: flow-weighted head spent by water travelling from source `s`
/// to node `j`, m. `None` where `s` delivers nothing to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadMatrix {
    pub n_sources: usize,
    pub n_nodes: usize,
    values: Vec<Option<f64>>,
}

impl HeadMatrix {
    pub fn get(&self, source: usize, node: usize) -> Option<f64> {
        self.values[source * self.n_nodes + node]
    }
}

/// Evaluation order of a snapshot's nodes, or the nodes left over when the
/// flow graph has a directed cycle.
#[derive(Debug, Clone, PartialEq)]
pub enum PropagationOrder {
    Topological(Vec<usize>),
    Cyclic(Vec<usize>),
}

pub fn propagation_order(snap: &FlowSnapshot) -> PropagationOrder {
    let n = snap.n_nodes;
    let is_source: Vec<bool> = (0..n).map(|j| snap.active_source_at(j).is_some()).collect();
    let mut indegree = vec![0usize; n];
    let mut outgoing = vec![Vec::new(); n];
    for e in &snap.edges {
        // water entering an active source stops there
        if is_source[e.to] {
            continue;
        }
        indegree[e.to] += 1;
        outgoing[e.from].push(e.to);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = queue.pop_front() {
        order.push(j);
        for &k in &outgoing[j] {
            indegree[k] -= 1;
            if indegree[k] == 0 {
                queue.push_back(k);
            }
        }
    }
    if order.len() == n {
        PropagationOrder::Topological(order)
    } else {
        PropagationOrder::Cyclic((0..n).filter(|&j| indegree[j] > 0).collect())
    }
}

/// Solves the mixing balance for every source at once. Returns `y[s * n + j]`.
fn solve_balance(
    snap: &FlowSnapshot,
    order: &PropagationOrder,
    boundary: impl Fn(usize, usize) -> f64,
    rhs: impl Fn(usize, usize) -> f64,
) -> Result<Vec<f64>, PropagationError> {
    let n = snap.n_nodes;
    let ns = snap.n_sources();
    let mut y = vec![0.0; ns * n];
    match order {
        PropagationOrder::Topological(order) => {
            for &j in order {
                if snap.active_source_at(j).is_some() {
                    for s in 0..ns {
                        y[s * n + j] = boundary(s, j);
                    }
                } else if snap.inflow[j] > 0.0 {
                    for s in 0..ns {
                        let upstream: f64 = snap
                            .incoming(j)
                            .iter()
                            .map(|&e| {
                                let edge = &snap.edges[e];
                                edge.flow * y[s * n + edge.from]
                            })
                            .sum();
                        y[s * n + j] = (upstream + rhs(s, j)) / snap.inflow[j];
                    }
                }
            }
        }
        PropagationOrder::Cyclic(cycle) => {
            let mut slot = vec![usize::MAX; n];
            let unknowns: Vec<usize> = (0..n)
                .filter(|&j| snap.active_source_at(j).is_none() && snap.inflow[j] > 0.0)
                .collect();
            for (u, &j) in unknowns.iter().enumerate() {
                slot[j] = u;
            }
            for j in 0..n {
                if snap.active_source_at(j).is_some() {
                    for s in 0..ns {
                        y[s * n + j] = boundary(s, j);
                    }
                }
            }
            let m = unknowns.len();
            let mut a = DMatrix::<f64>::zeros(m, m);
            let mut b = DMatrix::<f64>::zeros(m, ns);
            for (u, &j) in unknowns.iter().enumerate() {
                a[(u, u)] += snap.inflow[j];
                for s in 0..ns {
                    b[(u, s)] = rhs(s, j);
                }
                for &e in snap.incoming(j) {
                    let edge = &snap.edges[e];
                    if slot[edge.from] != usize::MAX {
                        a[(u, slot[edge.from])] -= edge.flow;
                    } else {
                        for s in 0..ns {
                            b[(u, s)] += edge.flow * y[s * n + edge.from];
                        }
                    }
                }
            }
            let x = a
                .lu()
                .solve(&b)
                .filter(|x| x.iter().all(|v| v.is_finite()))
                .ok_or_else(|| PropagationError::SingularCycle { nodes: cycle.clone() })?;
            for (u, &j) in unknowns.iter().enumerate() {
                for s in 0..ns {
                    y[s * n + j] = x[(u, s)];
                }
            }
        }
    }
    Ok(y)
}

/// Perfect-mixing source fractions at every node.
pub fn solve_fractions(snap: &FlowSnapshot, order: &PropagationOrder) -> Result<FractionMatrix, PropagationError> {
    let sources = &snap.source_nodes;
    let mut values = solve_balance(
        snap,
        order,
        |s, j| if sources[s] == j { 1.0 } else { 0.0 },
        |_, _| 0.0,
    )?;
    if matches!(order, PropagationOrder::Cyclic(_)) {
        // round-off from the dense solve
        for v in &mut values {
            if v.abs() < 1e-14 {
                *v = 0.0;
            }
        }
    }
    let r = FractionMatrix {
        n_sources: snap.n_sources(),
        n_nodes: snap.n_nodes,
        values,
    };
    for j in 0..snap.n_nodes {
        if snap.inflow[j] > 0.0
            && snap.active_source_at(j).is_none()
            && (r.node_sum(j) - 1.0).abs() > TRACE_TOLERANCE
        {
            return Err(match order {
                PropagationOrder::Cyclic(nodes) if nodes.contains(&j) => {
                    PropagationError::SingularCycle { nodes: nodes.clone() }
                }
                _ => PropagationError::Untraceable { node: j },
            });
        }
    }
    Ok(r)
}

/// Flow-weighted cumulative head from each source to each node.
pub fn solve_head_accumulation(
    snap: &FlowSnapshot,
    order: &PropagationOrder,
    r: &FractionMatrix,
) -> Result<HeadMatrix, PropagationError> {
    let z = solve_balance(
        snap,
        order,
        |_, _| 0.0,
        |s, j| {
            snap.incoming(j)
                .iter()
                .map(|&e| {
                    let edge = &snap.edges[e];
                    edge.flow * r.get(s, edge.from) * edge.head
                })
                .sum()
        },
    )?;
    let n = snap.n_nodes;
    let values = (0..snap.n_sources() * n)
        .map(|i| {
            let share = r.values[i];
            if share > 0.0 {
                Some((z[i] / share).max(0.0))
            } else {
                None
            }
        })
        .collect();
    Ok(HeadMatrix {
        n_sources: snap.n_sources(),
        n_nodes: n,
        values,
    })
}
