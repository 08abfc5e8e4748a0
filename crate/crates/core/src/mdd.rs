//! Multi-valued decision diagrams and the analytic bounds on their size.
//!
//! Layer `t` of the MDD for `(start, goal, C)` holds every cell `v` with
//! `dist(start, v) <= t` and `dist(v, goal) <= C - t`. Waits are allowed, so
//! a cell present in consecutive layers carries a self-edge.

use serde::Serialize;
use thiserror::Error;

use crate::model::{distance_map, Cell, GridMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MddError {
    #[error("goal {goal} is unreachable from {start}")]
    Unreachable { start: Cell, goal: Cell },

    #[error("infeasible cost {cost}: shortest distance is {distance}")]
    InfeasibleCost { cost: usize, distance: usize },

    #[error("{0} is out of bounds or blocked")]
    InvalidCell(Cell),
}

/// The layered reachability graph of one agent at a fixed cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdd {
    cost: usize,
    layers: Vec<Vec<Cell>>,
    /// `edges[t]` lists `(i, j)`: node `i` of layer `t` to node `j` of layer `t + 1`.
    edges: Vec<Vec<(usize, usize)>>,
}

/// Node and edge counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MddSize {
    pub nodes: usize,
    pub edges: usize,
}

/// Builds the MDD of `start -> goal` at cost `cost`.
pub fn build_mdd(map: &GridMap, start: Cell, goal: Cell, cost: usize) -> Result<Mdd, MddError> {
    for cell in [start, goal] {
        if !map.is_passable(cell) {
            return Err(MddError::InvalidCell(cell));
        }
    }
    let from_start = distance_map(map, start);
    let to_goal = distance_map(map, goal);
    let distance = from_start[map.index(goal)].ok_or(MddError::Unreachable { start, goal })?;
    if cost < distance {
        return Err(MddError::InfeasibleCost { cost, distance });
    }

    let layers: Vec<Vec<Cell>> = (0..=cost)
        .map(|t| {
            map.cells()
                .filter(|&v| {
                    let i = map.index(v);
                    matches!((from_start[i], to_goal[i]), (Some(a), Some(b)) if a <= t && b <= cost - t)
                })
                .collect()
        })
        .collect();

    let edges = layers
        .windows(2)
        .map(|pair| {
            let mut out = Vec::new();
            for (i, &u) in pair[0].iter().enumerate() {
                for (j, &v) in pair[1].iter().enumerate() {
                    if u == v || u.is_adjacent(v) {
                        out.push((i, j));
                    }
                }
            }
            out
        })
        .collect();

    Ok(Mdd {
        cost,
        layers,
        edges,
    })
}

impl Mdd {
    pub fn cost(&self) -> usize {
        self.cost
    }

    pub fn layers(&self) -> &[Vec<Cell>] {
        &self.layers
    }

    pub fn layer(&self, t: usize) -> &[Cell] {
        &self.layers[t]
    }

    /// Edges from layer `t` to layer `t + 1` as node-index pairs.
    pub fn edges(&self, t: usize) -> &[(usize, usize)] {
        &self.edges[t]
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn contains(&self, t: usize, cell: Cell) -> bool {
        self.layers.get(t).is_some_and(|l| l.binary_search(&cell).is_ok())
    }

    /// Exact `(M, E)`.
    pub fn size(&self) -> MddSize {
        MddSize {
            nodes: self.layers.iter().map(Vec::len).sum(),
            edges: self.edges.iter().map(Vec::len).sum(),
        }
    }

    /// Constraints that can target this agent: nodes, plus edges if asked.
    pub fn constraint_space_size(&self, include_edges: bool) -> usize {
        let MddSize { nodes, edges } = self.size();
        if include_edges {
            nodes + edges
        } else {
            nodes
        }
    }
}

/// Which analytic argument produced a node-count bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    AnalyticGrid,
    RadiusBased,
    WithEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MddSizeBound {
    pub cost: u64,
    pub value: u128,
    pub variant: BoundVariant,
}

/// Cells at distance `1..=t` from a point of the infinite grid: `2t(t+1)`.
/// The point itself is not counted.
pub fn layer_bound(t: u64) -> u128 {
    let t = t as u128;
    2 * t * (t + 1)
}

/// `(C^3 + 6C^2 + 8C) / 6` for even `C`; odd `C` uses `C - 1` plus one
/// middle layer of `layer_bound(ceil(C/2))`.
pub fn analytic_size_bound(cost: u64) -> MddSizeBound {
    let even = |c: u128| (c * c * c + 6 * c * c + 8 * c) / 6;
    let c = cost as u128;
    let value = if cost.is_multiple_of(2) {
        even(c)
    } else {
        even(c - 1) + layer_bound(cost.div_ceil(2))
    };
    MddSizeBound {
        cost,
        value,
        variant: BoundVariant::AnalyticGrid,
    }
}

/// `delta * n + (4/3) r (r+1) (r+2)` for `C = 2r + delta`, rounded up.
pub fn radius_size_bound(radius: u64, delta: u64, n: u64) -> MddSizeBound {
    let r = radius as u128;
    let cubic = 4 * r * (r + 1) * (r + 2);
    let value = delta as u128 * n as u128 + cubic.div_ceil(3);
    MddSizeBound {
        cost: 2 * radius + delta,
        value,
        variant: BoundVariant::RadiusBased,
    }
}

/// Nodes plus at most five out-edges per node (four moves and a wait).
pub fn with_edges_bound(node_bound: MddSizeBound) -> MddSizeBound {
    MddSizeBound {
        cost: node_bound.cost,
        value: 6 * node_bound.value,
        variant: BoundVariant::WithEdges,
    }
}
