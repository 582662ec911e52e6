//! Weighted undirected graph with per-node effort costs, and A* over it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::passage::BoundaryKind;
use crate::geometry::Point2;

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Free,
    Passage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassageMeta {
    pub obstacles: (String, String),
    pub boundary: Option<BoundaryKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: NodeId,
    pub position: Point2,
    pub kind: NodeKind,
    pub node_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passage: Option<PassageMeta>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemanticGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    pub start_id: NodeId,
    pub goal_id: NodeId,
    #[serde(skip)]
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl SemanticGraph {
    pub fn new(nodes: Vec<GraphNode>, edges: Vec<Edge>, start_id: NodeId, goal_id: NodeId) -> Self {
        let mut g = SemanticGraph {
            nodes,
            edges,
            start_id,
            goal_id,
            adjacency: Vec::new(),
        };
        g.rebuild_adjacency();
        g
    }

    /// Re-derives neighbor lists, e.g. after deserializing a dump.
    pub fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length));
            adj[e.b].push((e.a, e.length));
        }
        self.adjacency = adj;
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[id]
    }

    pub fn passage_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Passage)
            .count()
    }

    /// Σ edge lengths + Σ node costs along `path`.
    pub fn path_cost(&self, path: &[NodeId]) -> f64 {
        let edges: f64 = path
            .windows(2)
            .map(|w| self.nodes[w[0]].position.dist(self.nodes[w[1]].position))
            .sum();
        let nodes: f64 = path.iter().map(|&n| self.nodes[n].node_cost).sum();
        edges + nodes
    }

    pub fn positions(&self, path: &[NodeId]) -> Vec<Point2> {
        path.iter().map(|&n| self.nodes[n].position).collect()
    }

    /// Copy with every node cost zeroed.
    pub fn without_node_costs(&self) -> SemanticGraph {
        let mut g = self.clone();
        for n in &mut g.nodes {
            n.node_cost = 0.0;
        }
        g
    }
}

#[derive(Clone, Copy, Debug)]
struct Frontier {
    f: f64,
    h: f64,
    id: NodeId,
}

impl PartialEq for Frontier {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Frontier {
    // BinaryHeap is a max-heap: reverse everything so the smallest
    // (f, h, id) pops first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f)
            .then(o.h.total_cmp(&self.h))
            .then(o.id.cmp(&self.id))
    }
}

/// Lowest-cost start→goal path, charging edge lengths plus the cost of
/// every node entered. Euclidean distance to the goal is admissible since
/// node costs are non-negative.
pub fn astar(graph: &SemanticGraph) -> Option<Vec<NodeId>> {
    let n = graph.nodes.len();
    let goal = graph.goal_id;
    let goal_pos = graph.nodes[goal].position;
    let h = |id: NodeId| graph.nodes[id].position.dist(goal_pos);
    let mut g_score = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g_score[graph.start_id] = graph.nodes[graph.start_id].node_cost;
    open.push(Frontier {
        f: g_score[graph.start_id] + h(graph.start_id),
        h: h(graph.start_id),
        id: graph.start_id,
    });
    while let Some(Frontier { id, .. }) = open.pop() {
        if closed[id] {
            continue;
        }
        if id == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        closed[id] = true;
        for &(next, len) in graph.neighbors(id) {
            if closed[next] {
                continue;
            }
            let tentative = g_score[id] + len + graph.nodes[next].node_cost;
            if tentative < g_score[next] {
                g_score[next] = tentative;
                parent[next] = id;
                let hn = h(next);
                open.push(Frontier {
                    f: tentative + hn,
                    h: hn,
                    id: next,
                });
            }
        }
    }
    None
}
