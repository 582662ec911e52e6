//! Comparison planners and a common entry point for all four.
//!
//! NVG treats every obstacle as static, BVG keeps the passage machinery but
//! drops mass weighting, and B-RRT samples through the margins of pushable
//! obstacles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PlanningParams;
use crate::geometry::{segment_enters_interior, Aabb, Point2, EPS};
use crate::planner::graph::{Edge, GraphNode, NodeKind, SemanticGraph};
use crate::planner::{
    build_graph, interpolate_waypoints, planning_bodies, search, EndpointPolicy, GraphParams,
    PassageMode, PlannerError, Waypoints,
};
use crate::scenario::{Obstacle, Scenario};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Nvg,
    Bvg,
    Brrt,
    #[default]
    Svg,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Nvg,
        PlannerKind::Bvg,
        PlannerKind::Brrt,
        PlannerKind::Svg,
    ];

    /// Name used in reports.
    pub fn label(self) -> &'static str {
        match self {
            PlannerKind::Nvg => "NVG",
            PlannerKind::Bvg => "BVG",
            PlannerKind::Brrt => "B-RRT",
            PlannerKind::Svg => "SVG",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            PlannerKind::Nvg => "nvg",
            PlannerKind::Bvg => "bvg",
            PlannerKind::Brrt => "brrt",
            PlannerKind::Svg => "svg",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nvg" => Ok(PlannerKind::Nvg),
            "bvg" => Ok(PlannerKind::Bvg),
            "brrt" | "b-rrt" => Ok(PlannerKind::Brrt),
            "svg" => Ok(PlannerKind::Svg),
            other => Err(format!(
                "unknown planner `{other}` (expected nvg, bvg, brrt or svg)"
            )),
        }
    }
}

pub fn build_nvg(
    obstacles: &[Obstacle],
    start: Point2,
    goal: Point2,
    r: f64,
) -> Result<SemanticGraph, PlannerError> {
    let params = GraphParams {
        passages: PassageMode::None,
        ..GraphParams::svg(r, f64::INFINITY)
    };
    build_graph(obstacles, start, goal, &params)
}

pub fn build_bvg(
    obstacles: &[Obstacle],
    start: Point2,
    goal: Point2,
    r: f64,
    max_mass: f64,
) -> Result<SemanticGraph, PlannerError> {
    let params = GraphParams {
        passages: PassageMode::Binary,
        ..GraphParams::svg(r, max_mass)
    };
    build_graph(obstacles, start, goal, &params)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrrtParams {
    /// Steering step, m.
    pub step: f64,
    /// Probability of sampling the goal.
    pub goal_bias: f64,
    pub max_iterations: usize,
    /// Greedy shortcutting of the raw tree path.
    pub shortcut: bool,
}

impl Default for BrrtParams {
    fn default() -> Self {
        BrrtParams {
            step: 0.3,
            goal_bias: 0.1,
            max_iterations: 20_000,
            shortcut: true,
        }
    }
}

/// Tree and path from one B-RRT query.
#[derive(Clone, Debug, PartialEq)]
pub struct BrrtResult {
    /// The tree as a graph; `goal_id` is the goal node.
    pub tree: SemanticGraph,
    pub path: Vec<Point2>,
    pub iterations: usize,
}

struct Blockers {
    polys: Vec<(crate::geometry::Polygon, Aabb)>,
    /// Non-movable bodies whose margin holds the start; edges leaving the
    /// start node only test their bare hull.
    start_hulls: Vec<(usize, crate::geometry::Polygon, Aabb)>,
}

impl Blockers {
    fn point_ok(&self, p: Point2) -> bool {
        !self
            .polys
            .iter()
            .any(|(poly, bb)| bb.contains(p) && poly.contains_strict(p))
    }

    fn segment_ok(&self, a: Point2, b: Point2, from_start: bool) -> bool {
        let seg = Aabb::from_points(&[a, b]);
        self.polys.iter().enumerate().all(|(k, (poly, bb))| {
            let (poly, bb) = match self
                .start_hulls
                .iter()
                .find(|(i, _, _)| from_start && *i == k)
            {
                Some((_, hull, hb)) => (hull, hb),
                None => (poly, bb),
            };
            !bb.overlaps(&seg, EPS) || !segment_enters_interior(a, b, poly)
        })
    }
}

/// Binary-movability RRT: only the inflated footprints of non-movable
/// obstacles block; pushable obstacles are permeable and carry no cost.
#[allow(clippy::too_many_arguments)]
pub fn build_brrt(
    obstacles: &[Obstacle],
    start: Point2,
    goal: Point2,
    r: f64,
    max_mass: f64,
    seed: u64,
    params: &BrrtParams,
    endpoints: EndpointPolicy,
) -> Result<BrrtResult, PlannerError> {
    let bodies = planning_bodies(obstacles, r, max_mass, false);
    let mut blockers = Blockers {
        polys: Vec::new(),
        start_hulls: Vec::new(),
    };
    for b in bodies.iter().filter(|b| !b.movable) {
        let k = blockers.polys.len();
        for (p, which) in [(start, "start"), (goal, "goal")] {
            if b.inflated.contains_strict(p) {
                let relaxed_ok = endpoints == EndpointPolicy::Relaxed && !b.hull.contains_strict(p);
                if !relaxed_ok || which == "goal" {
                    return Err(PlannerError::StartOrGoalBlocked {
                        which,
                        obstacle: b.id.clone(),
                    });
                }
                blockers
                    .start_hulls
                    .push((k, b.hull.clone(), b.hull.aabb()));
            }
        }
        blockers.polys.push((b.inflated.clone(), b.inflated.aabb()));
    }

    let (lo, hi) = bounds(obstacles, start, goal);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![start];
    let mut parent = vec![usize::MAX];
    let mut reached = None;

    if blockers.segment_ok(start, goal, true) && start.dist(goal) <= params.step {
        pts.push(goal);
        parent.push(0);
        reached = Some(1);
    }
    let mut iterations = 0;
    while reached.is_none() && iterations < params.max_iterations {
        iterations += 1;
        let sample = if rng.random::<f64>() < params.goal_bias {
            goal
        } else {
            Point2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y))
        };
        let (near, d) = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.dist(sample)))
            .fold(
                (0, f64::INFINITY),
                |best, c| if c.1 < best.1 { c } else { best },
            );
        if d <= EPS {
            continue;
        }
        let from = pts[near];
        let new = if d <= params.step {
            sample
        } else {
            from.lerp(sample, params.step / d)
        };
        if !blockers.point_ok(new) || !blockers.segment_ok(from, new, near == 0) {
            continue;
        }
        pts.push(new);
        parent.push(near);
        let id = pts.len() - 1;
        if new.dist(goal) <= params.step && blockers.segment_ok(new, goal, false) {
            if new.dist(goal) > EPS {
                pts.push(goal);
                parent.push(id);
            }
            reached = Some(pts.len() - 1);
        }
    }
    let Some(goal_id) = reached else {
        return Err(PlannerError::NoPathFound(iterations));
    };

    let mut chain = vec![goal_id];
    while parent[*chain.last().unwrap()] != usize::MAX {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let mut path: Vec<Point2> = chain.iter().map(|&i| pts[i]).collect();
    if params.shortcut {
        path = shortcut(&path, &blockers);
    }

    let nodes = pts
        .iter()
        .enumerate()
        .map(|(id, &position)| GraphNode {
            id,
            position,
            kind: NodeKind::Free,
            node_cost: 0.0,
            passage: None,
        })
        .collect();
    let edges = (1..pts.len())
        .map(|b| Edge {
            a: parent[b],
            b,
            length: pts[parent[b]].dist(pts[b]),
        })
        .collect();
    Ok(BrrtResult {
        tree: SemanticGraph::new(nodes, edges, 0, goal_id),
        path,
        iterations,
    })
}

/// From each kept point, jump to the farthest later point still reachable
/// in a straight line.
fn shortcut(path: &[Point2], blockers: &Blockers) -> Vec<Point2> {
    let mut out = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let mut j = path.len() - 1;
        while j > i + 1 && !blockers.segment_ok(path[i], path[j], i == 0) {
            j -= 1;
        }
        out.push(path[j]);
        i = j;
    }
    out
}

/// Sampling box: the room interior when walls are present, otherwise the
/// obstacles' extent.
fn bounds(obstacles: &[Obstacle], start: Point2, goal: Point2) -> (Point2, Point2) {
    let walls: Vec<Point2> = obstacles
        .iter()
        .filter(|o| o.fixed)
        .flat_map(|o| o.world_polygon().vertices().to_vec())
        .collect();
    let mut all = walls;
    if all.is_empty() {
        all = obstacles
            .iter()
            .flat_map(|o| o.world_polygon().vertices().to_vec())
            .collect();
    }
    all.push(start);
    all.push(goal);
    let bb = Aabb::from_points(&all);
    let pad = if obstacles.iter().any(|o| o.fixed) {
        0.0
    } else {
        1.0
    };
    (
        Point2::new(bb.min.x - pad, bb.min.y - pad),
        Point2::new(bb.max.x + pad, bb.max.y + pad),
    )
}

/// What any planner hands to the controller.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub kind: PlannerKind,
    /// Search graph (the tree for B-RRT).
    pub graph: SemanticGraph,
    /// Corner points of the chosen route.
    pub route: Vec<Point2>,
    pub waypoints: Waypoints,
}

/// Graph construction settings for the visibility-graph planners; `None`
/// for B-RRT.
pub fn graph_params(
    kind: PlannerKind,
    planning: &PlanningParams,
    endpoints: EndpointPolicy,
) -> Option<GraphParams> {
    let passages = match kind {
        PlannerKind::Nvg => PassageMode::None,
        PlannerKind::Bvg => PassageMode::Binary,
        PlannerKind::Svg => PassageMode::Semantic,
        PlannerKind::Brrt => return None,
    };
    Some(GraphParams {
        r: planning.r,
        max_mass: planning.max_mass,
        passages,
        endpoints,
    })
}

/// Plans from `start` to the scenario goal over the scenario's current
/// poses and beliefs.
pub fn plan(
    kind: PlannerKind,
    scenario: &Scenario,
    start: Point2,
    planning: &PlanningParams,
    brrt: &BrrtParams,
    seed: u64,
    endpoints: EndpointPolicy,
) -> Result<Plan, PlannerError> {
    let bodies = scenario.bodies();
    let goal = scenario.goal;
    let Some(params) = graph_params(kind, planning, endpoints) else {
        let res = build_brrt(
            &bodies,
            start,
            goal,
            planning.r,
            planning.max_mass,
            seed,
            brrt,
            endpoints,
        )?;
        return Ok(Plan {
            kind,
            waypoints: interpolate_waypoints(&res.path, planning.spacing),
            route: res.path,
            graph: res.tree,
        });
    };
    let graph = build_graph(&bodies, start, goal, &params)?;
    let path = search(&graph).ok_or(PlannerError::GoalUnreachable)?;
    Ok(Plan {
        kind,
        waypoints: interpolate_waypoints(&path.positions, planning.spacing),
        route: path.positions,
        graph,
    })
}
