//! Semantic visibility graph planning.
//!
//! The graph holds inflated-hull corners (free nodes), start and goal, and
//! passage nodes inside narrow gaps next to pushable obstacles. Passage
//! nodes carry the manipulation effort of reaching them; A* minimizes
//! travel distance plus that effort.

pub mod graph;
pub mod passage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{inflate, segment_enters_interior, Aabb, Point2, Polygon, EPS};
use crate::scenario::{Obstacle, Scenario};
pub use graph::{astar, Edge, GraphNode, NodeId, NodeKind, PassageMeta, SemanticGraph};
pub use passage::{
    construct_passage, interpolate_node, interpolation_factor, passage_cost, passage_node_cost,
    BoundaryKind, Interpolation, PassageBoundary, PassageLayout, PassageSide,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("{which} lies inside inflated non-movable obstacle {obstacle}")]
    StartOrGoalBlocked {
        which: &'static str,
        obstacle: String,
    },
    #[error("goal unreachable")]
    GoalUnreachable,
    #[error("no path found after {0} iterations")]
    NoPathFound(usize),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Which passage nodes the graph receives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PassageMode {
    /// Plain visibility graph; every obstacle is static.
    None,
    /// Passage nodes at boundary midpoints with zero cost.
    Binary,
    /// Mass-interpolated passage nodes with effort costs.
    Semantic,
}

/// How start and goal are checked against obstacle margins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointPolicy {
    /// Inside any inflated non-movable obstacle is an error.
    Strict,
    /// Only inside a non-movable hull is an error (replanning from a robot
    /// that is touching an obstacle).
    Relaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub r: f64,
    pub max_mass: f64,
    pub passages: PassageMode,
    pub endpoints: EndpointPolicy,
}

impl GraphParams {
    pub fn svg(r: f64, max_mass: f64) -> Self {
        GraphParams {
            r,
            max_mass,
            passages: PassageMode::Semantic,
            endpoints: EndpointPolicy::Strict,
        }
    }
}

/// Planning view of one obstacle.
#[derive(Clone, Debug)]
pub struct PlanningBody {
    pub id: String,
    pub hull: Polygon,
    pub inflated: Polygon,
    pub mass: f64,
    pub movable: bool,
    hull_box: Aabb,
    inflated_box: Aabb,
}

pub fn planning_bodies(
    obstacles: &[Obstacle],
    r: f64,
    max_mass: f64,
    all_static: bool,
) -> Vec<PlanningBody> {
    obstacles
        .iter()
        .map(|o| {
            let hull = o.world_hull();
            let inflated = inflate(&hull, r).expect("hulls are convex");
            PlanningBody {
                id: o.id.clone(),
                hull_box: hull.aabb(),
                inflated_box: inflated.aabb(),
                hull,
                inflated,
                mass: o.planning_mass(max_mass),
                movable: !all_static && o.movable_believed(max_mass),
            }
        })
        .collect()
}

/// Unordered pairs closer than `2r` with at least one pushable member.
pub fn find_passage_pairs(obstacles: &[Obstacle], r: f64, max_mass: f64) -> Vec<(usize, usize)> {
    let bodies = planning_bodies(obstacles, r, max_mass, false);
    passage_pairs(&bodies, r)
}

fn passage_pairs(bodies: &[PlanningBody], r: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..bodies.len() {
        for j in (i + 1)..bodies.len() {
            let (a, b) = (&bodies[i], &bodies[j]);
            if !a.hull_box.overlaps(&b.hull_box, 2.0 * r) {
                continue;
            }
            if passage::qualifies(&a.hull, &b.hull, a.movable, b.movable, r) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Builds the graph over `obstacles` (walls included by the caller).
pub fn build_graph(
    obstacles: &[Obstacle],
    start: Point2,
    goal: Point2,
    params: &GraphParams,
) -> Result<SemanticGraph, PlannerError> {
    let all_static = params.passages == PassageMode::None;
    let bodies = planning_bodies(obstacles, params.r, params.max_mass, all_static);

    let mut nodes: Vec<GraphNode> = Vec::new();
    // obstacles whose inflation a node may sit in; segments from that node
    // are checked against those obstacles' bare hulls instead
    let mut exempt: Vec<Vec<usize>> = Vec::new();

    for (p, which) in [(start, "start"), (goal, "goal")] {
        let mut ex = Vec::new();
        for (k, b) in bodies.iter().enumerate() {
            if !b.inflated.contains_strict(p) {
                continue;
            }
            let blocked = match params.endpoints {
                EndpointPolicy::Strict => !b.movable,
                EndpointPolicy::Relaxed => !b.movable && b.hull.contains_strict(p),
            };
            if blocked {
                return Err(PlannerError::StartOrGoalBlocked {
                    which,
                    obstacle: b.id.clone(),
                });
            }
            ex.push(k);
        }
        nodes.push(GraphNode {
            id: nodes.len(),
            position: p,
            kind: NodeKind::Free,
            node_cost: 0.0,
            passage: None,
        });
        exempt.push(ex);
    }
    let (start_id, goal_id) = (0, 1);

    let inside_other = |p: Point2, skip: &[usize]| {
        bodies
            .iter()
            .enumerate()
            .any(|(k, b)| !skip.contains(&k) && b.inflated.contains_strict(p))
    };

    // wall corners all lie outside the room
    for (k, b) in bodies
        .iter()
        .enumerate()
        .filter(|&(k, _)| !obstacles[k].fixed)
    {
        for &v in b.inflated.vertices() {
            if inside_other(v, &[k]) {
                continue;
            }
            nodes.push(GraphNode {
                id: nodes.len(),
                position: v,
                kind: NodeKind::Free,
                node_cost: 0.0,
                passage: None,
            });
            exempt.push(Vec::new());
        }
    }

    // visibility is always judged from the mass-weighted placement so that
    // binary and semantic graphs share one topology
    let mut anchors: Vec<Point2> = nodes.iter().map(|n| n.position).collect();
    if params.passages != PassageMode::None {
        let layout = |side_i: &PassageSide,
                      side_j: &PassageSide,
                      mode|
         -> Vec<(Point2, Option<BoundaryKind>)> {
            match construct_passage(side_i, side_j, params.r, mode) {
                PassageLayout::Boundaries(list) => {
                    list.into_iter().map(|(p, b)| (p, Some(b.kind))).collect()
                }
                PassageLayout::DegenerateGap { contact } => vec![(contact, None)],
            }
        };
        for (i, j) in passage_pairs(&bodies, params.r) {
            let side_i = PassageSide {
                hull: &bodies[i].hull,
                mass: bodies[i].mass,
            };
            let side_j = PassageSide {
                hull: &bodies[j].hull,
                mass: bodies[j].mass,
            };
            let weighted = layout(&side_i, &side_j, Interpolation::MassWeighted);
            let placed = match params.passages {
                PassageMode::Semantic => weighted.clone(),
                _ => layout(&side_i, &side_j, Interpolation::Midpoint),
            };
            for ((anchor, _), (pos, boundary)) in weighted.into_iter().zip(placed) {
                // a third pushable obstacle whose margin covers the node gets
                // pushed too; a non-movable one closes the passage
                let mut ex = vec![i, j];
                let mut closed = false;
                for (k, b) in bodies.iter().enumerate() {
                    if k != i && k != j && b.inflated.contains_strict(anchor) {
                        closed |= !b.movable;
                        ex.push(k);
                    }
                }
                if closed {
                    continue;
                }
                let cost = match params.passages {
                    PassageMode::Semantic => passage_node_cost(pos, &side_i, &side_j, params.r),
                    _ => 0.0,
                };
                nodes.push(GraphNode {
                    id: nodes.len(),
                    position: pos,
                    kind: NodeKind::Passage,
                    node_cost: cost,
                    passage: Some(PassageMeta {
                        obstacles: (bodies[i].id.clone(), bodies[j].id.clone()),
                        boundary,
                    }),
                });
                exempt.push(ex);
                anchors.push(anchor);
            }
        }
    }

    let mut edges = Vec::new();
    for a in 0..nodes.len() {
        for b in (a + 1)..nodes.len() {
            if visible(anchors[a], anchors[b], &bodies, &exempt[a], &exempt[b]) {
                let length = nodes[a].position.dist(nodes[b].position);
                edges.push(Edge { a, b, length });
            }
        }
    }
    Ok(SemanticGraph::new(nodes, edges, start_id, goal_id))
}

fn visible(a: Point2, b: Point2, bodies: &[PlanningBody], ex_a: &[usize], ex_b: &[usize]) -> bool {
    if a.dist(b) <= EPS {
        return true;
    }
    let seg = Aabb::from_points(&[a, b]);
    bodies.iter().enumerate().all(|(k, body)| {
        let (poly, bbox) = if ex_a.contains(&k) || ex_b.contains(&k) {
            (&body.hull, &body.hull_box)
        } else {
            (&body.inflated, &body.inflated_box)
        };
        !bbox.overlaps(&seg, EPS) || !segment_enters_interior(a, b, poly)
    })
}

pub fn build_svg(
    obstacles: &[Obstacle],
    start: Point2,
    goal: Point2,
    r: f64,
    max_mass: f64,
) -> Result<SemanticGraph, PlannerError> {
    build_graph(obstacles, start, goal, &GraphParams::svg(r, max_mass))
}

/// Ordered waypoints with a maximum spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoints {
    pub points: Vec<Point2>,
    pub spacing: f64,
}

/// Splits every path segment into `ceil(len / spacing)` equal pieces,
/// keeping the original corners.
pub fn interpolate_waypoints(path: &[Point2], spacing: f64) -> Waypoints {
    assert!(spacing > 0.0, "waypoint spacing must be positive");
    let mut points = Vec::new();
    if let Some(&first) = path.first() {
        points.push(first);
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.dist(b);
        if len <= EPS {
            continue;
        }
        let pieces = (len / spacing - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            points.push(if k == pieces {
                b
            } else {
                a.lerp(b, k as f64 / pieces as f64)
            });
        }
    }
    Waypoints { points, spacing }
}

/// Graph search result in node ids and positions.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPath {
    pub nodes: Vec<NodeId>,
    pub positions: Vec<Point2>,
    pub cost: f64,
}

pub fn search(graph: &SemanticGraph) -> Option<GraphPath> {
    astar(graph).map(|nodes| GraphPath {
        positions: graph.positions(&nodes),
        cost: graph.path_cost(&nodes),
        nodes,
    })
}

/// Rebuilds the semantic graph from the robot's current position over the
/// scenario's current poses and beliefs.
pub fn replan(
    scenario: &Scenario,
    robot: Point2,
    r: f64,
    max_mass: f64,
    spacing: f64,
) -> Result<Waypoints, PlannerError> {
    let params = GraphParams {
        endpoints: EndpointPolicy::Relaxed,
        ..GraphParams::svg(r, max_mass)
    };
    let graph = build_graph(&scenario.bodies(), robot, scenario.goal, &params)?;
    let path = search(&graph).ok_or(PlannerError::GoalUnreachable)?;
    Ok(interpolate_waypoints(&path.positions, spacing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2;
    use crate::scenario::Room;

    fn boxed(id: &str, w: f64, h: f64, x: f64, y: f64, mass: f64) -> Obstacle {
        Obstacle::new(
            id,
            Polygon::rectangle(w, h).unwrap(),
            Pose2::new(x, y, 0.0),
            mass,
        )
    }

    #[test]
    fn waypoint_examples() {
        let w = interpolate_waypoints(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], 0.5);
        assert_eq!(
            w.points,
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(0.5, 0.0),
                Point2::new(1.0, 0.0)
            ]
        );
        let w = interpolate_waypoints(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], 0.4);
        assert_eq!(w.points.len(), 4);
        assert!((w.points[1].x - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.points[2].x - 2.0 / 3.0).abs() < 1e-15);
        let w = interpolate_waypoints(&[Point2::new(2.0, 1.0)], 0.5);
        assert_eq!(w.points, vec![Point2::new(2.0, 1.0)]);
    }

    #[test]
    fn empty_room_graph() {
        let start = Point2::new(1.0, 1.0);
        let goal = Point2::new(4.0, 5.0);
        let g = build_svg(&[], start, goal, 0.3, 30.0).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].length - 5.0).abs() < 1e-12);
        let p = search(&g).unwrap();
        assert_eq!(p.nodes, vec![0, 1]);
        assert!((p.cost - 5.0).abs() < 1e-12);
    }

    #[test]
    fn pair_qualification() {
        let far = [
            boxed("a", 1.0, 1.0, 0.0, 0.0, 10.0),
            boxed("b", 1.0, 1.0, 6.0, 0.0, 10.0),
        ];
        assert!(find_passage_pairs(&far, 0.3, 30.0).is_empty());
        let near = [
            boxed("a", 1.0, 1.0, 0.0, 0.0, 10.0),
            boxed("b", 1.0, 1.0, 1.4, 0.0, 50.0),
        ];
        assert_eq!(find_passage_pairs(&near, 0.3, 30.0), vec![(0, 1)]);
        let heavy = [
            boxed("a", 1.0, 1.0, 0.0, 0.0, 50.0),
            boxed("b", 1.0, 1.0, 1.4, 0.0, 50.0),
        ];
        assert!(find_passage_pairs(&heavy, 0.3, 30.0).is_empty());
    }

    /// A movable box spanning the room width, closer than 2r to both walls.
    fn blocked_room(mass: f64) -> Scenario {
        Scenario::new(
            Room {
                length: 6.0,
                width: 3.0,
            },
            Point2::new(1.0, 1.5),
            Point2::new(5.0, 1.5),
            vec![boxed("door", 0.6, 2.6, 3.0, 1.5, mass)],
        )
    }

    #[test]
    fn movable_wall_to_wall_box_gets_passages() {
        let s = blocked_room(10.0);
        let g = build_svg(&s.bodies(), s.start, s.goal, 0.3, 30.0).unwrap();
        assert!(g.passage_count() >= 2, "passages: {}", g.passage_count());
        let path = search(&g).expect("goal reachable through a passage");
        assert!(path
            .nodes
            .iter()
            .any(|&n| g.nodes[n].kind == NodeKind::Passage));
        for n in g.nodes.iter().filter(|n| n.kind == NodeKind::Passage) {
            assert!(n.node_cost > 0.0);
        }
    }

    #[test]
    fn heavy_wall_to_wall_box_blocks() {
        let s = blocked_room(80.0);
        let g = build_svg(&s.bodies(), s.start, s.goal, 0.3, 30.0).unwrap();
        assert_eq!(g.passage_count(), 0);
        assert!(search(&g).is_none());
    }

    #[test]
    fn start_inside_heavy_margin_is_an_error() {
        let obs = [boxed("h", 1.0, 1.0, 2.0, 2.0, 80.0)];
        let err = build_svg(
            &obs,
            Point2::new(2.7, 2.0),
            Point2::new(5.0, 5.0),
            0.3,
            30.0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            PlannerError::StartOrGoalBlocked { which: "start", .. }
        ));
        // relaxed policy accepts it as long as the hull itself is clear
        let params = GraphParams {
            endpoints: EndpointPolicy::Relaxed,
            ..GraphParams::svg(0.3, 30.0)
        };
        assert!(build_graph(&obs, Point2::new(2.7, 2.0), Point2::new(5.0, 5.0), &params).is_ok());
    }
}
