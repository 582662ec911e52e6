//! Passage nodes between close obstacle pairs.
//!
//! Three stages: nearest-point pairs across the gap, the two hull edges of
//! those points that bridge the gap (entry and exit boundaries), then one
//! mass-interpolated node per boundary.

use serde::{Deserialize, Serialize};

use crate::geometry::{convex_hull, min_distance, point_to_polygon_distance, Point2, Polygon, EPS};

/// Tolerance for deciding which obstacle a stage-I point lies on.
const SIDE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    Entry,
    Exit,
}

/// One gap-crossing boundary; `endpoints.0` lies on the first obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassageBoundary {
    pub endpoints: (Point2, Point2),
    pub side_masses: (f64, f64),
    pub kind: BoundaryKind,
}

/// How a node is positioned along its boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Shifted toward the lighter obstacle in proportion to the masses.
    MassWeighted,
    /// Boundary midpoint regardless of masses.
    Midpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassageSide<'a> {
    pub hull: &'a Polygon,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PassageLayout {
    /// Two boundaries with one node on each.
    Boundaries(Vec<(Point2, PassageBoundary)>),
    /// The stage-I points are collinear (touching obstacles); one node at
    /// the contact midpoint.
    DegenerateGap { contact: Point2 },
}

/// Fraction of the way from the first obstacle's endpoint to the second's.
/// The node lands nearer the lighter obstacle.
pub fn interpolation_factor(m_i: f64, m_j: f64) -> f64 {
    m_i / (m_i + m_j)
}

pub fn interpolate_node(
    v_i: Point2,
    v_j: Point2,
    m_i: f64,
    m_j: f64,
    mode: Interpolation,
) -> Point2 {
    let gamma = match mode {
        Interpolation::MassWeighted => interpolation_factor(m_i, m_j),
        Interpolation::Midpoint => 0.5,
    };
    v_i + (v_j - v_i) * gamma
}

/// Manipulation effort of a passage node at clearances `d_i`, `d_j`.
pub fn passage_cost(d_i: f64, d_j: f64, m_i: f64, m_j: f64, r: f64) -> f64 {
    (1.0 - d_i / r).max(0.0) * m_i + (1.0 - d_j / r).max(0.0) * m_j
}

/// [`passage_cost`] with clearances measured to the (uninflated) hulls.
pub fn passage_node_cost(node: Point2, i: &PassageSide, j: &PassageSide, r: f64) -> f64 {
    let d_i = point_to_polygon_distance(node, i.hull);
    let d_j = point_to_polygon_distance(node, j.hull);
    passage_cost(d_i, d_j, i.mass, j.mass, r)
}

/// Largest `t` in [0, 1] with `a + t (b - a)` still inside the convex
/// polygon, given that `a` is inside.
fn exit_parameter(a: Point2, b: Point2, poly: &Polygon) -> f64 {
    let d = b - a;
    let mut t_exit: f64 = 1.0;
    for (p, q) in poly.edges() {
        let outward = -(q - p).perp();
        let denom = outward.dot(d);
        if denom > EPS {
            let t = outward.dot(p - a) / denom;
            t_exit = t_exit.min(t.max(0.0));
        }
    }
    t_exit
}

/// Stage I: for every vertex of one hull, the segment toward the nearest
/// point of the other hull; the last point on the own hull and the point on
/// the other hull bound the gap. Both directions, pairs closer than `2r`.
/// Returned as `(on_i, on_j)`.
pub fn nearest_point_pairs(hi: &Polygon, hj: &Polygon, r: f64) -> Vec<(Point2, Point2)> {
    let mut pairs = Vec::new();
    let mut collect = |from: &Polygon, to: &Polygon, flip: bool| {
        for &v in from.vertices() {
            let q = to.closest_boundary_point(v);
            let t = exit_parameter(v, q, from);
            let p = v.lerp(q, t);
            if p.dist(q) < 2.0 * r {
                pairs.push(if flip { (q, p) } else { (p, q) });
            }
        }
    };
    collect(hi, hj, false);
    collect(hj, hi, true);
    pairs
}

/// Stages I–III for one obstacle pair.
pub fn construct_passage(
    i: &PassageSide,
    j: &PassageSide,
    r: f64,
    mode: Interpolation,
) -> PassageLayout {
    let pairs = nearest_point_pairs(i.hull, j.hull, r);
    let mut points: Vec<Point2> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
    if points.is_empty() {
        // not a qualifying pair; fall back to the closest points
        let (p, q) = crate::geometry::closest_points(i.hull, j.hull);
        points = vec![p, q];
    }
    let contact = || {
        let (p, q) = crate::geometry::closest_points(i.hull, j.hull);
        PassageLayout::DegenerateGap {
            contact: p.lerp(q, 0.5),
        }
    };
    let hull = match convex_hull(&points) {
        Ok(h) => h,
        Err(_) => return contact(),
    };
    let on_i = |p: Point2| point_to_polygon_distance(p, i.hull) <= SIDE_TOL;
    let on_j = |p: Point2| point_to_polygon_distance(p, j.hull) <= SIDE_TOL;
    let mut bridges = Vec::new();
    for (a, b) in hull.edges() {
        let (ai, aj, bi, bj) = (on_i(a), on_j(a), on_i(b), on_j(b));
        if ai && !aj && bj && !bi {
            bridges.push((a, b));
        } else if aj && !ai && bi && !bj {
            bridges.push((b, a));
        }
    }
    if bridges.len() != 2 {
        return contact();
    }
    let kinds = [BoundaryKind::Entry, BoundaryKind::Exit];
    PassageLayout::Boundaries(
        bridges
            .into_iter()
            .zip(kinds)
            .map(|((v_i, v_j), kind)| {
                let node = interpolate_node(v_i, v_j, i.mass, j.mass, mode);
                (
                    node,
                    PassageBoundary {
                        endpoints: (v_i, v_j),
                        side_masses: (i.mass, j.mass),
                        kind,
                    },
                )
            })
            .collect(),
    )
}

/// Hull-to-hull distance below `2r` and at least one member pushable.
pub fn qualifies(hi: &Polygon, hj: &Polygon, movable_i: bool, movable_j: bool, r: f64) -> bool {
    (movable_i || movable_j) && min_distance(hi, hj) < 2.0 * r
}
