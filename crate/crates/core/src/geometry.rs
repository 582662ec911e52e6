//! Exact-ish 2D primitives used by the planners and the simulator.
//!
//! All predicates share one absolute tolerance, [`EPS`]. Points closer than
//! that to a polygon boundary are classified as lying on the boundary, and
//! boundary contact never counts as entering an obstacle.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance (meters) of every geometric predicate.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("non-finite coordinate")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            self
        }
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn rotated(self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Point2 {
    fn sub_assign(&mut self, o: Point2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Planar rigid transform (x, y, θ).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn transform_point(&self, p: Point2) -> Point2 {
        p.rotated(self.theta) + self.position()
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb {
    pub fn from_points(points: &[Point2]) -> Aabb {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Aabb { min, max }
    }

    pub fn overlaps(&self, o: &Aabb, margin: f64) -> bool {
        self.min.x <= o.max.x + margin
            && o.min.x <= self.max.x + margin
            && self.min.y <= o.max.y + margin
            && o.min.y <= self.max.y + margin
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Simple polygon with counter-clockwise vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

fn signed_area(vs: &[Point2]) -> f64 {
    let n = vs.len();
    (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum::<f64>() * 0.5
}

impl Polygon {
    /// Validates and stores a polygon. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Polygon> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateInput(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) <= EPS {
                return Err(GeometryError::DegenerateInput(format!(
                    "consecutive vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        let area = signed_area(&vertices);
        if area.abs() <= EPS {
            return Err(GeometryError::DegenerateInput("zero-area polygon".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(GeometryError::DegenerateInput(
                "self-intersecting polygon".into(),
            ));
        }
        Ok(Polygon { vertices })
    }

    /// Axis-aligned rectangle centred on the origin.
    pub fn rectangle(width: f64, height: f64) -> Result<Polygon> {
        let (hw, hh) = (width * 0.5, height * 0.5);
        Polygon::new(vec![
            Point2::new(-hw, -hh),
            Point2::new(hw, -hh),
            Point2::new(hw, hh),
            Point2::new(-hw, hh),
        ])
    }

    /// Regular polygon centred on the origin with its first vertex on +x.
    pub fn regular(sides: usize, circumradius: f64) -> Result<Polygon> {
        let step = std::f64::consts::TAU / sides as f64;
        Polygon::new(
            (0..sides)
                .map(|k| Point2::new(circumradius, 0.0).rotated(step * k as f64))
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let mut c = Point2::default();
        let mut a2 = 0.0;
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let w = p.cross(q);
            a2 += w;
            c += (p + q) * w;
        }
        c * (1.0 / (3.0 * a2))
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Largest vertex distance from `center`.
    pub fn radius_about(&self, center: Point2) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dist(center))
            .fold(0.0, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -EPS
        })
    }

    /// Interior angle at vertex `i`, radians.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let prev = self.vertices[(i + n - 1) % n];
        let cur = self.vertices[i];
        let next = self.vertices[(i + 1) % n];
        let a = prev - cur;
        let b = next - cur;
        let ang = a.cross(b).atan2(a.dot(b));
        // CCW: interior lies to the left when walking, i.e. clockwise from b to a
        let ang = if ang < 0.0 {
            ang + std::f64::consts::TAU
        } else {
            ang
        };
        std::f64::consts::TAU - ang
    }

    pub fn transformed(&self, pose: &Pose2) -> Polygon {
        let (s, c) = pose.theta.sin_cos();
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point2::new(c * p.x - s * p.y + pose.x, s * p.x + c * p.y + pose.y))
                .collect(),
        }
    }

    pub fn translated(&self, t: Point2) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p + t).collect(),
        }
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn closest_boundary_point(&self, p: Point2) -> Point2 {
        let mut best = (f64::INFINITY, p);
        for (a, b) in self.edges() {
            let q = closest_point_on_segment(p, a, b);
            let d = q.dist(p);
            if d < best.0 {
                best = (d, q);
            }
        }
        best.1
    }

    fn winding_contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Inside or within [`EPS`] of the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        self.boundary_distance(p) <= EPS || self.winding_contains(p)
    }

    /// Inside and farther than [`EPS`] from the boundary.
    pub fn contains_strict(&self, p: Point2) -> bool {
        self.winding_contains(p) && self.boundary_distance(p) > EPS
    }
}

fn is_simple(vs: &[Point2]) -> bool {
    let n = vs.len();
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vs[j], vs[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

pub fn closest_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    closest_point_on_segment(p, a, b).dist(p)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Closed-segment intersection test with [`EPS`] tolerance.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    point_segment_distance(a, c, d) <= EPS
        || point_segment_distance(b, c, d) <= EPS
        || point_segment_distance(c, a, b) <= EPS
        || point_segment_distance(d, a, b) <= EPS
}

fn segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Smallest convex CCW polygon containing `points`. Collinear boundary
/// points are dropped, so hull vertices are a subset of the input.
pub fn convex_hull(points: &[Point2]) -> Result<Polygon> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) <= EPS);
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "convex hull needs 3 distinct points, got {}",
            pts.len()
        )));
    }
    // Andrew's monotone chain
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && orient(hull[hull.len() - 2], hull[hull.len() - 1], p) <= EPS
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "all points collinear".into(),
        ));
    }
    Polygon::new(hull)
}

/// Miter offset of a convex polygon: every edge moves outward by `r` and
/// adjacent offset edges are intersected. Corners therefore stick out up to
/// `r / sin(θ/2)` for an interior angle θ.
pub fn inflate(polygon: &Polygon, r: f64) -> Result<Polygon> {
    if !r.is_finite() || r < 0.0 {
        return Err(GeometryError::DegenerateInput(format!(
            "invalid margin {r}"
        )));
    }
    if !polygon.is_convex() {
        return Err(GeometryError::DegenerateInput(
            "inflation expects a convex polygon".into(),
        ));
    }
    if r == 0.0 {
        return Ok(polygon.clone());
    }
    let vs = polygon.vertices();
    let n = vs.len();
    // outward normal of edge i (v_i -> v_{i+1}) for a CCW polygon is -perp
    let normal = |i: usize| -> Point2 { -(vs[(i + 1) % n] - vs[i]).normalized().perp() };
    let out = (0..n)
        .map(|i| {
            let prev = (i + n - 1) % n;
            let n0 = normal(prev);
            let n1 = normal(i);
            let bisector = n0 + n1;
            // |bisector| = 2 cos(φ/2), φ the turn angle; miter length r / cos(φ/2)
            let half = bisector.norm() * 0.5;
            vs[i] + bisector.normalized() * (r / half)
        })
        .collect();
    Polygon::new(out)
}

/// Distance between two polygons; zero when they touch or overlap.
pub fn min_distance(a: &Polygon, b: &Polygon) -> f64 {
    if a.contains(b.vertices()[0]) || b.contains(a.vertices()[0]) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in a.edges() {
        for (s, t) in b.edges() {
            best = best.min(segment_segment_distance(p, q, s, t));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Closest pair of points between two disjoint polygons, `(on_a, on_b)`.
pub fn closest_points(a: &Polygon, b: &Polygon) -> (Point2, Point2) {
    let mut best = (f64::INFINITY, a.vertices()[0], b.vertices()[0]);
    for &v in a.vertices() {
        let q = b.closest_boundary_point(v);
        let d = q.dist(v);
        if d < best.0 {
            best = (d, v, q);
        }
    }
    for &v in b.vertices() {
        let q = a.closest_boundary_point(v);
        let d = q.dist(v);
        if d < best.0 {
            best = (d, q, v);
        }
    }
    (best.1, best.2)
}

pub fn point_to_polygon_distance(p: Point2, polygon: &Polygon) -> f64 {
    if polygon.contains(p) {
        0.0
    } else {
        polygon.boundary_distance(p)
    }
}

/// Whether the open segment `(a, b)` passes through the interior of
/// `polygon`. Boundary contact alone does not count.
pub fn segment_enters_interior(a: Point2, b: Point2, polygon: &Polygon) -> bool {
    let ab = b - a;
    let len = ab.norm();
    if len <= EPS {
        return polygon.contains_strict(a);
    }
    // Parameters where the segment meets the boundary split it into pieces
    // that are each entirely inside or entirely outside.
    let mut ts = vec![0.0, 1.0];
    for (c, d) in polygon.edges() {
        let cd = d - c;
        let denom = ab.cross(cd);
        if denom.abs() > EPS * len * cd.norm() {
            let t = (c - a).cross(cd) / denom;
            let u = (c - a).cross(ab) / denom;
            if (-EPS..=1.0 + EPS).contains(&u) && t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        } else {
            // parallel: vertices projected onto the segment bound collinear overlap
            for v in [c, d] {
                let t = (v - a).dot(ab) / (len * len);
                if t > 0.0 && t < 1.0 && point_segment_distance(v, a, b) <= EPS {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.windows(2)
        .any(|w| w[1] - w[0] > EPS / len && polygon.contains_strict(a.lerp(b, 0.5 * (w[0] + w[1]))))
}

/// True iff the open segment `(a, b)` avoids every obstacle interior.
pub fn segment_clear(a: Point2, b: Point2, obstacles: &[Polygon]) -> bool {
    let seg_box = Aabb::from_points(&[a, b]);
    obstacles
        .iter()
        .filter(|o| o.aabb().overlaps(&seg_box, EPS))
        .all(|o| !segment_enters_interior(a, b, o))
}

/// The candidates with a clear line of sight from `v`.
///
/// A plain scan over candidates and obstacle edges; scenes hold a few dozen
/// obstacles.
pub fn visible_vertices(v: Point2, candidates: &[Point2], obstacles: &[Polygon]) -> Vec<Point2> {
    candidates
        .iter()
        .copied()
        .filter(|&w| w.dist(v) <= EPS || segment_clear(v, w, obstacles))
        .collect()
}

/// Minimum translation between two overlapping convex polygons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penetration {
    /// Unit direction pointing from `a` towards `b`; moving `b` by
    /// `normal * depth` separates the pair.
    pub normal: Point2,
    pub depth: f64,
    /// Deepest point of the contact region, world frame.
    pub point: Point2,
}

fn project(pts: &[Point2], axis: Point2) -> (f64, f64) {
    pts.iter()
        .map(|v| v.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

/// Separating-axis overlap test for convex polygons. `None` when the pair
/// is separated or only touching.
pub fn penetration(a: &Polygon, b: &Polygon) -> Option<Penetration> {
    penetration_points(a.vertices(), b.vertices())
}

/// [`penetration`] on counter-clockwise convex vertex lists.
pub fn penetration_points(a: &[Point2], b: &[Point2]) -> Option<Penetration> {
    if !Aabb::from_points(a).overlaps(&Aabb::from_points(b), 0.0) {
        return None;
    }
    let mut best: Option<(f64, Point2, bool)> = None;
    for (poly, from_a) in [(a, true), (b, false)] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let axis = -(q - p).normalized().perp();
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            let overlap = (amax.min(bmax)) - (amin.max(bmin));
            if overlap <= EPS {
                return None;
            }
            // orient the axis from a to b
            let ca = 0.5 * (amin + amax);
            let cb = 0.5 * (bmin + bmax);
            let dir = if cb >= ca { axis } else { -axis };
            let depth = if cb >= ca { amax - bmin } else { bmax - amin };
            let depth = depth.min(overlap);
            if best.is_none_or(|(d, _, _)| depth < d) {
                best = Some((depth, dir, from_a));
            }
        }
    }
    let (depth, normal, from_a) = best?;
    // Reference face on `a`: the contact is b's deepest vertex against the
    // normal, and vice versa.
    let point = if from_a {
        *b.iter()
            .min_by(|u, v| u.dot(normal).total_cmp(&v.dot(normal)))
            .unwrap()
    } else {
        *a.iter()
            .max_by(|u, v| u.dot(normal).total_cmp(&v.dot(normal)))
            .unwrap()
    };
    Some(Penetration {
        normal,
        depth,
        point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn approx(a: Point2, b: Point2) -> bool {
        a.dist(b) < 1e-9
    }

    #[test]
    fn polygon_rejects_bad_input() {
        assert!(Polygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]).is_err());
        assert!(Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .is_err());
        // bow tie
        assert!(Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .is_err());
        assert_eq!(
            Polygon::new(vec![
                Point2::new(0.0, f64::NAN),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0)
            ]),
            Err(GeometryError::NonFinite)
        );
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn hull_drops_interior_point() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.5),
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices(), unit_square().vertices());
    }

    #[test]
    fn hull_of_triangle_is_identity() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.len(), 3);
        for p in pts {
            assert!(h.vertices().contains(&p));
        }
    }

    #[test]
    fn hull_degenerate_inputs() {
        assert!(matches!(
            convex_hull(&[Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)]),
            Err(GeometryError::DegenerateInput(_))
        ));
        assert!(matches!(
            convex_hull(&[
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(2.0, 2.0)
            ]),
            Err(GeometryError::DegenerateInput(_))
        ));
    }

    #[test]
    fn inflate_square() {
        assert_eq!(inflate(&unit_square(), 0.0).unwrap(), unit_square());
        let big = inflate(&unit_square(), 0.3).unwrap();
        let expect = [
            Point2::new(-0.3, -0.3),
            Point2::new(1.3, -0.3),
            Point2::new(1.3, 1.3),
            Point2::new(-0.3, 1.3),
        ];
        for (a, b) in big.vertices().iter().zip(expect) {
            assert!(approx(*a, b), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn inflate_hexagon() {
        let hex = Polygon::regular(6, 1.0).unwrap();
        let out = inflate(&hex, 0.3).unwrap();
        let expected = 1.0 + 0.3 / (30f64).to_radians().cos();
        for v in out.vertices() {
            assert!((v.norm() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn inflate_rejects_non_convex() {
        let l = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        assert!(inflate(&l, 0.1).is_err());
        assert!(inflate(&unit_square(), -0.1).is_err());
    }

    #[test]
    fn distances() {
        let a = unit_square();
        let b = a.translated(Point2::new(3.0, 0.0));
        assert!((min_distance(&a, &b) - 2.0).abs() < 1e-12);
        let c = a.translated(Point2::new(0.5, 0.5));
        assert_eq!(min_distance(&a, &c), 0.0);
        assert_eq!(point_to_polygon_distance(Point2::new(0.5, 0.5), &a), 0.0);
        assert!((point_to_polygon_distance(Point2::new(2.0, 0.5), &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_visibility_cases() {
        let sq = [unit_square()];
        assert!(segment_clear(
            Point2::new(-1.0, -1.0),
            Point2::new(3.0, -1.0),
            &sq
        ));
        assert!(!segment_clear(
            Point2::new(-1.0, 0.5),
            Point2::new(2.0, 0.5),
            &sq
        ));
        // collinear with the bottom edge
        assert!(segment_clear(
            Point2::new(-1.0, 0.0),
            Point2::new(2.0, 0.0),
            &sq
        ));
        // through a single corner
        assert!(segment_clear(
            Point2::new(-1.0, -1.0),
            Point2::new(0.0, 0.0),
            &sq
        ));
        assert!(segment_clear(
            Point2::new(-1.0, 1.0),
            Point2::new(1.0, -1.0),
            &sq
        ));
        // diagonal through the interior
        assert!(!segment_clear(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            &sq
        ));
        // along an edge from a vertex
        assert!(segment_clear(
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            &sq
        ));
    }

    #[test]
    fn visible_vertices_cases() {
        let v = Point2::new(-1.0, 0.5);
        let cands = [Point2::new(2.0, 0.5), Point2::new(-1.0, 3.0)];
        assert_eq!(visible_vertices(v, &cands, &[]), cands.to_vec());
        let vis = visible_vertices(v, &cands[..1], &[unit_square()]);
        assert!(vis.is_empty());
    }

    #[test]
    fn sat_penetration() {
        let a = unit_square();
        let b = a.translated(Point2::new(0.9, 0.2));
        let pen = penetration(&a, &b).unwrap();
        assert!((pen.depth - 0.1).abs() < 1e-12);
        assert!(approx(pen.normal, Point2::new(1.0, 0.0)));
        assert!(penetration(&a, &a.translated(Point2::new(1.0, 0.0))).is_none());
        assert!(penetration(&a, &a.translated(Point2::new(1.5, 0.0))).is_none());
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.2 - 2.0 * PI) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn interior_angles_of_square() {
        let s = unit_square();
        for i in 0..4 {
            assert!((s.interior_angle(i) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        }
    }
}
