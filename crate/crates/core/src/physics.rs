//! Deterministic 2D quasi-static pushing simulator.
//!
//! A holonomic rectangular robot moves among massed convex obstacles.
//! Obstacles have no inertia: a pushed obstacle moves exactly as far as
//! needed to leave the robot, and resisting Coulomb ground friction makes the
//! push force `μ_g · g · m`. Obstacles the robot cannot push (total required
//! force above `f_max`, or fixed walls) act as hard constraints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::geometry::{penetration_points, wrap_angle, Penetration, Point2, Polygon, Pose2};
use crate::scenario::{Room, Scenario};

pub const GRAVITY: f64 = 9.81;

/// Overlap left after resolution that still counts as a violation.
const VIOLATION_DEPTH: f64 = 0.01;
const RESOLVE_ITERATIONS: usize = 4;
const MAX_SPIN_PER_SUBSTEP: f64 = 0.2;
/// Overlap a sliding body may keep with its neighbours.
const SLIDE_TOLERANCE: f64 = 1e-4;

/// Planar velocity command or measurement, world frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Control {
    pub const ZERO: Control = Control {
        vx: 0.0,
        vy: 0.0,
        omega: 0.0,
    };

    pub const fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Control { vx, vy, omega }
    }

    pub fn linear_speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.omega]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Control::new(a[0], a[1], a[2])
    }

    pub fn clamped(&self, limit: &Control) -> Control {
        let c = |v: f64, l: f64| if v.is_finite() { v.clamp(-l, l) } else { 0.0 };
        Control::new(
            c(self.vx, limit.vx),
            c(self.vy, limit.vy),
            c(self.omega, limit.omega),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// Ground friction coefficient.
    pub mu_g: f64,
    /// Largest push force the robot can exert, N.
    pub f_max: f64,
    /// Penalty stiffness on residual overlap, N/m.
    pub stiffness: f64,
    /// Largest robot displacement per internal substep, m.
    pub max_substep: f64,
    /// Longest push chain (robot → obstacle → obstacle …).
    pub max_chain: usize,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        let mu_g = 0.4;
        PhysicsParams {
            mu_g,
            f_max: mu_g * GRAVITY * 30.0,
            stiffness: 1e4,
            max_substep: 0.05,
            max_chain: 3,
        }
    }
}

impl PhysicsParams {
    pub fn push_force(&self, mass: f64) -> f64 {
        self.mu_g * GRAVITY * mass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub footprint: Polygon,
    pub u_max: Control,
}

impl Default for RobotModel {
    fn default() -> Self {
        RobotModel {
            // 0.7 m long along the heading, 0.517 m wide
            footprint: Polygon::rectangle(0.7, 0.517).expect("robot footprint"),
            u_max: Control::new(1.0, 1.0, 1.5),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robot_pose: Pose2,
    pub robot_vel: Control,
    /// Scenario obstacles first, then the walls.
    pub obstacle_poses: Vec<Pose2>,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub obstacle: usize,
    pub force: f64,
    pub point: Point2,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub total_force: f64,
    pub contacts: Vec<Contact>,
    /// Robot ended the step inside something it cannot move, or outside the
    /// room.
    pub violated: bool,
}

impl ContactReport {
    /// Contact with the largest force.
    pub fn strongest(&self) -> Option<&Contact> {
        self.contacts
            .iter()
            .max_by(|a, b| a.force.total_cmp(&b.force))
    }
}

/// Which mass an obstacle body carries in the simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassSource {
    True,
    Believed,
}

#[derive(Clone, Debug)]
struct Body {
    shape: Polygon,
    mass: f64,
    fixed: bool,
    /// Bounding radius about the pose origin.
    radius: f64,
    /// Mean vertex distance from the centroid; lever scale for spin.
    lever: f64,
}

/// Static description of everything the simulator needs besides poses.
#[derive(Clone, Debug)]
pub struct PhysicsModel {
    bodies: Vec<Body>,
    ids: Vec<String>,
    pub robot: RobotModel,
    pub params: PhysicsParams,
    pub room: Room,
    robot_radius: f64,
    obstacle_count: usize,
}

enum Push {
    Moved(f64),
    Blocked,
}

/// World-frame vertices without a heap allocation for small shapes.
type Verts = SmallVec<[Point2; 8]>;

fn place(shape: &Polygon, pose: &Pose2) -> Verts {
    let (sin, cos) = pose.theta.sin_cos();
    shape
        .vertices()
        .iter()
        .map(|p| {
            Point2::new(
                cos * p.x - sin * p.y + pose.x,
                sin * p.x + cos * p.y + pose.y,
            )
        })
        .collect()
}

impl PhysicsModel {
    pub fn from_scenario(
        scenario: &Scenario,
        masses: MassSource,
        robot: RobotModel,
        params: PhysicsParams,
    ) -> Self {
        let all = scenario.bodies();
        let bodies = all
            .iter()
            .map(|o| {
                let shape = if o.shape.is_convex() {
                    o.shape.clone()
                } else {
                    crate::geometry::convex_hull(o.shape.vertices()).expect("valid polygon")
                };
                let c = shape.centroid();
                let lever =
                    shape.vertices().iter().map(|v| v.dist(c)).sum::<f64>() / shape.len() as f64;
                Body {
                    radius: shape.radius_about(Point2::default()),
                    lever,
                    shape,
                    mass: match masses {
                        MassSource::True => o.mass_true,
                        MassSource::Believed => o.mass_believed,
                    },
                    fixed: o.fixed,
                }
            })
            .collect();
        PhysicsModel {
            bodies,
            ids: all.iter().map(|o| o.id.clone()).collect(),
            robot_radius: robot.footprint.radius_about(Point2::default()),
            robot,
            params,
            room: scenario.room,
            obstacle_count: scenario.obstacles.len(),
        }
    }

    pub fn body_count(&self) -> usize {
        self.bodies.len()
    }

    /// Number of scenario obstacles (walls excluded).
    pub fn obstacle_count(&self) -> usize {
        self.obstacle_count
    }

    pub fn body_id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    /// Whether the robot could push this body on its own.
    pub fn pushable(&self, index: usize) -> bool {
        let b = &self.bodies[index];
        !b.fixed && self.params.push_force(b.mass) <= self.params.f_max
    }

    pub fn initial_state(&self, scenario: &Scenario, robot_pose: Pose2) -> WorldState {
        let mut poses: Vec<Pose2> = scenario.obstacles.iter().map(|o| o.pose).collect();
        poses.extend(scenario.room.walls().iter().map(|w| w.pose));
        WorldState {
            robot_pose,
            robot_vel: Control::ZERO,
            obstacle_poses: poses,
            time: 0.0,
        }
    }

    pub fn robot_polygon(&self, pose: &Pose2) -> Polygon {
        self.robot.footprint.transformed(pose)
    }

    pub fn body_polygon(&self, index: usize, pose: &Pose2) -> Polygon {
        self.bodies[index].shape.transformed(pose)
    }

    fn placed(&self, index: usize, pose: &Pose2) -> Verts {
        place(&self.bodies[index].shape, pose)
    }

    /// Advances one control period. The input state is not modified.
    pub fn step(
        &self,
        world: &WorldState,
        control: Control,
        dt: f64,
    ) -> (WorldState, ContactReport) {
        let mut next = world.clone();
        let mut report = ContactReport::default();
        self.step_mut(&mut next, control, dt, Some(&mut report));
        (next, report)
    }

    /// In-place step; returns the total contact force on obstacles (walls
    /// excluded) and whether the robot violated a hard constraint.
    pub fn step_mut(
        &self,
        world: &mut WorldState,
        control: Control,
        dt: f64,
        report: Option<&mut ContactReport>,
    ) -> (f64, bool) {
        assert!(dt > 0.0, "time step must be positive");
        let u = control.clamped(&self.robot.u_max);
        let start = world.robot_pose;
        let travel = (u.vx.hypot(u.vy) * dt).max(u.omega.abs() * dt * self.robot_radius);
        let substeps = ((travel / self.params.max_substep).ceil() as usize).max(1);
        let h = dt / substeps as f64;
        // per-obstacle force this step: max over substeps
        let mut forces: Vec<(usize, f64, Point2)> = Vec::new();
        for _ in 0..substeps {
            self.substep(world, u, h, &mut forces);
        }
        let violated = self.robot_violates(world);
        let end = world.robot_pose;
        world.robot_vel = Control::new(
            (end.x - start.x) / dt,
            (end.y - start.y) / dt,
            wrap_angle(end.theta - start.theta) / dt,
        );
        world.time += dt;
        forces.sort_by_key(|f| f.0);
        // walls bound the room; only forces on obstacles count
        let total: f64 = forces
            .iter()
            .filter(|f| !self.bodies[f.0].fixed)
            .fold(0.0, |acc, f| acc + f.1);
        if let Some(r) = report {
            r.total_force = total;
            r.violated = violated;
            r.contacts = forces
                .into_iter()
                .map(|(obstacle, force, point)| Contact {
                    obstacle,
                    force,
                    point,
                })
                .collect();
        }
        (total, violated)
    }

    fn near(&self, a: Point2, ra: f64, index: usize, pose: &Pose2) -> bool {
        let r = ra + self.bodies[index].radius;
        (pose.position() - a).norm_sq() < r * r
    }

    fn robot_overlaps(&self, world: &WorldState) -> Vec<(usize, Penetration)> {
        let rp = place(&self.robot.footprint, &world.robot_pose);
        let c = world.robot_pose.position();
        let mut out = Vec::new();
        for (k, pose) in world.obstacle_poses.iter().enumerate() {
            if !self.near(c, self.robot_radius, k, pose) {
                continue;
            }
            if let Some(p) = penetration_points(&rp, &self.placed(k, pose)) {
                out.push((k, p));
            }
        }
        out
    }

    fn substep(
        &self,
        world: &mut WorldState,
        u: Control,
        h: f64,
        forces: &mut Vec<(usize, f64, Point2)>,
    ) {
        let before = world.robot_pose;
        world.robot_pose = Pose2::new(
            before.x + u.vx * h,
            before.y + u.vy * h,
            before.theta + u.omega * h,
        );
        let mut record = |k: usize, f: f64, p: Point2| {
            if let Some(e) = forces.iter_mut().find(|e| e.0 == k) {
                if f > e.1 {
                    *e = (k, f, p);
                }
            } else {
                forces.push((k, f, p));
            }
        };
        for _ in 0..RESOLVE_ITERATIONS {
            let overlaps = self.robot_overlaps(world);
            if overlaps.is_empty() {
                break;
            }
            for (k, _) in overlaps {
                // poses may have shifted while resolving earlier contacts
                let rp = place(&self.robot.footprint, &world.robot_pose);
                let Some(pen) = penetration_points(&rp, &self.placed(k, &world.obstacle_poses[k]))
                else {
                    continue;
                };
                match self.push(world, k, pen.normal, pen.depth, pen.point, 0.0, 1) {
                    Push::Moved(f) => record(k, f, pen.point),
                    Push::Blocked => {
                        world.robot_pose.x -= pen.normal.x * pen.depth;
                        world.robot_pose.y -= pen.normal.y * pen.depth;
                        record(k, self.params.f_max, pen.point);
                    }
                }
            }
        }
        // leftover overlap: penalty force on movable bodies, and the robot
        // never stays inside something it cannot move
        let mut stuck = false;
        for (k, pen) in self.robot_overlaps(world) {
            if self.pushable(k) {
                let f =
                    self.params.push_force(self.bodies[k].mass) + self.params.stiffness * pen.depth;
                record(k, f, pen.point);
                world.robot_pose.x -= pen.normal.x * pen.depth;
                world.robot_pose.y -= pen.normal.y * pen.depth;
            } else {
                stuck = true;
            }
        }
        if !stuck {
            stuck = self
                .robot_overlaps(world)
                .iter()
                .any(|(_, p)| p.depth > VIOLATION_DEPTH);
        }
        if stuck {
            world.robot_pose = before;
        }
    }

    /// Moves body `k` by `normal * depth` (plus induced spin), pushing any
    /// body it runs into. All-or-nothing: on `Blocked` every pose touched by
    /// this call is restored.
    #[allow(clippy::too_many_arguments)]
    fn push(
        &self,
        world: &mut WorldState,
        k: usize,
        normal: Point2,
        depth: f64,
        point: Point2,
        chain_force: f64,
        chain_len: usize,
    ) -> Push {
        let body = &self.bodies[k];
        if body.fixed || chain_len > self.params.max_chain {
            return Push::Blocked;
        }
        let own = self.params.push_force(body.mass);
        let mut total = chain_force + own;
        if total > self.params.f_max {
            return Push::Blocked;
        }
        let snapshot = world.obstacle_poses.clone();
        let pose = world.obstacle_poses[k];
        let centroid = pose.transform_point(body.shape.centroid());
        let lever = (point - centroid).cross(normal);
        let spin = (lever * depth / (body.lever * body.lever))
            .clamp(-MAX_SPIN_PER_SUBSTEP, MAX_SPIN_PER_SUBSTEP);
        // rotate about the centroid, then translate
        let origin = pose.position();
        let new_origin = centroid + (origin - centroid).rotated(spin) + normal * depth;
        world.obstacle_poses[k] = Pose2::new(new_origin.x, new_origin.y, pose.theta + spin);

        let c = world.obstacle_poses[k].position();
        for m in 0..self.bodies.len() {
            if m == k || !self.near(c, body.radius, m, &world.obstacle_poses[m]) {
                continue;
            }
            let moved = self.placed(k, &world.obstacle_poses[k]);
            let Some(pen) = penetration_points(&moved, &self.placed(m, &world.obstacle_poses[m]))
            else {
                continue;
            };
            match self.push(
                world,
                m,
                pen.normal,
                pen.depth,
                pen.point,
                total,
                chain_len + 1,
            ) {
                Push::Moved(f) => total += f,
                Push::Blocked => {
                    // slide along the body that will not give way
                    let p = &mut world.obstacle_poses[k];
                    p.x -= pen.normal.x * pen.depth;
                    p.y -= pen.normal.y * pen.depth;
                }
            }
        }
        // sliding must clear every contact and still advance along the push
        let now = world.obstacle_poses[k];
        let advanced = (now.transform_point(body.shape.centroid()) - centroid).dot(normal);
        let moved = self.placed(k, &now);
        let jammed = (0..self.bodies.len()).any(|m| {
            m != k
                && self.near(now.position(), body.radius, m, &world.obstacle_poses[m])
                && penetration_points(&moved, &self.placed(m, &world.obstacle_poses[m]))
                    .is_some_and(|p| p.depth > SLIDE_TOLERANCE)
        });
        if jammed || advanced < 0.1 * depth {
            world.obstacle_poses = snapshot;
            return Push::Blocked;
        }
        Push::Moved(total - chain_force)
    }

    fn robot_violates(&self, world: &WorldState) -> bool {
        if !self.room.contains(world.robot_pose.position()) {
            return true;
        }
        self.robot_overlaps(world)
            .iter()
            .any(|(k, p)| !self.pushable(*k) && p.depth > VIOLATION_DEPTH)
    }

    /// `controls.len()` successive steps on a private copy of `world`.
    pub fn rollout(
        &self,
        world: &WorldState,
        controls: &[Control],
        dt: f64,
    ) -> (Vec<WorldState>, Vec<f64>) {
        let mut w = world.clone();
        let mut states = Vec::with_capacity(controls.len());
        let mut forces = Vec::with_capacity(controls.len());
        for &u in controls {
            let (f, _) = self.step_mut(&mut w, u, dt, None);
            states.push(w.clone());
            forces.push(f);
        }
        (states, forces)
    }

    /// Independent rollouts, evaluated in parallel; the result equals
    /// evaluating them one after another.
    pub fn batch_rollout(
        &self,
        world: &WorldState,
        batch: &[Vec<Control>],
        dt: f64,
    ) -> Vec<(Vec<WorldState>, Vec<f64>)> {
        batch
            .par_iter()
            .map(|c| self.rollout(world, c, dt))
            .collect()
    }
}
