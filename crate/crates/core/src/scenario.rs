//! Scenario data: room, obstacles with true and believed masses, start and
//! goal. Serialized as versioned JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{convex_hull, Point2, Polygon, Pose2};

pub const SCENARIO_VERSION: u32 = 1;

/// Added to `max_mass` when an obstacle is declared non-movable, so it sits
/// just above the pushable threshold.
pub const NON_MOVABLE_MARGIN: f64 = 1e-3;

pub const WALL_THICKNESS: f64 = 0.2;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unsupported scenario version {0} (expected {SCENARIO_VERSION})")]
    Version(u32),
    #[error("invalid obstacle {id}: {reason}")]
    Obstacle { id: String, reason: String },
    #[error("duplicate obstacle id {0}")]
    DuplicateId(String),
    #[error("unknown obstacle {0}")]
    UnknownObstacle(String),
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    /// Footprint in the body frame.
    #[serde(rename = "vertices")]
    pub shape: Polygon,
    pub pose: Pose2,
    pub mass_true: f64,
    pub mass_believed: f64,
    /// Walls: never moves, not part of the scenario file.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fixed: bool,
}

impl Obstacle {
    pub fn new(id: impl Into<String>, shape: Polygon, pose: Pose2, mass: f64) -> Obstacle {
        Obstacle {
            id: id.into(),
            shape,
            pose,
            mass_true: mass,
            mass_believed: mass,
            fixed: false,
        }
    }

    pub fn with_true_mass(mut self, mass_true: f64) -> Obstacle {
        self.mass_true = mass_true;
        self
    }

    /// Believed movability under the pushable-mass threshold.
    pub fn movable_believed(&self, max_mass: f64) -> bool {
        !self.fixed && self.mass_believed <= max_mass
    }

    /// Mass used by the planners: fixed bodies count as just non-movable.
    pub fn planning_mass(&self, max_mass: f64) -> f64 {
        if self.fixed {
            max_mass + NON_MOVABLE_MARGIN
        } else {
            self.mass_believed
        }
    }

    pub fn world_polygon(&self) -> Polygon {
        self.shape.transformed(&self.pose)
    }

    /// Convex hull of the world footprint; all planning geometry uses it.
    pub fn world_hull(&self) -> Polygon {
        let p = self.world_polygon();
        if p.is_convex() {
            p
        } else {
            convex_hull(p.vertices()).expect("valid polygon has a hull")
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |reason: &str| ScenarioError::Obstacle {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if !(self.mass_true > 0.0 && self.mass_true.is_finite()) {
            return Err(bad("mass_true must be positive"));
        }
        if !(self.mass_believed > 0.0 && self.mass_believed.is_finite()) {
            return Err(bad("mass_believed must be positive"));
        }
        if ![self.pose.x, self.pose.y, self.pose.theta]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(bad("non-finite pose"));
        }
        Ok(())
    }
}

/// Rectangular room spanning `[0, length] × [0, width]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub length: f64,
    pub width: f64,
}

impl Default for Room {
    fn default() -> Self {
        Room {
            length: 8.0,
            width: 4.0,
        }
    }
}

impl Room {
    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0 && p.x <= self.length && p.y >= 0.0 && p.y <= self.width
    }

    /// Four thin fixed rectangles just outside the room boundary.
    pub fn walls(&self) -> Vec<Obstacle> {
        let t = WALL_THICKNESS;
        let (l, w) = (self.length, self.width);
        let specs = [
            ("wall_south", l + 2.0 * t, t, l * 0.5, -t * 0.5),
            ("wall_north", l + 2.0 * t, t, l * 0.5, w + t * 0.5),
            ("wall_west", t, w, -t * 0.5, w * 0.5),
            ("wall_east", t, w, l + t * 0.5, w * 0.5),
        ];
        specs
            .iter()
            .map(|&(id, sx, sy, cx, cy)| Obstacle {
                id: id.to_string(),
                shape: Polygon::rectangle(sx, sy).expect("positive wall size"),
                pose: Pose2::new(cx, cy, 0.0),
                mass_true: 1e9,
                mass_believed: 1e9,
                fixed: true,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    pub seed: u64,
    pub room: Room,
    pub start: Point2,
    pub goal: Point2,
    pub obstacles: Vec<Obstacle>,
}

impl Scenario {
    pub fn new(room: Room, start: Point2, goal: Point2, obstacles: Vec<Obstacle>) -> Scenario {
        Scenario {
            version: SCENARIO_VERSION,
            seed: 0,
            room,
            start,
            goal,
            obstacles,
        }
    }

    /// Scenario obstacles followed by the four walls.
    pub fn bodies(&self) -> Vec<Obstacle> {
        let mut all = self.obstacles.clone();
        all.extend(self.room.walls());
        all
    }

    pub fn obstacle_index(&self, id: &str) -> Option<usize> {
        self.obstacles.iter().position(|o| o.id == id)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != SCENARIO_VERSION {
            return Err(ScenarioError::Version(self.version));
        }
        let mut ids = std::collections::HashSet::new();
        for o in &self.obstacles {
            o.validate()?;
            if !ids.insert(o.id.as_str()) {
                return Err(ScenarioError::DuplicateId(o.id.clone()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Marks an obstacle non-movable in belief: its believed mass moves just
    /// above `max_mass`. True mass is untouched; already non-movable
    /// obstacles are left as they are.
    pub fn update_movability(&mut self, id: &str, max_mass: f64) -> Result<(), ScenarioError> {
        let o = self
            .obstacles
            .iter_mut()
            .find(|o| o.id == id)
            .ok_or_else(|| ScenarioError::UnknownObstacle(id.to_string()))?;
        if o.mass_believed <= max_mass {
            o.mass_believed = max_mass + NON_MOVABLE_MARGIN;
        }
        Ok(())
    }

    /// Copy with obstacle poses replaced (indexed like `obstacles`).
    pub fn with_poses(&self, poses: &[Pose2]) -> Scenario {
        let mut s = self.clone();
        for (o, p) in s.obstacles.iter_mut().zip(poses) {
            o.pose = *p;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Scenario {
        Scenario::new(
            Room::default(),
            Point2::new(0.5, 2.0),
            Point2::new(7.5, 2.0),
            vec![Obstacle::new(
                "box",
                Polygon::rectangle(0.5, 0.5).unwrap(),
                Pose2::new(4.0, 2.0, 0.3),
                20.0,
            )
            .with_true_mass(80.0)],
        )
    }

    #[test]
    fn json_round_trip() {
        let s = sample();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert!(!s.to_json().contains("fixed"));
    }

    #[test]
    fn rejects_bad_files() {
        let mut s = sample();
        s.version = 7;
        assert!(matches!(
            Scenario::from_json(&s.to_json()),
            Err(ScenarioError::Version(7))
        ));
        let mut s = sample();
        s.obstacles[0].mass_true = -1.0;
        assert!(Scenario::from_json(&s.to_json()).is_err());
        assert!(matches!(
            Scenario::from_json("{"),
            Err(ScenarioError::Json(_))
        ));
        let bad_poly = sample().to_json().replace("\"x\": -0.25", "\"x\": 0.25");
        assert!(Scenario::from_json(&bad_poly).is_err());
    }

    #[test]
    fn movability_update() {
        let mut s = sample();
        assert!(s.obstacles[0].movable_believed(30.0));
        s.update_movability("box", 30.0).unwrap();
        assert!(!s.obstacles[0].movable_believed(30.0));
        assert_eq!(s.obstacles[0].mass_true, 80.0);
        let before = s.clone();
        s.update_movability("box", 30.0).unwrap();
        assert_eq!(before, s);
        assert!(matches!(
            s.update_movability("nope", 30.0),
            Err(ScenarioError::UnknownObstacle(_))
        ));
    }

    #[test]
    fn walls_enclose_room() {
        let room = Room::default();
        let walls = room.walls();
        assert_eq!(walls.len(), 4);
        for w in &walls {
            let poly = w.world_polygon();
            assert!((poly.area() - poly.area().abs()).abs() < 1e-12);
            assert!(!poly.contains_strict(Point2::new(4.0, 2.0)));
        }
    }
}
