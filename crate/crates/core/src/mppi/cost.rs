//! Individual rollout cost terms. Each returns the unweighted component;
//! the controller multiplies by the configured weights.

use crate::geometry::{wrap_angle, Point2};
use crate::physics::Control;

/// Tracking error between measured and commanded velocity, normalized by
/// the velocity limits and weighted per axis.
pub fn control_cost(xdot: &Control, v: &Control, u_max: &Control, w_ctrl: &[f64; 3]) -> f64 {
    let e = [
        (xdot.vx - v.vx).abs() / u_max.vx,
        (xdot.vy - v.vy).abs() / u_max.vy,
        (xdot.omega - v.omega).abs() / u_max.omega,
    ];
    (0..3).map(|i| e[i] * w_ctrl[i] * e[i]).sum()
}

/// Index of the nearest waypoint; ties go to the lower index.
pub fn closest_waypoint(p: Point2, waypoints: &[Point2]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, w) in waypoints.iter().enumerate() {
        let d = w.dist(p);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// The waypoint after the nearest one, or the last waypoint at the end.
pub fn target_index(closest: usize, len: usize) -> usize {
    (closest + 1).min(len - 1)
}

/// Distance to the waypoint after the nearest one, over `alpha`.
pub fn distance_cost(p: Point2, waypoints: &[Point2], alpha: f64) -> f64 {
    let i = closest_waypoint(p, waypoints);
    waypoints[target_index(i, waypoints.len())].dist(p) / alpha
}

/// Lagging rollouts (lower terminal waypoint index) pay up to 1; when all
/// indices agree nobody pays.
pub fn progress_cost(indices: &[usize]) -> Vec<f64> {
    let (Some(&lo), Some(&hi)) = (indices.iter().min(), indices.iter().max()) else {
        return Vec::new();
    };
    if hi == lo {
        return vec![0.0; indices.len()];
    }
    let span = (hi - lo) as f64;
    indices
        .iter()
        .map(|&i| 1.0 - (i - lo) as f64 / span)
        .collect()
}

/// Heading error toward `target`, wrapped, over π.
pub fn rotation_cost(theta: f64, p: Point2, target: Point2) -> f64 {
    let d = target - p;
    if d.norm() <= 1e-9 {
        return 0.0;
    }
    let theta_target = d.y.atan2(d.x);
    wrap_angle(theta_target - theta).abs() / std::f64::consts::PI
}

/// Cumulative contact force of each rollout over the batch maximum.
pub fn force_cost(sums: &[f64], eps: f64) -> Vec<f64> {
    let max = sums.iter().copied().fold(0.0, f64::max);
    sums.iter().map(|&f| f / (max + eps)).collect()
}
