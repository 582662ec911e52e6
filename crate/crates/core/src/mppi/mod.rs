//! Model predictive path integral control over physics rollouts.
//!
//! Each cycle samples `K` perturbed control sequences around a nominal,
//! simulates them through the pushing simulator, scores them (control
//! tracking at every step; distance, progress, heading and contact force at
//! the horizon), and blends them with softmax weights.

pub mod cost;
pub mod monitor;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Pose2};
use crate::physics::{Control, PhysicsModel, WorldState};
pub use cost::{
    closest_waypoint, control_cost, distance_cost, force_cost, progress_cost, rotation_cost,
    target_index,
};
pub use monitor::{Conditions, MonitorState, MonitorThresholds, ReplanSignal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MppiError {
    #[error("every rollout violated a constraint")]
    AllRolloutsInfeasible,
    #[error("no waypoints to track")]
    NoWaypoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    /// Diagonal of the control-tracking weight matrix.
    pub ctrl: [f64; 3],
    pub dist: f64,
    pub prog: f64,
    pub rot: f64,
    pub force: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            ctrl: [0.05, 0.05, 0.02],
            dist: 1.0,
            prog: 2.0,
            rot: 0.3,
            force: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MppiConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub dt: f64,
    pub sigma: [f64; 3],
    pub beta: f64,
    pub weights: CostWeights,
    /// Distance normalizer; the waypoint spacing.
    pub alpha: f64,
    pub eps_force: f64,
}

impl Default for MppiConfig {
    fn default() -> Self {
        MppiConfig {
            k: 128,
            t: 25,
            dt: 0.08,
            sigma: [0.4, 0.4, 0.6],
            beta: 0.5,
            weights: CostWeights::default(),
            alpha: 0.5,
            eps_force: 1e-6,
        }
    }
}

impl MppiConfig {
    pub fn validate(&self) -> Result<(), String> {
        let w = &self.weights;
        let weights_ok = w
            .ctrl
            .iter()
            .chain([&w.dist, &w.prog, &w.rot, &w.force])
            .all(|&v| v >= 0.0);
        if self.k < 2 || self.t < 1 {
            return Err(format!(
                "need K >= 2 and T >= 1, got K={} T={}",
                self.k, self.t
            ));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !weights_ok || !positive(self.beta) || !positive(self.alpha) || !positive(self.dt) {
            return Err("weights must be >= 0 and beta, alpha, dt > 0".into());
        }
        if self.sigma.iter().any(|&s| !s.is_finite() || s < 0.0) {
            return Err("sigma must be >= 0".into());
        }
        Ok(())
    }
}

/// Weighted cost components of one rollout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub ctrl: f64,
    pub dist: f64,
    pub prog: f64,
    pub rot: f64,
    pub force: f64,
}

impl CostBreakdown {
    pub fn sum(&self) -> f64 {
        self.ctrl + self.dist + self.prog + self.rot + self.force
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutCost {
    /// `f64::INFINITY` for disregarded rollouts.
    pub total: f64,
    pub breakdown: CostBreakdown,
    pub closest_index_at_t: usize,
    /// Unnormalized cumulative contact force over the horizon.
    pub force_sum: f64,
    pub feasible: bool,
}

/// K control sequences: the nominal first, then nominal plus Gaussian
/// noise, clamped to the velocity limits.
pub fn sample_controls(
    nominal: &[Control],
    config: &MppiConfig,
    u_max: &Control,
    seed: u64,
) -> Vec<Vec<Control>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes: Vec<Option<Normal<f64>>> = config
        .sigma
        .iter()
        .map(|&s| (s > 0.0).then(|| Normal::new(0.0, s).expect("finite sigma")))
        .collect();
    let mut out = Vec::with_capacity(config.k);
    out.push(nominal.iter().map(|u| u.clamped(u_max)).collect());
    for _ in 1..config.k {
        let seq = nominal
            .iter()
            .map(|u| {
                let mut a = u.as_array();
                for (v, dist) in a.iter_mut().zip(&axes) {
                    if let Some(d) = dist {
                        *v += d.sample(&mut rng);
                    }
                }
                Control::from_array(a).clamped(u_max)
            })
            .collect();
        out.push(seq);
    }
    out
}

struct Simulated {
    ctrl: f64,
    final_pose: Pose2,
    force_sum: f64,
    violated: bool,
}

fn simulate(
    model: &PhysicsModel,
    world: &WorldState,
    seq: &[Control],
    config: &MppiConfig,
) -> Simulated {
    let mut w = world.clone();
    let mut ctrl = 0.0;
    let mut force_sum = 0.0;
    let mut violated = false;
    for u in seq {
        let (f, v) = model.step_mut(&mut w, *u, config.dt, None);
        force_sum += f;
        violated |= v;
        ctrl += control_cost(&w.robot_vel, u, &model.robot.u_max, &config.weights.ctrl);
    }
    Simulated {
        ctrl,
        final_pose: w.robot_pose,
        force_sum,
        violated,
    }
}

/// Simulates and scores every sequence. Progress and force terms are
/// normalized over the feasible part of the batch.
pub fn evaluate_batch(
    model: &PhysicsModel,
    world: &WorldState,
    sequences: &[Vec<Control>],
    waypoints: &[Point2],
    config: &MppiConfig,
) -> Result<Vec<RolloutCost>, MppiError> {
    if waypoints.is_empty() {
        return Err(MppiError::NoWaypoints);
    }
    let sims: Vec<Simulated> = sequences
        .par_iter()
        .map(|s| simulate(model, world, s, config))
        .collect();
    let feasible: Vec<usize> = (0..sims.len()).filter(|&k| !sims[k].violated).collect();
    if feasible.is_empty() {
        return Err(MppiError::AllRolloutsInfeasible);
    }
    let closest: Vec<usize> = sims
        .iter()
        .map(|s| closest_waypoint(s.final_pose.position(), waypoints))
        .collect();
    let prog = progress_cost(&feasible.iter().map(|&k| closest[k]).collect::<Vec<_>>());
    let force = force_cost(
        &feasible
            .iter()
            .map(|&k| sims[k].force_sum)
            .collect::<Vec<_>>(),
        config.eps_force,
    );

    let w = &config.weights;
    let mut out: Vec<RolloutCost> = sims
        .iter()
        .zip(&closest)
        .map(|(s, &i)| RolloutCost {
            total: f64::INFINITY,
            breakdown: CostBreakdown::default(),
            closest_index_at_t: i,
            force_sum: s.force_sum,
            feasible: false,
        })
        .collect();
    for (slot, &k) in feasible.iter().enumerate() {
        let s = &sims[k];
        let p = s.final_pose.position();
        let target = waypoints[target_index(closest[k], waypoints.len())];
        let breakdown = CostBreakdown {
            ctrl: s.ctrl,
            dist: w.dist * target.dist(p) / config.alpha,
            prog: w.prog * prog[slot],
            rot: w.rot * rotation_cost(s.final_pose.theta, p, target),
            force: w.force * force[slot],
        };
        out[k] = RolloutCost {
            total: breakdown.sum(),
            breakdown,
            closest_index_at_t: closest[k],
            force_sum: s.force_sum,
            feasible: true,
        };
    }
    Ok(out)
}

/// Softmax weights over feasible rollouts, `exp(-(C_k - min C) / beta)`,
/// normalized to sum to one. Infinite costs get zero weight.
pub fn softmax_weights(costs: &[f64], beta: f64) -> Vec<f64> {
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = costs
        .iter()
        .map(|&c| {
            if c.is_finite() {
                (-(c - min) / beta).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    /// Control to apply this cycle.
    pub control: Control,
    /// Warm start for the next cycle.
    pub nominal: Vec<Control>,
    pub best_cost: f64,
}

/// One MPPI cycle from `world` along `waypoints`.
pub fn mppi_step(
    model: &PhysicsModel,
    world: &WorldState,
    nominal: &[Control],
    waypoints: &[Point2],
    config: &MppiConfig,
    seed: u64,
) -> Result<StepOutput, MppiError> {
    let samples = sample_controls(nominal, config, &model.robot.u_max, seed);
    let costs = evaluate_batch(model, world, &samples, waypoints, config)?;
    let totals: Vec<f64> = costs.iter().map(|c| c.total).collect();
    let weights = softmax_weights(&totals, config.beta);
    let mut blended = vec![[0.0; 3]; nominal.len()];
    for (seq, &wk) in samples.iter().zip(&weights) {
        if wk == 0.0 {
            continue;
        }
        for (acc, u) in blended.iter_mut().zip(seq) {
            let a = u.as_array();
            for i in 0..3 {
                acc[i] += wk * a[i];
            }
        }
    }
    let blended: Vec<Control> = blended.into_iter().map(Control::from_array).collect();
    let control = blended[0];
    let mut next = blended[1..].to_vec();
    next.push(*blended.last().expect("horizon >= 1"));
    Ok(StepOutput {
        control,
        nominal: next,
        best_cost: totals.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
