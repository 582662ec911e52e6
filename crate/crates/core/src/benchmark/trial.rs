//! One closed-loop run: plan, track with MPPI against the true-mass world,
//! watch for stalls, replan.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{plan, PlannerKind};
use crate::config::Config;
use crate::geometry::{Point2, Pose2};
use crate::mppi::{mppi_step, Conditions, MonitorState, MppiError};
use crate::physics::{ContactReport, Control, MassSource, PhysicsModel, RobotModel};
use crate::planner::EndpointPolicy;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialLimits {
    /// Success radius around the goal, m.
    pub goal_tolerance: f64,
    /// Simulated-time cap, s.
    pub max_sim_time: f64,
    /// Give up after this long without getting 0.1 m closer to the goal, s.
    pub stall_abort: f64,
    /// Replan when the monitor fires.
    pub replan: bool,
}

impl Default for TrialLimits {
    fn default() -> Self {
        TrialLimits {
            goal_tolerance: 0.2,
            max_sim_time: 300.0,
            stall_abort: 60.0,
            replan: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Reached,
    NoPath,
    TimeLimit,
    Stalled,
    ReplanFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub planner: PlannerKind,
    pub path_found: bool,
    /// Wall-clock build + search time of the initial plan, s.
    pub planner_time: f64,
    pub executed: bool,
    /// Simulated time until the goal or the end of the run, s.
    pub execution_time: f64,
    /// Σ total contact force · dt, N·s.
    pub cumulative_force: f64,
    /// Σ total contact force over control cycles, kN.
    pub force_kn_steps: f64,
    pub replans: usize,
    pub cycles: usize,
    pub outcome: Outcome,
}

/// First trace line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub planner: PlannerKind,
    pub scenario: Scenario,
    pub waypoints: Vec<Point2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovedObstacle {
    pub index: usize,
    pub pose: Pose2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    #[serde(flatten)]
    pub conditions: Conditions,
    pub timer_active: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Replan {
        obstacle: Option<String>,
        ok: bool,
        waypoints: Vec<Point2>,
    },
    Infeasible,
}

/// One control cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub pose: Pose2,
    pub vel: Control,
    pub cmd: Control,
    pub force: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moved: Vec<MovedObstacle>,
    pub monitor: MonitorRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<TraceEvent>,
}

/// A parsed trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn parse(text: &str) -> Result<Trace, serde_json::Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: TraceHeader = serde_json::from_str(lines.next().unwrap_or(""))?;
        let records = lines.map(serde_json::from_str).collect::<Result<_, _>>()?;
        Ok(Trace { header, records })
    }

    /// Obstacle poses after the last record.
    pub fn final_poses(&self) -> Vec<Pose2> {
        let mut poses: Vec<Pose2> = self
            .header
            .scenario
            .obstacles
            .iter()
            .map(|o| o.pose)
            .collect();
        for r in &self.records {
            for m in &r.moved {
                if let Some(p) = poses.get_mut(m.index) {
                    *p = m.pose;
                }
            }
        }
        poses
    }

    /// Σ force · dt over the records.
    pub fn cumulative_force(&self, dt: f64) -> f64 {
        self.records.iter().map(|r| r.force * dt).sum()
    }
}

/// Deterministic per-cycle seed.
fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn planner_salt(kind: PlannerKind) -> u64 {
    kind as u64 + 1
}

fn write_line<T: Serialize>(out: &mut Option<&mut dyn Write>, value: &T) -> std::io::Result<()> {
    if let Some(w) = out.as_mut() {
        serde_json::to_writer(&mut **w, value)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Runs one trial. Trace lines go to `trace` when given; only I/O errors on
/// the trace fail the call.
pub fn run_trial(
    scenario: &Scenario,
    kind: PlannerKind,
    cfg: &Config,
    mut trace: Option<&mut dyn Write>,
) -> std::io::Result<TrialResult> {
    let limits = &cfg.trial;
    let seed = mix(scenario.seed, planner_salt(kind));
    let robot = RobotModel::default();
    let mut result = TrialResult {
        seed: scenario.seed,
        planner: kind,
        path_found: false,
        planner_time: 0.0,
        executed: false,
        execution_time: 0.0,
        cumulative_force: 0.0,
        force_kn_steps: 0.0,
        replans: 0,
        cycles: 0,
        outcome: Outcome::NoPath,
    };

    let clock = Instant::now();
    let initial = plan(
        kind,
        scenario,
        scenario.start,
        &cfg.planning,
        &cfg.brrt,
        seed,
        EndpointPolicy::Strict,
    );
    result.planner_time = clock.elapsed().as_secs_f64();
    let header = TraceHeader {
        planner: kind,
        scenario: scenario.clone(),
        waypoints: initial
            .as_ref()
            .map(|p| p.waypoints.points.clone())
            .unwrap_or_default(),
    };
    write_line(&mut trace, &header)?;
    let Ok(initial) = initial else {
        return Ok(result);
    };
    result.path_found = true;
    let mut waypoints = initial.waypoints.points;

    let mut belief = scenario.clone();
    let truth = PhysicsModel::from_scenario(scenario, MassSource::True, robot.clone(), cfg.physics);
    let mut model =
        PhysicsModel::from_scenario(&belief, MassSource::Believed, robot.clone(), cfg.physics);
    let heading = waypoints.get(1).copied().unwrap_or(scenario.goal) - scenario.start;
    let theta = if heading.norm() > 1e-9 {
        heading.y.atan2(heading.x)
    } else {
        0.0
    };
    let mut world = truth.initial_state(
        scenario,
        Pose2::new(scenario.start.x, scenario.start.y, theta),
    );
    let mut nominal = vec![Control::ZERO; cfg.mppi.t];
    let mut monitor = MonitorState::new(cfg.monitor);
    let mut report = ContactReport::default();
    let n_obs = scenario.obstacles.len();
    let mut best_dist = world.robot_pose.position().dist(scenario.goal);
    let mut best_at = 0.0;
    result.outcome = Outcome::TimeLimit;

    loop {
        let pos = world.robot_pose.position();
        let d = pos.dist(scenario.goal);
        if d <= limits.goal_tolerance {
            result.executed = true;
            result.outcome = Outcome::Reached;
            break;
        }
        if world.time >= limits.max_sim_time - 1e-9 {
            result.outcome = Outcome::TimeLimit;
            break;
        }
        if d < best_dist - 0.1 {
            best_dist = d;
            best_at = world.time;
        }
        if world.time - best_at > limits.stall_abort {
            result.outcome = Outcome::Stalled;
            break;
        }

        let step_seed = mix(seed, result.cycles as u64);
        let mut event = None;
        let cmd = match mppi_step(&model, &world, &nominal, &waypoints, &cfg.mppi, step_seed) {
            Ok(out) => {
                nominal = out.nominal;
                out.control
            }
            Err(MppiError::AllRolloutsInfeasible) => {
                event = Some(TraceEvent::Infeasible);
                nominal.fill(Control::ZERO);
                Control::ZERO
            }
            Err(MppiError::NoWaypoints) => unreachable!("plans always hold the start"),
        };

        let before = world.obstacle_poses.clone();
        truth.step_mut(&mut world, cmd, cfg.mppi.dt, Some(&mut report));
        result.cycles += 1;
        result.cumulative_force += report.total_force * cfg.mppi.dt;
        result.force_kn_steps += report.total_force / 1000.0;

        let contact = report
            .contacts
            .iter()
            .filter(|c| c.obstacle < n_obs)
            .max_by(|a, b| a.force.total_cmp(&b.force))
            .map(|c| c.obstacle);
        let signal = monitor.update(
            &cmd,
            &world.robot_vel,
            world.robot_pose.position(),
            world.time,
            contact,
        );
        let moved: Vec<MovedObstacle> = (0..n_obs)
            .filter(|&i| world.obstacle_poses[i] != before[i])
            .map(|i| MovedObstacle {
                index: i,
                pose: world.obstacle_poses[i],
            })
            .collect();
        let monitor_record = MonitorRecord {
            conditions: monitor.last,
            timer_active: monitor.timer_active(),
        };

        if let (Some(signal), true) = (signal, limits.replan) {
            let culprit = signal.obstacle.map(|i| scenario.obstacles[i].id.clone());
            belief = belief.with_poses(&world.obstacle_poses[..n_obs]);
            if let Some(id) = &culprit {
                belief
                    .update_movability(id, cfg.planning.max_mass)
                    .expect("culprit comes from the scenario");
            }
            model = PhysicsModel::from_scenario(
                &belief,
                MassSource::Believed,
                robot.clone(),
                cfg.physics,
            );
            result.replans += 1;
            let robot_at = world.robot_pose.position();
            let replanned = plan(
                kind,
                &belief,
                robot_at,
                &cfg.planning,
                &cfg.brrt,
                mix(seed, 1000 + result.replans as u64),
                EndpointPolicy::Relaxed,
            );
            let ok = replanned.is_ok();
            if let Ok(p) = &replanned {
                waypoints = p.waypoints.points.clone();
                nominal.fill(Control::ZERO);
            }
            event = Some(TraceEvent::Replan {
                obstacle: culprit,
                ok,
                waypoints: replanned.map(|p| p.waypoints.points).unwrap_or_default(),
            });
            best_at = world.time;
            if !ok {
                result.outcome = Outcome::ReplanFailed;
            }
        }

        write_line(
            &mut trace,
            &TraceRecord {
                t: world.time,
                pose: world.robot_pose,
                vel: world.robot_vel,
                cmd,
                force: report.total_force,
                moved,
                monitor: monitor_record,
                event,
            },
        )?;
        if result.outcome == Outcome::ReplanFailed {
            break;
        }
    }
    result.execution_time = world.time;
    Ok(result)
}
