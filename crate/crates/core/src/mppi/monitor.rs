//! Movability monitor: watches for stalled, deviating or slipping motion
//! and asks for a replan once any of those persists past `tau_replan`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::physics::Control;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorThresholds {
    /// Stall speed, m/s.
    pub eps: f64,
    /// Allowed relative deviation between commanded and measured speed.
    pub lambda: f64,
    /// Slip speed, m/s.
    pub mu: f64,
    /// Seconds a condition must persist before replanning.
    pub tau: f64,
    /// Window over which "stationary" is judged, s.
    pub window: f64,
    /// Displacement below which the robot counts as stationary, m.
    pub still_distance: f64,
}

impl Default for MonitorThresholds {
    fn default() -> Self {
        MonitorThresholds {
            eps: 0.1,
            lambda: 0.75,
            mu: 0.1,
            tau: 30.0,
            window: 1.0,
            still_distance: 0.02,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    /// Commanded to move but barely moving.
    pub stall: bool,
    /// Measured velocity far from the command.
    pub deviation: bool,
    /// Moving fast but going nowhere.
    pub slip: bool,
}

impl Conditions {
    pub fn any(&self) -> bool {
        self.stall || self.deviation || self.slip
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplanSignal {
    /// Scenario obstacle index held responsible, if any was in contact.
    pub obstacle: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorState {
    pub timer_started: Option<f64>,
    pub thresholds: MonitorThresholds,
    pub last: Conditions,
    culprit: Option<usize>,
    window: VecDeque<(f64, Point2)>,
}

impl MonitorState {
    pub fn new(thresholds: MonitorThresholds) -> Self {
        MonitorState {
            timer_started: None,
            thresholds,
            last: Conditions::default(),
            culprit: None,
            window: VecDeque::new(),
        }
    }

    pub fn timer_active(&self) -> bool {
        self.timer_started.is_some()
    }

    /// Displacement over the trailing window, once the window is full.
    fn window_displacement(&self, now: f64) -> Option<f64> {
        let &(t0, p0) = self.window.front()?;
        let &(_, p1) = self.window.back()?;
        (t0 <= now - self.thresholds.window + 1e-9).then(|| p0.dist(p1))
    }

    pub fn evaluate(&self, commanded: &Control, actual: &Control, now: f64) -> Conditions {
        let th = &self.thresholds;
        let cmd = commanded.linear_speed();
        let act = actual.linear_speed();
        let diff =
            Control::new(actual.vx - commanded.vx, actual.vy - commanded.vy, 0.0).linear_speed();
        Conditions {
            stall: cmd > th.eps && act < th.eps,
            deviation: cmd > th.eps && diff > th.lambda * cmd,
            slip: act > th.mu
                && self
                    .window_displacement(now)
                    .is_some_and(|d| d < th.still_distance),
        }
    }

    /// One control cycle. `contact` is the obstacle currently pressed
    /// hardest, if any.
    pub fn update(
        &mut self,
        commanded: &Control,
        actual: &Control,
        position: Point2,
        now: f64,
        contact: Option<usize>,
    ) -> Option<ReplanSignal> {
        self.window.push_back((now, position));
        while self.window.len() >= 2 && self.window[1].0 <= now - self.thresholds.window + 1e-9 {
            self.window.pop_front();
        }
        let cond = self.evaluate(commanded, actual, now);
        self.last = cond;
        if !cond.any() {
            self.timer_started = None;
            self.culprit = None;
            return None;
        }
        let started = *self.timer_started.get_or_insert(now);
        if contact.is_some() {
            self.culprit = contact;
        }
        if now - started > self.thresholds.tau {
            let signal = ReplanSignal {
                obstacle: self.culprit.take(),
            };
            self.timer_started = None;
            return Some(signal);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 0.08;

    struct Driver {
        mon: MonitorState,
        step: usize,
        pos: Point2,
    }

    impl Driver {
        fn new() -> Self {
            Driver {
                mon: MonitorState::new(MonitorThresholds::default()),
                step: 0,
                pos: Point2::new(0.0, 0.0),
            }
        }

        /// Feeds `seconds` of identical cycles; the robot moves with `act`
        /// unless `frozen`.
        fn run(
            &mut self,
            cmd: Control,
            act: Control,
            seconds: f64,
            frozen: bool,
        ) -> Vec<(f64, ReplanSignal)> {
            let mut out = Vec::new();
            for _ in 0..(seconds / DT).round() as usize {
                self.step += 1;
                let now = self.step as f64 * DT;
                if !frozen {
                    self.pos += Point2::new(act.vx * DT, act.vy * DT);
                }
                if let Some(s) = self.mon.update(&cmd, &act, self.pos, now, Some(3)) {
                    out.push((now, s));
                }
            }
            out
        }
    }

    #[test]
    fn tracking_keeps_timer_reset() {
        let mut d = Driver::new();
        let u = Control::new(1.0, 0.0, 0.0);
        assert!(d.run(u, u, 60.0, false).is_empty());
        assert!(!d.mon.timer_active());
    }

    #[test]
    fn sustained_stall_triggers_replan() {
        let mut d = Driver::new();
        let signals = d.run(
            Control::new(1.0, 0.0, 0.0),
            Control::new(0.05, 0.0, 0.0),
            31.0,
            false,
        );
        assert_eq!(signals.len(), 1);
        let (t, s) = &signals[0];
        assert!(*t > 30.0 && *t < 30.0 + 3.0 * DT, "fired at {t}");
        assert_eq!(s.obstacle, Some(3));
        assert!(d.mon.last.stall);
    }

    #[test]
    fn deviation_rule() {
        let mon = MonitorState::new(MonitorThresholds::default());
        let c = mon.evaluate(
            &Control::new(1.0, 0.0, 0.0),
            &Control::new(0.2, 0.0, 0.0),
            0.0,
        );
        assert!(c.deviation && !c.stall);
        let c = mon.evaluate(
            &Control::new(1.0, 0.0, 0.0),
            &Control::new(0.3, 0.0, 0.0),
            0.0,
        );
        assert!(!c.deviation);
    }

    #[test]
    fn slip_needs_a_full_window() {
        let mut d = Driver::new();
        // reports 0.5 m/s while staying put
        let act = Control::new(0.5, 0.0, 0.0);
        d.run(act, act, 0.48, true);
        assert!(!d.mon.last.slip);
        d.run(act, act, 0.8, true);
        assert!(d.mon.last.slip);
        assert!(d.mon.timer_active());
    }

    #[test]
    fn timer_resets_when_conditions_clear() {
        let mut d = Driver::new();
        let u = Control::new(1.0, 0.0, 0.0);
        let slow = Control::new(0.05, 0.0, 0.0);
        d.run(u, slow, 20.0, false);
        assert!(d.mon.timer_active());
        d.run(u, u, DT, false);
        assert!(!d.mon.timer_active());
        // another 20 s of stall is not enough after the reset
        assert!(d.run(u, slow, 20.0, false).is_empty());
    }
}
