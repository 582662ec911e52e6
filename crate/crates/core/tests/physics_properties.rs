//! Simulator properties over generated rooms and random controls.

use namo_core::benchmark::{generate_scenario, GeneratorParams};
use namo_core::physics::{Control, MassSource, PhysicsModel, PhysicsParams, RobotModel, GRAVITY};
use namo_core::scenario::Room;
use namo_core::{Obstacle, Point2, Polygon, Pose2, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

const DT: f64 = 0.08;

fn model(s: &Scenario) -> PhysicsModel {
    PhysicsModel::from_scenario(
        s,
        MassSource::True,
        RobotModel::default(),
        PhysicsParams::default(),
    )
}

fn random_batch(r: &mut ChaCha8Rng, k: usize, t: usize) -> Vec<Vec<Control>> {
    (0..k)
        .map(|_| {
            (0..t)
                .map(|_| {
                    Control::new(
                        r.random_range(-1.0..1.0),
                        r.random_range(-1.0..1.0),
                        r.random_range(-1.5..1.5),
                    )
                })
                .collect()
        })
        .collect()
}

#[test]
pub fn batch_rollout_is_identical_across_thread_counts() {
    let s = generate_scenario(4, &GeneratorParams::default()).unwrap();
    let m = model(&s);
    let w = m.initial_state(&s, Pose2::new(s.start.x, s.start.y, 0.0));
    let batch = random_batch(&mut ChaCha8Rng::seed_from_u64(1), 64, 25);
    let run = |threads: usize| {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| m.batch_rollout(&w, &batch, DT))
    };
    let one = run(1);
    let serial: Vec<_> = batch.iter().map(|c| m.rollout(&w, c, DT)).collect();
    assert_eq!(one, serial);
    for threads in [2, 3, 8] {
        let many = run(threads);
        // compare bit patterns, not just values
        let bits = |v: &Vec<(Vec<namo_core::physics::WorldState>, Vec<f64>)>| format!("{v:?}");
        assert_eq!(bits(&one), bits(&many), "{threads} threads");
    }
}

fn lane(mass: f64) -> Scenario {
    let body = Obstacle::new(
        "box",
        Polygon::rectangle(0.6, 0.6).unwrap(),
        Pose2::new(3.0, 3.0, 0.0),
        mass,
    );
    Scenario::new(
        Room {
            length: 12.0,
            width: 6.0,
        },
        Point2::new(1.0, 3.0),
        Point2::new(11.0, 3.0),
        vec![body],
    )
}

/// Steady-state contact force while pushing `mass` straight ahead.
fn steady_push_force(mass: f64) -> f64 {
    let s = lane(mass);
    let m = model(&s);
    let mut w = m.initial_state(&s, Pose2::new(2.0, 3.0, 0.0));
    let mut forces = Vec::new();
    for _ in 0..60 {
        let (n, r) = m.step(&w, Control::new(0.5, 0.0, 0.0), DT);
        w = n;
        forces.push(r.total_force);
    }
    assert!(w.obstacle_poses[0].x > 4.0, "box of {mass} kg did not move");
    let tail = &forces[30..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

#[test]
pub fn push_force_is_proportional_to_mass() {
    let mu = PhysicsParams::default().mu_g;
    for mass in [2.0, 5.0, 10.0, 18.0, 25.0, 30.0] {
        let f = steady_push_force(mass);
        let want = mu * GRAVITY * mass;
        assert!(
            (f - want).abs() <= 0.05 * want,
            "{mass} kg: {f} N vs {want} N"
        );
    }
}

#[test]
pub fn non_movable_bodies_never_move() {
    let params = PhysicsParams::default();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let mut heavy_seen = 0;
    for seed in 0..6 {
        let s = generate_scenario(seed, &GeneratorParams::default()).unwrap();
        let m = model(&s);
        let w = m.initial_state(&s, Pose2::new(s.start.x, s.start.y, 0.0));
        let heavy: Vec<usize> = (0..m.body_count())
            .filter(|&i| {
                i >= s.obstacles.len() || params.push_force(s.obstacles[i].mass_true) > params.f_max
            })
            .collect();
        heavy_seen += heavy.len();
        // steer toward the goal with noise so rollouts run into things
        let batch: Vec<Vec<Control>> = random_batch(&mut r, 32, 150)
            .into_iter()
            .map(|seq| {
                seq.into_iter()
                    .map(|u| Control::new(u.vx.abs(), u.vy, u.omega))
                    .collect()
            })
            .collect();
        for (states, _) in m.batch_rollout(&w, &batch, DT) {
            for st in &states {
                for &i in &heavy {
                    assert_eq!(
                        st.obstacle_poses[i], w.obstacle_poses[i],
                        "seed {seed} body {i} moved"
                    );
                }
            }
        }
    }
    assert!(heavy_seen > 20);
}

#[test]
pub fn no_tunneling_at_full_speed() {
    let thin = |mass: f64| {
        let wall = Obstacle::new(
            "thin",
            Polygon::rectangle(0.02, 5.0).unwrap(),
            Pose2::new(4.0, 3.0, 0.0),
            mass,
        );
        Scenario::new(
            Room {
                length: 12.0,
                width: 6.0,
            },
            Point2::new(1.0, 3.0),
            Point2::new(11.0, 3.0),
            vec![wall],
        )
    };
    let u_max = RobotModel::default().u_max;
    for heading in [0.0, 0.3, -0.5, std::f64::consts::FRAC_PI_2] {
        let s = thin(80.0);
        let m = model(&s);
        let mut w = m.initial_state(&s, Pose2::new(2.5, 3.0, heading));
        for dt in [DT, 0.5] {
            for _ in 0..40 {
                let (n, _) = m.step(&w, Control::new(u_max.vx, 0.0, u_max.omega), dt);
                w = n;
                // the footprint never reaches the far side of the wall
                let footprint = m.robot_polygon(&w.robot_pose);
                assert!(
                    footprint.vertices().iter().all(|p| p.x < 4.01 + 1e-6),
                    "heading {heading}, dt {dt}: robot at {:?}",
                    w.robot_pose
                );
            }
        }
    }
}
