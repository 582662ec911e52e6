//! Bindings for the browser demo in `www/`. Exports take and return JSON
//! text. The `*_json` functions carry the logic and run natively too.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use namo_core::baselines::{plan, BrrtParams, PlannerKind};
use namo_core::benchmark::{generate_scenario, GeneratorParams};
use namo_core::config::PlanningParams;
use namo_core::planner::{EndpointPolicy, NodeKind};
use namo_core::{Point2, Scenario};

#[derive(Serialize)]
struct ObstacleView {
    id: String,
    polygon: Vec<Point2>,
    mass: f64,
    movable: bool,
}

#[derive(Serialize)]
struct NodeView {
    position: Point2,
    passage: bool,
    cost: f64,
}

#[derive(Serialize)]
struct PlanView {
    planner: String,
    found: bool,
    error: Option<String>,
    room: [f64; 2],
    start: Point2,
    goal: Point2,
    obstacles: Vec<ObstacleView>,
    nodes: Vec<NodeView>,
    edges: Vec<[usize; 2]>,
    route: Vec<Point2>,
}

fn parse(scenario: &str) -> Result<Scenario, String> {
    Scenario::from_json(scenario).map_err(|e| e.to_string())
}

/// A generated room as scenario JSON.
pub fn generate_json(seed: u64, mass_belief_error: f64) -> Result<String, String> {
    let params = GeneratorParams {
        mass_belief_error: mass_belief_error.clamp(0.0, 1.0),
        ..GeneratorParams::default()
    };
    generate_scenario(seed, &params)
        .map(|s| s.to_json())
        .map_err(|e| e.to_string())
}

/// Plans with `planner` and returns everything the page draws.
pub fn plan_json(scenario: &str, planner: &str) -> Result<String, String> {
    let s = parse(scenario)?;
    let kind: PlannerKind = planner.parse()?;
    let planning = PlanningParams::default();
    let result = plan(
        kind,
        &s,
        s.start,
        &planning,
        &BrrtParams::default(),
        s.seed,
        EndpointPolicy::Strict,
    );
    let obstacles = s
        .obstacles
        .iter()
        .map(|o| ObstacleView {
            id: o.id.clone(),
            polygon: o.world_polygon().vertices().to_vec(),
            mass: o.mass_believed,
            movable: o.movable_believed(planning.max_mass),
        })
        .collect();
    let mut view = PlanView {
        planner: kind.label().to_string(),
        found: result.is_ok(),
        error: None,
        room: [s.room.length, s.room.width],
        start: s.start,
        goal: s.goal,
        obstacles,
        nodes: Vec::new(),
        edges: Vec::new(),
        route: Vec::new(),
    };
    match result {
        Ok(p) => {
            view.nodes = p
                .graph
                .nodes
                .iter()
                .map(|n| NodeView {
                    position: n.position,
                    passage: n.kind == NodeKind::Passage,
                    cost: n.node_cost,
                })
                .collect();
            view.edges = p.graph.edges.iter().map(|e| [e.a, e.b]).collect();
            view.route = p.route;
        }
        Err(e) => view.error = Some(e.to_string()),
    }
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Marks obstacle `id` as too heavy to push, as the monitor would after a
/// failed push, and returns the updated scenario.
pub fn mark_heavy_json(scenario: &str, id: &str) -> Result<String, String> {
    let mut s = parse(scenario)?;
    s.update_movability(id, PlanningParams::default().max_mass)
        .map_err(|e| e.to_string())?;
    Ok(s.to_json())
}

#[wasm_bindgen]
pub fn generate(seed: u32, mass_belief_error: f64) -> Result<String, JsValue> {
    generate_json(seed as u64, mass_belief_error).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = plan)]
pub fn plan_scenario(scenario: &str, planner: &str) -> Result<String, JsValue> {
    plan_json(scenario, planner).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = markHeavy)]
pub fn mark_heavy(scenario: &str, id: &str) -> Result<String, JsValue> {
    mark_heavy_json(scenario, id).map_err(|e| JsValue::from_str(&e))
}
