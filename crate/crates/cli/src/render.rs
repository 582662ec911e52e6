//! Static SVG figures of graphs and executed trials.

use std::fmt::Write;

use namo_core::benchmark::{Trace, TraceEvent};
use namo_core::planner::NodeKind;
use namo_core::{Obstacle, Point2, Polygon, Pose2, Scenario};

use crate::GraphDump;

const PX_PER_M: f64 = 100.0;
const MARGIN: f64 = 30.0;
/// Masses at or above this render fully dark.
const DARKEST_MASS: f64 = 100.0;

struct Canvas {
    height_m: f64,
    body: String,
}

impl Canvas {
    fn new(s: &Scenario) -> Canvas {
        let mut c = Canvas {
            height_m: s.room.width,
            body: String::new(),
        };
        let (w, h) = (s.room.length * PX_PER_M, s.room.width * PX_PER_M);
        let _ = writeln!(
            c.body,
            r##"<rect x="{MARGIN}" y="{MARGIN}" width="{w:.1}" height="{h:.1}" fill="#fafafa" stroke="#222" stroke-width="4"/>"##
        );
        c
    }

    /// World metres to pixels, y up.
    fn px(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + p.x * PX_PER_M,
            MARGIN + (self.height_m - p.y) * PX_PER_M,
        )
    }

    fn points(&self, pts: &[Point2]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.1},{y:.1}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn polygon(&mut self, poly: &Polygon, style: &str) {
        let pts = self.points(poly.vertices());
        let _ = writeln!(self.body, r#"<polygon points="{pts}" {style}/>"#);
    }

    fn polyline(&mut self, pts: &[Point2], style: &str) {
        if pts.len() < 2 {
            return;
        }
        let pts = self.points(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline points="{pts}" fill="none" {style}/>"#
        );
    }

    fn line(&mut self, a: Point2, b: Point2, style: &str) {
        let ((x1, y1), (x2, y2)) = (self.px(a), self.px(b));
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" {style}/>"#
        );
    }

    fn circle(&mut self, c: Point2, r_px: f64, style: &str) {
        let (x, y) = self.px(c);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.1}" cy="{y:.1}" r="{r_px:.1}" {style}/>"#
        );
    }

    fn text(&mut self, at: Point2, label: &str, style: &str) {
        let (x, y) = self.px(at);
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="middle" dominant-baseline="middle" {style}>{}</text>"#,
            escape(label)
        );
    }

    fn obstacles(&mut self, obstacles: &[Obstacle], poses: &[Pose2]) {
        for (o, pose) in obstacles.iter().zip(poses) {
            let poly = o.shape.transformed(pose);
            let shade = (o.mass_true / DARKEST_MASS).clamp(0.1, 1.0);
            self.polygon(
                &poly,
                &format!(r##"fill="#3a4a5c" fill-opacity="{shade:.2}" stroke="#1c2530" stroke-width="1.5""##),
            );
            let label = format!("{} {:.0}kg", o.id, o.mass_true);
            self.text(poly.centroid(), &label, r##"font-size="10" fill="#111""##);
        }
    }

    fn endpoints(&mut self, s: &Scenario) {
        self.circle(s.start, 8.0, r##"fill="#2e7d32""##);
        self.text(s.start, "S", r##"font-size="10" fill="#fff""##);
        self.circle(s.goal, 8.0, r##"fill="#c62828""##);
        self.text(s.goal, "G", r##"font-size="10" fill="#fff""##);
    }

    fn arrow(&mut self, from: Point2, to: Point2) {
        self.line(
            from,
            to,
            r##"stroke="#e65100" stroke-width="2" marker-end="url(#arrow)""##,
        );
    }

    fn finish(self, title: &str, s: &Scenario) -> String {
        let w = s.room.length * PX_PER_M + 2.0 * MARGIN;
        let h = s.room.width * PX_PER_M + 2.0 * MARGIN;
        format!(
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">
<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#e65100"/></marker></defs>
<text x="{MARGIN}" y="18" font-size="13">{}</text>
{}</svg>
"##,
            escape(title),
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn initial_poses(s: &Scenario) -> Vec<Pose2> {
    s.obstacles.iter().map(|o| o.pose).collect()
}

/// Obstacles, graph edges and nodes (passage nodes in orange), and the
/// chosen route.
pub fn graph_svg(dump: &GraphDump) -> String {
    let s = &dump.scenario;
    let mut c = Canvas::new(s);
    c.obstacles(&s.obstacles, &initial_poses(s));
    if let Some(g) = &dump.graph {
        for e in &g.edges {
            c.line(
                g.nodes[e.a].position,
                g.nodes[e.b].position,
                r##"stroke="#90a4ae" stroke-width="0.8""##,
            );
        }
        for n in &g.nodes {
            let style = match n.kind {
                NodeKind::Free => r##"fill="#263238""##,
                NodeKind::Passage => r##"fill="#ff9800" stroke="#000" stroke-width="0.8""##,
            };
            c.circle(
                n.position,
                if n.kind == NodeKind::Passage {
                    5.0
                } else {
                    3.0
                },
                style,
            );
        }
    }
    c.polyline(&dump.route, r##"stroke="#1565c0" stroke-width="3""##);
    c.endpoints(s);
    let title = if dump.path_found {
        format!("{} graph", dump.planner.label())
    } else {
        format!("{} graph, no path", dump.planner.label())
    };
    c.finish(&title, s)
}

/// Initial obstacles dashed, final obstacles filled, displacement arrows,
/// the planned waypoints and the executed trajectory.
pub fn trace_svg(trace: &Trace) -> String {
    let s = &trace.header.scenario;
    let mut c = Canvas::new(s);
    let start = initial_poses(s);
    let end = trace.final_poses();
    for o in &s.obstacles {
        c.polygon(
            &o.world_polygon(),
            r##"fill="none" stroke="#78909c" stroke-width="1" stroke-dasharray="4 3""##,
        );
    }
    c.obstacles(&s.obstacles, &end);
    for (o, (a, b)) in s.obstacles.iter().zip(start.iter().zip(&end)) {
        let from = a.transform_point(o.shape.centroid());
        let to = b.transform_point(o.shape.centroid());
        if from.dist(to) > 0.01 {
            c.arrow(from, to);
        }
    }
    c.polyline(
        &trace.header.waypoints,
        r##"stroke="#43a047" stroke-width="1.5" stroke-dasharray="2 4""##,
    );
    let mut path = vec![s.start];
    path.extend(trace.records.iter().map(|r| r.pose.position()));
    c.polyline(&path, r##"stroke="#1565c0" stroke-width="2.5""##);
    for r in &trace.records {
        if let Some(TraceEvent::Replan { .. }) = r.event {
            c.circle(
                r.pose.position(),
                7.0,
                r##"fill="none" stroke="#d81b60" stroke-width="2.5""##,
            );
        }
    }
    c.endpoints(s);
    let t = trace.records.last().map_or(0.0, |r| r.t);
    c.finish(
        &format!("{} trial, {t:.1} s", trace.header.planner.label()),
        s,
    )
}
