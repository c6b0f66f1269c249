//! Static SVG frames built from snapshot records and the config alone.
//!
//! Legend: unexplored tube purple, explored area green (union of vision
//! disks of every pose visited so far), obstacles yellow, comm links and
//! explorers black, base red.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::config::Config;
use crate::output::{RoleName, SnapshotRecord};

pub const UNEXPLORED: &str = "#6a3d9a";
pub const EXPLORED: &str = "#33a02c";
pub const OBSTACLE: &str = "#ffd92f";
pub const LINK: &str = "#000000";
pub const ROBOT: &str = "#000000";
pub const BASE_COLOR: &str = "#e31a1c";

/// Pixels per world unit.
const SCALE: f64 = 20.0;
const ROBOT_RADIUS: f64 = 0.15;

fn px(v: f64) -> String {
    format!("{:.2}", v * SCALE)
}

/// Renders the frame at `timestep`. Returns `None` if no snapshot has it.
pub fn render_frame(config: &Config, snapshots: &[SnapshotRecord], timestep: u32) -> Option<String> {
    let current = snapshots.iter().find(|s| s.timestep == timestep)?;
    let length = config.environment.length;
    let width = config.environment.width;
    // world y grows upward, SVG y downward
    let sy = |y: f64| px(width - y);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = px(length),
        h = px(width)
    );
    let _ = writeln!(svg, "<title>t = {timestep}, coverage {:.4}</title>", current.coverage);
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="tube"><rect x="0" y="0" width="{}" height="{}"/></clipPath></defs>"#,
        px(length),
        px(width)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="{UNEXPLORED}"/>"#,
        px(length),
        px(width)
    );

    let mut seen = BTreeSet::new();
    let _ = writeln!(svg, r#"<g clip-path="url(#tube)" fill="{EXPLORED}">"#);
    for s in snapshots.iter().filter(|s| s.timestep <= timestep) {
        for r in &s.robots {
            let key = (px(r.x), sy(r.y));
            if seen.insert(key.clone()) {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                    key.0,
                    key.1,
                    px(config.planner.vision_radius)
                );
            }
        }
    }
    let _ = writeln!(svg, "</g>");

    for o in &config.environment.obstacles {
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{OBSTACLE}"/>"#,
            px(o.x),
            sy(o.y),
            px(o.radius)
        );
    }

    let robots = &current.robots;
    let range_sq = config.planner.comm_range * config.planner.comm_range;
    let _ = writeln!(svg, r#"<g stroke="{LINK}" stroke-width="1">"#);
    for (i, a) in robots.iter().enumerate() {
        for b in &robots[i + 1..] {
            if (a.x - b.x).powi(2) + (a.y - b.y).powi(2) <= range_sq {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    px(a.x),
                    sy(a.y),
                    px(b.x),
                    sy(b.y)
                );
            }
        }
    }
    let _ = writeln!(svg, "</g>");

    for r in robots {
        let fill = match r.role {
            RoleName::Base => BASE_COLOR,
            RoleName::Explorer => ROBOT,
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            px(r.x),
            sy(r.y),
            px(ROBOT_RADIUS)
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}
