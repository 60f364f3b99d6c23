//! Minimal SVG line-plot emitter for simulation traces: four stacked panels
//! (h, φ, θ, ψ against time) with the setpoint drawn as a dashed line. No
//! plotting dependency, just enough markup for a quick look at a run.

use crate::sim::{Setpoints, Trace};

const PANEL_WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 150.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 24.0;
const PANEL_GAP: f64 = 34.0;

struct Panel<'a> {
    label: &'a str,
    state_index: usize,
    setpoint: f64,
}

pub fn render_trace(trace: &Trace, setpoints: &Setpoints) -> String {
    let panels = [
        Panel { label: "h [m]", state_index: 0, setpoint: setpoints.h_c },
        Panel { label: "phi [rad]", state_index: 1, setpoint: setpoints.phi_c },
        Panel { label: "theta [rad]", state_index: 2, setpoint: setpoints.theta_c },
        Panel { label: "psi [rad]", state_index: 3, setpoint: setpoints.psi_c },
    ];
    let total_w = MARGIN_LEFT + PANEL_WIDTH + MARGIN_RIGHT;
    let total_h = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + PANEL_GAP);

    let t_max = trace.rows.last().map_or(1.0, |r| r.t).max(1e-9);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w}\" height=\"{total_h}\" \
         viewBox=\"0 0 {total_w} {total_h}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{total_w}\" height=\"{total_h}\" fill=\"white\"/>\n"
    ));

    for (i, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + i as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;

        let mut lo = panel.setpoint;
        let mut hi = panel.setpoint;
        for row in &trace.rows {
            let v = row.state[panel.state_index];
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let pad = ((hi - lo) * 0.08).max(1e-3);
        lo -= pad;
        hi += pad;

        let x_of = |t: f64| MARGIN_LEFT + t / t_max * PANEL_WIDTH;
        let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * PANEL_HEIGHT;

        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{top}\" width=\"{PANEL_WIDTH}\" height=\"{PANEL_HEIGHT}\" \
             fill=\"none\" stroke=\"#999\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            top + PANEL_HEIGHT / 2.0,
            panel.label
        ));
        for (v, anchor_y) in [(hi, top + 12.0), (lo, bottom)] {
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{anchor_y}\" text-anchor=\"end\" fill=\"#666\">{v:.3}</text>\n",
                MARGIN_LEFT - 8.0
            ));
        }

        let y_sp = y_of(panel.setpoint);
        if y_sp.is_finite() && y_sp >= top && y_sp <= bottom {
            out.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT}\" y1=\"{y_sp}\" x2=\"{}\" y2=\"{y_sp}\" \
                 stroke=\"#c33\" stroke-dasharray=\"6,4\"/>\n",
                MARGIN_LEFT + PANEL_WIDTH
            ));
        }

        // decimate to at most ~2000 polyline points
        let stride = (trace.rows.len() / 2000).max(1);
        let mut points = String::new();
        for row in trace.rows.iter().step_by(stride) {
            let v = row.state[panel.state_index];
            if !v.is_finite() {
                break;
            }
            let y = y_of(v).clamp(top, bottom);
            points.push_str(&format!("{:.2},{:.2} ", x_of(row.t), y));
        }
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\"/>\n",
            points.trim_end()
        ));
    }

    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#333\">t [s]  ({:?})</text>\n",
        MARGIN_LEFT + PANEL_WIDTH / 2.0,
        total_h - 8.0,
        trace.classification
    ));
    out.push_str("</svg>\n");
    out
}
