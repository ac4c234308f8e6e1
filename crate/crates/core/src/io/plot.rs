//! Static SVG plots in the style of the experiment figures: a two-panel
//! trace view (TCP-hand distance on top, hand speed below) with rule
//! lines at the safety thresholds, and a per-condition summary chart for
//! reports.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::report::Report;
use crate::io::trace::StoredTrace;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const PANEL_GAP: f64 = 50.0;
/// Cap on polyline vertices per series; longer traces are stride-decimated.
const MAX_POINTS: usize = 2400;

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    t_max: f64,
    y_max: f64,
}

impl Panel {
    fn sx(&self, t: f64) -> f64 {
        self.x0 + t / self.t_max * self.w
    }

    fn sy(&self, v: f64) -> f64 {
        self.y0 + self.h - (v.clamp(0.0, self.y_max) / self.y_max) * self.h
    }

    fn polyline(&self, svg: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
        if pts.is_empty() {
            return;
        }
        let stride = (pts.len() / MAX_POINTS).max(1);
        let mut d = String::new();
        for (i, (t, v)) in pts.iter().step_by(stride).enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{}{:.2} {:.2}", cmd, self.sx(*t), self.sy(*v));
        }
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = write!(
            svg,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#
        );
    }

    fn hline(&self, svg: &mut String, v: f64, color: &str, dashed: bool, label: &str) {
        if v > self.y_max {
            return;
        }
        let y = self.sy(v);
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = write!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1"{dash}/>"#,
            self.x0,
            self.x0 + self.w
        );
        let _ = write!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{label}</text>"#,
            self.x0 + self.w - 120.0,
            y - 4.0
        );
    }

    fn frame(&self, svg: &mut String, title: &str, y_label: &str) {
        let _ = write!(
            svg,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" fill="#111">{title}</text>"##,
            self.x0,
            self.y0 - 8.0
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#111" transform="rotate(-90 {:.2} {:.2})">{y_label}</text>"##,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0
        );
        // Axis ticks: quarters.
        for i in 0..=4 {
            let t = self.t_max * i as f64 / 4.0;
            let x = self.sx(t);
            let _ = write!(
                svg,
                r##"<text x="{x:.2}" y="{:.2}" font-size="10" fill="#444" text-anchor="middle">{t:.1}</text>"##,
                self.y0 + self.h + 14.0
            );
            let v = self.y_max * i as f64 / 4.0;
            let y = self.sy(v);
            let _ = write!(
                svg,
                r##"<text x="{:.2}" y="{:.2}" font-size="10" fill="#444" text-anchor="end">{v:.2}</text>"##,
                self.x0 - 4.0,
                y + 3.0
            );
        }
    }
}

/// Two-panel trace figure: distance vs time with d_ps / d_ha (or the PDD)
/// rule lines, and hand speed vs time with the intentionality threshold.
pub fn trace_svg(stored: &StoredTrace) -> Result<String> {
    if stored.records.is_empty() {
        return Err(Error::invalid("cannot plot an empty trace"));
    }
    let params = &stored.header.scenario.params;
    let t_max = stored.records.last().unwrap().t;

    let dist: Vec<(f64, f64)> = stored.records.iter().map(|r| (r.t, r.d)).collect();
    let d_ha: Vec<(f64, f64)> = stored.records.iter().map(|r| (r.t, r.d_ha)).collect();
    let speed: Vec<(f64, f64)> = stored
        .records
        .iter()
        .map(|r| {
            let v = (r.hand_v[0].powi(2) + r.hand_v[1].powi(2) + r.hand_v[2].powi(2)).sqrt();
            (r.t, v)
        })
        .collect();

    let d_peak = dist.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let v_peak = speed.iter().map(|p| p.1).fold(0.0f64, f64::max);

    let total_h = MARGIN_TOP + 2.0 * PANEL_HEIGHT + PANEL_GAP + 40.0;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_h}" viewBox="0 0 {WIDTH} {total_h}">"#
    );
    let _ = write!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let top = Panel {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        h: PANEL_HEIGHT,
        t_max,
        y_max: (d_peak * 1.1).max(params.d_pdd * 1.3),
    };
    top.frame(
        &mut svg,
        &format!("TCP-hand distance ({})", stored.header.label),
        "distance [m]",
    );
    top.polyline(&mut svg, &dist, "#1f77b4", false);
    top.hline(&mut svg, params.d_ps, "#d62728", false, "d_ps");
    if params.d_ha_fixed.is_some() {
        top.hline(&mut svg, params.d_ha_fixed.unwrap(), "#ff7f0e", true, "d_ha");
    } else {
        top.polyline(&mut svg, &d_ha, "#ff7f0e", true);
        top.hline(&mut svg, params.d_pdd, "#d62728", true, "PDD");
    }

    let bottom = Panel {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP + PANEL_HEIGHT + PANEL_GAP,
        w: WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        h: PANEL_HEIGHT,
        t_max,
        y_max: (v_peak * 1.1).max(params.v_intent * 2.0),
    };
    bottom.frame(&mut svg, "Hand speed", "speed [m/s]");
    bottom.polyline(&mut svg, &speed, "#ff7f0e", false);
    bottom.hline(&mut svg, params.v_intent, "#d62728", true, "v_intent");

    svg.push_str("</svg>");
    Ok(svg)
}

/// Per-condition summary: mean min distance and mean time-in-PDD bars with
/// std whiskers.
pub fn report_svg(report: &Report) -> Result<String> {
    if report.conditions.is_empty() {
        return Err(Error::invalid("report has no conditions to plot"));
    }
    let total_h = 320.0;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_h}" viewBox="0 0 {WIDTH} {total_h}">"#
    );
    let _ = write!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let half = (WIDTH - 3.0 * MARGIN_LEFT) / 2.0;
    draw_bars(
        &mut svg,
        MARGIN_LEFT,
        half,
        "Mean min distance [m]",
        report
            .conditions
            .iter()
            .map(|c| (c.label.as_str(), c.min_distance_mean, c.min_distance_std))
            .collect(),
    );
    draw_bars(
        &mut svg,
        2.0 * MARGIN_LEFT + half,
        half,
        "Mean time in PDD [s]",
        report
            .conditions
            .iter()
            .map(|c| (c.label.as_str(), c.time_in_pdd_mean, c.time_in_pdd_std))
            .collect(),
    );

    svg.push_str("</svg>");
    Ok(svg)
}

fn draw_bars(svg: &mut String, x0: f64, w: f64, title: &str, bars: Vec<(&str, f64, Option<f64>)>) {
    let y0 = 40.0;
    let h = 220.0;
    let peak = bars
        .iter()
        .map(|(_, m, s)| m + s.unwrap_or(0.0))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let y_max = peak * 1.2;
    let _ = write!(
        svg,
        r##"<text x="{x0:.2}" y="{:.2}" font-size="13" fill="#111">{title}</text>"##,
        y0 - 10.0
    );
    let _ = write!(
        svg,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#444"/>"##
    );
    let n = bars.len() as f64;
    for (i, (label, mean, std)) in bars.iter().enumerate() {
        let slot = w / n;
        let bw = slot * 0.5;
        let bx = x0 + slot * i as f64 + slot * 0.25;
        let bh = mean / y_max * h;
        let by = y0 + h - bh;
        let _ = write!(
            svg,
            r##"<rect x="{bx:.2}" y="{by:.2}" width="{bw:.2}" height="{bh:.2}" fill="#1f77b4"/>"##
        );
        if let Some(s) = std {
            let cx = bx + bw / 2.0;
            let y_lo = y0 + h - ((mean - s).max(0.0) / y_max * h);
            let y_hi = y0 + h - ((mean + s) / y_max * h);
            let _ = write!(
                svg,
                r##"<line x1="{cx:.2}" y1="{y_lo:.2}" x2="{cx:.2}" y2="{y_hi:.2}" stroke="#111" stroke-width="1.5"/>"##
            );
        }
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#111" text-anchor="middle">{label}</text>"##,
            bx + bw / 2.0,
            y0 + h + 16.0
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#111" text-anchor="middle">{mean:.3}</text>"##,
            bx + bw / 2.0,
            by - 4.0
        );
    }
}
