//! Deterministic SVG output for execution traces.
//!
//! The drawing works in two layers: geometry (segments and circles) lives in
//! a group whose transform flips the y axis, so the coordinates written in
//! the file are world coordinates; labels, point markers, and angle arcs are
//! emitted in canvas space. Lines are drawn as the segment spanning the
//! named points incident on them, which reproduces "extend the segment"
//! steps without modeling bounded segments. Output bytes are a pure function
//! of (trace, options): floats are formatted as shortest decimals capped at
//! nine significant digits.

use thiserror::Error;

use crate::engine::{Object, Trace};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("nothing to render: the trace is empty")]
    EmptyTrace,
}

/// Rendering options; sizes are in pixels.
#[derive(Clone, Debug)]
pub struct RenderOptions {
    pub size_px: f64,
    pub margin_px: f64,
    pub stroke_width: f64,
    pub font_size: f64,
    pub show_labels: bool,
    pub show_angle_arcs: bool,
    pub show_construction_circles: bool,
    /// Angle arcs to mark, as (arm, vertex, arm) point names; only angles
    /// named in a method's report belong here.
    pub angle_arcs: Vec<[String; 3]>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            size_px: 720.0,
            margin_px: 48.0,
            stroke_width: 1.2,
            font_size: 14.0,
            show_labels: true,
            show_angle_arcs: true,
            show_construction_circles: true,
            angle_arcs: Vec::new(),
        }
    }
}

/// Shortest decimal capped at nine significant digits, trailing zeros
/// trimmed. Deterministic for equal inputs.
fn fmt_svg(x: f64) -> String {
    if x.abs() < 1e-9 || !x.is_finite() {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).clamp(0, 17) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

struct FPoint {
    name: String,
    x: f64,
    y: f64,
}

struct FLinear {
    a: f64,
    b: f64,
    c: f64,
    // Ray origin (t = 0 along the direction), if the object is a ray.
    ray_origin: Option<(f64, f64)>,
}

struct FCircle {
    cx: f64,
    cy: f64,
    r: f64,
}

const ON_LINE_TOL: f64 = 1e-7;

struct Bbox {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Bbox {
    fn new() -> Self {
        Bbox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    fn grow(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.min_y = self.min_y.min(y);
        self.max_x = self.max_x.max(x);
        self.max_y = self.max_y.max(y);
    }
}

/// Renders an execution trace as an SVG 1.1 document.
pub fn to_svg<S: Scalar>(trace: &Trace<S>, opts: &RenderOptions) -> Result<String, RenderError> {
    if trace.entries.is_empty() {
        return Err(RenderError::EmptyTrace);
    }

    // Flatten to f64 in trace order.
    let mut points: Vec<FPoint> = Vec::new();
    let mut linears: Vec<FLinear> = Vec::new();
    let mut circles: Vec<FCircle> = Vec::new();
    for entry in &trace.entries {
        match &entry.object {
            Object::Point(p) => points.push(FPoint {
                name: entry.name.clone(),
                x: p.x.to_f64(),
                y: p.y.to_f64(),
            }),
            Object::Line(l) => linears.push(FLinear {
                a: l.a.to_f64(),
                b: l.b.to_f64(),
                c: l.c.to_f64(),
                ray_origin: None,
            }),
            Object::Ray(r) => {
                let l = r.line();
                linears.push(FLinear {
                    a: l.a.to_f64(),
                    b: l.b.to_f64(),
                    c: l.c.to_f64(),
                    ray_origin: Some((r.origin.x.to_f64(), r.origin.y.to_f64())),
                });
            }
            Object::Circle(c) => circles.push(FCircle {
                cx: c.center.x.to_f64(),
                cy: c.center.y.to_f64(),
                r: c.r.to_f64(),
            }),
        }
    }

    // Segment extents: each linear object spans the named points on it.
    let mut segments: Vec<(f64, f64, f64, f64)> = Vec::new();
    for l in &linears {
        let (dx, dy) = (-l.b, l.a);
        let mut ts: Vec<f64> = Vec::new();
        for p in &points {
            if (l.a * p.x + l.b * p.y + l.c).abs() <= ON_LINE_TOL {
                ts.push(p.x * dx + p.y * dy);
            }
        }
        if let Some((ox, oy)) = l.ray_origin {
            let t0 = ox * dx + oy * dy;
            ts.retain(|&t| t >= t0 - ON_LINE_TOL);
            ts.push(t0);
        }
        let (t_min, t_max) = match ts.len() {
            0 => continue,
            1 => (ts[0] - 0.5, ts[0] + 0.5),
            _ => {
                let mut lo = ts[0];
                let mut hi = ts[0];
                for &t in &ts[1..] {
                    lo = lo.min(t);
                    hi = hi.max(t);
                }
                if hi - lo < ON_LINE_TOL {
                    (lo - 0.5, hi + 0.5)
                } else {
                    (lo, hi)
                }
            }
        };
        let foot_x = -l.c * l.a;
        let foot_y = -l.c * l.b;
        segments.push((
            foot_x + t_min * dx,
            foot_y + t_min * dy,
            foot_x + t_max * dx,
            foot_y + t_max * dy,
        ));
    }

    // World bounding box over everything that will be drawn.
    let mut bbox = Bbox::new();
    for p in &points {
        bbox.grow(p.x, p.y);
    }
    for &(x1, y1, x2, y2) in &segments {
        bbox.grow(x1, y1);
        bbox.grow(x2, y2);
    }
    if opts.show_construction_circles {
        for c in &circles {
            bbox.grow(c.cx - c.r, c.cy - c.r);
            bbox.grow(c.cx + c.r, c.cy + c.r);
        }
    }
    if !bbox.min_x.is_finite() {
        bbox.grow(0.0, 0.0);
        bbox.grow(1.0, 1.0);
    }
    let (min_x, min_y, max_x, max_y) = (bbox.min_x, bbox.min_y, bbox.max_x, bbox.max_y);
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let avail = opts.size_px - 2.0 * opts.margin_px;
    let scale = avail / span_x.max(span_y);
    // canvas_x = tx + scale*x ; canvas_y = ty - scale*y
    let tx = opts.margin_px + (avail - scale * span_x) / 2.0 - scale * min_x;
    let ty = opts.size_px - opts.margin_px - (avail - scale * span_y) / 2.0 + scale * min_y;
    let cx = |x: f64| tx + scale * x;
    let cy = |y: f64| ty - scale * y;

    let size = fmt_svg(opts.size_px);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>\n"
    ));

    // Geometry layer: world coordinates under a flip transform.
    out.push_str(&format!(
        "<g class=\"geometry\" transform=\"translate({} {}) scale({} -{})\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\">\n",
        fmt_svg(tx),
        fmt_svg(ty),
        fmt_svg(scale),
        fmt_svg(scale),
        fmt_svg(opts.stroke_width / scale),
    ));
    if opts.show_construction_circles {
        for c in &circles {
            out.push_str(&format!(
                "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" stroke=\"#888888\"/>\n",
                fmt_svg(c.cx),
                fmt_svg(c.cy),
                fmt_svg(c.r)
            ));
        }
    }
    for &(x1, y1, x2, y2) in &segments {
        out.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            fmt_svg(x1),
            fmt_svg(y1),
            fmt_svg(x2),
            fmt_svg(y2)
        ));
    }
    out.push_str("</g>\n");

    // Overlay layer: canvas coordinates, upright text.
    out.push_str(&format!(
        "<g class=\"overlay\" font-family=\"sans-serif\" font-size=\"{}\" fill=\"black\">\n",
        fmt_svg(opts.font_size)
    ));
    if opts.show_angle_arcs {
        let arc_r = 18.0;
        for [p, v, q] in &opts.angle_arcs {
            let find = |name: &str| points.iter().find(|fp| fp.name == name);
            let (Some(fp), Some(fv), Some(fq)) = (find(p), find(v), find(q)) else {
                continue;
            };
            let a1 = (cy(fp.y) - cy(fv.y)).atan2(cx(fp.x) - cx(fv.x));
            let a2 = (cy(fq.y) - cy(fv.y)).atan2(cx(fq.x) - cx(fv.x));
            let mut delta = a2 - a1;
            while delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
            }
            while delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
            }
            let sweep = if delta > 0.0 { 1 } else { 0 };
            let sx = cx(fv.x) + arc_r * a1.cos();
            let sy = cy(fv.y) + arc_r * a1.sin();
            let ex = cx(fv.x) + arc_r * a2.cos();
            let ey = cy(fv.y) + arc_r * a2.sin();
            out.push_str(&format!(
                "  <path d=\"M {} {} A {} {} 0 0 {} {} {}\" fill=\"none\" stroke=\"#3366cc\"/>\n",
                fmt_svg(sx),
                fmt_svg(sy),
                fmt_svg(arc_r),
                fmt_svg(arc_r),
                sweep,
                fmt_svg(ex),
                fmt_svg(ey)
            ));
        }
    }
    for name in &trace.exports {
        let Some(p) = points.iter().find(|fp| &fp.name == name) else {
            continue;
        };
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>\n",
            fmt_svg(cx(p.x)),
            fmt_svg(cy(p.y))
        ));
        if opts.show_labels {
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\">{}</text>\n",
                fmt_svg(cx(p.x) + 6.0),
                fmt_svg(cy(p.y) - 6.0),
                xml_escape(name)
            ));
        }
    }
    out.push_str("</g>\n");
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{execute, Bindings};
    use crate::methods::{builtin, MethodId};
    use crate::scalar::Backend;

    fn method_trace(id: MethodId, theta: f64) -> Trace<f64> {
        let ctx = Backend::machine();
        let program = builtin(id);
        let bindings = Bindings::new().with("theta", theta);
        let (_, trace) = execute(&program, &bindings, &ctx).unwrap();
        trace
    }

    #[test]
    fn method1_labels_every_exported_point_once() {
        let trace = method_trace(MethodId::Equilateral, 30.0);
        let svg = to_svg(&trace, &RenderOptions::default()).unwrap();
        for name in ["A", "B", "C", "D", "E", "F", "G", "H"] {
            let needle = format!(">{name}</text>");
            assert_eq!(
                svg.matches(&needle).count(),
                1,
                "label {name} in:\n{svg}"
            );
        }
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<svg xmlns"));
    }

    #[test]
    fn method2_draws_the_construction_circles() {
        let trace = method_trace(MethodId::CentralAngle, 75.0);
        let svg = to_svg(&trace, &RenderOptions::default()).unwrap();
        let geometry = svg.split("</g>").next().unwrap();
        // the three chord circles plus the unit placement circle
        assert_eq!(geometry.matches("<circle").count(), 4, "{geometry}");
        let hidden = to_svg(
            &trace,
            &RenderOptions {
                show_construction_circles: false,
                ..RenderOptions::default()
            },
        )
        .unwrap();
        let geometry = hidden.split("</g>").next().unwrap();
        assert_eq!(geometry.matches("<circle").count(), 0);
    }

    #[test]
    fn output_is_byte_deterministic() {
        let trace = method_trace(MethodId::SimilarTriangles, 45.0);
        let opts = RenderOptions {
            angle_arcs: vec![
                ["B".into(), "O".into(), "A".into()],
                ["M".into(), "C".into(), "D".into()],
            ],
            ..RenderOptions::default()
        };
        let a = to_svg(&trace, &opts).unwrap();
        let b = to_svg(&trace, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(">T</text>"));
        assert!(a.contains("<path"));
    }

    #[test]
    fn empty_trace_is_an_error() {
        let trace: Trace<f64> = Trace {
            entries: Vec::new(),
            exports: Vec::new(),
        };
        assert_eq!(
            to_svg(&trace, &RenderOptions::default()),
            Err(RenderError::EmptyTrace)
        );
    }

    #[test]
    fn fmt_svg_caps_significant_digits() {
        assert_eq!(fmt_svg(0.0), "0");
        assert_eq!(fmt_svg(1.5), "1.5");
        assert_eq!(fmt_svg(-2.0), "-2");
        assert_eq!(fmt_svg(0.3333333333333333), "0.333333333");
        assert_eq!(fmt_svg(123.45678912345), "123.456789");
        assert_eq!(fmt_svg(-0.0), "0");
    }
}
