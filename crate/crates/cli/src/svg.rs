//! SVG 1.1 figures. The y axis is flipped so the figure matches the usual
//! mathematical orientation.

use std::fmt::Write;

use convexpos::mc::PcpData;
use convexpos::{DomReport, Point, Polygon};

struct Canvas {
    body: String,
    min: Point,
    max: Point,
}

impl Canvas {
    /// Viewport fitted to `frame` with a 5% margin.
    fn new(frame: &[Point]) -> Self {
        let (mut min, mut max) = (frame[0], frame[0]);
        for p in frame {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        let pad = 0.05 * (max.x - min.x).max(max.y - min.y);
        Canvas {
            body: String::new(),
            min: Point::new(min.x - pad, min.y - pad),
            max: Point::new(max.x + pad, max.y + pad),
        }
    }

    fn stroke(&self) -> f64 {
        (self.max.x - self.min.x).max(self.max.y - self.min.y) / 400.0
    }

    fn polygon(&mut self, pts: &[Point], style: &str) {
        let list: Vec<String> = pts.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(
            self.body,
            r#"  <polygon points="{}" fill="none" stroke-width="{}" {style}/>"#,
            list.join(" "),
            self.stroke()
        );
    }

    fn dot(&mut self, p: Point, radius_scale: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"  <circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            p.x,
            p.y,
            self.stroke() * radius_scale
        );
    }

    fn raw(&mut self, line: &str) {
        self.body.push_str("  ");
        self.body.push_str(line);
        self.body.push('\n');
    }

    fn finish(self) -> String {
        let (w, h) = (self.max.x - self.min.x, self.max.y - self.min.y);
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"600\" height=\"{}\" viewBox=\"{} {} {} {}\">\n\
             <g transform=\"matrix(1 0 0 -1 0 {})\">\n{}</g>\n</svg>\n",
            (600.0 * h / w).round(),
            self.min.x,
            self.min.y,
            w,
            h,
            self.min.y + self.max.y,
            self.body
        )
    }
}

/// `K` in black, `K_T` dashed, the limit-shape boundary in red as quadratic
/// Bezier pieces, and the tangency points.
pub fn analysis_figure(poly: &Polygon, report: &DomReport) -> String {
    let mut c = Canvas::new(report.k_t.vertices());
    let dash = c.stroke() * 4.0;
    c.polygon(report.k_t.vertices(), &format!(r#"stroke="gray" stroke-dasharray="{dash},{dash}""#));
    c.polygon(poly.vertices(), r#"stroke="black""#);
    let arcs = &report.limit_shape.arcs;
    let mut d = format!("M {},{}", arcs[0].start.x, arcs[0].start.y);
    for a in arcs {
        let _ = write!(d, " Q {},{} {},{}", a.control.x, a.control.y, a.end.x, a.end.y);
    }
    d.push_str(" Z");
    let sw = c.stroke();
    c.raw(&format!(r#"<path d="{d}" fill="none" stroke="red" stroke-width="{sw}"/>"#));
    for &p in report.tangency_points() {
        c.dot(p, 3.0, "blue");
    }
    c.finish()
}

/// `K`, the PCP of the points, the points and their contact points.
pub fn pcp_figure(poly: &Polygon, points: &[Point], pcp: &PcpData) -> String {
    let mut c = Canvas::new(poly.vertices());
    c.polygon(poly.vertices(), r#"stroke="black""#);
    c.polygon(&pcp.b, r#"stroke="red""#);
    for &p in points {
        c.dot(p, 2.0, "black");
    }
    for &i in &pcp.contact_idx {
        c.dot(points[i], 3.5, "red");
    }
    c.finish()
}
