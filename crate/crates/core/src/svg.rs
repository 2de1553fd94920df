//! Minimal self-contained SVG output for the standard diagrams: the root
//! ladder, the period-doubled curve, and the branch atlas.

use crate::continuation::Atlas;
use crate::polychain::Chain;
use crate::roots::{self, RootTable};
use crate::twoperiodic::Curve2T;
use num_traits::ToPrimitive;
use std::fmt::Write as _;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

/// Data-space to pixel-space frame with margins.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    width: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64, width: f64, height: f64) -> Self {
        Self {
            x0,
            x1,
            y0,
            y1,
            width,
            height,
            margin: 48.0,
        }
    }

    fn px(&self, x: f64) -> f64 {
        let t = (x - self.x0) / (self.x1 - self.x0);
        self.margin + t * (self.width - 2.0 * self.margin)
    }

    fn py(&self, y: f64) -> f64 {
        let t = (y - self.y0) / (self.y1 - self.y0);
        self.height - self.margin - t * (self.height - 2.0 * self.margin)
    }
}

struct Svg {
    frame: Frame,
    body: String,
}

impl Svg {
    fn new(frame: Frame) -> Self {
        Self {
            frame,
            body: String::new(),
        }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed {
            " stroke-dasharray=\"4 3\""
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"1\"{dash}/>",
            self.frame.px(x1),
            self.frame.py(y1),
            self.frame.px(x2),
            self.frame.py(y2),
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", self.frame.px(*x), self.frame.py(*y));
        }
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.4\"/>",
            d.trim_end()
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\" fill=\"{fill}\"/>",
            self.frame.px(x),
            self.frame.py(y),
        );
    }

    fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{size}\" font-family=\"sans-serif\" fill=\"#333\">{content}</text>",
            self.frame.px(x),
            self.frame.py(y),
        );
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (self.frame.x0, self.frame.x1, self.frame.y0, self.frame.y1);
        self.line(x0, y0, x1, y0, "#000", false);
        self.line(x0, y0, x0, y1, "#000", false);
        for k in 0..=4 {
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let y = y0 + (y1 - y0) * k as f64 / 4.0;
            self.text(x, y0 - 0.06 * (y1 - y0), 10.0, &format!("{x:.2}"));
            self.text(x0 - 0.09 * (x1 - x0), y, 10.0, &format!("{y:.2}"));
        }
        self.text(x1, y0 - 0.12 * (y1 - y0), 12.0, x_label);
        self.text(x0 - 0.09 * (x1 - x0), y1, 12.0, y_label);
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.frame.width, self.frame.height, self.frame.width, self.frame.height, self.body
        )
    }
}

fn rat_f64(q: &num_rational::BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Ladder plot of the positive roots per order: one horizontal level per
/// order, shared roots joined by dashed verticals.
pub fn render_root_ladder(chain: &Chain, table: &RootTable) -> String {
    let n_max = table.n_max();
    let frame = Frame::new(0.0, 2.1, 1.0, n_max as f64 + 1.0, 640.0, 460.0);
    let mut svg = Svg::new(frame);
    svg.axes("A", "n");
    // dashed verticals through roots that already belong to a smaller order
    for n in 2..=n_max {
        for root in table.roots(n) {
            let owner = roots::minimal_owner(chain, n, root);
            if owner < n {
                svg.line(
                    rat_f64(&root.mid()),
                    owner as f64,
                    rat_f64(&root.mid()),
                    n as f64,
                    "#999",
                    true,
                );
            }
        }
    }
    for n in 2..=n_max {
        let color = PALETTE[n % PALETTE.len()];
        svg.line(0.0, n as f64, 2.1, n as f64, "#eee", false);
        for root in table.roots(n) {
            svg.circle(rat_f64(&root.mid()), n as f64, 3.0, color);
        }
    }
    svg.finish()
}

/// The period-doubled solution set against the continuation parameter:
/// both half-branches above the critical value.
pub fn render_two_periodic_curve(curve: &Curve2T) -> String {
    let b_max = curve
        .samples
        .last()
        .map(|s| rat_f64(&s.b))
        .unwrap_or(4.0)
        .max(4.0);
    let frame = Frame::new(0.0, b_max * 1.05, 0.0, 2.1, 640.0, 420.0);
    let mut svg = Svg::new(frame);
    svg.axes("B", "x");
    svg.line(0.0, 1.0, b_max * 1.05, 1.0, "#888", false);
    let b_crit = 4.0 / rat_f64(&curve.a);
    svg.circle(b_crit, 1.0, 3.5, "#d62728");
    let lower: Vec<(f64, f64)> = std::iter::once((b_crit, 1.0))
        .chain(
            curve
                .samples
                .iter()
                .map(|s| (rat_f64(&s.b), rat_f64(&s.lower.mid()))),
        )
        .collect();
    let upper: Vec<(f64, f64)> = std::iter::once((b_crit, 1.0))
        .chain(
            curve
                .samples
                .iter()
                .map(|s| (rat_f64(&s.b), rat_f64(&s.upper.mid()))),
        )
        .collect();
    svg.polyline(&lower, PALETTE[0]);
    svg.polyline(&upper, PALETTE[0]);
    svg.finish()
}

/// The atlas: parameter horizontal, state vertical, one polyline per traced
/// half-branch, bifurcation points marked on the trivial level.
pub fn render_atlas(atlas: &Atlas) -> String {
    let a_max = rat_f64(&atlas.a_max);
    let x_max = atlas
        .components
        .iter()
        .flat_map(|c| c.plus.samples.iter().chain(c.minus.samples.iter()))
        .map(|s| rat_f64(&s.x))
        .fold(2.0f64, f64::max);
    let frame = Frame::new(0.0, a_max * 1.04, 0.0, x_max * 1.08, 760.0, 540.0);
    let mut svg = Svg::new(frame);
    svg.axes("A", "x");
    svg.line(0.0, 1.0, a_max * 1.04, 1.0, "#888", false);
    for component in &atlas.components {
        let color = PALETTE[component.seed.order % PALETTE.len()];
        for branch in [&component.minus, &component.plus] {
            let pts: Vec<(f64, f64)> = branch
                .samples
                .iter()
                .map(|s| (rat_f64(&s.a), rat_f64(&s.x)))
                .collect();
            svg.polyline(&pts, color);
        }
        let seed_mid = (rat_f64(&component.root_lo) + rat_f64(&component.root_hi)) / 2.0;
        svg.circle(seed_mid, 1.0, 3.0, color);
        svg.text(seed_mid, 0.92, 9.0, &format!("n={}", component.seed.order));
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{build_atlas, AtlasConfig};
    use crate::interval::PrecisionPolicy;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    #[test]
    fn root_ladder_renders() {
        let chain = Chain::build(8);
        let table = RootTable::build(&chain, 8).unwrap();
        let svg = render_root_ladder(&chain, &table);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        // 16 roots across orders 2..=8 (1+1+2+2+3+3+4)
        assert_eq!(svg.matches("<circle").count(), 16);
    }

    #[test]
    fn two_periodic_curve_renders() {
        let policy = PrecisionPolicy::default();
        let a = BigRational::from(BigInt::from(2));
        let tol = BigRational::new(BigInt::from(1), BigInt::from(1 << 20));
        let curve = crate::twoperiodic::trace_2t_curve(
            &policy,
            &a,
            &BigRational::from(BigInt::from(8)),
            6,
            &tol,
        );
        let svg = render_two_periodic_curve(&curve);
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn atlas_renders() {
        let chain = Chain::build(3);
        let table = RootTable::build(&chain, 3).unwrap();
        let cfg = AtlasConfig::new(3, BigRational::new(BigInt::from(5), BigInt::from(2)));
        let atlas = build_atlas(&chain, &table, &cfg);
        let svg = render_atlas(&atlas);
        assert!(svg.contains("polyline") && svg.contains("circle"));
    }
}
