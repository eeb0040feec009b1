//! SVG drawings of depth-`m` approximations.
//!
//! One triangle is drawn per admissible word, with `p₁` at the apex, `p₂`
//! bottom-left and `p₃` bottom-right. Under ratio coloring the fill encodes
//! `log(λ_⟨x⟩(Σ_w) / λ_q(Σ_w))` on a diverging scale: blue below zero, white
//! at zero and red above, saturating at `±RATIO_CLAMP`. Cylinders without
//! energy are drawn in the darkest blue.

use std::fmt::Write as _;

use crate::error::{GasketError, Result};
use crate::measures::{word_point, BoundaryVector, CylinderNode};
use crate::numerics::to_f64;
use crate::words::{LabelRule, WeightSystem};

/// Canvas width in user units.
pub const WIDTH: f64 = 800.0;
const MARGIN: f64 = 10.0;
/// `|log ratio|` at which the color scale saturates.
pub const RATIO_CLAMP: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coloring {
    Uniform,
    Ratio,
}

impl std::str::FromStr for Coloring {
    type Err = GasketError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Coloring::Uniform),
            "ratio" => Ok(Coloring::Ratio),
            _ => Err(GasketError::validation(format!("unknown coloring {s:?}"))),
        }
    }
}

/// Maps `t ∈ [−1, 1]` to blue, white or red.
fn diverging(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(-1.0, 1.0);
    let fade = |v: f64| (255.0 * (1.0 - v.abs())).round() as u8;
    if t < 0.0 {
        (fade(t), fade(t), 255)
    } else {
        (255, fade(t), fade(t))
    }
}

fn ratio_color(node: &CylinderNode) -> (u8, u8, u8) {
    let energy = node.lambda_energy();
    if num_traits::Zero::is_zero(&energy) {
        return diverging(-1.0);
    }
    let log_ratio = to_f64(&energy).ln() - to_f64(&node.q_w).ln();
    diverging(log_ratio / RATIO_CLAMP)
}

pub fn render_svg(
    rule: &LabelRule,
    q: &WeightSystem,
    x: Option<&BoundaryVector>,
    depth: usize,
    coloring: Coloring,
    ceiling: u64,
) -> Result<String> {
    let x_default = BoundaryVector::from_i64(0, 0, 0);
    let x = match (coloring, x) {
        (Coloring::Ratio, None) => {
            return Err(GasketError::validation(
                "ratio coloring needs a boundary vector",
            ))
        }
        (_, Some(x)) => x,
        (Coloring::Uniform, None) => &x_default,
    };
    q.validate(rule.levels())?;

    let scale = WIDTH - 2.0 * MARGIN;
    let height = scale * 3f64.sqrt() / 2.0 + 2.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.3}" viewBox="0 0 {WIDTH:.0} {height:.3}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r##"<g stroke="#333333" stroke-width="0.5">"##);

    let mut visited = 0u64;
    let mut stack = vec![CylinderNode::root(x)];
    while let Some(node) = stack.pop() {
        visited += 1;
        if visited > ceiling {
            return Err(GasketError::CeilingExceeded { ceiling });
        }
        if node.word.len() < depth {
            let mut kids = node.children(rule, q)?;
            kids.reverse();
            stack.extend(kids);
            continue;
        }
        let mut points = Vec::with_capacity(3);
        for a in 1..=3 {
            let (px, py) = word_point(&node.word, a)?.to_cartesian();
            points.push(format!(
                "{:.3},{:.3}",
                MARGIN + px * scale,
                MARGIN + py * scale
            ));
        }
        let (r, g, b) = match coloring {
            Coloring::Uniform => (0x99, 0x99, 0x99),
            Coloring::Ratio => ratio_color(&node),
        };
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#{r:02x}{g:02x}{b:02x}"><title>{}</title></polygon>"##,
            points.join(" "),
            node.word
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polygons(svg: &str) -> usize {
        svg.matches("<polygon").count()
    }

    #[test]
    fn triangle_counts() {
        let sg2 = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(sg2.levels());
        let svg = render_svg(&sg2, &q, None, 1, Coloring::Uniform, 1000).unwrap();
        assert_eq!(polygons(&svg), 3);

        let alt = LabelRule::periodic(vec![2, 3]).unwrap();
        let q = WeightSystem::uniform(alt.levels());
        let x = BoundaryVector::from_i64(1, 0, 0);
        let svg = render_svg(&alt, &q, Some(&x), 2, Coloring::Ratio, 1000).unwrap();
        assert_eq!(polygons(&svg), 18);
    }

    #[test]
    fn color_scale_ends() {
        assert_eq!(diverging(0.0), (255, 255, 255));
        assert_eq!(diverging(-5.0), (0, 0, 255));
        assert_eq!(diverging(1.0), (255, 0, 0));
    }

    #[test]
    fn ratio_needs_boundary() {
        let sg2 = LabelRule::constant(2).unwrap();
        let q = WeightSystem::uniform(sg2.levels());
        assert!(render_svg(&sg2, &q, None, 1, Coloring::Ratio, 1000).is_err());
    }
}
