//! SVG rendering. Output is byte-stable: fixed attribute order and three
//! decimals for every pixel coordinate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{shape_outline, Color, Figure, Shape};

pub const MIN_CANVAS_PX: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("canvas must be at least {MIN_CANVAS_PX} px, got {0}")]
    CanvasTooSmall(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleOrientation {
    #[default]
    ApexUp,
    ApexDown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Palette {
    pub red: String,
    pub blue: String,
    pub yellow: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self { red: "#e6312b".into(), blue: "#2b59c3".into(), yellow: "#f2c500".into() }
    }
}

impl Palette {
    pub fn fill(&self, c: Color) -> &str {
        match c {
            Color::Red => &self.red,
            Color::Blue => &self.blue,
            Color::Yellow => &self.yellow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub canvas_px: u32,
    pub background: String,
    pub palette: Palette,
    /// Zero draws no outline.
    pub stroke_width: f64,
    pub stroke: String,
    pub triangle: TriangleOrientation,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            canvas_px: 600,
            background: "#c8c8c8".into(),
            palette: Palette::default(),
            stroke_width: 0.0,
            stroke: "#000000".into(),
            triangle: TriangleOrientation::ApexUp,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.canvas_px < MIN_CANVAS_PX {
            return Err(RenderError::CanvasTooSmall(self.canvas_px));
        }
        Ok(())
    }
}

/// Fixed three-decimal pixel value; never prints `-0.000`.
fn px(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render_svg(f: &Figure, style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    let w = style.canvas_px;
    let scale = w as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{w}" fill="{}"/>"#, style.background);
    let paint = |fill: &str| {
        if style.stroke_width > 0.0 {
            format!(r#"fill="{fill}" stroke="{}" stroke-width="{}""#, style.stroke, px(style.stroke_width))
        } else {
            format!(r#"fill="{fill}""#)
        }
    };
    for o in &f.objects {
        let fill = paint(style.palette.fill(o.color));
        match shape_outline(o.shape, o.x, o.y, o.size) {
            None => {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{}" cy="{}" r="{}" {fill}/>"#,
                    px(o.x * scale),
                    px(o.y * scale),
                    px(o.radius() * scale)
                );
            }
            Some(vs) if o.shape == Shape::Square => {
                let side = vs[1][0] - vs[0][0];
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" {fill}/>"#,
                    px(vs[0][0] * scale),
                    px(vs[0][1] * scale),
                    px(side * scale),
                    px(side * scale)
                );
            }
            Some(mut vs) => {
                if style.triangle == TriangleOrientation::ApexDown {
                    for v in vs.iter_mut() {
                        v[1] = 2.0 * o.y - v[1];
                    }
                }
                let points: Vec<String> =
                    vs.iter().map(|v| format!("{},{}", px(v[0] * scale), px(v[1] * scale))).collect();
                let _ = writeln!(out, r#"<polygon points="{}" {fill}/>"#, points.join(" "));
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
