//! Value types for figures and the universe they are drawn from.
//!
//! Everything lives on the unit canvas: `x` grows to the right, `y` grows
//! downward (render space), and an object's `size` is the diameter of the
//! disc that bounds it. Pixel dimensions only show up in [`crate::render`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown {kind} `{value}`")]
    UnknownValue { kind: &'static str, value: String },
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Circle,
    Square,
    Triangle,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Circle, Shape::Square, Shape::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Circle => "circle",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "circle" => Ok(Shape::Circle),
            "square" => Ok(Shape::Square),
            "triangle" => Ok(Shape::Triangle),
            _ => Err(ModelError::UnknownValue { kind: "shape", value: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Blue, Color::Yellow];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            "yellow" => Ok(Color::Yellow),
            _ => Err(ModelError::UnknownValue { kind: "color", value: s.to_string() }),
        }
    }
}

/// Rounds a real to 12 significant digits.
///
/// Every coordinate and size produced by the generators goes through this, so
/// the manifest text is an exact image of the in-memory figure.
pub fn quantize(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

mod real12 {
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        super::quantize(*v).serialize(s)
    }
}

/// One geometric object of a figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub color: Color,
    #[serde(serialize_with = "real12::serialize")]
    pub size: f64,
    #[serde(serialize_with = "real12::serialize")]
    pub x: f64,
    #[serde(serialize_with = "real12::serialize")]
    pub y: f64,
}

impl ObjectSpec {
    pub fn new(shape: Shape, color: Color, size: f64, x: f64, y: f64) -> Self {
        Self { shape, color, size, x, y }
    }

    pub fn radius(&self) -> f64 {
        self.size / 2.0
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Euclidean distance between object centers.
pub fn object_distance(a: &ObjectSpec, b: &ObjectSpec) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Polygon vertices of a shape inscribed in the disc of diameter `size`
/// around `(cx, cy)`, or `None` for a circle. Squares are axis-aligned;
/// triangles are equilateral with the apex up (smaller y).
pub fn shape_outline(shape: Shape, cx: f64, cy: f64, size: f64) -> Option<Vec<[f64; 2]>> {
    let r = size / 2.0;
    match shape {
        Shape::Circle => None,
        Shape::Square => {
            let h = r / std::f64::consts::SQRT_2;
            Some(vec![[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])
        }
        Shape::Triangle => {
            let w = r * 3f64.sqrt() / 2.0;
            Some(vec![[cx, cy - r], [cx + w, cy + r / 2.0], [cx - w, cy + r / 2.0]])
        }
    }
}

/// An unordered collection of objects; list order is presentation only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub objects: Vec<ObjectSpec>,
}

impl Figure {
    pub fn new(objects: Vec<ObjectSpec>) -> Self {
        Self { objects }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

/// Where object centers may go.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layout {
    /// Anywhere on the canvas that keeps the object uncropped.
    #[default]
    Free,
    /// Centers snap to one of a fixed set of points, at most one object each.
    Grid { points: Vec<[f64; 2]> },
}

impl Layout {
    pub fn grid_point_of(&self, x: f64, y: f64, tol: f64) -> Option<usize> {
        match self {
            Layout::Free => None,
            Layout::Grid { points } => points
                .iter()
                .position(|p| (p[0] - x).abs() <= tol && (p[1] - y).abs() <= tol),
        }
    }
}

/// The space of figures a pattern is carved from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniverseConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub allowed_shapes: Vec<Shape>,
    pub allowed_colors: Vec<Color>,
    pub size_min: f64,
    pub size_max: f64,
    /// Sizes strictly below this are "small", the rest "big".
    pub small_big_threshold: f64,
    /// Extra clearance on top of the bounding-disc non-overlap rule.
    pub min_gap: f64,
    pub seed: u64,
    pub layout: Layout,
}

impl Default for UniverseConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 25,
            allowed_shapes: Shape::ALL.to_vec(),
            allowed_colors: Color::ALL.to_vec(),
            size_min: 0.05,
            size_max: 0.12,
            small_big_threshold: 0.085,
            min_gap: 0.01,
            seed: 0,
            layout: Layout::Free,
        }
    }
}

impl UniverseConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidUniverse(m));
        if self.n_min < 1 || self.n_min > self.n_max {
            return bad(format!("need 1 <= n_min <= n_max, got {}..{}", self.n_min, self.n_max));
        }
        if !(self.size_min > 0.0 && self.size_min <= self.size_max && self.size_max <= 1.0) {
            return bad(format!(
                "need 0 < size_min <= size_max <= 1, got {}..{}",
                self.size_min, self.size_max
            ));
        }
        if self.allowed_shapes.is_empty() {
            return bad("allowed_shapes is empty".into());
        }
        if self.allowed_colors.is_empty() {
            return bad("allowed_colors is empty".into());
        }
        if self.min_gap.is_nan() || self.min_gap < 0.0 {
            return bad(format!("min_gap must be >= 0, got {}", self.min_gap));
        }
        if let Layout::Grid { points } = &self.layout {
            if points.len() < self.n_max {
                return bad(format!("grid has {} points but n_max is {}", points.len(), self.n_max));
            }
        }
        Ok(())
    }

    pub fn allows_shape(&self, s: Shape) -> bool {
        self.allowed_shapes.contains(&s)
    }

    pub fn allows_color(&self, c: Color) -> bool {
        self.allowed_colors.contains(&c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    ObjectCount,
    NonFinite,
    InvalidSize,
    Cropped,
    Overlap,
    ShapeNotAllowed,
    ColorNotAllowed,
    SizeOutOfRange,
    OffGrid,
    SharedGridPoint,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::ObjectCount => "object count out of range",
            Rule::NonFinite => "non-finite value",
            Rule::InvalidSize => "size outside (0, 1]",
            Rule::Cropped => "cropped at border",
            Rule::Overlap => "overlap",
            Rule::ShapeNotAllowed => "shape not allowed",
            Rule::ColorNotAllowed => "color not allowed",
            Rule::SizeOutOfRange => "size outside universe range",
            Rule::OffGrid => "center off grid",
            Rule::SharedGridPoint => "grid point used twice",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Offending object indices: one for per-object rules, two for pair rules,
    /// none for figure-level rules.
    pub objects: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.objects.as_slice() {
            [] => write!(f, "{}", self.rule),
            [i] => write!(f, "object {i}: {}", self.rule),
            [i, j] => write!(f, "objects {i} and {j}: {}", self.rule),
            many => write!(f, "objects {many:?}: {}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

/// Grid snapping tolerance used by [`validate_figure`].
pub const GRID_SNAP_TOL: f64 = 1e-12;

/// Checks a figure against the canvas rules and the universe it claims to
/// belong to. Violations are returned as data.
pub fn validate_figure(f: &Figure, u: &UniverseConfig) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |rule, objects: Vec<usize>| out.push(Violation { rule, objects });

    let n = f.objects.len();
    if n < u.n_min.max(1) || n > u.n_max {
        push(Rule::ObjectCount, vec![]);
    }

    let mut grid_owner: Vec<Option<usize>> = match &u.layout {
        Layout::Grid { points } => vec![None; points.len()],
        Layout::Free => Vec::new(),
    };

    for (i, o) in f.objects.iter().enumerate() {
        if !(o.size.is_finite() && o.x.is_finite() && o.y.is_finite()) {
            push(Rule::NonFinite, vec![i]);
            continue;
        }
        if !(o.size > 0.0 && o.size <= 1.0) {
            push(Rule::InvalidSize, vec![i]);
        }
        let r = o.radius();
        if o.x < r || o.x > 1.0 - r || o.y < r || o.y > 1.0 - r {
            push(Rule::Cropped, vec![i]);
        }
        if !u.allows_shape(o.shape) {
            push(Rule::ShapeNotAllowed, vec![i]);
        }
        if !u.allows_color(o.color) {
            push(Rule::ColorNotAllowed, vec![i]);
        }
        if o.size < u.size_min || o.size > u.size_max {
            push(Rule::SizeOutOfRange, vec![i]);
        }
        if let Layout::Grid { .. } = u.layout {
            match u.layout.grid_point_of(o.x, o.y, GRID_SNAP_TOL) {
                None => push(Rule::OffGrid, vec![i]),
                Some(g) => match grid_owner[g] {
                    Some(prev) => push(Rule::SharedGridPoint, vec![prev, i]),
                    None => grid_owner[g] = Some(i),
                },
            }
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&f.objects[i], &f.objects[j]);
            if object_distance(a, b) < (a.size + b.size) / 2.0 + u.min_gap {
                push(Rule::Overlap, vec![i, j]);
            }
        }
    }

    ValidationReport { violations: out }
}

/// Manifest form of a single figure: `{"id", "objects": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRecord {
    pub id: String,
    pub objects: Vec<ObjectSpec>,
}

impl FigureRecord {
    pub fn new(id: impl Into<String>, figure: &Figure) -> Self {
        Self { id: id.into(), objects: figure.objects.clone() }
    }

    pub fn figure(&self) -> Figure {
        Figure::new(self.objects.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(shape: Shape, size: f64, x: f64, y: f64) -> ObjectSpec {
        ObjectSpec::new(shape, Color::Red, size, x, y)
    }

    fn loose() -> UniverseConfig {
        UniverseConfig { size_min: 0.01, size_max: 1.0, min_gap: 0.0, ..Default::default() }
    }

    #[test]
    fn separated_circles_are_valid() {
        let f = Figure::new(vec![
            obj(Shape::Circle, 0.2, 0.3, 0.5),
            obj(Shape::Circle, 0.2, 0.7, 0.5),
        ]);
        assert!(validate_figure(&f, &loose()).is_ok());
    }

    #[test]
    fn square_near_border_is_cropped() {
        let f = Figure::new(vec![obj(Shape::Square, 0.2, 0.05, 0.5)]);
        let rep = validate_figure(&f, &loose());
        assert_eq!(rep.violations, vec![Violation { rule: Rule::Cropped, objects: vec![0] }]);
    }

    #[test]
    fn close_triangles_overlap() {
        let f = Figure::new(vec![
            obj(Shape::Triangle, 0.3, 0.5, 0.5),
            obj(Shape::Triangle, 0.3, 0.6, 0.5),
        ]);
        let rep = validate_figure(&f, &loose());
        assert_eq!(rep.violations, vec![Violation { rule: Rule::Overlap, objects: vec![0, 1] }]);
        assert_eq!(rep.violations[0].to_string(), "objects 0 and 1: overlap");
    }

    #[test]
    fn min_gap_tightens_overlap() {
        let f = Figure::new(vec![
            obj(Shape::Circle, 0.2, 0.3, 0.5),
            obj(Shape::Circle, 0.2, 0.505, 0.5),
        ]);
        assert!(validate_figure(&f, &loose()).is_ok());
        let gapped = UniverseConfig { min_gap: 0.01, ..loose() };
        assert!(validate_figure(&f, &gapped).has(Rule::Overlap));
    }

    #[test]
    fn universe_membership_rules() {
        let u = UniverseConfig {
            n_min: 2,
            n_max: 2,
            allowed_shapes: vec![Shape::Circle],
            allowed_colors: vec![Color::Blue],
            ..loose()
        };
        let f = Figure::new(vec![obj(Shape::Square, 0.2, 0.5, 0.5)]);
        let rep = validate_figure(&f, &u);
        assert!(rep.has(Rule::ObjectCount));
        assert!(rep.has(Rule::ShapeNotAllowed));
        assert!(rep.has(Rule::ColorNotAllowed));
    }

    #[test]
    fn grid_layout_rules() {
        let u = UniverseConfig {
            layout: Layout::Grid { points: vec![[0.25, 0.25], [0.75, 0.75]] },
            n_max: 2,
            ..loose()
        };
        let on = Figure::new(vec![obj(Shape::Circle, 0.1, 0.25, 0.25)]);
        assert!(validate_figure(&on, &u).is_ok());
        let off = Figure::new(vec![obj(Shape::Circle, 0.1, 0.25 + 1e-9, 0.25)]);
        assert!(validate_figure(&off, &u).has(Rule::OffGrid));
    }

    #[test]
    fn distance_examples() {
        let a = obj(Shape::Circle, 0.1, 0.2, 0.2);
        assert_eq!(object_distance(&a, &a), 0.0);
        let p = obj(Shape::Circle, 0.1, 0.1, 0.1);
        let q = obj(Shape::Circle, 0.1, 0.4, 0.5);
        assert!((object_distance(&p, &q) - 0.5).abs() < 1e-15);
        assert_eq!(object_distance(&p, &q), object_distance(&q, &p));
    }

    #[test]
    fn closed_enums_reject_unknown_tokens() {
        assert_eq!("Circle".parse::<Shape>(), Ok(Shape::Circle));
        assert!("hexagon".parse::<Shape>().is_err());
        assert!("green".parse::<Color>().is_err());
    }

    #[test]
    fn universe_validation() {
        assert!(UniverseConfig::default().validate().is_ok());
        let u = UniverseConfig { n_min: 0, ..Default::default() };
        assert!(u.validate().is_err());
        let u = UniverseConfig { size_min: 0.2, size_max: 0.1, ..Default::default() };
        assert!(u.validate().is_err());
        let u = UniverseConfig { allowed_colors: vec![], ..Default::default() };
        assert!(u.validate().is_err());
    }

    #[test]
    fn quantize_keeps_twelve_digits() {
        assert_eq!(quantize(0.3), 0.3);
        assert_eq!(quantize(0.123456789012345), 0.123456789012);
        assert!((quantize(1.0 / 3.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn record_serializes_with_fixed_field_names() {
        let f = Figure::new(vec![ObjectSpec::new(Shape::Triangle, Color::Yellow, 0.1, 0.25, 0.5)]);
        let json = serde_json::to_string(&FigureRecord::new("a", &f)).unwrap();
        assert_eq!(
            json,
            r#"{"id":"a","objects":[{"shape":"triangle","color":"yellow","size":0.1,"x":0.25,"y":0.5}]}"#
        );
    }
}
