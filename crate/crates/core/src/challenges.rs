//! Built-in universes, ground truths and generators for the worked
//! definitions example and the three published challenges.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::Statement;
use crate::model::{
    quantize, shape_outline, validate_figure, Color, Figure, Layout, ObjectSpec, Shape, UniverseConfig,
    ValidationReport,
};
use crate::sampler::{
    clear_of, draw_size, in_canvas, pick, place_objects, stream_rng, ConstructiveGenerator, EditOp,
    GeneratorRegistry, SampleError, SamplerConfig, Stream,
};

/// Ground truth of the definitions example: two pairs of objects with the
/// same shape, one pair sharing its color and the other not.
pub const GT: &str = "EXISTS a, b, c, d DISTINCT IN objects : \
SAME_SHAPE(a, b) AND SAME_COLOR(a, b) AND SAME_SHAPE(c, d) AND NOT SAME_COLOR(c, d)";

/// The narrower hypothesis of the definitions example: two triangles of
/// different color and two circles of the same color, nothing else.
pub const H2: &str = "COUNT(objects) = 4 \
AND COUNT(objects WHERE shape = triangle) = 2 \
AND COUNT(objects WHERE shape = circle) = 2 \
AND (EXISTS a, b DISTINCT IN objects WHERE shape = triangle : NOT SAME_COLOR(a, b)) \
AND (EXISTS c, d DISTINCT IN objects WHERE shape = circle : SAME_COLOR(c, d))";

/// Registry key of the constructive generator for [`H2`].
pub const H2_PATTERN_ID: &str = "definitions-example.h2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChallengeId {
    DefinitionsExample,
    #[serde(rename = "challenge-1")]
    Challenge1,
    #[serde(rename = "challenge-2")]
    Challenge2,
    #[serde(rename = "challenge-3")]
    Challenge3,
}

impl ChallengeId {
    pub const ALL: [ChallengeId; 4] =
        [ChallengeId::DefinitionsExample, ChallengeId::Challenge1, ChallengeId::Challenge2, ChallengeId::Challenge3];

    pub fn name(self) -> &'static str {
        match self {
            ChallengeId::DefinitionsExample => "definitions-example",
            ChallengeId::Challenge1 => "challenge-1",
            ChallengeId::Challenge2 => "challenge-2",
            ChallengeId::Challenge3 => "challenge-3",
        }
    }
}

impl fmt::Display for ChallengeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChallengeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let s = match s.as_str() {
            "1" => "challenge-1",
            "2" => "challenge-2",
            "3" => "challenge-3",
            other => other,
        };
        ChallengeId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown challenge `{s}` (expected one of definitions-example, challenge-1, challenge-2, challenge-3)"))
    }
}

#[derive(Debug, Clone)]
pub enum GroundTruth {
    Statement(Statement),
    /// Decided by [`validate_challenge1`] on the latent regions.
    LatentRegions,
    /// Withheld; the user supplies a statement.
    PlugIn,
}

#[derive(Debug, Clone)]
pub struct ChallengeSpec {
    pub id: ChallengeId,
    pub universe: UniverseConfig,
    pub gt: GroundTruth,
    pub hypotheses: Vec<(String, Statement)>,
}

fn parsed(text: &str, u: &UniverseConfig) -> Statement {
    Statement::parse_in(text, u).unwrap_or_else(|e| panic!("built-in statement `{text}` does not parse: {e}"))
}

pub fn challenge_spec(id: ChallengeId) -> ChallengeSpec {
    let named = |u: &UniverseConfig, items: &[(&str, &str)]| -> Vec<(String, Statement)> {
        items.iter().map(|(n, t)| (n.to_string(), parsed(t, u))).collect()
    };
    match id {
        ChallengeId::DefinitionsExample => {
            let u = definitions_universe();
            let (gt, h2) = definitions_example();
            ChallengeSpec { id, universe: u, gt: GroundTruth::Statement(gt), hypotheses: vec![("h2".into(), h2)] }
        }
        ChallengeId::Challenge1 => {
            let u = challenge1_universe();
            let hypotheses = named(&u, &[("all-small", "FORALL o IN objects : o.size = small")]);
            ChallengeSpec { id, universe: u, gt: GroundTruth::LatentRegions, hypotheses }
        }
        ChallengeId::Challenge2 => {
            let u = challenge2_universe();
            let hypotheses = named(
                &u,
                &[
                    ("mirror", "SYMMETRIC(objects)"),
                    ("red-majority", "COUNT(objects WHERE color = red) >= 5"),
                ],
            );
            ChallengeSpec { id, universe: u, gt: GroundTruth::PlugIn, hypotheses }
        }
        ChallengeId::Challenge3 => {
            let u = challenge3_universe();
            let hypotheses = named(
                &u,
                &[
                    ("more-blue", "COUNT(objects WHERE color = blue) > COUNT(objects WHERE color = yellow)"),
                    ("yellow-circle", "CIRCULAR(objects WHERE color = yellow)"),
                ],
            );
            ChallengeSpec { id, universe: u, gt: GroundTruth::PlugIn, hypotheses }
        }
    }
}

pub fn definitions_universe() -> UniverseConfig {
    UniverseConfig { n_min: 4, n_max: 6, ..UniverseConfig::default() }
}

/// `(gt, h2)`, parsed under [`definitions_universe`].
pub fn definitions_example() -> (Statement, Statement) {
    let u = definitions_universe();
    (parsed(GT, &u), parsed(H2, &u))
}

/// Builds [`H2`] members directly: two differently colored triangles and two
/// equally colored circles.
pub struct H2Generator;

impl ConstructiveGenerator for H2Generator {
    fn generate(&self, u: &UniverseConfig, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> Result<Figure, SampleError> {
        let mut colors = u.allowed_colors.clone();
        colors.shuffle(rng);
        let circle = pick(&u.allowed_colors, rng);
        let mut attrs = vec![
            (Shape::Triangle, colors[0], draw_size(u, rng)),
            (Shape::Triangle, colors[colors.len().min(2) - 1], draw_size(u, rng)),
            (Shape::Circle, circle, draw_size(u, rng)),
            (Shape::Circle, circle, draw_size(u, rng)),
        ];
        attrs.shuffle(rng);
        place_objects(&attrs, u, cfg, rng)
    }
}

/// Constructive generators for the built-in statements.
pub fn builtin_registry() -> GeneratorRegistry {
    let mut r = GeneratorRegistry::new();
    r.register(H2_PATTERN_ID, Box::new(H2Generator));
    r
}

/// Nine fixed-size circles on the 3×3 grid at {0.25, 0.5, 0.75}².
pub fn challenge2_universe() -> UniverseConfig {
    let ticks = [0.25, 0.5, 0.75];
    let points = ticks.iter().flat_map(|&y| ticks.iter().map(move |&x| [x, y])).collect();
    UniverseConfig {
        n_min: 9,
        n_max: 9,
        allowed_shapes: vec![Shape::Circle],
        allowed_colors: Color::ALL.to_vec(),
        size_min: 0.18,
        size_max: 0.18,
        layout: Layout::Grid { points },
        ..UniverseConfig::default()
    }
}

/// Equal-size blue and yellow circles.
pub fn challenge3_universe() -> UniverseConfig {
    UniverseConfig {
        n_min: 4,
        n_max: 12,
        allowed_shapes: vec![Shape::Circle],
        allowed_colors: vec![Color::Blue, Color::Yellow],
        size_min: 0.1,
        size_max: 0.1,
        ..UniverseConfig::default()
    }
}

/// Small objects only; the big shapes are latent regions.
pub fn challenge1_universe() -> UniverseConfig {
    UniverseConfig {
        n_min: 1,
        n_max: 30,
        size_min: 0.04,
        size_max: 0.06,
        min_gap: 0.005,
        ..UniverseConfig::default()
    }
}

/// Colors a member of a big shape may have.
pub fn region_colors(region_shape: Shape) -> [Color; 2] {
    match region_shape {
        Shape::Square => [Color::Blue, Color::Red],
        Shape::Triangle => [Color::Yellow, Color::Red],
        Shape::Circle => [Color::Yellow, Color::Blue],
    }
}

/// A virtual big shape that constrains the small objects placed on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentRegion {
    pub region_shape: Shape,
    pub center: [f64; 2],
    /// Diameter of the disc the shape is inscribed in.
    pub size: f64,
    pub members: Vec<usize>,
}

/// Boundary slack for the containment test.
pub const REGION_TOL: f64 = 1e-9;

impl LatentRegion {
    pub fn radius(&self) -> f64 {
        self.size / 2.0
    }

    pub fn outline(&self) -> Option<Vec<[f64; 2]>> {
        shape_outline(self.region_shape, self.center[0], self.center[1], self.size)
    }

    /// Signed distance from `p` to the region boundary, positive inside.
    pub fn inset(&self, p: [f64; 2]) -> f64 {
        match self.outline() {
            None => self.radius() - (p[0] - self.center[0]).hypot(p[1] - self.center[1]),
            Some(vs) => {
                let mut best = f64::INFINITY;
                for k in 0..vs.len() {
                    let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
                    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                    // Vertices run clockwise on screen, so the interior is on the right.
                    let cross = ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
                    best = best.min(cross / ex.hypot(ey));
                }
                best
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.inset(p) >= -REGION_TOL
    }

    pub fn area(&self) -> f64 {
        let r = self.radius();
        match self.region_shape {
            Shape::Circle => std::f64::consts::PI * r * r,
            Shape::Square => 2.0 * r * r,
            Shape::Triangle => 3.0 * 3f64.sqrt() / 4.0 * r * r,
        }
    }

    /// Uniform point on the boundary.
    fn boundary_point<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        match self.outline() {
            None => {
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                [self.center[0] + self.radius() * t.cos(), self.center[1] + self.radius() * t.sin()]
            }
            Some(vs) => {
                let k = rng.gen_range(0..vs.len());
                let (a, b) = (vs[k], vs[(k + 1) % vs.len()]);
                let t: f64 = rng.gen();
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberPlacement {
    /// Member discs lie entirely inside the big shape.
    #[default]
    Interior,
    /// Member centers lie on the big shape's outline.
    Outline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Challenge1Config {
    pub regions_min: usize,
    pub regions_max: usize,
    pub region_size_min: f64,
    pub region_size_max: f64,
    /// Clearance between the bounding discs of two regions.
    pub region_gap: f64,
    pub members_min: usize,
    pub members_max: usize,
    pub placement: MemberPlacement,
    /// Tries per region and per member.
    pub retries: usize,
}

impl Default for Challenge1Config {
    fn default() -> Self {
        Self {
            regions_min: 1,
            regions_max: 3,
            region_size_min: 0.32,
            region_size_max: 0.45,
            region_gap: 0.02,
            members_min: 2,
            members_max: 6,
            placement: MemberPlacement::Interior,
            retries: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Challenge1Instance {
    pub figure: Figure,
    pub regions: Vec<LatentRegion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionRule {
    NotContained,
    ShapeMatchesRegion,
    ColorNotAllowed,
    MemberNotSmall,
    Unassigned,
    AssignedTwice,
    BadMemberIndex,
    EmptyRegion,
    RegionCropped,
    RegionsOverlap,
}

impl fmt::Display for RegionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionRule::NotContained => "member center outside its region",
            RegionRule::ShapeMatchesRegion => "member has the region's shape",
            RegionRule::ColorNotAllowed => "member color not allowed in this region",
            RegionRule::MemberNotSmall => "member is not small",
            RegionRule::Unassigned => "object belongs to no region",
            RegionRule::AssignedTwice => "object belongs to several regions",
            RegionRule::BadMemberIndex => "member index out of range",
            RegionRule::EmptyRegion => "region has no members",
            RegionRule::RegionCropped => "region cropped at border",
            RegionRule::RegionsOverlap => "regions overlap",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionViolation {
    pub rule: RegionRule,
    pub regions: Vec<usize>,
    pub object: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Challenge1Report {
    pub figure: ValidationReport,
    pub regions: Vec<RegionViolation>,
}

impl Challenge1Report {
    pub fn is_ok(&self) -> bool {
        self.figure.is_ok() && self.regions.is_empty()
    }

    pub fn has(&self, rule: RegionRule) -> bool {
        self.regions.iter().any(|v| v.rule == rule)
    }

    /// Only the shape and color rules are broken; the geometry is sound.
    pub fn breaks_only_membership_rules(&self) -> bool {
        self.figure.is_ok()
            && !self.regions.is_empty()
            && self
                .regions
                .iter()
                .all(|v| matches!(v.rule, RegionRule::ShapeMatchesRegion | RegionRule::ColorNotAllowed))
    }
}

/// Checks the figure against the challenge-1 universe and every region rule.
pub fn validate_challenge1(f: &Figure, regions: &[LatentRegion]) -> Challenge1Report {
    let u = challenge1_universe();
    let mut out = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; f.len()];
    for (ri, reg) in regions.iter().enumerate() {
        let r = reg.radius();
        let [cx, cy] = reg.center;
        if cx < r || cx > 1.0 - r || cy < r || cy > 1.0 - r {
            out.push(RegionViolation { rule: RegionRule::RegionCropped, regions: vec![ri], object: None });
        }
        if reg.members.is_empty() {
            out.push(RegionViolation { rule: RegionRule::EmptyRegion, regions: vec![ri], object: None });
        }
        for &m in &reg.members {
            let v = |rule| RegionViolation { rule, regions: vec![ri], object: Some(m) };
            let Some(o) = f.objects.get(m) else {
                out.push(v(RegionRule::BadMemberIndex));
                continue;
            };
            match owner[m] {
                Some(_) => out.push(v(RegionRule::AssignedTwice)),
                None => owner[m] = Some(ri),
            }
            if !reg.contains([o.x, o.y]) {
                out.push(v(RegionRule::NotContained));
            }
            if o.shape == reg.region_shape {
                out.push(v(RegionRule::ShapeMatchesRegion));
            }
            if !region_colors(reg.region_shape).contains(&o.color) {
                out.push(v(RegionRule::ColorNotAllowed));
            }
            if o.size >= u.small_big_threshold {
                out.push(v(RegionRule::MemberNotSmall));
            }
        }
    }
    for (i, o) in owner.iter().enumerate() {
        if o.is_none() {
            out.push(RegionViolation { rule: RegionRule::Unassigned, regions: vec![], object: Some(i) });
        }
    }
    for i in 0..regions.len() {
        for j in (i + 1)..regions.len() {
            let (a, b) = (&regions[i], &regions[j]);
            let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
            if d < a.radius() + b.radius() {
                out.push(RegionViolation { rule: RegionRule::RegionsOverlap, regions: vec![i, j], object: None });
            }
        }
    }
    Challenge1Report { figure: validate_figure(f, &u), regions: out }
}

/// Full layout restarts before giving up on a region count.
const LAYOUT_RESTARTS: usize = 50;

fn place_regions(cfg: &Challenge1Config, rng: &mut ChaCha8Rng) -> Result<Vec<LatentRegion>, SampleError> {
    let k = rng.gen_range(cfg.regions_min..=cfg.regions_max);
    let mut last = SampleError::PlacementExhausted { object: 0, retries: cfg.retries };
    for _ in 0..LAYOUT_RESTARTS {
        match try_place_regions(k, cfg, rng) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn try_place_regions(k: usize, cfg: &Challenge1Config, rng: &mut ChaCha8Rng) -> Result<Vec<LatentRegion>, SampleError> {
    let mut regions: Vec<LatentRegion> = Vec::with_capacity(k);
    for idx in 0..k {
        let placed = (0..cfg.retries).find_map(|_| {
            let size = quantize(rng.gen_range(cfg.region_size_min..=cfg.region_size_max));
            let r = size / 2.0;
            let center = [quantize(rng.gen_range(r..=1.0 - r)), quantize(rng.gen_range(r..=1.0 - r))];
            let clear = regions.iter().all(|o| {
                (o.center[0] - center[0]).hypot(o.center[1] - center[1]) >= o.radius() + r + cfg.region_gap
            });
            let in_canvas = center.iter().all(|&c| c >= r && c <= 1.0 - r);
            (clear && in_canvas).then(|| LatentRegion { region_shape: pick(&Shape::ALL, rng), center, size, members: vec![] })
        });
        match placed {
            Some(reg) => regions.push(reg),
            None => return Err(SampleError::PlacementExhausted { object: idx, retries: cfg.retries }),
        }
    }
    Ok(regions)
}

/// Attribute choice for one member of `reg`.
type MemberAttrs = fn(&LatentRegion, &UniverseConfig, &mut ChaCha8Rng) -> (Shape, Color);

fn lawful_member(reg: &LatentRegion, u: &UniverseConfig, rng: &mut ChaCha8Rng) -> (Shape, Color) {
    let shapes: Vec<Shape> = u.allowed_shapes.iter().copied().filter(|&s| s != reg.region_shape).collect();
    (pick(&shapes, rng), pick(&region_colors(reg.region_shape), rng))
}

fn unconstrained_member(_: &LatentRegion, u: &UniverseConfig, rng: &mut ChaCha8Rng) -> (Shape, Color) {
    (pick(&u.allowed_shapes, rng), pick(&u.allowed_colors, rng))
}

fn fill_regions(
    mut regions: Vec<LatentRegion>,
    cfg: &Challenge1Config,
    attrs: MemberAttrs,
    rng: &mut ChaCha8Rng,
) -> Result<Challenge1Instance, SampleError> {
    let u = challenge1_universe();
    let mut objects: Vec<ObjectSpec> = Vec::new();
    for reg in regions.iter_mut() {
        let m = rng.gen_range(cfg.members_min..=cfg.members_max);
        for _ in 0..m {
            let (shape, color) = attrs(reg, &u, rng);
            let size = draw_size(&u, rng);
            let placed = (0..cfg.retries).find_map(|_| {
                let p = match cfg.placement {
                    MemberPlacement::Interior => {
                        let r = reg.radius();
                        [reg.center[0] + rng.gen_range(-r..=r), reg.center[1] + rng.gen_range(-r..=r)]
                    }
                    MemberPlacement::Outline => reg.boundary_point(rng),
                };
                let o = ObjectSpec::new(shape, color, size, quantize(p[0]), quantize(p[1]));
                let inside = match cfg.placement {
                    MemberPlacement::Interior => reg.inset([o.x, o.y]) >= o.radius(),
                    MemberPlacement::Outline => reg.contains([o.x, o.y]),
                };
                (inside && in_canvas(&o) && clear_of(&o, &objects, u.min_gap)).then_some(o)
            });
            // A crowded region keeps the members it already has.
            let Some(o) = placed else { break };
            reg.members.push(objects.len());
            objects.push(o);
        }
        if reg.members.is_empty() {
            return Err(SampleError::PlacementExhausted { object: objects.len(), retries: cfg.retries });
        }
    }
    Ok(Challenge1Instance { figure: Figure::new(objects), regions })
}

fn challenge1_instance(cfg: &Challenge1Config, rng: &mut ChaCha8Rng) -> Result<Challenge1Instance, SampleError> {
    let regions = place_regions(cfg, rng)?;
    fill_regions(regions, cfg, lawful_member, rng)
}

/// `count` instances that satisfy every challenge-1 rule, one random stream
/// per index.
pub fn generate_challenge1(count: usize, seed: u64, cfg: &Challenge1Config) -> Result<Vec<Challenge1Instance>, SampleError> {
    (0..count)
        .into_par_iter()
        .map(|i| challenge1_instance(cfg, &mut stream_rng(seed, Stream::Challenge, i as u64)))
        .collect()
}

/// `count` geometrically sound instances in which at least one member breaks
/// the shape or color rule of its region.
pub fn generate_challenge1_negatives(
    count: usize,
    seed: u64,
    cfg: &Challenge1Config,
    sampler: &SamplerConfig,
) -> Result<Vec<Challenge1Instance>, SampleError> {
    let cap = (10.0 / sampler.yield_floor).ceil() as u64;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::ChallengeNegative, i as u64);
            for attempt in 1..=cap {
                let regions = place_regions(cfg, &mut rng)?;
                let inst = fill_regions(regions, cfg, unconstrained_member, &mut rng)?;
                if validate_challenge1(&inst.figure, &inst.regions).breaks_only_membership_rules() {
                    return Ok(inst);
                }
                if attempt == cap {
                    break;
                }
            }
            Err(SampleError::YieldTooLow {
                pattern: ChallengeId::Challenge1.name().into(),
                produced: 0,
                attempts: cap,
                floor: sampler.yield_floor,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Challenge1NearMiss {
    pub source: usize,
    pub instance: Challenge1Instance,
    pub edits: Vec<EditOp>,
}

/// One recolor or reshape of a single member that breaks its region's rule.
pub fn challenge1_near_miss(inst: &Challenge1Instance, rng: &mut ChaCha8Rng) -> Option<(Challenge1Instance, EditOp)> {
    let mut candidates = Vec::new();
    for reg in &inst.regions {
        let allowed = region_colors(reg.region_shape);
        for &m in &reg.members {
            let o = inst.figure.objects.get(m)?;
            candidates.push(EditOp::Reshape { index: m, shape: reg.region_shape });
            for c in Color::ALL.into_iter().filter(|c| !allowed.contains(c) && *c != o.color) {
                candidates.push(EditOp::Recolor { index: m, color: c });
            }
        }
    }
    candidates.shuffle(rng);
    candidates.into_iter().find_map(|e| {
        let figure = e.apply(&inst.figure);
        let report = validate_challenge1(&figure, &inst.regions);
        report
            .breaks_only_membership_rules()
            .then(|| (Challenge1Instance { figure, regions: inst.regions.clone() }, e))
    })
}

/// Near misses for the first `count` sources, each from its own stream.
pub fn generate_challenge1_near_misses(
    sources: &[Challenge1Instance],
    count: usize,
    seed: u64,
) -> Result<Vec<Challenge1NearMiss>, SampleError> {
    let found: Vec<Option<Challenge1NearMiss>> = (0..count.min(sources.len()))
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::ChallengeNearMiss, i as u64);
            challenge1_near_miss(&sources[i], &mut rng)
                .map(|(instance, e)| Challenge1NearMiss { source: i, instance, edits: vec![e] })
        })
        .collect();
    let out: Vec<Challenge1NearMiss> = found.into_iter().flatten().collect();
    if out.len() < count {
        return Err(SampleError::NoNearMissFound {
            pattern: ChallengeId::Challenge1.name().into(),
            found: out.len(),
            requested: count,
        });
    }
    Ok(out)
}
