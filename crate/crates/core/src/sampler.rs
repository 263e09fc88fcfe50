//! Seeded figure generation: unconditioned samples, pattern members and
//! non-members, and near-miss counterfactuals.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha8. A run seed and a [`Stream`] purpose
//! select the key (`seed_from_u64(seed ^ purpose · 0x9E3779B97F4A7C15)`) and
//! the figure index selects the ChaCha stream (`set_stream(index)`). Figure
//! `i` therefore only ever reads from its own stream, and parallel runs are
//! reproducible regardless of scheduling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{EvalContext, ParseError, Statement};
use crate::model::{
    object_distance, quantize, validate_figure, Color, Figure, Layout, ModelError, ObjectSpec, Shape,
    UniverseConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    InvalidUniverse(#[from] ModelError),
    #[error("placement exhausted: object {object} could not be placed after {retries} tries (universe too dense)")]
    PlacementExhausted { object: usize, retries: usize },
    #[error("yield too low for `{pattern}`: {produced} accepted out of {attempts} attempts (floor {floor})")]
    YieldTooLow { pattern: String, produced: usize, attempts: u64, floor: f64 },
    #[error("no near miss found for `{pattern}`: {found} of {requested} produced")]
    NoNearMissFound { pattern: String, found: usize, requested: usize },
    #[error("source figure does not satisfy `{pattern}`")]
    SourceNotPositive { pattern: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Figure = 1,
    Positive = 2,
    Negative = 3,
    NegativePilot = 4,
    NearMiss = 5,
    Challenge = 6,
    Split = 7,
    ChallengeNegative = 8,
    ChallengeNearMiss = 9,
}

pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Tries per object before [`SampleError::PlacementExhausted`].
    pub placement_retries: usize,
    /// Minimum acceptance rate for rejection sampling.
    pub yield_floor: f64,
    /// Candidate edits evaluated per near-miss search.
    pub near_miss_budget: usize,
    /// Random values tried per object for resize and move edits, and random
    /// objects tried for add edits.
    pub edit_samples: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { placement_retries: 1000, yield_floor: 1e-4, near_miss_budget: 4000, edit_samples: 6 }
    }
}

impl SamplerConfig {
    fn pilot_cap(&self) -> u64 {
        (1.0 / self.yield_floor).ceil().max(1.0) as u64
    }

    fn index_cap(&self) -> u64 {
        (10.0 / self.yield_floor).ceil().max(1.0) as u64
    }
}

/// A statement interpreted inside a universe: the set of figures it accepts.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub id: String,
    pub statement: Statement,
    pub universe: UniverseConfig,
    pub context: EvalContext,
}

impl Pattern {
    pub fn new(id: impl Into<String>, text: &str, universe: UniverseConfig) -> Result<Self, ParseError> {
        let statement = Statement::parse_in(text, &universe)?;
        let context = EvalContext::for_universe(&universe);
        Ok(Self { id: id.into(), statement, universe, context })
    }

    pub fn with_statement(id: impl Into<String>, statement: Statement, universe: UniverseConfig) -> Self {
        let context = EvalContext::for_universe(&universe);
        Self { id: id.into(), statement, universe, context }
    }

    pub fn contains(&self, f: &Figure) -> bool {
        self.statement.evaluate(f, &self.context)
    }
}

pub(crate) fn pick<T: Copy, R: Rng>(items: &[T], rng: &mut R) -> T {
    items[rng.gen_range(0..items.len())]
}

pub(crate) fn draw_size<R: Rng>(u: &UniverseConfig, rng: &mut R) -> f64 {
    if u.size_min == u.size_max {
        u.size_min
    } else {
        quantize(rng.gen_range(u.size_min..=u.size_max))
    }
}

pub(crate) fn draw_position<R: Rng>(size: f64, rng: &mut R) -> (f64, f64) {
    let r = size / 2.0;
    if r >= 0.5 {
        return (0.5, 0.5);
    }
    (quantize(rng.gen_range(r..=1.0 - r)), quantize(rng.gen_range(r..=1.0 - r)))
}

pub(crate) fn in_canvas(o: &ObjectSpec) -> bool {
    let r = o.radius();
    o.x >= r && o.x <= 1.0 - r && o.y >= r && o.y <= 1.0 - r
}

pub(crate) fn clear_of(o: &ObjectSpec, others: &[ObjectSpec], gap: f64) -> bool {
    others.iter().all(|p| object_distance(o, p) >= (o.size + p.size) / 2.0 + gap)
}

fn max_count(u: &UniverseConfig) -> usize {
    match &u.layout {
        Layout::Free => u.n_max,
        Layout::Grid { points } => u.n_max.min(points.len()),
    }
}

/// One figure with a count drawn uniformly from `[n_min, n_max]`.
pub fn sample_figure<R: Rng>(u: &UniverseConfig, cfg: &SamplerConfig, rng: &mut R) -> Result<Figure, SampleError> {
    u.validate()?;
    let n = rng.gen_range(u.n_min..=max_count(u));
    sample_figure_with_count(u, n, cfg, rng)
}

/// One figure with exactly `n` objects, placed by per-object rejection.
pub fn sample_figure_with_count<R: Rng>(
    u: &UniverseConfig,
    n: usize,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Figure, SampleError> {
    let mut objects: Vec<ObjectSpec> = Vec::with_capacity(n);
    match &u.layout {
        Layout::Free => {
            for k in 0..n {
                let mut placed = false;
                for _ in 0..cfg.placement_retries {
                    let shape = pick(&u.allowed_shapes, rng);
                    let color = pick(&u.allowed_colors, rng);
                    let size = draw_size(u, rng);
                    let (x, y) = draw_position(size, rng);
                    let o = ObjectSpec::new(shape, color, size, x, y);
                    if in_canvas(&o) && clear_of(&o, &objects, u.min_gap) {
                        objects.push(o);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(SampleError::PlacementExhausted { object: k, retries: cfg.placement_retries });
                }
            }
        }
        Layout::Grid { points } => {
            let mut slots: Vec<usize> = (0..points.len()).collect();
            slots.shuffle(rng);
            for (k, &slot) in slots.iter().take(n).enumerate() {
                let [x, y] = points[slot];
                let o = ObjectSpec::new(pick(&u.allowed_shapes, rng), pick(&u.allowed_colors, rng), draw_size(u, rng), x, y);
                if !(in_canvas(&o) && clear_of(&o, &objects, u.min_gap)) {
                    return Err(SampleError::PlacementExhausted { object: k, retries: 1 });
                }
                objects.push(o);
            }
            if n > points.len() {
                return Err(SampleError::PlacementExhausted { object: points.len(), retries: 1 });
            }
        }
    }
    Ok(Figure::new(objects))
}

/// Places objects with the given `(shape, color, size)` at uniform free
/// positions, one object at a time with per-object rejection.
pub fn place_objects<R: Rng>(
    attrs: &[(Shape, Color, f64)],
    u: &UniverseConfig,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Figure, SampleError> {
    let mut objects: Vec<ObjectSpec> = Vec::with_capacity(attrs.len());
    for (k, &(shape, color, size)) in attrs.iter().enumerate() {
        let placed = (0..cfg.placement_retries).find_map(|_| {
            let (x, y) = draw_position(size, rng);
            let o = ObjectSpec::new(shape, color, size, x, y);
            (in_canvas(&o) && clear_of(&o, &objects, u.min_gap)).then_some(o)
        });
        match placed {
            Some(o) => objects.push(o),
            None => return Err(SampleError::PlacementExhausted { object: k, retries: cfg.placement_retries }),
        }
    }
    Ok(Figure::new(objects))
}

/// Builds members of a specific pattern directly instead of by rejection.
/// Outputs are still checked against the pattern before they are accepted.
pub trait ConstructiveGenerator: Send + Sync {
    fn generate(&self, u: &UniverseConfig, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> Result<Figure, SampleError>;
}

/// Constructive generators keyed by pattern id.
#[derive(Default)]
pub struct GeneratorRegistry {
    generators: BTreeMap<String, Box<dyn ConstructiveGenerator>>,
}

impl GeneratorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, pattern_id: impl Into<String>, g: Box<dyn ConstructiveGenerator>) {
        self.generators.insert(pattern_id.into(), g);
    }

    pub fn get(&self, pattern_id: &str) -> Option<&dyn ConstructiveGenerator> {
        self.generators.get(pattern_id).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.generators.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationReport {
    pub requested: usize,
    pub produced: usize,
    pub attempts: u64,
    pub rejection_rate: f64,
    pub seed: u64,
    pub constructive: bool,
}

impl GenerationReport {
    fn new(requested: usize, produced: usize, attempts: u64, seed: u64, constructive: bool) -> Self {
        let rejection_rate = if attempts == 0 { 0.0 } else { 1.0 - produced as f64 / attempts as f64 };
        Self { requested, produced, attempts, rejection_rate, seed, constructive }
    }
}

#[derive(Debug, Clone)]
pub struct Generation {
    pub figures: Vec<Figure>,
    pub report: GenerationReport,
}

/// Draws until `accept` holds or the cap is reached.
fn draw_until<R: Rng>(
    cap: u64,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Result<Figure, SampleError>,
    accept: impl Fn(&Figure) -> bool,
) -> Result<(Option<Figure>, u64), SampleError> {
    for attempt in 1..=cap {
        let f = draw(rng)?;
        if accept(&f) {
            return Ok((Some(f), attempt));
        }
    }
    Ok((None, cap))
}

/// Runs a per-index rejection loop for `count` indices, index 0 serially as a
/// pilot with a shorter cap, the rest in parallel.
fn rejection_run(
    p: &Pattern,
    count: usize,
    seed: u64,
    stream: Stream,
    cfg: &SamplerConfig,
    draw: &(dyn Fn(usize, &mut ChaCha8Rng) -> Result<Figure, SampleError> + Sync),
    accept: &(dyn Fn(&Figure) -> bool + Sync),
) -> Result<(Vec<Figure>, u64), SampleError> {
    let too_low = |produced: usize, attempts: u64| SampleError::YieldTooLow {
        pattern: p.id.clone(),
        produced,
        attempts,
        floor: cfg.yield_floor,
    };
    if count == 0 {
        return Ok((Vec::new(), 0));
    }
    let run_index = |i: usize, cap: u64| {
        let mut rng = stream_rng(seed, stream, i as u64);
        draw_until(cap, &mut rng, |r| draw(i, r), accept)
    };
    let (first, first_attempts) = run_index(0, cfg.pilot_cap())?;
    let first = first.ok_or_else(|| too_low(0, first_attempts))?;

    let rest: Vec<(Option<Figure>, u64)> = (1..count)
        .into_par_iter()
        .map(|i| run_index(i, cfg.index_cap()))
        .collect::<Result<_, _>>()?;

    let mut attempts = first_attempts;
    let mut figures = Vec::with_capacity(count);
    figures.push(first);
    let mut missing = false;
    for (f, a) in rest {
        attempts += a;
        match f {
            Some(f) => figures.push(f),
            None => missing = true,
        }
    }
    if missing || (figures.len() as f64) < cfg.yield_floor * attempts as f64 {
        return Err(too_low(figures.len(), attempts));
    }
    Ok((figures, attempts))
}

/// `count` figures that satisfy the pattern.
pub fn generate_positives(
    p: &Pattern,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
    registry: Option<&GeneratorRegistry>,
) -> Result<Generation, SampleError> {
    p.universe.validate()?;
    let constructive = registry.and_then(|r| r.get(&p.id));
    let u = &p.universe;
    let draw = |_: usize, rng: &mut ChaCha8Rng| match constructive {
        Some(g) => g.generate(u, cfg, rng),
        None => sample_figure(u, cfg, rng),
    };
    // Constructive outputs are still filtered by the universe and the pattern.
    let accept = |f: &Figure| validate_figure(f, u).is_ok() && p.contains(f);
    let (figures, attempts) = rejection_run(p, count, seed, Stream::Positive, cfg, &draw, &accept)?;
    let report = GenerationReport::new(count, figures.len(), attempts, seed, constructive.is_some());
    Ok(Generation { figures, report })
}

/// Splits `count` over object counts proportionally to `reference`
/// (largest-remainder rounding), as `(object count, quota)` pairs.
fn stratum_quotas(reference: &[Figure], count: usize) -> Vec<(usize, usize)> {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for f in reference {
        *hist.entry(f.len()).or_default() += 1;
    }
    let total = reference.len();
    let mut rows: Vec<(usize, usize, usize)> = hist
        .iter()
        .map(|(&n, &c)| (n, c * count / total, (c * count) % total))
        .collect();
    let assigned: usize = rows.iter().map(|r| r.1).sum();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].2.cmp(&rows[a].2).then(rows[a].0.cmp(&rows[b].0)));
    for &i in order.iter().take(count - assigned) {
        rows[i].1 += 1;
    }
    rows.into_iter().filter(|r| r.1 > 0).map(|r| (r.0, r.1)).collect()
}

/// `count` figures that the pattern rejects.
///
/// With a `reference` set (normally the positives) the object-count
/// histogram of the reference is reproduced by stratified sampling. Strata
/// where no non-member can be found move their quota to the nearest feasible
/// object count, alternating below and above on ties.
pub fn generate_negatives(
    p: &Pattern,
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
    reference: Option<&[Figure]>,
) -> Result<Generation, SampleError> {
    let u = &p.universe;
    u.validate()?;
    let reject = |f: &Figure| !p.contains(f);
    let reference = reference.filter(|r| !r.is_empty());
    let Some(reference) = reference else {
        let draw = |_: usize, rng: &mut ChaCha8Rng| sample_figure(u, cfg, rng);
        let (figures, attempts) = rejection_run(p, count, seed, Stream::Negative, cfg, &draw, &reject)?;
        let report = GenerationReport::new(count, figures.len(), attempts, seed, false);
        return Ok(Generation { figures, report });
    };

    let lo = u.n_min;
    let hi = max_count(u);
    let mut feasible: BTreeMap<usize, bool> = BTreeMap::new();
    let mut pilot_attempts = 0u64;
    let mut is_feasible = |n: usize, pilot_attempts: &mut u64| -> Result<bool, SampleError> {
        if let Some(&ok) = feasible.get(&n) {
            return Ok(ok);
        }
        let mut rng = stream_rng(seed, Stream::NegativePilot, n as u64);
        let (found, a) = draw_until(cfg.pilot_cap(), &mut rng, |r| sample_figure_with_count(u, n, cfg, r), reject)?;
        *pilot_attempts += a;
        feasible.insert(n, found.is_some());
        Ok(found.is_some())
    };

    let mut plan: BTreeMap<usize, usize> = BTreeMap::new();
    for (n, quota) in stratum_quotas(reference, count) {
        let n = n.clamp(lo, hi);
        if is_feasible(n, &mut pilot_attempts)? {
            *plan.entry(n).or_default() += quota;
            continue;
        }
        let mut moved = false;
        for d in 1..=(hi - lo) {
            let below = n.checked_sub(d).filter(|&m| m >= lo);
            let above = Some(n + d).filter(|&m| m <= hi);
            let below_ok = match below {
                Some(m) => is_feasible(m, &mut pilot_attempts)?,
                None => false,
            };
            let above_ok = match above {
                Some(m) => is_feasible(m, &mut pilot_attempts)?,
                None => false,
            };
            match (below_ok, above_ok) {
                (true, true) => {
                    *plan.entry(n - d).or_default() += quota - quota / 2;
                    *plan.entry(n + d).or_default() += quota / 2;
                }
                (true, false) => *plan.entry(n - d).or_default() += quota,
                (false, true) => *plan.entry(n + d).or_default() += quota,
                (false, false) => continue,
            }
            moved = true;
            break;
        }
        if !moved {
            return Err(SampleError::YieldTooLow {
                pattern: p.id.clone(),
                produced: 0,
                attempts: pilot_attempts,
                floor: cfg.yield_floor,
            });
        }
    }

    let strata: Vec<usize> = plan.iter().flat_map(|(&n, &q)| std::iter::repeat_n(n, q)).collect();
    let draw = |i: usize, rng: &mut ChaCha8Rng| sample_figure_with_count(u, strata[i], cfg, rng);
    let (figures, attempts) = rejection_run(p, count, seed, Stream::Negative, cfg, &draw, &reject)?;
    let report = GenerationReport::new(count, figures.len(), attempts + pilot_attempts, seed, false);
    Ok(Generation { figures, report })
}

/// One atomic change to a figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EditOp {
    Recolor { index: usize, color: Color },
    Reshape { index: usize, shape: Shape },
    Resize { index: usize, size: f64 },
    Move { index: usize, x: f64, y: f64 },
    Add { object: ObjectSpec },
    Remove { index: usize },
}

impl EditOp {
    /// Applies the edit; `Add` appends, `Remove` keeps the order of the rest.
    /// The result is not validated.
    pub fn apply(&self, f: &Figure) -> Figure {
        let mut objects = f.objects.clone();
        match *self {
            EditOp::Recolor { index, color } => objects[index].color = color,
            EditOp::Reshape { index, shape } => objects[index].shape = shape,
            EditOp::Resize { index, size } => objects[index].size = size,
            EditOp::Move { index, x, y } => {
                objects[index].x = x;
                objects[index].y = y;
            }
            EditOp::Add { object } => objects.push(object),
            EditOp::Remove { index } => {
                objects.remove(index);
            }
        }
        Figure::new(objects)
    }
}

/// Every attribute edit plus sampled geometric edits for `f`.
fn candidate_edits(f: &Figure, u: &UniverseConfig, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> Vec<EditOp> {
    let mut out = Vec::new();
    let n = f.len();
    let grid_free: Vec<[f64; 2]> = match &u.layout {
        Layout::Free => Vec::new(),
        Layout::Grid { points } => points
            .iter()
            .copied()
            .filter(|p| !f.objects.iter().any(|o| o.x == p[0] && o.y == p[1]))
            .collect(),
    };
    for (index, o) in f.objects.iter().enumerate() {
        out.extend(u.allowed_colors.iter().filter(|&&c| c != o.color).map(|&color| EditOp::Recolor { index, color }));
        out.extend(u.allowed_shapes.iter().filter(|&&s| s != o.shape).map(|&shape| EditOp::Reshape { index, shape }));
        if n > u.n_min.max(1) {
            out.push(EditOp::Remove { index });
        }
        if u.size_min < u.size_max {
            for _ in 0..cfg.edit_samples {
                out.push(EditOp::Resize { index, size: draw_size(u, rng) });
            }
        }
        match &u.layout {
            Layout::Free => {
                for _ in 0..cfg.edit_samples {
                    let (x, y) = draw_position(o.size, rng);
                    out.push(EditOp::Move { index, x, y });
                }
            }
            Layout::Grid { .. } => {
                out.extend(grid_free.iter().map(|p| EditOp::Move { index, x: p[0], y: p[1] }));
            }
        }
    }
    if n < max_count(u) {
        for _ in 0..cfg.edit_samples.max(1) * 2 {
            let size = draw_size(u, rng);
            let (x, y) = match &u.layout {
                Layout::Free => draw_position(size, rng),
                Layout::Grid { .. } if grid_free.is_empty() => break,
                Layout::Grid { .. } => {
                    let p = grid_free[rng.gen_range(0..grid_free.len())];
                    (p[0], p[1])
                }
            };
            let object = ObjectSpec::new(pick(&u.allowed_shapes, rng), pick(&u.allowed_colors, rng), size, x, y);
            out.push(EditOp::Add { object });
        }
    }
    out.shuffle(rng);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearMiss {
    /// Index of the source figure in the positives passed in.
    pub source: usize,
    pub figure: Figure,
    pub edits: Vec<EditOp>,
}

/// Searches for a figure within `max_edits` atomic edits of `f` that is still
/// in the universe but no longer satisfies the pattern.
pub fn near_miss(
    p: &Pattern,
    f: &Figure,
    rng: &mut ChaCha8Rng,
    cfg: &SamplerConfig,
    max_edits: usize,
) -> Result<(Figure, Vec<EditOp>), SampleError> {
    if !p.contains(f) {
        return Err(SampleError::SourceNotPositive { pattern: p.id.clone() });
    }
    let not_found = || SampleError::NoNearMissFound { pattern: p.id.clone(), found: 0, requested: 1 };
    let mut budget = cfg.near_miss_budget;
    let mut frontier: Vec<(Figure, Vec<EditOp>)> = vec![(f.clone(), Vec::new())];
    for depth in 1..=max_edits {
        let mut next = Vec::new();
        for (base, trail) in &frontier {
            for edit in candidate_edits(base, &p.universe, cfg, rng) {
                if budget == 0 {
                    return Err(not_found());
                }
                budget -= 1;
                let g = edit.apply(base);
                if !validate_figure(&g, &p.universe).is_ok() {
                    continue;
                }
                let mut t = trail.clone();
                t.push(edit);
                if !p.contains(&g) {
                    return Ok((g, t));
                }
                if depth < max_edits {
                    next.push((g, t));
                }
            }
        }
        next.shuffle(rng);
        frontier = next;
    }
    Err(not_found())
}

/// Near misses for the positives in order until `count` are found. Each
/// source index uses its own random stream.
pub fn generate_near_misses(
    p: &Pattern,
    positives: &[Figure],
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
    max_edits: usize,
) -> Result<Vec<NearMiss>, SampleError> {
    let mut out = Vec::with_capacity(count);
    let mut next = 0;
    while out.len() < count && next < positives.len() {
        let end = (next + count - out.len()).min(positives.len());
        let found: Vec<Option<NearMiss>> = (next..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, Stream::NearMiss, i as u64);
                match near_miss(p, &positives[i], &mut rng, cfg, max_edits) {
                    Ok((figure, edits)) => Ok(Some(NearMiss { source: i, figure, edits })),
                    Err(SampleError::NoNearMissFound { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_, _>>()?;
        out.extend(found.into_iter().flatten());
        next = end;
    }
    if out.len() < count {
        return Err(SampleError::NoNearMissFound { pattern: p.id.clone(), found: out.len(), requested: count });
    }
    Ok(out)
}
