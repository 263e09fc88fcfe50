//! Compositional train/test splits.
//!
//! Atoms are the leaf predicates of a record's statement plus the attribute
//! values of its objects. Compounds are canonicalized statement subtrees up
//! to a configured height. A split keeps the atom distributions of both
//! sides close while pushing their compound distributions apart, both
//! measured as `1 − Σ p^α q^(1−α)` with `p` the train side.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetRecord;
use crate::dsl::{AttrTest, Cond, Expr, Gestalt, Operand, QuantKind, Selector, SizeClass, Statement};
use crate::model::ObjectSpec;
use crate::sampler::{stream_rng, Stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("unknown statement id `{0}`")]
    UnknownStatementId(String),
    #[error("split needs at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("`{name}` must lie in [0, 1], got {value}")]
    InvalidTarget { name: &'static str, value: f64 },
    #[error("infeasible split: {0}")]
    Infeasible(String),
}

/// Normalized frequencies keyed by canonical strings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution(pub BTreeMap<String, f64>);

impl Distribution {
    pub fn from_counts(counts: &BTreeMap<String, f64>) -> Self {
        let total: f64 = counts.values().sum();
        if total <= 0.0 {
            return Self::default();
        }
        Self(counts.iter().filter(|(_, &c)| c > 0.0).map(|(k, &c)| (k.clone(), c / total)).collect())
    }

    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_alpha(alpha: f64) -> Result<(), SplitError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(SplitError::InvalidAlpha(alpha))
    }
}

/// `1 − Σ p_k^α q_k^(1−α)` over the union of supports, clamped to `[0, 1]`.
pub fn chernoff_divergence(p: &Distribution, q: &Distribution, alpha: f64) -> Result<f64, SplitError> {
    check_alpha(alpha)?;
    let coefficient: f64 = p
        .0
        .iter()
        .filter_map(|(k, &pk)| q.0.get(k).map(|&qk| pk.powf(alpha) * qk.powf(1.0 - alpha)))
        .sum();
    Ok((1.0 - coefficient).clamp(0.0, 1.0))
}

/// Same measure on unnormalized count vectors over a shared key index.
fn chernoff_dense(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp <= 0.0 || sq <= 0.0 {
        return if sp <= 0.0 && sq <= 0.0 { 0.0 } else { 1.0 };
    }
    let c: f64 = p
        .iter()
        .zip(q)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a / sp).powf(alpha) * (b / sq).powf(1.0 - alpha))
        .sum();
    (1.0 - c).clamp(0.0, 1.0)
}

/// A canonicalized statement node.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonNode {
    pub key: String,
    /// Leaves have height 1.
    pub height: usize,
    pub children: Vec<CanonNode>,
}

impl CanonNode {
    fn leaf(key: String) -> Self {
        Self { key, height: 1, children: Vec::new() }
    }

    fn interior(key: String, children: Vec<CanonNode>) -> Self {
        let height = 1 + children.iter().map(|c| c.height).max().unwrap_or(0);
        Self { key, height, children }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a CanonNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

fn test_key(t: &AttrTest) -> String {
    let op = if t.negated { "!=" } else { "=" };
    format!("{}{op}{}", t.value.attribute().name(), t.value.name())
}

fn cond_key(c: &Cond) -> String {
    match c {
        Cond::Test(t) => test_key(t),
        Cond::Not(inner) => format!("!{}", cond_key(inner)),
        Cond::And(cs) | Cond::Or(cs) => {
            let mut parts: Vec<String> = cs.iter().map(cond_key).collect();
            parts.sort();
            let sep = if matches!(c, Cond::And(_)) { "&" } else { "|" };
            format!("({})", parts.join(sep))
        }
    }
}

fn selector_key(s: &Selector) -> String {
    match &s.cond {
        None => "objects".into(),
        Some(c) => format!("objects|{}", cond_key(c)),
    }
}

fn gestalt_key(g: &Gestalt) -> String {
    match g {
        Gestalt::Clustered(s, k) => format!("CLUSTERED({},{k})", selector_key(s)),
        other => format!("{}({})", other.keyword(), selector_key(other.selector())),
    }
}

struct Canonicalizer {
    scope: Vec<String>,
}

impl Canonicalizer {
    /// Bound variables become `#k`, k counting binders from the outermost.
    fn var(&self, name: &str) -> String {
        match self.scope.iter().rposition(|v| v == name) {
            Some(k) => format!("#{k}"),
            None => name.to_string(),
        }
    }

    fn node(&mut self, e: &Expr) -> CanonNode {
        match e {
            Expr::And(_) | Expr::Or(_) => {
                let is_and = matches!(e, Expr::And(_));
                let mut items = Vec::new();
                flatten(e, is_and, &mut items);
                let mut children: Vec<CanonNode> = items.into_iter().map(|i| self.node(i)).collect();
                children.sort_by(|a, b| a.key.cmp(&b.key));
                let op = if is_and { "AND" } else { "OR" };
                let key = format!("{op}({})", children.iter().map(|c| c.key.as_str()).collect::<Vec<_>>().join(","));
                CanonNode::interior(key, children)
            }
            Expr::Not(inner) => {
                let child = self.node(inner);
                CanonNode::interior(format!("NOT({})", child.key), vec![child])
            }
            Expr::Quant(q) => {
                let base = self.scope.len();
                self.scope.extend(q.vars.iter().cloned());
                let body = self.node(&q.body);
                self.scope.truncate(base);
                let kind = match q.kind {
                    QuantKind::Exists => "EXISTS",
                    QuantKind::Forall => "FORALL",
                };
                let distinct = if q.distinct { ",DISTINCT" } else { "" };
                let key = format!("{kind}[{}{distinct}]({}):{}", q.vars.len(), selector_key(&q.selector), body.key);
                CanonNode::interior(key, vec![body])
            }
            Expr::Compare { count, op, rhs } => {
                let lhs = selector_key(count);
                let key = match rhs {
                    Operand::Int(n) => format!("COUNT({lhs}){}{n}", op.symbol()),
                    Operand::Count(other) => {
                        let rhs = selector_key(other);
                        if rhs < lhs {
                            format!("COUNT({rhs}){}COUNT({lhs})", op.flipped().symbol())
                        } else {
                            format!("COUNT({lhs}){}COUNT({rhs})", op.symbol())
                        }
                    }
                };
                CanonNode::leaf(key)
            }
            Expr::Gestalt(g) => CanonNode::leaf(gestalt_key(g)),
            Expr::Attr { var, test } => CanonNode::leaf(format!("{}.{}", self.var(var), test_key(test))),
            Expr::Relation { rel, args } => {
                let mut names: Vec<String> = args.iter().map(|a| self.var(a)).collect();
                if rel.is_symmetric() {
                    names.sort();
                }
                CanonNode::leaf(format!("{}({})", rel.keyword(), names.join(",")))
            }
        }
    }
}

fn flatten<'a>(e: &'a Expr, is_and: bool, out: &mut Vec<&'a Expr>) {
    match (e, is_and) {
        (Expr::And(items), true) | (Expr::Or(items), false) => {
            for i in items {
                flatten(i, is_and, out);
            }
        }
        _ => out.push(e),
    }
}

/// Canonical tree of an expression: commutative children sorted, nested
/// AND/OR flattened, bound variables renamed by binding position.
pub fn canonical_tree(e: &Expr) -> CanonNode {
    Canonicalizer { scope: Vec::new() }.node(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompoundOptions {
    /// Maximum subtree height counted as a compound; leaves have height 1.
    pub depth: usize,
    /// Count single leaves as compounds too.
    pub include_leaves: bool,
    /// Size boundary used for the `size=small|big` object atoms.
    pub small_big_threshold: f64,
}

impl Default for CompoundOptions {
    fn default() -> Self {
        Self { depth: 4, include_leaves: false, small_big_threshold: 0.085 }
    }
}

fn statement_atoms(tree: &CanonNode, out: &mut BTreeMap<String, f64>) {
    tree.walk(&mut |n| {
        if n.is_leaf() {
            *out.entry(n.key.clone()).or_default() += 1.0;
        }
    });
}

fn object_atoms(objects: &[ObjectSpec], threshold: f64, out: &mut BTreeMap<String, f64>) {
    for o in objects {
        let size = if SizeClass::Small.holds(o.size, threshold) { SizeClass::Small } else { SizeClass::Big };
        for key in [format!("shape={}", o.shape), format!("color={}", o.color), format!("size={}", size.name())] {
            *out.entry(key).or_default() += 1.0;
        }
    }
}

fn compounds(tree: &CanonNode, opts: &CompoundOptions, out: &mut BTreeMap<String, f64>) {
    tree.walk(&mut |n| {
        if n.height <= opts.depth && (opts.include_leaves || !n.is_leaf()) {
            *out.entry(n.key.clone()).or_default() += 1.0;
        }
    });
}

/// Per-record atom and compound counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordCounts {
    pub atoms: BTreeMap<String, f64>,
    pub compounds: BTreeMap<String, f64>,
}

fn canonical_trees(
    records: &[DatasetRecord],
    statements: &BTreeMap<String, Statement>,
) -> Result<BTreeMap<String, CanonNode>, SplitError> {
    let mut trees = BTreeMap::new();
    for r in records {
        if !trees.contains_key(&r.statement_id) {
            let s = statements
                .get(&r.statement_id)
                .ok_or_else(|| SplitError::UnknownStatementId(r.statement_id.clone()))?;
            trees.insert(r.statement_id.clone(), canonical_tree(s.ast()));
        }
    }
    Ok(trees)
}

pub fn record_counts(
    records: &[DatasetRecord],
    statements: &BTreeMap<String, Statement>,
    opts: &CompoundOptions,
) -> Result<Vec<RecordCounts>, SplitError> {
    let trees = canonical_trees(records, statements)?;
    Ok(records
        .iter()
        .map(|r| {
            let tree = &trees[&r.statement_id];
            let mut atoms = BTreeMap::new();
            statement_atoms(tree, &mut atoms);
            object_atoms(&r.objects, opts.small_big_threshold, &mut atoms);
            let mut comp = BTreeMap::new();
            compounds(tree, opts, &mut comp);
            RecordCounts { atoms, compounds: comp }
        })
        .collect())
}

/// Atom and compound distributions of a set of records.
pub fn extract_distributions(
    records: &[DatasetRecord],
    statements: &BTreeMap<String, Statement>,
    opts: &CompoundOptions,
) -> Result<(Distribution, Distribution), SplitError> {
    let counts = record_counts(records, statements, opts)?;
    let mut atoms = BTreeMap::new();
    let mut comp = BTreeMap::new();
    for c in &counts {
        for (k, v) in &c.atoms {
            *atoms.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &c.compounds {
            *comp.entry(k.clone()).or_default() += v;
        }
    }
    Ok((Distribution::from_counts(&atoms), Distribution::from_counts(&comp)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub target_compound_div: f64,
    pub max_atom_div: f64,
    pub alpha_atoms: f64,
    pub alpha_compounds: f64,
    pub compounds: CompoundOptions,
    /// Desired share of records in the test set.
    pub test_fraction: f64,
    /// Allowed deviation of the achieved test share from `test_fraction`.
    pub balance_tolerance: f64,
    pub restarts: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            target_compound_div: 1.0,
            max_atom_div: 0.02,
            alpha_atoms: 0.5,
            alpha_compounds: 0.1,
            compounds: CompoundOptions::default(),
            test_fraction: 0.5,
            balance_tolerance: 0.1,
            restarts: 8,
            max_steps: 10_000,
            seed: 0,
        }
    }
}

pub const MIN_SPLIT_RECORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitResult {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub atom_divergence: f64,
    pub compound_divergence: f64,
    pub target_reached: bool,
    pub steps: usize,
}

/// Records sharing a statement move together.
struct Unit {
    members: Vec<usize>,
    atoms: Vec<f64>,
    compounds: Vec<f64>,
}

fn dense(maps: impl Iterator<Item = BTreeMap<String, f64>>) -> (Vec<String>, Vec<Vec<f64>>) {
    let maps: Vec<_> = maps.collect();
    let keys: BTreeSet<&String> = maps.iter().flat_map(|m| m.keys()).collect();
    let index: BTreeMap<&String, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let vecs = maps
        .iter()
        .map(|m| {
            let mut v = vec![0.0; index.len()];
            for (k, c) in m {
                v[index[k]] += c;
            }
            v
        })
        .collect();
    (keys.into_iter().cloned().collect(), vecs)
}

struct Search<'a> {
    units: &'a [Unit],
    cfg: &'a SplitConfig,
    lo: usize,
    hi: usize,
}

#[derive(Debug, Clone, Copy)]
struct Score {
    atom: f64,
    compound: f64,
}

impl Score {
    fn feasible(&self, cap: f64) -> bool {
        self.atom <= cap + 1e-12
    }

    /// Feasible beats infeasible; feasible compare on compound divergence,
    /// infeasible on atom divergence.
    fn better_than(&self, other: &Score, cap: f64) -> bool {
        match (self.feasible(cap), other.feasible(cap)) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.compound > other.compound + 1e-12,
            (false, false) => self.atom < other.atom - 1e-12,
        }
    }
}

impl Search<'_> {
    fn test_size(&self, in_test: &[bool]) -> usize {
        self.units.iter().zip(in_test).filter(|(_, &t)| t).map(|(u, _)| u.members.len()).sum()
    }

    fn balanced(&self, in_test: &[bool]) -> bool {
        let n = self.test_size(in_test);
        n >= self.lo && n <= self.hi
    }

    fn score(&self, in_test: &[bool]) -> Score {
        let dims = |f: fn(&Unit) -> &Vec<f64>| {
            let len = f(&self.units[0]).len();
            let (mut train, mut test) = (vec![0.0; len], vec![0.0; len]);
            for (u, &t) in self.units.iter().zip(in_test) {
                let side = if t { &mut test } else { &mut train };
                for (s, v) in side.iter_mut().zip(f(u)) {
                    *s += v;
                }
            }
            (train, test)
        };
        let (atr, ate) = dims(|u| &u.atoms);
        let (ctr, cte) = dims(|u| &u.compounds);
        Score {
            atom: chernoff_dense(&atr, &ate, self.cfg.alpha_atoms),
            compound: chernoff_dense(&ctr, &cte, self.cfg.alpha_compounds),
        }
    }

    fn random_start(&self, rng: &mut rand_chacha::ChaCha8Rng) -> Option<Vec<bool>> {
        let mut order: Vec<usize> = (0..self.units.len()).collect();
        for _ in 0..64 {
            order.shuffle(rng);
            let mut in_test = vec![false; self.units.len()];
            let mut size = 0;
            for &i in &order {
                let m = self.units[i].members.len();
                if size + m <= self.hi && size < self.lo {
                    in_test[i] = true;
                    size += m;
                }
            }
            if self.balanced(&in_test) {
                return Some(in_test);
            }
        }
        None
    }

    /// All single moves and pairwise swaps that stay balanced.
    fn neighbors(&self, in_test: &[bool]) -> Vec<Vec<bool>> {
        let n = self.units.len();
        let mut out = Vec::new();
        for i in 0..n {
            let mut m = in_test.to_vec();
            m[i] = !m[i];
            if self.balanced(&m) {
                out.push(m);
            }
            for j in (i + 1)..n {
                if in_test[i] != in_test[j] {
                    let mut s = in_test.to_vec();
                    s[i] = !s[i];
                    s[j] = !s[j];
                    if self.balanced(&s) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    fn climb(&self, mut state: Vec<bool>, steps: &mut usize) -> (Vec<bool>, Score) {
        let cap = self.cfg.max_atom_div;
        let mut score = self.score(&state);
        while *steps < self.cfg.max_steps {
            if score.feasible(cap) && score.compound >= self.cfg.target_compound_div {
                break;
            }
            let candidates = self.neighbors(&state);
            let scored: Vec<Score> = candidates.par_iter().map(|c| self.score(c)).collect();
            let mut best: Option<usize> = None;
            for (i, s) in scored.iter().enumerate() {
                if s.better_than(best.map_or(&score, |b| &scored[b]), cap) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            *steps += 1;
            state = candidates[b].clone();
            score = scored[b];
        }
        (state, score)
    }
}

/// Greedy move/swap search over statement classes with seeded restarts.
pub fn design_split(
    records: &[DatasetRecord],
    statements: &BTreeMap<String, Statement>,
    cfg: &SplitConfig,
) -> Result<SplitResult, SplitError> {
    check_alpha(cfg.alpha_atoms)?;
    check_alpha(cfg.alpha_compounds)?;
    for (name, value) in [
        ("target_compound_div", cfg.target_compound_div),
        ("max_atom_div", cfg.max_atom_div),
        ("test_fraction", cfg.test_fraction),
    ] {
        if !(0.0..=1.0).contains(&value) {
            return Err(SplitError::InvalidTarget { name, value });
        }
    }
    if records.len() < MIN_SPLIT_RECORDS {
        return Err(SplitError::TooFewRecords { needed: MIN_SPLIT_RECORDS, got: records.len() });
    }
    let counts = record_counts(records, statements, &cfg.compounds)?;

    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        classes.entry(r.statement_id.as_str()).or_default().push(i);
    }
    let sum_maps = |members: &[usize], pick: fn(&RecordCounts) -> &BTreeMap<String, f64>| {
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for &i in members {
            for (k, v) in pick(&counts[i]) {
                *m.entry(k.clone()).or_default() += v;
            }
        }
        m
    };
    let members: Vec<Vec<usize>> = classes.into_values().collect();
    let (_, atom_vecs) = dense(members.iter().map(|m| sum_maps(m, |c| &c.atoms)));
    let (_, comp_vecs) = dense(members.iter().map(|m| sum_maps(m, |c| &c.compounds)));

    if cfg.target_compound_div > 0.0 {
        let normalized: Vec<Distribution> = members
            .iter()
            .map(|m| Distribution::from_counts(&sum_maps(m, |c| &c.compounds)))
            .collect();
        if normalized.windows(2).all(|w| w[0] == w[1]) {
            return Err(SplitError::Infeasible(
                "every record has the same compound distribution, so no split can separate them".into(),
            ));
        }
    }

    let units: Vec<Unit> = members
        .into_iter()
        .zip(atom_vecs.into_iter().zip(comp_vecs))
        .map(|(members, (atoms, compounds))| Unit { members, atoms, compounds })
        .collect();
    let n = records.len() as f64;
    let lo = ((cfg.test_fraction - cfg.balance_tolerance).max(0.0) * n).ceil().max(1.0) as usize;
    let hi = ((cfg.test_fraction + cfg.balance_tolerance).min(1.0) * n).floor().min(n - 1.0) as usize;
    let search = Search { units: &units, cfg, lo, hi };

    let mut best: Option<(Vec<bool>, Score)> = None;
    let mut steps = 0;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = stream_rng(cfg.seed, Stream::Split, restart as u64);
        let Some(start) = search.random_start(&mut rng) else { continue };
        let (state, score) = search.climb(start, &mut steps);
        if best.as_ref().is_none_or(|(_, b)| score.better_than(b, cfg.max_atom_div)) {
            best = Some((state, score));
        }
    }
    let Some((state, score)) = best.filter(|(_, s)| s.feasible(cfg.max_atom_div)) else {
        return Err(SplitError::Infeasible(format!(
            "no balanced split of the {} statement classes keeps atom divergence <= {}",
            units.len(),
            cfg.max_atom_div
        )));
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (u, &t) in units.iter().zip(&state) {
        let side = if t { &mut test } else { &mut train };
        side.extend(u.members.iter().copied());
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitResult {
        train: train.into_iter().map(|i| records[i].id.clone()).collect(),
        test: test.into_iter().map(|i| records[i].id.clone()).collect(),
        atom_divergence: score.atom,
        compound_divergence: score.compound,
        target_reached: score.compound >= cfg.target_compound_div,
        steps,
    })
}

/// Divergences of a given split, recomputed from scratch.
pub fn split_divergences(
    train: &[DatasetRecord],
    test: &[DatasetRecord],
    statements: &BTreeMap<String, Statement>,
    cfg: &SplitConfig,
) -> Result<(f64, f64), SplitError> {
    let (atr, ctr) = extract_distributions(train, statements, &cfg.compounds)?;
    let (ate, cte) = extract_distributions(test, statements, &cfg.compounds)?;
    Ok((
        chernoff_divergence(&atr, &ate, cfg.alpha_atoms)?,
        chernoff_divergence(&ctr, &cte, cfg.alpha_compounds)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::model::{Color, Figure, Shape};

    fn dist(items: &[(&str, f64)]) -> Distribution {
        Distribution(items.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn chernoff_examples() {
        let p = dist(&[("a", 0.3), ("b", 0.7)]);
        assert!(chernoff_divergence(&p, &p, 0.5).unwrap().abs() < 1e-12);
        let q = dist(&[("c", 1.0)]);
        assert_eq!(chernoff_divergence(&p, &q, 0.5).unwrap(), 1.0);
        let half = dist(&[("a", 0.5), ("b", 0.5)]);
        let one = dist(&[("a", 1.0)]);
        let d = chernoff_divergence(&half, &one, 0.5).unwrap();
        assert!((d - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(chernoff_divergence(&p, &p, 1.0), Err(SplitError::InvalidAlpha(1.0)));
        assert_eq!(chernoff_divergence(&p, &p, 0.0), Err(SplitError::InvalidAlpha(0.0)));
    }

    fn tree(text: &str) -> CanonNode {
        canonical_tree(Statement::parse(text).unwrap().ast())
    }

    #[test]
    fn commutative_children_collide() {
        let a = "COUNT(objects WHERE color = red) >= 1";
        let b = "COUNT(objects WHERE shape = circle) >= 1";
        assert_eq!(tree(&format!("{a} AND {b}")).key, tree(&format!("{b} AND {a}")).key);
        assert_eq!(tree(&format!("({a} AND {b}) AND {a}")).key, tree(&format!("{a} AND ({a} AND {b})")).key);
        assert_ne!(tree(&format!("{a} AND {b}")).key, tree(&format!("{a} OR {b}")).key);
    }

    #[test]
    fn bound_variables_are_renamed() {
        let x = tree("EXISTS a, b DISTINCT IN objects : SAME_COLOR(a, b) AND a.shape = circle");
        let y = tree("EXISTS p, q DISTINCT IN objects : q.shape = circle AND SAME_COLOR(q, p)");
        assert_ne!(x.key, y.key);
        let z = tree("EXISTS p, q DISTINCT IN objects : p.shape = circle AND SAME_COLOR(q, p)");
        assert_eq!(x.key, z.key);
    }

    #[test]
    fn count_comparison_orientation_is_canonical() {
        let a = tree("COUNT(objects WHERE color = red) > COUNT(objects WHERE color = blue)");
        let b = tree("COUNT(objects WHERE color = blue) < COUNT(objects WHERE color = red)");
        assert_eq!(a.key, b.key);
    }

    fn record(stmt: &str, i: usize, objects: Vec<ObjectSpec>) -> DatasetRecord {
        DatasetRecord::new(stmt, Label::True, i, 0, &Figure::new(objects))
    }

    #[test]
    fn a_and_b_compounds_with_leaves() {
        let a = "COUNT(objects WHERE color = red) >= 1";
        let b = "COUNT(objects WHERE shape = circle) >= 1";
        let mut statements = BTreeMap::new();
        statements.insert("s".to_string(), Statement::parse(&format!("{a} AND {b}")).unwrap());
        let records = vec![record("s", 0, vec![])];
        let opts = CompoundOptions { depth: 2, include_leaves: true, ..Default::default() };
        let (atoms, comp) = extract_distributions(&records, &statements, &opts).unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(comp.len(), 3);
        assert!(comp.0.values().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        let (_, inner) = extract_distributions(&records, &statements, &CompoundOptions::default()).unwrap();
        assert_eq!(inner.len(), 1);
    }

    #[test]
    fn unknown_statement() {
        let records = vec![record("nope", 0, vec![])];
        let err = extract_distributions(&records, &BTreeMap::new(), &CompoundOptions::default()).unwrap_err();
        assert_eq!(err, SplitError::UnknownStatementId("nope".into()));
    }

    fn objects(k: usize) -> Vec<ObjectSpec> {
        let shapes = Shape::ALL;
        let colors = Color::ALL;
        (0..3).map(|j| ObjectSpec::new(shapes[(k + j) % 3], colors[(k + 2 * j) % 3], 0.1, 0.2 + 0.3 * j as f64, 0.5)).collect()
    }

    #[test]
    fn single_statement_is_infeasible() {
        let mut statements = BTreeMap::new();
        statements.insert("s".to_string(), Statement::parse("COUNT(objects) = 3 AND COUNT(objects) >= 1").unwrap());
        let records: Vec<_> = (0..20).map(|i| record("s", i, objects(i))).collect();
        let err = design_split(&records, &statements, &SplitConfig { target_compound_div: 0.5, ..Default::default() });
        assert!(matches!(err, Err(SplitError::Infeasible(_))));
    }

    #[test]
    fn recomposed_atoms_split_perfectly() {
        let a = "COUNT(objects WHERE color = red) >= 1";
        let b = "COUNT(objects WHERE shape = circle) >= 1";
        let c = "COUNT(objects) <= 5";
        let mut statements = BTreeMap::new();
        statements.insert("one".to_string(), Statement::parse(&format!("({a} AND {b}) OR {c}")).unwrap());
        statements.insert("two".to_string(), Statement::parse(&format!("({a} OR {b}) AND {c}")).unwrap());
        let mut records = Vec::new();
        for i in 0..10 {
            records.push(record("one", i, objects(i)));
            records.push(record("two", i, objects(i)));
        }
        let r = design_split(&records, &statements, &SplitConfig::default()).unwrap();
        assert!(r.atom_divergence.abs() < 1e-12, "{r:?}");
        assert!((r.compound_divergence - 1.0).abs() < 1e-12);
        assert!(r.target_reached);
        assert_eq!(r.train.len() + r.test.len(), 20);
        let test_ids: BTreeSet<&String> = r.test.iter().collect();
        let test: Vec<_> = records.iter().filter(|x| test_ids.contains(&x.id)).cloned().collect();
        let train: Vec<_> = records.iter().filter(|x| !test_ids.contains(&x.id)).cloned().collect();
        let (ad, cd) = split_divergences(&train, &test, &statements, &SplitConfig::default()).unwrap();
        assert!((ad - r.atom_divergence).abs() < 1e-9 && (cd - r.compound_divergence).abs() < 1e-9);
    }

    #[test]
    fn bad_parameters() {
        let records: Vec<_> = (0..3).map(|i| record("s", i, vec![])).collect();
        let statements = BTreeMap::new();
        assert!(matches!(
            design_split(&records, &statements, &SplitConfig::default()),
            Err(SplitError::TooFewRecords { .. })
        ));
        let cfg = SplitConfig { max_atom_div: 1.5, ..Default::default() };
        assert!(matches!(design_split(&records, &statements, &cfg), Err(SplitError::InvalidTarget { .. })));
    }
}
