//! Statement evaluation.
//!
//! Quantifiers bind their variables one at a time. After each binding the
//! body is evaluated in three-valued (Kleene) logic with the remaining
//! variables unbound; whenever that partial result already decides the
//! quantifier the rest of the binding tree is skipped.

use serde::{Deserialize, Serialize};

use super::ast::*;
use crate::gestalt::{self, GestaltConfig};
use crate::model::{object_distance, ObjectSpec, UniverseConfig};

/// Slack on the contact distance for `TOUCHES`.
pub const TOUCH_TOL: f64 = 0.01;

/// Everything besides the figure that a statement's truth value depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalContext {
    pub small_big_threshold: f64,
    pub gestalt: GestaltConfig,
}

impl Default for EvalContext {
    fn default() -> Self {
        Self::for_universe(&UniverseConfig::default())
    }
}

impl EvalContext {
    pub fn for_universe(u: &UniverseConfig) -> Self {
        Self { small_big_threshold: u.small_big_threshold, gestalt: GestaltConfig::default() }
    }
}

/// Truth value of a spatial or comparison relation on bound objects.
pub fn relation_holds(rel: Relation, args: &[&ObjectSpec]) -> bool {
    let a = args[0];
    match rel {
        Relation::LeftOf => a.x < args[1].x,
        Relation::RightOf => a.x > args[1].x,
        Relation::Above => a.y < args[1].y,
        Relation::Below => a.y > args[1].y,
        Relation::Between => {
            let (b, c) = (args[1], args[2]);
            b.x.min(c.x) <= a.x && a.x <= b.x.max(c.x) && b.y.min(c.y) <= a.y && a.y <= b.y.max(c.y)
        }
        Relation::Touches => {
            let b = args[1];
            (object_distance(a, b) - (a.size + b.size) / 2.0).abs() <= TOUCH_TOL
        }
        Relation::SameShape => a.shape == args[1].shape,
        Relation::SameColor => a.color == args[1].color,
        Relation::Smaller => a.size < args[1].size,
        Relation::Bigger => a.size > args[1].size,
        Relation::LeftSide => a.x < 0.5,
        Relation::RightSide => a.x > 0.5,
        Relation::UpperSide => a.y < 0.5,
        Relation::LowerSide => a.y > 0.5,
    }
}

pub fn gestalt_holds(g: &Gestalt, objects: &[ObjectSpec], ctx: &EvalContext) -> bool {
    let picked: Vec<ObjectSpec> = g
        .selector()
        .select(objects, ctx.small_big_threshold)
        .into_iter()
        .map(|i| objects[i])
        .collect();
    let cfg = &ctx.gestalt;
    match g {
        Gestalt::Circular(_) => picked.len() >= 3 && gestalt::is_circular_arrangement(&picked, cfg).accepted,
        Gestalt::Symmetric(_) => picked.len() >= 2 && gestalt::is_symmetric(&picked, cfg).symmetric,
        Gestalt::Clustered(_, k) => {
            !picked.is_empty() && gestalt::cluster_by_proximity(&picked, cfg).len() == *k as usize
        }
        Gestalt::Flower(_) => gestalt::is_flower(&picked, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    False,
    True,
    Unknown,
}

impl From<bool> for Tri {
    fn from(b: bool) -> Self {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

struct Env<'a> {
    objects: &'a [ObjectSpec],
    ctx: &'a EvalContext,
    bindings: Vec<(&'a str, Option<usize>)>,
}

impl<'a> Env<'a> {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.bindings.iter().rev().find(|(n, _)| *n == name).and_then(|(_, slot)| *slot)
    }

    fn eval(&mut self, e: &'a Expr) -> Tri {
        match e {
            Expr::And(items) => {
                let mut unknown = false;
                for item in items {
                    match self.eval(item) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => unknown = true,
                        Tri::True => {}
                    }
                }
                if unknown {
                    Tri::Unknown
                } else {
                    Tri::True
                }
            }
            Expr::Or(items) => {
                let mut unknown = false;
                for item in items {
                    match self.eval(item) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => unknown = true,
                        Tri::False => {}
                    }
                }
                if unknown {
                    Tri::Unknown
                } else {
                    Tri::False
                }
            }
            Expr::Not(inner) => match self.eval(inner) {
                Tri::True => Tri::False,
                Tri::False => Tri::True,
                Tri::Unknown => Tri::Unknown,
            },
            Expr::Compare { count, op, rhs } => {
                let thr = self.ctx.small_big_threshold;
                let lhs = self.objects.iter().filter(|o| count.matches(o, thr)).count() as u64;
                let rhs = match rhs {
                    Operand::Int(n) => *n,
                    Operand::Count(s) => self.objects.iter().filter(|o| s.matches(o, thr)).count() as u64,
                };
                op.apply(lhs, rhs).into()
            }
            Expr::Gestalt(g) => gestalt_holds(g, self.objects, self.ctx).into(),
            Expr::Attr { var, test } => match self.lookup(var) {
                Some(i) => test.matches(&self.objects[i], self.ctx.small_big_threshold).into(),
                None => Tri::Unknown,
            },
            Expr::Relation { rel, args } => {
                if self.objects.is_empty() {
                    return Tri::Unknown;
                }
                let mut bound = [&self.objects[0]; 3];
                for (slot, name) in bound.iter_mut().zip(args) {
                    match self.lookup(name) {
                        Some(i) => *slot = &self.objects[i],
                        None => return Tri::Unknown,
                    }
                }
                relation_holds(*rel, &bound[..args.len()]).into()
            }
            Expr::Quant(q) => self.quantifier(q),
        }
    }

    fn quantifier(&mut self, q: &'a Quant) -> Tri {
        let candidates = q.selector.select(self.objects, self.ctx.small_big_threshold);
        let base = self.bindings.len();
        self.bindings.extend(q.vars.iter().map(|v| (v.as_str(), None)));
        let r = self.search(q, &candidates, base, 0);
        self.bindings.truncate(base);
        r
    }

    fn search(&mut self, q: &'a Quant, candidates: &[usize], base: usize, k: usize) -> Tri {
        let exists = q.kind == QuantKind::Exists;
        let remaining = q.vars.len() - k;
        let completable = remaining == 0
            || if q.distinct { candidates.len() >= k + remaining } else { !candidates.is_empty() };
        if !completable {
            // No full assignment below this node: nothing to witness, nothing to refute.
            return (!exists).into();
        }
        match self.eval(&q.body) {
            Tri::Unknown => {}
            decided => return decided,
        }
        if remaining == 0 {
            // Still unknown with all own variables bound: depends on an
            // enclosing quantifier that has not bound its variable yet.
            return Tri::Unknown;
        }
        let mut unknown = false;
        for &c in candidates {
            if q.distinct && self.bindings[base..base + k].iter().any(|&(_, b)| b == Some(c)) {
                continue;
            }
            self.bindings[base + k].1 = Some(c);
            let r = self.search(q, candidates, base, k + 1);
            self.bindings[base + k].1 = None;
            match (exists, r) {
                (true, Tri::True) => return Tri::True,
                (false, Tri::False) => return Tri::False,
                (_, Tri::Unknown) => unknown = true,
                _ => {}
            }
        }
        if unknown {
            Tri::Unknown
        } else {
            (!exists).into()
        }
    }
}

/// Evaluates a closed expression. Free variables (only possible for
/// expressions that bypassed scope checking) make the affected atoms false.
pub fn evaluate_expr(e: &Expr, objects: &[ObjectSpec], ctx: &EvalContext) -> bool {
    let mut env = Env { objects, ctx, bindings: Vec::new() };
    env.eval(e) == Tri::True
}
