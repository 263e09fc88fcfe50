//! Test-only oracles, independent of the library's evaluator and geometry.
#![allow(dead_code)]

use std::collections::HashMap;

use kandinsky::dsl::{
    AttrTest, AttrValue, CmpOp, Cond, Expr, Operand, Quant, QuantKind, Relation, Selector, SizeClass,
};
use kandinsky::model::{Color, Figure, ObjectSpec, Shape};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------------------
// Brute-force evaluator: enumerates every binding tuple, two-valued, no pruning.

fn attr_ok(t: &AttrTest, o: &ObjectSpec, threshold: f64) -> bool {
    let hit = match t.value {
        AttrValue::Shape(s) => o.shape == s,
        AttrValue::Color(c) => o.color == c,
        AttrValue::Size(SizeClass::Small) => o.size < threshold,
        AttrValue::Size(SizeClass::Big) => o.size >= threshold,
    };
    if t.negated {
        !hit
    } else {
        hit
    }
}

fn cond_ok(c: &Cond, o: &ObjectSpec, threshold: f64) -> bool {
    match c {
        Cond::Test(t) => attr_ok(t, o, threshold),
        Cond::And(cs) => cs.iter().all(|c| cond_ok(c, o, threshold)),
        Cond::Or(cs) => cs.iter().any(|c| cond_ok(c, o, threshold)),
        Cond::Not(c) => !cond_ok(c, o, threshold),
    }
}

fn selected(s: &Selector, objects: &[ObjectSpec], threshold: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, o) in objects.iter().enumerate() {
        if s.cond.as_ref().is_none_or(|c| cond_ok(c, o, threshold)) {
            out.push(i);
        }
    }
    out
}

const ORACLE_TOUCH_TOL: f64 = 0.01;

fn relation_ok(rel: Relation, a: &[&ObjectSpec]) -> bool {
    match rel {
        Relation::LeftOf => a[0].x < a[1].x,
        Relation::RightOf => a[1].x < a[0].x,
        Relation::Above => a[0].y < a[1].y,
        Relation::Below => a[1].y < a[0].y,
        Relation::Between => {
            let inside = |v: f64, p: f64, q: f64| (p <= v && v <= q) || (q <= v && v <= p);
            inside(a[0].x, a[1].x, a[2].x) && inside(a[0].y, a[1].y, a[2].y)
        }
        Relation::Touches => {
            let d = ((a[0].x - a[1].x).powi(2) + (a[0].y - a[1].y).powi(2)).sqrt();
            (d - 0.5 * (a[0].size + a[1].size)).abs() <= ORACLE_TOUCH_TOL
        }
        Relation::SameShape => a[0].shape == a[1].shape,
        Relation::SameColor => a[0].color == a[1].color,
        Relation::Smaller => a[0].size < a[1].size,
        Relation::Bigger => a[1].size < a[0].size,
        Relation::LeftSide => a[0].x < 0.5,
        Relation::RightSide => a[0].x > 0.5,
        Relation::UpperSide => a[0].y < 0.5,
        Relation::LowerSide => a[0].y > 0.5,
    }
}

/// All tuples of length `k` over `pool`, optionally without repeats.
pub fn tuples(pool: &[usize], k: usize, distinct: bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for &c in pool {
                if distinct && t.contains(&c) {
                    continue;
                }
                let mut t2 = t.clone();
                t2.push(c);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn eval_in(e: &Expr, objects: &[ObjectSpec], threshold: f64, env: &mut HashMap<String, usize>) -> bool {
    match e {
        Expr::And(es) => es.iter().map(|x| eval_in(x, objects, threshold, env)).fold(true, |a, b| a & b),
        Expr::Or(es) => es.iter().map(|x| eval_in(x, objects, threshold, env)).fold(false, |a, b| a | b),
        Expr::Not(x) => !eval_in(x, objects, threshold, env),
        Expr::Compare { count, op, rhs } => {
            let l = selected(count, objects, threshold).len() as u64;
            let r = match rhs {
                Operand::Int(n) => *n,
                Operand::Count(s) => selected(s, objects, threshold).len() as u64,
            };
            match op {
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
            }
        }
        Expr::Attr { var, test } => attr_ok(test, &objects[env[var]], threshold),
        Expr::Relation { rel, args } => {
            let bound: Vec<&ObjectSpec> = args.iter().map(|a| &objects[env[a]]).collect();
            relation_ok(*rel, &bound)
        }
        Expr::Quant(q) => {
            let pool = selected(&q.selector, objects, threshold);
            let mut results = Vec::new();
            for t in tuples(&pool, q.vars.len(), q.distinct) {
                let saved: Vec<Option<usize>> = q.vars.iter().map(|v| env.get(v).copied()).collect();
                for (v, &i) in q.vars.iter().zip(&t) {
                    env.insert(v.clone(), i);
                }
                results.push(eval_in(&q.body, objects, threshold, env));
                for (v, s) in q.vars.iter().zip(saved) {
                    match s {
                        Some(i) => env.insert(v.clone(), i),
                        None => env.remove(v),
                    };
                }
            }
            match q.kind {
                QuantKind::Exists => results.iter().any(|&b| b),
                QuantKind::Forall => results.iter().all(|&b| b),
            }
        }
        Expr::Gestalt(_) => panic!("the brute-force oracle has no gestalt detectors"),
    }
}

pub fn brute_force(e: &Expr, f: &Figure, threshold: f64) -> bool {
    eval_in(e, &f.objects, threshold, &mut HashMap::new())
}

// ---------------------------------------------------------------------------
// Random statements (no gestalt atoms).

pub struct StatementGen {
    next_var: usize,
    /// Cap on variables bound along any path, keeps brute force cheap.
    pub max_vars: usize,
}

impl Default for StatementGen {
    fn default() -> Self {
        Self { next_var: 0, max_vars: 4 }
    }
}

pub fn random_attr_value<R: Rng>(rng: &mut R) -> AttrValue {
    match rng.gen_range(0..3) {
        0 => AttrValue::Shape(*Shape::ALL.choose(rng).unwrap()),
        1 => AttrValue::Color(*Color::ALL.choose(rng).unwrap()),
        _ => AttrValue::Size(if rng.gen() { SizeClass::Small } else { SizeClass::Big }),
    }
}

pub fn random_test<R: Rng>(rng: &mut R) -> AttrTest {
    AttrTest { value: random_attr_value(rng), negated: rng.gen_bool(0.25) }
}

pub fn random_cond<R: Rng>(rng: &mut R, depth: usize) -> Cond {
    if depth == 0 || rng.gen_bool(0.6) {
        return Cond::Test(random_test(rng));
    }
    match rng.gen_range(0..3) {
        0 => Cond::And(vec![random_cond(rng, depth - 1), random_cond(rng, depth - 1)]),
        1 => Cond::Or(vec![random_cond(rng, depth - 1), random_cond(rng, depth - 1)]),
        _ => Cond::Not(Box::new(random_cond(rng, depth - 1))),
    }
}

pub fn random_selector<R: Rng>(rng: &mut R) -> Selector {
    if rng.gen_bool(0.5) {
        Selector::all()
    } else {
        Selector { cond: Some(random_cond(rng, 1)) }
    }
}

const CMP: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];

impl StatementGen {
    pub fn statement<R: Rng>(&mut self, rng: &mut R, depth: usize) -> Expr {
        self.next_var = 0;
        if rng.gen_bool(0.8) {
            self.quant(rng, depth, &[])
        } else {
            self.expr(rng, depth, &[])
        }
    }

    fn compare<R: Rng>(&self, rng: &mut R) -> Expr {
        let rhs = if rng.gen_bool(0.3) {
            Operand::Count(random_selector(rng))
        } else {
            Operand::Int(rng.gen_range(0..5))
        };
        Expr::Compare { count: random_selector(rng), op: *CMP.choose(rng).unwrap(), rhs }
    }

    fn atom<R: Rng>(&self, rng: &mut R, scope: &[String]) -> Expr {
        if scope.is_empty() || rng.gen_bool(0.15) {
            return self.compare(rng);
        }
        if rng.gen_bool(0.4) {
            Expr::Attr { var: scope.choose(rng).unwrap().clone(), test: random_test(rng) }
        } else {
            let rel = *Relation::ALL.choose(rng).unwrap();
            let args = (0..rel.arity()).map(|_| scope.choose(rng).unwrap().clone()).collect();
            Expr::Relation { rel, args }
        }
    }

    fn quant<R: Rng>(&mut self, rng: &mut R, depth: usize, scope: &[String]) -> Expr {
        let room = self.max_vars.saturating_sub(scope.len());
        if room == 0 {
            return self.atom(rng, scope);
        }
        let k = rng.gen_range(1..=room.min(2));
        let vars: Vec<String> = (0..k)
            .map(|_| {
                self.next_var += 1;
                format!("v{}", self.next_var)
            })
            .collect();
        let mut inner = scope.to_vec();
        inner.extend(vars.iter().cloned());
        let body = self.expr(rng, depth.saturating_sub(1), &inner);
        Expr::Quant(Box::new(Quant {
            kind: if rng.gen() { QuantKind::Exists } else { QuantKind::Forall },
            vars,
            distinct: k > 1 && rng.gen(),
            selector: random_selector(rng),
            body,
        }))
    }

    /// A formula that may use the variables in `scope` freely.
    pub fn expr<R: Rng>(&mut self, rng: &mut R, depth: usize, scope: &[String]) -> Expr {
        if depth == 0 {
            return self.atom(rng, scope);
        }
        match rng.gen_range(0..6) {
            0 => Expr::And(vec![self.expr(rng, depth - 1, scope), self.expr(rng, depth - 1, scope)]),
            1 => Expr::Or(vec![self.expr(rng, depth - 1, scope), self.expr(rng, depth - 1, scope)]),
            2 => Expr::not(self.expr(rng, depth - 1, scope)),
            3 => self.quant(rng, depth, scope),
            _ => self.atom(rng, scope),
        }
    }
}

// ---------------------------------------------------------------------------
// Geometry oracles.

/// Bounding discs inside the unit square and pairwise clear by `min_gap`.
pub fn geometry_ok(f: &Figure, min_gap: f64, tol: f64) -> bool {
    let objs = &f.objects;
    for o in objs {
        let r = o.size / 2.0;
        if o.x - r < -tol || o.x + r > 1.0 + tol || o.y - r < -tol || o.y + r > 1.0 + tol {
            return false;
        }
    }
    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            let (a, b) = (&objs[i], &objs[j]);
            let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            if d + tol < (a.size + b.size) / 2.0 + min_gap {
                return false;
            }
        }
    }
    true
}

/// Point-in-shape for a big shape inscribed in a disc of diameter `size`
/// centered at `c` (y down; squares axis-aligned; triangles apex up).
pub fn inside_inscribed(shape: Shape, c: [f64; 2], size: f64, p: [f64; 2]) -> bool {
    let r = size / 2.0;
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    match shape {
        Shape::Circle => dx * dx + dy * dy <= r * r,
        Shape::Square => {
            let h = r / 2f64.sqrt();
            dx.abs() <= h && dy.abs() <= h
        }
        Shape::Triangle => {
            // Barycentric test against apex (0,-r) and base corners (±r√3/2, r/2).
            let w = r * 3f64.sqrt() / 2.0;
            let v = [[0.0, -r], [w, r / 2.0], [-w, r / 2.0]];
            let det = (v[1][1] - v[2][1]) * (v[0][0] - v[2][0]) + (v[2][0] - v[1][0]) * (v[0][1] - v[2][1]);
            let l1 = ((v[1][1] - v[2][1]) * (dx - v[2][0]) + (v[2][0] - v[1][0]) * (dy - v[2][1])) / det;
            let l2 = ((v[2][1] - v[0][1]) * (dx - v[2][0]) + (v[0][0] - v[2][0]) * (dy - v[2][1])) / det;
            let l3 = 1.0 - l1 - l2;
            l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0
        }
    }
}

/// Distance from `p` to the nearest edge of the inscribed shape; used to skip
/// points that sit within rounding noise of the boundary.
pub fn boundary_gap(shape: Shape, c: [f64; 2], size: f64, p: [f64; 2]) -> f64 {
    let r = size / 2.0;
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    match shape {
        Shape::Circle => ((dx * dx + dy * dy).sqrt() - r).abs(),
        Shape::Square => {
            let h = r / 2f64.sqrt();
            let (ox, oy) = (dx.abs() - h, dy.abs() - h);
            if ox <= 0.0 && oy <= 0.0 {
                (-ox).min(-oy)
            } else {
                ox.max(0.0).hypot(oy.max(0.0))
            }
        }
        Shape::Triangle => {
            let w = r * 3f64.sqrt() / 2.0;
            let v = [[0.0, -r], [w, r / 2.0], [-w, r / 2.0]];
            let mut best = f64::INFINITY;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let t = (((dx - a[0]) * ex + (dy - a[1]) * ey) / (ex * ex + ey * ey)).clamp(0.0, 1.0);
                let (qx, qy) = (a[0] + t * ex, a[1] + t * ey);
                best = best.min(((dx - qx).powi(2) + (dy - qy).powi(2)).sqrt());
            }
            best
        }
    }
}

/// Number of atomic edits (recolor, reshape, resize, move, add, remove)
/// separating two figures, or `None` when more than one is needed.
pub fn single_edit_distance(a: &Figure, b: &Figure) -> Option<usize> {
    let (x, y) = (&a.objects, &b.objects);
    if x.len() == y.len() {
        let mut edits = 0;
        for (p, q) in x.iter().zip(y) {
            edits += usize::from(p.shape != q.shape);
            edits += usize::from(p.color != q.color);
            edits += usize::from(p.size != q.size);
            edits += usize::from(p.x != q.x || p.y != q.y);
        }
        return (edits <= 1).then_some(edits);
    }
    let (long, short) = if x.len() > y.len() { (x, y) } else { (y, x) };
    if long.len() != short.len() + 1 {
        return None;
    }
    (0..long.len())
        .any(|skip| {
            long.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, o)| o).eq(short.iter())
        })
        .then_some(1)
}
