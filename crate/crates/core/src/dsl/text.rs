//! Template-based English rendering of statements.

use super::ast::*;
use crate::model::Shape;

fn shape_noun(shape: Option<Shape>, plural: bool) -> &'static str {
    match (shape, plural) {
        (None, false) => "object",
        (None, true) => "objects",
        (Some(Shape::Circle), false) => "circle",
        (Some(Shape::Circle), true) => "circles",
        (Some(Shape::Square), false) => "square",
        (Some(Shape::Square), true) => "squares",
        (Some(Shape::Triangle), false) => "triangle",
        (Some(Shape::Triangle), true) => "triangles",
    }
}

fn article(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// Positive attribute tests merged into one adjective/noun phrase, if the
/// tests are a plain conjunction without conflicts.
#[derive(Default)]
struct Descriptor {
    size: Option<SizeClass>,
    color: Option<crate::model::Color>,
    shape: Option<Shape>,
}

impl Descriptor {
    fn add(&mut self, t: &AttrTest) -> bool {
        if t.negated {
            return false;
        }
        match t.value {
            AttrValue::Size(s) => merge(&mut self.size, s),
            AttrValue::Color(c) => merge(&mut self.color, c),
            AttrValue::Shape(s) => merge(&mut self.shape, s),
        }
    }

    fn add_cond(&mut self, c: &Cond) -> bool {
        match c {
            Cond::Test(t) => self.add(t),
            Cond::And(cs) => cs.iter().all(|c| self.add_cond(c)),
            _ => false,
        }
    }

    fn phrase(&self, plural: bool) -> String {
        let mut words = Vec::new();
        if let Some(s) = self.size {
            words.push(s.name());
        }
        if let Some(c) = self.color {
            words.push(c.name());
        }
        words.push(shape_noun(self.shape, plural));
        words.join(" ")
    }
}

fn merge<T: PartialEq>(slot: &mut Option<T>, v: T) -> bool {
    match slot {
        Some(old) => *old == v,
        None => {
            *slot = Some(v);
            true
        }
    }
}

fn test_text(t: &AttrTest, plural: bool) -> String {
    let verb = match (plural, t.negated) {
        (true, false) => "are",
        (true, true) => "are not",
        (false, false) => "is",
        (false, true) => "is not",
    };
    match t.value {
        AttrValue::Shape(s) if plural => format!("{verb} {}", shape_noun(Some(s), true)),
        AttrValue::Shape(s) => format!("{verb} {} {}", article(s.name()), s.name()),
        v => format!("{verb} {}", v.name()),
    }
}

fn cond_text(c: &Cond, plural: bool) -> String {
    match c {
        Cond::Test(t) => test_text(t, plural),
        Cond::And(cs) => cs.iter().map(|c| cond_text(c, plural)).collect::<Vec<_>>().join(" and "),
        Cond::Or(cs) => cs.iter().map(|c| cond_text(c, plural)).collect::<Vec<_>>().join(" or "),
        Cond::Not(c) => format!("do not satisfy ({})", cond_text(c, plural)),
    }
}

/// Noun phrase for a selector, e.g. "red triangles" or "object that is red or blue".
pub fn selector_phrase(sel: &Selector, plural: bool) -> String {
    let mut d = Descriptor::default();
    match &sel.cond {
        None => d.phrase(plural),
        Some(c) if d.add_cond(c) => d.phrase(plural),
        Some(c) => format!("{} that {}", shape_noun(None, plural), cond_text(c, plural)),
    }
}

fn count_phrase(sel: &Selector, n: u64) -> String {
    format!("{n} {}", selector_phrase(sel, n != 1))
}

fn compare_text(count: &Selector, op: CmpOp, rhs: &Operand) -> String {
    match rhs {
        Operand::Int(0) if op == CmpOp::Eq => {
            format!("the figure contains no {}", selector_phrase(count, true))
        }
        Operand::Int(n) => {
            let n = *n;
            match op {
                CmpOp::Eq => format!("the figure contains exactly {}", count_phrase(count, n)),
                CmpOp::Ne => format!("the figure does not contain exactly {}", count_phrase(count, n)),
                CmpOp::Gt => format!("the figure contains more than {}", count_phrase(count, n)),
                CmpOp::Ge => format!("the figure contains at least {}", count_phrase(count, n)),
                CmpOp::Lt => format!("the figure contains fewer than {}", count_phrase(count, n)),
                CmpOp::Le => format!("the figure contains at most {}", count_phrase(count, n)),
            }
        }
        Operand::Count(other) => {
            let (a, b) = (selector_phrase(count, true), selector_phrase(other, true));
            match op {
                CmpOp::Eq => format!("the figure contains as many {a} as {b}"),
                CmpOp::Ne => format!("the figure contains a different number of {a} than {b}"),
                CmpOp::Gt => format!("the figure contains more {a} than {b}"),
                CmpOp::Ge => format!("the figure contains at least as many {a} as {b}"),
                CmpOp::Lt => format!("the figure contains fewer {a} than {b}"),
                CmpOp::Le => format!("the figure contains at most as many {a} as {b}"),
            }
        }
    }
}

fn relation_text(rel: Relation, args: &[String]) -> String {
    let a = &args[0];
    match rel {
        Relation::LeftOf => format!("{a} is left of {}", args[1]),
        Relation::RightOf => format!("{a} is right of {}", args[1]),
        Relation::Above => format!("{a} is above {}", args[1]),
        Relation::Below => format!("{a} is below {}", args[1]),
        Relation::Between => format!("{a} is between {} and {}", args[1], args[2]),
        Relation::Touches => format!("{a} touches {}", args[1]),
        Relation::SameShape => format!("{a} and {} have the same shape", args[1]),
        Relation::SameColor => format!("{a} and {} have the same color", args[1]),
        Relation::Smaller => format!("{a} is smaller than {}", args[1]),
        Relation::Bigger => format!("{a} is bigger than {}", args[1]),
        Relation::LeftSide => format!("{a} is on the left side"),
        Relation::RightSide => format!("{a} is on the right side"),
        Relation::UpperSide => format!("{a} is in the upper half"),
        Relation::LowerSide => format!("{a} is in the lower half"),
    }
}

fn gestalt_text(g: &Gestalt) -> String {
    let np = selector_phrase(g.selector(), true);
    match g {
        Gestalt::Circular(_) => format!("the {np} are arranged in a circle"),
        Gestalt::Symmetric(_) => format!("the {np} are mirror-symmetric"),
        Gestalt::Clustered(_, 1) => format!("the {np} form a single group"),
        Gestalt::Clustered(_, k) => format!("the {np} form exactly {k} groups"),
        Gestalt::Flower(_) => format!("the {np} form a flower"),
    }
}

/// The single-variable existential whose body only restates attributes,
/// folded into one descriptor: `EXISTS o IN objects: o.color = red`.
fn folded_exists(q: &Quant) -> Option<Descriptor> {
    if q.kind != QuantKind::Exists || q.vars.len() != 1 {
        return None;
    }
    let mut d = Descriptor::default();
    if let Some(c) = &q.selector.cond {
        if !d.add_cond(c) {
            return None;
        }
    }
    fn fold_body(e: &Expr, var: &str, d: &mut Descriptor) -> bool {
        match e {
            Expr::Attr { var: v, test } => v == var && d.add(test),
            Expr::And(items) => items.iter().all(|i| fold_body(i, var, d)),
            _ => false,
        }
    }
    fold_body(&q.body, &q.vars[0], &mut d).then_some(d)
}

fn quant_text(q: &Quant) -> String {
    if let Some(d) = folded_exists(q) {
        let np = d.phrase(false);
        return format!("there is {} {np}", article(&np));
    }
    let vars = q.vars.join(", ");
    let body = clause(&q.body, None);
    let distinct = if q.distinct && q.vars.len() > 1 { ", all different," } else { "" };
    match (q.kind, q.vars.len()) {
        (QuantKind::Exists, 1) => {
            let np = selector_phrase(&q.selector, false);
            format!("there is {} {np} {vars} such that {body}", article(&np))
        }
        (QuantKind::Exists, _) => format!(
            "there are {}{distinct} {vars} such that {body}",
            selector_phrase(&q.selector, true)
        ),
        (QuantKind::Forall, 1) => {
            format!("for every {} {vars}, {body}", selector_phrase(&q.selector, false))
        }
        (QuantKind::Forall, _) => format!(
            "for all {}{distinct} {vars}, {body}",
            selector_phrase(&q.selector, true)
        ),
    }
}

fn clause(e: &Expr, parent: Option<&Expr>) -> String {
    let text = match e {
        Expr::And(items) => items.iter().map(|i| clause(i, Some(e))).collect::<Vec<_>>().join(" and "),
        Expr::Or(items) => items.iter().map(|i| clause(i, Some(e))).collect::<Vec<_>>().join(" or "),
        Expr::Not(inner) => match inner.as_ref() {
            Expr::Quant(q) => match folded_exists(q) {
                Some(d) => format!("there is no {}", d.phrase(false)),
                None => format!("it is not the case that {}", quant_text(q)),
            },
            Expr::Attr { var, test } => {
                let flipped = AttrTest { value: test.value, negated: !test.negated };
                format!("{var} {}", test_text(&flipped, false))
            }
            other => format!("it is not the case that {}", clause(other, Some(e))),
        },
        Expr::Compare { count, op, rhs } => compare_text(count, *op, rhs),
        Expr::Quant(q) => quant_text(q),
        Expr::Gestalt(g) => gestalt_text(g),
        Expr::Attr { var, test } => format!("{var} {}", test_text(test, false)),
        Expr::Relation { rel, args } => relation_text(*rel, args),
    };
    let mixed = matches!(
        (parent, e),
        (Some(Expr::And(_)), Expr::Or(_)) | (Some(Expr::Or(_)), Expr::And(_))
    );
    if mixed {
        format!("({text})")
    } else {
        text
    }
}

pub fn render(e: &Expr) -> String {
    clause(e, None)
}
