use std::fmt;

use crate::model::{Color, ObjectSpec, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Shape,
    Color,
    Size,
}

impl Attribute {
    pub fn name(self) -> &'static str {
        match self {
            Attribute::Shape => "shape",
            Attribute::Color => "color",
            Attribute::Size => "size",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeClass {
    Small,
    Big,
}

impl SizeClass {
    pub fn name(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Big => "big",
        }
    }

    /// `small` is strictly below the threshold, `big` is everything else.
    pub fn holds(self, size: f64, threshold: f64) -> bool {
        match self {
            SizeClass::Small => size < threshold,
            SizeClass::Big => size >= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrValue {
    Shape(Shape),
    Color(Color),
    Size(SizeClass),
}

impl AttrValue {
    pub fn attribute(self) -> Attribute {
        match self {
            AttrValue::Shape(_) => Attribute::Shape,
            AttrValue::Color(_) => Attribute::Color,
            AttrValue::Size(_) => Attribute::Size,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AttrValue::Shape(s) => s.name(),
            AttrValue::Color(c) => c.name(),
            AttrValue::Size(s) => s.name(),
        }
    }
}

/// `attr = value` or `attr != value`; the attribute is implied by the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttrTest {
    pub value: AttrValue,
    pub negated: bool,
}

impl AttrTest {
    pub fn eq(value: AttrValue) -> Self {
        Self { value, negated: false }
    }

    pub fn matches(&self, o: &ObjectSpec, small_big_threshold: f64) -> bool {
        let hit = match self.value {
            AttrValue::Shape(s) => o.shape == s,
            AttrValue::Color(c) => o.color == c,
            AttrValue::Size(class) => class.holds(o.size, small_big_threshold),
        };
        hit != self.negated
    }
}

/// Attribute condition on a single implicit object.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Test(AttrTest),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
}

impl Cond {
    pub fn matches(&self, o: &ObjectSpec, small_big_threshold: f64) -> bool {
        match self {
            Cond::Test(t) => t.matches(o, small_big_threshold),
            Cond::And(cs) => cs.iter().all(|c| c.matches(o, small_big_threshold)),
            Cond::Or(cs) => cs.iter().any(|c| c.matches(o, small_big_threshold)),
            Cond::Not(c) => !c.matches(o, small_big_threshold),
        }
    }

    pub fn for_each_test(&self, f: &mut impl FnMut(&AttrTest)) {
        match self {
            Cond::Test(t) => f(t),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| c.for_each_test(f)),
            Cond::Not(c) => c.for_each_test(f),
        }
    }
}

/// `objects` optionally narrowed by `WHERE <cond>`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selector {
    pub cond: Option<Cond>,
}

impl Selector {
    pub fn all() -> Self {
        Self { cond: None }
    }

    pub fn matches(&self, o: &ObjectSpec, small_big_threshold: f64) -> bool {
        self.cond.as_ref().is_none_or(|c| c.matches(o, small_big_threshold))
    }

    /// Indices of the selected objects, ascending.
    pub fn select(&self, objects: &[ObjectSpec], small_big_threshold: f64) -> Vec<usize> {
        (0..objects.len())
            .filter(|&i| self.matches(&objects[i], small_big_threshold))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn apply(self, a: u64, b: u64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator that gives the same truth value with operands swapped.
    pub fn flipped(self) -> Self {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Count(Selector),
    Int(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quant {
    pub kind: QuantKind,
    pub vars: Vec<String>,
    pub distinct: bool,
    pub selector: Selector,
    pub body: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    LeftOf,
    RightOf,
    Above,
    Below,
    Between,
    Touches,
    SameShape,
    SameColor,
    Smaller,
    Bigger,
    LeftSide,
    RightSide,
    UpperSide,
    LowerSide,
}

impl Relation {
    pub const ALL: [Relation; 14] = [
        Relation::LeftOf,
        Relation::RightOf,
        Relation::Above,
        Relation::Below,
        Relation::Between,
        Relation::Touches,
        Relation::SameShape,
        Relation::SameColor,
        Relation::Smaller,
        Relation::Bigger,
        Relation::LeftSide,
        Relation::RightSide,
        Relation::UpperSide,
        Relation::LowerSide,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Relation::LeftOf => "LEFT_OF",
            Relation::RightOf => "RIGHT_OF",
            Relation::Above => "ABOVE",
            Relation::Below => "BELOW",
            Relation::Between => "BETWEEN",
            Relation::Touches => "TOUCHES",
            Relation::SameShape => "SAME_SHAPE",
            Relation::SameColor => "SAME_COLOR",
            Relation::Smaller => "SMALLER",
            Relation::Bigger => "BIGGER",
            Relation::LeftSide => "LEFT_SIDE",
            Relation::RightSide => "RIGHT_SIDE",
            Relation::UpperSide => "UPPER_SIDE",
            Relation::LowerSide => "LOWER_SIDE",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.keyword().eq_ignore_ascii_case(kw))
    }

    pub fn arity(self) -> usize {
        match self {
            Relation::Between => 3,
            Relation::LeftSide | Relation::RightSide | Relation::UpperSide | Relation::LowerSide => 1,
            _ => 2,
        }
    }

    /// Whether swapping the two arguments preserves the truth value.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Relation::Touches | Relation::SameShape | Relation::SameColor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gestalt {
    Circular(Selector),
    Symmetric(Selector),
    Clustered(Selector, u32),
    Flower(Selector),
}

impl Gestalt {
    pub fn keyword(&self) -> &'static str {
        match self {
            Gestalt::Circular(_) => "CIRCULAR",
            Gestalt::Symmetric(_) => "SYMMETRIC",
            Gestalt::Clustered(..) => "CLUSTERED",
            Gestalt::Flower(_) => "FLOWER",
        }
    }

    pub fn selector(&self) -> &Selector {
        match self {
            Gestalt::Circular(s) | Gestalt::Symmetric(s) | Gestalt::Flower(s) => s,
            Gestalt::Clustered(s, _) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Compare { count: Selector, op: CmpOp, rhs: Operand },
    Quant(Box<Quant>),
    Gestalt(Gestalt),
    Attr { var: String, test: AttrTest },
    Relation { rel: Relation, args: Vec<String> },
}

impl Expr {
    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    /// Connective nodes (and quantifiers) have sub-formulas; everything else
    /// is an atomic formula.
    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Expr::Compare { .. } | Expr::Gestalt(_) | Expr::Attr { .. } | Expr::Relation { .. }
        )
    }
}

// Display prints the DSL's own concrete syntax, fully parenthesized where
// precedence would otherwise be ambiguous, so the output always re-parses to
// the same tree.

impl fmt::Display for AttrTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.negated { "!=" } else { "=" };
        write!(f, "{}{}{}", self.value.attribute().name(), op, self.value.name())
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Test(t) => write!(f, "{t}"),
            Cond::And(cs) => write_joined(f, cs, " AND "),
            Cond::Or(cs) => write_joined(f, cs, " OR "),
            Cond::Not(c) => write!(f, "NOT ({c})"),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cond {
            None => f.write_str("objects"),
            Some(c) => write!(f, "objects WHERE {c}"),
        }
    }
}

impl fmt::Display for Gestalt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gestalt::Clustered(s, k) => write!(f, "CLUSTERED({s}, {k})"),
            g => write!(f, "{}({})", g.keyword(), g.selector()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(es) => write_joined(f, es, " AND "),
            Expr::Or(es) => write_joined(f, es, " OR "),
            Expr::Not(e) => write!(f, "NOT ({e})"),
            Expr::Compare { count, op, rhs } => {
                write!(f, "COUNT({count}) {} ", op.symbol())?;
                match rhs {
                    Operand::Count(s) => write!(f, "COUNT({s})"),
                    Operand::Int(n) => write!(f, "{n}"),
                }
            }
            Expr::Quant(q) => {
                let kw = match q.kind {
                    QuantKind::Exists => "EXISTS",
                    QuantKind::Forall => "FORALL",
                };
                write!(f, "{kw} {}", q.vars.join(", "))?;
                if q.distinct {
                    f.write_str(" DISTINCT")?;
                }
                write!(f, " IN {} : {}", q.selector, q.body)
            }
            Expr::Gestalt(g) => write!(f, "{g}"),
            Expr::Attr { var, test } => {
                let op = if test.negated { "!=" } else { "=" };
                write!(f, "{var}.{} {op} {}", test.value.attribute().name(), test.value.name())
            }
            Expr::Relation { rel, args } => write!(f, "{}({})", rel.keyword(), args.join(", ")),
        }
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "({item})")?;
    }
    Ok(())
}
