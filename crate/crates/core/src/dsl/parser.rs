use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::model::{Color, Shape, UniverseConfig};

const RESERVED: &[&str] = &[
    "AND", "OR", "NOT", "COUNT", "EXISTS", "FORALL", "DISTINCT", "IN", "WHERE", "OBJECTS",
    "CIRCULAR", "SYMMETRIC", "CLUSTERED", "FLOWER",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word)) || Relation::from_keyword(word).is_some()
}

pub(crate) struct Parser<'u> {
    toks: Vec<Token>,
    pos: usize,
    /// Enforce variable scoping; off for lint-only parsing.
    checked: bool,
    universe: Option<&'u UniverseConfig>,
    scope: Vec<String>,
}

impl<'u> Parser<'u> {
    pub(crate) fn new(
        text: &str,
        checked: bool,
        universe: Option<&'u UniverseConfig>,
    ) -> Result<Self, ParseError> {
        if text.trim().is_empty() {
            return Err(ParseError::new(ParseErrorKind::Empty, "statement is empty", 1, 1));
        }
        Ok(Self { toks: tokenize(text)?, pos: 0, checked, universe, scope: Vec::new() })
    }

    pub(crate) fn parse_statement(mut self) -> Result<Expr, ParseError> {
        let e = self.disjunction()?;
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected("AND, OR or end of statement"));
        }
        Ok(e)
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, t: &Token, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        ParseError::new(kind, msg, t.line, t.col)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        self.err_at(t, ParseErrorKind::Syntax, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn disjunction(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.conjunction()?];
        while self.eat_keyword("OR") {
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.unary()?];
        while self.eat_keyword("AND") {
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("NOT") {
            return Ok(Expr::not(self.unary()?));
        }
        if self.peek().tok == Tok::LParen {
            self.advance();
            let e = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        let word = match &t.tok {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unexpected("a predicate")),
        };
        let upper = word.to_ascii_uppercase();
        match upper.as_str() {
            "COUNT" => return self.comparison(),
            "EXISTS" | "FORALL" => return self.quantifier(),
            "CIRCULAR" | "SYMMETRIC" | "CLUSTERED" | "FLOWER" => return self.gestalt(),
            _ => {}
        }
        if let Some(rel) = Relation::from_keyword(&word) {
            return self.relation(rel);
        }
        if self.peek_at(1).tok == Tok::Dot {
            return self.attribute_predicate();
        }
        Err(self.unexpected("a predicate"))
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let count = self.count()?;
        let op_tok = self.advance();
        let op = match &op_tok.tok {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            other => {
                return Err(self.err_at(
                    &op_tok,
                    ParseErrorKind::Syntax,
                    format!("expected a comparison operator, found {}", other.describe()),
                ))
            }
        };
        let t = self.peek().clone();
        let rhs = match &t.tok {
            Tok::Int(n) => {
                self.advance();
                Operand::Int(*n)
            }
            Tok::Ident(w) if w.eq_ignore_ascii_case("COUNT") => Operand::Count(self.count()?),
            Tok::Ident(w) => {
                if let Some(kind) = value_kind(w) {
                    return Err(self.err_at(
                        &t,
                        ParseErrorKind::Type,
                        format!("cannot compare a count with {kind} value `{w}`"),
                    ));
                }
                return Err(self.unexpected("COUNT(...) or an integer"));
            }
            _ => return Err(self.unexpected("COUNT(...) or an integer")),
        };
        Ok(Expr::Compare { count, op, rhs })
    }

    fn count(&mut self) -> Result<Selector, ParseError> {
        self.expect_keyword("COUNT")?;
        self.expect(Tok::LParen)?;
        let sel = self.selector()?;
        self.expect(Tok::RParen)?;
        Ok(sel)
    }

    fn selector(&mut self) -> Result<Selector, ParseError> {
        self.expect_keyword("objects")?;
        if self.eat_keyword("WHERE") {
            Ok(Selector { cond: Some(self.cond_or()?) })
        } else {
            Ok(Selector::all())
        }
    }

    fn cond_or(&mut self) -> Result<Cond, ParseError> {
        let mut items = vec![self.cond_and()?];
        while self.eat_keyword("OR") {
            items.push(self.cond_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Cond::Or(items) })
    }

    fn cond_and(&mut self) -> Result<Cond, ParseError> {
        let mut items = vec![self.cond_unary()?];
        while self.eat_keyword("AND") {
            items.push(self.cond_unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Cond::And(items) })
    }

    fn cond_unary(&mut self) -> Result<Cond, ParseError> {
        if self.eat_keyword("NOT") {
            return Ok(Cond::Not(Box::new(self.cond_unary()?)));
        }
        if self.peek().tok == Tok::LParen {
            self.advance();
            let c = self.cond_or()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        let attr = self.attribute_name()?;
        let negated = self.equality()?;
        let value = self.attribute_value(attr)?;
        Ok(Cond::Test(AttrTest { value, negated }))
    }

    fn attribute_name(&mut self) -> Result<Attribute, ParseError> {
        let t = self.peek().clone();
        let attr = match &t.tok {
            Tok::Ident(w) => match w.to_ascii_lowercase().as_str() {
                "shape" => Some(Attribute::Shape),
                "color" | "colour" => Some(Attribute::Color),
                "size" => Some(Attribute::Size),
                _ => None,
            },
            _ => None,
        };
        match attr {
            Some(a) => {
                self.advance();
                Ok(a)
            }
            None => Err(self.unexpected("an attribute (shape, color or size)")),
        }
    }

    /// Returns `true` for `!=`.
    fn equality(&mut self) -> Result<bool, ParseError> {
        match self.peek().tok {
            Tok::Eq => {
                self.advance();
                Ok(false)
            }
            Tok::Ne => {
                self.advance();
                Ok(true)
            }
            Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge => {
                let t = self.peek().clone();
                Err(self.err_at(&t, ParseErrorKind::Type, "attributes only support `=` and `!=`"))
            }
            _ => Err(self.unexpected("`=` or `!=`")),
        }
    }

    fn attribute_value(&mut self, attr: Attribute) -> Result<AttrValue, ParseError> {
        let t = self.advance();
        let word = match &t.tok {
            Tok::Ident(w) => w.clone(),
            Tok::Int(_) => {
                return Err(self.err_at(
                    &t,
                    ParseErrorKind::Type,
                    format!("{} cannot be compared with a number", attr.name()),
                ))
            }
            other => {
                return Err(self.err_at(
                    &t,
                    ParseErrorKind::Syntax,
                    format!("expected a {} value, found {}", attr.name(), other.describe()),
                ))
            }
        };
        let lower = word.to_ascii_lowercase();
        let parsed = match attr {
            Attribute::Shape => lower.parse::<Shape>().ok().map(AttrValue::Shape),
            Attribute::Color => lower.parse::<Color>().ok().map(AttrValue::Color),
            Attribute::Size => match lower.as_str() {
                "small" => Some(AttrValue::Size(SizeClass::Small)),
                "big" | "large" => Some(AttrValue::Size(SizeClass::Big)),
                _ => None,
            },
        };
        let value = match parsed {
            Some(v) => v,
            None => {
                return Err(match value_kind(&word) {
                    Some(kind) => self.err_at(
                        &t,
                        ParseErrorKind::Type,
                        format!("`{word}` is a {kind} value, not a {}", attr.name()),
                    ),
                    None => self.err_at(
                        &t,
                        ParseErrorKind::Vocabulary,
                        format!("unknown {} `{word}`", attr.name()),
                    ),
                })
            }
        };
        if let Some(u) = self.universe {
            let allowed = match value {
                AttrValue::Shape(s) => u.allows_shape(s),
                AttrValue::Color(c) => u.allows_color(c),
                AttrValue::Size(_) => true,
            };
            if !allowed {
                return Err(self.err_at(
                    &t,
                    ParseErrorKind::Vocabulary,
                    format!("{} `{word}` is not part of the universe", attr.name()),
                ));
            }
        }
        Ok(value)
    }

    fn variable_use(&mut self) -> Result<String, ParseError> {
        let t = self.advance();
        let name = match &t.tok {
            Tok::Ident(w) if !is_reserved(w) => w.clone(),
            other => {
                return Err(self.err_at(
                    &t,
                    ParseErrorKind::Syntax,
                    format!("expected a variable, found {}", other.describe()),
                ))
            }
        };
        if self.checked && !self.scope.contains(&name) {
            return Err(self.err_at(
                &t,
                ParseErrorKind::UndeclaredVariable,
                format!("variable `{name}` is not declared by an enclosing quantifier"),
            ));
        }
        Ok(name)
    }

    fn attribute_predicate(&mut self) -> Result<Expr, ParseError> {
        let var = self.variable_use()?;
        self.expect(Tok::Dot)?;
        let attr = self.attribute_name()?;
        let negated = self.equality()?;
        let value = self.attribute_value(attr)?;
        Ok(Expr::Attr { var, test: AttrTest { value, negated } })
    }

    fn relation(&mut self, rel: Relation) -> Result<Expr, ParseError> {
        let kw = self.advance();
        self.expect(Tok::LParen)?;
        let mut args = vec![self.variable_use()?];
        while self.peek().tok == Tok::Comma {
            self.advance();
            args.push(self.variable_use()?);
        }
        self.expect(Tok::RParen)?;
        if args.len() != rel.arity() {
            return Err(self.err_at(
                &kw,
                ParseErrorKind::Type,
                format!("{} takes {} argument(s), got {}", rel.keyword(), rel.arity(), args.len()),
            ));
        }
        Ok(Expr::Relation { rel, args })
    }

    fn gestalt(&mut self) -> Result<Expr, ParseError> {
        let kw = self.advance();
        let word = match &kw.tok {
            Tok::Ident(w) => w.to_ascii_uppercase(),
            _ => unreachable!("gestalt() is only entered on an identifier"),
        };
        self.expect(Tok::LParen)?;
        let sel = self.selector()?;
        let g = match word.as_str() {
            "CIRCULAR" => Gestalt::Circular(sel),
            "SYMMETRIC" => Gestalt::Symmetric(sel),
            "FLOWER" => Gestalt::Flower(sel),
            _ => {
                self.expect(Tok::Comma)?;
                let t = self.advance();
                match &t.tok {
                    Tok::Int(k) if *k >= 1 && *k <= u32::MAX as u64 => Gestalt::Clustered(sel, *k as u32),
                    Tok::Int(_) => {
                        return Err(self.err_at(&t, ParseErrorKind::Type, "cluster count must be >= 1"))
                    }
                    other => {
                        return Err(self.err_at(
                            &t,
                            ParseErrorKind::Type,
                            format!("cluster count must be an integer, found {}", other.describe()),
                        ))
                    }
                }
            }
        };
        self.expect(Tok::RParen)?;
        Ok(Expr::Gestalt(g))
    }

    fn quantifier(&mut self) -> Result<Expr, ParseError> {
        let kw = self.advance();
        let kind = match &kw.tok {
            Tok::Ident(w) if w.eq_ignore_ascii_case("EXISTS") => QuantKind::Exists,
            _ => QuantKind::Forall,
        };
        let mut vars: Vec<String> = Vec::new();
        loop {
            let t = self.advance();
            let name = match &t.tok {
                Tok::Ident(w) if !is_reserved(w) => w.clone(),
                other => {
                    return Err(self.err_at(
                        &t,
                        ParseErrorKind::Syntax,
                        format!("expected a variable name, found {}", other.describe()),
                    ))
                }
            };
            if self.checked && (vars.contains(&name) || self.scope.contains(&name)) {
                return Err(self.err_at(
                    &t,
                    ParseErrorKind::DuplicateVariable,
                    format!("variable `{name}` is already declared"),
                ));
            }
            vars.push(name);
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        let distinct = self.eat_keyword("DISTINCT");
        self.expect_keyword("IN")?;
        let selector = self.selector()?;
        self.expect(Tok::Colon)?;
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let body = self.disjunction();
        self.scope.truncate(depth);
        Ok(Expr::Quant(Box::new(Quant { kind, vars, distinct, selector, body: body? })))
    }
}

fn value_kind(word: &str) -> Option<&'static str> {
    let lower = word.to_ascii_lowercase();
    if lower.parse::<Shape>().is_ok() {
        Some("shape")
    } else if lower.parse::<Color>().is_ok() {
        Some("color")
    } else if matches!(lower.as_str(), "small" | "big" | "large") {
        Some("size")
    } else {
        None
    }
}
