//! The statement language.
//!
//! ```text
//! stmt     := disj
//! disj     := conj ("OR" conj)*
//! conj     := unary ("AND" unary)*
//! unary    := "NOT" unary | "(" stmt ")" | atom
//! atom     := count cmp (count | INT)
//!           | ("EXISTS" | "FORALL") var ("," var)* ["DISTINCT"] "IN" selector ":" stmt
//!           | "CIRCULAR" "(" selector ")" | "SYMMETRIC" "(" selector ")"
//!           | "FLOWER" "(" selector ")" | "CLUSTERED" "(" selector "," INT ")"
//!           | RELATION "(" var ("," var)* ")"
//!           | var "." attr ("=" | "!=") value
//! count    := "COUNT" "(" selector ")"
//! selector := "objects" ["WHERE" cond]
//! cond     := attribute tests (`color=red`, `size!=small`) under AND / OR / NOT / ( )
//! ```
//!
//! Keywords are case-insensitive and whitespace is insignificant. Quantifier
//! bodies extend as far right as possible, so a quantifier that is followed
//! by more conjuncts needs parentheses.

mod ast;
mod eval;
mod lexer;
mod parser;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use eval::{evaluate_expr, gestalt_holds, relation_holds, EvalContext, TOUCH_TOL};
pub use text::selector_phrase;

use crate::model::{Figure, UniverseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    Syntax,
    /// Ill-typed comparison, e.g. a count against a color.
    Type,
    /// A value outside the closed vocabulary or outside the active universe.
    Vocabulary,
    UndeclaredVariable,
    DuplicateVariable,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, message: impl Into<String>, line: usize, col: usize) -> Self {
        Self { kind, message: message.into(), line, col }
    }
}

/// A parsed, scope-checked statement together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    ast: Expr,
    source: String,
}

impl Statement {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let ast = parser::Parser::new(text, true, None)?.parse_statement()?;
        Ok(Self { ast, source: text.trim().to_string() })
    }

    /// Like [`Statement::parse`], additionally rejecting shapes and colors the
    /// universe does not allow.
    pub fn parse_in(text: &str, universe: &UniverseConfig) -> Result<Self, ParseError> {
        let ast = parser::Parser::new(text, true, Some(universe))?.parse_statement()?;
        Ok(Self { ast, source: text.trim().to_string() })
    }

    /// Wraps an already built tree. The tree is printed and re-parsed so that
    /// scoping rules are enforced the same way as for text input.
    pub fn from_ast(ast: Expr) -> Result<Self, ParseError> {
        Self::parse(&ast.to_string())
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn evaluate(&self, figure: &Figure, ctx: &EvalContext) -> bool {
        evaluate_expr(&self.ast, &figure.objects, ctx)
    }

    pub fn render_text(&self) -> String {
        text::render(&self.ast)
    }

    pub fn free_variables(&self) -> VariableUsage {
        free_variables(&self.ast)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    Statement::parse(text)
}

/// Syntax-only parse: variables are not scope-checked. Meant for linting
/// with [`free_variables`].
pub fn parse_unchecked(text: &str) -> Result<Expr, ParseError> {
    parser::Parser::new(text, false, None)?.parse_statement()
}

pub fn evaluate(s: &Statement, f: &Figure) -> bool {
    s.evaluate(f, &EvalContext::default())
}

pub fn render_statement_text(s: &Statement) -> String {
    s.render_text()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableUsage {
    pub declared_unused: BTreeSet<String>,
    pub used_undeclared: BTreeSet<String>,
}

impl VariableUsage {
    pub fn is_well_formed(&self) -> bool {
        self.used_undeclared.is_empty()
    }
}

pub fn free_variables(e: &Expr) -> VariableUsage {
    fn walk(e: &Expr, scope: &mut Vec<(String, bool)>, out: &mut VariableUsage) {
        let mut use_var = |name: &String, scope: &mut Vec<(String, bool)>| {
            match scope.iter_mut().rev().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = true,
                None => {
                    out.used_undeclared.insert(name.clone());
                }
            }
        };
        match e {
            Expr::And(items) | Expr::Or(items) => items.iter().for_each(|i| walk(i, scope, out)),
            Expr::Not(inner) => walk(inner, scope, out),
            Expr::Compare { .. } | Expr::Gestalt(_) => {}
            Expr::Attr { var, .. } => use_var(var, scope),
            Expr::Relation { args, .. } => args.iter().for_each(|a| use_var(a, scope)),
            Expr::Quant(q) => {
                let base = scope.len();
                scope.extend(q.vars.iter().map(|v| (v.clone(), false)));
                walk(&q.body, scope, out);
                for (name, used) in scope.drain(base..) {
                    if !used {
                        out.declared_unused.insert(name);
                    }
                }
            }
        }
    }
    let mut out = VariableUsage::default();
    walk(e, &mut Vec::new(), &mut out);
    out
}
