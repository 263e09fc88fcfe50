use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            // `==` is accepted as a synonym for `=`.
            let n = if c == '=' && chars.get(i + 1) == Some(&'=') { 2 } else { 1 };
            out.push(Token { tok, line: tl, col: tc });
            i += n;
            col += n;
            continue;
        }
        let next_eq = chars.get(i + 1) == Some(&'=');
        let cmp = match (c, next_eq) {
            ('!', true) => Some((Tok::Ne, 2)),
            ('<', true) => Some((Tok::Le, 2)),
            ('<', false) => Some((Tok::Lt, 1)),
            ('>', true) => Some((Tok::Ge, 2)),
            ('>', false) => Some((Tok::Gt, 1)),
            _ => None,
        };
        if let Some((tok, n)) = cmp {
            out.push(Token { tok, line: tl, col: tc });
            i += n;
            col += n;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse::<u64>().map_err(|_| {
                ParseError::new(ParseErrorKind::Syntax, format!("integer `{text}` out of range"), tl, tc)
            })?;
            out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            format!("unexpected character `{c}`"),
            tl,
            tc,
        ));
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
