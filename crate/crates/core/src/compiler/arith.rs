//! Arithmetic expressions over event anchors: `start(e)`, `end(e)`,
//! `duration(e)`, integer literals, `+` and `-`. Serialized as the compact
//! string form, e.g. `start(bravo) - end(alpha)`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithExpr {
    Start(String),
    End(String),
    Duration(String),
    Const(i64),
    Add(Box<ArithExpr>, Box<ArithExpr>),
    Sub(Box<ArithExpr>, Box<ArithExpr>),
}

impl ArithExpr {
    /// Event labels mentioned anywhere in the expression, in textual order.
    pub fn events(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_events(&mut out);
        out
    }

    fn collect_events(&self, out: &mut Vec<String>) {
        match self {
            ArithExpr::Start(e) | ArithExpr::End(e) | ArithExpr::Duration(e) => {
                if !out.contains(e) {
                    out.push(e.clone());
                }
            }
            ArithExpr::Const(_) => {}
            ArithExpr::Add(a, b) | ArithExpr::Sub(a, b) => {
                a.collect_events(out);
                b.collect_events(out);
            }
        }
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithExpr::Start(e) => write!(f, "start({e})"),
            ArithExpr::End(e) => write!(f, "end({e})"),
            ArithExpr::Duration(e) => write!(f, "duration({e})"),
            ArithExpr::Const(n) => write!(f, "{n}"),
            ArithExpr::Add(a, b) => write!(f, "{a} + {}", Paren(b)),
            ArithExpr::Sub(a, b) => write!(f, "{a} - {}", Paren(b)),
        }
    }
}

/// Parenthesize compound right operands so printing stays unambiguous
/// under left-associative parsing.
struct Paren<'a>(&'a ArithExpr);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ArithExpr::Add(..) | ArithExpr::Sub(..) => write!(f, "({})", self.0),
            other => write!(f, "{other}"),
        }
    }
}

impl Serialize for ArithExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ArithExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_arith_expr(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("bad arithmetic expression `{s}`")))
    }
}

/// Parse `term (('+'|'-') term)*` with terms `start(e)`, `end(e)`,
/// `duration(e)`, `(expr)`, or integer literals. Returns `None` on any
/// lexical or syntactic error.
pub fn parse_arith_expr(text: &str) -> Option<ArithExpr> {
    let tokens = lex(text)?;
    let mut pos = 0;
    let expr = parse_expr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return None;
    }
    Some(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Func(String), // start | end | duration
    Label(String),
    Int(i64),
    Plus,
    Minus,
    Open,
    Close,
}

fn lex(text: &str) -> Option<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c == '+' {
            tokens.push(Token::Plus);
            k += 1;
        } else if c == '-' {
            tokens.push(Token::Minus);
            k += 1;
        } else if c == '(' {
            tokens.push(Token::Open);
            k += 1;
        } else if c == ')' {
            tokens.push(Token::Close);
            k += 1;
        } else if c.is_ascii_digit() {
            let from = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            tokens.push(Token::Int(chars[from..k].iter().collect::<String>().parse().ok()?));
        } else if c.is_alphabetic() {
            let from = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            let word: String = chars[from..k].iter().collect::<String>().to_ascii_lowercase();
            match word.as_str() {
                "start" | "end" | "duration" => tokens.push(Token::Func(word)),
                _ => tokens.push(Token::Label(word)),
            }
        } else {
            return None;
        }
    }
    Some(tokens)
}

fn parse_expr(tokens: &[Token], pos: &mut usize) -> Option<ArithExpr> {
    let mut lhs = parse_term(tokens, pos)?;
    while *pos < tokens.len() {
        match tokens[*pos] {
            Token::Plus => {
                *pos += 1;
                let rhs = parse_term(tokens, pos)?;
                lhs = ArithExpr::Add(Box::new(lhs), Box::new(rhs));
            }
            Token::Minus => {
                *pos += 1;
                let rhs = parse_term(tokens, pos)?;
                lhs = ArithExpr::Sub(Box::new(lhs), Box::new(rhs));
            }
            _ => break,
        }
    }
    Some(lhs)
}

fn parse_term(tokens: &[Token], pos: &mut usize) -> Option<ArithExpr> {
    match tokens.get(*pos)? {
        Token::Int(n) => {
            *pos += 1;
            Some(ArithExpr::Const(*n))
        }
        Token::Minus => {
            // Unary minus on a literal only.
            *pos += 1;
            if let Token::Int(n) = tokens.get(*pos)? {
                *pos += 1;
                Some(ArithExpr::Const(-n))
            } else {
                None
            }
        }
        Token::Open => {
            *pos += 1;
            let inner = parse_expr(tokens, pos)?;
            if tokens.get(*pos)? != &Token::Close {
                return None;
            }
            *pos += 1;
            Some(inner)
        }
        Token::Func(name) => {
            let name = name.clone();
            *pos += 1;
            if tokens.get(*pos)? != &Token::Open {
                return None;
            }
            *pos += 1;
            let label = match tokens.get(*pos)? {
                Token::Label(l) => l.clone(),
                Token::Func(l) => l.clone(), // labels may shadow keywords
                _ => return None,
            };
            *pos += 1;
            if tokens.get(*pos)? != &Token::Close {
                return None;
            }
            *pos += 1;
            Some(match name.as_str() {
                "start" => ArithExpr::Start(label),
                "end" => ArithExpr::End(label),
                _ => ArithExpr::Duration(label),
            })
        }
        _ => None,
    }
}
