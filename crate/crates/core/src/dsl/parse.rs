use num_bigint::BigInt;
use thiserror::Error;

use super::expr::{BinaryOp, CmpOp, Cond, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("unknown operator or identifier `{0}`")]
    UnknownOperator(String),
    #[error("{op} expects {expected} argument(s), found {found}")]
    Arity {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("trailing input at byte {0}")]
    TrailingInput(usize),
    #[error("comparison {0} is only allowed as the condition of ITE")]
    ComparisonOutsideCondition(&'static str),
    #[error("ITE condition must be a comparison")]
    ConditionNotComparison,
    #[error("unexpected character `{ch}` at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected token at byte {0}")]
    UnexpectedToken(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            b'-' | b'+' | b'0'..=b'9' => {
                let start = i;
                if c == b'-' || c == b'+' {
                    i += 1;
                }
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits {
                    return Err(ParseError::UnexpectedChar {
                        ch: c as char,
                        pos: start,
                    });
                }
                let value: BigInt = text[start..i].parse().expect("validated digits");
                out.push((Tok::Int(value), start));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::UnexpectedChar { ch, pos: i });
            }
        }
    }
    Ok(out)
}

enum Node {
    Expr(Expr),
    Cond(Cond),
}

enum Head {
    Unary(UnaryOp),
    Binary(BinaryOp),
    Cmp(CmpOp),
    Ite,
}

impl Head {
    fn lookup(name: &str) -> Option<Head> {
        if name == "ITE" {
            return Some(Head::Ite);
        }
        if let Some(op) = UnaryOp::ALL.into_iter().find(|op| op.name() == name) {
            return Some(Head::Unary(op));
        }
        if let Some(op) = BinaryOp::ALL.into_iter().find(|op| op.name() == name) {
            return Some(Head::Binary(op));
        }
        CmpOp::ALL
            .into_iter()
            .find(|op| op.name() == name)
            .map(Head::Cmp)
    }

    fn name(&self) -> &'static str {
        match self {
            Head::Unary(op) => op.name(),
            Head::Binary(op) => op.name(),
            Head::Cmp(op) => op.name(),
            Head::Ite => "ITE",
        }
    }

    fn arity(&self) -> usize {
        match self {
            Head::Unary(_) => 1,
            Head::Binary(_) | Head::Cmp(_) => 2,
            Head::Ite => 3,
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(0)
    }

    fn node(&mut self) -> Result<Node, ParseError> {
        let Some((tok, at)) = self.toks.get(self.pos).cloned() else {
            return Err(ParseError::Unbalanced);
        };
        self.pos += 1;
        match tok {
            Tok::Int(v) => Ok(Node::Expr(Expr::Lit(v))),
            Tok::Ident(name) => {
                if name == "x" {
                    return Ok(Node::Expr(Expr::Var(Var::X)));
                }
                if name == "y" {
                    return Ok(Node::Expr(Expr::Var(Var::Y)));
                }
                let head = Head::lookup(&name).ok_or(ParseError::UnknownOperator(name))?;
                match self.peek() {
                    Some(Tok::LParen) => self.pos += 1,
                    None => return Err(ParseError::Unbalanced),
                    Some(_) => return Err(ParseError::UnexpectedToken(self.offset())),
                }
                let args = self.args()?;
                build(head, args)
            }
            Tok::RParen => Err(ParseError::Unbalanced),
            Tok::LParen | Tok::Comma => Err(ParseError::UnexpectedToken(at)),
        }
    }

    /// Parses a comma-separated argument list after an opening parenthesis,
    /// consuming the closing one.
    fn args(&mut self) -> Result<Vec<Node>, ParseError> {
        let mut args = Vec::new();
        if let Some(Tok::RParen) = self.peek() {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.node()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                None => return Err(ParseError::Unbalanced),
                Some(_) => return Err(ParseError::UnexpectedToken(self.offset())),
            }
        }
    }
}

fn into_expr(node: Node) -> Result<Expr, ParseError> {
    match node {
        Node::Expr(e) => Ok(e),
        Node::Cond(c) => Err(ParseError::ComparisonOutsideCondition(c.op.name())),
    }
}

fn build(head: Head, args: Vec<Node>) -> Result<Node, ParseError> {
    if args.len() != head.arity() {
        return Err(ParseError::Arity {
            op: head.name(),
            expected: head.arity(),
            found: args.len(),
        });
    }
    let mut it = args.into_iter();
    let mut next = || it.next().expect("arity checked");
    Ok(match head {
        Head::Unary(op) => Node::Expr(Expr::unary(op, into_expr(next())?)),
        Head::Binary(op) => {
            let a = into_expr(next())?;
            let b = into_expr(next())?;
            Node::Expr(Expr::binary(op, a, b))
        }
        Head::Cmp(op) => {
            let a = into_expr(next())?;
            let b = into_expr(next())?;
            Node::Cond(Cond::new(op, a, b))
        }
        Head::Ite => {
            let cond = match next() {
                Node::Cond(c) => c,
                Node::Expr(_) => return Err(ParseError::ConditionNotComparison),
            };
            let t = into_expr(next())?;
            let e = into_expr(next())?;
            Node::Expr(Expr::ite(cond, t, e))
        }
    })
}

/// Byte ranges of the tokens of `text`, or `None` if it does not tokenize.
pub(crate) fn token_spans(text: &str) -> Option<Vec<std::ops::Range<usize>>> {
    let toks = tokenize(text).ok()?;
    let mut spans = Vec::with_capacity(toks.len());
    for (i, (tok, start)) in toks.iter().enumerate() {
        let end = match tok {
            Tok::LParen | Tok::RParen | Tok::Comma => start + 1,
            Tok::Int(_) | Tok::Ident(_) => {
                let limit = toks.get(i + 1).map_or(text.len(), |(_, s)| *s);
                start + text[*start..limit].trim_end().len()
            }
        };
        spans.push(*start..end);
    }
    Some(spans)
}

/// Parses the surface syntax, e.g. `ITE(GT(x, 0), x, NEG(x))`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks, pos: 0 };
    let root = into_expr(p.node()?)?;
    match p.toks.get(p.pos) {
        None => Ok(root),
        Some((Tok::RParen, _)) => Err(ParseError::Unbalanced),
        Some((_, at)) => Err(ParseError::TrailingInput(*at)),
    }
}
