//! Prediction formulas over region aggregates.
//!
//! A prediction compares aggregated surprisal between conditions, e.g.
//! `mean(2;mismatch) > mean(2;match)`. Grammar:
//!
//! ```text
//! expr       := and_expr ('|' and_expr)*
//! and_expr   := primary ('&' primary)*
//! primary    := '(' expr ')' | cmp
//! cmp        := agg ('>' | '<') agg
//! agg        := ('mean' | 'sum') '(' regionlist ';' ident ')'
//! regionlist := '*' | int (',' int)*
//! ```
//!
//! `&` binds tighter than `|`; both are left associative. Whitespace is
//! insignificant.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFunc {
    Mean,
    Sum,
}

impl AggFunc {
    pub fn keyword(self) -> &'static str {
        match self {
            AggFunc::Mean => "mean",
            AggFunc::Sum => "sum",
        }
    }
}

/// Regions an aggregate ranges over. `All` is written `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegionSet {
    All,
    Regions(BTreeSet<u32>),
}

impl RegionSet {
    pub fn single(region: u32) -> Self {
        RegionSet::Regions(BTreeSet::from([region]))
    }

    pub fn contains(&self, region: u32) -> bool {
        match self {
            RegionSet::All => true,
            RegionSet::Regions(set) => set.contains(&region),
        }
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSet::All => f.write_str("*"),
            RegionSet::Regions(set) => {
                for (i, r) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{r}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregate {
    pub func: AggFunc,
    pub regions: RegionSet,
    pub condition: String,
}

impl Aggregate {
    pub fn new(func: AggFunc, regions: RegionSet, condition: impl Into<String>) -> Self {
        Self {
            func,
            regions,
            condition: condition.into(),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({};{})", self.func.keyword(), self.regions, self.condition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PredictionExpr {
    Compare {
        lhs: Aggregate,
        op: CmpOp,
        rhs: Aggregate,
    },
    And(Box<PredictionExpr>, Box<PredictionExpr>),
    Or(Box<PredictionExpr>, Box<PredictionExpr>),
}

impl PredictionExpr {
    pub fn compare(lhs: Aggregate, op: CmpOp, rhs: Aggregate) -> Self {
        PredictionExpr::Compare { lhs, op, rhs }
    }

    pub fn and(self, other: PredictionExpr) -> Self {
        PredictionExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: PredictionExpr) -> Self {
        PredictionExpr::Or(Box::new(self), Box::new(other))
    }

    /// Every aggregate in the formula, left to right.
    pub fn aggregates(&self) -> Vec<&Aggregate> {
        let mut out = Vec::new();
        self.collect_aggregates(&mut out);
        out
    }

    fn collect_aggregates<'a>(&'a self, out: &mut Vec<&'a Aggregate>) {
        match self {
            PredictionExpr::Compare { lhs, rhs, .. } => {
                out.push(lhs);
                out.push(rhs);
            }
            PredictionExpr::And(a, b) | PredictionExpr::Or(a, b) => {
                a.collect_aggregates(out);
                b.collect_aggregates(out);
            }
        }
    }
}

/// Canonical form: compound expressions are fully parenthesized, comparisons
/// are not.
impl fmt::Display for PredictionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictionExpr::Compare { lhs, op, rhs } => {
                let sym = match op {
                    CmpOp::Gt => ">",
                    CmpOp::Lt => "<",
                };
                write!(f, "{lhs} {sym} {rhs}")
            }
            PredictionExpr::And(a, b) => write!(f, "({a} & {b})"),
            PredictionExpr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

pub fn print_prediction(expr: &PredictionExpr) -> String {
    expr.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: expected {expected}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

impl FromStr for PredictionExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_prediction(s)
    }
}

pub fn parse_prediction(formula: &str) -> Result<PredictionExpr, ParseError> {
    let tokens = lex(formula)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    match parser.peek() {
        (Tok::End, _) => Ok(expr),
        (_, at) => Err(ParseError {
            position: at,
            expected: "'&', '|' or end of formula".into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    Star,
    Comma,
    Semi,
    LParen,
    RParen,
    Gt,
    Lt,
    Amp,
    Pipe,
    End,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '*' => Some(Tok::Star),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '>' => Some(Tok::Gt),
            '<' => Some(Tok::Lt),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((tok, at));
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = at;
            while let Some(&(i, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            let value = src[at..end].parse::<u32>().map_err(|_| ParseError {
                position: at,
                expected: "region number below 2^32".into(),
            })?;
            out.push((Tok::Int(value), at));
            continue;
        }
        if is_ident_start(c) {
            let mut end = at;
            while let Some(&(i, d)) = chars.peek() {
                if !is_ident_continue(d) {
                    break;
                }
                end = i + d.len_utf8();
                chars.next();
            }
            out.push((Tok::Ident(src[at..end].to_string()), at));
            continue;
        }
        return Err(ParseError {
            position: at,
            expected: "aggregate, operator or parenthesis".into(),
        });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (&Tok, usize) {
        let (tok, at) = &self.tokens[self.pos];
        (tok, *at)
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, label: &str) -> Result<(), ParseError> {
        let (tok, at) = self.peek();
        if *tok == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError {
                position: at,
                expected: label.into(),
            })
        }
    }

    fn expr(&mut self) -> Result<PredictionExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while matches!(self.peek().0, Tok::Pipe) {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<PredictionExpr, ParseError> {
        let mut lhs = self.primary()?;
        while matches!(self.peek().0, Tok::Amp) {
            self.bump();
            let rhs = self.primary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<PredictionExpr, ParseError> {
        if matches!(self.peek().0, Tok::LParen) {
            self.bump();
            let inner = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(inner);
        }
        let lhs = self.aggregate()?;
        let op = match self.peek() {
            (Tok::Gt, _) => CmpOp::Gt,
            (Tok::Lt, _) => CmpOp::Lt,
            (_, at) => {
                return Err(ParseError {
                    position: at,
                    expected: "'>' or '<'".into(),
                })
            }
        };
        self.bump();
        let rhs = self.aggregate()?;
        Ok(PredictionExpr::compare(lhs, op, rhs))
    }

    fn aggregate(&mut self) -> Result<Aggregate, ParseError> {
        let func = match self.peek() {
            (Tok::Ident(name), _) if name == "mean" => AggFunc::Mean,
            (Tok::Ident(name), _) if name == "sum" => AggFunc::Sum,
            (_, at) => {
                return Err(ParseError {
                    position: at,
                    expected: "'mean', 'sum' or '('".into(),
                })
            }
        };
        self.bump();
        self.expect(Tok::LParen, "'('")?;
        let regions = self.region_list()?;
        self.expect(Tok::Semi, "';'")?;
        let condition = match self.bump() {
            (Tok::Ident(name), _) => name,
            (_, at) => {
                return Err(ParseError {
                    position: at,
                    expected: "condition name".into(),
                })
            }
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(Aggregate {
            func,
            regions,
            condition,
        })
    }

    fn region_list(&mut self) -> Result<RegionSet, ParseError> {
        if matches!(self.peek().0, Tok::Star) {
            self.bump();
            return Ok(RegionSet::All);
        }
        let mut set = BTreeSet::new();
        loop {
            match self.bump() {
                (Tok::Int(0), at) => {
                    return Err(ParseError {
                        position: at,
                        expected: "positive region number".into(),
                    })
                }
                (Tok::Int(n), _) => {
                    set.insert(n);
                }
                (_, at) => {
                    return Err(ParseError {
                        position: at,
                        expected: "region number or '*'".into(),
                    })
                }
            }
            if matches!(self.peek().0, Tok::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        Ok(RegionSet::Regions(set))
    }
}
