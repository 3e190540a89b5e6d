//! Abstract syntax, concrete syntax and structural measures for the
//! language with derivative (`<d>`), next (`O`) and tangle (`<t>{..}`)
//! modalities.
//!
//! Grammar, loosest to tightest:
//!
//! ```text
//! formula := disj ("->" formula)?
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := ("~" | "O" | "<d>" | "[d]" | "<d.>" | "[d.]") unary | atom
//! atom    := var | "T" | "F" | "(" formula ")"
//!          | "<t>{" formula ("," formula)* "}" | "<t.>{" formula ("," formula)* "}"
//! var     := [a-z][a-zA-Z0-9_]*
//! ```
//!
//! The dotted operators are abbreviations and are expanded while parsing.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Variable used to desugar `T` and `F`. Not expressible in the surface syntax.
pub const RESERVED_VAR: &str = "_top";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown token at position {pos}: {found:?}")]
    UnknownToken { pos: usize, found: String },
    #[error("syntax error at position {pos}: expected {expected}, found {found}")]
    Unexpected {
        pos: usize,
        expected: &'static str,
        found: String,
    },
    #[error("empty tangle braces at position {pos}")]
    EmptyTangle { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::UnknownToken { pos, .. }
            | ParseError::Unexpected { pos, .. }
            | ParseError::EmptyTangle { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tangle argument set must be nonempty")]
pub struct EmptyTangleError;

/// Nonempty, duplicate-free set of tangle arguments, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TangleArgs(BTreeSet<Formula>);

impl TangleArgs {
    pub fn new<I: IntoIterator<Item = Formula>>(args: I) -> Result<Self, EmptyTangleError> {
        let set: BTreeSet<Formula> = args.into_iter().collect();
        if set.is_empty() {
            Err(EmptyTangleError)
        } else {
            Ok(TangleArgs(set))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_set(&self) -> &BTreeSet<Formula> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Var(String),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Next(Box<Formula>),
    Tangle(TangleArgs),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn top() -> Formula {
        let r = Formula::var(RESERVED_VAR);
        Formula::or(r.clone(), Formula::neg(r))
    }

    pub fn bot() -> Formula {
        let r = Formula::var(RESERVED_VAR);
        Formula::and(r.clone(), Formula::neg(r))
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn tangle<I: IntoIterator<Item = Formula>>(args: I) -> Result<Formula, EmptyTangleError> {
        Ok(Formula::Tangle(TangleArgs::new(args)?))
    }

    /// `φ ∨ ◇φ`
    pub fn dot_diamond(f: Formula) -> Formula {
        Formula::or(f.clone(), Formula::diamond(f))
    }

    /// `φ ∧ □φ`
    pub fn dot_box(f: Formula) -> Formula {
        Formula::and(f.clone(), Formula::boxed(f))
    }

    /// Left-nested conjunction of the arguments in canonical order.
    pub fn conjunction(args: &TangleArgs) -> Formula {
        let mut it = args.iter().cloned();
        let first = it.next().expect("tangle arguments are nonempty");
        it.fold(first, Formula::and)
    }

    /// Dotted tangle: the closure of the conjunction, or the tangle itself.
    pub fn dot_tangle(args: TangleArgs) -> Formula {
        Formula::or(Formula::dot_diamond(Formula::conjunction(&args)), Formula::Tangle(args))
    }

    fn is_reserved_var(&self) -> bool {
        matches!(self, Formula::Var(v) if v == RESERVED_VAR)
    }

    fn is_top(&self) -> bool {
        match self {
            Formula::Or(a, b) => a.is_reserved_var() && matches!(&**b, Formula::Neg(c) if c.is_reserved_var()),
            _ => false,
        }
    }

    fn is_bot(&self) -> bool {
        match self {
            Formula::And(a, b) => a.is_reserved_var() && matches!(&**b, Formula::Neg(c) if c.is_reserved_var()),
            _ => false,
        }
    }

    /// Immediate subformulas; a tangle contributes each of its arguments.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) => vec![],
            Formula::Neg(a) | Formula::Diamond(a) | Formula::Box(a) | Formula::Next(a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
            Formula::Tangle(args) => args.iter().collect(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Maximum nesting depth of `O`.
    pub fn next_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.next_depth()).max().unwrap_or(0);
        match self {
            Formula::Next(_) => inner + 1,
            _ => inner,
        }
    }

    /// User variables in canonical (sorted) order, excluding the reserved one.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) if v != RESERVED_VAR => {
                out.insert(v.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_vars(out);
                }
            }
        }
    }

    /// Single negation with double negations collapsed.
    pub fn negation(&self) -> Formula {
        match self {
            Formula::Neg(inner) => (**inner).clone(),
            other => Formula::neg(other.clone()),
        }
    }

    fn precedence(&self) -> u8 {
        if self.is_top() || self.is_bot() {
            return 5;
        }
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Neg(_) | Formula::Diamond(_) | Formula::Box(_) | Formula::Next(_) => 4,
            Formula::Var(_) | Formula::Tangle(_) => 5,
        }
    }
}

/// Smallest set containing `φ` closed under subformulas and single negation.
pub fn subformula_closure(formula: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    add_closure(formula, &mut out);
    out
}

/// Closure of a whole set of formulas.
pub fn closure_of<'a, I: IntoIterator<Item = &'a Formula>>(formulas: I) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    for f in formulas {
        add_closure(f, &mut out);
    }
    out
}

fn add_closure(formula: &Formula, out: &mut BTreeSet<Formula>) {
    if out.contains(formula) && out.contains(&formula.negation()) {
        return;
    }
    out.insert(formula.clone());
    out.insert(formula.negation());
    for c in formula.children() {
        add_closure(c, out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            return write!(f, "T");
        }
        if self.is_bot() {
            return write!(f, "F");
        }
        match self {
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Neg(a) => {
                write!(f, "~")?;
                write_operand(f, a, 4)
            }
            Formula::Diamond(a) => {
                write!(f, "<d>")?;
                write_operand(f, a, 4)
            }
            Formula::Box(a) => {
                write!(f, "[d]")?;
                write_operand(f, a, 4)
            }
            Formula::Next(a) => {
                write!(f, "O ")?;
                write_operand(f, a, 4)
            }
            Formula::And(a, b) => write_binary(f, a, "&", b, 3),
            Formula::Or(a, b) => write_binary(f, a, "|", b, 2),
            Formula::Implies(a, b) => {
                // right associative
                write_operand(f, a, 2)?;
                write!(f, " -> ")?;
                write_operand(f, b, 1)
            }
            Formula::Tangle(args) => {
                write!(f, "<t>{{")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula, prec: u8) -> fmt::Result {
    // left associative
    write_operand(f, a, prec)?;
    write!(f, " {op} ")?;
    write_operand(f, b, prec + 1)
}

fn write_operand(f: &mut fmt::Formatter<'_>, operand: &Formula, min_prec: u8) -> fmt::Result {
    if operand.precedence() < min_prec {
        write!(f, "({operand})")
    } else {
        write!(f, "{operand}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Var(String),
    Top,
    Bot,
    Not,
    Next,
    Diamond,
    Box,
    DotDiamond,
    DotBox,
    Tangle,
    DotTangle,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Var(v) => return write!(f, "variable {v:?}"),
            Token::Top => "\"T\"",
            Token::Bot => "\"F\"",
            Token::Not => "\"~\"",
            Token::Next => "\"O\"",
            Token::Diamond => "\"<d>\"",
            Token::Box => "\"[d]\"",
            Token::DotDiamond => "\"<d.>\"",
            Token::DotBox => "\"[d.]\"",
            Token::Tangle => "\"<t>\"",
            Token::DotTangle => "\"<t.>\"",
            Token::And => "\"&\"",
            Token::Or => "\"|\"",
            Token::Implies => "\"->\"",
            Token::LParen => "\"(\"",
            Token::RParen => "\")\"",
            Token::LBrace => "\"{\"",
            Token::RBrace => "\"}\"",
            Token::Comma => "\",\"",
        };
        f.write_str(s)
    }
}

const SYMBOLS: &[(&str, Token)] = &[
    ("<d.>", Token::DotDiamond),
    ("[d.]", Token::DotBox),
    ("<t.>", Token::DotTangle),
    ("<d>", Token::Diamond),
    ("[d]", Token::Box),
    ("<t>", Token::Tangle),
    ("->", Token::Implies),
    ("~", Token::Not),
    ("&", Token::And),
    ("|", Token::Or),
    ("(", Token::LParen),
    (")", Token::RParen),
    ("{", Token::LBrace),
    ("}", Token::RBrace),
    (",", Token::Comma),
    ("O", Token::Next),
    ("T", Token::Top),
    ("F", Token::Bot),
];

fn lex(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    'outer: while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c.is_ascii_lowercase() {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            tokens.push((start, Token::Var(text[start..pos].to_string())));
            continue;
        }
        for (sym, tok) in SYMBOLS {
            if text[pos..].starts_with(sym) {
                tokens.push((pos, tok.clone()));
                pos += sym.len();
                continue 'outer;
            }
        }
        let found: String = text[pos..].chars().next().into_iter().collect();
        return Err(ParseError::UnknownToken { pos, found });
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    index: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.index).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn found(&self) -> String {
        self.peek().map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
    }

    fn expect(&mut self, tok: Token, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.index += 1;
            Ok(())
        } else {
            Err(ParseError::Unexpected {
                pos: self.pos(),
                expected,
                found: self.found(),
            })
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Token::Implies) {
            self.index += 1;
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Token::Or) {
            self.index += 1;
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Token::And) {
            self.index += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Some(Token::Not) => Formula::neg,
            Some(Token::Next) => Formula::next,
            Some(Token::Diamond) => Formula::diamond,
            Some(Token::Box) => Formula::boxed,
            Some(Token::DotDiamond) => Formula::dot_diamond,
            Some(Token::DotBox) => Formula::dot_box,
            _ => return self.atom(),
        };
        self.index += 1;
        Ok(wrap(self.unary()?))
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Token::Var(v)) => {
                self.index += 1;
                Ok(Formula::Var(v))
            }
            Some(Token::Top) => {
                self.index += 1;
                Ok(Formula::top())
            }
            Some(Token::Bot) => {
                self.index += 1;
                Ok(Formula::bot())
            }
            Some(Token::LParen) => {
                self.index += 1;
                let inner = self.implication()?;
                self.expect(Token::RParen, "\")\"")?;
                Ok(inner)
            }
            Some(Token::Tangle) => {
                self.index += 1;
                Ok(Formula::Tangle(self.tangle_args(pos)?))
            }
            Some(Token::DotTangle) => {
                self.index += 1;
                Ok(Formula::dot_tangle(self.tangle_args(pos)?))
            }
            _ => Err(ParseError::Unexpected {
                pos,
                expected: "a formula",
                found: self.found(),
            }),
        }
    }

    fn tangle_args(&mut self, start: usize) -> Result<TangleArgs, ParseError> {
        self.expect(Token::LBrace, "\"{\" after tangle")?;
        if self.peek() == Some(&Token::RBrace) {
            return Err(ParseError::EmptyTangle { pos: start });
        }
        let mut args = vec![self.implication()?];
        while self.peek() == Some(&Token::Comma) {
            self.index += 1;
            args.push(self.implication()?);
        }
        self.expect(Token::RBrace, "\",\" or \"}\"")?;
        Ok(TangleArgs::new(args).expect("at least one argument was parsed"))
    }
}

/// Parses a formula; derived connectives are expanded.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        index: 0,
        end: text.len(),
    };
    let formula = parser.implication()?;
    if parser.index != parser.tokens.len() {
        return Err(ParseError::Unexpected {
            pos: parser.pos(),
            expected: "end of input",
            found: parser.found(),
        });
    }
    Ok(formula)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
