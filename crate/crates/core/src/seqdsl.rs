//! Parser and serializer for the recurrence DSL (`.rec`) and the
//! linear-representation document format (`.rep`), with positioned
//! diagnostics and stable error codes.
//!
//! The recurrence grammar:
//!
//! ```text
//! file      := header { line }
//! header    := "k=" INT NEWLINE
//! line      := relation | basecase | comment | blank
//! relation  := ID "(" class ")" "=" signedterm { ("+"|"-") term }
//! class     := [ INT ] "n" [ "+" INT ]      // INT must be k^e; default 1
//! signedterm:= [ "-" ] term
//! term      := coeff | [ coeff [ "*" ] ] ID "(" class ")"
//! coeff     := INT [ "/" INT ]
//! basecase  := ID "(" INT ")" "=" [ "-" ] INT
//! comment   := "#" anything NEWLINE
//! ```
//!
//! Lines are whitespace-insensitive and a file carries a single sequence
//! identifier. Representation documents are JSON with the canonical field
//! order `k, rank, u, mu, w` and every rational entry written as a string
//! `"p"` or `"p/q"`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{Map, Value};

use crate::kregular::{ClassRef, LinearRep, LinearRepresentation, RecurrenceSystem, Relation, Term};
use crate::linalg::Matrix;
use crate::numkit::{format_rational, parse_rational};
use crate::{Int, Nat, Rat};

/// 1-based position of a diagnostic within the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes; these identifiers do not change across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    Syntax,
    MissingHeader,
    InvalidBase,
    ClassNotPower,
    LevelViolation,
    OffsetRange,
    DuplicateRelation,
    DuplicateBase,
    ZeroDenominator,
    MalformedDocument,
    WrongShape,
    NonRational,
}

impl DiagnosticCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "syntax",
            DiagnosticCode::MissingHeader => "missing-header",
            DiagnosticCode::InvalidBase => "invalid-base",
            DiagnosticCode::ClassNotPower => "class-not-power",
            DiagnosticCode::LevelViolation => "level-violation",
            DiagnosticCode::OffsetRange => "offset-range",
            DiagnosticCode::DuplicateRelation => "duplicate-relation",
            DiagnosticCode::DuplicateBase => "duplicate-base",
            DiagnosticCode::ZeroDenominator => "zero-denominator",
            DiagnosticCode::MalformedDocument => "malformed-document",
            DiagnosticCode::WrongShape => "wrong-shape",
            DiagnosticCode::NonRational => "non-rational",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line,
            self.span.column,
            self.code.as_str(),
            self.message
        )
    }
}

fn error(span: SourceSpan, code: DiagnosticCode, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic { span, severity: Severity::Error, code, message: message.into() }
}

// ---------------------------------------------------------------------------
// recurrence DSL
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    LParen,
    RParen,
    Eq,
    Plus,
    Minus,
    Slash,
    Star,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    col: u32,
    len: u32,
}

fn tokenize_line(
    line: &str,
    lineno: u32,
    diags: &mut Vec<ParseDiagnostic>,
) -> Option<Vec<SpannedTok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let col = (i + 1) as u32;
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
            }
            '#' if toks.is_empty() => return Some(Vec::new()), // comment line
            '(' | ')' | '=' | '+' | '-' | '/' | '*' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '/' => Tok::Slash,
                    _ => Tok::Star,
                };
                toks.push(SpannedTok { tok, col, len: 1 });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                toks.push(SpannedTok { tok: Tok::Int(text), col, len: (i - start) as u32 });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                toks.push(SpannedTok { tok: Tok::Ident(text), col, len: (i - start) as u32 });
            }
            other => {
                diags.push(error(
                    SourceSpan { line: lineno, column: col, length: 1 },
                    DiagnosticCode::Syntax,
                    format!("unexpected character {other:?}"),
                ));
                return None;
            }
        }
    }
    Some(toks)
}

struct Cursor<'a> {
    toks: &'a [SpannedTok],
    pos: usize,
    line: u32,
    line_len: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&'a SpannedTok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn here(&self) -> SourceSpan {
        match self.toks.get(self.pos) {
            Some(t) => SourceSpan { line: self.line, column: t.col, length: t.len },
            None => SourceSpan { line: self.line, column: self.line_len.max(1), length: 1 },
        }
    }

    fn syntax(&self, expected: &str) -> ParseDiagnostic {
        let found = match self.peek() {
            Some(Tok::Ident(s)) => format!("identifier {s:?}"),
            Some(Tok::Int(s)) => format!("integer {s}"),
            Some(t) => format!("{t:?}"),
            None => "end of line".to_string(),
        };
        error(self.here(), DiagnosticCode::Syntax, format!("expected {expected}, found {found}"))
    }

    fn expect_int(&mut self, what: &str) -> Result<(String, SourceSpan), ParseDiagnostic> {
        let span = self.here();
        match self.next().map(|t| &t.tok) {
            Some(Tok::Int(s)) => Ok((s.clone(), span)),
            _ => {
                self.pos -= 1;
                Err(self.syntax(what))
            }
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseDiagnostic> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }
}

fn parse_u64(text: &str, span: SourceSpan, what: &str) -> Result<u64, ParseDiagnostic> {
    text.parse::<u64>().map_err(|_| {
        error(span, DiagnosticCode::Syntax, format!("{what} {text} does not fit a machine word"))
    })
}

/// `coefficient` as `(level, offset)` with the power-of-k and range checks.
fn parse_class(cursor: &mut Cursor<'_>, k: u32) -> Result<ClassRef, ParseDiagnostic> {
    let (coeff_text, coeff_span) = match cursor.peek() {
        Some(Tok::Int(_)) => {
            let (text, span) = cursor.expect_int("class coefficient")?;
            (Some(text), span)
        }
        _ => (None, cursor.here()),
    };
    match cursor.next().map(|t| &t.tok) {
        Some(Tok::Ident(s)) if s == "n" => {}
        _ => {
            cursor.pos -= 1;
            return Err(cursor.syntax("the index variable n"));
        }
    }
    let coefficient = match coeff_text {
        Some(text) => parse_u64(&text, coeff_span, "class coefficient")?,
        None => 1,
    };
    // the coefficient must be k^e for some e >= 0
    let mut level = 0u32;
    let mut acc = 1u64;
    while acc < coefficient {
        acc = acc.checked_mul(u64::from(k)).ok_or_else(|| {
            error(coeff_span, DiagnosticCode::ClassNotPower, format!("{coefficient} overflows"))
        })?;
        level += 1;
    }
    if acc != coefficient || coefficient == 0 {
        return Err(error(
            coeff_span,
            DiagnosticCode::ClassNotPower,
            format!("class coefficient {coefficient} is not a power of the base {k}"),
        ));
    }
    let offset = if cursor.peek() == Some(&Tok::Plus) {
        cursor.pos += 1;
        let (text, span) = cursor.expect_int("class offset")?;
        let value = parse_u64(&text, span, "class offset")?;
        if value >= coefficient {
            return Err(error(
                span,
                DiagnosticCode::OffsetRange,
                format!("offset {value} must be below the class modulus {coefficient}"),
            ));
        }
        value
    } else {
        0
    };
    Ok(ClassRef::new(level, offset))
}

fn parse_coeff(cursor: &mut Cursor<'_>) -> Result<Rat, ParseDiagnostic> {
    let (num_text, num_span) = cursor.expect_int("a coefficient")?;
    let numer: Int = num_text.parse().expect("digits parse as an integer");
    if cursor.peek() == Some(&Tok::Slash) {
        cursor.pos += 1;
        let (den_text, den_span) = cursor.expect_int("a denominator")?;
        let denom: Int = den_text.parse().expect("digits parse as an integer");
        if denom.is_zero() {
            return Err(error(
                den_span,
                DiagnosticCode::ZeroDenominator,
                "denominator must be nonzero",
            ));
        }
        let _ = num_span;
        Ok(Rat::new(numer, denom))
    } else {
        Ok(Rat::from(numer))
    }
}

enum ParsedTerm {
    Constant(Rat),
    Class { coeff: Rat, class: ClassRef },
}

fn parse_term(
    cursor: &mut Cursor<'_>,
    k: u32,
    name: &mut Option<String>,
) -> Result<ParsedTerm, ParseDiagnostic> {
    let coeff = match cursor.peek() {
        Some(Tok::Int(_)) => {
            let c = parse_coeff(cursor)?;
            if cursor.peek() == Some(&Tok::Star) {
                cursor.pos += 1;
            } else if !matches!(cursor.peek(), Some(Tok::Ident(_))) {
                return Ok(ParsedTerm::Constant(c));
            }
            c
        }
        _ => Rat::one(),
    };
    check_name(cursor, name)?;
    cursor.expect(Tok::LParen, "'('")?;
    let class = parse_class(cursor, k)?;
    cursor.expect(Tok::RParen, "')'")?;
    Ok(ParsedTerm::Class { coeff, class })
}

fn check_name(cursor: &mut Cursor<'_>, name: &mut Option<String>) -> Result<(), ParseDiagnostic> {
    let span = cursor.here();
    match cursor.next().map(|t| &t.tok) {
        Some(Tok::Ident(s)) => match name {
            Some(existing) if existing != s => Err(error(
                span,
                DiagnosticCode::Syntax,
                format!("sequence identifier {s:?} does not match {existing:?}"),
            )),
            Some(_) => Ok(()),
            None => {
                *name = Some(s.clone());
                Ok(())
            }
        },
        _ => {
            cursor.pos -= 1;
            Err(cursor.syntax("a sequence identifier"))
        }
    }
}

enum LineItem {
    Relation(Relation, SourceSpan),
    Base(Nat, Int, SourceSpan),
}

fn parse_line(
    toks: &[SpannedTok],
    lineno: u32,
    line_len: u32,
    k: u32,
    name: &mut Option<String>,
) -> Result<LineItem, ParseDiagnostic> {
    let mut cursor = Cursor { toks, pos: 0, line: lineno, line_len };
    let head_span = cursor.here();
    check_name(&mut cursor, name)?;
    cursor.expect(Tok::LParen, "'('")?;
    // basecase when the parentheses hold a bare integer
    let is_base = matches!(cursor.peek(), Some(Tok::Int(_)))
        && matches!(cursor.peek_at(1), Some(Tok::RParen));
    if is_base {
        let (idx_text, _) = cursor.expect_int("a base index")?;
        let index: Nat = idx_text.parse().expect("digits parse as a natural");
        cursor.expect(Tok::RParen, "')'")?;
        cursor.expect(Tok::Eq, "'='")?;
        let negative = if cursor.peek() == Some(&Tok::Minus) {
            cursor.pos += 1;
            true
        } else {
            false
        };
        let (val_text, _) = cursor.expect_int("a base value")?;
        let mut value: Int = val_text.parse().expect("digits parse as an integer");
        if negative {
            value = -value;
        }
        if cursor.peek().is_some() {
            return Err(cursor.syntax("end of line"));
        }
        return Ok(LineItem::Base(index, value, head_span));
    }
    let target = parse_class(&mut cursor, k)?;
    cursor.expect(Tok::RParen, "')'")?;
    cursor.expect(Tok::Eq, "'='")?;
    let mut terms: Vec<Term> = Vec::new();
    let mut constant = Rat::zero();
    let mut first = true;
    loop {
        let sign = if first {
            first = false;
            if cursor.peek() == Some(&Tok::Minus) {
                cursor.pos += 1;
                -1
            } else {
                1
            }
        } else {
            match cursor.peek() {
                Some(Tok::Plus) => {
                    cursor.pos += 1;
                    1
                }
                Some(Tok::Minus) => {
                    cursor.pos += 1;
                    -1
                }
                None => break,
                _ => return Err(cursor.syntax("'+', '-' or end of line")),
            }
        };
        let term_span = cursor.here();
        match parse_term(&mut cursor, k, name)? {
            ParsedTerm::Constant(c) => {
                constant += Rat::from(Int::from(sign)) * c;
            }
            ParsedTerm::Class { coeff, class } => {
                if class.level >= target.level {
                    return Err(error(
                        term_span,
                        DiagnosticCode::LevelViolation,
                        format!(
                            "term level {} must be below the target level {}",
                            class.level, target.level
                        ),
                    ));
                }
                terms.push(Term { coeff: Rat::from(Int::from(sign)) * coeff, class });
            }
        }
    }
    Ok(LineItem::Relation(Relation { target, terms, constant }, head_span))
}

/// Parse a recurrence DSL document. On failure every recoverable diagnostic
/// is reported in one pass, at most one per line.
pub fn parse_recurrences(text: &str) -> Result<RecurrenceSystem, Vec<ParseDiagnostic>> {
    let mut diags: Vec<ParseDiagnostic> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    // header: first significant line must read k=INT
    let mut k: Option<u32> = None;
    for (idx, line) in lines.by_ref() {
        let lineno = (idx + 1) as u32;
        let Some(toks) = tokenize_line(line, lineno, &mut diags) else {
            return Err(diags);
        };
        if toks.is_empty() {
            continue;
        }
        let header = match toks.as_slice() {
            [SpannedTok { tok: Tok::Ident(id), .. }, SpannedTok { tok: Tok::Eq, .. }, SpannedTok { tok: Tok::Int(v), col, len }]
                if id == "k" =>
            {
                Some((v.clone(), SourceSpan { line: lineno, column: *col, length: *len }))
            }
            _ => None,
        };
        match header {
            Some((value, span)) => match value.parse::<u32>() {
                Ok(base) if base >= 2 => k = Some(base),
                _ => {
                    diags.push(error(
                        span,
                        DiagnosticCode::InvalidBase,
                        format!("base {value} must be an integer of at least 2"),
                    ));
                    return Err(diags);
                }
            },
            None => {
                diags.push(error(
                    SourceSpan { line: lineno, column: 1, length: 1 },
                    DiagnosticCode::MissingHeader,
                    "expected the header line k=<base>",
                ));
                return Err(diags);
            }
        }
        break;
    }
    let Some(k) = k else {
        diags.push(error(
            SourceSpan { line: 1, column: 1, length: 1 },
            DiagnosticCode::MissingHeader,
            "expected the header line k=<base>",
        ));
        return Err(diags);
    };

    let mut name: Option<String> = None;
    let mut relations: Vec<Relation> = Vec::new();
    let mut bases: BTreeMap<Nat, Int> = BTreeMap::new();
    let mut seen_targets: HashSet<ClassRef> = HashSet::new();
    let mut seen_bases: HashSet<Nat> = HashSet::new();
    for (idx, line) in lines {
        let lineno = (idx + 1) as u32;
        let Some(toks) = tokenize_line(line, lineno, &mut diags) else {
            continue;
        };
        if toks.is_empty() {
            continue;
        }
        match parse_line(&toks, lineno, line.chars().count() as u32, k, &mut name) {
            Ok(LineItem::Relation(rel, span)) => {
                if !seen_targets.insert(rel.target) {
                    diags.push(error(
                        span,
                        DiagnosticCode::DuplicateRelation,
                        format!("a relation for class {} already exists", rel.target.render(k)),
                    ));
                } else {
                    relations.push(rel);
                }
            }
            Ok(LineItem::Base(index, value, span)) => {
                if !seen_bases.insert(index.clone()) {
                    diags.push(error(
                        span,
                        DiagnosticCode::DuplicateBase,
                        format!("a base value for index {index} already exists"),
                    ));
                } else {
                    bases.insert(index, value);
                }
            }
            Err(diag) => diags.push(diag),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    RecurrenceSystem::new(k, name.unwrap_or_else(|| "f".to_string()), relations, bases).map_err(
        |e| {
            vec![error(
                SourceSpan { line: 1, column: 1, length: 1 },
                DiagnosticCode::Syntax,
                e.to_string(),
            )]
        },
    )
}

/// Canonical text for a recurrence system: header, relations sorted by
/// `(level, offset)`, then base values. `parse_recurrences` reproduces the
/// system exactly.
pub fn render_recurrences(system: &RecurrenceSystem) -> String {
    let mut out = format!("k={}\n", system.k());
    let name = system.name();
    for rel in system.relations() {
        out.push_str(&format!("{name}({}) = ", rel.target.render(system.k())));
        let mut first = true;
        for term in &rel.terms {
            let class = term.class.render(system.k());
            push_signed(&mut out, &mut first, &term.coeff, name, Some(&class));
        }
        if !rel.constant.is_zero() || rel.terms.is_empty() {
            push_signed(&mut out, &mut first, &rel.constant, name, None);
        }
        out.push('\n');
    }
    for (index, value) in system.base_values() {
        out.push_str(&format!("{name}({index}) = {value}\n"));
    }
    out
}

fn push_signed(out: &mut String, first: &mut bool, coeff: &Rat, name: &str, class: Option<&str>) {
    let negative = coeff.is_negative();
    if *first {
        *first = false;
        if negative {
            out.push('-');
        }
    } else if negative {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let magnitude = coeff.abs();
    match class {
        Some(class) => {
            if magnitude.is_one() {
                out.push_str(&format!("{name}({class})"));
            } else {
                out.push_str(&format!("{} {name}({class})", format_rational(&magnitude)));
            }
        }
        None => out.push_str(&format_rational(&magnitude)),
    }
}

// ---------------------------------------------------------------------------
// representation documents
// ---------------------------------------------------------------------------

/// Locate the first occurrence of `needle` in `text` as a 1-based span;
/// falls back to the document start.
fn find_span(text: &str, needle: &str) -> SourceSpan {
    match text.find(needle) {
        Some(byte) => {
            let prefix = &text[..byte];
            let line = prefix.matches('\n').count() as u32 + 1;
            let column = prefix.chars().rev().take_while(|&c| c != '\n').count() as u32 + 1;
            SourceSpan { line, column, length: needle.chars().count() as u32 }
        }
        None => SourceSpan { line: 1, column: 1, length: 1 },
    }
}

fn rational_entry(
    value: &Value,
    text: &str,
    what: &str,
    diags: &mut Vec<ParseDiagnostic>,
) -> Option<Rat> {
    match value {
        Value::String(s) => match parse_rational(s) {
            Some(r) => Some(r),
            None => {
                diags.push(error(
                    find_span(text, &format!("\"{s}\"")),
                    DiagnosticCode::NonRational,
                    format!("{what} entry {s:?} is not a rational p or p/q"),
                ));
                None
            }
        },
        other => {
            diags.push(error(
                find_span(text, &other.to_string()),
                DiagnosticCode::NonRational,
                format!("{what} entries must be strings, found {other}"),
            ));
            None
        }
    }
}

fn rational_vector(
    value: &Value,
    text: &str,
    what: &str,
    expected_len: usize,
    diags: &mut Vec<ParseDiagnostic>,
) -> Option<Vec<Rat>> {
    let Value::Array(items) = value else {
        diags.push(error(
            find_span(text, &format!("\"{what}\"")),
            DiagnosticCode::WrongShape,
            format!("{what} must be an array"),
        ));
        return None;
    };
    if items.len() != expected_len {
        diags.push(error(
            find_span(text, &format!("\"{what}\"")),
            DiagnosticCode::WrongShape,
            format!("{what} has length {}, expected {expected_len}", items.len()),
        ));
        return None;
    }
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        out.push(rational_entry(item, text, what, diags)?);
    }
    Some(out)
}

/// Parse a `.rep` document into a validated representation.
pub fn parse_representation(text: &str) -> Result<LinearRepresentation, Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            let span = SourceSpan {
                line: (e.line() as u32).max(1),
                column: (e.column() as u32).max(1),
                length: 1,
            };
            diags.push(error(span, DiagnosticCode::MalformedDocument, e.to_string()));
            return Err(diags);
        }
    };
    let Value::Object(fields) = &value else {
        diags.push(error(
            SourceSpan { line: 1, column: 1, length: 1 },
            DiagnosticCode::MalformedDocument,
            "the document must be a JSON object",
        ));
        return Err(diags);
    };
    for key in fields.keys() {
        if !matches!(key.as_str(), "k" | "rank" | "u" | "mu" | "w") {
            diags.push(error(
                find_span(text, &format!("\"{key}\"")),
                DiagnosticCode::WrongShape,
                format!("unknown field {key:?}"),
            ));
        }
    }
    let field = |name: &str, diags: &mut Vec<ParseDiagnostic>| -> Option<Value> {
        match fields.get(name) {
            Some(v) => Some(v.clone()),
            None => {
                diags.push(error(
                    SourceSpan { line: 1, column: 1, length: 1 },
                    DiagnosticCode::WrongShape,
                    format!("missing field {name:?}"),
                ));
                None
            }
        }
    };
    let k = field("k", &mut diags).and_then(|v| v.as_u64());
    let rank = field("rank", &mut diags).and_then(|v| v.as_u64());
    let (Some(k), Some(rank)) = (k, rank) else {
        if diags.is_empty() {
            diags.push(error(
                SourceSpan { line: 1, column: 1, length: 1 },
                DiagnosticCode::WrongShape,
                "k and rank must be integers",
            ));
        }
        return Err(diags);
    };
    if k < 2 {
        diags.push(error(
            find_span(text, "\"k\""),
            DiagnosticCode::InvalidBase,
            format!("base {k} must be at least 2"),
        ));
        return Err(diags);
    }
    if rank == 0 {
        diags.push(error(
            find_span(text, "\"rank\""),
            DiagnosticCode::WrongShape,
            "rank must be at least 1",
        ));
        return Err(diags);
    }
    let rank = rank as usize;
    let u = field("u", &mut diags)
        .and_then(|v| rational_vector(&v, text, "u", rank, &mut diags));
    let w = field("w", &mut diags)
        .and_then(|v| rational_vector(&v, text, "w", rank, &mut diags));
    let mu_value = field("mu", &mut diags);
    let mut mu: Vec<Matrix<Rat>> = Vec::new();
    if let Some(Value::Object(map)) = &mu_value {
        let expected: Vec<String> = (0..k).map(|d| d.to_string()).collect();
        let mut keys: Vec<&String> = map.keys().collect();
        keys.sort();
        let mut expected_sorted: Vec<&String> = expected.iter().collect();
        expected_sorted.sort();
        if keys != expected_sorted {
            diags.push(error(
                find_span(text, "\"mu\""),
                DiagnosticCode::WrongShape,
                format!("mu must have exactly the digit keys 0..{}", k - 1),
            ));
        } else {
            for digit in &expected {
                let Value::Array(rows) = &map[digit] else {
                    diags.push(error(
                        find_span(text, &format!("\"{digit}\"")),
                        DiagnosticCode::WrongShape,
                        format!("mu[{digit}] must be an array of rows"),
                    ));
                    continue;
                };
                if rows.len() != rank {
                    diags.push(error(
                        find_span(text, &format!("\"{digit}\"")),
                        DiagnosticCode::WrongShape,
                        format!("mu[{digit}] has {} rows, expected {rank}", rows.len()),
                    ));
                    continue;
                }
                let mut matrix_rows = Vec::with_capacity(rank);
                for row in rows {
                    if let Some(parsed) =
                        rational_vector(row, text, &format!("mu[{digit}]"), rank, &mut diags)
                    {
                        matrix_rows.push(parsed);
                    }
                }
                if matrix_rows.len() == rank {
                    mu.push(Matrix::from_rows(matrix_rows));
                }
            }
        }
    } else if mu_value.is_some() {
        diags.push(error(
            find_span(text, "\"mu\""),
            DiagnosticCode::WrongShape,
            "mu must be an object keyed by digit",
        ));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let (Some(u), Some(w)) = (u, w) else {
        return Err(diags);
    };
    if mu.len() != k as usize {
        diags.push(error(
            find_span(text, "\"mu\""),
            DiagnosticCode::WrongShape,
            "mu is incomplete",
        ));
        return Err(diags);
    }
    LinearRep::new(k as u32, u, mu, w).map_err(|e| {
        vec![error(
            SourceSpan { line: 1, column: 1, length: 1 },
            DiagnosticCode::WrongShape,
            e.to_string(),
        )]
    })
}

/// Canonical document for a representation: JSON with field order
/// `k, rank, u, mu, w` and all rationals as strings.
pub fn render_representation(rep: &LinearRepresentation) -> String {
    let vec_value = |v: &[Rat]| -> Value {
        Value::Array(v.iter().map(|r| Value::String(format_rational(r))).collect())
    };
    let mut mu = Map::new();
    for d in 0..rep.k() {
        let m = rep.mu(d);
        let rows: Vec<Value> = (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|r| Value::String(format_rational(r)))
                        .collect(),
                )
            })
            .collect();
        mu.insert(d.to_string(), Value::Array(rows));
    }
    let mut doc = Map::new();
    doc.insert("k".into(), Value::from(rep.k()));
    doc.insert("rank".into(), Value::from(rep.rank() as u64));
    doc.insert("u".into(), vec_value(rep.u()));
    doc.insert("mu".into(), Value::Object(mu));
    doc.insert("w".into(), vec_value(rep.w()));
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("valid JSON document");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kregular::eval_recurrence;

    const CANTOR_REC: &str = "k=2\nC(2n) = 3 C(n)\nC(2n+1) = 3 C(n) + 2\nC(0) = 0\n";

    #[test]
    fn parses_the_cantor_system() {
        let sys = parse_recurrences(CANTOR_REC).unwrap();
        assert_eq!(sys.k(), 2);
        assert_eq!(sys.name(), "C");
        assert_eq!(sys.relations().len(), 2);
        assert_eq!(sys.relations()[1].constant, Rat::from(Int::from(2)));
        assert_eq!(eval_recurrence(&sys, &Nat::from(9u32)).unwrap(), Int::from(56));
        // compact spelling from handwritten files parses identically
        let compact = parse_recurrences("k=2\nC(2n)=3C(n)\nC(2n+1)=3*C(n)+2\nC(0)=0").unwrap();
        assert_eq!(compact, sys);
    }

    #[test]
    fn parses_rational_coefficients() {
        let text = "k=2\nf(8n+3) = 9/2 f(2n) + 11/6 f(4n) - 3 f(4n+1) + 8/3 f(4n+2)\n";
        let sys = parse_recurrences(text).unwrap();
        let rel = &sys.relations()[0];
        assert_eq!(rel.target, ClassRef::new(3, 3));
        let coeffs: Vec<Rat> = rel.terms.iter().map(|t| t.coeff.clone()).collect();
        assert_eq!(
            coeffs,
            vec![
                Rat::new(Int::from(9), Int::from(2)),
                Rat::new(Int::from(11), Int::from(6)),
                Rat::from(Int::from(-3)),
                Rat::new(Int::from(8), Int::from(3)),
            ]
        );
    }

    fn first_code(text: &str) -> DiagnosticCode {
        parse_recurrences(text).unwrap_err()[0].code
    }

    #[test]
    fn diagnostic_codes() {
        assert_eq!(first_code("k=2\nf(2n) = f(4n)\n"), DiagnosticCode::LevelViolation);
        assert_eq!(first_code("f(2n) = f(n)\n"), DiagnosticCode::MissingHeader);
        assert_eq!(first_code("k=1\nf(2n) = f(n)\n"), DiagnosticCode::InvalidBase);
        assert_eq!(first_code("k=2\nf(3n) = f(n)\n"), DiagnosticCode::ClassNotPower);
        assert_eq!(first_code("k=2\nf(2n+2) = f(n)\n"), DiagnosticCode::OffsetRange);
        assert_eq!(first_code("k=2\nf(4n+1) = f(2n+3)\n"), DiagnosticCode::OffsetRange);
        assert_eq!(first_code("k=2\nf(2n) = 1/0 f(n)\n"), DiagnosticCode::ZeroDenominator);
        assert_eq!(
            first_code("k=2\nf(2n) = f(n)\nf(2n) = 2 f(n)\n"),
            DiagnosticCode::DuplicateRelation
        );
        assert_eq!(first_code("k=2\nf(0) = 1\nf(0) = 2\n"), DiagnosticCode::DuplicateBase);
        assert_eq!(first_code("k=2\nf(2n) = g(n)\n"), DiagnosticCode::Syntax);
    }

    #[test]
    fn recovery_reports_independent_errors() {
        let diags = parse_recurrences("k=2\nf(2n = f(n)\nf(2n+1) % 3\n").unwrap_err();
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[0].span.line, 2);
        assert_eq!(diags[1].span.line, 3);
    }

    #[test]
    fn spans_point_at_the_offense() {
        let diags = parse_recurrences("k=2\nf(2n) = f(4n)\n").unwrap_err();
        assert_eq!(diags[0].span.line, 2);
        assert_eq!(diags[0].span.column, 9);
    }

    #[test]
    fn round_trips_recurrences() {
        for text in [
            CANTOR_REC,
            "k=2\nf(4n) = -2 f(n) + 3 f(2n)\nf(4n+2) = 2/3 f(n) + 5/3 f(2n+1)\nf(0) = 1\nf(1) = -2\n",
            "k=3\ng(3n) = g(n)\ng(3n+1) = 2 g(n) + 1\ng(3n+2) = g(n) - 7\ng(0) = 0\n",
            "k=2\n", // header-only document
        ] {
            let sys = parse_recurrences(text).unwrap();
            let rendered = render_recurrences(&sys);
            let reparsed = parse_recurrences(&rendered).unwrap();
            assert_eq!(reparsed, sys, "round trip failed for {text:?}");
        }
    }

    #[test]
    fn render_formats_signs_and_units() {
        let text = "k=2\nf(4n+1) = -f(n) + f(2n) - 5/2 f(2n+1) - 3\n";
        let sys = parse_recurrences(text).unwrap();
        assert_eq!(
            render_recurrences(&sys),
            "k=2\nf(4n+1) = -f(n) + f(2n) - 5/2 f(2n+1) - 3\n"
        );
    }

    const IDENTITY_REP: &str = r#"{
  "k": 2,
  "rank": 2,
  "u": ["1", "0"],
  "mu": {
    "0": [["2", "0"], ["0", "1"]],
    "1": [["2", "1"], ["0", "1"]]
  },
  "w": ["0", "1"]
}
"#;

    #[test]
    fn parses_the_identity_representation() {
        let rep = parse_representation(IDENTITY_REP).unwrap();
        assert_eq!(rep.rank(), 2);
        for n in 0u64..1 << 10 {
            assert_eq!(rep.eval(&Nat::from(n)), Rat::from(Int::from(n)));
        }
    }

    #[test]
    fn representation_round_trip() {
        for rep in [
            parse_representation(IDENTITY_REP).unwrap(),
            LinearRepresentation::odious_rep(),
            LinearRepresentation::evil_rep(),
            LinearRepresentation::identity(3),
        ] {
            let text = render_representation(&rep);
            assert_eq!(parse_representation(&text).unwrap(), rep);
        }
    }

    #[test]
    fn representation_diagnostics() {
        let wrong_shape = r#"{"k": 2, "rank": 2, "u": ["1", "0"],
            "mu": {"0": [["2", "0", "9"], ["0", "1"]], "1": [["2", "1"], ["0", "1"]]},
            "w": ["0", "1"]}"#;
        let diags = parse_representation(wrong_shape).unwrap_err();
        assert!(diags.iter().any(|d| d.code == DiagnosticCode::WrongShape));

        let bad_entry = r#"{"k": 2, "rank": 1, "u": ["1"], "mu": {"0": [["1/0"]], "1": [["1"]]}, "w": ["1"]}"#;
        let diags = parse_representation(bad_entry).unwrap_err();
        assert_eq!(diags[0].code, DiagnosticCode::NonRational);

        let truncated = "{\"k\": 2,";
        let diags = parse_representation(truncated).unwrap_err();
        assert_eq!(diags[0].code, DiagnosticCode::MalformedDocument);

        let missing_digit = r#"{"k": 2, "rank": 1, "u": ["1"], "mu": {"0": [["1"]]}, "w": ["1"]}"#;
        let diags = parse_representation(missing_digit).unwrap_err();
        assert_eq!(diags[0].code, DiagnosticCode::WrongShape);

        let float_entry = r#"{"k": 2, "rank": 1, "u": [0.5], "mu": {"0": [["1"]], "1": [["1"]]}, "w": ["1"]}"#;
        let diags = parse_representation(float_entry).unwrap_err();
        assert_eq!(diags[0].code, DiagnosticCode::NonRational);
    }
}
