//! The `.gcs` construction language: a line-oriented DSL for straight-line
//! ruler-and-compass programs.
//!
//! Grammar (one statement per line, `#` starts a comment, LF or CRLF):
//!
//! ```text
//! program := { stmt NL }
//! stmt    := "param" ID ":" ("angle" | "length")
//!          | "point" ID "=" expr
//!          | "line" ID "=" expr
//!          | "circle" ID "=" expr
//!          | "export" ID { "," ID }
//! expr    := coord | call
//! call    := OPNAME "(" args ")" [ "pick" hint ]
//! hint    := "closest_to" "(" ID ")" | "farthest_from" "(" ID ")"
//!          | "distinct_from" "(" ID ")" | "upper" | "lower"
//! coord   := "(" NUM "," NUM ")"
//! ```
//!
//! Operation names: `line_through`, `midpoint`, `perpendicular_bisector`,
//! `perpendicular_at`, `angle_bisector`, `intersect`, `given_angle`,
//! `circle`; `dist(P, Q)` is accepted as a length expression in radius
//! position. Numeric literals are decimal only; angles are degrees.
//!
//! Every identifier is defined before use and assigned exactly once. Parsing
//! is total: a source either yields a program or exactly one diagnostic with
//! line, column, and the offending token. Ray-producing operations
//! (`angle_bisector`, `given_angle`) are declared with the `line` keyword;
//! the engine stores them as rays and intersections use the supporting line.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::geom::Side;

/// A script with a display name for diagnostics, typically the file name.
#[derive(Clone, Debug)]
pub struct ScriptSource {
    pub name: String,
    pub text: String,
}

impl ScriptSource {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        ScriptSource {
            name: name.into(),
            text: text.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Angle,
    Length,
}

/// Declaration keyword of a step; rays are declared as `line`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Point,
    Line,
    Circle,
}

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeclKind::Point => write!(f, "point"),
            DeclKind::Line => write!(f, "line"),
            DeclKind::Circle => write!(f, "circle"),
        }
    }
}

/// Deterministic rule selecting one point of a two-valued intersection.
#[derive(Clone, Debug, PartialEq)]
pub enum PickHint {
    ClosestTo(String),
    FarthestFrom(String),
    DistinctFrom(String),
    Upper,
    Lower,
}

impl fmt::Display for PickHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PickHint::ClosestTo(id) => write!(f, "closest_to({id})"),
            PickHint::FarthestFrom(id) => write!(f, "farthest_from({id})"),
            PickHint::DistinctFrom(id) => write!(f, "distinct_from({id})"),
            PickHint::Upper => write!(f, "upper"),
            PickHint::Lower => write!(f, "lower"),
        }
    }
}

/// Angle argument of `given_angle`: a literal in degrees or an angle param.
#[derive(Clone, Debug, PartialEq)]
pub enum AngleExpr {
    Literal(f64),
    Param(String),
}

/// Length argument of `circle`: a literal, a length param, or `dist(P, Q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LengthExpr {
    Literal(f64),
    Param(String),
    Dist(String, String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOp {
    Coord { x: f64, y: f64 },
    LineThrough { p: String, q: String },
    Midpoint { p: String, q: String },
    PerpendicularBisector { p: String, q: String },
    PerpendicularAt { line: String, p: String },
    AngleBisector { vertex: String, arm1: String, arm2: String },
    Intersect { a: String, b: String, pick: Option<PickHint> },
    GivenAngle { origin: String, base: String, angle: AngleExpr, side: Side },
    CircleAt { center: String, radius: LengthExpr },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub decl: DeclKind,
    pub name: String,
    pub op: StepOp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

/// A parsed straight-line construction program.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConstructionProgram {
    pub params: Vec<Param>,
    pub steps: Vec<Step>,
    pub exports: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UndefinedIdentifier,
    Arity,
    MissingPick,
    DuplicateName,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax => write!(f, "syntax error"),
            ParseErrorKind::UndefinedIdentifier => write!(f, "undefined identifier"),
            ParseErrorKind::Arity => write!(f, "arity error"),
            ParseErrorKind::MissingPick => write!(f, "missing pick"),
            ParseErrorKind::DuplicateName => write!(f, "duplicate name"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{source_name}:{line}:{col}: {kind}: {message} (at `{token}`)")]
pub struct ParseError {
    pub source_name: String,
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
    pub token: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, String),
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Number(_, raw) => raw.clone(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Eq => "=".into(),
            Tok::Colon => ":".into(),
        }
    }
}

/// What a defined name denotes, for parse-time type checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NameKind {
    Point,
    Linear,
    Circle,
    AngleParam,
    LengthParam,
}

const RESERVED: [&str; 6] = ["param", "point", "line", "circle", "export", "pick"];

struct Parser<'a> {
    source_name: &'a str,
    names: HashMap<String, NameKind>,
    program: ConstructionProgram,
    exported: HashMap<String, ()>,
}

struct LineToks {
    toks: Vec<(Tok, usize)>,
    line_no: usize,
    pos: usize,
    len_col: usize,
}

impl LineToks {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
}

pub fn parse(src: &ScriptSource) -> Result<ConstructionProgram, ParseError> {
    let mut parser = Parser {
        source_name: &src.name,
        names: HashMap::new(),
        program: ConstructionProgram::default(),
        exported: HashMap::new(),
    };
    for (idx, raw_line) in src.text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(parser.source_name, raw_line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut lt = LineToks {
            toks,
            line_no,
            pos: 0,
            len_col: raw_line.len() + 1,
        };
        parser.statement(&mut lt)?;
    }
    Ok(parser.program)
}

fn tokenize(
    source_name: &str,
    line: &str,
    line_no: usize,
) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            '\r' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, col));
                i += 1;
            }
            ':' => {
                toks.push((Tok::Colon, col));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let start = i;
                if c == '-' {
                    i += 1;
                }
                let mut saw_digit = false;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    saw_digit = true;
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        saw_digit = true;
                        i += 1;
                    }
                }
                let raw: String = chars[start..i].iter().collect();
                if !saw_digit {
                    return Err(ParseError {
                        source_name: source_name.to_string(),
                        line: line_no,
                        col,
                        kind: ParseErrorKind::Syntax,
                        token: raw.clone(),
                        message: "malformed number".into(),
                    });
                }
                let v: f64 = raw.parse().map_err(|_| ParseError {
                    source_name: source_name.to_string(),
                    line: line_no,
                    col,
                    kind: ParseErrorKind::Syntax,
                    token: raw.clone(),
                    message: "malformed number".into(),
                })?;
                toks.push((Tok::Number(v, raw), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                let raw: String = chars[start..i].iter().collect();
                toks.push((Tok::Ident(raw), col));
            }
            other => {
                return Err(ParseError {
                    source_name: source_name.to_string(),
                    line: line_no,
                    col,
                    kind: ParseErrorKind::Syntax,
                    token: other.to_string(),
                    message: "unexpected character".into(),
                });
            }
        }
    }
    Ok(toks)
}

impl<'a> Parser<'a> {
    fn err(
        &self,
        lt: &LineToks,
        col: usize,
        kind: ParseErrorKind,
        token: impl Into<String>,
        message: impl Into<String>,
    ) -> ParseError {
        ParseError {
            source_name: self.source_name.to_string(),
            line: lt.line_no,
            col,
            kind,
            token: token.into(),
            message: message.into(),
        }
    }

    fn err_here(
        &self,
        lt: &mut LineToks,
        kind: ParseErrorKind,
        message: impl Into<String>,
    ) -> ParseError {
        match lt.peek().cloned() {
            Some((tok, col)) => self.err(lt, col, kind, tok.describe(), message),
            None => self.err(lt, lt.len_col, kind, "end of line", message),
        }
    }

    fn expect_ident(&self, lt: &mut LineToks, what: &str) -> Result<(String, usize), ParseError> {
        match lt.next() {
            Some((Tok::Ident(s), col)) => Ok((s, col)),
            Some((tok, col)) => Err(self.err(
                lt,
                col,
                ParseErrorKind::Syntax,
                tok.describe(),
                format!("expected {what}"),
            )),
            None => Err(self.err(
                lt,
                lt.len_col,
                ParseErrorKind::Syntax,
                "end of line",
                format!("expected {what}"),
            )),
        }
    }

    fn expect_tok(&self, lt: &mut LineToks, want: Tok, what: &str) -> Result<usize, ParseError> {
        match lt.next() {
            Some((tok, col)) if tok == want => Ok(col),
            Some((tok, col)) => Err(self.err(
                lt,
                col,
                ParseErrorKind::Syntax,
                tok.describe(),
                format!("expected {what}"),
            )),
            None => Err(self.err(
                lt,
                lt.len_col,
                ParseErrorKind::Syntax,
                "end of line",
                format!("expected {what}"),
            )),
        }
    }

    fn end_of_line(&self, lt: &mut LineToks) -> Result<(), ParseError> {
        if lt.peek().is_some() {
            return Err(self.err_here(
                lt,
                ParseErrorKind::Syntax,
                "unexpected trailing tokens",
            ));
        }
        Ok(())
    }

    fn define(
        &mut self,
        lt: &LineToks,
        name: &str,
        col: usize,
        kind: NameKind,
    ) -> Result<(), ParseError> {
        if RESERVED.contains(&name) {
            return Err(self.err(
                lt,
                col,
                ParseErrorKind::Syntax,
                name,
                "reserved word cannot be used as a name",
            ));
        }
        if self.names.insert(name.to_string(), kind).is_some() {
            return Err(self.err(
                lt,
                col,
                ParseErrorKind::DuplicateName,
                name,
                "name is already defined",
            ));
        }
        Ok(())
    }

    fn lookup(
        &self,
        lt: &LineToks,
        name: &str,
        col: usize,
        want: NameKind,
        what: &str,
    ) -> Result<(), ParseError> {
        match self.names.get(name) {
            None => Err(self.err(
                lt,
                col,
                ParseErrorKind::UndefinedIdentifier,
                name,
                "identifier is not defined",
            )),
            Some(kind) if *kind == want => Ok(()),
            Some(kind) => Err(self.err(
                lt,
                col,
                ParseErrorKind::Arity,
                name,
                format!("expected {what}, but `{name}` is {}", describe_kind(*kind)),
            )),
        }
    }

    fn statement(&mut self, lt: &mut LineToks) -> Result<(), ParseError> {
        let (kw, col) = self.expect_ident(lt, "statement keyword")?;
        match kw.as_str() {
            "param" => self.param_stmt(lt),
            "point" => self.decl_stmt(lt, DeclKind::Point),
            "line" => self.decl_stmt(lt, DeclKind::Line),
            "circle" => self.decl_stmt(lt, DeclKind::Circle),
            "export" => self.export_stmt(lt),
            other => Err(self.err(
                lt,
                col,
                ParseErrorKind::Syntax,
                other,
                "expected `param`, `point`, `line`, `circle`, or `export`",
            )),
        }
    }

    fn param_stmt(&mut self, lt: &mut LineToks) -> Result<(), ParseError> {
        let (name, col) = self.expect_ident(lt, "parameter name")?;
        self.expect_tok(lt, Tok::Colon, "`:`")?;
        let (kind_word, kcol) = self.expect_ident(lt, "`angle` or `length`")?;
        let kind = match kind_word.as_str() {
            "angle" => ParamKind::Angle,
            "length" => ParamKind::Length,
            other => {
                return Err(self.err(
                    lt,
                    kcol,
                    ParseErrorKind::Syntax,
                    other,
                    "expected `angle` or `length`",
                ))
            }
        };
        self.end_of_line(lt)?;
        let name_kind = match kind {
            ParamKind::Angle => NameKind::AngleParam,
            ParamKind::Length => NameKind::LengthParam,
        };
        self.define(lt, &name, col, name_kind)?;
        self.program.params.push(Param { name, kind });
        Ok(())
    }

    fn export_stmt(&mut self, lt: &mut LineToks) -> Result<(), ParseError> {
        loop {
            let (name, col) = self.expect_ident(lt, "point name")?;
            self.lookup(lt, &name, col, NameKind::Point, "a point")?;
            if self.exported.insert(name.clone(), ()).is_some() {
                return Err(self.err(
                    lt,
                    col,
                    ParseErrorKind::DuplicateName,
                    &name,
                    "point is already exported",
                ));
            }
            self.program.exports.push(name);
            match lt.peek() {
                Some((Tok::Comma, _)) => {
                    lt.next();
                }
                None => break,
                Some(_) => {
                    return Err(self.err_here(
                        lt,
                        ParseErrorKind::Syntax,
                        "expected `,` or end of line",
                    ))
                }
            }
        }
        Ok(())
    }

    fn decl_stmt(&mut self, lt: &mut LineToks, decl: DeclKind) -> Result<(), ParseError> {
        let (name, name_col) = self.expect_ident(lt, "object name")?;
        self.expect_tok(lt, Tok::Eq, "`=`")?;
        let op = match lt.peek().cloned() {
            Some((Tok::LParen, col)) => {
                if decl != DeclKind::Point {
                    return Err(self.err(
                        lt,
                        col,
                        ParseErrorKind::Arity,
                        "(",
                        format!("coordinate literals define points, not {decl}s"),
                    ));
                }
                self.coord_expr(lt)?
            }
            Some((Tok::Ident(_), _)) => self.call_expr(lt, decl)?,
            _ => {
                return Err(self.err_here(
                    lt,
                    ParseErrorKind::Syntax,
                    "expected a coordinate literal or an operation call",
                ))
            }
        };
        self.end_of_line(lt)?;
        let name_kind = match decl {
            DeclKind::Point => NameKind::Point,
            DeclKind::Line => NameKind::Linear,
            DeclKind::Circle => NameKind::Circle,
        };
        self.define(lt, &name, name_col, name_kind)?;
        self.program.steps.push(Step { decl, name, op });
        Ok(())
    }

    fn coord_expr(&mut self, lt: &mut LineToks) -> Result<StepOp, ParseError> {
        self.expect_tok(lt, Tok::LParen, "`(`")?;
        let x = self.expect_number(lt)?;
        self.expect_tok(lt, Tok::Comma, "`,`")?;
        let y = self.expect_number(lt)?;
        self.expect_tok(lt, Tok::RParen, "`)`")?;
        Ok(StepOp::Coord { x, y })
    }

    fn expect_number(&mut self, lt: &mut LineToks) -> Result<f64, ParseError> {
        match lt.next() {
            Some((Tok::Number(v, _), _)) => Ok(v),
            Some((tok, col)) => Err(self.err(
                lt,
                col,
                ParseErrorKind::Syntax,
                tok.describe(),
                "expected a number",
            )),
            None => Err(self.err(
                lt,
                lt.len_col,
                ParseErrorKind::Syntax,
                "end of line",
                "expected a number",
            )),
        }
    }

    /// Parses the argument list as raw (token, col) pairs up to `)`.
    fn raw_args(&mut self, lt: &mut LineToks) -> Result<Vec<(Tok, usize)>, ParseError> {
        self.expect_tok(lt, Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        loop {
            match lt.next() {
                Some((Tok::RParen, _)) => break,
                Some((tok, col)) => {
                    // `dist(P, Q)` appears inline as ident + parenthesized pair
                    if let Tok::Ident(id) = &tok {
                        if id == "dist" {
                            self.expect_tok(lt, Tok::LParen, "`(` after `dist`")?;
                            let (p, pcol) = self.expect_ident(lt, "point name")?;
                            self.expect_tok(lt, Tok::Comma, "`,`")?;
                            let (q, qcol) = self.expect_ident(lt, "point name")?;
                            self.expect_tok(lt, Tok::RParen, "`)`")?;
                            self.lookup(lt, &p, pcol, NameKind::Point, "a point")?;
                            self.lookup(lt, &q, qcol, NameKind::Point, "a point")?;
                            args.push((Tok::Ident(format!("dist {p} {q}")), col));
                            match lt.peek() {
                                Some((Tok::Comma, _)) => {
                                    lt.next();
                                }
                                Some((Tok::RParen, _)) => {}
                                _ => {
                                    return Err(self.err_here(
                                        lt,
                                        ParseErrorKind::Syntax,
                                        "expected `,` or `)`",
                                    ))
                                }
                            }
                            continue;
                        }
                    }
                    args.push((tok, col));
                    match lt.peek() {
                        Some((Tok::Comma, _)) => {
                            lt.next();
                        }
                        Some((Tok::RParen, _)) => {}
                        _ => {
                            return Err(self.err_here(
                                lt,
                                ParseErrorKind::Syntax,
                                "expected `,` or `)`",
                            ))
                        }
                    }
                }
                None => {
                    return Err(self.err(
                        lt,
                        lt.len_col,
                        ParseErrorKind::Syntax,
                        "end of line",
                        "unterminated argument list",
                    ))
                }
            }
        }
        Ok(args)
    }

    fn arg_point(&self, lt: &LineToks, arg: &(Tok, usize)) -> Result<String, ParseError> {
        match &arg.0 {
            Tok::Ident(name) if !name.starts_with("dist ") => {
                self.lookup(lt, name, arg.1, NameKind::Point, "a point")?;
                Ok(name.clone())
            }
            tok => Err(self.err(
                lt,
                arg.1,
                ParseErrorKind::Arity,
                tok.describe(),
                "expected a point name",
            )),
        }
    }

    fn arg_object(&self, lt: &LineToks, arg: &(Tok, usize)) -> Result<(String, bool), ParseError> {
        // Returns (name, is_circle) for intersect operands.
        match &arg.0 {
            Tok::Ident(name) if !name.starts_with("dist ") => match self.names.get(name) {
                Some(NameKind::Linear) => Ok((name.clone(), false)),
                Some(NameKind::Circle) => Ok((name.clone(), true)),
                Some(kind) => Err(self.err(
                    lt,
                    arg.1,
                    ParseErrorKind::Arity,
                    name,
                    format!(
                        "expected a line or circle, but `{name}` is {}",
                        describe_kind(*kind)
                    ),
                )),
                None => Err(self.err(
                    lt,
                    arg.1,
                    ParseErrorKind::UndefinedIdentifier,
                    name,
                    "identifier is not defined",
                )),
            },
            tok => Err(self.err(
                lt,
                arg.1,
                ParseErrorKind::Arity,
                tok.describe(),
                "expected a line or circle name",
            )),
        }
    }

    fn arg_linear(&self, lt: &LineToks, arg: &(Tok, usize)) -> Result<String, ParseError> {
        match &arg.0 {
            Tok::Ident(name) if !name.starts_with("dist ") => {
                self.lookup(lt, name, arg.1, NameKind::Linear, "a line")?;
                Ok(name.clone())
            }
            tok => Err(self.err(
                lt,
                arg.1,
                ParseErrorKind::Arity,
                tok.describe(),
                "expected a line name",
            )),
        }
    }

    fn arity_check(
        &self,
        lt: &LineToks,
        op: &str,
        args: &[(Tok, usize)],
        want: usize,
        col: usize,
    ) -> Result<(), ParseError> {
        if args.len() != want {
            return Err(self.err(
                lt,
                col,
                ParseErrorKind::Arity,
                op,
                format!("`{op}` takes {want} arguments, got {}", args.len()),
            ));
        }
        Ok(())
    }

    fn call_expr(&mut self, lt: &mut LineToks, decl: DeclKind) -> Result<StepOp, ParseError> {
        let (op_name, op_col) = self.expect_ident(lt, "operation name")?;
        let args = self.raw_args(lt)?;
        let pick = self.parse_pick(lt)?;

        let result_decl = match op_name.as_str() {
            "midpoint" | "intersect" => DeclKind::Point,
            "line_through" | "perpendicular_bisector" | "perpendicular_at"
            | "angle_bisector" | "given_angle" => DeclKind::Line,
            "circle" => DeclKind::Circle,
            other => {
                return Err(self.err(
                    lt,
                    op_col,
                    ParseErrorKind::Syntax,
                    other,
                    "unknown operation",
                ))
            }
        };
        if result_decl != decl {
            return Err(self.err(
                lt,
                op_col,
                ParseErrorKind::Arity,
                &op_name,
                format!("`{op_name}` produces a {result_decl}, declared as {decl}"),
            ));
        }
        if pick.is_some() && op_name != "intersect" {
            return Err(self.err(
                lt,
                op_col,
                ParseErrorKind::Syntax,
                &op_name,
                "only `intersect` takes a pick hint",
            ));
        }

        match op_name.as_str() {
            "line_through" => {
                self.arity_check(lt, "line_through", &args, 2, op_col)?;
                Ok(StepOp::LineThrough {
                    p: self.arg_point(lt, &args[0])?,
                    q: self.arg_point(lt, &args[1])?,
                })
            }
            "midpoint" => {
                self.arity_check(lt, "midpoint", &args, 2, op_col)?;
                Ok(StepOp::Midpoint {
                    p: self.arg_point(lt, &args[0])?,
                    q: self.arg_point(lt, &args[1])?,
                })
            }
            "perpendicular_bisector" => {
                self.arity_check(lt, "perpendicular_bisector", &args, 2, op_col)?;
                Ok(StepOp::PerpendicularBisector {
                    p: self.arg_point(lt, &args[0])?,
                    q: self.arg_point(lt, &args[1])?,
                })
            }
            "perpendicular_at" => {
                self.arity_check(lt, "perpendicular_at", &args, 2, op_col)?;
                Ok(StepOp::PerpendicularAt {
                    line: self.arg_linear(lt, &args[0])?,
                    p: self.arg_point(lt, &args[1])?,
                })
            }
            "angle_bisector" => {
                self.arity_check(lt, "angle_bisector", &args, 3, op_col)?;
                Ok(StepOp::AngleBisector {
                    vertex: self.arg_point(lt, &args[0])?,
                    arm1: self.arg_point(lt, &args[1])?,
                    arm2: self.arg_point(lt, &args[2])?,
                })
            }
            "intersect" => {
                self.arity_check(lt, "intersect", &args, 2, op_col)?;
                let (a, a_circle) = self.arg_object(lt, &args[0])?;
                let (b, b_circle) = self.arg_object(lt, &args[1])?;
                let two_valued = a_circle || b_circle;
                if two_valued && pick.is_none() {
                    return Err(self.err(
                        lt,
                        op_col,
                        ParseErrorKind::MissingPick,
                        "intersect",
                        "two-valued intersection needs a `pick` hint",
                    ));
                }
                if !two_valued && pick.is_some() {
                    return Err(self.err(
                        lt,
                        op_col,
                        ParseErrorKind::Syntax,
                        "pick",
                        "line-line intersection is single-valued; drop the pick hint",
                    ));
                }
                Ok(StepOp::Intersect { a, b, pick })
            }
            "given_angle" => {
                self.arity_check(lt, "given_angle", &args, 4, op_col)?;
                let origin = self.arg_point(lt, &args[0])?;
                let base = self.arg_point(lt, &args[1])?;
                let angle = match &args[2].0 {
                    Tok::Number(v, _) => AngleExpr::Literal(*v),
                    Tok::Ident(name) if !name.starts_with("dist ") => {
                        self.lookup(lt, name, args[2].1, NameKind::AngleParam, "an angle param")?;
                        AngleExpr::Param(name.clone())
                    }
                    tok => {
                        return Err(self.err(
                            lt,
                            args[2].1,
                            ParseErrorKind::Arity,
                            tok.describe(),
                            "expected an angle literal or angle param",
                        ))
                    }
                };
                let side = match &args[3].0 {
                    Tok::Ident(s) if s == "ccw" => Side::Ccw,
                    Tok::Ident(s) if s == "cw" => Side::Cw,
                    tok => {
                        return Err(self.err(
                            lt,
                            args[3].1,
                            ParseErrorKind::Arity,
                            tok.describe(),
                            "expected `ccw` or `cw`",
                        ))
                    }
                };
                Ok(StepOp::GivenAngle {
                    origin,
                    base,
                    angle,
                    side,
                })
            }
            "circle" => {
                self.arity_check(lt, "circle", &args, 2, op_col)?;
                let center = self.arg_point(lt, &args[0])?;
                let radius = match &args[1].0 {
                    Tok::Number(v, _) => LengthExpr::Literal(*v),
                    Tok::Ident(name) => {
                        if let Some(rest) = name.strip_prefix("dist ") {
                            let mut it = rest.split(' ');
                            let p = it.next().unwrap_or_default().to_string();
                            let q = it.next().unwrap_or_default().to_string();
                            LengthExpr::Dist(p, q)
                        } else {
                            self.lookup(
                                lt,
                                name,
                                args[1].1,
                                NameKind::LengthParam,
                                "a length param",
                            )?;
                            LengthExpr::Param(name.clone())
                        }
                    }
                    tok => {
                        return Err(self.err(
                            lt,
                            args[1].1,
                            ParseErrorKind::Arity,
                            tok.describe(),
                            "expected a radius: literal, length param, or dist(P, Q)",
                        ))
                    }
                };
                Ok(StepOp::CircleAt { center, radius })
            }
            _ => unreachable!("op name validated above"),
        }
    }

    fn parse_pick(&mut self, lt: &mut LineToks) -> Result<Option<PickHint>, ParseError> {
        match lt.peek() {
            Some((Tok::Ident(s), _)) if s == "pick" => {
                lt.next();
            }
            _ => return Ok(None),
        }
        let (hint, col) = self.expect_ident(lt, "pick hint")?;
        let hint = match hint.as_str() {
            "upper" => PickHint::Upper,
            "lower" => PickHint::Lower,
            "closest_to" | "farthest_from" | "distinct_from" => {
                self.expect_tok(lt, Tok::LParen, "`(`")?;
                let (id, id_col) = self.expect_ident(lt, "point name")?;
                self.expect_tok(lt, Tok::RParen, "`)`")?;
                self.lookup(lt, &id, id_col, NameKind::Point, "a point")?;
                match hint.as_str() {
                    "closest_to" => PickHint::ClosestTo(id),
                    "farthest_from" => PickHint::FarthestFrom(id),
                    _ => PickHint::DistinctFrom(id),
                }
            }
            other => {
                return Err(self.err(
                    lt,
                    col,
                    ParseErrorKind::Syntax,
                    other,
                    "expected `closest_to`, `farthest_from`, `distinct_from`, `upper`, or `lower`",
                ))
            }
        };
        Ok(Some(hint))
    }
}

fn describe_kind(kind: NameKind) -> &'static str {
    match kind {
        NameKind::Point => "a point",
        NameKind::Linear => "a line",
        NameKind::Circle => "a circle",
        NameKind::AngleParam => "an angle param",
        NameKind::LengthParam => "a length param",
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_angle(a: &AngleExpr) -> String {
    match a {
        AngleExpr::Literal(v) => fmt_num(*v),
        AngleExpr::Param(name) => name.clone(),
    }
}

fn fmt_length(l: &LengthExpr) -> String {
    match l {
        LengthExpr::Literal(v) => fmt_num(*v),
        LengthExpr::Param(name) => name.clone(),
        LengthExpr::Dist(p, q) => format!("dist({p}, {q})"),
    }
}

/// Canonical text for a program. Comments are not preserved; statements are
/// emitted params first, then steps in order, then a single export line.
/// `parse(format(p))` is structurally identical to `p`.
pub fn format(p: &ConstructionProgram) -> String {
    let mut out = String::new();
    for param in &p.params {
        let kind = match param.kind {
            ParamKind::Angle => "angle",
            ParamKind::Length => "length",
        };
        out.push_str(&format!("param {}: {}\n", param.name, kind));
    }
    for step in &p.steps {
        let rhs = match &step.op {
            StepOp::Coord { x, y } => format!("({}, {})", fmt_num(*x), fmt_num(*y)),
            StepOp::LineThrough { p, q } => format!("line_through({p}, {q})"),
            StepOp::Midpoint { p, q } => format!("midpoint({p}, {q})"),
            StepOp::PerpendicularBisector { p, q } => {
                format!("perpendicular_bisector({p}, {q})")
            }
            StepOp::PerpendicularAt { line, p } => format!("perpendicular_at({line}, {p})"),
            StepOp::AngleBisector { vertex, arm1, arm2 } => {
                format!("angle_bisector({vertex}, {arm1}, {arm2})")
            }
            StepOp::Intersect { a, b, pick } => match pick {
                Some(h) => format!("intersect({a}, {b}) pick {h}"),
                None => format!("intersect({a}, {b})"),
            },
            StepOp::GivenAngle {
                origin,
                base,
                angle,
                side,
            } => {
                let side = match side {
                    Side::Ccw => "ccw",
                    Side::Cw => "cw",
                };
                format!("given_angle({origin}, {base}, {}, {side})", fmt_angle(angle))
            }
            StepOp::CircleAt { center, radius } => {
                format!("circle({center}, {})", fmt_length(radius))
            }
        };
        out.push_str(&format!("{} {} = {}\n", step.decl, step.name, rhs));
    }
    if !p.exports.is_empty() {
        out.push_str(&format!("export {}\n", p.exports.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> ScriptSource {
        ScriptSource::new("test.gcs", text)
    }

    #[test]
    fn smallest_program() {
        let p = parse(&src(
            "param theta: angle\npoint A = (0,0)\npoint B = (1,0)\n",
        ))
        .unwrap();
        assert_eq!(p.params.len(), 1);
        assert_eq!(p.steps.len(), 2);
        assert_eq!(p.params[0].kind, ParamKind::Angle);
        assert_eq!(p.steps[0].op, StepOp::Coord { x: 0.0, y: 0.0 });
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let p = parse(&src(
            "# heading\r\n\r\npoint A = (0, 0) # trailing comment\r\npoint B = (1, 0)\r\n",
        ))
        .unwrap();
        assert_eq!(p.steps.len(), 2);
    }

    #[test]
    fn missing_pick_is_reported() {
        let text = "point A = (0,0)\npoint B = (1,0)\ncircle c1 = circle(A, dist(A, B))\ncircle c2 = circle(B, dist(A, B))\npoint X = intersect(c1, c2)\n";
        let e = parse(&src(text)).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingPick);
        assert_eq!(e.line, 5);
    }

    #[test]
    fn pick_on_line_line_rejected() {
        let text = "point A = (0,0)\npoint B = (1,0)\npoint C = (0,1)\nline l1 = line_through(A, B)\nline l2 = line_through(A, C)\npoint X = intersect(l1, l2) pick upper\n";
        let e = parse(&src(text)).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn undefined_and_duplicate_names() {
        let e = parse(&src("point A = midpoint(B, C)\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndefinedIdentifier);
        assert_eq!(e.token, "B");

        let e = parse(&src("point A = (0,0)\npoint A = (1,0)\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateName);
        assert_eq!(e.line, 2);
    }

    #[test]
    fn arity_and_type_errors() {
        let e = parse(&src("point A = (0,0)\nline l = line_through(A)\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);

        let e = parse(&src(
            "point A = (0,0)\npoint B = (1,0)\nline l = line_through(A, B)\npoint X = midpoint(l, A)\n",
        ))
        .unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        assert_eq!(e.token, "l");
    }

    #[test]
    fn exports_must_name_points() {
        let e = parse(&src(
            "point A = (0,0)\npoint B = (1,0)\nline l = line_through(A, B)\nexport l\n",
        ))
        .unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
    }

    #[test]
    fn diagnostics_carry_position() {
        let e = parse(&src("point A = (0,0)\npoint B = (zzz,0)\n")).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.col > 0);
        let shown = e.to_string();
        assert!(shown.contains("test.gcs:2:"), "{shown}");
    }

    #[test]
    fn format_roundtrip_small() {
        let text = "param theta: angle\npoint A = (0, 0)\npoint B = (1.5, -2)\nline seed = given_angle(A, B, theta, ccw)\ncircle c = circle(A, dist(A, B))\npoint X = intersect(seed, c) pick upper\nexport A, B, X\n";
        let p = parse(&src(text)).unwrap();
        let formatted = format(&p);
        let p2 = parse(&src(&formatted)).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn given_angle_literal_and_sides() {
        let p = parse(&src(
            "point A = (0,0)\npoint B = (1,0)\nline r = given_angle(A, B, 36.5, cw)\n",
        ))
        .unwrap();
        match &p.steps[2].op {
            StepOp::GivenAngle { angle, side, .. } => {
                assert_eq!(*angle, AngleExpr::Literal(36.5));
                assert_eq!(*side, Side::Cw);
            }
            other => panic!("unexpected op {other:?}"),
        }
    }
}
