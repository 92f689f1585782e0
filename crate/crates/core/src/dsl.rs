//! Textual specification language: event type declarations plus recursive
//! term equations.
//!
//! Grammar (`//` comments, whitespace insignificant):
//!
//! ```text
//! spec      := (eventtype | equation)*
//! eventtype := "eventtype" IDENT "(" params? ")" "matches" template ";"
//! equation  := IDENT "=" term ";"
//! term      := union
//! union     := inter ("\/" inter)*            // lowest precedence, left-assoc
//! inter     := shuf ("/\" shuf)*              // left-assoc
//! shuf      := cat ("|" cat)*                 // left-assoc
//! cat       := atom+                          // juxtaposition, left-assoc
//! atom      := "empty" | pattern | IDENT | "(" term ")"
//!            | "{" "let" IDENT ";" term "}"
//! pattern   := IDENT "(" args? ")"
//! template  := JSON object syntax with bare IDENTs as variable leaves
//! ```
//!
//! The equation named `Main` is the entry point if present, otherwise the
//! first equation. Parsing resolves names and checks event-type arities but
//! does not check contractivity; callers decide when to enforce that.

use std::collections::BTreeMap;
use std::fmt;

use crate::data::{DataValue, Number};
use crate::events::{EventTypeDecl, EventTypeDecls};
use crate::terms::{BasicDataExpr, BuildError, TermExpr, TermSystem, VarName};

/// A specification document together with a label for diagnostics.
#[derive(Debug, Clone)]
pub struct SpecSource {
    pub text: String,
    pub origin: String,
}

impl SpecSource {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> SpecSource {
        SpecSource {
            text: text.into(),
            origin: origin.into(),
        }
    }

    pub fn from_text(text: impl Into<String>) -> SpecSource {
        SpecSource::new(text, "<string>")
    }
}

/// A source-located problem found while parsing or resolving a spec.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostic {
    pub message: String,
    /// 1-based line of the offending token.
    pub line: usize,
    /// 1-based column of the offending token.
    pub col: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// The result of a successful parse: declarations, the equation system,
/// and the name of the entry equation.
#[derive(Debug, Clone)]
pub struct ParsedSpec {
    pub decls: EventTypeDecls,
    pub system: TermSystem,
    pub main: String,
    equation_order: Vec<String>,
}

impl ParsedSpec {
    /// Equation names in source order (the first one is the default entry).
    pub fn equation_order(&self) -> &[String] {
        &self.equation_order
    }
}

/// Parses a specification document. On failure returns every diagnostic
/// found, each with a line/column location.
pub fn parse(src: &SpecSource) -> Result<ParsedSpec, Vec<Diagnostic>> {
    parse_str(&src.text)
}

/// Parses a specification from bare text.
pub fn parse_str(text: &str) -> Result<ParsedSpec, Vec<Diagnostic>> {
    let tokens = lex(text)?;
    let mut parser = Parser::new(tokens);
    parser.parse_spec();
    parser.finish()
}

/// Renders a spec canonically: declarations first (sorted by name), then
/// equations in source order, bodies fully parenthesized. The output
/// re-parses to a structurally identical spec.
pub fn pretty(spec: &ParsedSpec) -> String {
    let mut out = String::new();
    for decl in spec.decls.iter() {
        out.push_str("eventtype ");
        out.push_str(&decl.type_name);
        out.push('(');
        for (i, p) in decl.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(p.as_str());
        }
        out.push_str(") matches ");
        out.push_str(&decl.template.to_string());
        out.push_str(";\n");
    }
    if !spec.decls.is_empty() && !spec.equation_order.is_empty() {
        out.push('\n');
    }
    for name in &spec.equation_order {
        let id = spec
            .system
            .equation(name)
            .expect("equation_order names are defined");
        out.push_str(name);
        out.push_str(" = ");
        out.push_str(&spec.system.render(id));
        out.push_str(";\n");
    }
    out
}

const RESERVED: &[&str] = &["eventtype", "matches", "empty", "let"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(Number),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign,
    Union,
    Inter,
    Bar,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(n) => format!("number {}", DataValue::Num(*n)),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::LBrace => "\"{\"".into(),
            Tok::RBrace => "\"}\"".into(),
            Tok::LBracket => "\"[\"".into(),
            Tok::RBracket => "\"]\"".into(),
            Tok::Comma => "\",\"".into(),
            Tok::Semi => "\";\"".into(),
            Tok::Colon => "\":\"".into(),
            Tok::Assign => "\"=\"".into(),
            Tok::Union => "\"\\/\"".into(),
            Tok::Inter => "\"/\\\"".into(),
            Tok::Bar => "\"|\"".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Span {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, Vec<Diagnostic>> {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump!(),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '/' if chars.get(i + 1) == Some(&'\\') => {
                bump!();
                bump!();
                toks.push((Tok::Inter, span));
            }
            '\\' if chars.get(i + 1) == Some(&'/') => {
                bump!();
                bump!();
                toks.push((Tok::Union, span));
            }
            '(' => {
                bump!();
                toks.push((Tok::LParen, span));
            }
            ')' => {
                bump!();
                toks.push((Tok::RParen, span));
            }
            '{' => {
                bump!();
                toks.push((Tok::LBrace, span));
            }
            '}' => {
                bump!();
                toks.push((Tok::RBrace, span));
            }
            '[' => {
                bump!();
                toks.push((Tok::LBracket, span));
            }
            ']' => {
                bump!();
                toks.push((Tok::RBracket, span));
            }
            ',' => {
                bump!();
                toks.push((Tok::Comma, span));
            }
            ';' => {
                bump!();
                toks.push((Tok::Semi, span));
            }
            ':' => {
                bump!();
                toks.push((Tok::Colon, span));
            }
            '=' => {
                bump!();
                toks.push((Tok::Assign, span));
            }
            '|' => {
                bump!();
                toks.push((Tok::Bar, span));
            }
            '"' => {
                // Strings use JSON escaping; find the closing quote and let
                // serde_json decode the escapes.
                let start = i;
                bump!();
                let mut closed = false;
                while i < chars.len() {
                    match chars[i] {
                        '"' => {
                            bump!();
                            closed = true;
                            break;
                        }
                        '\\' => {
                            bump!();
                            if i < chars.len() {
                                bump!();
                            }
                        }
                        '\n' => break,
                        _ => bump!(),
                    }
                }
                if !closed {
                    diags.push(Diagnostic {
                        message: "unterminated string literal".into(),
                        line: span.line,
                        col: span.col,
                    });
                    continue;
                }
                let raw: String = chars[start..i].iter().collect();
                match serde_json::from_str::<String>(&raw) {
                    Ok(s) => toks.push((Tok::Str(s), span)),
                    Err(e) => diags.push(Diagnostic {
                        message: format!("invalid string literal: {e}"),
                        line: span.line,
                        col: span.col,
                    }),
                }
            }
            c if c.is_ascii_digit() || c == '-' => {
                let start = i;
                if c == '-' {
                    bump!();
                    if i >= chars.len() || !chars[i].is_ascii_digit() {
                        diags.push(Diagnostic {
                            message: "expected digits after \"-\"".into(),
                            line: span.line,
                            col: span.col,
                        });
                        continue;
                    }
                }
                let mut is_float = false;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                if i < chars.len()
                    && chars[i] == '.'
                    && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
                {
                    is_float = true;
                    bump!();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    is_float = true;
                    bump!();
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        bump!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
                let raw: String = chars[start..i].iter().collect();
                let num = if is_float {
                    raw.parse::<f64>().ok().map(Number::Float)
                } else {
                    raw.parse::<i64>().ok().map(Number::Int)
                };
                match num {
                    Some(n) => toks.push((Tok::Num(n), span)),
                    None => diags.push(Diagnostic {
                        message: format!("invalid number literal {raw:?}"),
                        line: span.line,
                        col: span.col,
                    }),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    bump!();
                }
                let word: String = chars[start..i].iter().collect();
                toks.push((Tok::Ident(word), span));
            }
            other => {
                diags.push(Diagnostic {
                    message: format!("unexpected character {other:?}"),
                    line: span.line,
                    col: span.col,
                });
                bump!();
            }
        }
    }
    toks.push((Tok::Eof, Span { line, col }));
    if diags.is_empty() {
        Ok(toks)
    } else {
        Err(diags)
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    diags: Vec<Diagnostic>,
    decls: Vec<EventTypeDecl>,
    decl_spans: BTreeMap<String, Span>,
    equations: Vec<(String, TermExpr)>,
    equation_spans: BTreeMap<String, Span>,
    /// Bare identifiers used as equation references, for post-parse checks.
    refs: Vec<(String, Span)>,
    /// Pattern uses (type name, arity), for post-parse checks.
    pattern_uses: Vec<(String, usize, Span)>,
}

impl Parser {
    fn new(toks: Vec<(Tok, Span)>) -> Parser {
        Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
            decls: Vec::new(),
            decl_spans: BTreeMap::new(),
            equations: Vec::new(),
            equation_spans: BTreeMap::new(),
            refs: Vec::new(),
            pattern_uses: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn peek2(&self) -> &Tok {
        self.toks
            .get(self.pos + 1)
            .map(|(t, _)| t)
            .unwrap_or(&Tok::Eof)
    }

    fn advance(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&mut self, message: impl Into<String>) {
        let span = self.peek_span();
        self.error_at(span, message);
    }

    fn error_at(&mut self, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            message: message.into(),
            line: span.line,
            col: span.col,
        });
    }

    fn expect(&mut self, tok: Tok, what: &str) -> bool {
        if *self.peek() == tok {
            self.advance();
            true
        } else {
            let found = self.peek().describe();
            self.error_here(format!("expected {what}, found {found}"));
            false
        }
    }

    /// Skips past the next `;` (or to end of input) after an error so the
    /// rest of the document still gets checked.
    fn recover_to_semi(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi => {
                    self.advance();
                    return;
                }
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn ident(&mut self, what: &str) -> Option<(String, Span)> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Some((s, span))
            }
            Tok::Ident(s) => {
                self.error_here(format!("{s:?} is a reserved word, expected {what}"));
                None
            }
            other => {
                self.error_here(format!("expected {what}, found {}", other.describe()));
                None
            }
        }
    }

    fn parse_spec(&mut self) {
        loop {
            match self.peek().clone() {
                Tok::Eof => return,
                Tok::Ident(s) if s == "eventtype" => {
                    if !self.parse_eventtype() {
                        self.recover_to_semi();
                    }
                }
                Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                    if !self.parse_equation() {
                        self.recover_to_semi();
                    }
                }
                other => {
                    self.error_here(format!(
                        "expected an event type declaration or an equation, found {}",
                        other.describe()
                    ));
                    self.recover_to_semi();
                }
            }
        }
    }

    fn parse_eventtype(&mut self) -> bool {
        self.advance(); // "eventtype"
        let Some((name, name_span)) = self.ident("an event type name") else {
            return false;
        };
        if !self.expect(Tok::LParen, "\"(\"") {
            return false;
        }
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let Some((p, _)) = self.ident("a parameter name") else {
                    return false;
                };
                params.push(VarName::new(p).expect("lexer produces identifiers"));
                match self.peek() {
                    Tok::Comma => {
                        self.advance();
                    }
                    _ => break,
                }
            }
        }
        if !self.expect(Tok::RParen, "\")\"") {
            return false;
        }
        match self.peek().clone() {
            Tok::Ident(s) if s == "matches" => {
                self.advance();
            }
            other => {
                self.error_here(format!("expected \"matches\", found {}", other.describe()));
                return false;
            }
        }
        let template_span = self.peek_span();
        let Some(template) = self.parse_data_expr() else {
            return false;
        };
        if !self.expect(Tok::Semi, "\";\"") {
            return false;
        }
        if self.decl_spans.contains_key(&name) {
            self.error_at(name_span, format!("duplicate event type {name:?}"));
            return true;
        }
        match EventTypeDecl::new(name.clone(), params, template) {
            Ok(decl) => {
                self.decls.push(decl);
                self.decl_spans.insert(name, name_span);
            }
            Err(e) => self.error_at(template_span, e.to_string()),
        }
        true
    }

    fn parse_equation(&mut self) -> bool {
        let Some((name, name_span)) = self.ident("an equation name") else {
            return false;
        };
        if !self.expect(Tok::Assign, "\"=\"") {
            return false;
        }
        let Some(body) = self.parse_term() else {
            return false;
        };
        if !self.expect(Tok::Semi, "\";\"") {
            return false;
        }
        if self.equation_spans.contains_key(&name) {
            self.error_at(name_span, format!("duplicate equation {name:?}"));
            return true;
        }
        self.equation_spans.insert(name.clone(), name_span);
        self.equations.push((name, body));
        true
    }

    fn parse_term(&mut self) -> Option<TermExpr> {
        let mut left = self.parse_inter()?;
        while *self.peek() == Tok::Union {
            self.advance();
            let right = self.parse_inter()?;
            left = TermExpr::or(left, right);
        }
        Some(left)
    }

    fn parse_inter(&mut self) -> Option<TermExpr> {
        let mut left = self.parse_shuf()?;
        while *self.peek() == Tok::Inter {
            self.advance();
            let right = self.parse_shuf()?;
            left = TermExpr::and(left, right);
        }
        Some(left)
    }

    fn parse_shuf(&mut self) -> Option<TermExpr> {
        let mut left = self.parse_cat()?;
        while *self.peek() == Tok::Bar {
            self.advance();
            let right = self.parse_cat()?;
            left = TermExpr::shuffle(left, right);
        }
        Some(left)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen | Tok::LBrace => true,
            Tok::Ident(s) => s == "empty" || !RESERVED.contains(&s.as_str()),
            _ => false,
        }
    }

    fn parse_cat(&mut self) -> Option<TermExpr> {
        if !self.starts_atom() {
            let found = self.peek().describe();
            self.error_here(format!("expected a term, found {found}"));
            return None;
        }
        let mut left = self.parse_atom()?;
        while self.starts_atom() {
            let right = self.parse_atom()?;
            left = TermExpr::cat(left, right);
        }
        Some(left)
    }

    fn parse_atom(&mut self) -> Option<TermExpr> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Ident(s) if s == "empty" => {
                self.advance();
                Some(TermExpr::Empty)
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                // `name(` is ambiguous: a pattern, or a reference followed
                // by a parenthesized term. A known equation name resolves
                // to a reference; otherwise try the pattern reading and
                // fall back to the reference on failure (unless the name
                // is a declared event type, whose bad arguments should be
                // reported as such).
                if *self.peek2() == Tok::LParen && !self.equation_spans.contains_key(&s) {
                    let save_pos = self.pos;
                    let save_diags = self.diags.len();
                    if let Some(pat) = self.parse_pattern(&s, span) {
                        return Some(pat);
                    }
                    if self.decl_spans.contains_key(&s) {
                        return None;
                    }
                    self.pos = save_pos;
                    self.diags.truncate(save_diags);
                }
                self.advance();
                self.refs.push((s.clone(), span));
                Some(TermExpr::Ref(s))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.parse_term()?;
                if !self.expect(Tok::RParen, "\")\"") {
                    return None;
                }
                Some(inner)
            }
            Tok::LBrace => {
                self.advance();
                match self.peek().clone() {
                    Tok::Ident(s) if s == "let" => {
                        self.advance();
                    }
                    other => {
                        self.error_here(format!(
                            "expected \"let\", found {}",
                            other.describe()
                        ));
                        return None;
                    }
                }
                let (var, _) = self.ident("a variable name")?;
                if !self.expect(Tok::Semi, "\";\"") {
                    return None;
                }
                let body = self.parse_term()?;
                if !self.expect(Tok::RBrace, "\"}\"") {
                    return None;
                }
                Some(TermExpr::let_(&var, body))
            }
            other => {
                self.error_here(format!("expected a term, found {}", other.describe()));
                None
            }
        }
    }

    /// Parses `name(args...)` with the name and `(` still pending.
    fn parse_pattern(&mut self, name: &str, span: Span) -> Option<TermExpr> {
        self.advance();
        self.advance();
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.parse_data_expr()?);
                match self.peek() {
                    Tok::Comma => {
                        self.advance();
                    }
                    _ => break,
                }
            }
        }
        if !self.expect(Tok::RParen, "\")\"") {
            return None;
        }
        self.pattern_uses.push((name.to_string(), args.len(), span));
        Some(TermExpr::pat(name, args))
    }

    fn parse_data_expr(&mut self) -> Option<BasicDataExpr> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Some(BasicDataExpr::Lit(DataValue::Str(s)))
            }
            Tok::Num(n) => {
                self.advance();
                Some(BasicDataExpr::Lit(DataValue::Num(n)))
            }
            Tok::Ident(s) if s == "true" => {
                self.advance();
                Some(BasicDataExpr::Lit(DataValue::Bool(true)))
            }
            Tok::Ident(s) if s == "false" => {
                self.advance();
                Some(BasicDataExpr::Lit(DataValue::Bool(false)))
            }
            Tok::Ident(s) if s == "null" => {
                self.advance();
                Some(BasicDataExpr::Lit(DataValue::Null))
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Some(BasicDataExpr::Var(
                    VarName::new(s).expect("lexer produces identifiers"),
                ))
            }
            Tok::LBrace => {
                self.advance();
                let mut fields: Vec<(String, BasicDataExpr)> = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        let key = match self.peek().clone() {
                            Tok::Str(s) => {
                                self.advance();
                                s
                            }
                            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                                self.advance();
                                s
                            }
                            other => {
                                self.error_here(format!(
                                    "expected an object key, found {}",
                                    other.describe()
                                ));
                                return None;
                            }
                        };
                        if !self.expect(Tok::Colon, "\":\"") {
                            return None;
                        }
                        let value = self.parse_data_expr()?;
                        fields.push((key, value));
                        match self.peek() {
                            Tok::Comma => {
                                self.advance();
                            }
                            _ => break,
                        }
                    }
                }
                if !self.expect(Tok::RBrace, "\"}\"") {
                    return None;
                }
                Some(BasicDataExpr::Object(fields))
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        items.push(self.parse_data_expr()?);
                        match self.peek() {
                            Tok::Comma => {
                                self.advance();
                            }
                            _ => break,
                        }
                    }
                }
                if !self.expect(Tok::RBracket, "\"]\"") {
                    return None;
                }
                Some(BasicDataExpr::Array(items))
            }
            other => {
                self.error_here(format!(
                    "expected a data expression, found {}",
                    other.describe()
                ));
                None
            }
        }
    }

    fn finish(mut self) -> Result<ParsedSpec, Vec<Diagnostic>> {
        // Name resolution and arity checks run even when some items failed,
        // so one pass reports as much as possible.
        let decl_map: BTreeMap<String, usize> = self
            .decls
            .iter()
            .map(|d| (d.type_name.clone(), d.arity()))
            .collect();
        for (name, span) in std::mem::take(&mut self.refs) {
            if !self.equation_spans.contains_key(&name) {
                let hint = if decl_map.contains_key(&name) {
                    format!(" (write {name}(...) to use the event type)")
                } else {
                    String::new()
                };
                self.error_at(span, format!("undefined equation {name:?}{hint}"));
            }
        }
        for (name, arity, span) in std::mem::take(&mut self.pattern_uses) {
            match decl_map.get(&name) {
                None => self.error_at(span, format!("undeclared event type {name:?}")),
                Some(&expected) if expected != arity => self.error_at(
                    span,
                    format!(
                        "event type {name:?} expects {expected} argument(s), got {arity}"
                    ),
                ),
                Some(_) => {}
            }
        }
        if self.equations.is_empty() && self.diags.is_empty() {
            self.diags.push(Diagnostic {
                message: "specification defines no equations".into(),
                line: 1,
                col: 1,
            });
        }
        if !self.diags.is_empty() {
            return Err(self.diags);
        }

        let equation_order: Vec<String> =
            self.equations.iter().map(|(n, _)| n.clone()).collect();
        let system = match TermSystem::from_equations(self.equations) {
            Ok(sys) => sys,
            Err(BuildError::AliasCycle(name)) => {
                let span = self.equation_spans[&name];
                return Err(vec![Diagnostic {
                    message: format!(
                        "equation {name:?} is part of an alias cycle with no operator"
                    ),
                    line: span.line,
                    col: span.col,
                }]);
            }
            // Duplicates, undefined names, and emptiness were diagnosed above.
            Err(e) => unreachable!("already validated: {e}"),
        };
        let decls = match EventTypeDecls::from_decls(self.decls) {
            Ok(d) => d,
            Err(e) => unreachable!("already validated: {e}"),
        };
        let main = if equation_order.iter().any(|n| n == "Main") {
            "Main".to_string()
        } else {
            equation_order[0].clone()
        };
        Ok(ParsedSpec {
            decls,
            system,
            main,
            equation_order,
        })
    }
}
