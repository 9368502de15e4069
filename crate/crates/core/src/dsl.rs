//! Textual object-model language.
//!
//! ```text
//! model      := "model" IDENT ";" { typedecl | classdecl | assocdecl }
//! typedecl   := "type" IDENT ";"
//! classdecl  := "class" IDENT ["abstract"] ["extends" IDENT]
//!               "{" "attrs:" attr {"," attr} ";" "id:" IDENT ";" "}"
//! attr       := IDENT ":" IDENT
//! assocdecl  := "assoc" IDENT "{" "src:" IDENT mult ";" "dst:" IDENT mult ";" "}"
//! mult       := "one" | "many"
//! ```
//!
//! Whitespace is insignificant and `//` starts a line comment. Keywords are
//! contextual, so an attribute may be called `id` or `type`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    validate_with_positions, Association, Attribute, Class, Diagnostic, DiagnosticCode,
    Multiplicity, ObjectModel, SourceMap,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    /// The source parsed but violates a model invariant; carries the first
    /// diagnostic in validation order.
    #[error("{0}")]
    Invalid(Diagnostic),
}

impl ParseError {
    pub fn code(&self) -> DiagnosticCode {
        match self {
            ParseError::Syntax { .. } => DiagnosticCode::Syntax,
            ParseError::Invalid(d) => d.code,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            ParseError::Syntax { line, col, message } => {
                Diagnostic::new(DiagnosticCode::Syntax, "", message.clone()).at(Some((*line, *col)))
            }
            ParseError::Invalid(d) => d.clone(),
        }
    }
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<ObjectModel, ParseError> {
    check_source(text).map_err(|mut diags| {
        let first = diags.remove(0);
        match first.code {
            DiagnosticCode::Syntax => ParseError::Syntax {
                line: first.line.unwrap_or(0),
                col: first.col.unwrap_or(0),
                message: first.message,
            },
            _ => ParseError::Invalid(first),
        }
    })
}

/// Parses `text` and reports every problem found, with source positions.
///
/// A syntax error stops parsing, so it is always reported alone.
pub fn check_source(text: &str) -> Result<ObjectModel, Vec<Diagnostic>> {
    let tokens = lex(text).map_err(|e| vec![e])?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        spans: SourceMap::new(),
    };
    let model = parser.model().map_err(|e| vec![e])?;
    let diags = validate_with_positions(&model, &parser.spans);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(diags)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticCode::Syntax, "", message).at(Some((line, col)))
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == '/' {
            chars.next();
            col += 1;
            if chars.peek() != Some(&'/') {
                return Err(syntax(start_line, start_col, "unexpected `/`"));
            }
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(ident),
                line: start_line,
                col: start_col,
            });
        } else if matches!(c, ';' | ':' | ',' | '{' | '}') {
            chars.next();
            col += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                line: start_line,
                col: start_col,
            });
        } else {
            return Err(syntax(
                start_line,
                start_col,
                format!("unexpected character `{c}`"),
            ));
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    spans: SourceMap,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn here(&self) -> (usize, usize) {
        let t = self.peek();
        (t.line, t.col)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        syntax(
            t.line,
            t.col,
            format!("expected {expected}, found {}", Self::describe(&t.tok)),
        )
    }

    fn ident(&mut self, what: &str) -> Result<(String, (usize, usize)), Diagnostic> {
        let at = self.here();
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, at))
            }
            _ => Err(self.error(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn punct(&mut self, p: char) -> Result<(), Diagnostic> {
        if self.peek().tok == Tok::Punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    /// `label:` as used in `attrs:`, `id:`, `src:`, `dst:`.
    fn label(&mut self, label: &str) -> Result<(), Diagnostic> {
        self.keyword(label)?;
        self.punct(':')
    }

    fn model(&mut self) -> Result<ObjectModel, Diagnostic> {
        self.keyword("model")?;
        let (name, _) = self.ident("model name")?;
        self.punct(';')?;
        let mut model = ObjectModel::new(name);
        loop {
            if self.peek().tok == Tok::Eof {
                return Ok(model);
            }
            if self.at_keyword("type") {
                self.pos += 1;
                let (name, at) = self.ident("type name")?;
                self.punct(';')?;
                self.spans.entry(format!("type/{name}")).or_insert(at);
                model.datatypes.push(name);
            } else if self.at_keyword("class") {
                let class = self.class()?;
                model.classes.push(class);
            } else if self.at_keyword("assoc") {
                let assoc = self.assoc()?;
                model.associations.push(assoc);
            } else {
                return Err(self.error("`type`, `class` or `assoc`"));
            }
        }
    }

    fn class(&mut self) -> Result<Class, Diagnostic> {
        self.keyword("class")?;
        let (name, at) = self.ident("class name")?;
        let path = format!("class/{name}");
        self.spans.entry(path.clone()).or_insert(at);
        let mut is_abstract = false;
        if self.at_keyword("abstract") {
            self.pos += 1;
            is_abstract = true;
        }
        let mut parent = None;
        if self.at_keyword("extends") {
            self.pos += 1;
            let (p, pat) = self.ident("parent class name")?;
            self.spans.entry(format!("{path}/parent")).or_insert(pat);
            parent = Some(p);
        }
        self.punct('{')?;
        self.label("attrs")?;
        let mut attr_set = Vec::new();
        loop {
            let (attr, aat) = self.ident("attribute name")?;
            self.punct(':')?;
            let (dtype, _) = self.ident("attribute type")?;
            self.spans.entry(format!("{path}/{attr}")).or_insert(aat);
            attr_set.push(Attribute::new(attr, dtype));
            if self.peek().tok == Tok::Punct(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.punct(';')?;
        let id_at = self.here();
        self.label("id")?;
        let (id, _) = self.ident("id attribute name")?;
        self.spans.entry(format!("{path}/id")).or_insert(id_at);
        self.punct(';')?;
        self.punct('}')?;
        Ok(Class {
            name,
            attr_set,
            id,
            parent,
            is_abstract,
        })
    }

    fn multiplicity(&mut self) -> Result<Multiplicity, Diagnostic> {
        if self.at_keyword("one") {
            self.pos += 1;
            Ok(Multiplicity::One)
        } else if self.at_keyword("many") {
            self.pos += 1;
            Ok(Multiplicity::Many)
        } else {
            Err(self.error("`one` or `many`"))
        }
    }

    fn assoc(&mut self) -> Result<Association, Diagnostic> {
        self.keyword("assoc")?;
        let (name, at) = self.ident("association name")?;
        let path = format!("assoc/{name}");
        self.spans.entry(path.clone()).or_insert(at);
        self.punct('{')?;
        self.label("src")?;
        let (src, sat) = self.ident("source class")?;
        let src_multiplicity = self.multiplicity()?;
        self.punct(';')?;
        self.label("dst")?;
        let (dst, dat) = self.ident("destination class")?;
        let dst_multiplicity = self.multiplicity()?;
        self.punct(';')?;
        self.punct('}')?;
        self.spans.entry(format!("{path}/src")).or_insert(sat);
        self.spans.entry(format!("{path}/dst")).or_insert(dat);
        Ok(Association {
            name,
            src,
            dst,
            src_multiplicity,
            dst_multiplicity,
        })
    }
}

/// Renders `model` back to source. `parse_model(&print_model(m))` yields `m`
/// for every valid model.
pub fn print_model(model: &ObjectModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {};", model.name);
    if !model.datatypes.is_empty() {
        out.push('\n');
        for t in &model.datatypes {
            let _ = writeln!(out, "type {t};");
        }
    }
    for class in &model.classes {
        out.push('\n');
        let _ = write!(out, "class {}", class.name);
        if class.is_abstract {
            out.push_str(" abstract");
        }
        if let Some(p) = &class.parent {
            let _ = write!(out, " extends {p}");
        }
        out.push_str(" {\n    attrs: ");
        let attrs: Vec<String> = class
            .attr_set
            .iter()
            .map(|a| format!("{}: {}", a.name, a.dtype))
            .collect();
        out.push_str(&attrs.join(", "));
        let _ = writeln!(out, ";\n    id: {};\n}}", class.id);
    }
    for assoc in &model.associations {
        out.push('\n');
        let _ = writeln!(
            out,
            "assoc {} {{\n    src: {} {};\n    dst: {} {};\n}}",
            assoc.name, assoc.src, assoc.src_multiplicity, assoc.dst, assoc.dst_multiplicity
        );
    }
    out
}
