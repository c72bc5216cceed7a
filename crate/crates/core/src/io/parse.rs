//! Recursive-descent parser for the `.neg` diagram format.

use thiserror::Error;

use crate::diagram::{
    validate, AnalysisBlock, Diagram, NodeRole, RawDiagram, RawNode, RawOutcome, ValidationError,
};
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid diagram: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationError>),
}

pub fn parse(text: &str) -> Result<Diagram, ParseError> {
    let raw = parse_raw(text)?;
    validate(&raw).map_err(ParseError::Invalid)
}

pub fn parse_raw(text: &str) -> Result<RawDiagram, SyntaxError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, line: 1, column: 1 };
    let raw = p.diagram()?;
    p.skip_trivia();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected text after the closing brace"));
    }
    Ok(raw)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '-'
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError { line: self.line, column: self.column, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => self.skip_line(),
                Some('/') if self.peek_at(1) == Some('/') => self.skip_line(),
                _ => break,
            }
        }
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                break;
            }
        }
    }

    fn at_punct(&mut self, s: &str) -> bool {
        self.skip_trivia();
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn eat_punct(&mut self, s: &str) -> bool {
        if self.at_punct(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`{}", self.found())))
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(c) => format!(", found `{c}`"),
            None => ", found end of input".to_string(),
        }
    }

    fn at_ident(&mut self) -> bool {
        self.skip_trivia();
        self.peek().is_some_and(is_ident_start)
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            _ => return Err(self.error(format!("expected an identifier{}", self.found()))),
        }
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !is_ident_char(c) || (c == '-' && self.peek_at(1) == Some('>')) {
                break;
            }
            out.push(c);
            self.bump();
        }
        Ok(out)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        let (line, column) = (self.line, self.column);
        let word = self.ident()?;
        if word == kw {
            Ok(())
        } else {
            Err(SyntaxError { line, column, message: format!("expected `{kw}`, found `{word}`") })
        }
    }

    fn rational(&mut self) -> Result<Rational, SyntaxError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '.' | '/' | '-' | '+') {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        parse_rational(&text).ok_or(SyntaxError { line, column, message: format!("invalid number `{text}`") })
    }

    /// Reads an analysis value: everything up to whitespace, `;` or `}`.
    fn bare_value(&mut self) -> Result<String, SyntaxError> {
        self.skip_trivia();
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == ';' || c == '}' {
                break;
            }
            out.push(c);
            self.bump();
        }
        if out.is_empty() {
            return Err(self.error(format!("expected a value{}", self.found())));
        }
        Ok(out)
    }

    fn diagram(&mut self) -> Result<RawDiagram, SyntaxError> {
        self.keyword("negotiation")?;
        let mut raw = RawDiagram { name: self.ident()?, ..Default::default() };
        self.expect_punct("{")?;
        self.keyword("processes")?;
        while self.at_ident() {
            raw.processes.push(self.ident()?);
        }
        self.expect_punct(";")?;
        loop {
            if self.eat_punct("}") {
                break;
            }
            let (line, column) = (self.line, self.column);
            let word = self.ident()?;
            match word.as_str() {
                "node" => raw.nodes.push(self.node()?),
                "outcome" => raw.outcomes.push(self.outcome()?),
                "analysis" => raw.analyses.push(self.analysis()?),
                _ => {
                    return Err(SyntaxError {
                        line,
                        column,
                        message: format!("expected `node`, `outcome`, `analysis` or `}}`, found `{word}`"),
                    })
                }
            }
        }
        Ok(raw)
    }

    fn node(&mut self) -> Result<RawNode, SyntaxError> {
        let name = self.ident()?;
        self.expect_punct("[")?;
        let mut domain = Vec::new();
        while self.at_ident() {
            domain.push(self.ident()?);
        }
        self.expect_punct("]")?;
        let role = if self.at_ident() {
            let (line, column) = (self.line, self.column);
            match self.ident()?.as_str() {
                "init" => Some(NodeRole::Init),
                "final" => Some(NodeRole::Final),
                other => {
                    return Err(SyntaxError { line, column, message: format!("expected `init` or `final`, found `{other}`") })
                }
            }
        } else {
            None
        };
        self.expect_punct(";")?;
        Ok(RawNode { name, domain, role })
    }

    fn outcome(&mut self) -> Result<RawOutcome, SyntaxError> {
        let node = self.ident()?;
        if self.peek() != Some('.') {
            return Err(self.error(format!("expected `.` between node and outcome{}", self.found())));
        }
        self.bump();
        let outcome = self.ident()?;
        let mut out = RawOutcome { node, outcome, ..Default::default() };
        while self.at_ident() {
            let (line, column) = (self.line, self.column);
            let key = self.ident()?;
            match key.as_str() {
                "prob" => {
                    self.expect_punct("=")?;
                    out.prob = Some(self.rational()?);
                }
                "cost" => {
                    self.expect_punct("=")?;
                    out.cost = Some(self.rational()?);
                }
                "time" => {
                    self.expect_punct("(")?;
                    let p = self.ident()?;
                    self.expect_punct(")")?;
                    self.expect_punct("=")?;
                    out.time.push((p, self.rational()?));
                }
                _ => {
                    return Err(SyntaxError {
                        line,
                        column,
                        message: format!("unknown attribute `{key}` (expected prob, cost or time)"),
                    })
                }
            }
        }
        self.expect_punct("{")?;
        loop {
            if self.eat_punct("}") {
                break;
            }
            let p = self.ident()?;
            self.expect_punct("->")?;
            let mut targets = vec![self.ident()?];
            while self.eat_punct(",") {
                targets.push(self.ident()?);
            }
            self.expect_punct(";")?;
            out.moves.push((p, targets));
        }
        if out.moves.is_empty() {
            return Err(self.error("an outcome needs at least one move"));
        }
        Ok(out)
    }

    fn analysis(&mut self) -> Result<AnalysisBlock, SyntaxError> {
        let mut block = AnalysisBlock { name: self.ident()?, entries: Vec::new() };
        self.expect_punct("{")?;
        loop {
            if self.eat_punct("}") {
                break;
            }
            let key = self.ident()?;
            self.expect_punct("=")?;
            let value = self.bare_value()?;
            self.eat_punct(";");
            block.entries.push((key, value));
        }
        Ok(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn parses_minimal_diagram() {
        let d = parse(
            "negotiation t { processes p; node s [p] init; node f [p] final;
             outcome s.go prob=1 cost=0.5 time(p)=2 { p -> f; } }",
        )
        .unwrap();
        assert_eq!(d.nodes.len(), 2);
        let loc = d.find_location("s.go").unwrap();
        assert_eq!(d.annotations(loc).unwrap().cost, Some(ratio(1, 2)));
    }

    #[test]
    fn arrow_ends_identifiers() {
        let raw = parse_raw("negotiation x { processes a-b; node n-1 [a-b] init; node f [a-b] final; outcome n-1.o { a-b->f; } }")
            .unwrap();
        assert_eq!(raw.outcomes[0].moves, vec![("a-b".to_string(), vec!["f".to_string()])]);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_raw("negotiation x {\n  processes p;\n  node n [p] start;\n}").unwrap_err();
        assert_eq!((err.line, err.column), (3, 14));
        let err = parse_raw("negotiation x { processes p; outcome n.a prob=abc { p -> n; } }").unwrap_err();
        assert!(err.message.contains("invalid number"), "{err}");
    }

    #[test]
    fn analysis_blocks_keep_raw_values() {
        let raw = parse_raw(
            "negotiation x { processes p; node n [p] init; node f [p] final; outcome n.a { p -> f; }
             analysis q { framework=genkill; gen=n.a,n.a kill=n.a } }",
        )
        .unwrap();
        assert_eq!(raw.analyses[0].get("gen"), Some("n.a,n.a"));
        assert_eq!(raw.analyses[0].get("kill"), Some("n.a"));
    }

    #[test]
    fn validation_errors_surface() {
        let err = parse("negotiation x { processes p; node n [p] init; outcome n.a { p -> n; } }").unwrap_err();
        assert!(matches!(err, ParseError::Invalid(_)));
    }
}
