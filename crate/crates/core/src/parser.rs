//! Recursive-descent parser for the concrete syntax, and its inverse printer.
//!
//! ```text
//! program := rule*
//! rule    := term '.' | term ':-' term (',' term)* '.'
//! query   := term (',' term)* '.'?
//! term    := VAR | IDENT | IDENT '(' term (',' term)* ')'
//! VAR     := [A-Z][A-Za-z0-9_]*
//! IDENT   := [a-z][A-Za-z0-9_]*
//! ```
//!
//! Whitespace may appear between any two tokens and `%` comments run to the
//! end of the line.

use std::fmt;

use thiserror::Error;

use crate::term::{Program, Rule, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourcePosition {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourcePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{position}: expected {expected}, found {found}")]
    Unexpected {
        position: SourcePosition,
        expected: String,
        found: String,
    },
    #[error("{position}: rule head must be a compound term, found variable {name}")]
    BareVariableHead { position: SourcePosition, name: String },
}

impl ParseError {
    pub fn position(&self) -> SourcePosition {
        match self {
            ParseError::Unexpected { position, .. } | ParseError::BareVariableHead { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Period,
    Neck,
    Stray(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Var(s) => write!(f, "variable `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Period => f.write_str("`.`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Stray(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn word(&mut self, first: char) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn next_token(&mut self) -> (Tok, SourcePosition) {
        self.skip_trivia();
        let pos = SourcePosition {
            line: self.line,
            column: self.column,
        };
        let Some(c) = self.bump() else {
            return (Tok::Eof, pos);
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Period,
            ':' if self.chars.peek() == Some(&'-') => {
                self.bump();
                Tok::Neck
            }
            c if c.is_ascii_uppercase() => Tok::Var(self.word(c)),
            c if c.is_ascii_lowercase() => Tok::Ident(self.word(c)),
            c => Tok::Stray(c),
        };
        (tok, pos)
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: SourcePosition,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let mut lexer = Lexer::new(src);
        let (tok, pos) = lexer.next_token();
        Parser { lexer, tok, pos }
    }

    fn advance(&mut self) -> Tok {
        let (tok, pos) = self.lexer.next_token();
        self.pos = pos;
        std::mem::replace(&mut self.tok, tok)
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            position: self.pos,
            expected: expected.to_string(),
            found: self.tok.to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match &self.tok {
            Tok::Var(_) => match self.advance() {
                Tok::Var(name) => Ok(Term::Var(name)),
                _ => unreachable!(),
            },
            Tok::Ident(_) => {
                let Tok::Ident(name) = self.advance() else {
                    unreachable!()
                };
                if self.tok != Tok::LParen {
                    return Ok(Term::Compound(name, Vec::new()));
                }
                self.advance();
                let mut args = vec![self.term()?];
                loop {
                    match self.tok {
                        Tok::Comma => {
                            self.advance();
                            args.push(self.term()?);
                        }
                        Tok::RParen => {
                            self.advance();
                            break;
                        }
                        _ => return Err(self.error("`,` or `)`")),
                    }
                }
                Ok(Term::Compound(name, args))
            }
            _ => Err(self.error("term")),
        }
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let head_pos = self.pos;
        let head = self.term()?;
        let mut premises = Vec::new();
        match self.tok {
            Tok::Period => {}
            Tok::Neck => {
                self.advance();
                premises.push(self.term()?);
                while self.tok == Tok::Comma {
                    self.advance();
                    premises.push(self.term()?);
                }
            }
            _ => return Err(self.error("`.` or `:-`")),
        }
        self.expect(Tok::Period, "`,` or `.`")?;
        match head {
            Term::Var(name) => Err(ParseError::BareVariableHead {
                position: head_pos,
                name,
            }),
            head => Ok(Rule::new(head, premises).expect("compound head")),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src);
    let t = p.term()?;
    p.end()?;
    Ok(t)
}

pub fn parse_rule(src: &str) -> Result<Rule, ParseError> {
    let mut p = Parser::new(src);
    let r = p.rule()?;
    p.end()?;
    Ok(r)
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src);
    let mut rules = Vec::new();
    while p.tok != Tok::Eof {
        rules.push(p.rule()?);
    }
    Ok(Program::new(rules))
}

/// Parses one or more comma-separated goals with an optional final period.
pub fn parse_query(src: &str) -> Result<Vec<Term>, ParseError> {
    let mut p = Parser::new(src);
    let mut goals = vec![p.term()?];
    loop {
        match p.tok {
            Tok::Comma => {
                p.advance();
                goals.push(p.term()?);
            }
            Tok::Period => {
                p.advance();
                p.end()?;
                break;
            }
            Tok::Eof => break,
            _ => return Err(p.error("`,`, `.` or end of input")),
        }
    }
    Ok(goals)
}

/// True for names the parser would read as a variable.
pub fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

pub fn print_rule(r: &Rule) -> String {
    r.to_string()
}

/// One rule per line, each line newline-terminated.
pub fn print_program(p: &Program) -> String {
    p.to_string()
}
