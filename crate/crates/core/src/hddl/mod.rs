//! HDDL front end: tokenizer, recursive-descent parser and unparser.
//!
//! The accepted language is the conjunctive fragment of HDDL used by the
//! IPC 2020 total-order and partial-order tracks: typed objects, positive
//! and negative literals, `=` constraints, and both the `:ordered-subtasks`
//! and the `:subtasks` + `:ordering` method forms. Symbols are
//! case-insensitive and normalized to lower case.

pub mod ast;
mod lexer;
mod parser;
mod unparse;

use std::path::Path;

pub use ast::*;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_domain, parse_problem, SUPPORTED_REQUIREMENTS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: illegal character {ch:?}")]
    IllegalCharacter { line: usize, column: usize, ch: char },
    #[error("{line}:{column}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("{line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unsupported requirement `{name}`")]
    UnsupportedRequirement { line: usize, column: usize, name: String },
    #[error("{line}:{column}: problem is for domain `{found}`, but domain `{expected}` was given")]
    DomainMismatch { line: usize, column: usize, expected: String, found: String },
}

impl ParseError {
    /// 1-based (line, column) of the offending token.
    pub fn position(&self) -> (usize, usize) {
        match *self {
            ParseError::IllegalCharacter { line, column, .. }
            | ParseError::Syntax { line, column, .. }
            | ParseError::Semantic { line, column, .. }
            | ParseError::UnsupportedRequirement { line, column, .. }
            | ParseError::DomainMismatch { line, column, .. } => (line, column),
        }
    }
}

/// Error from reading and parsing an input file, tagged with its path.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
}

pub fn domain_from_str(source: &str) -> Result<LiftedDomainAst, ParseError> {
    parse_domain(&tokenize(source)?)
}

pub fn problem_from_str(source: &str, domain: &LiftedDomainAst) -> Result<LiftedProblemAst, ParseError> {
    parse_problem(&tokenize(source)?, domain)
}

/// Reads and parses a domain/problem file pair.
pub fn load(domain: &Path, problem: &Path) -> Result<(LiftedDomainAst, LiftedProblemAst), LoadError> {
    let read =
        |p: &Path| std::fs::read_to_string(p).map_err(|source| LoadError::Io { path: p.display().to_string(), source });
    let dsrc = read(domain)?;
    let psrc = read(problem)?;
    let d = domain_from_str(&dsrc).map_err(|source| LoadError::Parse { path: domain.display().to_string(), source })?;
    let p = problem_from_str(&psrc, &d)
        .map_err(|source| LoadError::Parse { path: problem.display().to_string(), source })?;
    Ok((d, p))
}
