use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    LParen,
    RParen,
    Keyword,
    Ident,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Lower-cased source text. Parentheses carry `(` / `)`.
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '=' | '<' | '>' | '.')
}

/// Splits HDDL source into tokens. `;` comments run to the end of the line.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (start_line, start_column) = (line, column);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' | ')' => {
                chars.next();
                column += 1;
                tokens.push(Token {
                    kind: if c == '(' { TokenKind::LParen } else { TokenKind::RParen },
                    text: c.to_string(),
                    line: start_line,
                    column: start_column,
                });
            }
            '?' | ':' => {
                chars.next();
                column += 1;
                let mut text = String::from(c);
                while let Some(&n) = chars.peek() {
                    if !is_name_char(n) {
                        break;
                    }
                    text.push(n.to_ascii_lowercase());
                    chars.next();
                    column += 1;
                }
                if text.len() == 1 {
                    return Err(ParseError::IllegalCharacter { line: start_line, column: start_column, ch: c });
                }
                tokens.push(Token {
                    kind: if c == '?' { TokenKind::Variable } else { TokenKind::Keyword },
                    text,
                    line: start_line,
                    column: start_column,
                });
            }
            c if is_name_char(c) => {
                let mut text = String::new();
                while let Some(&n) = chars.peek() {
                    if !is_name_char(n) {
                        break;
                    }
                    text.push(n.to_ascii_lowercase());
                    chars.next();
                    column += 1;
                }
                tokens.push(Token { kind: TokenKind::Ident, text, line: start_line, column: start_column });
            }
            other => return Err(ParseError::IllegalCharacter { line: start_line, column: start_column, ch: other }),
        }
    }
    Ok(tokens)
}
