use super::{ParseError, SourceSpan};
use crate::model::{is_bare_word, is_curie};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    /// Bare word: keyword or bare relation name.
    Word(String),
    Curie(String),
    /// Unescaped content of a single-quoted string.
    Quoted(String),
    /// A run of characters that is neither a word nor a CURIE.
    Other(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
    /// Source text of the token, used in diagnostics.
    pub text: String,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    /// Position just past the last character.
    pub end: SourceSpan,
}

pub(crate) fn tokenize(input: &str) -> Result<Lexed, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            continue;
        }
        let start = SourceSpan {
            line,
            column,
            length: 0,
        };
        if c == '\'' {
            chars.next();
            column += 1;
            let mut value = String::new();
            let mut text = String::from("'");
            let mut length = 1;
            let mut closed = false;
            while let Some(c) = chars.next() {
                text.push(c);
                length += 1;
                match c {
                    '\'' => {
                        column += 1;
                        closed = true;
                        break;
                    }
                    '\\' => {
                        column += 1;
                        match chars.peek() {
                            Some(&next @ ('\'' | '\\')) => {
                                chars.next();
                                text.push(next);
                                length += 1;
                                column += 1;
                                value.push(next);
                            }
                            // unknown escapes are kept literally
                            _ => value.push('\\'),
                        }
                    }
                    '\n' => {
                        line += 1;
                        column = 1;
                        value.push(c);
                    }
                    _ => {
                        column += 1;
                        value.push(c);
                    }
                }
            }
            if !closed {
                return Err(ParseError {
                    span: SourceSpan { length, ..start },
                    expected: vec!["closing quote `'`".to_string()],
                    found: "end of input (unterminated quoted string)".to_string(),
                });
            }
            tokens.push(Token {
                kind: TokenKind::Quoted(value),
                span: SourceSpan { length, ..start },
                text,
            });
        } else {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                text.push(c);
                chars.next();
                column += 1;
            }
            let kind = if is_bare_word(&text) {
                TokenKind::Word(text.clone())
            } else if is_curie(&text) {
                TokenKind::Curie(text.clone())
            } else {
                TokenKind::Other(text.clone())
            };
            tokens.push(Token {
                kind,
                span: SourceSpan {
                    length: text.chars().count(),
                    ..start
                },
                text,
            });
        }
    }
    Ok(Lexed {
        tokens,
        end: SourceSpan {
            line,
            column,
            length: 0,
        },
    })
}
