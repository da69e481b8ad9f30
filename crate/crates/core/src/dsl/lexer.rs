use std::iter::Peekable;
use std::str::CharIndices;

use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Identifiers, keywords, labels and numbers.
    Word(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eq,
    Comma,
    DotDot,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Str(_) => "a string".to_string(),
            TokenKind::LBrace => "`{`".to_string(),
            TokenKind::RBrace => "`}`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Eq => "`=`".to_string(),
            TokenKind::Comma => "`,`".to_string(),
            TokenKind::DotDot => "`..`".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexError {
    pub message: String,
    pub span: SourceSpan,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '+')
}

struct Cursor<'a> {
    chars: Peekable<CharIndices<'a>>,
    src: &'a str,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn pos(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        match c {
            '\n' => {
                self.line += 1;
                self.col = 1;
            }
            '\r' if self.peek() != Some('\n') => {
                self.line += 1;
                self.col = 1;
            }
            _ => self.col += 1,
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }
}

pub fn lex(src: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { chars: src.char_indices().peekable(), src, line: 1, col: 1 };
    let mut tokens = Vec::new();
    let span = |start: (usize, usize), end: (usize, usize)| SourceSpan::new(file, start, end);

    loop {
        let start = cur.pos();
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, span: span(start, start) });
            return Ok(tokens);
        };
        let kind = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '#' => {
                while let Some(c) = cur.peek() {
                    if c == '\n' || c == '\r' {
                        break;
                    }
                    cur.bump();
                }
                continue;
            }
            '{' | '}' | '(' | ')' | '=' | ',' => {
                cur.bump();
                match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '=' => TokenKind::Eq,
                    _ => TokenKind::Comma,
                }
            }
            '.' if cur.peek_second() == Some('.') => {
                cur.bump();
                cur.bump();
                TokenKind::DotDot
            }
            '"' => {
                cur.bump();
                TokenKind::Str(lex_string(&mut cur, file, start)?)
            }
            c if is_word_char(c) => {
                let from = cur.offset();
                while let Some(c) = cur.peek() {
                    if !is_word_char(c) || (c == '.' && cur.peek_second() == Some('.')) {
                        break;
                    }
                    cur.bump();
                }
                let to = cur.offset();
                TokenKind::Word(src[from..to].to_string())
            }
            other => {
                cur.bump();
                return Err(LexError {
                    message: format!("unexpected character {other:?}"),
                    span: span(start, cur.pos()),
                });
            }
        };
        tokens.push(Token { kind, span: span(start, cur.pos()) });
    }
}

fn lex_string(cur: &mut Cursor<'_>, file: &str, start: (usize, usize)) -> Result<String, LexError> {
    let mut out = String::new();
    loop {
        let here = cur.pos();
        match cur.bump() {
            None => {
                return Err(LexError {
                    message: "unterminated string literal".to_string(),
                    span: SourceSpan::new(file, start, here),
                })
            }
            Some('"') => return Ok(out),
            Some('\\') => {
                let escaped = match cur.bump() {
                    Some('"') => '"',
                    Some('\\') => '\\',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    Some('r') => '\r',
                    Some('u') => lex_unicode_escape(cur).ok_or_else(|| LexError {
                        message: "invalid unicode escape, expected `\\u{XXXX}`".to_string(),
                        span: SourceSpan::new(file, here, cur.pos()),
                    })?,
                    other => {
                        return Err(LexError {
                            message: match other {
                                Some(c) => format!("unknown escape `\\{c}` in string"),
                                None => "unterminated string literal".to_string(),
                            },
                            span: SourceSpan::new(file, here, cur.pos()),
                        })
                    }
                };
                out.push(escaped);
            }
            Some(c) => out.push(c),
        }
    }
}

fn lex_unicode_escape(cur: &mut Cursor<'_>) -> Option<char> {
    if cur.bump()? != '{' {
        return None;
    }
    let mut hex = String::new();
    loop {
        match cur.bump()? {
            '}' => break,
            c if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
            _ => return None,
        }
    }
    char::from_u32(u32::from_str_radix(&hex, 16).ok()?)
}
