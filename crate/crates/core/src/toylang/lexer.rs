//! Tokenizer. Spans are byte offsets into the original text; `#` starts a
//! comment running to end of line. The span/line data doubles as the exact
//! site table for grammar-mode mutation matching.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Int,
    KwFn,
    KwTest,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwAssert,
    KwLet,
    True,
    False,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Error)]
#[error("lex error at line {line}: {message}")]
pub struct LexError {
    pub line: u32,
    pub message: String,
}

fn keyword(word: &str) -> Option<TokKind> {
    Some(match word {
        "fn" => TokKind::KwFn,
        "test" => TokKind::KwTest,
        "if" => TokKind::KwIf,
        "else" => TokKind::KwElse,
        "while" => TokKind::KwWhile,
        "return" => TokKind::KwReturn,
        "assert" => TokKind::KwAssert,
        "let" => TokKind::KwLet,
        "true" => TokKind::True,
        "false" => TokKind::False,
        "and" => TokKind::And,
        "or" => TokKind::Or,
        "not" => TokKind::Not,
        _ => return None,
    })
}

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokKind::Int,
                    start,
                    end: i,
                    line,
                    text: text[start..i].to_string(),
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                tokens.push(Token {
                    kind: keyword(word).unwrap_or(TokKind::Ident),
                    start,
                    end: i,
                    line,
                    text: word.to_string(),
                });
            }
            _ => {
                let two = if i + 1 < bytes.len() {
                    &text[i..i + 2]
                } else {
                    ""
                };
                let (kind, len) = match two {
                    "<=" => (Some(TokKind::Le), 2),
                    ">=" => (Some(TokKind::Ge), 2),
                    "==" => (Some(TokKind::EqEq), 2),
                    "!=" => (Some(TokKind::Ne), 2),
                    _ => {
                        let single = match c {
                            b'+' => Some(TokKind::Plus),
                            b'-' => Some(TokKind::Minus),
                            b'*' => Some(TokKind::Star),
                            b'/' => Some(TokKind::Slash),
                            b'<' => Some(TokKind::Lt),
                            b'>' => Some(TokKind::Gt),
                            b'=' => Some(TokKind::Assign),
                            b'(' => Some(TokKind::LParen),
                            b')' => Some(TokKind::RParen),
                            b'{' => Some(TokKind::LBrace),
                            b'}' => Some(TokKind::RBrace),
                            b',' => Some(TokKind::Comma),
                            _ => None,
                        };
                        (single, 1)
                    }
                };
                match kind {
                    Some(kind) => {
                        tokens.push(Token {
                            kind,
                            start: i,
                            end: i + len,
                            line,
                            text: text[i..i + len].to_string(),
                        });
                        i += len;
                    }
                    None => {
                        return Err(LexError {
                            line,
                            message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                        })
                    }
                }
            }
        }
    }
    Ok(tokens)
}
