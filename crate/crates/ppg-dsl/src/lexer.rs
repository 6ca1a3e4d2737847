//! Hand-rolled lexer with line/column tracking.
//!
//! `#` starts a comment running to end of line. Identifiers may contain
//! letters, digits and `_`; `N_T` is therefore a single identifier.

use crate::ast::Pos;
use crate::DslError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(f64),
    Ident(String),
    // punctuation and operators
    Tilde,     // ~
    Walrus,    // :=
    Assign,    // = (assignment in statement position, equality in expressions)
    EqEq,      // ==
    Ne,        // !=
    Lt,        // <
    Le,        // <=
    Gt,        // >
    Ge,        // >=
    Plus,      // +
    Minus,     // -
    Star,      // *
    Slash,     // /
    Bang,      // !
    AndAnd,    // &&
    OrOr,      // ||
    Pipe,      // | (absolute-value delimiter)
    LParen,    // (
    RParen,    // )
    LBrace,    // {
    RBrace,    // }
    Comma,     // ,
    Semi,      // ;
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Num(n) => return write!(f, "number {n}"),
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Tilde => "`~`",
            Tok::Walrus => "`:=`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Pipe => "`|`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

/// One token with the position of its first character.
#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => {
                out.push(Token { tok: Tok::Eof, pos });
                return Ok(out);
            }
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut text = String::new();
            let mut seen_dot = false;
            let mut seen_exp = false;
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    bump!();
                } else if c == '.' && !seen_dot && !seen_exp {
                    seen_dot = true;
                    text.push(c);
                    bump!();
                } else if (c == 'e' || c == 'E') && !seen_exp && !text.is_empty() {
                    seen_exp = true;
                    text.push(c);
                    bump!();
                    if let Some(&s) = chars.peek() {
                        if s == '+' || s == '-' {
                            text.push(s);
                            bump!();
                        }
                    }
                } else {
                    break;
                }
            }
            let value: f64 = text.parse().map_err(|_| DslError::Syntax {
                pos,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                pos,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut text = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    text.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(text),
                pos,
            });
            continue;
        }
        // operators and punctuation
        bump!();
        let two = |chars: &mut std::iter::Peekable<std::str::Chars>, want: char| {
            if chars.peek() == Some(&want) {
                true
            } else {
                false
            }
        };
        let tok = match c {
            '~' => Tok::Tilde,
            ':' => {
                if two(&mut chars, '=') {
                    bump!();
                    Tok::Walrus
                } else {
                    return Err(DslError::Syntax {
                        pos,
                        message: "expected `:=` after `:`".into(),
                    });
                }
            }
            '=' => {
                if two(&mut chars, '=') {
                    bump!();
                    Tok::EqEq
                } else {
                    Tok::Assign
                }
            }
            '!' => {
                if two(&mut chars, '=') {
                    bump!();
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            '<' => {
                if two(&mut chars, '=') {
                    bump!();
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if two(&mut chars, '=') {
                    bump!();
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '&' => {
                if two(&mut chars, '&') {
                    bump!();
                    Tok::AndAnd
                } else {
                    return Err(DslError::Syntax {
                        pos,
                        message: "expected `&&`".into(),
                    });
                }
            }
            '|' => {
                if two(&mut chars, '|') {
                    bump!();
                    Tok::OrOr
                } else {
                    Tok::Pipe
                }
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            other => {
                return Err(DslError::Syntax {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token { tok, pos });
    }
}
