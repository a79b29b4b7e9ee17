//! Hand-written lexer producing a flat token stream with 1-based source
//! positions. Constructs outside the supported subset are rejected here
//! whenever they are lexically recognizable (reserved keywords, compound
//! assignment, string literals, ...), so the parser only ever sees tokens
//! it understands.

use crate::loc::{SourceLoc, Span};

use super::FrontendError;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    Keyword(Keyword),
    Punct(Punct),
    Eof,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Keyword {
    Int,
    Unsigned,
    Signed,
    Char,
    Long,
    Bool,
    Void,
    If,
    Else,
    While,
    Return,
}

impl Keyword {
    pub fn starts_type(self) -> bool {
        use Keyword::*;
        matches!(self, Int | Unsigned | Signed | Char | Long | Bool | Void)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Punct {
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Bang,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AmpAmp,
    PipePipe,
    Assign,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Comma,
}

impl Punct {
    pub fn display(self) -> &'static str {
        use Punct::*;
        match self {
            Plus => "+",
            Minus => "-",
            Star => "*",
            Slash => "/",
            Percent => "%",
            Amp => "&",
            Pipe => "|",
            Caret => "^",
            Tilde => "~",
            Bang => "!",
            Shl => "<<",
            Shr => ">>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            EqEq => "==",
            Ne => "!=",
            AmpAmp => "&&",
            PipePipe => "||",
            Assign => "=",
            LParen => "(",
            RParen => ")",
            LBrace => "{",
            RBrace => "}",
            Semi => ";",
            Comma => ",",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Int(v) => format!("integer literal `{v}`"),
            TokenKind::Keyword(k) => format!("keyword `{}`", keyword_text(*k)),
            TokenKind::Punct(p) => format!("`{}`", p.display()),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

fn keyword_text(k: Keyword) -> &'static str {
    use Keyword::*;
    match k {
        Int => "int",
        Unsigned => "unsigned",
        Signed => "signed",
        Char => "char",
        Long => "long",
        Bool => "_Bool",
        Void => "void",
        If => "if",
        Else => "else",
        While => "while",
        Return => "return",
    }
}

/// C keywords (or near-keywords) we recognize but do not support. Using one
/// of these is an `UnsupportedConstruct` error rather than a confusing parse
/// failure on an "identifier".
const RESERVED: &[&str] = &[
    "auto", "break", "case", "const", "continue", "default", "do", "double",
    "enum", "extern", "float", "for", "goto", "inline", "register",
    "restrict", "short", "sizeof", "static", "struct", "switch", "typedef",
    "union", "volatile",
];

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

pub fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut lx = Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        let tok = lx.next_token()?;
        let done = tok.kind == TokenKind::Eof;
        tokens.push(tok);
        if done {
            return Ok(tokens);
        }
    }
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> SourceLoc {
        SourceLoc::new(self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), FrontendError> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let open = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some(b'*') if self.peek2() == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(FrontendError::Syntax {
                                    loc: open,
                                    message: "unterminated block comment".into(),
                                });
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Token, FrontendError> {
        self.skip_trivia()?;
        let start = self.loc();
        let Some(c) = self.peek() else {
            return Ok(Token { kind: TokenKind::Eof, span: Span::at(start) });
        };

        if c.is_ascii_alphabetic() || c == b'_' {
            return self.ident_or_keyword(start);
        }
        if c.is_ascii_digit() {
            return self.number(start);
        }

        self.bump();
        let two = |lx: &mut Lexer<'a>, p: Punct| {
            lx.bump();
            p
        };
        let punct = match c {
            b'+' => match self.peek() {
                Some(b'+') | Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Plus,
            },
            b'-' => match self.peek() {
                Some(b'-') | Some(b'=') | Some(b'>') => {
                    return Err(self.unsupported_op(start, c))
                }
                _ => Punct::Minus,
            },
            b'*' => match self.peek() {
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Star,
            },
            b'/' => match self.peek() {
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Slash,
            },
            b'%' => match self.peek() {
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Percent,
            },
            b'&' => match self.peek() {
                Some(b'&') => two(self, Punct::AmpAmp),
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Amp,
            },
            b'|' => match self.peek() {
                Some(b'|') => two(self, Punct::PipePipe),
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Pipe,
            },
            b'^' => match self.peek() {
                Some(b'=') => return Err(self.unsupported_op(start, c)),
                _ => Punct::Caret,
            },
            b'~' => Punct::Tilde,
            b'!' => match self.peek() {
                Some(b'=') => two(self, Punct::Ne),
                _ => Punct::Bang,
            },
            b'<' => match self.peek() {
                Some(b'<') => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        return Err(self.unsupported_op(start, c));
                    }
                    Punct::Shl
                }
                Some(b'=') => two(self, Punct::Le),
                _ => Punct::Lt,
            },
            b'>' => match self.peek() {
                Some(b'>') => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        return Err(self.unsupported_op(start, c));
                    }
                    Punct::Shr
                }
                Some(b'=') => two(self, Punct::Ge),
                _ => Punct::Gt,
            },
            b'=' => match self.peek() {
                Some(b'=') => two(self, Punct::EqEq),
                _ => Punct::Assign,
            },
            b'(' => Punct::LParen,
            b')' => Punct::RParen,
            b'{' => Punct::LBrace,
            b'}' => Punct::RBrace,
            b';' => Punct::Semi,
            b',' => Punct::Comma,
            b'\'' | b'"' => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: "character and string literals".into(),
                });
            }
            b'?' | b':' => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: "conditional operator".into(),
                });
            }
            b'[' | b']' => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: "array subscripts".into(),
                });
            }
            b'.' => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: "member access".into(),
                });
            }
            b'#' => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: "preprocessor directives".into(),
                });
            }
            other => {
                return Err(FrontendError::Syntax {
                    loc: start,
                    message: format!("unexpected character `{}`", other as char),
                });
            }
        };
        Ok(Token {
            kind: TokenKind::Punct(punct),
            span: Span::new(start, self.loc_before()),
        })
    }

    fn unsupported_op(&mut self, loc: SourceLoc, first: u8) -> FrontendError {
        let second = self.peek().map(|c| c as char).unwrap_or(' ');
        FrontendError::Unsupported {
            loc,
            construct: format!("operator `{}{}`", first as char, second),
        }
    }

    /// Location of the last consumed character (inclusive end of the token).
    fn loc_before(&self) -> SourceLoc {
        SourceLoc::new(self.line, self.col.saturating_sub(1).max(1))
    }

    fn ident_or_keyword(&mut self, start: SourceLoc) -> Result<Token, FrontendError> {
        let begin = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[begin..self.pos]).unwrap();
        let span = Span::new(start, self.loc_before());
        let kind = match text {
            "int" => TokenKind::Keyword(Keyword::Int),
            "unsigned" => TokenKind::Keyword(Keyword::Unsigned),
            "signed" => TokenKind::Keyword(Keyword::Signed),
            "char" => TokenKind::Keyword(Keyword::Char),
            "long" => TokenKind::Keyword(Keyword::Long),
            "_Bool" => TokenKind::Keyword(Keyword::Bool),
            "void" => TokenKind::Keyword(Keyword::Void),
            "if" => TokenKind::Keyword(Keyword::If),
            "else" => TokenKind::Keyword(Keyword::Else),
            "while" => TokenKind::Keyword(Keyword::While),
            "return" => TokenKind::Keyword(Keyword::Return),
            _ if RESERVED.contains(&text) => {
                return Err(FrontendError::Unsupported {
                    loc: start,
                    construct: format!("`{text}`"),
                });
            }
            _ => TokenKind::Ident(text.to_string()),
        };
        Ok(Token { kind, span })
    }

    fn number(&mut self, start: SourceLoc) -> Result<Token, FrontendError> {
        let begin = self.pos;
        let hex = self.peek() == Some(b'0')
            && matches!(self.peek2(), Some(b'x') | Some(b'X'));
        if hex {
            self.bump();
            self.bump();
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'.' {
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[begin..self.pos]).unwrap();
        let span = Span::new(start, self.loc_before());
        let digits = if hex { &text[2..] } else { text };
        if digits.contains('.') || (!hex && digits.contains(['e', 'E'])) {
            return Err(FrontendError::Unsupported {
                loc: start,
                construct: "floating-point literals".into(),
            });
        }
        if digits.ends_with(['u', 'U', 'l', 'L']) {
            return Err(FrontendError::Unsupported {
                loc: start,
                construct: "integer literal suffixes".into(),
            });
        }
        let radix = if hex { 16 } else { 10 };
        let value = u64::from_str_radix(digits, radix).map_err(|_| {
            FrontendError::Syntax {
                loc: start,
                message: format!("invalid integer literal `{text}`"),
            }
        })?;
        Ok(Token { kind: TokenKind::Int(value), span })
    }
}
