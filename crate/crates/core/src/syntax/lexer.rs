//! Java lexer.
//!
//! Produces the token kinds the probing tasks need. Comments are kept in the
//! stream (flagged as [`TokenKind::Comment`]) so that token spans plus the
//! whitespace between them reconstruct the input exactly.

use std::fmt;
use std::ops::Range;

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    BoolLiteral,
    NullLiteral,
    Operator,
    Separator,
    Comment,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::NumberLiteral
                | TokenKind::StringLiteral
                | TokenKind::CharLiteral
                | TokenKind::BoolLiteral
                | TokenKind::NullLiteral
        )
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte range into the lexed text.
    pub span: Range<usize>,
}

impl Token {
    pub fn is_comment(&self) -> bool {
        self.kind == TokenKind::Comment
    }

    /// True for a keyword, operator or separator token with exactly this text.
    pub fn is(&self, text: &str) -> bool {
        matches!(
            self.kind,
            TokenKind::Keyword | TokenKind::Operator | TokenKind::Separator
        ) && self.text == text
    }
}

/// Reserved words of the Java language. `true`, `false` and `null` are
/// literals and lexed separately; contextual words such as `var`, `yield`
/// and `record` lex as identifiers.
pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while",
];

pub const PRIMITIVE_TYPES: &[&str] =
    &["byte", "short", "int", "long", "float", "double", "boolean", "char"];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Keywords plus the literal words; none of these can be an identifier.
pub fn is_reserved_word(word: &str) -> bool {
    is_keyword(word) || matches!(word, "true" | "false" | "null")
}

pub fn is_primitive_type(word: &str) -> bool {
    PRIMITIVE_TYPES.contains(&word)
}

// Longest first so that a linear scan finds the longest match.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "->", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=", ">", "<", "!", "~", "?", ":",
    "+", "-", "*", "/", "&", "|", "^", "%",
];

const SEPARATORS: &[&str] = &["...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"];

pub fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    Lexer { src: text, pos: 0, tokens: Vec::new() }.run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn run(mut self) -> Result<Vec<Token>, SyntaxError> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            if matches!(c, ' ' | '\t' | '\n' | '\r' | '\u{000C}') {
                self.pos += 1;
                continue;
            }
            let kind = if self.rest().starts_with("//") {
                self.line_comment();
                TokenKind::Comment
            } else if self.rest().starts_with("/*") {
                self.block_comment(start)?;
                TokenKind::Comment
            } else if is_ident_start(c) {
                self.identifier_or_keyword()
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|n| n.is_ascii_digit()))
            {
                self.number();
                TokenKind::NumberLiteral
            } else if self.rest().starts_with("\"\"\"") {
                self.text_block(start)?;
                TokenKind::StringLiteral
            } else if c == '"' {
                self.quoted('"', start)?;
                TokenKind::StringLiteral
            } else if c == '\'' {
                self.quoted('\'', start)?;
                TokenKind::CharLiteral
            } else if let Some(sep) = SEPARATORS.iter().find(|s| self.rest().starts_with(**s)) {
                self.pos += sep.len();
                TokenKind::Separator
            } else if let Some(op) = OPERATORS.iter().find(|s| self.rest().starts_with(**s)) {
                self.pos += op.len();
                TokenKind::Operator
            } else {
                return Err(SyntaxError::Lex {
                    offset: start,
                    message: format!("unexpected character {c:?}"),
                });
            };
            self.tokens.push(Token {
                kind,
                text: self.src[start..self.pos].to_string(),
                span: start..self.pos,
            });
        }
        Ok(self.tokens)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn line_comment(&mut self) {
        let end = self.rest().find(['\n', '\r']).unwrap_or(self.rest().len());
        self.pos += end;
    }

    fn block_comment(&mut self, start: usize) -> Result<(), SyntaxError> {
        match self.src[self.pos + 2..].find("*/") {
            Some(i) => {
                self.pos += 2 + i + 2;
                Ok(())
            }
            None => Err(SyntaxError::Lex {
                offset: start,
                message: "unterminated block comment".into(),
            }),
        }
    }

    fn identifier_or_keyword(&mut self) -> TokenKind {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_ident_part(c) {
                self.bump();
            } else {
                break;
            }
        }
        match &self.src[start..self.pos] {
            "true" | "false" => TokenKind::BoolLiteral,
            "null" => TokenKind::NullLiteral,
            w if is_keyword(w) => TokenKind::Keyword,
            _ => TokenKind::Identifier,
        }
    }

    fn number(&mut self) {
        let bytes = self.src.as_bytes();
        let at = |i: usize| bytes.get(i).copied().unwrap_or(0);
        let mut i = self.pos;
        if at(i) == b'0' && matches!(at(i + 1), b'x' | b'X') {
            i += 2;
            while at(i).is_ascii_hexdigit() || at(i) == b'_' || at(i) == b'.' {
                i += 1;
            }
            if matches!(at(i), b'p' | b'P') {
                i += 1;
                if matches!(at(i), b'+' | b'-') {
                    i += 1;
                }
                while at(i).is_ascii_digit() || at(i) == b'_' {
                    i += 1;
                }
            }
        } else if at(i) == b'0' && matches!(at(i + 1), b'b' | b'B') {
            i += 2;
            while matches!(at(i), b'0' | b'1' | b'_') {
                i += 1;
            }
        } else {
            while at(i).is_ascii_digit() || at(i) == b'_' {
                i += 1;
            }
            if at(i) == b'.' && at(i + 1).is_ascii_digit() {
                i += 1;
                while at(i).is_ascii_digit() || at(i) == b'_' {
                    i += 1;
                }
            } else if at(i) == b'.'
                && at(i + 1) != b'.'
                && (!is_ident_start(at(i + 1) as char)
                    || matches!(at(i + 1), b'e' | b'E' | b'f' | b'F' | b'd' | b'D'))
            {
                // `1.` and `1.f` are floating literals.
                i += 1;
            }
            if matches!(at(i), b'e' | b'E') {
                let mut j = i + 1;
                if matches!(at(j), b'+' | b'-') {
                    j += 1;
                }
                if at(j).is_ascii_digit() {
                    i = j;
                    while at(i).is_ascii_digit() || at(i) == b'_' {
                        i += 1;
                    }
                }
            }
        }
        if matches!(at(i), b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
            i += 1;
        }
        self.pos = i;
    }

    fn quoted(&mut self, quote: char, start: usize) -> Result<(), SyntaxError> {
        self.bump();
        loop {
            match self.bump() {
                Some('\\') => {
                    if self.bump().is_none() {
                        break;
                    }
                }
                Some(c) if c == quote => return Ok(()),
                Some('\n') | Some('\r') | None => break,
                Some(_) => {}
            }
        }
        let what = if quote == '"' { "string" } else { "character" };
        Err(SyntaxError::Lex { offset: start, message: format!("unterminated {what} literal") })
    }

    fn text_block(&mut self, start: usize) -> Result<(), SyntaxError> {
        self.pos += 3;
        loop {
            if self.rest().starts_with("\"\"\"") {
                self.pos += 3;
                return Ok(());
            }
            match self.bump() {
                Some('\\') => {
                    self.bump();
                }
                Some(_) => {}
                None => {
                    return Err(SyntaxError::Lex {
                        offset: start,
                        message: "unterminated text block".into(),
                    })
                }
            }
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}
