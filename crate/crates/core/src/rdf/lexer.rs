//! Tokenizer shared by the TriG and N-Quads parsers.
//!
//! Input is pulled one line at a time, so memory use is bounded by the longest
//! line (or multi-line string) rather than by the document.

use std::fmt;
use std::io::BufRead;

use super::ParseError;

/// 1-based line and column (in characters) of a token or error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: u64,
    pub column: u64,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    IriRef(String),
    PrefixedName { prefix: String, local: String },
    BlankLabel(String),
    String(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    Boolean(bool),
    /// The `a` keyword.
    A,
    AtPrefix,
    AtBase,
    SparqlPrefix,
    SparqlBase,
    Graph,
    DoubleCaret,
    Dot,
    Semicolon,
    Comma,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Eof,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::IriRef(i) => format!("IRI <{i}>"),
            Token::PrefixedName { prefix, local } => format!("prefixed name {prefix}:{local}"),
            Token::BlankLabel(l) => format!("blank node _:{l}"),
            Token::String(_) => "string literal".into(),
            Token::LangTag(t) => format!("language tag @{t}"),
            Token::Integer(v) | Token::Decimal(v) | Token::Double(v) => format!("number {v}"),
            Token::Boolean(b) => format!("boolean {b}"),
            Token::A => "keyword `a`".into(),
            Token::AtPrefix => "@prefix".into(),
            Token::AtBase => "@base".into(),
            Token::SparqlPrefix => "PREFIX".into(),
            Token::SparqlBase => "BASE".into(),
            Token::Graph => "GRAPH".into(),
            Token::DoubleCaret => "`^^`".into(),
            Token::Dot => "`.`".into(),
            Token::Semicolon => "`;`".into(),
            Token::Comma => "`,`".into(),
            Token::LBrace => "`{`".into(),
            Token::RBrace => "`}`".into(),
            Token::LBracket => "`[`".into(),
            Token::RBracket => "`]`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

pub(crate) struct Lexer<R> {
    reader: R,
    line: Vec<char>,
    idx: usize,
    line_no: u64,
    eof: bool,
    buf: String,
}

impl<R: BufRead> Lexer<R> {
    pub(crate) fn new(reader: R) -> Self {
        Lexer { reader, line: Vec::new(), idx: 0, line_no: 0, eof: false, buf: String::new() }
    }

    pub(crate) fn position(&self) -> Position {
        Position { line: self.line_no.max(1), column: self.idx as u64 + 1 }
    }

    fn syntax(&self, pos: Position, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { pos, message: message.into() }
    }

    /// Makes sure the current line has unread characters; returns false at EOF.
    fn fill(&mut self) -> Result<bool, ParseError> {
        while self.idx >= self.line.len() {
            if self.eof {
                return Ok(false);
            }
            self.buf.clear();
            let n = self.reader.read_line(&mut self.buf).map_err(|e| {
                if e.kind() == std::io::ErrorKind::InvalidData {
                    ParseError::InvalidUtf8 { line: self.line_no + 1 }
                } else {
                    ParseError::Io(e)
                }
            })?;
            if n == 0 {
                self.eof = true;
                self.line.clear();
                self.idx = 0;
                return Ok(false);
            }
            self.line_no += 1;
            self.line.clear();
            self.line.extend(self.buf.chars());
            self.idx = 0;
        }
        Ok(true)
    }

    fn peek(&mut self) -> Result<Option<char>, ParseError> {
        Ok(if self.fill()? { Some(self.line[self.idx]) } else { None })
    }

    /// Looks `n` characters ahead within the current line only.
    fn peek_in_line(&self, n: usize) -> Option<char> {
        self.line.get(self.idx + n).copied()
    }

    fn bump(&mut self) -> Result<Option<char>, ParseError> {
        let c = self.peek()?;
        if c.is_some() {
            self.idx += 1;
        }
        Ok(c)
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        while let Some(c) = self.peek()? {
            if c == '#' {
                self.idx = self.line.len();
            } else if c.is_whitespace() {
                self.idx += 1;
            } else {
                break;
            }
        }
        Ok(())
    }

    pub(crate) fn next_token(&mut self) -> Result<(Token, Position), ParseError> {
        self.skip_trivia()?;
        let pos = self.position();
        let Some(c) = self.peek()? else {
            return Ok((Token::Eof, pos));
        };
        let tok = match c {
            '<' => {
                self.idx += 1;
                Token::IriRef(self.iri_ref(pos)?)
            }
            '"' | '\'' => Token::String(self.string(pos)?),
            '@' => {
                self.idx += 1;
                let word = self.lang_word();
                match word.as_str() {
                    "" => return Err(self.syntax(pos, "expected language tag or directive after `@`")),
                    "prefix" => Token::AtPrefix,
                    "base" => Token::AtBase,
                    _ => Token::LangTag(word),
                }
            }
            '^' => {
                self.idx += 1;
                if self.peek_in_line(0) == Some('^') {
                    self.idx += 1;
                    Token::DoubleCaret
                } else {
                    return Err(self.syntax(pos, "expected `^^`"));
                }
            }
            '_' if self.peek_in_line(1) == Some(':') => {
                self.idx += 2;
                let label = self.name_chars(true);
                Token::BlankLabel(label)
            }
            '.' if !self.peek_in_line(1).is_some_and(|d| d.is_ascii_digit()) => {
                self.idx += 1;
                Token::Dot
            }
            ';' => self.single(Token::Semicolon),
            ',' => self.single(Token::Comma),
            '{' => self.single(Token::LBrace),
            '}' => self.single(Token::RBrace),
            '[' => self.single(Token::LBracket),
            ']' => self.single(Token::RBracket),
            '(' => self.single(Token::LParen),
            ')' => self.single(Token::RParen),
            c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.number(pos)?,
            c if c == ':' || c.is_alphabetic() => self.name_or_keyword(pos)?,
            other => return Err(self.syntax(pos, format!("unexpected character {other:?}"))),
        };
        Ok((tok, pos))
    }

    fn single(&mut self, tok: Token) -> Token {
        self.idx += 1;
        tok
    }

    fn lang_word(&mut self) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek_in_line(0) {
            let ok = c.is_ascii_alphabetic() || (!out.is_empty() && (c.is_ascii_digit() || c == '-'));
            if !ok {
                break;
            }
            out.push(c);
            self.idx += 1;
        }
        out
    }

    fn iri_ref(&mut self, pos: Position) -> Result<String, ParseError> {
        let mut out = String::new();
        loop {
            let Some(c) = self.peek_in_line(0) else {
                return Err(self.syntax(pos, "unterminated IRI"));
            };
            self.idx += 1;
            match c {
                '>' => return Ok(out),
                '\\' => {
                    let esc = self.uchar(pos)?;
                    out.push(esc);
                }
                c if c <= ' ' || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.syntax(pos, format!("character {c:?} not allowed in IRI")));
                }
                c => out.push(c),
            }
        }
    }

    /// Parses `uXXXX` / `UXXXXXXXX` after a backslash.
    fn uchar(&mut self, pos: Position) -> Result<char, ParseError> {
        let width = match self.peek_in_line(0) {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.syntax(pos, "invalid escape sequence")),
        };
        self.idx += 1;
        let mut code = 0u32;
        for _ in 0..width {
            let d = self
                .peek_in_line(0)
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.syntax(pos, "invalid hex digit in \\u escape"))?;
            code = code * 16 + d;
            self.idx += 1;
        }
        char::from_u32(code).ok_or_else(|| self.syntax(pos, format!("invalid code point U+{code:X}")))
    }

    fn string(&mut self, pos: Position) -> Result<String, ParseError> {
        let quote = self.line[self.idx];
        let long = self.peek_in_line(1) == Some(quote) && self.peek_in_line(2) == Some(quote);
        self.idx += if long { 3 } else { 1 };
        let mut out = String::new();
        loop {
            let c = if long {
                match self.bump()? {
                    Some(c) => c,
                    None => return Err(self.syntax(pos, "unterminated long string")),
                }
            } else {
                match self.peek_in_line(0) {
                    Some('\n') | Some('\r') | None => {
                        return Err(self.syntax(pos, "unterminated string"));
                    }
                    Some(c) => {
                        self.idx += 1;
                        c
                    }
                }
            };
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek_in_line(0) == Some(quote) && self.peek_in_line(1) == Some(quote) {
                    // A run of more than three quotes ends with the last three.
                    if self.peek_in_line(2) != Some(quote) {
                        self.idx += 2;
                        return Ok(out);
                    }
                }
                out.push(c);
                continue;
            }
            if c == '\\' {
                let e = match self.peek_in_line(0) {
                    Some('t') => '\t',
                    Some('b') => '\u{8}',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u') | Some('U') => {
                        out.push(self.uchar(pos)?);
                        continue;
                    }
                    _ => return Err(self.syntax(pos, "invalid escape sequence in string")),
                };
                self.idx += 1;
                out.push(e);
                continue;
            }
            out.push(c);
        }
    }

    fn number(&mut self, pos: Position) -> Result<Token, ParseError> {
        let mut text = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek_in_line(0) {
            text.push(sign);
            self.idx += 1;
        }
        let mut int_digits = 0;
        while let Some(d) = self.peek_in_line(0).filter(|c| c.is_ascii_digit()) {
            text.push(d);
            self.idx += 1;
            int_digits += 1;
        }
        let mut frac_digits = 0;
        if self.peek_in_line(0) == Some('.') && self.peek_in_line(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.idx += 1;
            while let Some(d) = self.peek_in_line(0).filter(|c| c.is_ascii_digit()) {
                text.push(d);
                self.idx += 1;
                frac_digits += 1;
            }
        }
        if int_digits == 0 && frac_digits == 0 {
            return Err(self.syntax(pos, "malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek_in_line(0) {
            text.push(e);
            self.idx += 1;
            if let Some(sign @ ('+' | '-')) = self.peek_in_line(0) {
                text.push(sign);
                self.idx += 1;
            }
            let mut exp_digits = 0;
            while let Some(d) = self.peek_in_line(0).filter(|c| c.is_ascii_digit()) {
                text.push(d);
                self.idx += 1;
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.syntax(pos, "malformed exponent"));
            }
            return Ok(Token::Double(text));
        }
        Ok(if frac_digits > 0 { Token::Decimal(text) } else { Token::Integer(text) })
    }

    fn is_name_char(c: char) -> bool {
        c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{b7}'
    }

    /// Reads name characters, allowing interior dots but not a trailing one.
    fn name_chars(&mut self, allow_leading_digit: bool) -> String {
        let mut out = String::new();
        loop {
            match self.peek_in_line(0) {
                Some(c) if Self::is_name_char(c) && (allow_leading_digit || !out.is_empty() || !c.is_ascii_digit()) => {
                    out.push(c);
                    self.idx += 1;
                }
                Some('.') if !out.is_empty() && self.peek_in_line(1).is_some_and(Self::is_name_char) => {
                    out.push('.');
                    self.idx += 1;
                }
                _ => return out,
            }
        }
    }

    fn name_or_keyword(&mut self, pos: Position) -> Result<Token, ParseError> {
        let prefix = if self.peek_in_line(0) == Some(':') { String::new() } else { self.name_chars(false) };
        if self.peek_in_line(0) == Some(':') {
            self.idx += 1;
            let local = self.local_name(pos)?;
            return Ok(Token::PrefixedName { prefix, local });
        }
        match prefix.as_str() {
            "a" => Ok(Token::A),
            "true" => Ok(Token::Boolean(true)),
            "false" => Ok(Token::Boolean(false)),
            w if w.eq_ignore_ascii_case("prefix") => Ok(Token::SparqlPrefix),
            w if w.eq_ignore_ascii_case("base") => Ok(Token::SparqlBase),
            w if w.eq_ignore_ascii_case("graph") => Ok(Token::Graph),
            w => Err(self.syntax(pos, format!("unexpected bare word `{w}`"))),
        }
    }

    fn local_name(&mut self, pos: Position) -> Result<String, ParseError> {
        let mut out = String::new();
        loop {
            let Some(c) = self.peek_in_line(0) else { return Ok(out) };
            match c {
                c if Self::is_name_char(c) || c == ':' => {
                    out.push(c);
                    self.idx += 1;
                }
                '.' => {
                    // Interior dots only; a trailing dot terminates the statement.
                    match self.peek_in_line(1) {
                        Some(n) if Self::is_name_char(n) || matches!(n, ':' | '%' | '\\' | '.') => {
                            // "a..b" is fine, "a.." followed by whitespace is not part of the name
                            let mut k = 1;
                            while self.peek_in_line(k) == Some('.') {
                                k += 1;
                            }
                            let after = self.peek_in_line(k);
                            if after.is_some_and(|n| Self::is_name_char(n) || matches!(n, ':' | '%' | '\\')) {
                                for _ in 0..k {
                                    out.push('.');
                                }
                                self.idx += k;
                            } else {
                                return Ok(out);
                            }
                        }
                        _ => return Ok(out),
                    }
                }
                '%' => {
                    let h1 = self.peek_in_line(1).filter(|c| c.is_ascii_hexdigit());
                    let h2 = self.peek_in_line(2).filter(|c| c.is_ascii_hexdigit());
                    match (h1, h2) {
                        (Some(a), Some(b)) => {
                            out.push('%');
                            out.push(a);
                            out.push(b);
                            self.idx += 3;
                        }
                        _ => return Err(self.syntax(pos, "invalid percent escape in local name")),
                    }
                }
                '\\' => match self.peek_in_line(1) {
                    Some(
                        e @ ('_' | '~' | '.' | '-' | '!' | '$' | '&' | '\'' | '(' | ')' | '*' | '+' | ','
                        | ';' | '=' | '/' | '?' | '#' | '@' | '%'),
                    ) => {
                        out.push(e);
                        self.idx += 2;
                    }
                    _ => return Err(self.syntax(pos, "invalid escape in local name")),
                },
                _ => return Ok(out),
            }
        }
    }
}
