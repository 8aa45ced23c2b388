//! Indentation-aware tokenizer for Python 3 source.
//!
//! Produces the significant token stream (keywords, names, numbers, strings,
//! operators) plus the structural tokens (newline/indent/dedent) the parser
//! consumes. Comments and whitespace are dropped; the raw line table on
//! `SourceUnit` keeps them for LOC and line-length checks.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TokenKind {
    Keyword,
    Name,
    Number,
    Str,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

impl TokenKind {
    /// Tokens that carry source text, as opposed to structure.
    pub fn is_significant(self) -> bool {
        matches!(
            self,
            TokenKind::Keyword | TokenKind::Name | TokenKind::Number | TokenKind::Str | TokenKind::Op
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// 0-based column of the first character.
    pub column: u32,
}

impl Token {
    /// Line/column just past the last character of the token.
    pub fn end(&self) -> (u32, u32) {
        let newlines = self.text.chars().filter(|&c| c == '\n').count() as u32;
        if newlines == 0 {
            (self.line, self.column + self.text.chars().count() as u32)
        } else {
            let tail = self.text.rsplit('\n').next().unwrap_or("");
            (self.line + newlines, tail.chars().count() as u32)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizeError {
    pub line: u32,
    pub message: String,
}

impl std::fmt::Display for TokenizeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok()
}

// Longest-match operator tables.
const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPS2: &[&str] = &[
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", ":=", "+=", "-=", "*=", "/=", "%=",
    "@=", "&=", "|=", "^=",
];
const OPS1: &[char] = &[
    '+', '-', '*', '/', '%', '@', '&', '|', '^', '~', '<', '>', '(', ')', '[', ']', '{', '}',
    ',', ':', '.', ';', '=',
];

struct Tokenizer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    paren_depth: usize,
    indents: Vec<u32>,
    tokens: Vec<Token>,
    /// True until the first significant token of the current logical line.
    at_line_start: bool,
    /// True if the current logical line has produced at least one token.
    line_has_content: bool,
    source: &'a str,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, TokenizeError> {
    let mut t = Tokenizer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 0,
        paren_depth: 0,
        indents: vec![0],
        tokens: Vec::new(),
        at_line_start: true,
        line_has_content: false,
        source,
    };
    t.run()?;
    Ok(t.tokens)
}

impl<'a> Tokenizer<'a> {
    fn err(&self, message: impl Into<String>) -> TokenizeError {
        TokenizeError { line: self.line, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied();
        if let Some(c) = c {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.column = 0;
            } else {
                self.column += 1;
            }
        }
        c
    }

    fn push(&mut self, kind: TokenKind, text: String, line: u32, column: u32) {
        self.tokens.push(Token { kind, text, line, column });
    }

    fn run(&mut self) -> Result<(), TokenizeError> {
        loop {
            if self.at_line_start && self.paren_depth == 0 {
                if !self.handle_line_start()? {
                    break; // EOF
                }
            }
            match self.peek() {
                None => break,
                Some(' ') | Some('\t') | Some('\x0c') | Some('\r') => {
                    self.bump();
                }
                Some('\n') => {
                    self.bump();
                    if self.paren_depth == 0 {
                        if self.line_has_content {
                            self.push(TokenKind::Newline, "\n".into(), self.line - 1, self.column);
                            self.line_has_content = false;
                        }
                        self.at_line_start = true;
                    }
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('\\') => {
                    // Explicit line continuation: backslash immediately before EOL.
                    let mut off = 1;
                    while matches!(self.peek_at(off), Some('\r')) {
                        off += 1;
                    }
                    if matches!(self.peek_at(off), Some('\n')) {
                        for _ in 0..=off {
                            self.bump();
                        }
                    } else {
                        return Err(self.err("unexpected character '\\'"));
                    }
                }
                Some(c) if c == '"' || c == '\'' => self.scan_string(String::new(), self.line, self.column)?,
                Some(c) if c.is_ascii_digit() => self.scan_number()?,
                Some('.') if self.peek_at(1).map_or(false, |c| c.is_ascii_digit()) => {
                    self.scan_number()?
                }
                Some(c) if c.is_alphabetic() || c == '_' => self.scan_name()?,
                Some(_) => self.scan_op()?,
            }
        }
        if self.paren_depth > 0 {
            return Err(self.err("unexpected end of file inside brackets"));
        }
        if self.line_has_content {
            self.push(TokenKind::Newline, "\n".into(), self.line, self.column);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(TokenKind::Dedent, String::new(), self.line, 0);
        }
        self.push(TokenKind::EndMarker, String::new(), self.line, 0);
        Ok(())
    }

    /// Measure indentation at a fresh logical line and emit indent/dedent
    /// tokens. Blank and comment-only lines are consumed without effect.
    /// Returns false at EOF.
    fn handle_line_start(&mut self) -> Result<bool, TokenizeError> {
        loop {
            let mut width: u32 = 0;
            loop {
                match self.peek() {
                    Some(' ') => {
                        width += 1;
                        self.bump();
                    }
                    Some('\t') => {
                        width = (width / 8 + 1) * 8;
                        self.bump();
                    }
                    Some('\x0c') | Some('\r') => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.peek() {
                None => return Ok(false),
                Some('\n') => {
                    self.bump();
                    continue; // blank line
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                    continue;
                }
                Some('\\') => {
                    // A continuation at line start joins an empty prefix; treat
                    // the next line as part of this logical line.
                    break;
                }
                Some(_) => {}
            }
            let current = *self.indents.last().unwrap();
            if width > current {
                self.indents.push(width);
                self.push(TokenKind::Indent, String::new(), self.line, 0);
            } else if width < current {
                while *self.indents.last().unwrap() > width {
                    self.indents.pop();
                    self.push(TokenKind::Dedent, String::new(), self.line, 0);
                }
                if *self.indents.last().unwrap() != width {
                    return Err(self.err("unindent does not match any outer indentation level"));
                }
            }
            break;
        }
        self.at_line_start = false;
        self.line_has_content = true;
        Ok(true)
    }

    fn scan_name(&mut self) -> Result<(), TokenizeError> {
        let line = self.line;
        let column = self.column;
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                text.push(c);
                self.bump();
            } else {
                break;
            }
        }
        // String prefix? (r, b, f, u and two-letter combinations)
        if text.len() <= 2
            && text.chars().all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u'))
            && matches!(self.peek(), Some('"') | Some('\''))
        {
            return self.scan_string(text, line, column);
        }
        let kind = if is_keyword(&text) { TokenKind::Keyword } else { TokenKind::Name };
        self.push(kind, text, line, column);
        Ok(())
    }

    fn scan_string(&mut self, prefix: String, line: u32, column: u32) -> Result<(), TokenizeError> {
        let quote = self.peek().unwrap();
        let mut text = prefix;
        let triple = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let quotes = if triple { 3 } else { 1 };
        for _ in 0..quotes {
            text.push(self.bump().unwrap());
        }
        let mut closed = 0;
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated string literal")),
                Some('\\') => {
                    text.push(self.bump().unwrap());
                    if let Some(c) = self.bump() {
                        text.push(c);
                    } else {
                        return Err(self.err("unterminated string literal"));
                    }
                    closed = 0;
                }
                Some('\n') if !triple => return Err(self.err("unterminated string literal")),
                Some(c) => {
                    text.push(c);
                    self.bump();
                    if c == quote {
                        closed += 1;
                        if closed == quotes {
                            break;
                        }
                    } else {
                        closed = 0;
                    }
                }
            }
        }
        self.push(TokenKind::Str, text, line, column);
        Ok(())
    }

    fn scan_number(&mut self) -> Result<(), TokenizeError> {
        let line = self.line;
        let column = self.column;
        let mut text = String::new();
        let radix_prefix = self.peek() == Some('0')
            && matches!(
                self.peek_at(1),
                Some('x') | Some('X') | Some('o') | Some('O') | Some('b') | Some('B')
            );
        if radix_prefix {
            text.push(self.bump().unwrap());
            text.push(self.bump().unwrap());
            while let Some(c) = self.peek() {
                if c.is_ascii_hexdigit() || c == '_' {
                    text.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        } else {
            let mut seen_dot = false;
            let mut seen_exp = false;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() || c == '_' {
                    text.push(c);
                    self.bump();
                } else if c == '.' && !seen_dot && !seen_exp {
                    // A dot followed by a name is attribute access on an int
                    // literal; only consume it as part of the number otherwise.
                    if self.peek_at(1).map_or(false, |n| n.is_alphabetic() || n == '_') {
                        break;
                    }
                    seen_dot = true;
                    text.push(c);
                    self.bump();
                } else if (c == 'e' || c == 'E')
                    && self.peek_at(1).map_or(false, |n| {
                        n.is_ascii_digit()
                            || ((n == '+' || n == '-')
                                && self.peek_at(2).map_or(false, |m| m.is_ascii_digit()))
                    })
                {
                    seen_exp = true;
                    text.push(c);
                    self.bump();
                    if matches!(self.peek(), Some('+') | Some('-')) {
                        text.push(self.bump().unwrap());
                    }
                } else {
                    break;
                }
            }
        }
        if matches!(self.peek(), Some('j') | Some('J')) {
            text.push(self.bump().unwrap());
        }
        self.push(TokenKind::Number, text, line, column);
        Ok(())
    }

    fn scan_op(&mut self) -> Result<(), TokenizeError> {
        let line = self.line;
        let column = self.column;
        let rest: String = self.chars[self.pos..self.pos + 3.min(self.chars.len() - self.pos)]
            .iter()
            .collect();
        for op in OPS3 {
            if rest.starts_with(op) {
                for _ in 0..3 {
                    self.bump();
                }
                self.push(TokenKind::Op, (*op).into(), line, column);
                return Ok(());
            }
        }
        for op in OPS2 {
            if rest.starts_with(op) {
                for _ in 0..2 {
                    self.bump();
                }
                self.push(TokenKind::Op, (*op).into(), line, column);
                return Ok(());
            }
        }
        let c = self.peek().unwrap();
        if OPS1.contains(&c) {
            self.bump();
            match c {
                '(' | '[' | '{' => self.paren_depth += 1,
                ')' | ']' | '}' => self.paren_depth = self.paren_depth.saturating_sub(1),
                _ => {}
            }
            self.push(TokenKind::Op, c.to_string(), line, column);
            return Ok(());
        }
        let _ = self.source;
        Err(self.err(format!("unexpected character {c:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    fn texts(src: &str) -> Vec<String> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .filter(|t| t.kind.is_significant())
            .map(|t| t.text)
            .collect()
    }

    #[test]
    fn simple_function() {
        let toks = kinds("def f():\n    return 1\n");
        let expect: Vec<(TokenKind, &str)> = vec![
            (TokenKind::Keyword, "def"),
            (TokenKind::Name, "f"),
            (TokenKind::Op, "("),
            (TokenKind::Op, ")"),
            (TokenKind::Op, ":"),
            (TokenKind::Newline, "\n"),
            (TokenKind::Indent, ""),
            (TokenKind::Keyword, "return"),
            (TokenKind::Number, "1"),
            (TokenKind::Newline, "\n"),
            (TokenKind::Dedent, ""),
            (TokenKind::EndMarker, ""),
        ];
        let got: Vec<(TokenKind, &str)> = toks.iter().map(|(k, t)| (*k, t.as_str())).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn implicit_continuation_inside_brackets() {
        let toks = texts("x = (1 +\n     2)\n");
        assert_eq!(toks, vec!["x", "=", "(", "1", "+", "2", ")"]);
    }

    #[test]
    fn explicit_backslash_continuation() {
        let toks = texts("x = 1 + \\\n    2\n");
        assert_eq!(toks, vec!["x", "=", "1", "+", "2"]);
        // No Newline token between the halves.
        let all = kinds("x = 1 + \\\n    2\n");
        let newlines = all.iter().filter(|(k, _)| *k == TokenKind::Newline).count();
        assert_eq!(newlines, 1);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let toks = texts("# header\n\nx = 1  # trailing\n");
        assert_eq!(toks, vec!["x", "=", "1"]);
    }

    #[test]
    fn string_variants() {
        assert_eq!(texts("s = 'a'\n"), vec!["s", "=", "'a'"]);
        assert_eq!(texts("s = \"a\\\"b\"\n"), vec!["s", "=", "\"a\\\"b\""]);
        assert_eq!(texts("s = '''a\nb'''\n"), vec!["s", "=", "'''a\nb'''"]);
        assert_eq!(texts("s = rb'\\d+'\n"), vec!["s", "=", "rb'\\d+'"]);
        assert_eq!(texts("s = f'{x}'\n"), vec!["s", "=", "f'{x}'"]);
    }

    #[test]
    fn unterminated_string_is_error() {
        assert!(tokenize("s = 'abc\n").is_err());
        assert!(tokenize("s = '''abc\n").is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(
            texts("a = 1_000 + 0xFF + 0b10 + 1.5e-3 + 2j + .5\n"),
            vec!["a", "=", "1_000", "+", "0xFF", "+", "0b10", "+", "1.5e-3", "+", "2j", "+", ".5"]
        );
        // Attribute access on an int literal keeps the dot separate.
        assert_eq!(texts("x = 1 .real\n"), vec!["x", "=", "1", ".", "real"]);
    }

    #[test]
    fn walrus_and_arrow() {
        assert_eq!(
            texts("def f(a) -> int:\n    return (b := a)\n"),
            vec!["def", "f", "(", "a", ")", "->", "int", ":", "return", "(", "b", ":=", "a", ")"]
        );
    }

    #[test]
    fn dedent_mismatch_is_error() {
        let res = tokenize("if x:\n    a = 1\n  b = 2\n");
        assert!(res.is_err());
    }

    #[test]
    fn multi_level_dedent() {
        let toks = kinds("if a:\n    if b:\n        x = 1\ny = 2\n");
        let dedents = toks.iter().filter(|(k, _)| *k == TokenKind::Dedent).count();
        assert_eq!(dedents, 2);
    }

    #[test]
    fn token_positions() {
        let toks = tokenize("x = 1\n").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (1, 0));
        assert_eq!((toks[1].line, toks[1].column), (1, 2));
        assert_eq!((toks[2].line, toks[2].column), (1, 4));
    }

    #[test]
    fn missing_trailing_newline_still_closes_line() {
        let toks = kinds("x = 1");
        assert!(toks.iter().any(|(k, _)| *k == TokenKind::Newline));
        assert_eq!(toks.last().unwrap().0, TokenKind::EndMarker);
    }

    #[test]
    fn unclosed_bracket_is_error() {
        assert!(tokenize("x = (1, 2\n").is_err());
    }
}
