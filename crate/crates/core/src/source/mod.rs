//! Structural model of one Python source file.
//!
//! The parser covers the practical subset the detectors and metrics need:
//! functions, classes, control flow, expressions, imports. Decorators are
//! tolerated and skipped; constructs outside the subset degrade to `Other`
//! nodes instead of failing the parse. Genuine syntax errors mark the unit
//! `parse_ok = false` and downstream analysis skips it.

mod parser;
mod tokens;

pub use tokens::{is_keyword, tokenize, Token, TokenKind, TokenizeError};

use std::path::{Path, PathBuf};

/// Inclusive 1-based line range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct LineSpan {
    pub first: u32,
    pub last: u32,
}

impl LineSpan {
    pub fn len(&self) -> u32 {
        self.last.saturating_sub(self.first) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, line: u32) -> bool {
        self.first <= line && line <= self.last
    }
}

/// Half-open index range into `SourceUnit::tokens`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    If,
    ElifArm,
    ElseArm,
    For,
    While,
    Try,
    ExceptArm,
    FinallyArm,
    With,
    Return,
    Raise,
    Pass,
    Assignment,
    ExpressionStatement,
    Import,
    ImportFrom,
    FunctionDef,
    ClassDef,
    Other,
}

impl StatementKind {
    /// Arm nodes only occur as children of their governing `if`/`try`; their
    /// children sit at the same nesting depth as the governing statement's
    /// direct children.
    pub fn is_arm(self) -> bool {
        matches!(
            self,
            StatementKind::ElifArm
                | StatementKind::ElseArm
                | StatementKind::ExceptArm
                | StatementKind::FinallyArm
        )
    }

    /// Statements whose body opens a nested block for nesting-depth purposes.
    pub fn opens_block(self) -> bool {
        matches!(
            self,
            StatementKind::If
                | StatementKind::For
                | StatementKind::While
                | StatementKind::Try
                | StatementKind::With
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOpKind {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpressionKind {
    TernaryConditional,
    BoolOp(BoolOpKind),
    Comparison,
    LiteralConstant,
    Name,
    Call,
    Parenthesized,
    Attribute,
    /// Comprehension or generator expression; its `if` clauses appear as
    /// `CompCondition` operands so complexity counting can see them.
    Comprehension,
    /// Wrapper around one comprehension `if` condition.
    CompCondition,
    Other,
}

/// Line/column span of an expression (line 1-based, column 0-based; end
/// position is exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

#[derive(Debug, Clone)]
pub struct ExpressionNode {
    pub kind: ExpressionKind,
    /// Identifier for `Name` and `Attribute` nodes, raw literal text for
    /// `LiteralConstant` nodes.
    pub text: Option<String>,
    pub operands: Vec<ExpressionNode>,
    pub is_constant: bool,
    pub span: SourceSpan,
}

impl ExpressionNode {
    /// True for the literal `True` or `False`.
    pub fn is_bool_literal(&self) -> bool {
        self.kind == ExpressionKind::LiteralConstant
            && matches!(self.text.as_deref(), Some("True") | Some("False"))
    }

    /// Structural equality ignoring spans; used to compare assignment targets.
    pub fn same_shape(&self, other: &ExpressionNode) -> bool {
        self.kind == other.kind
            && self.text == other.text
            && self.operands.len() == other.operands.len()
            && self
                .operands
                .iter()
                .zip(&other.operands)
                .all(|(a, b)| a.same_shape(b))
    }

    /// The expression with any wrapping parentheses removed.
    pub fn unwrap_parens(&self) -> &ExpressionNode {
        let mut node = self;
        while node.kind == ExpressionKind::Parenthesized && node.operands.len() == 1 {
            node = &node.operands[0];
        }
        node
    }
}

#[derive(Debug, Clone)]
pub struct StatementNode {
    pub kind: StatementKind,
    /// Governing expression: the condition of `if`/`elif`/`while`, the caught
    /// expression of `except`, the iterable of `for`, the value of `return` /
    /// `raise` / assignments, the expression of expression statements.
    pub condition: Option<ExpressionNode>,
    /// Assignment or `for` target.
    pub target: Option<ExpressionNode>,
    pub children: Vec<StatementNode>,
    pub span: LineSpan,
}

#[derive(Debug, Clone)]
pub struct FunctionNode {
    pub name: String,
    /// Dotted path including enclosing classes and functions.
    pub qualified_name: String,
    pub span: LineSpan,
    pub parameters: Vec<String>,
    pub body: Vec<StatementNode>,
    pub is_async: bool,
    /// Token indices of the body only (the `def` header is excluded).
    pub body_tokens: TokenRange,
}

#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    /// Raw physical lines, comments and blanks included.
    pub lines: Vec<String>,
    /// All functions and methods, nested and async included, in source order.
    pub functions: Vec<FunctionNode>,
    pub module_statements: Vec<StatementNode>,
    pub tokens: Vec<Token>,
    pub parse_ok: bool,
    pub parse_error: Option<String>,
}

impl SourceUnit {
    /// Significant tokens (keywords, names, numbers, strings, operators).
    pub fn significant_tokens(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| t.kind.is_significant())
    }

    pub fn line_count(&self) -> u32 {
        self.lines.len() as u32
    }

    /// The innermost function whose span contains `line`, if any.
    pub fn enclosing_function(&self, line: u32) -> Option<&FunctionNode> {
        self.functions
            .iter()
            .filter(|f| f.span.contains(line))
            .min_by_key(|f| f.span.len())
    }
}

/// Parse Python source text. Never panics or errors: a failed parse is a
/// value with `parse_ok = false` and empty structural facets.
pub fn parse_source(text: &str, path: impl AsRef<Path>) -> SourceUnit {
    let path = path.as_ref().to_path_buf();
    let lines: Vec<String> = split_lines(text);
    match tokenize(text) {
        Err(e) => SourceUnit {
            path,
            lines,
            functions: Vec::new(),
            module_statements: Vec::new(),
            tokens: Vec::new(),
            parse_ok: false,
            parse_error: Some(e.to_string()),
        },
        Ok(tokens) => match parser::parse_module(&tokens) {
            Ok((module_statements, mut functions)) => {
                functions.sort_by_key(|f| f.span.first);
                SourceUnit {
                    path,
                    lines,
                    functions,
                    module_statements,
                    tokens,
                    parse_ok: true,
                    parse_error: None,
                }
            }
            Err(e) => SourceUnit {
                path,
                lines,
                functions: Vec::new(),
                module_statements: Vec::new(),
                tokens,
                parse_ok: false,
                parse_error: Some(e),
            },
        },
    }
}

/// Decode raw bytes (UTF-8 with lossy replacement) and parse.
pub fn parse_bytes(bytes: &[u8], path: impl AsRef<Path>) -> SourceUnit {
    let text = String::from_utf8_lossy(bytes);
    parse_source(&text, path)
}

/// All functions in source order; empty when the unit failed to parse.
pub fn enumerate_functions(unit: &SourceUnit) -> &[FunctionNode] {
    if unit.parse_ok {
        &unit.functions
    } else {
        &[]
    }
}

/// Walk a statement list, visiting every node including arm children.
pub fn walk_statements<'a>(stmts: &'a [StatementNode], visit: &mut impl FnMut(&'a StatementNode)) {
    for stmt in stmts {
        visit(stmt);
        walk_statements(&stmt.children, visit);
    }
}

fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut lines: Vec<String> = text.split('\n').map(|l| l.trim_end_matches('\r').to_string()).collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_function() {
        let unit = parse_source("def f():\n    return 1\n", "a.py");
        assert!(unit.parse_ok);
        assert_eq!(unit.functions.len(), 1);
        let f = &unit.functions[0];
        assert_eq!(f.name, "f");
        assert_eq!(f.qualified_name, "f");
        assert_eq!((f.span.first, f.span.last), (1, 2));
        assert_eq!(f.body.len(), 1);
        assert_eq!(f.body[0].kind, StatementKind::Return);
    }

    #[test]
    fn malformed_input_is_a_value() {
        let unit = parse_source("def f(:\n", "a.py");
        assert!(!unit.parse_ok);
        assert!(unit.parse_error.is_some());
        assert!(unit.functions.is_empty());
        assert!(enumerate_functions(&unit).is_empty());
    }

    #[test]
    fn nested_functions_in_flat_list() {
        let src = "class C:\n    def m(self):\n        def g():\n            pass\n";
        let unit = parse_source(src, "a.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let names: Vec<&str> = unit.functions.iter().map(|f| f.qualified_name.as_str()).collect();
        assert_eq!(names, vec!["C.m", "C.m.g"]);
        // Nested function also appears inside its parent's body.
        let m = &unit.functions[0];
        assert!(m.body.iter().any(|s| s.kind == StatementKind::FunctionDef));
    }

    #[test]
    fn enumerate_in_line_order() {
        let src = "def a():\n    pass\n\nclass C:\n    def m(self):\n        pass\n\ndef b():\n    pass\n";
        let unit = parse_source(src, "a.py");
        let names: Vec<&str> = enumerate_functions(&unit).iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["a", "m", "b"]);
    }

    #[test]
    fn zero_defs() {
        let unit = parse_source("x = 1\n", "a.py");
        assert!(enumerate_functions(&unit).is_empty());
    }

    #[test]
    fn async_def_flagged() {
        let unit = parse_source("async def f():\n    pass\n", "a.py");
        assert_eq!(unit.functions.len(), 1);
        assert!(unit.functions[0].is_async);
    }

    #[test]
    fn lines_retained_verbatim() {
        let unit = parse_source("x = 1\n# comment\n\ny = 2\n", "a.py");
        assert_eq!(unit.lines, vec!["x = 1", "# comment", "", "y = 2"]);
    }

    #[test]
    fn empty_file() {
        let unit = parse_source("", "a.py");
        assert!(unit.parse_ok);
        assert!(unit.lines.is_empty());
        assert!(unit.module_statements.is_empty());
    }
}
