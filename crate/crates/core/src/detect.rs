//! The 17 alert detectors, with configurable thresholds.
//!
//! Threshold detectors fire strictly above their threshold: a count equal to
//! the threshold never fires. Function-scoped alerts are reported at the
//! `def` line. `superfluous-parens` and `wildcard-import` work on the token
//! stream; everything else walks the statement tree.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::source::{
    ExpressionKind, ExpressionNode, FunctionNode, SourceUnit, StatementKind, StatementNode,
    Token, TokenKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertKind {
    BroadExceptionCaught,
    ComparisonOfConstants,
    LineTooLong,
    PointlessStatement,
    SimplifiableIfExpression,
    SimplifiableIfStatement,
    SuperfluousParens,
    TooManyBooleanExpressions,
    TooManyBranches,
    TooManyLines,
    TooManyNestedBlocks,
    TooManyReturnStatements,
    TooManyStatements,
    TryExceptRaise,
    UnnecessaryPass,
    UsingConstantTest,
    WildcardImport,
}

pub const ALL_ALERT_KINDS: [AlertKind; 17] = [
    AlertKind::BroadExceptionCaught,
    AlertKind::ComparisonOfConstants,
    AlertKind::LineTooLong,
    AlertKind::PointlessStatement,
    AlertKind::SimplifiableIfExpression,
    AlertKind::SimplifiableIfStatement,
    AlertKind::SuperfluousParens,
    AlertKind::TooManyBooleanExpressions,
    AlertKind::TooManyBranches,
    AlertKind::TooManyLines,
    AlertKind::TooManyNestedBlocks,
    AlertKind::TooManyReturnStatements,
    AlertKind::TooManyStatements,
    AlertKind::TryExceptRaise,
    AlertKind::UnnecessaryPass,
    AlertKind::UsingConstantTest,
    AlertKind::WildcardImport,
];

impl AlertKind {
    pub fn name(self) -> &'static str {
        match self {
            AlertKind::BroadExceptionCaught => "broad-exception-caught",
            AlertKind::ComparisonOfConstants => "comparison-of-constants",
            AlertKind::LineTooLong => "line-too-long",
            AlertKind::PointlessStatement => "pointless-statement",
            AlertKind::SimplifiableIfExpression => "simplifiable-if-expression",
            AlertKind::SimplifiableIfStatement => "simplifiable-if-statement",
            AlertKind::SuperfluousParens => "superfluous-parens",
            AlertKind::TooManyBooleanExpressions => "too-many-boolean-expressions",
            AlertKind::TooManyBranches => "too-many-branches",
            AlertKind::TooManyLines => "too-many-lines",
            AlertKind::TooManyNestedBlocks => "too-many-nested-blocks",
            AlertKind::TooManyReturnStatements => "too-many-return-statements",
            AlertKind::TooManyStatements => "too-many-statements",
            AlertKind::TryExceptRaise => "try-except-raise",
            AlertKind::UnnecessaryPass => "unnecessary-pass",
            AlertKind::UsingConstantTest => "using-constant-test",
            AlertKind::WildcardImport => "wildcard-import",
        }
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlertKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_ALERT_KINDS
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown alert kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertInstance {
    pub kind: AlertKind,
    pub path: PathBuf,
    pub line: u32,
    pub function: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub max_branches: u32,
    pub max_statements: u32,
    pub max_returns: u32,
    pub max_nested_blocks: u32,
    pub max_bool_expr: u32,
    pub max_line_length: u32,
    pub max_module_lines: u32,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            max_branches: 12,
            max_statements: 50,
            max_returns: 6,
            max_nested_blocks: 5,
            max_bool_expr: 5,
            max_line_length: 100,
            max_module_lines: 1000,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), String> {
        let thresholds = [
            ("max_branches", self.max_branches),
            ("max_statements", self.max_statements),
            ("max_returns", self.max_returns),
            ("max_nested_blocks", self.max_nested_blocks),
            ("max_bool_expr", self.max_bool_expr),
            ("max_line_length", self.max_line_length),
            ("max_module_lines", self.max_module_lines),
        ];
        for (name, value) in thresholds {
            if value < 1 {
                return Err(format!("{name} must be >= 1"));
            }
        }
        Ok(())
    }
}

/// Run every detector on one parsed file. Unparsed units yield no alerts.
pub fn detect_all(unit: &SourceUnit, cfg: &DetectorConfig) -> Vec<AlertInstance> {
    if !unit.parse_ok {
        return Vec::new();
    }
    let mut alerts = Vec::new();
    detect_line_too_long(unit, cfg, &mut alerts);
    detect_too_many_lines(unit, cfg, &mut alerts);
    detect_function_scoped(unit, cfg, &mut alerts);
    walk_body(unit, &unit.module_statements, &mut alerts, cfg);
    detect_superfluous_parens(unit, &mut alerts);
    detect_wildcard_import(unit, &mut alerts);
    alerts.sort_by(|a, b| {
        a.line
            .cmp(&b.line)
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.detail.cmp(&b.detail))
    });
    alerts
}

/// Total instances per kind; kinds without instances map to 0.
pub fn count_by_kind(alerts: &[AlertInstance]) -> BTreeMap<AlertKind, u64> {
    let mut counts: BTreeMap<AlertKind, u64> = ALL_ALERT_KINDS.into_iter().map(|k| (k, 0)).collect();
    for alert in alerts {
        *counts.entry(alert.kind).or_insert(0) += 1;
    }
    counts
}

fn instance(
    unit: &SourceUnit,
    kind: AlertKind,
    line: u32,
    function: Option<&FunctionNode>,
    detail: String,
) -> AlertInstance {
    let function = function
        .map(|f| f.qualified_name.clone())
        .or_else(|| unit.enclosing_function(line).map(|f| f.qualified_name.clone()));
    AlertInstance { kind, path: unit.path.clone(), line, function, detail }
}

// ---------------------------------------------------------------------------
// Line-based detectors
// ---------------------------------------------------------------------------

fn detect_line_too_long(unit: &SourceUnit, cfg: &DetectorConfig, out: &mut Vec<AlertInstance>) {
    for (idx, line) in unit.lines.iter().enumerate() {
        let width = line.chars().count() as u32;
        if width > cfg.max_line_length {
            out.push(instance(
                unit,
                AlertKind::LineTooLong,
                idx as u32 + 1,
                None,
                format!("line is {width} characters, limit {}", cfg.max_line_length),
            ));
        }
    }
}

fn detect_too_many_lines(unit: &SourceUnit, cfg: &DetectorConfig, out: &mut Vec<AlertInstance>) {
    let count = unit.lines.len() as u32;
    if count > cfg.max_module_lines {
        out.push(instance(
            unit,
            AlertKind::TooManyLines,
            1,
            None,
            format!("module has {count} lines, limit {}", cfg.max_module_lines),
        ));
    }
}

// ---------------------------------------------------------------------------
// Function-scoped threshold detectors
// ---------------------------------------------------------------------------

fn detect_function_scoped(unit: &SourceUnit, cfg: &DetectorConfig, out: &mut Vec<AlertInstance>) {
    for function in &unit.functions {
        let branches = count_branch_arms(&function.body);
        if branches > cfg.max_branches {
            out.push(instance(
                unit,
                AlertKind::TooManyBranches,
                function.span.first,
                Some(function),
                format!("{branches} branches, limit {}", cfg.max_branches),
            ));
        }
        let statements = count_statements(&function.body);
        if statements > cfg.max_statements {
            out.push(instance(
                unit,
                AlertKind::TooManyStatements,
                function.span.first,
                Some(function),
                format!("{statements} statements, limit {}", cfg.max_statements),
            ));
        }
        let returns = count_returns(&function.body);
        if returns > cfg.max_returns {
            out.push(instance(
                unit,
                AlertKind::TooManyReturnStatements,
                function.span.first,
                Some(function),
                format!("{returns} return statements, limit {}", cfg.max_returns),
            ));
        }
        let nesting = max_nesting(&function.body, 0);
        if nesting > cfg.max_nested_blocks {
            out.push(instance(
                unit,
                AlertKind::TooManyNestedBlocks,
                function.span.first,
                Some(function),
                format!("nesting depth {nesting}, limit {}", cfg.max_nested_blocks),
            ));
        }
    }
}

/// Branch arms: if, elif, for, while, and except arms. Close to the McCabe
/// decision-point set, but statement-only (no ternaries or comprehension
/// conditions); the two are documented side by side deliberately.
fn count_branch_arms(stmts: &[StatementNode]) -> u32 {
    let mut count = 0;
    for stmt in stmts {
        if stmt.kind == StatementKind::FunctionDef {
            continue;
        }
        count += match stmt.kind {
            StatementKind::If
            | StatementKind::ElifArm
            | StatementKind::For
            | StatementKind::While
            | StatementKind::ExceptArm => 1,
            _ => 0,
        };
        count += count_branch_arms(&stmt.children);
    }
    count
}

/// Statement count: every statement node counts once, recursively. Arm
/// markers are free except `elif`, which is a nested `if` in disguise.
/// Nested function definitions count as one statement; their bodies do not.
fn count_statements(stmts: &[StatementNode]) -> u32 {
    let mut count = 0;
    for stmt in stmts {
        if stmt.kind == StatementKind::FunctionDef {
            count += 1;
            continue;
        }
        count += match stmt.kind {
            StatementKind::ElifArm => 1,
            k if k.is_arm() => 0,
            _ => 1,
        };
        count += count_statements(&stmt.children);
    }
    count
}

fn count_returns(stmts: &[StatementNode]) -> u32 {
    let mut count = 0;
    for stmt in stmts {
        if stmt.kind == StatementKind::FunctionDef {
            continue;
        }
        if stmt.kind == StatementKind::Return {
            count += 1;
        }
        count += count_returns(&stmt.children);
    }
    count
}

/// Deepest block nesting in a statement list. The function body is depth 0;
/// each if/for/while/try/with body adds one. Arm bodies (`else`, `elif`,
/// `except`, `finally`) sit at the same depth as their statement's body.
fn max_nesting(stmts: &[StatementNode], depth: u32) -> u32 {
    let mut max = depth;
    for stmt in stmts {
        let below = if stmt.kind == StatementKind::FunctionDef {
            depth
        } else if stmt.kind.is_arm() {
            max_nesting(&stmt.children, depth)
        } else if stmt.kind.opens_block() {
            max_nesting(&stmt.children, depth + 1)
        } else {
            max_nesting(&stmt.children, depth)
        };
        max = max.max(below);
    }
    max
}

// ---------------------------------------------------------------------------
// Statement-tree detectors
// ---------------------------------------------------------------------------

fn walk_body(
    unit: &SourceUnit,
    stmts: &[StatementNode],
    out: &mut Vec<AlertInstance>,
    cfg: &DetectorConfig,
) {
    let block_len = stmts.len();
    for (idx, stmt) in stmts.iter().enumerate() {
        match stmt.kind {
            StatementKind::If | StatementKind::ElifArm => {
                if let Some(cond) = &stmt.condition {
                    check_constant_test(unit, cond, stmt.span.first, out);
                    let terms = bool_terms(cond);
                    if terms > cfg.max_bool_expr {
                        out.push(instance(
                            unit,
                            AlertKind::TooManyBooleanExpressions,
                            stmt.span.first,
                            None,
                            format!("{terms} boolean terms, limit {}", cfg.max_bool_expr),
                        ));
                    }
                }
                if stmt.kind == StatementKind::If {
                    check_simplifiable_if_statement(unit, stmt, out);
                }
            }
            StatementKind::While => {
                if let Some(cond) = &stmt.condition {
                    check_constant_test(unit, cond, stmt.span.first, out);
                }
            }
            StatementKind::ExceptArm => {
                if let Some(caught) = &stmt.condition {
                    if names_exception(caught) {
                        out.push(instance(
                            unit,
                            AlertKind::BroadExceptionCaught,
                            stmt.span.first,
                            None,
                            "catching overly general exception Exception".into(),
                        ));
                    }
                }
                if is_bare_raise_body(&stmt.children) {
                    out.push(instance(
                        unit,
                        AlertKind::TryExceptRaise,
                        stmt.span.first,
                        None,
                        "except handler only re-raises".into(),
                    ));
                }
            }
            StatementKind::Pass => {
                if block_len > 1 {
                    out.push(instance(
                        unit,
                        AlertKind::UnnecessaryPass,
                        stmt.span.first,
                        None,
                        "pass in a block with other statements".into(),
                    ));
                }
            }
            StatementKind::ExpressionStatement => {
                let is_docstring_pos = idx == 0;
                check_pointless(unit, stmt, is_docstring_pos, out);
            }
            _ => {}
        }
        for expr in stmt.condition.iter().chain(stmt.target.iter()) {
            walk_expr(unit, expr, stmt.span.first, out);
        }
        walk_body(unit, &stmt.children, out, cfg);
    }
}

fn walk_expr(unit: &SourceUnit, expr: &ExpressionNode, line: u32, out: &mut Vec<AlertInstance>) {
    match expr.kind {
        ExpressionKind::Comparison => {
            let constant_pair = expr
                .operands
                .windows(2)
                .any(|pair| pair[0].is_constant && pair[1].is_constant);
            if constant_pair {
                out.push(instance(
                    unit,
                    AlertKind::ComparisonOfConstants,
                    expr.span.line,
                    None,
                    "comparison between constants".into(),
                ));
            }
        }
        ExpressionKind::TernaryConditional => {
            let body = expr.operands[0].unwrap_parens();
            let orelse = expr.operands[2].unwrap_parens();
            if body.is_bool_literal() && orelse.is_bool_literal() {
                out.push(instance(
                    unit,
                    AlertKind::SimplifiableIfExpression,
                    expr.span.line,
                    None,
                    "conditional expression yields boolean literals".into(),
                ));
            }
        }
        _ => {}
    }
    for operand in &expr.operands {
        walk_expr(unit, operand, line, out);
    }
}

fn check_constant_test(
    unit: &SourceUnit,
    cond: &ExpressionNode,
    line: u32,
    out: &mut Vec<AlertInstance>,
) {
    if cond.is_constant {
        out.push(instance(
            unit,
            AlertKind::UsingConstantTest,
            line,
            None,
            "test condition is constant".into(),
        ));
    }
}

/// `except Exception:` — directly or inside a caught tuple.
fn names_exception(expr: &ExpressionNode) -> bool {
    let expr = expr.unwrap_parens();
    match expr.kind {
        ExpressionKind::Name => expr.text.as_deref() == Some("Exception"),
        ExpressionKind::Other => expr.operands.iter().any(names_exception),
        _ => false,
    }
}

fn is_bare_raise_body(body: &[StatementNode]) -> bool {
    body.len() == 1 && body[0].kind == StatementKind::Raise && body[0].condition.is_none()
}

/// `if c: x = True else: x = False` (or returns); no elif arms, single
/// statement per arm, boolean literals, same assignment target.
fn check_simplifiable_if_statement(
    unit: &SourceUnit,
    stmt: &StatementNode,
    out: &mut Vec<AlertInstance>,
) {
    let arms: Vec<&StatementNode> = stmt.children.iter().filter(|c| c.kind.is_arm()).collect();
    if arms.len() != 1 || arms[0].kind != StatementKind::ElseArm {
        return;
    }
    let then_body: Vec<&StatementNode> =
        stmt.children.iter().filter(|c| !c.kind.is_arm()).collect();
    let else_body: Vec<&StatementNode> = arms[0].children.iter().collect();
    if then_body.len() != 1 || else_body.len() != 1 {
        return;
    }
    let (a, b) = (then_body[0], else_body[0]);
    let simplifiable = match (a.kind, b.kind) {
        (StatementKind::Return, StatementKind::Return) => {
            bool_literal_value(a) && bool_literal_value(b)
        }
        (StatementKind::Assignment, StatementKind::Assignment) => {
            bool_literal_value(a)
                && bool_literal_value(b)
                && match (&a.target, &b.target) {
                    (Some(ta), Some(tb)) => ta.same_shape(tb),
                    _ => false,
                }
        }
        _ => false,
    };
    if simplifiable {
        out.push(instance(
            unit,
            AlertKind::SimplifiableIfStatement,
            stmt.span.first,
            None,
            "if/else assigns or returns boolean literals".into(),
        ));
    }
}

fn bool_literal_value(stmt: &StatementNode) -> bool {
    stmt.condition
        .as_ref()
        .map_or(false, |v| v.unwrap_parens().is_bool_literal())
}

fn check_pointless(
    unit: &SourceUnit,
    stmt: &StatementNode,
    is_docstring_position: bool,
    out: &mut Vec<AlertInstance>,
) {
    let Some(expr) = &stmt.condition else { return };
    let expr = expr.unwrap_parens();
    match expr.kind {
        ExpressionKind::Call => return,
        ExpressionKind::Other => {
            if matches!(expr.text.as_deref(), Some("yield") | Some("await")) {
                return;
            }
        }
        ExpressionKind::LiteralConstant => {
            let is_string = expr
                .text
                .as_deref()
                .map_or(false, |t| t.contains('"') || t.contains('\''));
            if is_string && is_docstring_position {
                return;
            }
        }
        _ => {}
    }
    out.push(instance(
        unit,
        AlertKind::PointlessStatement,
        stmt.span.first,
        None,
        "statement has no effect".into(),
    ));
}

/// Flattened boolean-term count, looking through parentheses.
fn bool_terms(expr: &ExpressionNode) -> u32 {
    let expr = expr.unwrap_parens();
    match expr.kind {
        ExpressionKind::BoolOp(_) => expr.operands.iter().map(bool_terms).sum(),
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// Token-level detectors
// ---------------------------------------------------------------------------

const PAREN_KEYWORDS: &[&str] = &["if", "while", "elif", "return", "assert", "not", "del", "yield"];

fn detect_superfluous_parens(unit: &SourceUnit, out: &mut Vec<AlertInstance>) {
    let tokens = &unit.tokens;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword || !PAREN_KEYWORDS.contains(&tok.text.as_str()) {
            continue;
        }
        let Some(open) = tokens.get(i + 1) else { continue };
        if !(open.kind == TokenKind::Op && open.text == "(") {
            continue;
        }
        let Some(close_idx) = matching_paren(tokens, i + 1) else { continue };
        let content = &tokens[i + 2..close_idx];
        if content.is_empty() {
            continue;
        }
        // A multi-line group needs the parentheses for line continuation.
        if open.line != tokens[close_idx].line {
            continue;
        }
        // A top-level comma means a tuple; the parentheses are meaningful.
        if has_top_level_comma(content) {
            continue;
        }
        // `return (yield)` and friends: parentheses are required.
        if content[0].kind == TokenKind::Keyword && content[0].text == "yield" {
            continue;
        }
        let fires = match tok.text.as_str() {
            // `not (x)` is only safely removable around a single atom.
            "not" => content.len() == 1 && content[0].kind.is_significant(),
            "if" | "while" | "elif" => next_is(tokens, close_idx + 1, ":"),
            _ => ends_statement(tokens, close_idx + 1),
        };
        if fires {
            out.push(instance(
                unit,
                AlertKind::SuperfluousParens,
                tok.line,
                None,
                format!("unnecessary parentheses after {:?}", tok.text),
            ));
        }
    }
}

fn matching_paren(tokens: &[Token], open_idx: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, tok) in tokens.iter().enumerate().skip(open_idx) {
        if tok.kind == TokenKind::Op {
            match tok.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(j);
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn has_top_level_comma(content: &[Token]) -> bool {
    let mut depth = 0usize;
    for tok in content {
        if tok.kind == TokenKind::Op {
            match tok.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                "," if depth == 0 => return true,
                _ => {}
            }
        }
    }
    false
}

fn next_is(tokens: &[Token], idx: usize, text: &str) -> bool {
    tokens
        .get(idx)
        .map_or(false, |t| t.kind == TokenKind::Op && t.text == text)
}

fn ends_statement(tokens: &[Token], idx: usize) -> bool {
    tokens.get(idx).map_or(true, |t| {
        matches!(t.kind, TokenKind::Newline | TokenKind::EndMarker)
            || (t.kind == TokenKind::Op && t.text == ";")
    })
}

fn detect_wildcard_import(unit: &SourceUnit, out: &mut Vec<AlertInstance>) {
    let tokens = &unit.tokens;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword || tok.text != "import" {
            continue;
        }
        let star_next = tokens
            .get(i + 1)
            .map_or(false, |t| t.kind == TokenKind::Op && t.text == "*");
        if !star_next {
            continue;
        }
        // Same logical line must have started with `from`.
        let from_line = tokens[..i]
            .iter()
            .rev()
            .take_while(|t| t.kind.is_significant())
            .any(|t| t.kind == TokenKind::Keyword && t.text == "from");
        if from_line {
            out.push(instance(
                unit,
                AlertKind::WildcardImport,
                tok.line,
                None,
                "wildcard import".into(),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_source;

    fn detect(src: &str) -> Vec<AlertInstance> {
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "fixture must parse: {:?}", unit.parse_error);
        detect_all(&unit, &DetectorConfig::default())
    }

    fn detect_with(src: &str, cfg: &DetectorConfig) -> Vec<AlertInstance> {
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "fixture must parse: {:?}", unit.parse_error);
        detect_all(&unit, cfg)
    }

    fn kinds(alerts: &[AlertInstance]) -> Vec<AlertKind> {
        alerts.iter().map(|a| a.kind).collect()
    }

    fn branchy_function(branches: u32) -> String {
        let mut src = String::from("def f(a):\n");
        for _ in 0..branches {
            src.push_str("    if a:\n        a -= 1\n");
        }
        src.push_str("    return a\n");
        src
    }

    #[test]
    fn too_many_branches_boundary() {
        let cfg = DetectorConfig { max_branches: 12, ..DetectorConfig::default() };
        assert!(kinds(&detect_with(&branchy_function(12), &cfg)).is_empty());
        let alerts = detect_with(&branchy_function(13), &cfg);
        assert_eq!(kinds(&alerts), vec![AlertKind::TooManyBranches]);
        assert_eq!(alerts[0].line, 1);
        assert_eq!(alerts[0].function.as_deref(), Some("f"));
    }

    #[test]
    fn simplifiable_if_expression_fires() {
        let alerts = detect("def f(y):\n    x = True if y else False\n    return x\n");
        assert_eq!(kinds(&alerts), vec![AlertKind::SimplifiableIfExpression]);
        assert_eq!(alerts[0].line, 2);
        // Non-literal arms do not fire.
        assert!(detect("def f(y):\n    x = 1 if y else 2\n    return x\n").is_empty());
    }

    #[test]
    fn simplifiable_if_statement_fires() {
        let src = "def f(c):\n    if c:\n        x = True\n    else:\n        x = False\n    return x\n";
        assert_eq!(kinds(&detect(src)), vec![AlertKind::SimplifiableIfStatement]);
        let returns = "def f(c):\n    if c:\n        return True\n    else:\n        return False\n";
        assert_eq!(kinds(&detect(returns)), vec![AlertKind::SimplifiableIfStatement]);
        // Different targets do not fire.
        let diff = "def f(c):\n    if c:\n        x = True\n    else:\n        y = False\n    return x\n";
        assert!(detect(diff).is_empty());
        // An elif chain does not fire.
        let elif = "def f(c):\n    if c:\n        return True\n    elif c > 1:\n        return False\n    else:\n        return False\n";
        assert!(detect(elif).is_empty());
    }

    #[test]
    fn broad_exception_caught() {
        let src = "try:\n    f()\nexcept Exception:\n    handle()\n";
        assert_eq!(kinds(&detect(src)), vec![AlertKind::BroadExceptionCaught]);
        let tuple = "try:\n    f()\nexcept (ValueError, Exception):\n    handle()\n";
        assert_eq!(kinds(&detect(tuple)), vec![AlertKind::BroadExceptionCaught]);
        let narrow = "try:\n    f()\nexcept ValueError:\n    handle()\n";
        assert!(detect(narrow).is_empty());
    }

    #[test]
    fn try_except_raise() {
        let src = "try:\n    f()\nexcept ValueError:\n    raise\n";
        assert_eq!(kinds(&detect(src)), vec![AlertKind::TryExceptRaise]);
        let wrapped = "try:\n    f()\nexcept ValueError:\n    raise RuntimeError()\n";
        assert!(detect(wrapped).is_empty());
        let logged = "try:\n    f()\nexcept ValueError:\n    log()\n    raise\n";
        assert!(detect(logged).is_empty());
    }

    #[test]
    fn comparison_of_constants() {
        assert_eq!(kinds(&detect("x = 1 == 2\n")), vec![AlertKind::ComparisonOfConstants]);
        assert!(detect("y = 2\nx = y == 2\n").is_empty());
        // Chained with one constant pair.
        assert_eq!(
            kinds(&detect("def f(z):\n    return 1 < 2 < z\n")),
            vec![AlertKind::ComparisonOfConstants]
        );
    }

    #[test]
    fn using_constant_test() {
        assert_eq!(kinds(&detect("if True:\n    x = 1\n")), vec![AlertKind::UsingConstantTest]);
        assert_eq!(kinds(&detect("while 1:\n    break\n")), vec![AlertKind::UsingConstantTest]);
        assert!(detect("y = 0\nif y:\n    x = 1\n").is_empty());
    }

    #[test]
    fn pointless_statement() {
        assert_eq!(kinds(&detect("x = 1\nx == 2\n")), vec![AlertKind::PointlessStatement]);
        assert!(detect("f()\n").is_empty());
        // Docstrings are fine, at module, class, and function level.
        let doc = "\"\"\"module\"\"\"\n\nclass C:\n    \"docs\"\n    def m(self):\n        'm docs'\n        return 1\n";
        assert!(detect(doc).is_empty());
        // A string not in docstring position is pointless.
        assert_eq!(kinds(&detect("x = 1\n'stray'\n")), vec![AlertKind::PointlessStatement]);
        // yield/await statements are fine.
        assert!(detect("def g():\n    yield 1\n").is_empty());
        assert!(detect("async def f(t):\n    await t\n").is_empty());
    }

    #[test]
    fn unnecessary_pass() {
        let src = "def f():\n    x = 1\n    pass\n";
        assert_eq!(kinds(&detect(src)), vec![AlertKind::UnnecessaryPass]);
        // pass alongside a docstring fires too.
        let doc = "def f():\n    \"docs\"\n    pass\n";
        assert_eq!(kinds(&detect(doc)), vec![AlertKind::UnnecessaryPass]);
        assert!(detect("def f():\n    pass\n").is_empty());
    }

    #[test]
    fn wildcard_import() {
        assert_eq!(kinds(&detect("from os.path import *\n")), vec![AlertKind::WildcardImport]);
        assert!(detect("from os.path import join\nimport sys\n").is_empty());
        assert!(detect("x = 3 * 4\n").is_empty());
    }

    #[test]
    fn superfluous_parens() {
        assert_eq!(kinds(&detect("x = 0\nif (x):\n    pass\n")), vec![AlertKind::SuperfluousParens]);
        assert_eq!(
            kinds(&detect("def f(a):\n    return (a + 1)\n")),
            vec![AlertKind::SuperfluousParens]
        );
        assert_eq!(
            kinds(&detect("x = 1\nwhile (x > 0):\n    x -= 1\n")),
            vec![AlertKind::SuperfluousParens]
        );
        // Partial grouping, tuples, and multi-line groups keep their parens.
        assert!(detect("x = 0\ny = 1\nif (x) and y:\n    pass\n").is_empty());
        assert!(detect("def f(a, b):\n    return (a, b)\n").is_empty());
        assert!(detect("def f(a, b):\n    return (a +\n            b)\n").is_empty());
        assert!(detect("def f():\n    return ()\n").is_empty());
        // `not (atom)` fires; `not (compound)` does not.
        assert_eq!(
            kinds(&detect("def f(a, b):\n    return not (a) and b\n")),
            vec![AlertKind::SuperfluousParens]
        );
        assert!(detect("def f(a, b):\n    return not (a or b)\n").is_empty());
    }

    #[test]
    fn too_many_boolean_expressions() {
        let cfg = DetectorConfig { max_bool_expr: 5, ..DetectorConfig::default() };
        let five = "def f(a, b, c, d, e):\n    if a and b and c and d and e:\n        pass\n";
        assert!(detect_with(five, &cfg).is_empty());
        let six = "def f(a, b, c, d, e, g):\n    if a and b and c and d and e and g:\n        pass\n";
        assert_eq!(kinds(&detect_with(six, &cfg)), vec![AlertKind::TooManyBooleanExpressions]);
        // Parenthesized sub-terms still count individually.
        let mixed = "def f(a, b, c, d, e, g):\n    if (a or b) and (c or d) and (e or g):\n        pass\n";
        assert_eq!(kinds(&detect_with(mixed, &cfg)), vec![AlertKind::TooManyBooleanExpressions]);
    }

    #[test]
    fn too_many_lines_boundary() {
        let cfg = DetectorConfig { max_module_lines: 10, ..DetectorConfig::default() };
        let ten: String = (0..10).map(|i| format!("x{i} = {i}\n")).collect();
        assert!(detect_with(&ten, &cfg).is_empty());
        let eleven: String = (0..11).map(|i| format!("x{i} = {i}\n")).collect();
        let alerts = detect_with(&eleven, &cfg);
        assert_eq!(kinds(&alerts), vec![AlertKind::TooManyLines]);
        assert_eq!(alerts[0].line, 1);
    }

    #[test]
    fn line_too_long_boundary() {
        let cfg = DetectorConfig { max_line_length: 20, ..DetectorConfig::default() };
        let ok = format!("x = {:?}\n", "a".repeat(14)); // exactly 20 chars
        assert_eq!(ok.trim_end().chars().count(), 20);
        assert!(detect_with(&ok, &cfg).is_empty());
        let long = format!("x = {:?}\n", "a".repeat(15));
        let alerts = detect_with(&long, &cfg);
        assert_eq!(kinds(&alerts), vec![AlertKind::LineTooLong]);
    }

    #[test]
    fn too_many_returns_boundary() {
        let cfg = DetectorConfig { max_returns: 2, ..DetectorConfig::default() };
        let two = "def f(a):\n    if a:\n        return 1\n    return 2\n";
        assert!(detect_with(two, &cfg).is_empty());
        let three = "def f(a):\n    if a:\n        return 1\n    if a > 2:\n        return 2\n    return 3\n";
        assert_eq!(kinds(&detect_with(three, &cfg)), vec![AlertKind::TooManyReturnStatements]);
    }

    #[test]
    fn too_many_statements_boundary() {
        let cfg = DetectorConfig { max_statements: 5, ..DetectorConfig::default() };
        let mut five = String::from("def f():\n");
        for i in 0..5 {
            five.push_str(&format!("    x{i} = {i}\n"));
        }
        assert!(detect_with(&five, &cfg).is_empty());
        let mut six = five.clone();
        six.push_str("    x9 = 9\n");
        assert_eq!(kinds(&detect_with(&six, &cfg)), vec![AlertKind::TooManyStatements]);
    }

    #[test]
    fn too_many_nested_blocks_boundary() {
        fn nested(depth: u32) -> String {
            let mut src = String::from("def f(a):\n");
            for level in 0..depth {
                let pad = "    ".repeat(level as usize + 1);
                src.push_str(&format!("{pad}if a > {level}:\n"));
            }
            let pad = "    ".repeat(depth as usize + 1);
            src.push_str(&format!("{pad}a = 0\n"));
            src
        }
        let cfg = DetectorConfig { max_nested_blocks: 5, ..DetectorConfig::default() };
        assert!(detect_with(&nested(5), &cfg).is_empty());
        assert_eq!(kinds(&detect_with(&nested(6), &cfg)), vec![AlertKind::TooManyNestedBlocks]);
        // else/except arms do not add a level of their own.
        let with_else = "def f(a):\n    if a:\n        x = 1\n    else:\n        if a > 1:\n            if a > 2:\n                if a > 3:\n                    if a > 4:\n                        x = 2\n";
        assert!(detect_with(with_else, &cfg).is_empty());
    }

    #[test]
    fn count_by_kind_totals() {
        let alerts = detect("from a import *\nfrom b import *\nx = 1 == 1\n");
        let counts = count_by_kind(&alerts);
        assert_eq!(counts[&AlertKind::WildcardImport], 2);
        assert_eq!(counts[&AlertKind::ComparisonOfConstants], 1);
        assert_eq!(counts[&AlertKind::LineTooLong], 0);
        let total: u64 = counts.values().sum();
        assert_eq!(total, alerts.len() as u64);
        assert_eq!(counts.len(), ALL_ALERT_KINDS.len());
    }

    #[test]
    fn detectors_ignore_unparsed_units() {
        let unit = parse_source("def f(:\n", "t.py");
        assert!(detect_all(&unit, &DetectorConfig::default()).is_empty());
    }

    #[test]
    fn determinism() {
        let src = "from x import *\nif (True):\n    pass\n";
        assert_eq!(detect(src), detect(src));
    }

    #[test]
    fn alert_kind_round_trip() {
        for kind in ALL_ALERT_KINDS {
            assert_eq!(kind.name().parse::<AlertKind>().unwrap(), kind);
        }
        assert!("no-such-alert".parse::<AlertKind>().is_err());
    }
}
