//! Per-function and per-file code metrics: McCabe cyclomatic complexity,
//! lines of code, and Halstead measures.
//!
//! Decision points counted for McCabe: `if`, `elif`, `for`, `while`,
//! `except` arms, ternary conditional expressions, and comprehension `if`
//! clauses. `else`, `finally`, and `with` contribute nothing. Boolean
//! operators contribute nothing in the default mode; the extended mode adds
//! `operands - 1` per boolean operator node.
//!
//! `mccabe_sum` on [`FileMetrics`] is the cyclomatic complexity of the file
//! as a whole: all decision points across functions plus one (zero for files
//! without functions). Encapsulating part of a function in a new function
//! moves decision points without creating any, so this sum is invariant
//! under method extraction while the per-function maximum drops.

use serde::{Deserialize, Serialize};

use crate::source::{
    ExpressionKind, ExpressionNode, FunctionNode, SourceSpan, SourceUnit, StatementKind,
    StatementNode, TokenKind,
};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum McCabeMode {
    /// Statement-level branch counting.
    #[default]
    Standard,
    /// Additionally count `operands - 1` per boolean operator.
    ExtendedBoolOps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// Exclude blank lines, comment-only lines, and docstrings.
    #[default]
    Significant,
    /// Count every physical line / every token.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalsteadMeasures {
    pub distinct_operators: u64,
    pub distinct_operands: u64,
    pub total_operators: u64,
    pub total_operands: u64,
    pub vocabulary: u64,
    pub length: u64,
    pub volume: f64,
    pub difficulty: f64,
    pub effort: f64,
}

impl HalsteadMeasures {
    fn from_counts(n1: u64, n2: u64, big_n1: u64, big_n2: u64) -> HalsteadMeasures {
        let vocabulary = n1 + n2;
        let length = big_n1 + big_n2;
        // log2 of a vocabulary of one would zero out a non-empty body;
        // floor the base at two so volume vanishes only with length.
        let volume = length as f64 * (vocabulary.max(2) as f64).log2();
        let difficulty = if n2 == 0 { 0.0 } else { (n1 as f64 / 2.0) * (big_n2 as f64 / n2 as f64) };
        let effort = difficulty * volume;
        HalsteadMeasures {
            distinct_operators: n1,
            distinct_operands: n2,
            total_operators: big_n1,
            total_operands: big_n2,
            vocabulary,
            length,
            volume,
            difficulty,
            effort,
        }
    }

    pub fn empty() -> HalsteadMeasures {
        HalsteadMeasures::from_counts(0, 0, 0, 0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionMetrics {
    pub qualified_name: String,
    pub mccabe: u32,
    pub loc: u32,
    pub halstead: HalsteadMeasures,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileMetrics {
    /// Highest per-function McCabe; 0 when the file has no functions.
    pub mccabe_max: u32,
    /// Decision points across all functions plus one; 0 without functions.
    pub mccabe_sum: u32,
    pub loc: u32,
    pub function_count: u32,
    pub halstead: HalsteadMeasures,
}

impl FileMetrics {
    pub fn empty() -> FileMetrics {
        FileMetrics {
            mccabe_max: 0,
            mccabe_sum: 0,
            loc: 0,
            function_count: 0,
            halstead: HalsteadMeasures::empty(),
        }
    }
}

// ---------------------------------------------------------------------------
// McCabe
// ---------------------------------------------------------------------------

/// Cyclomatic complexity of one function: 1 + decision points in its own
/// body. Nested functions are excluded; they carry their own complexity.
pub fn mccabe(function: &FunctionNode) -> u32 {
    mccabe_with(function, McCabeMode::Standard)
}

pub fn mccabe_with(function: &FunctionNode, mode: McCabeMode) -> u32 {
    1 + statement_decisions(&function.body, mode)
}

fn statement_decisions(stmts: &[StatementNode], mode: McCabeMode) -> u32 {
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
        if let Some(cond) = &stmt.condition {
            count += expression_decisions(cond, mode);
        }
        if let Some(target) = &stmt.target {
            count += expression_decisions(target, mode);
        }
        count += statement_decisions(&stmt.children, mode);
    }
    count
}

fn expression_decisions(expr: &ExpressionNode, mode: McCabeMode) -> u32 {
    let own = match expr.kind {
        ExpressionKind::TernaryConditional | ExpressionKind::CompCondition => 1,
        ExpressionKind::BoolOp(_) if mode == McCabeMode::ExtendedBoolOps => {
            expr.operands.len().saturating_sub(1) as u32
        }
        _ => 0,
    };
    own + expr
        .operands
        .iter()
        .map(|o| expression_decisions(o, mode))
        .sum::<u32>()
}

// ---------------------------------------------------------------------------
// LOC
// ---------------------------------------------------------------------------

fn is_code_line(line: &str) -> bool {
    let trimmed = line.trim_start();
    !trimmed.is_empty() && !trimmed.starts_with('#')
}

/// File lines of code, excluding blank and comment-only lines.
pub fn loc_file(unit: &SourceUnit) -> u32 {
    loc_file_with(unit, CountMode::Significant)
}

pub fn loc_file_with(unit: &SourceUnit, mode: CountMode) -> u32 {
    match mode {
        CountMode::Raw => unit.lines.len() as u32,
        CountMode::Significant => unit.lines.iter().filter(|l| is_code_line(l)).count() as u32,
    }
}

/// Lines of code within a function's span.
pub fn loc_function(unit: &SourceUnit, function: &FunctionNode) -> u32 {
    loc_function_with(unit, function, CountMode::Significant)
}

pub fn loc_function_with(unit: &SourceUnit, function: &FunctionNode, mode: CountMode) -> u32 {
    let first = function.span.first.saturating_sub(1) as usize;
    let last = (function.span.last as usize).min(unit.lines.len());
    let lines = &unit.lines[first.min(last)..last];
    match mode {
        CountMode::Raw => lines.len() as u32,
        CountMode::Significant => lines.iter().filter(|l| is_code_line(l)).count() as u32,
    }
}

// ---------------------------------------------------------------------------
// Halstead
// ---------------------------------------------------------------------------

/// Operator/operand classification:
/// operators — keywords (except the literal keywords `True`/`False`/`None`)
/// and all operator/punctuation tokens; operands — identifiers, numbers,
/// and string literals. Docstrings are skipped unless counting raw.
fn classify_is_operand(kind: TokenKind, text: &str) -> bool {
    match kind {
        TokenKind::Name | TokenKind::Number | TokenKind::Str => true,
        TokenKind::Keyword => matches!(text, "True" | "False" | "None"),
        _ => false,
    }
}

fn halstead_of_range(
    unit: &SourceUnit,
    range: std::ops::Range<usize>,
    skip: &[SourceSpan],
    mode: CountMode,
) -> HalsteadMeasures {
    let mut distinct_operators: HashSet<&str> = HashSet::new();
    let mut distinct_operands: HashSet<&str> = HashSet::new();
    let (mut big_n1, mut big_n2) = (0u64, 0u64);
    for tok in &unit.tokens[range.start.min(unit.tokens.len())..range.end.min(unit.tokens.len())] {
        if !tok.kind.is_significant() {
            continue;
        }
        if mode == CountMode::Significant
            && tok.kind == TokenKind::Str
            && skip.iter().any(|s| span_contains(s, tok.line, tok.column))
        {
            continue;
        }
        if classify_is_operand(tok.kind, &tok.text) {
            distinct_operands.insert(tok.text.as_str());
            big_n2 += 1;
        } else {
            distinct_operators.insert(tok.text.as_str());
            big_n1 += 1;
        }
    }
    HalsteadMeasures::from_counts(
        distinct_operators.len() as u64,
        distinct_operands.len() as u64,
        big_n1,
        big_n2,
    )
}

fn span_contains(span: &SourceSpan, line: u32, column: u32) -> bool {
    (line > span.line || (line == span.line && column >= span.column))
        && (line < span.end_line || (line == span.end_line && column < span.end_column))
}

/// Spans of every docstring in the unit: the first string expression
/// statement of the module and of each function and class body.
fn docstring_spans(unit: &SourceUnit) -> Vec<SourceSpan> {
    fn push_first_string(stmts: &[StatementNode], spans: &mut Vec<SourceSpan>) {
        if let Some(first) = stmts.first() {
            if first.kind == StatementKind::ExpressionStatement {
                if let Some(expr) = &first.condition {
                    if is_string_literal(expr) {
                        spans.push(expr.span);
                    }
                }
            }
        }
    }
    let mut spans = Vec::new();
    push_first_string(&unit.module_statements, &mut spans);
    crate::source::walk_statements(&unit.module_statements, &mut |stmt| {
        if matches!(stmt.kind, StatementKind::FunctionDef | StatementKind::ClassDef) {
            push_first_string(&stmt.children, &mut spans);
        }
    });
    spans
}

fn is_string_literal(expr: &ExpressionNode) -> bool {
    expr.kind == ExpressionKind::LiteralConstant
        && expr
            .text
            .as_deref()
            .map_or(false, |t| t.contains('"') || t.contains('\''))
}

/// Halstead measures over a function body (the `def` header excluded).
pub fn halstead(unit: &SourceUnit, function: &FunctionNode) -> HalsteadMeasures {
    halstead_with(unit, function, CountMode::Significant)
}

pub fn halstead_with(unit: &SourceUnit, function: &FunctionNode, mode: CountMode) -> HalsteadMeasures {
    let skip = docstring_spans(unit);
    halstead_of_range(
        unit,
        function.body_tokens.start..function.body_tokens.end,
        &skip,
        mode,
    )
}

/// Halstead measures over the whole file.
pub fn file_halstead(unit: &SourceUnit) -> HalsteadMeasures {
    let skip = docstring_spans(unit);
    halstead_of_range(unit, 0..unit.tokens.len(), &skip, CountMode::Significant)
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

pub fn function_metrics(unit: &SourceUnit) -> Vec<FunctionMetrics> {
    unit.functions
        .iter()
        .map(|f| FunctionMetrics {
            qualified_name: f.qualified_name.clone(),
            mccabe: mccabe(f),
            loc: loc_function(unit, f),
            halstead: halstead(unit, f),
        })
        .collect()
}

pub fn file_metrics(unit: &SourceUnit) -> FileMetrics {
    if !unit.parse_ok {
        return FileMetrics::empty();
    }
    let per_function: Vec<u32> = unit.functions.iter().map(mccabe).collect();
    let mccabe_max = per_function.iter().copied().max().unwrap_or(0);
    let decisions: u32 = per_function.iter().map(|m| m - 1).sum();
    let mccabe_sum = if per_function.is_empty() { 0 } else { decisions + 1 };
    FileMetrics {
        mccabe_max,
        mccabe_sum,
        loc: loc_file(unit),
        function_count: unit.functions.len() as u32,
        halstead: file_halstead(unit),
    }
}
