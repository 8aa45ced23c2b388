//! Recursive-descent parser over the token stream.
//!
//! Statements the subset does not model are consumed into `Other` nodes,
//! keeping their suites so nested definitions are still discovered. Syntax
//! errors abort the whole parse; the caller records the diagnostic on the
//! `SourceUnit`.

use super::tokens::{Token, TokenKind};
use super::{
    BoolOpKind, ExpressionKind, ExpressionNode, FunctionNode, LineSpan, SourceSpan, StatementKind,
    StatementNode, TokenRange,
};

type PResult<T> = Result<T, String>;

pub fn parse_module(tokens: &[Token]) -> PResult<(Vec<StatementNode>, Vec<FunctionNode>)> {
    let mut p = Parser {
        tokens,
        pos: 0,
        scope: Vec::new(),
        functions: Vec::new(),
        used_names: std::collections::HashSet::new(),
    };
    let mut stmts = Vec::new();
    while !p.at(TokenKind::EndMarker) {
        stmts.push(p.parse_statement()?);
    }
    Ok((stmts, p.functions))
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    scope: Vec<String>,
    functions: Vec<FunctionNode>,
    used_names: std::collections::HashSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, off: usize) -> &Token {
        &self.tokens[(self.pos + off).min(self.tokens.len() - 1)]
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().kind == kind
    }

    fn at_op(&self, text: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Op && t.text == text
    }

    fn at_kw(&self, text: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Keyword && t.text == text
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect_op(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at_op(text) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("expected {text:?}")))
        }
    }

    fn expect_kw(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at_kw(text) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("expected keyword {text:?}")))
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        if self.at(TokenKind::Newline) {
            self.bump();
            Ok(())
        } else if self.at(TokenKind::EndMarker) {
            Ok(())
        } else {
            Err(self.unexpected("expected end of line"))
        }
    }

    fn unexpected(&self, what: &str) -> String {
        let t = self.peek();
        format!("line {}: {} but found {:?}", t.line, what, t.text)
    }

    // ------------------------------------------------------------------
    // Statements
    // ------------------------------------------------------------------

    fn parse_statement(&mut self) -> PResult<StatementNode> {
        let t = self.peek();
        match t.kind {
            TokenKind::Keyword => match t.text.as_str() {
                "if" => self.parse_if(),
                "while" => self.parse_while(),
                "for" => self.parse_for(false),
                "try" => self.parse_try(),
                "with" => self.parse_with(false),
                "def" => self.parse_def(false),
                "class" => self.parse_class(),
                "async" => {
                    let next = self.peek_at(1);
                    match next.text.as_str() {
                        "def" => {
                            self.bump();
                            self.parse_def(true)
                        }
                        "for" => {
                            self.bump();
                            self.parse_for(true)
                        }
                        "with" => {
                            self.bump();
                            self.parse_with(true)
                        }
                        _ => self.parse_simple_or_unknown(),
                    }
                }
                "elif" | "else" | "except" | "finally" => {
                    Err(self.unexpected("orphaned clause keyword"))
                }
                _ => self.parse_simple_or_unknown(),
            },
            TokenKind::Op if t.text == "@" => {
                // Decorator: skip to end of its logical line, then parse the
                // decorated statement.
                while !self.at(TokenKind::Newline) && !self.at(TokenKind::EndMarker) {
                    self.bump();
                }
                self.expect_newline()?;
                self.parse_statement()
            }
            TokenKind::Indent => Err(self.unexpected("unexpected indent")),
            TokenKind::Dedent | TokenKind::EndMarker => Err(self.unexpected("expected statement")),
            _ => self.parse_simple_or_unknown(),
        }
    }

    /// Simple-statement line with degradation: anything the expression
    /// grammar rejects is consumed as an `Other` statement (with its suite,
    /// when it opened one) rather than failing the file.
    fn parse_simple_or_unknown(&mut self) -> PResult<StatementNode> {
        let save = self.pos;
        match self.parse_simple_line() {
            Ok(stmt) => Ok(stmt),
            Err(_) => {
                self.pos = save;
                self.parse_unknown()
            }
        }
    }

    /// One or more simple statements separated by `;`, ending at newline.
    /// Returns a single node when the line has one statement, otherwise an
    /// `Other` wrapper is avoided by returning the first and pushing the rest
    /// is impossible — so callers that accept multiple use parse_simple_list.
    fn parse_simple_line(&mut self) -> PResult<StatementNode> {
        let mut stmts = self.parse_simple_list()?;
        if stmts.len() == 1 {
            Ok(stmts.pop().unwrap())
        } else {
            // Rare `a = 1; b = 2` line: keep all statements as children of a
            // transparent Other node so none are lost.
            let first = stmts.first().unwrap().span.first;
            let last = stmts.last().unwrap().span.last;
            Ok(StatementNode {
                kind: StatementKind::Other,
                condition: None,
                target: None,
                children: stmts,
                span: LineSpan { first, last },
            })
        }
    }

    fn parse_simple_list(&mut self) -> PResult<Vec<StatementNode>> {
        let mut stmts = vec![self.parse_small_statement()?];
        while self.at_op(";") {
            self.bump();
            if self.at(TokenKind::Newline) || self.at(TokenKind::EndMarker) {
                break;
            }
            stmts.push(self.parse_small_statement()?);
        }
        self.expect_newline()?;
        Ok(stmts)
    }

    fn parse_small_statement(&mut self) -> PResult<StatementNode> {
        let t = self.peek();
        let line = t.line;
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "return" => {
                    self.bump();
                    let value = if self.stmt_end() { None } else { Some(self.parse_expr_list()?) };
                    return Ok(self.simple(StatementKind::Return, value, None, line));
                }
                "raise" => {
                    self.bump();
                    let value = if self.stmt_end() {
                        None
                    } else {
                        let v = self.parse_ternary()?;
                        if self.at_kw("from") {
                            self.bump();
                            self.parse_ternary()?;
                        }
                        Some(v)
                    };
                    return Ok(self.simple(StatementKind::Raise, value, None, line));
                }
                "pass" => {
                    self.bump();
                    return Ok(self.simple(StatementKind::Pass, None, None, line));
                }
                "import" => {
                    self.skip_to_stmt_end();
                    return Ok(self.simple(StatementKind::Import, None, None, line));
                }
                "from" => {
                    self.skip_to_stmt_end();
                    return Ok(self.simple(StatementKind::ImportFrom, None, None, line));
                }
                "break" | "continue" => {
                    self.bump();
                    return Ok(self.simple(StatementKind::Other, None, None, line));
                }
                "global" | "nonlocal" => {
                    self.skip_to_stmt_end();
                    return Ok(self.simple(StatementKind::Other, None, None, line));
                }
                "del" => {
                    self.bump();
                    let target = self.parse_expr_list()?;
                    return Ok(self.simple(StatementKind::Other, None, Some(target), line));
                }
                "assert" => {
                    self.bump();
                    let cond = self.parse_ternary()?;
                    if self.at_op(",") {
                        self.bump();
                        self.parse_ternary()?;
                    }
                    return Ok(self.simple(StatementKind::Other, Some(cond), None, line));
                }
                _ => {}
            }
        }
        // Expression statement, assignment, or annotated assignment.
        let first = self.parse_expr_list()?;
        if self.at_op(":") {
            // Annotated assignment: `name: type [= value]`.
            self.bump();
            self.parse_ternary()?;
            let value = if self.at_op("=") {
                self.bump();
                Some(self.parse_assign_value()?)
            } else {
                None
            };
            return Ok(self.simple(StatementKind::Assignment, value, Some(first), line));
        }
        if self.at_op("=") {
            let mut targets = vec![first];
            let mut value = None;
            while self.at_op("=") {
                self.bump();
                let rhs = self.parse_assign_value()?;
                if self.at_op("=") {
                    targets.push(rhs);
                } else {
                    value = Some(rhs);
                }
            }
            return Ok(self.simple(StatementKind::Assignment, value, Some(targets.swap_remove(0)), line));
        }
        const AUG_OPS: &[&str] = &[
            "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@=",
        ];
        if self.peek().kind == TokenKind::Op && AUG_OPS.contains(&self.peek().text.as_str()) {
            self.bump();
            let value = self.parse_assign_value()?;
            return Ok(self.simple(StatementKind::Assignment, Some(value), Some(first), line));
        }
        Ok(self.simple(StatementKind::ExpressionStatement, Some(first), None, line))
    }

    fn parse_assign_value(&mut self) -> PResult<ExpressionNode> {
        if self.at_kw("yield") {
            self.parse_yield()
        } else {
            self.parse_expr_list()
        }
    }

    fn stmt_end(&self) -> bool {
        self.at(TokenKind::Newline) || self.at(TokenKind::EndMarker) || self.at_op(";")
    }

    fn skip_to_stmt_end(&mut self) {
        while !self.stmt_end() {
            self.bump();
        }
    }

    fn prev_line(&self) -> u32 {
        if self.pos == 0 {
            1
        } else {
            self.tokens[self.pos - 1].line
        }
    }

    fn simple(
        &self,
        kind: StatementKind,
        condition: Option<ExpressionNode>,
        target: Option<ExpressionNode>,
        first_line: u32,
    ) -> StatementNode {
        StatementNode {
            kind,
            condition,
            target,
            children: Vec::new(),
            span: LineSpan { first: first_line, last: self.prev_line() },
        }
    }

    // ------------------------------------------------------------------
    // Compound statements
    // ------------------------------------------------------------------

    fn parse_if(&mut self) -> PResult<StatementNode> {
        let line = self.expect_kw("if")?.line;
        let cond = self.parse_namedexpr()?;
        let (mut children, _) = self.parse_suite()?;
        while self.at_kw("elif") {
            let arm_line = self.bump().line;
            let arm_cond = self.parse_namedexpr()?;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ElifArm, Some(arm_cond), arm_body, arm_line));
        }
        if self.at_kw("else") {
            let arm_line = self.bump().line;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ElseArm, None, arm_body, arm_line));
        }
        Ok(self.compound(StatementKind::If, Some(cond), None, children, line))
    }

    fn parse_while(&mut self) -> PResult<StatementNode> {
        let line = self.expect_kw("while")?.line;
        let cond = self.parse_namedexpr()?;
        let (mut children, _) = self.parse_suite()?;
        if self.at_kw("else") {
            let arm_line = self.bump().line;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ElseArm, None, arm_body, arm_line));
        }
        Ok(self.compound(StatementKind::While, Some(cond), None, children, line))
    }

    fn parse_for(&mut self, _is_async: bool) -> PResult<StatementNode> {
        let line = self.expect_kw("for")?.line;
        let target = self.parse_target_list()?;
        self.expect_kw("in")?;
        let iter = self.parse_expr_list()?;
        let (mut children, _) = self.parse_suite()?;
        if self.at_kw("else") {
            let arm_line = self.bump().line;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ElseArm, None, arm_body, arm_line));
        }
        Ok(self.compound(StatementKind::For, Some(iter), Some(target), children, line))
    }

    fn parse_try(&mut self) -> PResult<StatementNode> {
        let line = self.expect_kw("try")?.line;
        let (mut children, _) = self.parse_suite()?;
        while self.at_kw("except") {
            let arm_line = self.bump().line;
            // `except*` exception groups: tolerate the star.
            if self.at_op("*") {
                self.bump();
            }
            let caught = if self.at_op(":") {
                None
            } else {
                let e = self.parse_ternary()?;
                if self.at_kw("as") {
                    self.bump();
                    self.bump(); // binder name
                }
                Some(e)
            };
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ExceptArm, caught, arm_body, arm_line));
        }
        if self.at_kw("else") {
            let arm_line = self.bump().line;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::ElseArm, None, arm_body, arm_line));
        }
        if self.at_kw("finally") {
            let arm_line = self.bump().line;
            let (arm_body, _) = self.parse_suite()?;
            children.push(self.arm(StatementKind::FinallyArm, None, arm_body, arm_line));
        }
        Ok(self.compound(StatementKind::Try, None, None, children, line))
    }

    fn parse_with(&mut self, _is_async: bool) -> PResult<StatementNode> {
        let line = self.expect_kw("with")?.line;
        let mut first_item = None;
        loop {
            let item = self.parse_ternary()?;
            if self.at_kw("as") {
                self.bump();
                self.parse_postfix_target()?;
            }
            if first_item.is_none() {
                first_item = Some(item);
            }
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        let (children, _) = self.parse_suite()?;
        Ok(self.compound(StatementKind::With, first_item, None, children, line))
    }

    fn parse_def(&mut self, is_async: bool) -> PResult<StatementNode> {
        let line = self.expect_kw("def")?.line;
        let name_tok = self.bump();
        if name_tok.kind != TokenKind::Name {
            return Err(format!("line {}: expected function name", name_tok.line));
        }
        let name = name_tok.text.clone();
        self.expect_op("(")?;
        let parameters = self.parse_params()?;
        self.expect_op(")")?;
        if self.at_op("->") {
            self.bump();
            self.parse_ternary()?;
        }
        self.scope.push(name.clone());
        let result = self.parse_suite();
        self.scope.pop();
        let (body, body_tokens) = result?;
        let last = body.last().map(|s| s.span.last).unwrap_or(line);
        let span = LineSpan { first: line, last };
        let qualified_name = self.unique_qualified(&name);
        self.functions.push(FunctionNode {
            name,
            qualified_name,
            span,
            parameters,
            body: body.clone(),
            is_async,
            body_tokens,
        });
        Ok(StatementNode {
            kind: StatementKind::FunctionDef,
            condition: None,
            target: None,
            children: body,
            span,
        })
    }

    fn unique_qualified(&mut self, name: &str) -> String {
        let base = if self.scope.is_empty() {
            name.to_string()
        } else {
            format!("{}.{}", self.scope.join("."), name)
        };
        let mut candidate = base.clone();
        let mut n = 1;
        while !self.used_names.insert(candidate.clone()) {
            n += 1;
            candidate = format!("{base}#{n}");
        }
        candidate
    }

    fn parse_params(&mut self) -> PResult<Vec<String>> {
        let mut params = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                self.bump();
                if self.peek().kind == TokenKind::Name {
                    params.push(self.bump().text.clone());
                }
            } else if self.at_op("/") {
                self.bump();
            } else if self.peek().kind == TokenKind::Name {
                params.push(self.bump().text.clone());
                if self.at_op(":") {
                    self.bump();
                    self.parse_ternary()?;
                }
                if self.at_op("=") {
                    self.bump();
                    self.parse_ternary()?;
                }
            } else {
                return Err(self.unexpected("expected parameter"));
            }
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        Ok(params)
    }

    fn parse_class(&mut self) -> PResult<StatementNode> {
        let line = self.expect_kw("class")?.line;
        let name_tok = self.bump();
        if name_tok.kind != TokenKind::Name {
            return Err(format!("line {}: expected class name", name_tok.line));
        }
        let name = name_tok.text.clone();
        if self.at_op("(") {
            self.skip_balanced()?;
        }
        self.scope.push(name);
        let result = self.parse_suite();
        self.scope.pop();
        let (children, _) = result?;
        Ok(self.compound(StatementKind::ClassDef, None, None, children, line))
    }

    /// Consume a balanced bracket group starting at the current `(`/`[`/`{`.
    fn skip_balanced(&mut self) -> PResult<()> {
        let mut depth = 0usize;
        loop {
            if self.at(TokenKind::EndMarker) {
                return Err(self.unexpected("unbalanced brackets"));
            }
            let t = self.bump();
            if t.kind == TokenKind::Op {
                match t.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(());
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    fn arm(
        &self,
        kind: StatementKind,
        condition: Option<ExpressionNode>,
        children: Vec<StatementNode>,
        first_line: u32,
    ) -> StatementNode {
        let last = children.last().map(|s| s.span.last).unwrap_or(first_line);
        StatementNode { kind, condition, target: None, children, span: LineSpan { first: first_line, last } }
    }

    fn compound(
        &self,
        kind: StatementKind,
        condition: Option<ExpressionNode>,
        target: Option<ExpressionNode>,
        children: Vec<StatementNode>,
        first_line: u32,
    ) -> StatementNode {
        let last = children
            .iter()
            .map(|s| s.span.last)
            .max()
            .unwrap_or(first_line)
            .max(first_line);
        StatementNode { kind, condition, target, children, span: LineSpan { first: first_line, last } }
    }

    /// `: suite` — either an indented block or simple statements on the same
    /// line. Returns the statements and the token range of the body.
    fn parse_suite(&mut self) -> PResult<(Vec<StatementNode>, TokenRange)> {
        self.expect_op(":")?;
        if self.at(TokenKind::Newline) {
            self.bump();
            if !self.at(TokenKind::Indent) {
                return Err(self.unexpected("expected an indented block"));
            }
            self.bump();
            let start = self.pos;
            let mut stmts = Vec::new();
            while !self.at(TokenKind::Dedent) && !self.at(TokenKind::EndMarker) {
                stmts.push(self.parse_statement()?);
            }
            let end = self.pos;
            if self.at(TokenKind::Dedent) {
                self.bump();
            }
            Ok((stmts, TokenRange { start, end }))
        } else {
            let start = self.pos;
            let stmts = self.parse_simple_list()?;
            let end = self.pos.saturating_sub(1); // exclude the newline
            Ok((stmts, TokenRange { start, end }))
        }
    }

    /// Unknown statement: consume its logical line, and when it introduced a
    /// block, parse the block generically so nested definitions are found.
    fn parse_unknown(&mut self) -> PResult<StatementNode> {
        let line = self.peek().line;
        let mut ends_with_colon = false;
        while !self.at(TokenKind::Newline) && !self.at(TokenKind::EndMarker) {
            let t = self.bump();
            ends_with_colon = t.kind == TokenKind::Op && t.text == ":";
        }
        self.expect_newline()?;
        let mut children = Vec::new();
        if ends_with_colon && self.at(TokenKind::Indent) {
            self.bump();
            while !self.at(TokenKind::Dedent) && !self.at(TokenKind::EndMarker) {
                children.push(self.parse_statement()?);
            }
            if self.at(TokenKind::Dedent) {
                self.bump();
            }
        }
        let last = children.iter().map(|s| s.span.last).max().unwrap_or(line);
        Ok(StatementNode {
            kind: StatementKind::Other,
            condition: None,
            target: None,
            children,
            span: LineSpan { first: line, last },
        })
    }

    // ------------------------------------------------------------------
    // Expressions
    // ------------------------------------------------------------------

    fn span_from(&self, start_tok: usize) -> SourceSpan {
        let first = &self.tokens[start_tok.min(self.tokens.len() - 1)];
        let last = &self.tokens[self.pos.saturating_sub(1).min(self.tokens.len() - 1)];
        let (end_line, end_column) = last.end();
        SourceSpan { line: first.line, column: first.column, end_line, end_column }
    }

    fn node(
        &self,
        kind: ExpressionKind,
        text: Option<String>,
        operands: Vec<ExpressionNode>,
        is_constant: bool,
        start_tok: usize,
    ) -> ExpressionNode {
        ExpressionNode { kind, text, operands, is_constant, span: self.span_from(start_tok) }
    }

    /// testlist: one or more ternaries separated by commas (a bare tuple).
    fn parse_expr_list(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let first = self.parse_starred_or_ternary()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.at_op(",") {
            self.bump();
            if self.expr_list_end() {
                break;
            }
            items.push(self.parse_starred_or_ternary()?);
        }
        let constant = items.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::Other, None, items, constant, start))
    }

    fn expr_list_end(&self) -> bool {
        self.stmt_end()
            || self.at_op("=")
            || self.at_op(")")
            || self.at_op("]")
            || self.at_op("}")
            || self.at_op(":")
            || self.at_kw("in")
    }

    fn parse_starred_or_ternary(&mut self) -> PResult<ExpressionNode> {
        if self.at_op("*") || self.at_op("**") {
            let start = self.pos;
            self.bump();
            let operand = self.parse_ternary()?;
            return Ok(self.node(ExpressionKind::Other, None, vec![operand], false, start));
        }
        self.parse_ternary()
    }

    fn parse_target_list(&mut self) -> PResult<ExpressionNode> {
        // `for` targets: names, attributes, subscripts, tuples; parse with the
        // general machinery but stop before `in`.
        let start = self.pos;
        let first = self.parse_postfix_target()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.at_op(",") {
            self.bump();
            if self.at_kw("in") {
                break;
            }
            items.push(self.parse_postfix_target()?);
        }
        Ok(self.node(ExpressionKind::Other, None, items, false, start))
    }

    fn parse_postfix_target(&mut self) -> PResult<ExpressionNode> {
        if self.at_op("*") {
            let start = self.pos;
            self.bump();
            let operand = self.parse_postfix_target()?;
            return Ok(self.node(ExpressionKind::Other, None, vec![operand], false, start));
        }
        if self.at_op("(") || self.at_op("[") {
            return self.parse_ternary();
        }
        self.parse_postfix()
    }

    fn parse_namedexpr(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let first = self.parse_ternary()?;
        if self.at_op(":=") {
            self.bump();
            let rhs = self.parse_ternary()?;
            return Ok(self.node(ExpressionKind::Other, None, vec![first, rhs], false, start));
        }
        Ok(first)
    }

    fn parse_ternary(&mut self) -> PResult<ExpressionNode> {
        if self.at_kw("lambda") {
            return self.parse_lambda();
        }
        let start = self.pos;
        let body = self.parse_or()?;
        if self.at_kw("if") {
            self.bump();
            let cond = self.parse_or()?;
            self.expect_kw("else")?;
            let orelse = self.parse_ternary()?;
            let constant = body.is_constant && cond.is_constant && orelse.is_constant;
            return Ok(self.node(
                ExpressionKind::TernaryConditional,
                None,
                vec![body, cond, orelse],
                constant,
                start,
            ));
        }
        Ok(body)
    }

    fn parse_lambda(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        self.expect_kw("lambda")?;
        while !self.at_op(":") {
            if self.at(TokenKind::Newline) || self.at(TokenKind::EndMarker) {
                return Err(self.unexpected("expected ':' in lambda"));
            }
            if self.at_op("=") {
                self.bump();
                self.parse_ternary()?;
            } else {
                self.bump();
            }
        }
        self.bump();
        let body = self.parse_ternary()?;
        Ok(self.node(ExpressionKind::Other, None, vec![body], false, start))
    }

    fn parse_or(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let first = self.parse_and()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.at_kw("or") {
            self.bump();
            operands.push(self.parse_and()?);
        }
        let constant = operands.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::BoolOp(BoolOpKind::Or), None, operands, constant, start))
    }

    fn parse_and(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let first = self.parse_not()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.at_kw("and") {
            self.bump();
            operands.push(self.parse_not()?);
        }
        let constant = operands.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::BoolOp(BoolOpKind::And), None, operands, constant, start))
    }

    fn parse_not(&mut self) -> PResult<ExpressionNode> {
        if self.at_kw("not") {
            let start = self.pos;
            self.bump();
            let operand = self.parse_not()?;
            let constant = operand.is_constant;
            return Ok(self.node(ExpressionKind::Other, Some("not".into()), vec![operand], constant, start));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let first = self.parse_binary(0)?;
        let mut operands = vec![first];
        loop {
            let is_comp_op = matches!(self.peek().text.as_str(), "<" | ">" | "<=" | ">=" | "==" | "!=")
                && self.peek().kind == TokenKind::Op;
            if is_comp_op {
                self.bump();
                operands.push(self.parse_binary(0)?);
            } else if self.at_kw("in") {
                self.bump();
                operands.push(self.parse_binary(0)?);
            } else if self.at_kw("not") && self.peek_at(1).text == "in" {
                self.bump();
                self.bump();
                operands.push(self.parse_binary(0)?);
            } else if self.at_kw("is") {
                self.bump();
                if self.at_kw("not") {
                    self.bump();
                }
                operands.push(self.parse_binary(0)?);
            } else {
                break;
            }
        }
        if operands.len() == 1 {
            return Ok(operands.pop().unwrap());
        }
        let constant = operands.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::Comparison, None, operands, constant, start))
    }

    /// Binary operators by precedence level, lowest first.
    fn parse_binary(&mut self, level: usize) -> PResult<ExpressionNode> {
        const LEVELS: &[&[&str]] = &[
            &["|"],
            &["^"],
            &["&"],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "//", "%", "@"],
        ];
        if level >= LEVELS.len() {
            return self.parse_factor();
        }
        let start = self.pos;
        let first = self.parse_binary(level + 1)?;
        if !(self.peek().kind == TokenKind::Op && LEVELS[level].contains(&self.peek().text.as_str())) {
            return Ok(first);
        }
        let mut operands = vec![first];
        let mut op_text = None;
        while self.peek().kind == TokenKind::Op && LEVELS[level].contains(&self.peek().text.as_str()) {
            op_text = Some(self.bump().text.clone());
            operands.push(self.parse_binary(level + 1)?);
        }
        let constant = operands.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::Other, op_text, operands, constant, start))
    }

    fn parse_factor(&mut self) -> PResult<ExpressionNode> {
        if (self.at_op("-") || self.at_op("+") || self.at_op("~")) && self.peek().kind == TokenKind::Op {
            let start = self.pos;
            let op = self.bump().text.clone();
            let operand = self.parse_factor()?;
            let constant = operand.is_constant;
            return Ok(self.node(ExpressionKind::Other, Some(op), vec![operand], constant, start));
        }
        if self.at_kw("await") {
            let start = self.pos;
            self.bump();
            let operand = self.parse_factor()?;
            return Ok(self.node(ExpressionKind::Other, Some("await".into()), vec![operand], false, start));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let base = self.parse_postfix()?;
        if self.at_op("**") {
            self.bump();
            let exp = self.parse_factor()?;
            let constant = base.is_constant && exp.is_constant;
            return Ok(self.node(ExpressionKind::Other, Some("**".into()), vec![base, exp], constant, start));
        }
        Ok(base)
    }

    fn parse_postfix(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let mut node = self.parse_atom()?;
        loop {
            if self.at_op("(") {
                self.bump();
                let args = self.parse_call_args()?;
                let mut operands = vec![node];
                operands.extend(args);
                node = self.node(ExpressionKind::Call, None, operands, false, start);
            } else if self.at_op("[") {
                self.bump();
                let subs = self.parse_subscript()?;
                let mut operands = vec![node];
                operands.extend(subs);
                node = self.node(ExpressionKind::Other, None, operands, false, start);
            } else if self.at_op(".") {
                self.bump();
                let attr = self.bump();
                if attr.kind != TokenKind::Name {
                    return Err(format!("line {}: expected attribute name", attr.line));
                }
                node = self.node(
                    ExpressionKind::Attribute,
                    Some(attr.text.clone()),
                    vec![node],
                    false,
                    start,
                );
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn parse_call_args(&mut self) -> PResult<Vec<ExpressionNode>> {
        let mut args = Vec::new();
        while !self.at_op(")") {
            if self.at(TokenKind::EndMarker) {
                return Err(self.unexpected("unterminated call"));
            }
            let start = self.pos;
            let arg = if self.at_op("*") || self.at_op("**") {
                self.bump();
                let operand = self.parse_ternary()?;
                self.node(ExpressionKind::Other, None, vec![operand], false, start)
            } else if self.peek().kind == TokenKind::Name
                && self.peek_at(1).kind == TokenKind::Op
                && self.peek_at(1).text == "="
            {
                let kw = self.bump().text.clone();
                self.bump();
                let value = self.parse_ternary()?;
                self.node(ExpressionKind::Other, Some(kw), vec![value], false, start)
            } else {
                self.parse_namedexpr()?
            };
            let arg = if self.at_kw("for") || (self.at_kw("async") && self.peek_at(1).text == "for") {
                self.parse_comp_clauses(arg, start)?
            } else {
                arg
            };
            args.push(arg);
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_op(")")?;
        Ok(args)
    }

    fn parse_subscript(&mut self) -> PResult<Vec<ExpressionNode>> {
        let mut items = Vec::new();
        loop {
            if self.at_op("]") {
                break;
            }
            if self.at(TokenKind::EndMarker) {
                return Err(self.unexpected("unterminated subscript"));
            }
            if !self.at_op(":") && !self.at_op(",") {
                items.push(self.parse_starred_or_ternary()?);
            }
            if self.at_op(":") || self.at_op(",") {
                self.bump();
            }
        }
        self.expect_op("]")?;
        Ok(items)
    }

    fn parse_yield(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        self.expect_kw("yield")?;
        let mut operands = Vec::new();
        if self.at_kw("from") {
            self.bump();
            operands.push(self.parse_ternary()?);
        } else if !self.stmt_end() && !self.at_op(")") && !self.at_op("]") && !self.at_op("}") {
            operands.push(self.parse_expr_list()?);
        }
        Ok(self.node(ExpressionKind::Other, Some("yield".into()), operands, false, start))
    }

    fn parse_comp_clauses(&mut self, element: ExpressionNode, start: usize) -> PResult<ExpressionNode> {
        let mut operands = vec![element];
        loop {
            if self.at_kw("async") && self.peek_at(1).text == "for" {
                self.bump();
            }
            if !self.at_kw("for") {
                break;
            }
            self.bump();
            operands.push(self.parse_target_list()?);
            self.expect_kw("in")?;
            operands.push(self.parse_or()?);
            while self.at_kw("if") {
                let cond_start = self.pos;
                self.bump();
                let cond = self.parse_or()?;
                operands.push(self.node(
                    ExpressionKind::CompCondition,
                    None,
                    vec![cond],
                    false,
                    cond_start,
                ));
            }
        }
        Ok(self.node(ExpressionKind::Comprehension, None, operands, false, start))
    }

    fn parse_atom(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number => {
                self.bump();
                Ok(self.node(ExpressionKind::LiteralConstant, Some(t.text), Vec::new(), true, start))
            }
            TokenKind::Str => {
                let mut text = String::new();
                let mut formatted = false;
                while self.at(TokenKind::Str) {
                    let s = self.bump();
                    formatted |= string_prefix(&s.text).contains('f');
                    text.push_str(&s.text);
                }
                if formatted {
                    // f-strings interpolate at runtime; not a plain literal.
                    Ok(self.node(ExpressionKind::Other, Some(text), Vec::new(), false, start))
                } else {
                    Ok(self.node(ExpressionKind::LiteralConstant, Some(text), Vec::new(), true, start))
                }
            }
            TokenKind::Name => {
                self.bump();
                Ok(self.node(ExpressionKind::Name, Some(t.text), Vec::new(), false, start))
            }
            TokenKind::Keyword => match t.text.as_str() {
                "True" | "False" | "None" => {
                    self.bump();
                    Ok(self.node(ExpressionKind::LiteralConstant, Some(t.text), Vec::new(), true, start))
                }
                "yield" => self.parse_yield(),
                "lambda" => self.parse_lambda(),
                "not" => self.parse_not(),
                "await" => self.parse_factor(),
                _ => Err(self.unexpected("unexpected keyword in expression")),
            },
            TokenKind::Op => match t.text.as_str() {
                "..." => {
                    self.bump();
                    Ok(self.node(ExpressionKind::LiteralConstant, Some(t.text), Vec::new(), true, start))
                }
                "(" => self.parse_paren_atom(),
                "[" => self.parse_bracket_atom(),
                "{" => self.parse_brace_atom(),
                _ => Err(self.unexpected("unexpected token in expression")),
            },
            _ => Err(self.unexpected("unexpected token in expression")),
        }
    }

    fn parse_paren_atom(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        self.expect_op("(")?;
        if self.at_op(")") {
            self.bump();
            return Ok(self.node(ExpressionKind::LiteralConstant, Some("()".into()), Vec::new(), true, start));
        }
        let first = if self.at_kw("yield") {
            self.parse_yield()?
        } else {
            let e = self.parse_starred_or_ternary()?;
            if self.at_op(":=") {
                self.bump();
                let rhs = self.parse_ternary()?;
                self.node(ExpressionKind::Other, None, vec![e, rhs], false, start)
            } else {
                e
            }
        };
        if self.at_kw("for") || (self.at_kw("async") && self.peek_at(1).text == "for") {
            let comp = self.parse_comp_clauses(first, start)?;
            self.expect_op(")")?;
            return Ok(comp);
        }
        if self.at_kw("as") {
            // Parenthesized with-items: `with (open(x) as f, open(y) as g):`
            let mut operands = vec![first];
            while self.at_kw("as") || self.at_op(",") {
                self.bump();
                if self.at_op(")") {
                    break;
                }
                if !self.at_kw("as") && !self.at_op(",") {
                    operands.push(self.parse_ternary()?);
                }
            }
            self.expect_op(")")?;
            return Ok(self.node(ExpressionKind::Other, None, operands, false, start));
        }
        if self.at_op(",") {
            let mut items = vec![first];
            while self.at_op(",") {
                self.bump();
                if self.at_op(")") {
                    break;
                }
                items.push(self.parse_starred_or_ternary()?);
            }
            self.expect_op(")")?;
            let constant = items.iter().all(|e| e.is_constant);
            return Ok(self.node(ExpressionKind::Other, None, items, constant, start));
        }
        self.expect_op(")")?;
        let constant = first.is_constant;
        Ok(self.node(ExpressionKind::Parenthesized, None, vec![first], constant, start))
    }

    fn parse_bracket_atom(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        self.expect_op("[")?;
        if self.at_op("]") {
            self.bump();
            return Ok(self.node(ExpressionKind::LiteralConstant, Some("[]".into()), Vec::new(), true, start));
        }
        let first = self.parse_starred_or_ternary()?;
        if self.at_kw("for") || (self.at_kw("async") && self.peek_at(1).text == "for") {
            let comp = self.parse_comp_clauses(first, start)?;
            self.expect_op("]")?;
            return Ok(comp);
        }
        let mut items = vec![first];
        while self.at_op(",") {
            self.bump();
            if self.at_op("]") {
                break;
            }
            items.push(self.parse_starred_or_ternary()?);
        }
        self.expect_op("]")?;
        let constant = items.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::Other, None, items, constant, start))
    }

    fn parse_brace_atom(&mut self) -> PResult<ExpressionNode> {
        let start = self.pos;
        self.expect_op("{")?;
        if self.at_op("}") {
            self.bump();
            return Ok(self.node(ExpressionKind::LiteralConstant, Some("{}".into()), Vec::new(), true, start));
        }
        let mut items = Vec::new();
        let mut first_entry = true;
        loop {
            if self.at_op("}") {
                break;
            }
            if self.at(TokenKind::EndMarker) {
                return Err(self.unexpected("unterminated display"));
            }
            let entry_start = self.pos;
            let key = if self.at_op("**") || self.at_op("*") {
                self.bump();
                let e = self.parse_ternary()?;
                self.node(ExpressionKind::Other, None, vec![e], false, entry_start)
            } else {
                self.parse_ternary()?
            };
            let entry = if self.at_op(":") {
                self.bump();
                let value = self.parse_ternary()?;
                let constant = key.is_constant && value.is_constant;
                self.node(ExpressionKind::Other, None, vec![key, value], constant, entry_start)
            } else {
                key
            };
            if first_entry && (self.at_kw("for") || (self.at_kw("async") && self.peek_at(1).text == "for")) {
                let comp = self.parse_comp_clauses(entry, start)?;
                self.expect_op("}")?;
                return Ok(comp);
            }
            first_entry = false;
            items.push(entry);
            if self.at_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_op("}")?;
        let constant = items.iter().all(|e| e.is_constant);
        Ok(self.node(ExpressionKind::Other, None, items, constant, start))
    }
}

fn string_prefix(text: &str) -> String {
    text.chars()
        .take_while(|c| *c != '"' && *c != '\'')
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{parse_source, ExpressionKind, StatementKind};

    #[test]
    fn if_elif_else_arms() {
        let src = "if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n";
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let if_stmt = &unit.module_statements[0];
        assert_eq!(if_stmt.kind, StatementKind::If);
        let kinds: Vec<StatementKind> = if_stmt.children.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![StatementKind::Assignment, StatementKind::ElifArm, StatementKind::ElseArm]
        );
        assert!(if_stmt.children[1].condition.is_some());
    }

    #[test]
    fn try_except_finally() {
        let src = "try:\n    f()\nexcept ValueError:\n    pass\nexcept Exception as e:\n    raise\nfinally:\n    g()\n";
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let try_stmt = &unit.module_statements[0];
        assert_eq!(try_stmt.kind, StatementKind::Try);
        let arms: Vec<StatementKind> = try_stmt.children.iter().map(|c| c.kind).collect();
        assert_eq!(
            arms,
            vec![
                StatementKind::ExpressionStatement,
                StatementKind::ExceptArm,
                StatementKind::ExceptArm,
                StatementKind::FinallyArm
            ]
        );
        let caught = try_stmt.children[2].condition.as_ref().unwrap();
        assert_eq!(caught.text.as_deref(), Some("Exception"));
    }

    #[test]
    fn ternary_and_boolop() {
        let unit = parse_source("x = True if c else False\ny = a or b or c and d\n", "t.py");
        assert!(unit.parse_ok);
        let assign = &unit.module_statements[0];
        let value = assign.condition.as_ref().unwrap();
        assert_eq!(value.kind, ExpressionKind::TernaryConditional);
        assert!(value.operands[0].is_bool_literal());
        assert!(value.operands[2].is_bool_literal());
        let or_expr = unit.module_statements[1].condition.as_ref().unwrap();
        assert_eq!(or_expr.kind, ExpressionKind::BoolOp(super::BoolOpKind::Or));
        // a, b, (c and d) — chained same-operator terms flattened.
        assert_eq!(or_expr.operands.len(), 3);
        assert_eq!(or_expr.operands[2].kind, ExpressionKind::BoolOp(super::BoolOpKind::And));
    }

    #[test]
    fn comparison_constancy() {
        let unit = parse_source("a = 1 < 2\nb = x == 1\nc = -1 == 1\n", "t.py");
        assert!(unit.parse_ok);
        let c1 = unit.module_statements[0].condition.as_ref().unwrap();
        assert_eq!(c1.kind, ExpressionKind::Comparison);
        assert!(c1.is_constant);
        let c2 = unit.module_statements[1].condition.as_ref().unwrap();
        assert!(!c2.is_constant);
        let c3 = unit.module_statements[2].condition.as_ref().unwrap();
        assert!(c3.is_constant);
    }

    #[test]
    fn comprehension_conditions_wrapped() {
        let unit = parse_source("xs = [y for y in zs if y > 0 if y < 9]\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let comp = unit.module_statements[0].condition.as_ref().unwrap();
        assert_eq!(comp.kind, ExpressionKind::Comprehension);
        let conds = comp
            .operands
            .iter()
            .filter(|o| o.kind == ExpressionKind::CompCondition)
            .count();
        assert_eq!(conds, 2);
    }

    #[test]
    fn calls_attributes_subscripts() {
        let unit = parse_source("v = obj.method(a, b=1)[0].attr\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let v = unit.module_statements[0].condition.as_ref().unwrap();
        assert_eq!(v.kind, ExpressionKind::Attribute);
        assert_eq!(v.text.as_deref(), Some("attr"));
    }

    #[test]
    fn one_line_def_body_tokens_exclude_header() {
        let unit = parse_source("def f(): return 1\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        let f = &unit.functions[0];
        let toks: Vec<&str> = unit.tokens[f.body_tokens.start..f.body_tokens.end]
            .iter()
            .map(|t| t.text.as_str())
            .collect();
        assert_eq!(toks, vec!["return", "1"]);
    }

    #[test]
    fn decorators_skipped() {
        let src = "@decorator(arg)\n@other\ndef f():\n    pass\n";
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert_eq!(unit.functions.len(), 1);
        assert_eq!(unit.functions[0].span.first, 3);
    }

    #[test]
    fn unknown_block_statement_degrades() {
        let src = "match command:\n    case 1:\n        def handler():\n            pass\n";
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert_eq!(unit.module_statements[0].kind, StatementKind::Other);
        assert_eq!(unit.functions.len(), 1);
        assert_eq!(unit.functions[0].name, "handler");
    }

    #[test]
    fn with_as_items() {
        let unit = parse_source("with open(p) as f, open(q) as g:\n    pass\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert_eq!(unit.module_statements[0].kind, StatementKind::With);
    }

    #[test]
    fn parenthesized_with_items_tolerated() {
        let unit = parse_source("with (open(p) as f, open(q) as g):\n    pass\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
    }

    #[test]
    fn chained_assignment_keeps_first_target() {
        let unit = parse_source("a = b = 1\n", "t.py");
        let stmt = &unit.module_statements[0];
        assert_eq!(stmt.kind, StatementKind::Assignment);
        assert_eq!(stmt.target.as_ref().unwrap().text.as_deref(), Some("a"));
        assert!(stmt.condition.as_ref().unwrap().is_constant);
    }

    #[test]
    fn augmented_and_annotated_assignment() {
        let unit = parse_source("x += 1\ny: int = 2\nz: int\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert!(unit.module_statements.iter().all(|s| s.kind == StatementKind::Assignment));
    }

    #[test]
    fn duplicate_defs_get_unique_qualified_names() {
        let unit = parse_source("def f():\n    pass\ndef f():\n    pass\n", "t.py");
        let names: Vec<&str> = unit.functions.iter().map(|f| f.qualified_name.as_str()).collect();
        assert_eq!(names, vec!["f", "f#2"]);
    }

    #[test]
    fn nested_depth_spans() {
        let src = "def f():\n    if a:\n        for i in xs:\n            x = 1\n";
        let unit = parse_source(src, "t.py");
        assert!(unit.parse_ok);
        assert_eq!(unit.functions[0].span.last, 4);
    }

    #[test]
    fn star_import_parses() {
        let unit = parse_source("from os.path import *\nimport sys\n", "t.py");
        assert!(unit.parse_ok);
        assert_eq!(unit.module_statements[0].kind, StatementKind::ImportFrom);
        assert_eq!(unit.module_statements[1].kind, StatementKind::Import);
    }

    #[test]
    fn fstring_not_constant() {
        let unit = parse_source("if f'{x}':\n    pass\n", "t.py");
        let cond = unit.module_statements[0].condition.as_ref().unwrap();
        assert!(!cond.is_constant);
    }

    #[test]
    fn dict_set_displays() {
        let unit = parse_source("d = {1: 'a', 2: 'b'}\ns = {1, 2}\ne = {}\nc = {k: v for k, v in xs}\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert!(unit.module_statements[0].condition.as_ref().unwrap().is_constant);
        let comp = unit.module_statements[3].condition.as_ref().unwrap();
        assert_eq!(comp.kind, ExpressionKind::Comprehension);
    }

    #[test]
    fn slices_parse() {
        let unit = parse_source("a = xs[1:2]\nb = xs[::2]\nc = m[1:, :2]\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
    }

    #[test]
    fn global_del_assert_degrade_to_other() {
        let unit = parse_source("global g\ndel x\nassert cond, 'msg'\nbreak_free = 1\n", "t.py");
        assert!(unit.parse_ok, "{:?}", unit.parse_error);
        assert_eq!(unit.module_statements[0].kind, StatementKind::Other);
        assert_eq!(unit.module_statements[1].kind, StatementKind::Other);
        assert_eq!(unit.module_statements[2].kind, StatementKind::Other);
    }
}
