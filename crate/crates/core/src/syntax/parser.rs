//! Recursive-descent parser for a single Java method or constructor.
//!
//! The grammar is a pragmatic subset: every construct a method body commonly
//! contains is recognised, and constructs outside the 20-tag scheme (blocks,
//! labels, lambdas, object creation, `?:` and so on) produce no node of their
//! own, so their tokens fall to the nearest tagged ancestor.

use super::{AstTag, Node, NodeId, SyntaxError, SyntaxTree, Token, TokenKind};

pub fn parse_method(tokens: &[Token]) -> Result<SyntaxTree, SyntaxError> {
    let code: Vec<usize> = (0..tokens.len()).filter(|&i| !tokens[i].is_comment()).collect();
    if code.is_empty() {
        return Err(SyntaxError::Parse { index: 0, message: "empty method".into() });
    }
    let mut p = Parser {
        toks: tokens,
        code,
        pos: 0,
        gt_split: 0,
        last_end: 0,
        nodes: Vec::new(),
        stack: Vec::new(),
    };
    p.nodes.push(Node {
        tag: AstTag::MethodDeclaration,
        tokens: 0..tokens.len(),
        children: Vec::new(),
        decisions: 0,
    });
    p.stack.push(0);
    p.method_declaration()?;
    if !p.at_end() {
        return Err(p.error("unexpected tokens after method body"));
    }
    p.stack.pop();
    Ok(SyntaxTree::new(p.nodes, tokens))
}

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "abstract", "final", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] =
    &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn binary_precedence(tok: &Token) -> Option<u8> {
    if tok.kind == TokenKind::Keyword {
        return (tok.text == "instanceof").then_some(7);
    }
    if tok.kind != TokenKind::Operator {
        return None;
    }
    Some(match tok.text.as_str() {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

#[derive(Clone, Copy)]
struct Mark {
    start: usize,
    children: usize,
}

struct Parser<'t> {
    toks: &'t [Token],
    /// Indices of non-comment tokens; `pos` indexes into this.
    code: Vec<usize>,
    pos: usize,
    /// Number of `>` characters already consumed from the current token
    /// while closing nested type arguments (`List<List<T>>`).
    gt_split: u8,
    last_end: usize,
    nodes: Vec<Node>,
    stack: Vec<NodeId>,
}

type PResult<T = ()> = Result<T, SyntaxError>;

impl<'t> Parser<'t> {
    // ---- token access ------------------------------------------------------

    fn at_end(&self) -> bool {
        self.pos >= self.code.len()
    }

    fn tok_at(&self, k: usize) -> Option<&'t Token> {
        self.code.get(k).map(|&i| &self.toks[i])
    }

    fn cur(&self) -> Option<&'t Token> {
        self.tok_at(self.pos)
    }

    fn peek(&self, n: usize) -> Option<&'t Token> {
        self.tok_at(self.pos + n)
    }

    fn is(&self, text: &str) -> bool {
        self.cur().is_some_and(|t| t.is(text))
    }

    fn is_at(&self, k: usize, text: &str) -> bool {
        self.tok_at(k).is_some_and(|t| t.is(text))
    }

    fn is_kind(&self, kind: TokenKind) -> bool {
        self.cur().is_some_and(|t| t.kind == kind)
    }

    fn is_ident(&self, text: &str) -> bool {
        self.cur().is_some_and(|t| t.kind == TokenKind::Identifier && t.text == text)
    }

    fn orig_index(&self) -> usize {
        self.code.get(self.pos).copied().unwrap_or(self.toks.len())
    }

    fn error(&self, message: &str) -> SyntaxError {
        let found = match self.cur() {
            Some(t) => format!("found {:?}", t.text),
            None => "found end of input".to_string(),
        };
        SyntaxError::Parse { index: self.orig_index(), message: format!("{message}, {found}") }
    }

    fn bump(&mut self) -> PResult<&'t Token> {
        let t = self.cur().ok_or_else(|| self.error("unexpected end of input"))?;
        self.last_end = self.orig_index() + 1;
        self.pos += 1;
        self.gt_split = 0;
        Ok(t)
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.is(text) {
            self.last_end = self.orig_index() + 1;
            self.pos += 1;
            self.gt_split = 0;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> PResult {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {text:?}")))
        }
    }

    fn expect_ident(&mut self) -> PResult {
        if self.is_kind(TokenKind::Identifier) {
            self.bump()?;
            Ok(())
        } else {
            Err(self.error("expected identifier"))
        }
    }

    /// Consume one `>` closing a type-argument list, splitting `>>`/`>>>`.
    fn close_angle(&mut self) -> PResult {
        let width = match self.cur() {
            Some(t) if t.kind == TokenKind::Operator => {
                t.text.bytes().take_while(|&b| b == b'>').count() as u8
            }
            _ => 0,
        };
        if width == 0 || self.gt_split >= width {
            return Err(self.error("expected '>'"));
        }
        self.last_end = self.orig_index() + 1;
        if self.gt_split + 1 < width {
            self.gt_split += 1;
        } else {
            self.pos += 1;
            self.gt_split = 0;
        }
        Ok(())
    }

    // ---- tree building -----------------------------------------------------

    fn top(&self) -> NodeId {
        *self.stack.last().expect("root is always open")
    }

    fn open(&mut self, tag: AstTag) -> NodeId {
        let start = self.orig_index();
        self.attach(tag, start, Vec::new())
    }

    fn mark(&self) -> Mark {
        Mark { start: self.orig_index(), children: self.nodes[self.top()].children.len() }
    }

    /// Open a node that retroactively covers everything parsed since `mark`.
    fn wrap(&mut self, mark: Mark, tag: AstTag) -> NodeId {
        let parent = self.top();
        let moved = self.nodes[parent].children.split_off(mark.children);
        self.attach(tag, mark.start, moved)
    }

    fn attach(&mut self, tag: AstTag, start: usize, children: Vec<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { tag, tokens: start..start, children, decisions: 0 });
        let parent = self.top();
        self.nodes[parent].children.push(id);
        self.stack.push(id);
        id
    }

    fn close(&mut self, id: NodeId) {
        let popped = self.stack.pop();
        debug_assert_eq!(popped, Some(id));
        let node = &mut self.nodes[id];
        node.tokens.end = self.last_end.max(node.tokens.start + 1);
    }

    fn decision(&mut self) {
        let id = self.top();
        self.nodes[id].decisions += 1;
    }

    fn leaf(&mut self, tag: AstTag) -> PResult {
        let id = self.open(tag);
        self.bump()?;
        self.close(id);
        Ok(())
    }

    // ---- declarations ------------------------------------------------------

    fn modifiers(&mut self) -> PResult<bool> {
        let mut any = false;
        loop {
            if self.is("@") && !self.is_at(self.pos + 1, "interface") {
                self.annotation()?;
            } else if self.cur().is_some_and(|t| {
                t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str())
            }) && !(self.is("synchronized") && self.is_at(self.pos + 1, "("))
                || self.is_ident("sealed") && self.peek(1).is_some_and(|t| t.kind != TokenKind::Operator)
            {
                self.bump()?;
            } else {
                return Ok(any);
            }
            any = true;
        }
    }

    fn annotation(&mut self) -> PResult {
        self.expect("@")?;
        self.expect_ident()?;
        while self.is(".") && self.peek(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
            self.bump()?;
            self.bump()?;
        }
        if self.is("(") {
            self.skip_balanced("(", ")")?;
        }
        Ok(())
    }

    /// Consume a balanced bracket group without building nodes.
    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult {
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_end() {
                return Err(self.error(&format!("unbalanced {open:?}")));
            }
            if self.is(open) {
                depth += 1;
            } else if self.is(close) {
                depth -= 1;
            }
            self.bump()?;
        }
        Ok(())
    }

    fn method_declaration(&mut self) -> PResult {
        self.modifiers()?;
        self.method_rest()
    }

    /// Everything after the modifiers of a method or constructor.
    fn method_rest(&mut self) -> PResult {
        if self.is("<") {
            self.type_parameters()?;
        }
        let is_constructor = self.is_kind(TokenKind::Identifier) && self.is_at(self.pos + 1, "(");
        if !is_constructor {
            self.result_type()?;
        }
        self.expect_ident()?;
        self.formal_parameters()?;
        while self.is("[") {
            self.expect("[")?;
            self.expect("]")?;
        }
        if self.eat("throws") {
            self.parse_type()?;
            while self.eat(",") {
                self.parse_type()?;
            }
        }
        if self.is("{") {
            self.block()
        } else if self.is("default") {
            // annotation element default value
            self.bump()?;
            self.element_value()?;
            self.expect(";")
        } else {
            self.expect(";")
        }
    }

    fn element_value(&mut self) -> PResult {
        if self.is("{") {
            self.skip_balanced("{", "}")
        } else if self.is("@") {
            self.annotation()
        } else {
            self.ternary()
        }
    }

    fn result_type(&mut self) -> PResult {
        if self.is("void") {
            self.leaf(AstTag::TypeReference)
        } else {
            self.parse_type()
        }
    }

    fn type_parameters(&mut self) -> PResult {
        self.expect("<")?;
        loop {
            while self.is("@") {
                self.annotation()?;
            }
            self.expect_ident()?;
            if self.eat("extends") {
                self.parse_type()?;
                while self.eat("&") {
                    self.parse_type()?;
                }
            }
            if !self.eat(",") {
                break;
            }
        }
        self.close_angle()
    }

    fn formal_parameters(&mut self) -> PResult {
        self.expect("(")?;
        if !self.is(")") {
            loop {
                self.formal_parameter()?;
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")
    }

    fn formal_parameter(&mut self) -> PResult {
        let id = self.open(AstTag::FormalParameter);
        self.modifiers()?;
        self.parse_type()?;
        while self.is("@") {
            self.annotation()?;
        }
        self.eat("...");
        if self.is("this") {
            self.bump()?;
        } else {
            // receiver parameters may be qualified: `Outer.this`
            self.expect_ident()?;
            if self.is(".") && self.is_at(self.pos + 1, "this") {
                self.bump()?;
                self.bump()?;
            }
        }
        self.dims()?;
        self.close(id);
        Ok(())
    }

    fn dims(&mut self) -> PResult {
        while self.is("[") && self.is_at(self.pos + 1, "]") {
            self.bump()?;
            self.bump()?;
        }
        Ok(())
    }

    // ---- types -------------------------------------------------------------

    fn parse_type(&mut self) -> PResult {
        let id = self.open(AstTag::TypeReference);
        while self.is("@") {
            self.annotation()?;
        }
        let is_primitive = self.cur().is_some_and(|t| {
            t.kind == TokenKind::Keyword && super::is_primitive_type(&t.text)
        });
        if is_primitive {
            self.bump()?;
        } else {
            self.class_type_segments()?;
        }
        while self.is("@") || (self.is("[") && self.is_at(self.pos + 1, "]")) {
            while self.is("@") {
                self.annotation()?;
            }
            self.expect("[")?;
            self.expect("]")?;
        }
        self.close(id);
        Ok(())
    }

    fn class_type_segments(&mut self) -> PResult {
        loop {
            while self.is("@") {
                self.annotation()?;
            }
            self.expect_ident()?;
            if self.is("<") {
                self.type_arguments()?;
            }
            if self.is(".") && self.peek(1).is_some_and(|t| {
                t.kind == TokenKind::Identifier || t.is("@")
            }) {
                self.bump()?;
            } else {
                return Ok(());
            }
        }
    }

    fn type_arguments(&mut self) -> PResult {
        self.expect("<")?;
        if self.is(">") {
            // diamond
            return self.close_angle();
        }
        loop {
            while self.is("@") {
                self.annotation()?;
            }
            if self.eat("?") {
                if self.eat("extends") || self.eat("super") {
                    self.parse_type()?;
                }
            } else {
                self.parse_type()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        self.close_angle()
    }

    /// Speculatively scan a type starting at code index `k`; returns the
    /// index just past it.
    fn scan_type(&self, mut k: usize) -> Option<usize> {
        let ident = |k: usize| self.tok_at(k).is_some_and(|t| t.kind == TokenKind::Identifier);
        while self.is_at(k, "@") {
            k = self.scan_annotation(k)?;
        }
        let first = self.tok_at(k)?;
        if first.kind == TokenKind::Keyword && super::is_primitive_type(&first.text) {
            k += 1;
        } else {
            loop {
                if !ident(k) {
                    return None;
                }
                k += 1;
                if self.is_at(k, "<") {
                    k = self.scan_type_arguments(k)?;
                }
                if self.is_at(k, ".") && ident(k + 1) {
                    k += 1;
                } else {
                    break;
                }
            }
        }
        while self.is_at(k, "[") && self.is_at(k + 1, "]") {
            k += 2;
        }
        Some(k)
    }

    fn scan_annotation(&self, mut k: usize) -> Option<usize> {
        k += 1;
        if self.tok_at(k)?.kind != TokenKind::Identifier {
            return None;
        }
        k += 1;
        while self.is_at(k, ".") && self.tok_at(k + 1)?.kind == TokenKind::Identifier {
            k += 2;
        }
        if self.is_at(k, "(") {
            let mut depth = 0i32;
            loop {
                let t = self.tok_at(k)?;
                if t.is("(") {
                    depth += 1;
                } else if t.is(")") {
                    depth -= 1;
                }
                k += 1;
                if depth == 0 {
                    break;
                }
            }
        }
        Some(k)
    }

    fn scan_type_arguments(&self, mut k: usize) -> Option<usize> {
        let mut depth = 0i32;
        loop {
            let t = self.tok_at(k)?;
            match t.kind {
                TokenKind::Identifier => {}
                TokenKind::Keyword
                    if super::is_primitive_type(&t.text)
                        || t.text == "extends"
                        || t.text == "super" => {}
                TokenKind::Separator if matches!(t.text.as_str(), "," | "." | "[" | "]" | "@") => {}
                TokenKind::Operator => match t.text.as_str() {
                    "<" => depth += 1,
                    ">" => depth -= 1,
                    ">>" => depth -= 2,
                    ">>>" => depth -= 3,
                    "?" | "&" => {}
                    _ => return None,
                },
                _ => return None,
            }
            k += 1;
            if depth < 0 {
                return None;
            }
            if depth == 0 {
                return Some(k);
            }
        }
    }

    /// Whether a local variable declaration starts at the current position.
    fn local_var_decl_ahead(&self) -> bool {
        if self.is("final") || self.is("@") {
            return true;
        }
        match self.scan_type(self.pos) {
            Some(end) => {
                self.tok_at(end).is_some_and(|t| t.kind == TokenKind::Identifier)
                    && self.tok_at(end + 1).is_some_and(|t| {
                        matches!(t.text.as_str(), "=" | ";" | "," | "[" | ":")
                            && t.kind != TokenKind::Identifier
                    })
            }
            None => false,
        }
    }

    fn local_class_ahead(&self) -> bool {
        let mut k = self.pos;
        while let Some(t) = self.tok_at(k) {
            if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str()) {
                k += 1;
            } else if t.is("@") && !self.is_at(k + 1, "interface") {
                match self.scan_annotation(k) {
                    Some(next) => k = next,
                    None => return false,
                }
            } else {
                break;
            }
        }
        match self.tok_at(k) {
            Some(t) if t.is("class") || t.is("interface") || t.is("enum") => true,
            Some(t) if t.is("@") => self.is_at(k + 1, "interface"),
            Some(t) if t.kind == TokenKind::Identifier && t.text == "record" => self
                .tok_at(k + 1)
                .is_some_and(|n| n.kind == TokenKind::Identifier)
                && (self.is_at(k + 2, "(") || self.is_at(k + 2, "<")),
            _ => false,
        }
    }

    // ---- statements --------------------------------------------------------

    fn block(&mut self) -> PResult {
        self.expect("{")?;
        while !self.is("}") {
            if self.at_end() {
                return Err(self.error("unterminated block"));
            }
            self.statement()?;
        }
        self.expect("}")
    }

    fn statement(&mut self) -> PResult {
        let Some(t) = self.cur() else {
            return Err(self.error("expected statement"));
        };
        if t.kind == TokenKind::Keyword || t.kind == TokenKind::Separator {
            match t.text.as_str() {
                "{" => return self.block(),
                ";" => return self.expect(";"),
                "if" => return self.if_statement(),
                "for" => return self.for_statement(),
                "while" => return self.while_statement(),
                "do" => return self.do_statement(),
                "switch" => {
                    self.switch_construct()?;
                    self.eat(";");
                    return Ok(());
                }
                "try" => return self.try_statement(),
                "return" => {
                    let id = self.open(AstTag::ReturnStatement);
                    self.bump()?;
                    if !self.is(";") {
                        self.expression()?;
                    }
                    self.expect(";")?;
                    self.close(id);
                    return Ok(());
                }
                "throw" => {
                    let id = self.open(AstTag::ThrowStatement);
                    self.bump()?;
                    self.expression()?;
                    self.expect(";")?;
                    self.close(id);
                    return Ok(());
                }
                "break" | "continue" => {
                    self.bump()?;
                    if self.is_kind(TokenKind::Identifier) {
                        self.bump()?;
                    }
                    return self.expect(";");
                }
                "synchronized" if self.is_at(self.pos + 1, "(") => {
                    self.bump()?;
                    self.par_expression()?;
                    return self.block();
                }
                "assert" => {
                    self.bump()?;
                    self.expression()?;
                    if self.eat(":") {
                        self.expression()?;
                    }
                    return self.expect(";");
                }
                _ => {}
            }
        }
        if self.local_class_ahead() {
            return self.type_declaration();
        }
        if t.kind == TokenKind::Identifier {
            if self.is_at(self.pos + 1, ":") && !self.is_at(self.pos + 1, "::") {
                // labeled statement
                self.bump()?;
                self.bump()?;
                return self.statement();
            }
            if t.text == "yield" && self.yield_ahead() {
                self.bump()?;
                self.expression()?;
                return self.expect(";");
            }
        }
        if self.local_var_decl_ahead() {
            self.local_variable_declaration(true)?;
            return Ok(());
        }
        self.expression()?;
        self.expect(";")
    }

    fn yield_ahead(&self) -> bool {
        match self.peek(1) {
            Some(n) => !(n.is("=")
                || n.is(".")
                || n.is("(")
                || n.is("[")
                || n.is(";")
                || n.is("++")
                || n.is("--")
                || (n.kind == TokenKind::Operator && is_assign_op(&n.text))),
            None => false,
        }
    }

    /// Parses a local variable declaration; in a `for` header returns true
    /// if it turned out to be the enhanced-for form (`Type name :`).
    fn local_variable_declaration(&mut self, statement: bool) -> PResult<bool> {
        let id = self.open(AstTag::LocalVariableDeclaration);
        self.modifiers()?;
        self.parse_type()?;
        self.expect_ident()?;
        self.dims()?;
        if !statement && self.is(":") {
            self.close(id);
            return Ok(true);
        }
        loop {
            if self.eat("=") {
                self.variable_initializer()?;
            }
            if !self.eat(",") {
                break;
            }
            self.expect_ident()?;
            self.dims()?;
        }
        if statement {
            self.expect(";")?;
        }
        self.close(id);
        Ok(false)
    }

    fn variable_initializer(&mut self) -> PResult {
        if self.is("{") {
            self.array_initializer()
        } else {
            self.expression()
        }
    }

    fn array_initializer(&mut self) -> PResult {
        self.expect("{")?;
        while !self.is("}") {
            self.variable_initializer()?;
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")
    }

    fn par_expression(&mut self) -> PResult {
        self.expect("(")?;
        self.expression()?;
        self.expect(")")
    }

    fn if_statement(&mut self) -> PResult {
        let id = self.open(AstTag::IfStatement);
        self.decision();
        self.expect("if")?;
        self.par_expression()?;
        self.statement()?;
        if self.eat("else") {
            self.statement()?;
        }
        self.close(id);
        Ok(())
    }

    fn while_statement(&mut self) -> PResult {
        let id = self.open(AstTag::WhileStatement);
        self.decision();
        self.expect("while")?;
        self.par_expression()?;
        self.statement()?;
        self.close(id);
        Ok(())
    }

    fn do_statement(&mut self) -> PResult {
        let id = self.open(AstTag::DoStatement);
        self.decision();
        self.expect("do")?;
        self.statement()?;
        self.expect("while")?;
        self.par_expression()?;
        self.expect(";")?;
        self.close(id);
        Ok(())
    }

    fn for_statement(&mut self) -> PResult {
        let id = self.open(AstTag::ForStatement);
        self.decision();
        self.expect("for")?;
        self.expect("(")?;
        let mut enhanced = false;
        if self.local_var_decl_ahead() {
            enhanced = self.local_variable_declaration(false)?;
        } else if !self.is(";") {
            self.expression_list()?;
        }
        if enhanced {
            self.expect(":")?;
            self.expression()?;
        } else {
            self.expect(";")?;
            if !self.is(";") {
                self.expression()?;
            }
            self.expect(";")?;
            if !self.is(")") {
                self.expression_list()?;
            }
        }
        self.expect(")")?;
        self.statement()?;
        self.close(id);
        Ok(())
    }

    fn expression_list(&mut self) -> PResult {
        self.expression()?;
        while self.eat(",") {
            self.expression()?;
        }
        Ok(())
    }

    /// `switch` statement or expression.
    fn switch_construct(&mut self) -> PResult {
        let id = self.open(AstTag::SwitchStatement);
        self.expect("switch")?;
        self.par_expression()?;
        self.expect("{")?;
        while !self.is("}") {
            if self.is("case") {
                self.decision();
                self.bump()?;
                loop {
                    self.case_label()?;
                    if !self.eat(",") {
                        break;
                    }
                }
                self.switch_label_body()?;
            } else if self.is("default") {
                self.bump()?;
                self.switch_label_body()?;
            } else if self.at_end() {
                return Err(self.error("unterminated switch"));
            } else {
                return Err(self.error("expected 'case' or 'default'"));
            }
        }
        self.expect("}")?;
        self.close(id);
        Ok(())
    }

    fn case_label(&mut self) -> PResult {
        if self.is("default") {
            return self.bump().map(|_| ());
        }
        // type pattern: `case Foo f ->`
        if let Some(end) = self.scan_type(self.pos) {
            if self.tok_at(end).is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.tok_at(end + 1).is_some_and(|t| t.is("->") || t.is(":") || t.is(","))
            {
                self.parse_type()?;
                return self.expect_ident();
            }
        }
        self.ternary()
    }

    fn switch_label_body(&mut self) -> PResult {
        if self.eat("->") {
            if self.is("{") {
                self.block()
            } else if self.is("throw") {
                self.statement()
            } else {
                self.expression()?;
                self.expect(";")
            }
        } else {
            self.expect(":")?;
            while !(self.is("case") || self.is("default") || self.is("}")) {
                if self.at_end() {
                    return Err(self.error("unterminated switch"));
                }
                self.statement()?;
            }
            Ok(())
        }
    }

    fn try_statement(&mut self) -> PResult {
        let id = self.open(AstTag::TryStatement);
        self.expect("try")?;
        let has_resources = self.is("(");
        if self.eat("(") {
            while !self.is(")") {
                if self.local_var_decl_ahead() {
                    let lv = self.open(AstTag::LocalVariableDeclaration);
                    self.modifiers()?;
                    self.parse_type()?;
                    self.expect_ident()?;
                    self.expect("=")?;
                    self.expression()?;
                    self.close(lv);
                } else {
                    self.expression()?;
                }
                if !self.eat(";") {
                    break;
                }
            }
            self.expect(")")?;
        }
        self.block()?;
        let mut handlers = 0;
        while self.is("catch") {
            self.decision();
            self.bump()?;
            self.expect("(")?;
            let param = self.open(AstTag::FormalParameter);
            self.modifiers()?;
            self.parse_type()?;
            while self.eat("|") {
                self.parse_type()?;
            }
            self.expect_ident()?;
            self.close(param);
            self.expect(")")?;
            self.block()?;
            handlers += 1;
        }
        if self.eat("finally") {
            self.block()?;
            handlers += 1;
        }
        if handlers == 0 && !has_resources {
            return Err(self.error("try without catch or finally"));
        }
        self.close(id);
        Ok(())
    }

    /// Local or nested class, interface, enum or record declaration.
    fn type_declaration(&mut self) -> PResult {
        self.modifiers()?;
        let is_enum = self.is("enum");
        let is_record = self.is_ident("record");
        if self.is("@") {
            self.bump()?;
        }
        self.bump()?; // class | interface | enum | record
        self.expect_ident()?;
        if self.is("<") {
            self.type_parameters()?;
        }
        if is_record {
            self.formal_parameters()?;
        }
        loop {
            if self.eat("extends") || self.eat("implements") || self.eat("permits") {
                self.parse_type()?;
                while self.eat(",") {
                    self.parse_type()?;
                }
            } else if self.is_ident("permits") {
                self.bump()?;
                self.parse_type()?;
                while self.eat(",") {
                    self.parse_type()?;
                }
            } else {
                break;
            }
        }
        self.class_body(is_enum)
    }

    fn class_body(&mut self, is_enum: bool) -> PResult {
        self.expect("{")?;
        if is_enum {
            while self.is_kind(TokenKind::Identifier) || self.is("@") {
                while self.is("@") {
                    self.annotation()?;
                }
                self.expect_ident()?;
                if self.is("(") {
                    self.arguments()?;
                }
                if self.is("{") {
                    self.class_body(false)?;
                }
                if !self.eat(",") {
                    break;
                }
            }
            if !self.eat(";") && !self.is("}") {
                return Err(self.error("expected ';' after enum constants"));
            }
        }
        while !self.is("}") {
            if self.at_end() {
                return Err(self.error("unterminated class body"));
            }
            self.member()?;
        }
        self.expect("}")
    }

    fn member(&mut self) -> PResult {
        if self.eat(";") {
            return Ok(());
        }
        if self.is("{") {
            return self.block();
        }
        if self.is("static") && self.is_at(self.pos + 1, "{") {
            self.bump()?;
            return self.block();
        }
        if self.local_class_ahead() {
            return self.type_declaration();
        }
        let mark = self.mark();
        self.modifiers()?;
        let generic = self.is("<");
        let method_ahead = generic
            || (self.is_kind(TokenKind::Identifier) && self.is_at(self.pos + 1, "("))
            || self.is("void")
            || self
                .scan_type(self.pos)
                .is_some_and(|end| self.is_at(end + 1, "("));
        if method_ahead {
            let id = self.wrap(mark, AstTag::MethodDeclaration);
            self.method_rest()?;
            self.close(id);
            return Ok(());
        }
        // field
        self.parse_type()?;
        loop {
            self.expect_ident()?;
            self.dims()?;
            if self.eat("=") {
                self.variable_initializer()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")
    }

    // ---- expressions -------------------------------------------------------

    fn expression(&mut self) -> PResult {
        if self.lambda_ahead() {
            return self.lambda();
        }
        self.assignment()
    }

    fn lambda_ahead(&self) -> bool {
        if self.is_kind(TokenKind::Identifier) {
            return self.is_at(self.pos + 1, "->");
        }
        if !self.is("(") {
            return false;
        }
        match self.matching_paren(self.pos) {
            Some(close) => self.is_at(close + 1, "->"),
            None => false,
        }
    }

    fn matching_paren(&self, open: usize) -> Option<usize> {
        let mut depth = 0i32;
        let mut k = open;
        loop {
            let t = self.tok_at(k)?;
            if t.is("(") {
                depth += 1;
            } else if t.is(")") {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            k += 1;
        }
    }

    fn lambda(&mut self) -> PResult {
        if self.is_kind(TokenKind::Identifier) {
            self.bump()?;
        } else {
            self.expect("(")?;
            while !self.is(")") {
                let bare = self.is_kind(TokenKind::Identifier)
                    && (self.is_at(self.pos + 1, ",") || self.is_at(self.pos + 1, ")"));
                if bare {
                    self.bump()?;
                } else {
                    self.formal_parameter()?;
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        self.expect("->")?;
        if self.is("{") {
            self.block()
        } else {
            self.expression()
        }
    }

    fn assignment(&mut self) -> PResult {
        let mark = self.mark();
        self.ternary()?;
        let is_assign = self.cur().is_some_and(|t| {
            t.kind == TokenKind::Operator && is_assign_op(&t.text)
        });
        if is_assign {
            let id = self.wrap(mark, AstTag::Assignment);
            self.bump()?;
            self.expression()?;
            self.close(id);
        }
        Ok(())
    }

    fn ternary(&mut self) -> PResult {
        self.binary(1)?;
        if self.is("?") {
            self.decision();
            self.bump()?;
            self.expression()?;
            self.expect(":")?;
            if self.lambda_ahead() {
                self.lambda()?;
            } else {
                self.ternary()?;
            }
        }
        Ok(())
    }

    fn binary(&mut self, min_prec: u8) -> PResult {
        let mark = self.mark();
        self.unary()?;
        loop {
            let Some(prec) = self.cur().and_then(binary_precedence) else {
                return Ok(());
            };
            if prec < min_prec {
                return Ok(());
            }
            let id = self.wrap(mark, AstTag::BinaryExpression);
            let op = self.bump()?;
            if op.is("&&") || op.is("||") {
                self.decision();
            }
            if op.is("instanceof") {
                self.eat("final");
                self.parse_type()?;
                if self.is_kind(TokenKind::Identifier) {
                    self.bump()?;
                } else if self.is("(") {
                    // record pattern
                    self.skip_balanced("(", ")")?;
                }
            } else {
                self.binary(prec + 1)?;
            }
            self.close(id);
        }
    }

    fn unary(&mut self) -> PResult {
        let Some(t) = self.cur() else {
            return Err(self.error("expected expression"));
        };
        if t.kind == TokenKind::Operator
            && matches!(t.text.as_str(), "++" | "--" | "+" | "-" | "!" | "~")
        {
            let id = self.open(AstTag::UnaryExpression);
            self.bump()?;
            self.unary()?;
            self.close(id);
            return Ok(());
        }
        if t.is("(") && self.cast_ahead() {
            let id = self.open(AstTag::CastExpression);
            self.bump()?;
            self.parse_type()?;
            while self.eat("&") {
                self.parse_type()?;
            }
            self.expect(")")?;
            if self.lambda_ahead() {
                self.lambda()?;
            } else {
                self.unary()?;
            }
            self.close(id);
            return Ok(());
        }
        let mark = self.mark();
        self.primary()?;
        self.postfix(mark)?;
        if self.is("++") || self.is("--") {
            let id = self.wrap(mark, AstTag::UnaryExpression);
            self.bump()?;
            self.close(id);
        }
        Ok(())
    }

    fn cast_ahead(&self) -> bool {
        let Some(first) = self.peek(1) else { return false };
        let primitive = first.kind == TokenKind::Keyword && super::is_primitive_type(&first.text);
        let mut end = match self.scan_type(self.pos + 1) {
            Some(end) => end,
            None => return false,
        };
        while self.is_at(end, "&") {
            match self.scan_type(end + 1) {
                Some(e) => end = e,
                None => return false,
            }
        }
        if !self.is_at(end, ")") {
            return false;
        }
        if primitive {
            return true;
        }
        let Some(next) = self.tok_at(end + 1) else { return false };
        match next.kind {
            TokenKind::Identifier
            | TokenKind::NumberLiteral
            | TokenKind::StringLiteral
            | TokenKind::CharLiteral
            | TokenKind::BoolLiteral
            | TokenKind::NullLiteral => true,
            TokenKind::Keyword => {
                matches!(next.text.as_str(), "this" | "super" | "new" | "switch")
                    || super::is_primitive_type(&next.text)
            }
            TokenKind::Operator => matches!(next.text.as_str(), "!" | "~"),
            TokenKind::Separator => next.is("("),
            TokenKind::Comment => false,
        }
    }

    fn primary(&mut self) -> PResult {
        let Some(t) = self.cur() else {
            return Err(self.error("expected expression"));
        };
        if t.kind.is_literal() {
            return self.leaf(AstTag::Literal);
        }
        match t.kind {
            TokenKind::Identifier => {
                if self.is_at(self.pos + 1, "(") {
                    let id = self.open(AstTag::MethodInvocation);
                    self.bump()?;
                    self.arguments()?;
                    self.close(id);
                } else {
                    self.bump()?;
                }
                Ok(())
            }
            TokenKind::Separator if t.is("(") => self.par_expression(),
            TokenKind::Keyword => match t.text.as_str() {
                "this" | "super" => {
                    if self.is_at(self.pos + 1, "(") {
                        let id = self.open(AstTag::MethodInvocation);
                        self.bump()?;
                        self.arguments()?;
                        self.close(id);
                    } else {
                        self.bump()?;
                    }
                    Ok(())
                }
                "new" => self.creation(),
                "switch" => self.switch_construct(),
                "void" => {
                    self.leaf(AstTag::TypeReference)?;
                    self.expect(".")?;
                    self.expect("class")
                }
                w if super::is_primitive_type(w) => {
                    self.parse_type()?;
                    if self.is("::") {
                        return Ok(());
                    }
                    self.expect(".")?;
                    self.expect("class")
                }
                _ => Err(self.error("expected expression")),
            },
            TokenKind::Separator if t.is("@") => {
                // annotated lambda parameter or type; skip permissively
                self.annotation()?;
                self.primary()
            }
            _ => Err(self.error("expected expression")),
        }
    }

    fn postfix(&mut self, mark: Mark) -> PResult {
        loop {
            if self.is(".") {
                let next = self.peek(1);
                match next {
                    Some(n) if n.kind == TokenKind::Identifier => {
                        if self.is_at(self.pos + 2, "(") {
                            let id = self.wrap(mark, AstTag::MethodInvocation);
                            self.bump()?;
                            self.bump()?;
                            self.arguments()?;
                            self.close(id);
                        } else {
                            let id = self.wrap(mark, AstTag::FieldAccess);
                            self.bump()?;
                            self.bump()?;
                            self.close(id);
                        }
                    }
                    Some(n) if n.is("<") => {
                        let id = self.wrap(mark, AstTag::MethodInvocation);
                        self.bump()?;
                        self.type_arguments()?;
                        self.expect_ident()?;
                        self.arguments()?;
                        self.close(id);
                    }
                    Some(n) if n.is("new") => {
                        self.bump()?;
                        self.creation()?;
                    }
                    Some(n) if n.is("class") || n.is("this") || n.is("super") => {
                        self.bump()?;
                        self.bump()?;
                    }
                    _ => return Err(self.error("expected member after '.'")),
                }
            } else if self.is("[") {
                if self.is_at(self.pos + 1, "]") {
                    // `Foo[]::new` or `Foo[].class`
                    self.dims()?;
                    continue;
                }
                let id = self.wrap(mark, AstTag::ArrayAccess);
                self.bump()?;
                self.expression()?;
                self.expect("]")?;
                self.close(id);
            } else if self.is("::") {
                self.bump()?;
                if self.is("<") {
                    self.type_arguments()?;
                }
                if !self.eat("new") {
                    self.expect_ident()?;
                }
            } else if self.is("<") && self.generic_type_ahead() {
                // `List<String>::new` or `Map<K, V>.Entry::getKey`
                self.type_arguments()?;
            } else {
                return Ok(());
            }
        }
    }

    fn generic_type_ahead(&self) -> bool {
        match self.scan_type_arguments(self.pos) {
            Some(end) => self.is_at(end, "::"),
            None => false,
        }
    }

    fn arguments(&mut self) -> PResult {
        self.expect("(")?;
        if !self.is(")") {
            self.expression_list()?;
        }
        self.expect(")")
    }

    fn creation(&mut self) -> PResult {
        self.expect("new")?;
        if self.is("<") {
            self.type_arguments()?;
        }
        // element type of an array creation, or the instantiated class
        let id = self.open(AstTag::TypeReference);
        while self.is("@") {
            self.annotation()?;
        }
        let primitive = self.cur().is_some_and(|t| {
            t.kind == TokenKind::Keyword && super::is_primitive_type(&t.text)
        });
        if primitive {
            self.bump()?;
        } else {
            self.class_type_segments()?;
        }
        self.close(id);
        if self.is("[") {
            while self.is("[") {
                self.bump()?;
                if !self.is("]") {
                    self.expression()?;
                }
                self.expect("]")?;
            }
            if self.is("{") {
                self.array_initializer()?;
            }
            return Ok(());
        }
        self.arguments()?;
        if self.is("{") {
            self.class_body(false)?;
        }
        Ok(())
    }
}

pub(crate) fn is_assign_op(op: &str) -> bool {
    ASSIGN_OPS.contains(&op)
}

#[cfg(test)]
mod tests {
    use super::super::{ast_tag_tokens, cyclomatic, lex, AstTag};
    use super::*;

    fn tree(src: &str) -> SyntaxTree {
        parse_method(&lex(src).unwrap()).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    /// Render the tree as nested tags, e.g. `MethodDeclaration(IfStatement(...))`.
    fn shape(t: &SyntaxTree) -> String {
        fn go(t: &SyntaxTree, id: NodeId, out: &mut String) {
            let n = t.node(id);
            out.push_str(n.tag.name());
            if !n.children.is_empty() {
                out.push('(');
                for (i, c) in n.children.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    go(t, *c, out);
                }
                out.push(')');
            }
        }
        let mut s = String::new();
        go(t, 0, &mut s);
        s
    }

    fn tags(src: &str) -> Vec<(String, AstTag)> {
        let toks = lex(src).unwrap();
        let t = parse_method(&toks).unwrap();
        ast_tag_tokens(&t).into_iter().map(|(i, tag)| (toks[i].text.clone(), tag)).collect()
    }

    fn tag_of(src: &str, token: &str) -> AstTag {
        tags(src).into_iter().find(|(t, _)| t == token).unwrap().1
    }

    #[test]
    fn minimal_method() {
        let t = tree("void f() { }");
        assert_eq!(shape(&t), "MethodDeclaration(TypeReference)");
        assert_eq!(cyclomatic(&t), 0);
    }

    #[test]
    fn if_return() {
        let t = tree("void f() { if (a) return; }");
        assert_eq!(shape(&t), "MethodDeclaration(TypeReference IfStatement(ReturnStatement))");
        assert_eq!(tag_of("void f() { if (a) return; }", "if"), AstTag::IfStatement);
    }

    #[test]
    fn local_variable_with_binary() {
        let src = "void f() { int x = y + 1; }";
        assert_eq!(
            shape(&tree(src)),
            "MethodDeclaration(TypeReference LocalVariableDeclaration(TypeReference BinaryExpression(Literal)))"
        );
        let t = tags(src);
        let get = |name: &str| t.iter().find(|(s, _)| s == name).unwrap().1;
        assert_eq!(get("int"), AstTag::TypeReference);
        assert_eq!(get("x"), AstTag::LocalVariableDeclaration);
        assert_eq!(get("y"), AstTag::BinaryExpression);
        assert_eq!(get("+"), AstTag::BinaryExpression);
        assert_eq!(get("1"), AstTag::Literal);
    }

    #[test]
    fn return_keyword_tag() {
        assert_eq!(tag_of("void f(){return;}", "return"), AstTag::ReturnStatement);
    }

    #[test]
    fn separators_and_comments_excluded() {
        let src = "void f() { /* c */ g(a, b); }";
        let t = tags(src);
        assert!(t.iter().all(|(s, _)| !matches!(s.as_str(), "(" | ")" | "{" | "}" | ";" | ",")));
        assert!(t.iter().all(|(s, _)| !s.starts_with("/*")));
        assert_eq!(t.len(), 5); // void f g a b
    }

    #[test]
    fn cyclomatic_examples() {
        assert_eq!(cyclomatic(&tree("void f() { x = 1; }")), 0);
        assert_eq!(cyclomatic(&tree("void f() { if (a) x = 1; }")), 1);
        assert_eq!(cyclomatic(&tree("void f() { for (;;) { if (a && b) break; } }")), 3);
        assert_eq!(
            cyclomatic(&tree(
                "int f(int k) { switch (k) { case 1: case 2: return 1; default: return 0; } }"
            )),
            2
        );
        assert_eq!(
            cyclomatic(&tree(
                "void f() { try { g(); } catch (A e) { } catch (B | C e) { } finally { } }"
            )),
            2
        );
        assert_eq!(cyclomatic(&tree("int f() { return a ? b : c || d ? 1 : 2; }")), 3);
        assert_eq!(cyclomatic(&tree("void f() { do { x++; } while (x < 3); }")), 1);
        assert_eq!(cyclomatic(&tree("void f() { while (a) { for (X x : xs) { } } }")), 2);
    }

    #[test]
    fn generics_with_shift_tokens() {
        let src = "Map<String, List<Integer>> f(List<List<String>> xs) { Map<String, List<Integer>> m = new HashMap<>(); return m; }";
        let t = tree(src);
        assert_eq!(cyclomatic(&t), 0);
        let toks = lex(src).unwrap();
        let tg = ast_tag_tokens(&t);
        let gt = tg.iter().find(|(i, _)| toks[*i].text == ">>").unwrap();
        assert_eq!(gt.1, AstTag::TypeReference);
    }

    #[test]
    fn wildcard_is_not_a_decision() {
        assert_eq!(cyclomatic(&tree("void f(List<? extends Number> xs) { Class<?> c = null; }")), 0);
    }

    #[test]
    fn invocation_and_field_access() {
        let src = "void f() { System.out.println(this.x[i]); }";
        let t = tags(src);
        let get = |name: &str| t.iter().find(|(s, _)| s == name).unwrap().1;
        assert_eq!(get("System"), AstTag::FieldAccess);
        assert_eq!(get("out"), AstTag::FieldAccess);
        assert_eq!(get("println"), AstTag::MethodInvocation);
        assert_eq!(get("this"), AstTag::FieldAccess);
        assert_eq!(get("x"), AstTag::FieldAccess);
        assert_eq!(get("i"), AstTag::ArrayAccess);
    }

    #[test]
    fn cast_unary_assignment() {
        let src = "void f() { y = (int) -x; i++; }";
        let t = tags(src);
        let get = |name: &str| t.iter().find(|(s, _)| s == name).unwrap().1;
        assert_eq!(get("y"), AstTag::Assignment);
        assert_eq!(get("int"), AstTag::TypeReference);
        assert_eq!(get("x"), AstTag::UnaryExpression);
        assert_eq!(get("i"), AstTag::UnaryExpression);
        assert_eq!(get("++"), AstTag::UnaryExpression);
        // parenthesized expression followed by a binary operator is not a cast
        assert_eq!(tag_of("void f() { y = (a) + b; }", "a"), AstTag::BinaryExpression);
    }

    #[test]
    fn parameters_and_throws() {
        let src = "public static <T extends Comparable<T>> T max(final T[] xs, int... n) throws IOException { return xs[0]; }";
        let t = tags(src);
        let get = |name: &str| t.iter().find(|(s, _)| s == name).unwrap().1;
        assert_eq!(get("public"), AstTag::MethodDeclaration);
        assert_eq!(get("max"), AstTag::MethodDeclaration);
        assert_eq!(get("final"), AstTag::FormalParameter);
        assert_eq!(get("n"), AstTag::FormalParameter);
        assert_eq!(get("IOException"), AstTag::TypeReference);
        assert_eq!(get("Comparable"), AstTag::TypeReference);
    }

    #[test]
    fn lambdas_switch_expressions_and_anonymous_classes() {
        let src = r#"
            Runnable f(int k) {
                list.forEach(x -> System.out.println(x));
                list.sort((a, b) -> a - b);
                int r = switch (k) { case 1, 2 -> 3; default -> { yield 4; } };
                Object o = new Object() {
                    @Override public String toString() { return k > 0 ? "p" : "n"; }
                };
                return () -> { };
            }"#;
        let t = tree(src);
        // `case` label + `?:` inside the anonymous toString
        assert_eq!(cyclomatic(&t), 2);
        let nested = t.nodes().iter().filter(|n| n.tag == AstTag::MethodDeclaration).count();
        assert_eq!(nested, 2);
    }

    #[test]
    fn misc_statements() {
        let src = r#"
            void f(Object o) throws Exception {
                outer:
                for (int i = 0, j = 10; i < j; i++, j--) {
                    if (o instanceof String s && s.isEmpty()) continue outer;
                    synchronized (this) { assert i >= 0 : "neg"; }
                }
                try (InputStream in = open(); out) { in.read(); }
                int[] a = new int[] {1, 2}, b[] = {{1}};
                char c = 'x';
                String t = """
                    block""";
                Class<?> k = int[].class;
                Supplier<List<String>> s = ArrayList::new;
                super.f(o);
                throw new IllegalStateException("x" + c);
            }"#;
        let t = tree(src);
        assert_eq!(cyclomatic(&t), 3); // for, if, &&
    }

    #[test]
    fn constructor_and_explicit_invocation() {
        let t = tags("public Foo(int a) { this(a, 0); }");
        assert!(t.contains(&("this".to_string(), AstTag::MethodInvocation)));
        assert!(t.contains(&("Foo".to_string(), AstTag::MethodDeclaration)));
    }

    #[test]
    fn local_class_methods_are_nested() {
        let t = tree("void f() { class L { int g() { return 1; } } }");
        let methods = t.nodes().iter().filter(|n| n.tag == AstTag::MethodDeclaration).count();
        assert_eq!(methods, 2);
    }

    #[test]
    fn parse_errors_report_token_index() {
        let toks = lex("void f() { int x = ; }").unwrap();
        let err = parse_method(&toks).unwrap_err();
        match err {
            SyntaxError::Parse { index, .. } => assert_eq!(toks[index].text, ";"),
            other => panic!("{other:?}"),
        }
        assert!(parse_method(&lex("void f() {").unwrap()).is_err());
        assert!(parse_method(&lex("void f() {} }").unwrap()).is_err());
        assert!(parse_method(&[]).is_err());
    }

    #[test]
    fn node_ranges_nest() {
        let src = "int f(int[] a) { int s = 0; for (int i = 0; i < a.length; i++) { s += a[i] * (i % 2 == 0 ? 1 : -1); } return s; }";
        let t = tree(src);
        for n in t.nodes() {
            assert!(n.tokens.start < n.tokens.end);
            for &c in &n.children {
                let ch = t.node(c);
                assert!(n.tokens.start <= ch.tokens.start && ch.tokens.end <= n.tokens.end);
            }
            for w in n.children.windows(2) {
                assert!(t.node(w[0]).tokens.end <= t.node(w[1]).tokens.start);
            }
        }
    }
}
