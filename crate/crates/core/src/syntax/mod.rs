//! Lexing, lightweight method parsing, per-token AST tags, cyclomatic
//! complexity and primitive-type misspelling.

mod lexer;
mod parser;
mod perturb;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexer::{
    is_keyword, is_primitive_type, is_reserved_word, lex, Token, TokenKind, KEYWORDS,
    PRIMITIVE_TYPES,
};
pub use parser::parse_method;
pub use perturb::{perturb_primitive_type, PerturbationRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("lexical error at offset {offset}: {message}")]
    Lex { offset: usize, message: String },
    #[error("parse error at token {index}: {message}")]
    Parse { index: usize, message: String },
}

impl SyntaxError {
    /// Byte offset for lexical errors, token index for parse errors.
    pub fn offset(&self) -> usize {
        match self {
            SyntaxError::Lex { offset, .. } => *offset,
            SyntaxError::Parse { index, .. } => *index,
        }
    }
}

/// The fixed 20-class node tag scheme used for AST node tagging.
///
/// Integer codes are the declaration order and are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AstTag {
    MethodDeclaration,
    FormalParameter,
    LocalVariableDeclaration,
    Assignment,
    MethodInvocation,
    FieldAccess,
    ArrayAccess,
    IfStatement,
    ForStatement,
    WhileStatement,
    DoStatement,
    SwitchStatement,
    TryStatement,
    ReturnStatement,
    ThrowStatement,
    BinaryExpression,
    UnaryExpression,
    CastExpression,
    Literal,
    TypeReference,
}

impl AstTag {
    pub const COUNT: usize = 20;

    pub const ALL: [AstTag; AstTag::COUNT] = [
        AstTag::MethodDeclaration,
        AstTag::FormalParameter,
        AstTag::LocalVariableDeclaration,
        AstTag::Assignment,
        AstTag::MethodInvocation,
        AstTag::FieldAccess,
        AstTag::ArrayAccess,
        AstTag::IfStatement,
        AstTag::ForStatement,
        AstTag::WhileStatement,
        AstTag::DoStatement,
        AstTag::SwitchStatement,
        AstTag::TryStatement,
        AstTag::ReturnStatement,
        AstTag::ThrowStatement,
        AstTag::BinaryExpression,
        AstTag::UnaryExpression,
        AstTag::CastExpression,
        AstTag::Literal,
        AstTag::TypeReference,
    ];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<AstTag> {
        AstTag::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AstTag::MethodDeclaration => "MethodDeclaration",
            AstTag::FormalParameter => "FormalParameter",
            AstTag::LocalVariableDeclaration => "LocalVariableDeclaration",
            AstTag::Assignment => "Assignment",
            AstTag::MethodInvocation => "MethodInvocation",
            AstTag::FieldAccess => "FieldAccess",
            AstTag::ArrayAccess => "ArrayAccess",
            AstTag::IfStatement => "IfStatement",
            AstTag::ForStatement => "ForStatement",
            AstTag::WhileStatement => "WhileStatement",
            AstTag::DoStatement => "DoStatement",
            AstTag::SwitchStatement => "SwitchStatement",
            AstTag::TryStatement => "TryStatement",
            AstTag::ReturnStatement => "ReturnStatement",
            AstTag::ThrowStatement => "ThrowStatement",
            AstTag::BinaryExpression => "BinaryExpression",
            AstTag::UnaryExpression => "UnaryExpression",
            AstTag::CastExpression => "CastExpression",
            AstTag::Literal => "Literal",
            AstTag::TypeReference => "TypeReference",
        }
    }
}

impl fmt::Display for AstTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AstTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AstTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown AST tag {s:?}"))
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub tag: AstTag,
    /// Half-open range of indices into the token sequence given to the parser.
    pub tokens: Range<usize>,
    pub children: Vec<NodeId>,
    /// Decision points owned by this node: 1 for a loop or `if`, one per
    /// `case` label on a switch, one per `catch` on a try, one per `&&`/`||`
    /// on a binary expression, and one per `?:` on whatever node encloses it.
    pub decisions: u32,
}

/// Arena-backed method syntax tree. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    nodes: Vec<Node>,
    token_count: usize,
    comment_mask: Vec<bool>,
    separator_mask: Vec<bool>,
}

impl SyntaxTree {
    pub(crate) fn new(nodes: Vec<Node>, tokens: &[Token]) -> Self {
        SyntaxTree {
            nodes,
            token_count: tokens.len(),
            comment_mask: tokens.iter().map(Token::is_comment).collect(),
            separator_mask: tokens.iter().map(|t| t.kind == TokenKind::Separator).collect(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// Pre-order walk starting at the root.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    /// Tag of the innermost node enclosing each token.
    fn innermost_tags(&self) -> Vec<Option<AstTag>> {
        let mut tags = vec![None; self.token_count];
        // Children are visited after their parents, so deeper nodes overwrite.
        for id in self.preorder() {
            let node = &self.nodes[id];
            for slot in &mut tags[node.tokens.clone()] {
                *slot = Some(node.tag);
            }
        }
        tags
    }
}

/// Innermost-node tag for every token that is neither a comment nor a
/// separator, in token order.
pub fn ast_tag_tokens(tree: &SyntaxTree) -> Vec<(usize, AstTag)> {
    tree.innermost_tags()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !tree.comment_mask[*i] && !tree.separator_mask[*i])
        .map(|(i, tag)| (i, tag.expect("root covers every token")))
        .collect()
}

/// Decision-point count; straight-line code scores 0.
pub fn cyclomatic(tree: &SyntaxTree) -> u32 {
    tree.nodes.iter().map(|n| n.decisions).sum()
}

/// Number of tokens that are not comments.
pub fn code_token_count(tokens: &[Token]) -> usize {
    tokens.iter().filter(|t| !t.is_comment()).count()
}

/// Lex and parse a method snippet in one step.
pub fn analyze(text: &str) -> Result<(Vec<Token>, SyntaxTree), SyntaxError> {
    let tokens = lex(text)?;
    let tree = parse_method(&tokens)?;
    Ok((tokens, tree))
}
