#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use codeprobe_core::corpus::MethodSnippet;
use codeprobe_core::syntax::AstTag;
use codeprobe_core::tasks::TaskKind;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn bundled_corpus() -> PathBuf {
    fixtures().join("corpus")
}

fn snippet(task: &str, i: usize, text: String) -> MethodSnippet {
    let path = format!("gen/{task}.java");
    MethodSnippet {
        id: MethodSnippet::snippet_id("synthetic", &path, i * 1000),
        project: "synthetic".into(),
        path,
        start: i * 1000,
        end: i * 1000 + text.chars().count(),
        text,
    }
}

/// Snippets whose labels for `task` are known by construction, with classes
/// populated in rotation.
pub fn synthetic_snippets(task: TaskKind, n: usize, seed: u64) -> Vec<MethodSnippet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let text = match task {
                TaskKind::Len => len_method(i, expected_len_bin(i), &mut rng),
                TaskKind::Cpx => cpx_method(i, (i % 10) as u32, &mut rng),
                TaskKind::Typ => typ_method(i, &mut rng),
                TaskKind::Ast => ast_method(i, &mut rng),
            };
            snippet(task.name(), i, text)
        })
        .collect()
}

pub fn expected_len_bin(i: usize) -> u32 {
    (i % 5) as u32
}

/// `int lenI(int a) { int x = a; (x = x + K;)* return x; }`: 16 tokens plus 6
/// per statement.
pub fn len_method(i: usize, bin: u32, rng: &mut ChaCha8Rng) -> String {
    let (lo, hi) = if bin < 4 { (50 * bin as usize, 50 * bin as usize + 49) } else { (200, 320) };
    let statements = rng.random_range(lo.saturating_sub(16).div_ceil(6)..=(hi - 16) / 6);
    let mut body = String::from("int x = a;");
    for k in 0..statements {
        body.push_str(&format!(" x = x + {};", k + 1));
    }
    format!("int len{i}(int a) {{ {body} return x; }}")
}

/// A method with exactly `complexity` decision points.
pub fn cpx_method(i: usize, complexity: u32, rng: &mut ChaCha8Rng) -> String {
    let mut remaining = complexity;
    let mut body = String::new();
    while remaining > 0 {
        let k = rng.random_range(0..100);
        let stmt = match rng.random_range(0..6) {
            0 => format!("if (a > {k}) {{ a--; }}"),
            1 => format!("while (a > {k}) {{ a -= 2; }}"),
            2 => format!("for (int j = 0; j < {k}; j++) {{ a += j; }}"),
            3 => format!("do {{ a++; }} while (a < {k});"),
            4 => format!("a = a > {k} ? a : {k};"),
            _ if remaining >= 2 => {
                remaining -= 1;
                format!("if (a > {k} && b < {k}) {{ b = a; }}")
            }
            _ => format!("if (b == {k}) {{ b = 0; }}"),
        };
        remaining -= 1;
        body.push_str(&stmt);
        body.push(' ');
        for _ in 0..rng.random_range(0..3) {
            body.push_str(&format!("b = b * {k} + a; "));
        }
    }
    format!("int cpx{i}(int a, int b) {{ {body}return a + b; }}")
}

const PRIMITIVES: [&str; 6] = ["int", "long", "short", "double", "float", "boolean"];

pub fn typ_method(i: usize, rng: &mut ChaCha8Rng) -> String {
    let t = *PRIMITIVES.choose(rng).unwrap();
    let u = *PRIMITIVES.choose(rng).unwrap();
    format!("{t} typ{i}({t} a, {u} b) {{ {u} c = b; return a; }}")
}

/// Statements that introduce one tag with as little else as possible.
fn ast_statement(tag: AstTag) -> &'static str {
    match tag {
        AstTag::LocalVariableDeclaration => "int v;",
        AstTag::Assignment => "v = w;",
        AstTag::MethodInvocation => "g();",
        AstTag::FieldAccess => "v = this.w;",
        AstTag::ArrayAccess => "v = a[i];",
        AstTag::IfStatement => "if (a) { }",
        AstTag::ForStatement => "for (;;) { }",
        AstTag::WhileStatement => "while (a) { }",
        AstTag::DoStatement => "do { } while (a);",
        AstTag::SwitchStatement => "switch (a) { }",
        AstTag::TryStatement => "try { } finally { }",
        AstTag::ThrowStatement => "throw e;",
        AstTag::BinaryExpression => "v = a + b;",
        AstTag::UnaryExpression => "i++;",
        AstTag::CastExpression => "v = (long) w;",
        AstTag::Literal => "v = 1;",
        AstTag::ReturnStatement => "return;",
        AstTag::MethodDeclaration | AstTag::TypeReference | AstTag::FormalParameter => "",
    }
}

/// One in seven methods is empty (tags: MethodDeclaration and TypeReference
/// only); the rest feature three other randomly chosen tags.
pub fn ast_method(i: usize, rng: &mut ChaCha8Rng) -> String {
    if i.is_multiple_of(7) {
        return format!("void e{i}() {{ }}");
    }
    let specials: Vec<AstTag> = AstTag::ALL
        .into_iter()
        .filter(|t| !matches!(t, AstTag::MethodDeclaration | AstTag::TypeReference))
        .collect();
    let chosen: Vec<AstTag> = specials.choose_multiple(rng, 3).copied().collect();
    let params = if chosen.contains(&AstTag::FormalParameter) { "int p" } else { "" };
    let mut body: Vec<&str> = chosen.iter().map(|&t| ast_statement(t)).filter(|s| !s.is_empty()).collect();
    // `return` must come last to read naturally
    body.sort_by_key(|s| *s == "return;");
    format!("void m{i}({params}) {{ {} }}", body.join(" "))
}

/// A method from the hand-labeled fixture.
#[derive(Debug, Clone)]
pub struct HandLabeled {
    pub name: String,
    pub source: String,
    pub cyclomatic: u32,
    pub tokens: usize,
    pub tags: Vec<(String, AstTag)>,
}

pub fn hand_labeled() -> Vec<HandLabeled> {
    let text = std::fs::read_to_string(fixtures().join("hand_labeled.txt")).unwrap();
    let mut out = Vec::new();
    for block in text.split("\n== ").skip(1) {
        let mut lines = block.lines();
        let name = lines.next().unwrap().trim().to_string();
        let source = lines.next().unwrap().to_string();
        let mut m = HandLabeled { name, source, cyclomatic: u32::MAX, tokens: usize::MAX, tags: Vec::new() };
        for line in lines {
            if let Some(v) = line.strip_prefix("cyclomatic ") {
                m.cyclomatic = v.parse().unwrap();
            } else if let Some(v) = line.strip_prefix("tokens ") {
                m.tokens = v.parse().unwrap();
            } else if let Some(v) = line.strip_prefix("tags ") {
                m.tags = v
                    .split_whitespace()
                    .map(|pair| {
                        let (tok, tag) = pair.rsplit_once('/').unwrap();
                        (tok.to_string(), tag.parse().unwrap())
                    })
                    .collect();
            }
        }
        assert!(m.cyclomatic != u32::MAX && m.tokens != usize::MAX && !m.tags.is_empty(), "{}", m.name);
        out.push(m);
    }
    out
}

/// Hand rule for length bins: 50-token buckets, the last one open-ended.
pub fn hand_bin(tokens: usize) -> u32 {
    match tokens {
        0..=49 => 0,
        50..=99 => 1,
        100..=149 => 2,
        150..=199 => 3,
        _ => 4,
    }
}
