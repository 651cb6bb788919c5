//! Walk a directory tree of Java projects and cut out method-level snippets.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::hash::fnv1a_parts;
use crate::syntax::{self, Token, TokenKind};

pub const DEFAULT_MIN_TOKENS: usize = 5;
pub const DEFAULT_MAX_TOKENS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Path relative to the corpus root, `/`-separated.
    pub path: String,
    pub text: String,
    pub project: String,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub files: Vec<SourceFile>,
    pub skipped_non_utf8: usize,
}

/// One extracted method or constructor.
///
/// `start`/`end` are character (Unicode scalar) offsets into the source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSnippet {
    #[serde(with = "u64_string")]
    pub id: u64,
    pub project: String,
    pub path: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

impl MethodSnippet {
    pub fn snippet_id(project: &str, path: &str, start: usize) -> u64 {
        fnv1a_parts(&[project.as_bytes(), path.as_bytes(), start.to_string().as_bytes()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { min_tokens: DEFAULT_MIN_TOKENS, max_tokens: DEFAULT_MAX_TOKENS }
    }
}

/// A file that was skipped during extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractWarning {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusBuild {
    pub snippets: Vec<MethodSnippet>,
    pub warnings: Vec<ExtractWarning>,
    pub skipped_non_utf8: usize,
    pub files_scanned: usize,
}

pub fn scan_sources(root: &Path) -> Result<ScanOutcome> {
    let meta = fs::metadata(root).map_err(|e| Error::CorpusRoot {
        path: root.to_path_buf(),
        reason: e.to_string(),
    })?;
    if !meta.is_dir() {
        return Err(Error::CorpusRoot {
            path: root.to_path_buf(),
            reason: "not a directory".into(),
        });
    }
    let root_name = root
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_default();

    let mut found: Vec<(String, PathBuf)> = Vec::new();
    let mut skipped = 0;
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| Error::CorpusRoot {
            path: e.path().unwrap_or(root).to_path_buf(),
            reason: e.to_string(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir yields paths under root");
        let Some(rel_str) = rel.to_str() else {
            skipped += 1;
            continue;
        };
        if !rel_str.ends_with(".java") {
            continue;
        }
        let rel_str = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        found.push((rel_str, entry.path().to_path_buf()));
    }
    found.sort();

    let mut files = Vec::with_capacity(found.len());
    for (rel, full) in found {
        let bytes = fs::read(&full).map_err(|e| Error::io(&full, e))?;
        match String::from_utf8(bytes) {
            Ok(text) => {
                let project = match rel.split_once('/') {
                    Some((top, _)) => top.to_string(),
                    None => root_name.clone(),
                };
                files.push(SourceFile { path: rel, text, project });
            }
            Err(_) => {
                warn!("skipping {rel}: not valid UTF-8");
                skipped += 1;
            }
        }
    }
    Ok(ScanOutcome { files, skipped_non_utf8: skipped })
}

/// Extract every method or constructor with a body, ordered by start offset.
///
/// Files that do not lex or whose braces do not balance are reported through
/// the warning instead of failing the whole corpus.
pub fn extract_methods(
    file: &SourceFile,
    options: &ExtractOptions,
) -> std::result::Result<Vec<MethodSnippet>, ExtractWarning> {
    let warn = |reason: String| ExtractWarning { path: file.path.clone(), reason };
    let all = syntax::lex(&file.text).map_err(|e| warn(e.to_string()))?;
    let code: Vec<&Token> = all.iter().filter(|t| !t.is_comment()).collect();
    let matching = match_brackets(&code).ok_or_else(|| warn("unbalanced braces".into()))?;

    let mut spans = find_method_spans(&code, &matching);
    spans.sort_by_key(|&(s, e)| (code[s].span.start, e));

    let char_offsets = CharOffsets::new(&file.text);
    let mut out = Vec::new();
    for (first, last) in spans {
        let n_tokens = last - first + 1;
        if n_tokens < options.min_tokens || n_tokens > options.max_tokens {
            continue;
        }
        let byte_start = code[first].span.start;
        let byte_end = code[last].span.end;
        let start = char_offsets.to_char(byte_start);
        let end = char_offsets.to_char(byte_end);
        out.push(MethodSnippet {
            id: MethodSnippet::snippet_id(&file.project, &file.path, start),
            project: file.project.clone(),
            path: file.path.clone(),
            start,
            end,
            text: file.text[byte_start..byte_end].to_string(),
        });
    }
    Ok(out)
}

/// Scan and extract a whole corpus. Extraction runs in parallel; the result
/// is ordered by path, then by start offset.
pub fn build_corpus(root: &Path, options: &ExtractOptions) -> Result<CorpusBuild> {
    let scan = scan_sources(root)?;
    let per_file: Vec<_> = scan.files.par_iter().map(|f| extract_methods(f, options)).collect();
    let mut build = CorpusBuild {
        skipped_non_utf8: scan.skipped_non_utf8,
        files_scanned: scan.files.len(),
        ..Default::default()
    };
    for result in per_file {
        match result {
            Ok(snippets) => build.snippets.extend(snippets),
            Err(w) => {
                warn!("skipping {}: {}", w.path, w.reason);
                build.warnings.push(w);
            }
        }
    }
    Ok(build)
}

pub fn write_snippets(path: &Path, snippets: &[MethodSnippet]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in snippets {
        let line = serde_json::to_string(s).expect("snippet serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_snippets(path: &Path) -> Result<Vec<MethodSnippet>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: MethodSnippet = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(s);
    }
    Ok(out)
}

/// Serialize snippets exactly as [`write_snippets`] does.
pub fn snippets_to_jsonl(snippets: &[MethodSnippet]) -> String {
    let mut out = String::new();
    for s in snippets {
        out.push_str(&serde_json::to_string(s).expect("snippet serializes"));
        out.push('\n');
    }
    out
}

/// For each bracket token, the index of its partner. `None` if braces,
/// parentheses or brackets do not nest.
fn match_brackets(code: &[&Token]) -> Option<Vec<usize>> {
    let mut matching = vec![usize::MAX; code.len()];
    let mut stack: Vec<(usize, &str)> = Vec::new();
    for (i, t) in code.iter().enumerate() {
        if t.kind != TokenKind::Separator {
            continue;
        }
        match t.text.as_str() {
            "(" | "{" | "[" => stack.push((i, t.text.as_str())),
            close @ (")" | "}" | "]") => {
                let (j, open) = stack.pop()?;
                let expected = match open {
                    "(" => ")",
                    "{" => "}",
                    _ => "]",
                };
                if expected != close {
                    return None;
                }
                matching[i] = j;
                matching[j] = i;
            }
            _ => {}
        }
    }
    stack.is_empty().then_some(matching)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scope {
    /// Body of a class, interface, record or enum. `enum_constants` is true
    /// while still inside an enum's constant list.
    Class { enum_constants: bool },
    Other,
}

/// Find `(first, last)` code-token indices of every method or constructor
/// declaration with a body, at any nesting depth.
fn find_method_spans(code: &[&Token], matching: &[usize]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    // (scope, index of the opening brace, pending method start)
    let mut stack: Vec<(Scope, usize, Option<usize>)> = Vec::new();
    let mut pending_type: Option<bool> = None; // Some(is_enum) after a type header keyword
    let mut paren_depth: Vec<usize> = vec![0];
    let mut next_body: Option<usize> = None; // method start whose body brace comes next
    let is = |i: usize, s: &str| code.get(i).is_some_and(|t| t.is(s));

    let mut i = 0;
    while i < code.len() {
        let t = code[i];
        let depth = *paren_depth.last().unwrap();
        let scope = stack.last().map(|s| s.0).unwrap_or(Scope::Class { enum_constants: false });
        if t.kind == TokenKind::Separator {
            match t.text.as_str() {
                "(" | "[" => *paren_depth.last_mut().unwrap() += 1,
                ")" | "]" => {
                    let d = paren_depth.last_mut().unwrap();
                    *d = d.saturating_sub(1);
                }
                "{" => {
                    let new_scope = if next_body.is_some() {
                        Scope::Other
                    } else if let Some(is_enum) = pending_type.take() {
                        Scope::Class { enum_constants: is_enum }
                    } else if (matches!(scope, Scope::Class { enum_constants: true }) && depth == 0)
                        || (i > 0 && is(i - 1, ")") && is_anonymous_class(code, matching[i - 1]))
                    {
                        Scope::Class { enum_constants: false }
                    } else {
                        Scope::Other
                    };
                    stack.push((new_scope, i, next_body.take()));
                    paren_depth.push(0);
                }
                "}" => {
                    if let Some((_, _, Some(start))) = stack.pop() {
                        spans.push((start, i));
                    }
                    paren_depth.pop();
                    if paren_depth.is_empty() {
                        paren_depth.push(0);
                    }
                }
                ";" => {
                    next_body = None;
                    if depth == 0 {
                        if let Some(top) = stack.last_mut() {
                            if top.0 == (Scope::Class { enum_constants: true }) {
                                top.0 = Scope::Class { enum_constants: false };
                            }
                        }
                    }
                }
                _ => {}
            }
            i += 1;
            continue;
        }

        if is_type_header(code, i) {
            pending_type = Some(t.is("enum"));
            i += 1;
            continue;
        }

        if scope == (Scope::Class { enum_constants: false })
            && depth == 0
            && t.kind == TokenKind::Identifier
            && is(i + 1, "(")
            && plausible_declaration_prefix(code, i)
        {
            let close = matching[i + 1];
            let mut k = close + 1;
            while is(k, "[") && is(k + 1, "]") {
                k += 2;
            }
            if is(k, "throws") {
                while k < code.len() && !is(k, "{") && !is(k, ";") {
                    k += 1;
                }
            }
            if is(k, "{") {
                let floor = stack.last().map(|s| s.1 + 1).unwrap_or(0);
                next_body = Some(declaration_start(code, matching, i, floor));
                // jump to the body brace; the skipped tokens hold no declarations
                i = k;
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// `class`/`interface`/`enum`/`record` introducing a type body.
fn is_type_header(code: &[&Token], i: usize) -> bool {
    let t = code[i];
    let after_dot = i > 0 && code[i - 1].is(".");
    if t.kind == TokenKind::Keyword {
        return matches!(t.text.as_str(), "class" | "interface" | "enum") && !after_dot;
    }
    t.kind == TokenKind::Identifier
        && t.text == "record"
        && code.get(i + 1).is_some_and(|n| n.kind == TokenKind::Identifier)
        && code.get(i + 2).is_some_and(|n| n.is("(") || n.is("<"))
}

/// Whether the token before a `name(` can precede a method or constructor name.
fn plausible_declaration_prefix(code: &[&Token], name: usize) -> bool {
    let Some(prev) = name.checked_sub(1).map(|p| code[p]) else {
        return true;
    };
    match prev.kind {
        TokenKind::Identifier => true,
        TokenKind::Keyword => {
            syntax::is_primitive_type(&prev.text)
                || matches!(
                    prev.text.as_str(),
                    "void"
                        | "public"
                        | "protected"
                        | "private"
                        | "static"
                        | "abstract"
                        | "final"
                        | "native"
                        | "synchronized"
                        | "strictfp"
                        | "default"
                )
        }
        TokenKind::Operator => matches!(prev.text.as_str(), ">" | ">>" | ">>>"),
        TokenKind::Separator => matches!(prev.text.as_str(), "]" | ")" | "{" | "}" | ";"),
        _ => false,
    }
}

/// First token of the declaration whose name is at `name`: walk back over
/// modifiers, annotations, type parameters and the return type.
fn declaration_start(code: &[&Token], matching: &[usize], name: usize, floor: usize) -> usize {
    let mut k = name;
    while k > floor {
        let prev = code[k - 1];
        if prev.is(";") || prev.is("{") || prev.is("}") {
            break;
        }
        if prev.is(")") {
            k = matching[k - 1];
        } else {
            k -= 1;
        }
    }
    k
}

/// `open` is the index of a `(` whose `)` is followed by `{`; true if the
/// call is `new Type(...)`.
fn is_anonymous_class(code: &[&Token], open: usize) -> bool {
    let mut k = open;
    while k > 0 {
        let t = code[k - 1];
        let type_part = t.kind == TokenKind::Identifier
            || t.is(".")
            || t.is("<")
            || t.is(">")
            || t.is(">>")
            || t.is(">>>")
            || t.is(",")
            || t.is("?")
            || t.is("extends")
            || t.is("super");
        if t.is("new") {
            return true;
        }
        if !type_part {
            return false;
        }
        k -= 1;
    }
    false
}

struct CharOffsets {
    /// Byte offset of every char boundary, plus the end.
    boundaries: Vec<usize>,
}

impl CharOffsets {
    fn new(text: &str) -> Self {
        let mut boundaries: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        boundaries.push(text.len());
        CharOffsets { boundaries }
    }

    fn to_char(&self, byte: usize) -> usize {
        self.boundaries.binary_search(&byte).expect("token spans fall on char boundaries")
    }
}

mod u64_string {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> SourceFile {
        SourceFile { path: "p/A.java".into(), text: text.into(), project: "p".into() }
    }

    fn names(text: &str) -> Vec<String> {
        extract_methods(&file(text), &ExtractOptions::default())
            .unwrap()
            .into_iter()
            .map(|s| s.text)
            .collect()
    }

    #[test]
    fn two_methods_in_order() {
        let src = "class A {\n  void foo() { x(); }\n  int bar(int a) { return a; }\n}";
        assert_eq!(names(src), vec!["void foo() { x(); }", "int bar(int a) { return a; }"]);
    }

    #[test]
    fn abstract_signatures_are_skipped() {
        let src = "interface I { void f(); int g(String s) throws E; }";
        assert!(names(src).is_empty());
    }

    #[test]
    fn short_stub_below_minimum() {
        // `f(){}` is five tokens; anything shorter cannot be a method, so
        // exercise the bound with a raised minimum.
        let src = "class A { void f() {} }";
        let stub = "void f() {}";
        assert_eq!(syntax::code_token_count(&syntax::lex(stub).unwrap()), 6);
        let opts = ExtractOptions { min_tokens: 7, max_tokens: 2048 };
        assert!(extract_methods(&file(src), &opts).unwrap().is_empty());
        assert_eq!(names(src).len(), 1);
    }

    #[test]
    fn maximum_token_bound() {
        let body: String = (0..30).map(|i| format!("x{i}();")).collect();
        let src = format!("class A {{ void f() {{ {body} }} }}");
        let opts = ExtractOptions { min_tokens: 5, max_tokens: 50 };
        assert!(extract_methods(&file(&src), &opts).unwrap().is_empty());
    }

    #[test]
    fn modifiers_annotations_and_generics_are_part_of_the_signature() {
        let src = "class A {\n  /** doc */\n  @Override\n  @SuppressWarnings({\"a\", \"b\"})\n  public static <T> List<T> f(T t) throws IOException { return null; }\n}";
        let got = names(src);
        assert_eq!(got.len(), 1);
        assert!(got[0].starts_with("@Override"), "{}", got[0]);
        assert!(got[0].ends_with("return null; }"));
    }

    #[test]
    fn constructors_fields_and_initializers() {
        let src = r#"
            class A {
                private int x = compute(3);
                static { init(); }
                A(int x) { this.x = x; }
                Runnable r = new Runnable() { public void run() { go(); } };
            }"#;
        let got = names(src);
        assert_eq!(got, vec!["A(int x) { this.x = x; }", "public void run() { go(); }"]);
    }

    #[test]
    fn nested_methods_in_inner_classes() {
        let src = r#"
            class A {
                void outer() {
                    Comparator<X> c = new Comparator<X>() {
                        public int compare(X a, X b) { return 0; }
                    };
                    class Local { void inner() { y(); } }
                }
                static class B { void g() { z(); } }
            }"#;
        let snippets = extract_methods(&file(src), &ExtractOptions::default()).unwrap();
        let got: Vec<_> = snippets.iter().map(|s| s.text.split('(').next().unwrap().trim()).collect();
        assert_eq!(got, vec!["void outer", "public int compare", "void inner", "void g"]);
        // outer contains compare and inner; g is a sibling
        assert!(snippets[0].start < snippets[1].start && snippets[1].end < snippets[0].end);
        assert!(snippets[0].end < snippets[3].start);
    }

    #[test]
    fn enum_constants_are_not_methods() {
        let src = r#"
            enum Op {
                PLUS("+") { int apply(int a, int b) { return a + b; } },
                MINUS("-") { int apply(int a, int b) { return a - b; } };
                private final String s;
                Op(String s) { this.s = s; }
                abstract int apply(int a, int b);
            }"#;
        let got = names(src);
        assert_eq!(got.len(), 3);
        assert!(got[2].starts_with("Op(String s)"));
    }

    #[test]
    fn records_and_interfaces_with_default_methods() {
        let src = r#"
            record P(int x, int y) { int sum() { return x + y; } }
            interface I { default int one() { return 1; } }"#;
        assert_eq!(names(src).len(), 2);
    }

    #[test]
    fn unbalanced_file_is_a_warning() {
        let err = extract_methods(&file("class A { void f() { "), &ExtractOptions::default())
            .unwrap_err();
        assert_eq!(err.reason, "unbalanced braces");
        assert!(extract_methods(&file("class A { s = \"x; }"), &ExtractOptions::default()).is_err());
    }

    #[test]
    fn char_offsets_and_ids() {
        let src = "class Ä { void f() { ö(); } }";
        let s = &extract_methods(&file(src), &ExtractOptions::default()).unwrap()[0];
        let chars: Vec<char> = src.chars().collect();
        let slice: String = chars[s.start..s.end].iter().collect();
        assert_eq!(slice, s.text);
        assert_eq!(s.id, MethodSnippet::snippet_id("p", "p/A.java", s.start));
    }

    #[test]
    fn jsonl_record_shape() {
        let s = MethodSnippet {
            id: u64::MAX,
            project: "p".into(),
            path: "p/A.java".into(),
            start: 1,
            end: 5,
            text: "f(){}".into(),
        };
        let line = serde_json::to_string(&s).unwrap();
        assert_eq!(
            line,
            r#"{"id":"18446744073709551615","project":"p","path":"p/A.java","start":1,"end":5,"text":"f(){}"}"#
        );
        let back: MethodSnippet = serde_json::from_str(&line).unwrap();
        assert_eq!(back, s);
    }
}
