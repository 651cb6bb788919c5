//! Construction of the four class-balanced probing datasets.
//!
//! * `LEN`: five length bins over the non-comment token count.
//! * `AST`: the tag of one token inside a method (up to three tokens per
//!   method, each with a different tag, rarest tags first).
//! * `CPX`: cyclomatic complexity 0-9; more complex methods are dropped.
//! * `TYP`: label 1 for an unmodified method that uses a primitive type,
//!   label 0 for a copy with one primitive type keyword misspelled. Each
//!   method contributes exactly one of the two variants.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{snippets_to_jsonl, MethodSnippet};
use crate::error::{Error, Result};
use crate::hash::{fnv1a, fnv1a_parts, mix_words, sha256_hex};
use crate::syntax::{self, AstTag};

pub const DEFAULT_SIZE_CAP: usize = 10_000;
pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;
pub const MAX_AST_PER_SNIPPET: usize = 3;
pub const MAX_COMPLEXITY: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "LEN")]
    Len,
    #[serde(rename = "AST")]
    Ast,
    #[serde(rename = "CPX")]
    Cpx,
    #[serde(rename = "TYP")]
    Typ,
}

impl TaskKind {
    /// Table column order.
    pub const ALL: [TaskKind; 4] = [TaskKind::Len, TaskKind::Ast, TaskKind::Cpx, TaskKind::Typ];

    pub fn class_count(self) -> usize {
        match self {
            TaskKind::Len => 5,
            TaskKind::Ast => AstTag::COUNT,
            TaskKind::Cpx => MAX_COMPLEXITY as usize + 1,
            TaskKind::Typ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Len => "LEN",
            TaskKind::Ast => "AST",
            TaskKind::Cpx => "CPX",
            TaskKind::Typ => "TYP",
        }
    }

    /// Accuracy of uniform guessing on a balanced dataset of this task.
    pub fn naive_baseline(self) -> f64 {
        1.0 / self.class_count() as f64
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "LEN" => Ok(TaskKind::Len),
            "AST" => Ok(TaskKind::Ast),
            "CPX" => Ok(TaskKind::Cpx),
            "TYP" => Ok(TaskKind::Typ),
            _ => Err(format!("unknown task {s:?} (expected len, ast, cpx or typ)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbingInstance {
    pub instance_id: u64,
    pub snippet_id: u64,
    pub text: String,
    /// Character span of the tagged token (AST only).
    pub focus_span: Option<(usize, usize)>,
    pub label: u32,
    pub split: Split,
}

/// First line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub manifest: bool,
    pub task: TaskKind,
    pub classes: usize,
    pub seed: u64,
    pub count: usize,
    pub corpus_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Original class codes of the dense labels when missing classes were
    /// dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_map: Option<Vec<u32>>,
}

impl DatasetManifest {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// FNV-1a of the manifest line; binds embedding files to this dataset.
    pub fn hash(&self) -> u64 {
        fnv1a(self.to_line().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task: TaskKind,
    pub instances: Vec<ProbingInstance>,
    pub class_count: usize,
    pub seed: u64,
    pub manifest: DatasetManifest,
}

impl TaskDataset {
    pub fn labels(&self) -> Vec<u32> {
        self.instances.iter().map(|i| i.label).collect()
    }

    pub fn instance_ids(&self) -> Vec<u64> {
        self.instances.iter().map(|i| i.instance_id).collect()
    }

    /// Row indices of the given split, in dataset order.
    pub fn split_indices(&self, split: Split) -> Vec<usize> {
        (0..self.instances.len()).filter(|&i| self.instances[i].split == split).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for inst in &self.instances {
            counts[inst.label as usize] += 1;
        }
        counts
    }

    /// Fraction of instances in the training split.
    pub fn train_fraction(&self) -> f64 {
        if self.instances.is_empty() {
            return 0.0;
        }
        self.split_indices(Split::Train).len() as f64 / self.instances.len() as f64
    }

    pub fn manifest_hash(&self) -> u64 {
        self.manifest.hash()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub size_cap: usize,
    pub seed: u64,
    pub split_ratio: f64,
    pub allow_missing_classes: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            size_cap: DEFAULT_SIZE_CAP,
            seed: 42,
            split_ratio: DEFAULT_SPLIT_RATIO,
            allow_missing_classes: false,
        }
    }
}

/// Length bin of a token count: `[0,50) → 0`, `[50,100) → 1`, …, `[200,∞) → 4`.
pub fn bin_length(token_count: usize) -> u32 {
    (token_count / 50).min(4) as u32
}

pub fn naive_baseline(dataset: &TaskDataset) -> f64 {
    1.0 / dataset.class_count as f64
}

/// A labeled candidate before balancing.
#[derive(Debug, Clone)]
struct Candidate {
    snippet_id: u64,
    text: String,
    focus: Option<(usize, usize)>,
    label: u32,
}

pub fn build_dataset(
    task: TaskKind,
    snippets: &[MethodSnippet],
    options: &BuildOptions,
) -> Result<TaskDataset> {
    if snippets.is_empty() {
        return Err(Error::Dataset("no input snippets".into()));
    }
    if !(options.split_ratio > 0.0 && options.split_ratio < 1.0) {
        return Err(Error::Dataset(format!(
            "split ratio must be in (0, 1), got {}",
            options.split_ratio
        )));
    }
    let nominal_classes = task.class_count();
    if options.size_cap < nominal_classes {
        return Err(Error::Dataset(format!(
            "size cap {} is smaller than the class count {nominal_classes}",
            options.size_cap
        )));
    }

    let candidates = label_candidates(task, snippets, options.seed);
    let mut by_class: Vec<Vec<Candidate>> = vec![Vec::new(); nominal_classes];
    for c in candidates {
        by_class[c.label as usize].push(c);
    }
    if task == TaskKind::Typ && by_class.iter().all(Vec::is_empty) {
        // no method uses a primitive type, so there is nothing to keep valid
        return Err(Error::EmptyClass { task: task.name().into(), class: 1 });
    }

    let populated: Vec<u32> =
        (0..nominal_classes as u32).filter(|&c| !by_class[c as usize].is_empty()).collect();
    let mut note = (task == TaskKind::Len)
        .then(|| "length counts lexer tokens, excluding comments".to_string());
    let mut label_map = None;
    if populated.len() < nominal_classes {
        let missing = (0..nominal_classes as u32).find(|c| !populated.contains(c)).unwrap();
        if !options.allow_missing_classes {
            return Err(Error::EmptyClass { task: task.name().into(), class: missing });
        }
        if populated.len() < 2 {
            return Err(Error::Dataset(format!(
                "{task}: only {} class(es) populated",
                populated.len()
            )));
        }
        let dropped: Vec<String> = (0..nominal_classes as u32)
            .filter(|c| !populated.contains(c))
            .map(|c| c.to_string())
            .collect();
        warn!("{task}: classes {} are empty and were dropped", dropped.join(","));
        let msg = format!(
            "classes {} empty; labels remapped densely, see label_map",
            dropped.join(",")
        );
        note = Some(match note {
            Some(n) => format!("{n}; {msg}"),
            None => msg,
        });
        by_class = populated.iter().map(|&c| std::mem::take(&mut by_class[c as usize])).collect();
        for (dense, class) in by_class.iter_mut().enumerate() {
            for c in class.iter_mut() {
                c.label = dense as u32;
            }
        }
        label_map = Some(populated.clone());
    }
    let class_count = by_class.len();

    let per_class = by_class.iter().map(Vec::len).min().unwrap().min(options.size_cap / class_count);
    if per_class * class_count < class_count {
        return Err(Error::Dataset(format!(
            "{task}: total {} is smaller than the class count {class_count}",
            per_class * class_count
        )));
    }

    let mut instances = Vec::with_capacity(per_class * class_count);
    for (label, mut pool) in by_class.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_words(&[options.seed, label as u64, 0x5a4d]));
        pool.shuffle(&mut rng);
        pool.truncate(per_class);
        let n_train = (per_class as f64 * options.split_ratio).round() as usize;
        for (i, c) in pool.into_iter().enumerate() {
            let focus_key = c.focus.map(|f| f.0.to_string()).unwrap_or_else(|| "-".into());
            instances.push(ProbingInstance {
                instance_id: fnv1a_parts(&[
                    task.name().as_bytes(),
                    c.snippet_id.to_string().as_bytes(),
                    focus_key.as_bytes(),
                ]),
                snippet_id: c.snippet_id,
                text: c.text,
                focus_span: c.focus,
                label: c.label,
                split: if i < n_train { Split::Train } else { Split::Test },
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_words(&[options.seed, 0x5e7f1e]));
    instances.shuffle(&mut rng);
    info!("{task}: {per_class} per class, {} instances", instances.len());

    let manifest = DatasetManifest {
        manifest: true,
        task,
        classes: class_count,
        seed: options.seed,
        count: instances.len(),
        corpus_sha256: sha256_hex(snippets_to_jsonl(snippets).as_bytes()),
        note,
        label_map,
    };
    Ok(TaskDataset { task, instances, class_count, seed: options.seed, manifest })
}

/// Label every snippet independently (parallel, order preserving).
fn label_candidates(task: TaskKind, snippets: &[MethodSnippet], seed: u64) -> Vec<Candidate> {
    let per_snippet: Vec<Vec<Candidate>> = match task {
        TaskKind::Len => snippets.par_iter().map(label_len).collect(),
        TaskKind::Cpx => snippets.par_iter().map(label_cpx).collect(),
        TaskKind::Typ => snippets.par_iter().map(|s| label_typ(s, seed)).collect(),
        TaskKind::Ast => return label_ast(snippets, seed),
    };
    per_snippet.into_iter().flatten().collect()
}

fn label_len(s: &MethodSnippet) -> Vec<Candidate> {
    match syntax::lex(&s.text) {
        Ok(tokens) => vec![Candidate {
            snippet_id: s.id,
            text: s.text.clone(),
            focus: None,
            label: bin_length(syntax::code_token_count(&tokens)),
        }],
        Err(e) => {
            warn!("LEN: dropping snippet {}: {e}", s.id);
            Vec::new()
        }
    }
}

fn label_cpx(s: &MethodSnippet) -> Vec<Candidate> {
    match syntax::analyze(&s.text) {
        Ok((_, tree)) => {
            let c = syntax::cyclomatic(&tree);
            if c > MAX_COMPLEXITY {
                return Vec::new();
            }
            vec![Candidate { snippet_id: s.id, text: s.text.clone(), focus: None, label: c }]
        }
        Err(e) => {
            warn!("CPX: dropping snippet {}: {e}", s.id);
            Vec::new()
        }
    }
}

fn snippet_rng(seed: u64, snippet_id: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_words(&[seed, snippet_id, salt]))
}

fn label_typ(s: &MethodSnippet, seed: u64) -> Vec<Candidate> {
    let mut rng = snippet_rng(seed, s.id, 0x7f9);
    let keep_original = rng.random_bool(0.5);
    let perturb_seed = rng.random::<u64>();
    match syntax::perturb_primitive_type(&s.text, perturb_seed) {
        Ok(Some((mutated, _))) => {
            let (text, label) = if keep_original { (s.text.clone(), 1) } else { (mutated, 0) };
            vec![Candidate { snippet_id: s.id, text, focus: None, label }]
        }
        Ok(None) => Vec::new(),
        Err(e) => {
            warn!("TYP: dropping snippet {}: {e}", s.id);
            Vec::new()
        }
    }
}

/// Per snippet, the candidate (token char span, tag) pairs grouped by tag.
type TagGroups = BTreeMap<AstTag, Vec<(usize, usize)>>;

fn label_ast(snippets: &[MethodSnippet], seed: u64) -> Vec<Candidate> {
    let groups: Vec<Option<TagGroups>> = snippets
        .par_iter()
        .map(|s| match syntax::analyze(&s.text) {
            Ok((tokens, tree)) => {
                let chars = char_index(&s.text);
                let mut g = TagGroups::new();
                for (i, tag) in syntax::ast_tag_tokens(&tree) {
                    let span = &tokens[i].span;
                    g.entry(tag).or_default().push((chars(span.start), chars(span.end)));
                }
                Some(g)
            }
            Err(e) => {
                warn!("AST: dropping snippet {}: {e}", s.id);
                None
            }
        })
        .collect();

    // How many methods contain each tag; rarer tags are preferred so that the
    // balanced dataset can be as large as possible.
    let mut frequency: BTreeMap<AstTag, usize> = BTreeMap::new();
    for g in groups.iter().flatten() {
        for tag in g.keys() {
            *frequency.entry(*tag).or_default() += 1;
        }
    }

    let mut out = Vec::new();
    for (s, g) in snippets.iter().zip(groups) {
        let Some(g) = g else { continue };
        let mut rng = snippet_rng(seed, s.id, 0xa57);
        let mut tags: Vec<AstTag> = g.keys().copied().collect();
        tags.shuffle(&mut rng);
        tags.sort_by_key(|t| frequency[t]); // stable: ties keep the shuffled order
        for tag in tags.into_iter().take(MAX_AST_PER_SNIPPET) {
            let spans = &g[&tag];
            let focus = spans[rng.random_range(0..spans.len())];
            out.push(Candidate {
                snippet_id: s.id,
                text: s.text.clone(),
                focus: Some(focus),
                label: tag.code(),
            });
        }
    }
    out
}

/// Map byte offsets of `text` to char offsets.
fn char_index(text: &str) -> impl Fn(usize) -> usize + '_ {
    move |byte| text[..byte].chars().count()
}

// ---- file format -------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    iid: u64,
    sid: u64,
    task: TaskKind,
    label: u32,
    split: Split,
    text: String,
    focus: Option<[usize; 2]>,
}

pub fn dataset_to_jsonl(dataset: &TaskDataset) -> String {
    let mut out = dataset.manifest.to_line();
    out.push('\n');
    for inst in &dataset.instances {
        let rec = InstanceRecord {
            iid: inst.instance_id,
            sid: inst.snippet_id,
            task: dataset.task,
            label: inst.label,
            split: inst.split,
            text: inst.text.clone(),
            focus: inst.focus_span.map(|(a, b)| [a, b]),
        };
        out.push_str(&serde_json::to_string(&rec).expect("instance serializes"));
        out.push('\n');
    }
    out
}

pub fn write_dataset(path: &Path, dataset: &TaskDataset) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(dataset_to_jsonl(dataset).as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<TaskDataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty dataset file".into()))?;
    let first = first.map_err(|e| Error::io(path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&first).map_err(|e| parse_err(1, e.to_string()))?;
    if !manifest.manifest {
        return Err(parse_err(1, "first line is not a manifest".into()));
    }
    if manifest.to_line() != first {
        return Err(parse_err(1, "manifest line is not in canonical form".into()));
    }

    let mut instances = Vec::with_capacity(manifest.count);
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceRecord =
            serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        if rec.task != manifest.task {
            return Err(parse_err(i + 1, format!("task {} in a {} dataset", rec.task, manifest.task)));
        }
        if rec.label as usize >= manifest.classes {
            return Err(parse_err(i + 1, format!("label {} out of range", rec.label)));
        }
        if rec.focus.is_some() != (manifest.task == TaskKind::Ast) {
            return Err(parse_err(i + 1, "focus must be present exactly for AST".into()));
        }
        instances.push(ProbingInstance {
            instance_id: rec.iid,
            snippet_id: rec.sid,
            text: rec.text,
            focus_span: rec.focus.map(|[a, b]| (a, b)),
            label: rec.label,
            split: rec.split,
        });
    }
    if instances.len() != manifest.count {
        return Err(Error::Dataset(format!(
            "{}: manifest declares {} instances, found {}",
            path.display(),
            manifest.count,
            instances.len()
        )));
    }
    Ok(TaskDataset {
        task: manifest.task,
        instances,
        class_count: manifest.classes,
        seed: manifest.seed,
        manifest,
    })
}
