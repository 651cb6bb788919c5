//! One-file experiment configs: corpus → datasets → embeddings → probes →
//! report.
//!
//! ```toml
//! corpus = "java/"
//! out_dir = "runs/oracle"
//! seed = 42
//! tasks = ["LEN", "AST", "CPX", "TYP"]
//! size = 2000
//! label = "oracle"
//!
//! [embed]
//! backend = "oracle"
//! layers = 13
//! dim = 128
//!
//! [probe]
//! sizes = [100, 1000]
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Deserialize;

use crate::corpus::{build_corpus, write_snippets, ExtractOptions};
use crate::embedstore::{mock_embed, read_embeddings, write_embeddings, MockBackendKind};
use crate::error::{Error, Result};
use crate::manifest::RunManifest;
use crate::probe::{run_layerwise, run_sample_curve, ProbeConfig, ProbeResults};
use crate::report::{write_report, CellPolicy, Table};
use crate::tasks::{build_dataset, write_dataset, BuildOptions, TaskKind};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub out_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "all_tasks")]
    pub tasks: Vec<TaskKind>,
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default = "default_split")]
    pub split: f64,
    #[serde(default = "default_min_tokens")]
    pub min_tokens: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
    #[serde(default)]
    pub allow_missing_classes: bool,
    /// Row label for the report table; defaults to the backend name.
    pub label: Option<String>,
    #[serde(default = "default_cell")]
    pub cell: String,
    pub embed: EmbedConfig,
    #[serde(default)]
    pub probe: ProbeSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedConfig {
    /// `random`, `oracle`, `leak:<s>`, or `file` to read precomputed
    /// embeddings listed under `files`.
    pub backend: String,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Task name → CPEB path, for `backend = "file"`.
    #[serde(default)]
    pub files: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    /// Sample sizes for a sample-size run; a plain layer-wise run when absent.
    pub sizes: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub l2: Option<f64>,
    pub batch: Option<usize>,
    pub standardize: Option<bool>,
}

fn default_seed() -> u64 {
    42
}
fn all_tasks() -> Vec<TaskKind> {
    TaskKind::ALL.to_vec()
}
fn default_size() -> usize {
    BuildOptions::default().size_cap
}
fn default_split() -> f64 {
    BuildOptions::default().split_ratio
}
fn default_min_tokens() -> usize {
    ExtractOptions::default().min_tokens
}
fn default_max_tokens() -> usize {
    ExtractOptions::default().max_tokens
}
fn default_cell() -> String {
    CellPolicy::default().name().to_string()
}
fn default_layers() -> usize {
    13
}
fn default_dim() -> usize {
    768
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a config file and resolve its relative paths against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = PipelineConfig::parse(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.corpus = base.join(&cfg.corpus);
        cfg.out_dir = base.join(&cfg.out_dir);
        for p in cfg.embed.files.values_mut() {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn probe_config(&self) -> ProbeConfig {
        let d = ProbeConfig::default();
        ProbeConfig {
            l2_lambda: self.probe.l2.unwrap_or(d.l2_lambda),
            epochs: self.probe.epochs.unwrap_or(d.epochs),
            learning_rate: self.probe.lr.unwrap_or(d.learning_rate),
            batch: self.probe.batch,
            seed: self.seed,
            standardize: self.probe.standardize.unwrap_or(d.standardize),
            ..d
        }
    }

    fn cell_policy(&self) -> Result<CellPolicy> {
        self.cell.parse().map_err(Error::Config)
    }

    fn run_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.embed.backend.clone())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub results: ProbeResults,
    pub table: Table,
    /// Every data file written, in order (sidecar manifests excluded).
    pub outputs: Vec<PathBuf>,
}

enum Backend {
    Mock(MockBackendKind),
    File,
}

/// Run the whole chain described by `config`.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let policy = config.cell_policy()?;
    let backend = match config.embed.backend.as_str() {
        "file" => Backend::File,
        other => Backend::Mock(other.parse().map_err(Error::Config)?),
    };
    if config.tasks.is_empty() {
        return Err(Error::Config("no tasks selected".into()));
    }
    if !config.corpus.is_dir() {
        return Err(Error::CorpusRoot {
            path: config.corpus.clone(),
            reason: "not found or not a directory".into(),
        });
    }
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut outputs = Vec::new();
    let probe_cfg = config.probe_config();

    let extract = ExtractOptions { min_tokens: config.min_tokens, max_tokens: config.max_tokens };
    let corpus = build_corpus(&config.corpus, &extract)?;
    info!(
        "corpus: {} snippets from {} files ({} skipped)",
        corpus.snippets.len(),
        corpus.files_scanned,
        corpus.warnings.len()
    );
    let methods = out.join("methods.jsonl");
    write_snippets(&methods, &corpus.snippets)?;
    RunManifest::new("build-corpus")
        .flag("min-tokens", config.min_tokens)
        .flag("max-tokens", config.max_tokens)
        .note("snippets", corpus.snippets.len())
        .note("skipped_files", corpus.warnings.len())
        .input(&config.corpus)?
        .write_for(&methods)?;
    outputs.push(methods.clone());

    let mut results = ProbeResults::default();
    for &task in &config.tasks {
        let lower = task.name().to_ascii_lowercase();
        let options = BuildOptions {
            size_cap: config.size,
            seed: config.seed,
            split_ratio: config.split,
            allow_missing_classes: config.allow_missing_classes,
        };
        let dataset = build_dataset(task, &corpus.snippets, &options)?;
        let ds_path = out.join(format!("{lower}.jsonl"));
        write_dataset(&ds_path, &dataset)?;
        RunManifest::new("build-task")
            .flag("task", task)
            .flag("size", config.size)
            .flag("split", config.split)
            .flag("allow-missing-classes", config.allow_missing_classes)
            .seed(config.seed)
            .input(&methods)?
            .write_for(&ds_path)?;
        outputs.push(ds_path.clone());

        let (emb_path, embeddings) = match backend {
            Backend::Mock(kind) => {
                let set = mock_embed(kind, &dataset, config.embed.layers, config.embed.dim, config.seed)?;
                let path = out.join(format!("{lower}.cpeb"));
                write_embeddings(&set, &path)?;
                RunManifest::new("embed")
                    .flag("backend", kind)
                    .flag("layers", config.embed.layers)
                    .flag("dim", config.embed.dim)
                    .note("pooling", "none (mock backend)")
                    .seed(config.seed)
                    .input(&ds_path)?
                    .write_for(&path)?;
                outputs.push(path.clone());
                (path, set)
            }
            Backend::File => {
                let path = config.embed.files.get(task.name()).ok_or_else(|| {
                    Error::Config(format!("no embedding file configured for {task}"))
                })?;
                (path.clone(), read_embeddings(path, Some(&dataset))?)
            }
        };

        let task_results = match &config.probe.sizes {
            Some(sizes) => run_sample_curve(&dataset, &embeddings, sizes, &probe_cfg)?,
            None => run_layerwise(&dataset, &embeddings, &probe_cfg)?,
        };
        let res_path = out.join(format!("{lower}.results.csv"));
        task_results.write_csv(&res_path)?;
        let mut m = RunManifest::new("probe")
            .flag("layers", "all")
            .flag("epochs", probe_cfg.epochs)
            .flag("lr", probe_cfg.learning_rate)
            .flag("l2", probe_cfg.l2_lambda)
            .seed(config.seed)
            .input(&ds_path)?
            .input(&emb_path)?;
        if let Some(sizes) = &config.probe.sizes {
            m = m.flag("sizes", join(sizes));
        }
        let pooling = crate::manifest::sidecar_value(&emb_path, "pooling")
            .unwrap_or_else(|| "unrecorded".into());
        m.note("pooling", pooling).write_for(&res_path)?;
        outputs.push(res_path);
        results.extend(task_results);
    }

    let combined = out.join("results.csv");
    results.write_csv(&combined)?;
    outputs.push(combined.clone());

    let report_dir = out.join("report");
    let label = config.run_label();
    let runs = [results];
    let written = write_report(&report_dir, &runs, std::slice::from_ref(&label), policy)?;
    RunManifest::new("report")
        .flag("labels", &label)
        .flag("cell", policy.name())
        .input(&combined)?
        .write_for(&report_dir.join("report"))?;
    outputs.extend(written);
    let [results] = runs;
    let table = crate::report::emit_table(std::slice::from_ref(&results), &[label], policy)?;
    Ok(PipelineOutcome { results, table, outputs })
}

fn join(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}
