use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use log::{info, warn};

use codeprobe_core::corpus::{build_corpus, read_snippets, write_snippets, ExtractOptions};
use codeprobe_core::embedstore::{mock_embed, read_embeddings, write_embeddings, MockBackendKind};
use codeprobe_core::manifest::{sidecar_value, RunManifest};
use codeprobe_core::pipeline::{run_pipeline, PipelineConfig};
use codeprobe_core::probe::{run_layers, run_sample_curve_layers, ProbeConfig, ProbeResults};
use codeprobe_core::report::{write_report, CellPolicy};
use codeprobe_core::syntax::{analyze, ast_tag_tokens, code_token_count, cyclomatic};
use codeprobe_core::tasks::{bin_length, build_dataset, read_dataset, write_dataset, BuildOptions, TaskKind};
use codeprobe_core::{Error, Result};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "codeprobe", version, about = "Probing tasks for pre-trained code models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract Java methods from a source tree into a JSONL corpus
    BuildCorpus {
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        min_tokens: usize,
        #[arg(long, default_value_t = 2048)]
        max_tokens: usize,
    },
    /// Build a balanced probing dataset for one task
    BuildTask {
        #[arg(long)]
        task: TaskKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        split: f64,
        /// Drop empty classes instead of failing
        #[arg(long)]
        allow_missing_classes: bool,
    },
    /// Write mock embeddings for a dataset (random, oracle or leak:<s>)
    Embed {
        #[arg(long)]
        backend: MockBackendKind,
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 13)]
        layers: usize,
        #[arg(long, default_value_t = 768)]
        dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train linear probes per layer, optionally across sample sizes
    Probe {
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        emb: PathBuf,
        /// `all`, a range `A..B` (exclusive) or `A..=B`, or a list `0,3,12`
        #[arg(long, default_value = "all")]
        layers: String,
        /// Comma-separated sample sizes, e.g. 100,1000,10000
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        l2: f64,
        /// Mini-batch size; full-batch when omitted
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        no_standardize: bool,
    },
    /// Render tables and charts from results CSV files
    Report {
        #[arg(long, value_delimiter = ',', required = true)]
        results: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        #[arg(long)]
        out_dir: PathBuf,
        /// best-layer or last-layer
        #[arg(long, default_value = "best-layer")]
        cell: CellPolicy,
    },
    /// Print tokens, AST tags and complexity of one method
    Inspect {
        #[arg(long)]
        snippet: PathBuf,
    },
    /// Run the whole chain from a TOML config
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(EXIT_USAGE);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var("CODEPROBE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CODEPROBE_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::BuildCorpus { root, out, min_tokens, max_tokens } => {
            let build = build_corpus(&root, &ExtractOptions { min_tokens, max_tokens })?;
            write_snippets(&out, &build.snippets)?;
            RunManifest::new("build-corpus")
                .flag("min-tokens", min_tokens)
                .flag("max-tokens", max_tokens)
                .note("snippets", build.snippets.len())
                .note("skipped_files", build.warnings.len())
                .note("skipped_non_utf8", build.skipped_non_utf8)
                .input(&root)?
                .write_for(&out)?;
            info!(
                "{} methods from {} files ({} files skipped)",
                build.snippets.len(),
                build.files_scanned,
                build.warnings.len() + build.skipped_non_utf8
            );
        }
        Command::BuildTask { task, input, out, size, seed, split, allow_missing_classes } => {
            let snippets = read_snippets(&input)?;
            let options = BuildOptions { size_cap: size, seed, split_ratio: split, allow_missing_classes };
            let dataset = build_dataset(task, &snippets, &options)?;
            write_dataset(&out, &dataset)?;
            RunManifest::new("build-task")
                .flag("task", task)
                .flag("size", size)
                .flag("split", split)
                .flag("allow-missing-classes", allow_missing_classes)
                .seed(seed)
                .input(&input)?
                .write_for(&out)?;
        }
        Command::Embed { backend, task, layers, dim, seed, out } => {
            let dataset = read_dataset(&task)?;
            let set = mock_embed(backend, &dataset, layers, dim, seed)?;
            write_embeddings(&set, &out)?;
            RunManifest::new("embed")
                .flag("backend", backend)
                .flag("layers", layers)
                .flag("dim", dim)
                .note("pooling", "none (mock backend)")
                .seed(seed)
                .input(&task)?
                .write_for(&out)?;
        }
        Command::Probe { task, emb, layers, sizes, seed, out, epochs, lr, l2, batch, no_standardize } => {
            let dataset = read_dataset(&task)?;
            let embeddings = read_embeddings(&emb, Some(&dataset))?;
            let selected = parse_layers(&layers, embeddings.n_layers)?;
            let config = ProbeConfig {
                l2_lambda: l2,
                epochs,
                learning_rate: lr,
                batch,
                seed,
                standardize: !no_standardize,
                ..ProbeConfig::default()
            };
            let results = match &sizes {
                Some(sizes) => run_sample_curve_layers(&dataset, &embeddings, &selected, sizes, &config)?,
                None => run_layers(&dataset, &embeddings, &selected, &config)?,
            };
            results.write_csv(&out)?;
            let mut m = RunManifest::new("probe")
                .flag("layers", &layers)
                .flag("epochs", epochs)
                .flag("lr", lr)
                .flag("l2", l2)
                .flag("standardize", !no_standardize)
                .seed(seed)
                .input(&task)?
                .input(&emb)?;
            if let Some(sizes) = &sizes {
                m = m.flag("sizes", sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
            }
            if let Some(b) = batch {
                m = m.flag("batch", b);
            }
            let pooling = sidecar_value(&emb, "pooling").unwrap_or_else(|| "unrecorded".into());
            m.note("pooling", pooling).write_for(&out)?;
        }
        Command::Report { results, labels, out_dir, cell } => {
            let labels = match labels {
                Some(l) if l.len() != results.len() => {
                    return Err(Error::Report(format!(
                        "{} results files but {} labels",
                        results.len(),
                        l.len()
                    )))
                }
                Some(l) => l,
                None => results.iter().map(|p| default_label(p)).collect(),
            };
            let runs = results.iter().map(|p| ProbeResults::read_csv(p)).collect::<Result<Vec<_>>>()?;
            let written = write_report(&out_dir, &runs, &labels, cell)?;
            let mut m = RunManifest::new("report").flag("labels", labels.join(",")).flag("cell", cell.name());
            for p in &results {
                m = m.input(p)?;
            }
            m.write_for(&out_dir.join("report"))?;
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Inspect { snippet } => {
            let text = fs::read_to_string(&snippet).map_err(|e| Error::io(&snippet, e))?;
            print!("{}", inspect(&text)?);
        }
        Command::Pipeline { config } => {
            let cfg = PipelineConfig::load(&config)?;
            let outcome = run_pipeline(&cfg)?;
            print!("{}", outcome.table.markdown);
        }
    }
    Ok(())
}

fn default_label(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    name.strip_suffix(".csv").unwrap_or(&name).to_string()
}

fn parse_layers(spec: &str, n_layers: usize) -> Result<Vec<usize>> {
    let bad = || Error::Probe(format!("bad layer selection {spec:?} for {n_layers} layers"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let layers: Vec<usize> = if spec == "all" {
        (0..n_layers).collect()
    } else if let Some((a, b)) = spec.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = spec.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    if layers.is_empty() || layers.iter().any(|&l| l >= n_layers) {
        return Err(bad());
    }
    if layers.len() < n_layers && spec != "all" {
        warn!("probing {} of {} layers", layers.len(), n_layers);
    }
    Ok(layers)
}

fn inspect(text: &str) -> Result<String> {
    use std::fmt::Write as _;
    let (tokens, tree) = analyze(text)?;
    let tags: std::collections::HashMap<usize, _> = ast_tag_tokens(&tree).into_iter().collect();
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let tag = tags.get(&i).map(|t| t.name()).unwrap_or("-");
        let _ = writeln!(out, "{i:>5}  {:<14} {:<24} {tag}", format!("{:?}", t.kind), t.text.replace('\n', "\\n"));
    }
    let count = code_token_count(&tokens);
    let _ = writeln!(out, "tokens: {count} (length bin {})", bin_length(count));
    let _ = writeln!(out, "cyclomatic: {}", cyclomatic(&tree));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_selection() {
        assert_eq!(parse_layers("all", 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_layers("1..3", 13).unwrap(), vec![1, 2]);
        assert_eq!(parse_layers("1..=3", 13).unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_layers("0,12", 13).unwrap(), vec![0, 12]);
        assert!(parse_layers("0..14", 13).is_err());
        assert!(parse_layers("3..3", 13).is_err());
        assert!(parse_layers("x", 13).is_err());
    }

    #[test]
    fn inspect_reports_complexity() {
        let out = inspect("void f(int a) { if (a > 0 && a < 9) { g(); } }").unwrap();
        assert!(out.contains("cyclomatic: 2"), "{out}");
        assert!(out.contains("IfStatement"));
    }

    #[test]
    fn labels_default_to_file_stem() {
        assert_eq!(default_label(Path::new("runs/bert.csv")), "bert");
    }
}
