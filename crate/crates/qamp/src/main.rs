use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qamp::{dataset, harness, io, synth};
use qamp_core::catalog::MatchLimits;
use qamp_core::eval::{AblationSetup, EvalMode};
use qamp_core::inference::answer_question;
use qamp_core::{Engine, GraphConfig, InferenceConfig, InterpretedQuestion, NormMode};

/// Message-passing question answering over knowledge graphs.
#[derive(Parser)]
#[command(name = "qamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a graph (and optional word vectors) and write an index directory.
    Build {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        label_property: Option<String>,
        #[arg(long)]
        type_property: Option<String>,
    },
    /// Answer one question and print the scored answer as JSON.
    Ask {
        #[arg(long)]
        index: PathBuf,
        #[command(flatten)]
        inference: InferenceArgs,
        /// Answer a pre-matched question (JSON) instead of parsing text.
        #[arg(long, conflicts_with = "question")]
        interpretation: Option<PathBuf>,
        #[arg(required_unless_present = "interpretation")]
        question: Option<String>,
    },
    /// Evaluate a dataset and write a report.
    Eval {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "auto", value_parser = parse_mode)]
        mode: EvalMode,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        inference: InferenceArgs,
    },
    /// Evaluate a dataset under one of the ablation presets.
    Ablate {
        #[arg(long, value_parser = parse_setup)]
        setup: AblationSetup,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        inference: InferenceArgs,
    },
    /// Write a synthetic graph (graph.nt) and dataset (dataset.json).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        triples: usize,
        #[arg(long, default_value_t = 30)]
        questions: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct InferenceArgs {
    /// Minimum answer score.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value = "alg1", value_parser = parse_norm)]
    norm: NormMode,
    /// Do not filter answers by the question's classes.
    #[arg(long)]
    no_classes: bool,
    #[arg(long, default_value_t = 500)]
    top_entities: usize,
    #[arg(long, default_value_t = 50)]
    top_properties: usize,
}

impl InferenceArgs {
    fn config(&self) -> Result<InferenceConfig> {
        let cfg = InferenceConfig {
            threshold: self.threshold,
            norm_mode: self.norm,
            apply_class_filter: !self.no_classes,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn limits(&self) -> MatchLimits {
        MatchLimits {
            entities: self.top_entities,
            properties: self.top_properties,
        }
    }
}

fn parse_norm(s: &str) -> Result<NormMode, String> {
    s.parse().map_err(|e: qamp_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<EvalMode, String> {
    s.parse().map_err(|e: qamp_core::Error| e.to_string())
}

fn parse_setup(s: &str) -> Result<AblationSetup, String> {
    s.parse().map_err(|e: qamp_core::Error| e.to_string())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build {
            graph,
            vectors,
            out,
            label_property,
            type_property,
        } => {
            let mut config = GraphConfig::default();
            if let Some(p) = label_property {
                config.label_property = p;
            }
            if let Some(p) = type_property {
                config.type_property = p;
            }
            let kg = io::read_graph(&graph, config)?;
            let vectors = vectors.as_deref().map(io::read_vectors).transpose()?;
            let engine = Engine::new(kg, vectors)?;
            io::save_index(&out, &engine)?;
            print_json(&engine.graph.stats())
        }
        Command::Ask {
            index,
            inference,
            interpretation,
            question,
        } => {
            let engine = io::load_index(&index)?;
            let cfg = inference.config()?;
            let answer = match (interpretation, question) {
                (Some(path), _) => {
                    let iq: InterpretedQuestion = io::read_json(&path)?;
                    answer_question(&engine.graph, &iq, &cfg)?
                }
                (None, Some(q)) => engine.ask(&q, inference.limits(), &cfg)?,
                (None, None) => unreachable!("clap requires a question or an interpretation"),
            };
            print_json(&answer)
        }
        Command::Eval {
            index,
            dataset,
            mode,
            report,
            inference,
        } => {
            let engine = io::load_index(&index)?;
            let records = dataset::load_dataset(&dataset)?;
            let rep = harness::evaluate(
                &records,
                &engine,
                &inference.config()?,
                mode,
                inference.limits(),
            )?;
            io::write_json(&report, &rep)?;
            print_json(&rep.macro_scores)
        }
        Command::Ablate {
            setup,
            index,
            dataset,
            report,
            inference,
        } => {
            let engine = io::load_index(&index)?;
            let records = dataset::load_dataset(&dataset)?;
            let rep = harness::run_ablation(
                setup,
                &records,
                &engine,
                &inference.config()?,
                inference.limits(),
            )?;
            io::write_json(&report, &rep)?;
            print_json(&rep.macro_scores)
        }
        Command::Synth {
            out,
            triples,
            questions,
            seed,
        } => {
            let data = synth::generate(&synth::SynthConfig::for_triples(triples, questions, seed))?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(out.join("graph.nt"), data.ntriples())?;
            io::write_json(&out.join("dataset.json"), &data.records)?;
            println!(
                "{} triples, {} questions",
                data.triple_count(),
                data.records.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
