//! Command implementations. Each returns a core `Result`; `main` maps
//! validation failures to exit code 2 and internal failures to 1.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use hoplink_core::hopfield::WeightState;
use hoplink_core::io;
use hoplink_core::mapreduce::{self, JobSpec, ShardRecord};
use hoplink_core::metrics::StageReport;
use hoplink_core::pattern::BipolarPattern;
use hoplink_core::synthgen::{self, GenSpec};
use hoplink_core::{Error, Result};

use crate::args::{
    EvaluateArgs, ForgettingArgs, GenerateArgs, OutputFormat, RecallArgs, TrainArgs,
};
use crate::experiment::{self, ExperimentConfig, ExperimentOutcome};
use crate::manifest::Manifest;

/// Global flags every command sees.
pub struct Ctx {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Ctx {
    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

pub fn cmd_generate(ctx: &Ctx, args: &GenerateArgs) -> Result<()> {
    let cliques = args
        .cliques
        .iter()
        .map(|spec| {
            spec.split(',')
                .map(|label| io::parse_label(label, args.k))
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = GenSpec {
        k: args.k,
        p: args.p,
        cliques,
        count_range: (args.count_min, args.count_max),
        background_rate: args.background_rate,
        noise_flip_prob: args.noise_flip_prob,
        seed: ctx.seed,
    };
    if args.shards < 1 {
        return Err(Error::spec("need at least one shard file"));
    }
    let matrices = synthgen::generate_patterns(&spec)?;
    let records: Vec<ShardRecord> = matrices.into_iter().map(ShardRecord::usage).collect();

    let dir = ctx.out_or("hoplink-out");
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new("generate", ctx.seed);
    let shard_count = args.shards.min(records.len()).max(1);
    for (id, chunk) in chunks(&records, shard_count).into_iter().enumerate() {
        let name = format!("shard-{id}.jsonl");
        io::write_shard_file(&dir.join(&name), chunk)?;
        manifest.add_file(&dir, &name, chunk.len())?;
    }
    manifest.write(&dir)?;
    println!(
        "generated {} usage pattern(s) over k={} into {} shard file(s) under {}",
        args.p,
        args.k,
        shard_count,
        dir.display()
    );
    Ok(())
}

/// Contiguous near-equal split of `records` into `parts` slices.
fn chunks<T>(records: &[T], parts: usize) -> Vec<&[T]> {
    let base = records.len() / parts;
    let extra = records.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for idx in 0..parts {
        let len = base + usize::from(idx < extra);
        out.push(&records[start..start + len]);
        start += len;
    }
    out
}

/// Expand input paths: directories contribute their `.jsonl` and `.csv`
/// entries in name order.
fn collect_input_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(input)?
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .map(|e| e.path())
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("jsonl") | Some("csv")
                    )
                })
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn read_records(files: &[PathBuf]) -> Result<Vec<ShardRecord>> {
    let mut records = Vec::new();
    for file in files {
        match file.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let (matrix, _labels, report) = io::read_usage_csv(file)?;
                if !report.is_clean() {
                    eprintln!(
                        "warning: {}: healed {} asymmetric and {} diagonal cell(s)",
                        file.display(),
                        report.asymmetric_cells,
                        report.nonzero_diagonal_cells
                    );
                }
                records.push(ShardRecord::usage(matrix));
            }
            _ => records.extend(io::read_shard_file(file)?),
        }
    }
    Ok(records)
}

pub fn cmd_train(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let spec = match &args.job {
        Some(path) => io::read_job_spec(path)?,
        None => JobSpec {
            version: JobSpec::VERSION,
            rule: args.rule.into(),
            oja_rate: args.oja_rate,
            threshold: args.threshold.to_spec(),
            recall: args.recall.to_config(ctx.seed),
            shard_count: args.shards,
            shards: collect_input_files(&args.inputs)?,
            test_patterns: args.test_patterns.clone(),
        },
    };
    spec.validate()?;
    if spec.shards.is_empty() {
        return Err(Error::degenerate("no input files; nothing to train"));
    }

    let records = read_records(&spec.shards)?;
    let state = mapreduce::run_training(records, &spec)?;
    let out = ctx.out_or("weights.json");
    io::write_weights(&out, &state)?;
    println!(
        "trained {} pattern(s) into {} neurons ({:?}) -> {}",
        state.pattern_count(),
        state.size(),
        state.rule(),
        out.display()
    );

    if !spec.test_patterns.is_empty() {
        let predictions = predict_to_file(&state, &spec, &out)?;
        println!(
            "wrote {predictions} prediction(s) -> {}.predictions.jsonl",
            out.display()
        );
    }
    Ok(())
}

fn predict_to_file(state: &WeightState, spec: &JobSpec, weights_out: &Path) -> Result<usize> {
    let mut ks = Vec::new();
    let mut probes = Vec::new();
    for path in &spec.test_patterns {
        let (k, pattern) = io::read_pattern_file(path)?;
        if pattern.len() != state.size() {
            return Err(Error::dimension(format!(
                "{}: probe length {} does not match network size {}",
                path.display(),
                pattern.len(),
                state.size()
            )));
        }
        ks.push(k);
        probes.push(pattern);
    }
    let outcomes = mapreduce::predict(state, &probes, &spec.recall)?;
    let mut lines = Vec::new();
    for (k, outcome) in ks.iter().zip(&outcomes) {
        #[derive(Serialize)]
        struct PredictionLine<'a> {
            version: u32,
            k: usize,
            bits: &'a [i8],
            sweeps_used: usize,
            converged: bool,
        }
        let line = PredictionLine {
            version: io::RECALL_RESULT_VERSION,
            k: *k,
            bits: outcome.pattern.bits(),
            sweeps_used: outcome.sweeps,
            converged: outcome.converged,
        };
        lines.push(
            serde_json::to_string(&line).map_err(|e| Error::format("prediction", e.to_string()))?,
        );
    }
    let path = PathBuf::from(format!("{}.predictions.jsonl", weights_out.display()));
    fs::write(path, lines.join("\n") + "\n")?;
    Ok(outcomes.len())
}

pub fn cmd_recall(ctx: &Ctx, args: &RecallArgs) -> Result<()> {
    let state = io::read_weights(&args.weights)?;
    let (k, probe) = io::read_pattern_file(&args.probe)?;
    if probe.len() != state.size() {
        return Err(Error::dimension(format!(
            "probe length {} does not match network size {}",
            probe.len(),
            state.size()
        )));
    }
    let config = args.recall.to_config(ctx.seed);
    let outcome = state.recall(&probe, &config)?;
    let out = ctx.out_or("result.json");
    io::write_recall_result(&out, k, &outcome)?;
    println!(
        "recall {} after {} sweep(s) -> {}",
        if outcome.converged {
            "converged"
        } else {
            "did not converge"
        },
        outcome.sweeps,
        out.display()
    );
    Ok(())
}

/// Load a pattern for evaluation: `.json` pattern documents carry their
/// own k; anything else is an association list needing `--k`.
fn load_eval_pattern(path: &Path, k_flag: Option<usize>) -> Result<(usize, BipolarPattern)> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let (k, pattern) = io::read_pattern_file(path)?;
        if let Some(expected) = k_flag {
            if k != expected {
                return Err(Error::dimension(format!(
                    "{}: file declares k={k}, --k says {expected}",
                    path.display()
                )));
            }
        }
        Ok((k, pattern))
    } else {
        let k = k_flag.ok_or_else(|| {
            Error::spec(format!(
                "{}: association lists need an explicit --k",
                path.display()
            ))
        })?;
        let links = io::read_links_file(path, k)?;
        Ok((k, links.to_pattern()?))
    }
}

pub fn cmd_evaluate(ctx: &Ctx, args: &EvaluateArgs) -> Result<()> {
    let (k_stored, stored) = load_eval_pattern(&args.stored, args.k)?;
    let (k_test, test) = load_eval_pattern(&args.test, args.k)?;
    let (k_result, result) = load_eval_pattern(&args.result, args.k)?;
    if k_test != k_stored || k_result != k_stored {
        return Err(Error::dimension(format!(
            "patterns disagree on k: stored {k_stored}, test {k_test}, result {k_result}"
        )));
    }
    let report = StageReport::evaluate(args.stage, k_stored, &stored, &test, &test, &result)?;
    let out = ctx.out_or("report.json");
    io::write_json(&out, "stage report", &report)?;
    println!(
        "stage {}: lost {} link(s), gained {} link(s), recovery {:.4} -> {}",
        report.stage,
        report.links_lost.len(),
        report.links_gained.len(),
        report.recovery_accuracy,
        out.display()
    );
    Ok(())
}

pub fn cmd_experiment_forgetting(ctx: &Ctx, args: &ForgettingArgs) -> Result<()> {
    let config = ExperimentConfig {
        k: args.k,
        stages: args.stages,
        patterns_per_stage: args.patterns_per_stage,
        dissimilarity: args.dissimilarity,
        noise_flip_prob: args.noise_flip_prob,
        repeats: args.repeats,
        recall: args.recall.to_config(ctx.seed),
        threshold: args.threshold.to_spec(),
        seed: ctx.seed,
    };
    let outcome = experiment::run_forgetting(&config)?;

    let dir = ctx.out_or("experiment-out");
    fs::create_dir_all(&dir)?;
    io::write_json(&dir.join("reports.json"), "stage reports", &outcome.series)?;
    io::write_json(
        &dir.join("summary.json"),
        "experiment summary",
        &outcome.summary,
    )?;
    if ctx.format == OutputFormat::Csv {
        write_summary_csv(&dir.join("summary.csv"), &outcome)?;
    }

    for stage in &outcome.summary.stages {
        println!(
            "stage {}: recovery {:.4} ± {:.4}  lost {:.2} ± {:.2}  gained {:.2} ± {:.2}  cos(result,stored) {:.4}",
            stage.stage,
            stage.recovery_mean,
            stage.recovery_std,
            stage.links_lost_mean,
            stage.links_lost_std,
            stage.links_gained_mean,
            stage.links_gained_std,
            stage.cosine_result_vs_stored_mean,
        );
    }
    match outcome.summary.spearman_stage_vs_recovery {
        Some(rho) => println!("spearman(stage, recovery) = {rho:.4}"),
        None => println!("spearman(stage, recovery) undefined (constant series)"),
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn write_summary_csv(path: &Path, outcome: &ExperimentOutcome) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "stage",
            "recovery_mean",
            "recovery_std",
            "links_lost_mean",
            "links_lost_std",
            "links_gained_mean",
            "links_gained_std",
            "cosine_test_vs_stored_mean",
            "cosine_result_vs_stored_mean",
        ])
        .map_err(|e| Error::format("summary csv", e.to_string()))?;
    for s in &outcome.summary.stages {
        writer
            .write_record([
                s.stage.to_string(),
                s.recovery_mean.to_string(),
                s.recovery_std.to_string(),
                s.links_lost_mean.to_string(),
                s.links_lost_std.to_string(),
                s.links_gained_mean.to_string(),
                s.links_gained_std.to_string(),
                s.cosine_test_vs_stored_mean.to_string(),
                s.cosine_result_vs_stored_mean.to_string(),
            ])
            .map_err(|e| Error::format("summary csv", e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::format("summary csv", e.to_string()))?;
    fs::write(path, bytes)?;
    Ok(())
}
