use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use cfspan::baseline_models::{
    match_task1_predictions, predict_detector, predict_tagger, read_external_tags, read_task1_predictions,
    train_detector as fit_detector, train_tagger as fit_tagger, write_task1_predictions, Model, ModelError, Task1Prediction, TrainingConfig,
    DEFAULT_SEED,
};
use cfspan::clean_augment::{clean_text, merge_augmented, CleanOptions};
use cfspan::corpus::{
    corpus_stats, load_ner, load_sentences, load_task1, load_task2, read_span_predictions, stratified_split,
    write_ner, write_span_predictions, write_task1, write_task2, SpanPredictionRow, Task2Load, ValidationReport,
};
use cfspan::ensemble::{majority_vote, EnsembleConfig, PredictionSet, TiePolicy};
use cfspan::metrics::{
    binary_key_values, format_binary_table, format_span_table, macro_span_report, round_to, span_key_values,
    span_score, BinaryCounts,
};
use cfspan::span_codec::{
    decode_spans, encode_tags, project_surface_tags, DecodePolicy, MergeStrategy, RunSelection, TagSequence,
};
use cfspan::synth::synthetic_corpus;
use cfspan::tokenizer::{align_surface_pieces, tokenize};

use crate::config::ConfigFile;
use crate::failure::{Classify, Failure, Outcome};
use crate::manifest::{beside, RunManifest};
use crate::{Common, MergeArg, RunSelectionArg, TiePolicyArg, TrainFlags};

/// Character length above which `stats` counts a sentence as long.
const DEFAULT_LENGTH_THRESHOLD: usize = 128;

fn config(common: &Common) -> Outcome<ConfigFile> {
    ConfigFile::load(common.config.as_deref())
}

fn seed(common: &Common, cfg: &ConfigFile) -> Outcome<u64> {
    cfg.resolve(common.seed, "seed", DEFAULT_SEED)
}

fn training_config(common: &Common, cfg: &ConfigFile, flags: &TrainFlags, base: TrainingConfig) -> Outcome<TrainingConfig> {
    let config = TrainingConfig {
        batch_size: cfg.resolve(flags.batch_size, "batch_size", base.batch_size)?,
        learning_rate: cfg.resolve(flags.learning_rate, "learning_rate", base.learning_rate)?,
        epochs: cfg.resolve(flags.epochs, "epochs", base.epochs)?,
        dropout: cfg.resolve(None, "dropout", base.dropout)?,
        epsilon: cfg.resolve(None, "epsilon", base.epsilon)?,
        max_sequence_length: cfg.resolve(flags.max_length, "max_length", base.max_sequence_length)?,
        holdout_fraction: cfg.resolve(None, "holdout", base.holdout_fraction)?,
        seed: seed(common, cfg)?,
        positive_class_weight: cfg.resolve(flags.positive_class_weight, "positive_class_weight", base.positive_class_weight)?,
    };
    config.validate().map_err(Failure::usage)?;
    Ok(config)
}

fn model_failure(error: ModelError) -> Failure {
    match error {
        ModelError::InvalidConfig(_) => Failure::usage(error),
        other => Failure::input(other),
    }
}

fn describe(report: &ValidationReport) -> String {
    report
        .issues
        .iter()
        .map(|i| format!("{}: {}", i.code.as_str(), i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

fn load_valid_task2(path: &Path) -> Outcome<Task2Load> {
    let load = load_task2(path).or_input(format!("cannot load {}", path.display()))?;
    if let Some(first) = load.rejects.first() {
        return Err(Failure::input(format!(
            "{}: {} invalid rows; first is {} at line {}: {}",
            path.display(),
            load.rejects.len(),
            first.record_id,
            first.line.unwrap_or(0),
            describe(first)
        )));
    }
    Ok(load)
}

fn warn_unmatched(unmatched: &[String]) {
    if let Some(first) = unmatched.first() {
        eprintln!(
            "warning: {} predictions have no gold sentence (first: {first})",
            unmatched.len()
        );
    }
}

fn write_rejects(path: &Path, rejects: &[(String, u64, String)]) -> Outcome {
    let file = File::create(path).or_input(format!("cannot write {}", path.display()))?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    let io = |e: csv::Error| Failure::input(format!("cannot write {}: {e}", path.display()));
    writer.write_record(["sentenceID", "line", "issues"]).map_err(io)?;
    for (id, line, issues) in rejects {
        writer.write_record([id.as_str(), &line.to_string(), issues]).map_err(io)?;
    }
    writer.flush().or_input(format!("cannot write {}", path.display()))
}

pub fn convert(common: &Common, input: &Path, output: &Path, include_pos: bool, pos: Option<&Path>) -> Outcome {
    let cfg = config(common)?;
    let include_pos = cfg.resolve_switch(include_pos, "include_pos", false)?;
    if include_pos != pos.is_some() {
        return Err(Failure::usage("--include-pos and --pos must be given together"));
    }
    let load = load_task2(input).or_input(format!("cannot load {}", input.display()))?;
    let pos_tags: HashMap<String, Vec<String>> = match pos {
        Some(path) => load_sentences(path)
            .or_input(format!("cannot load {}", path.display()))?
            .into_iter()
            .map(|(id, tags)| (id, tags.split_whitespace().map(str::to_string).collect()))
            .collect(),
        None => HashMap::new(),
    };

    let mut rejects: Vec<(String, u64, String)> = load
        .rejects
        .iter()
        .map(|r| (r.record_id.clone(), r.line.unwrap_or(0), describe(r)))
        .collect();
    let mut sequences = Vec::new();
    for record in &load.records {
        let tokens = tokenize(&record.text);
        if tokens.is_empty() {
            rejects.push((record.sentence_id.clone(), 0, "sentence has no tokens".into()));
            continue;
        }
        let spans = record
            .spans()
            .or_internal(format!("validated sentence {} has invalid spans", record.sentence_id))?;
        let mut sequence = match encode_tags(&record.text, &tokens, &spans) {
            Ok(s) => s,
            Err(e) => {
                rejects.push((record.sentence_id.clone(), 0, e.to_string()));
                continue;
            }
        };
        if include_pos {
            let tags = pos_tags
                .get(&record.sentence_id)
                .ok_or_else(|| Failure::input(format!("no POS tags for sentence {}", record.sentence_id)))?;
            if tags.len() != sequence.len() {
                return Err(Failure::input(format!(
                    "sentence {} has {} tokens but {} POS tags",
                    record.sentence_id,
                    sequence.len(),
                    tags.len()
                )));
            }
            sequence.pos = Some(tags.clone());
        }
        sequences.push(sequence);
    }
    write_ner(output, &sequences, include_pos).or_input(format!("cannot write {}", output.display()))?;
    let rejects_path = {
        let mut name = output.as_os_str().to_owned();
        name.push(".rejects.csv");
        std::path::PathBuf::from(name)
    };
    write_rejects(&rejects_path, &rejects)?;
    for w in &load.warnings {
        eprintln!("warning: sentence {} (line {}): {}", w.record_id, w.line.unwrap_or(0), describe(w));
    }
    println!(
        "converted {} sentences, {} rejected ({}), {} with warnings",
        sequences.len(),
        rejects.len(),
        rejects_path.display(),
        load.warnings.len()
    );

    let mut manifest = RunManifest::new("convert");
    manifest.set("include_pos", include_pos)?;
    manifest.input(input)?;
    if let Some(p) = pos {
        manifest.input(p)?;
    }
    manifest.output(output)?;
    manifest.output(&rejects_path)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub fn split(common: &Common, task: u8, input: &Path, output: &Path, holdout: Option<f64>) -> Outcome {
    let cfg = config(common)?;
    let seed = seed(common, &cfg)?;
    let default = if task == 1 {
        TrainingConfig::detection().holdout_fraction
    } else {
        TrainingConfig::span_tagging().holdout_fraction
    };
    let holdout = cfg.resolve(holdout, "holdout", default)?;
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(Failure::usage(format!("holdout {holdout} must lie strictly between 0 and 1")));
    }
    std::fs::create_dir_all(output).or_input(format!("cannot create {}", output.display()))?;
    let train_path = output.join("train.csv");
    let validation_path = output.join("validation.csv");
    let (train_len, validation_len) = if task == 1 {
        let records = load_task1(input).or_input(format!("cannot load {}", input.display()))?;
        let (train, validation) = stratified_split(&records, holdout, seed).or_usage("cannot split")?;
        write_task1(&train_path, &train).or_input("cannot write training split")?;
        write_task1(&validation_path, &validation).or_input("cannot write validation split")?;
        (train.len(), validation.len())
    } else {
        let records = load_valid_task2(input)?.records;
        let (train, validation) = stratified_split(&records, holdout, seed).or_usage("cannot split")?;
        write_task2(&train_path, &train).or_input("cannot write training split")?;
        write_task2(&validation_path, &validation).or_input("cannot write validation split")?;
        (train.len(), validation.len())
    };
    println!("train {train_len}, validation {validation_len} (holdout {holdout}, seed {seed})");

    let mut manifest = RunManifest::new("split");
    manifest.seed = Some(seed);
    manifest.set("task", task)?;
    manifest.set("holdout", holdout)?;
    manifest.input(input)?;
    manifest.output(&train_path)?;
    manifest.output(&validation_path)?;
    manifest.write(output.join("manifest.json"))?;
    Ok(())
}

pub fn train_detector(common: &Common, input: &Path, output: &Path, flags: &TrainFlags) -> Outcome {
    let cfg = config(common)?;
    let config = training_config(common, &cfg, flags, TrainingConfig::detection())?;
    let records = load_task1(input).or_input(format!("cannot load {}", input.display()))?;
    let model = fit_detector(&records, &config).map_err(model_failure)?;
    let texts: Vec<&str> = records.iter().map(|r| r.text.as_str()).collect();
    let correct = predict_detector(&model, &texts)
        .iter()
        .zip(&records)
        .filter(|(o, r)| o.label == r.label)
        .count();
    Model::Detector(model).save(output).or_input(format!("cannot write {}", output.display()))?;
    println!(
        "trained detector on {} sentences; training accuracy {:.3}",
        records.len(),
        round_to(correct as f64 / records.len() as f64, 3)
    );

    let mut manifest = RunManifest::new("train-detector");
    manifest.seed = Some(config.seed);
    manifest.set("training", &config)?;
    manifest.input(input)?;
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub fn train_tagger(common: &Common, input: &Path, output: &Path, flags: &TrainFlags) -> Outcome {
    let cfg = config(common)?;
    let config = training_config(common, &cfg, flags, TrainingConfig::span_tagging())?;
    let sentences = load_ner(input).or_input(format!("cannot load {}", input.display()))?;
    let model = fit_tagger(&sentences, &config).map_err(model_failure)?;
    println!(
        "trained tagger on {} sentences, {} features",
        sentences.len(),
        model.weights.len()
    );
    Model::Tagger(model).save(output).or_input(format!("cannot write {}", output.display()))?;

    let mut manifest = RunManifest::new("train-tagger");
    manifest.seed = Some(config.seed);
    manifest.set("training", &config)?;
    manifest.set("averaged", true)?;
    manifest.input(input)?;
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub fn predict(common: &Common, model_path: &Path, input: &Path, output: &Path) -> Outcome {
    config(common)?;
    let model = Model::load(model_path).or_input(format!("cannot load model {}", model_path.display()))?;
    let sentences = load_sentences(input).or_input(format!("cannot load {}", input.display()))?;
    match &model {
        Model::Detector(detector) => {
            let texts: Vec<&str> = sentences.iter().map(|(_, t)| t.as_str()).collect();
            let predictions: Vec<Task1Prediction> = predict_detector(detector, &texts)
                .into_iter()
                .zip(&sentences)
                .map(|(o, (id, _))| Task1Prediction {
                    sentence_id: id.clone(),
                    label: o.label,
                    score: Some(o.score),
                })
                .collect();
            write_task1_predictions(output, &predictions).or_input(format!("cannot write {}", output.display()))?;
            let positives = predictions.iter().filter(|p| p.label == 1).count();
            println!("labelled {} sentences, {positives} counterfactual", predictions.len());
        }
        Model::Tagger(tagger) => {
            let mut sequences = Vec::with_capacity(sentences.len());
            for (id, text) in &sentences {
                let tokens = tokenize(text);
                if tokens.is_empty() {
                    return Err(Failure::input(format!("sentence {id} has no tokens to tag")));
                }
                let tags = predict_tagger(tagger, &tokens);
                sequences.push(TagSequence::new(tokens, tags, None).or_internal("tagger output length")?);
            }
            write_ner(output, &sequences, false).or_input(format!("cannot write {}", output.display()))?;
            println!("tagged {} sentences", sequences.len());
        }
    }

    let mut manifest = RunManifest::new("predict");
    manifest.set("model_kind", model.kind())?;
    manifest.input(model_path)?;
    manifest.input(input)?;
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub struct DecodeArgs<'a> {
    pub input: &'a Path,
    pub sentences: &'a Path,
    pub output: &'a Path,
    pub run_selection: Option<RunSelectionArg>,
    pub max_bridge_gap: Option<usize>,
    pub trim_boundary_punctuation: bool,
    pub merge: Option<MergeArg>,
}

pub fn decode(common: &Common, args: DecodeArgs) -> Outcome {
    let cfg = config(common)?;
    let defaults = DecodePolicy::default();
    let default_selection = match defaults.run_selection {
        RunSelection::LongestRun => RunSelectionArg::Longest,
        RunSelection::FirstRun => RunSelectionArg::First,
    };
    let policy = DecodePolicy {
        run_selection: cfg.resolve_enum(args.run_selection, "run_selection", default_selection)?.into(),
        max_bridge_gap: cfg.resolve(args.max_bridge_gap, "max_bridge_gap", defaults.max_bridge_gap)?,
        include_boundary_punctuation: !cfg.resolve_switch(
            args.trim_boundary_punctuation,
            "trim_boundary_punctuation",
            !defaults.include_boundary_punctuation,
        )?,
    };
    let merge: MergeStrategy = cfg.resolve_enum(args.merge, "merge", MergeArg::First)?.into();

    let blocks = read_external_tags(args.input).or_input(format!("cannot load {}", args.input.display()))?;
    let sentences = load_sentences(args.sentences).or_input(format!("cannot load {}", args.sentences.display()))?;
    if blocks.len() != sentences.len() {
        return Err(Failure::input(format!(
            "{} has {} tag blocks but {} has {} sentences",
            args.input.display(),
            blocks.len(),
            args.sentences.display(),
            sentences.len()
        )));
    }
    let mut rows = Vec::with_capacity(blocks.len());
    for (block, (id, text)) in blocks.iter().zip(&sentences) {
        let tokens = tokenize(text);
        let alignment = align_surface_pieces(text, &tokens, &block.pieces)
            .or_input(format!("tag block at line {} does not match sentence {id}", block.line))?;
        let tags = project_surface_tags(&block.tags, &alignment, merge)
            .or_input(format!("tag block at line {} (sentence {id})", block.line))?;
        let sequence = TagSequence::new(tokens, tags, None).or_internal("projected tag count")?;
        let spans = decode_spans(&sequence, &policy);
        spans
            .check_bounds(text.chars().count())
            .or_internal(format!("decoded span outside sentence {id}"))?;
        rows.push(SpanPredictionRow {
            sentence_id: id.clone(),
            spans,
        });
    }
    write_span_predictions(args.output, &rows).or_input(format!("cannot write {}", args.output.display()))?;
    let with_antecedent = rows.iter().filter(|r| r.spans.antecedent.is_some()).count();
    let with_consequent = rows.iter().filter(|r| r.spans.consequent.is_some()).count();
    println!(
        "decoded {} sentences: {with_antecedent} with antecedent, {with_consequent} with consequent",
        rows.len()
    );

    let mut manifest = RunManifest::new("decode");
    manifest.set("decode_policy", policy)?;
    manifest.set("merge", merge)?;
    manifest.input(args.input)?;
    manifest.input(args.sentences)?;
    manifest.output(args.output)?;
    manifest.write(beside(args.output))?;
    Ok(())
}

fn display_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn eval(common: &Common, task: u8, gold: &Path, input: &Path, output: Option<&Path>) -> Outcome {
    config(common)?;
    let machine = if task == 1 {
        let records = load_task1(gold).or_input(format!("cannot load {}", gold.display()))?;
        let predictions = read_task1_predictions(input).or_input(format!("cannot load {}", input.display()))?;
        let ids: Vec<String> = records.iter().map(|r| r.sentence_id.clone()).collect();
        let matched = match_task1_predictions(&ids, &predictions);
        warn_unmatched(&matched.unmatched);
        if let Some(first) = matched.missing.first() {
            return Err(Failure::input(format!(
                "{} gold sentences have no prediction (first: {first})",
                matched.missing.len()
            )));
        }
        let gold_labels: Vec<u8> = records.iter().map(|r| r.label).collect();
        let predicted: Vec<u8> = matched.aligned.iter().flatten().map(|p| p.label).collect();
        let counts = BinaryCounts::from_labels(&gold_labels, &predicted).or_internal("aligned label counts")?;
        let report = counts.report();
        print!("{}", format_binary_table(&[(display_name(input).as_str(), report)]));
        binary_key_values(&report, &counts)
    } else {
        let records = load_valid_task2(gold)?.records;
        let predictions = read_span_predictions(input).or_input(format!("cannot load {}", input.display()))?;
        let mut by_id = HashMap::new();
        for p in &predictions {
            if by_id.insert(p.sentence_id.as_str(), p.spans).is_some() {
                return Err(Failure::input(format!("sentence {} is predicted twice", p.sentence_id)));
            }
        }
        let gold_ids: std::collections::HashSet<&str> = records.iter().map(|r| r.sentence_id.as_str()).collect();
        let unmatched: Vec<String> = predictions
            .iter()
            .filter(|p| !gold_ids.contains(p.sentence_id.as_str()))
            .map(|p| p.sentence_id.clone())
            .collect();
        warn_unmatched(&unmatched);
        let mut scores = Vec::with_capacity(records.len());
        for r in &records {
            let predicted = by_id
                .get(r.sentence_id.as_str())
                .ok_or_else(|| Failure::input(format!("gold sentence {} has no prediction", r.sentence_id)))?;
            let gold_spans = r.spans().or_internal("validated gold spans")?;
            scores.push(span_score(&r.text, &gold_spans, predicted).or_input(format!("sentence {}", r.sentence_id))?);
        }
        let report = macro_span_report(&scores).or_input(format!("{} has no sentences", gold.display()))?;
        print!("{}", format_span_table(&[(display_name(input).as_str(), report)]));
        span_key_values(&report)
    };

    if let Some(output) = output {
        std::fs::write(output, &machine).or_input(format!("cannot write {}", output.display()))?;
        let mut manifest = RunManifest::new("eval");
        manifest.set("task", task)?;
        manifest.input(gold)?;
        manifest.input(input)?;
        manifest.output(output)?;
        manifest.write(beside(output))?;
    }
    Ok(())
}

pub fn ensemble(common: &Common, inputs: &[std::path::PathBuf], output: &Path, tie_policy: Option<TiePolicyArg>) -> Outcome {
    let cfg = config(common)?;
    let tie_policy: TiePolicy = cfg.resolve_enum(tie_policy, "tie_policy", TiePolicyArg::First)?.into();
    let mut sets = Vec::with_capacity(inputs.len());
    for path in inputs {
        sets.push(PredictionSet {
            name: path.display().to_string(),
            predictions: read_task1_predictions(path).or_input(format!("cannot load {}", path.display()))?,
        });
    }
    let config = EnsembleConfig {
        tie_policy,
        model_order: sets.iter().map(|s| s.name.clone()).collect(),
    };
    let combined = majority_vote(&sets, &config).or_input("cannot combine predictions")?;
    write_task1_predictions(output, &combined).or_input(format!("cannot write {}", output.display()))?;
    let positives = combined.iter().filter(|p| p.label == 1).count();
    println!(
        "combined {} models over {} sentences, {positives} counterfactual",
        sets.len(),
        combined.len()
    );

    let mut manifest = RunManifest::new("ensemble");
    manifest.set("ensemble", &config)?;
    for path in inputs {
        manifest.input(path)?;
    }
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub fn clean(common: &Common, task: u8, input: &Path, output: &Path, switches: [bool; 3]) -> Outcome {
    if task != 1 {
        return Err(Failure::usage(
            "cleaning is only available for task 1; it would invalidate task 2 span indexes",
        ));
    }
    let cfg = config(common)?;
    let options = CleanOptions {
        strip_punctuation: cfg.resolve_switch(switches[0], "strip_punctuation", false)?,
        strip_rare_characters: cfg.resolve_switch(switches[1], "strip_rare", false)?,
        strip_hashtags: cfg.resolve_switch(switches[2], "strip_hashtags", false)?,
    };
    let records = load_task1(input).or_input(format!("cannot load {}", input.display()))?;
    let total = records.len();
    let mut changed = 0;
    let mut cleaned = Vec::with_capacity(total);
    for mut record in records {
        let text = clean_text(&record.text, &options);
        if text.is_empty() {
            eprintln!("warning: sentence {} is empty after cleaning and was dropped", record.sentence_id);
            continue;
        }
        if text != record.text {
            changed += 1;
        }
        record.text = text;
        cleaned.push(record);
    }
    write_task1(output, &cleaned).or_input(format!("cannot write {}", output.display()))?;
    println!(
        "cleaned {total} sentences: {changed} changed, {} dropped",
        total - cleaned.len()
    );

    let mut manifest = RunManifest::new("clean");
    manifest.set("clean_options", options)?;
    manifest.input(input)?;
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

pub fn augment(common: &Common, input: &Path, augment: &Path, output: &Path, no_dedup: bool) -> Outcome {
    let cfg = config(common)?;
    let dedup = if no_dedup { false } else { cfg.get("dedup")?.unwrap_or(true) };
    let base = load_task1(input).or_input(format!("cannot load {}", input.display()))?;
    let extra = load_task1(augment).or_input(format!("cannot load {}", augment.display()))?;
    let (merged, report) = merge_augmented(&base, &extra, dedup);
    write_task1(output, &merged).or_input(format!("cannot write {}", output.display()))?;
    println!(
        "added {} rows ({} counterfactual, {} not), skipped {} duplicates; {} rows total",
        report.added,
        report.label_distribution_delta[1],
        report.label_distribution_delta[0],
        report.duplicates_skipped,
        merged.len()
    );

    let mut manifest = RunManifest::new("augment");
    manifest.set("dedup", dedup)?;
    manifest.set("report", &report)?;
    manifest.input(input)?;
    manifest.input(augment)?;
    manifest.output(output)?;
    manifest.write(beside(output))?;
    Ok(())
}

fn percent(ratio: Option<f64>) -> String {
    ratio.map_or_else(|| "n/a".to_string(), |r| format!("{:.1}%", round_to(r * 100.0, 1)))
}

fn optional(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| round_to(v, 6).to_string())
}

pub fn stats(common: &Common, input: &Path, output: Option<&Path>, max_length: Option<usize>) -> Outcome {
    let cfg = config(common)?;
    let threshold = cfg.resolve(max_length, "max_length", DEFAULT_LENGTH_THRESHOLD)?;
    let records = load_task1(input).or_input(format!("cannot load {}", input.display()))?;
    let s = corpus_stats(&records, threshold);
    println!("positives / negatives / total: {} / {} / {}", s.positives, s.negatives, s.total);
    println!("positives per negative:        {}", percent(s.positive_to_negative_ratio));
    println!("positives per total:           {}", percent(s.positive_fraction));
    println!("longest sentence:              {} code points", s.max_code_point_length);
    println!("longer than {threshold} code points: {}", s.over_length_count);

    if let Some(output) = output {
        let machine = format!(
            "total={}\npositives={}\nnegatives={}\npositive_to_negative_ratio={}\npositive_fraction={}\nmax_code_point_length={}\nlength_threshold={}\nover_length_count={}\n",
            s.total,
            s.positives,
            s.negatives,
            optional(s.positive_to_negative_ratio),
            optional(s.positive_fraction),
            s.max_code_point_length,
            s.length_threshold,
            s.over_length_count
        );
        std::fs::write(output, machine).or_input(format!("cannot write {}", output.display()))?;
        let mut manifest = RunManifest::new("stats");
        manifest.set("length_threshold", threshold)?;
        manifest.input(input)?;
        manifest.output(output)?;
        manifest.write(beside(output))?;
    }
    Ok(())
}

pub fn synth(common: &Common, output: &Path, count: usize, positives: Option<usize>) -> Outcome {
    let cfg = config(common)?;
    let seed = seed(common, &cfg)?;
    let positives = positives.unwrap_or(count / 2);
    if positives > count {
        return Err(Failure::usage(format!("--positives {positives} exceeds --count {count}")));
    }
    let corpus = synthetic_corpus(count, positives, seed);
    std::fs::create_dir_all(output).or_input(format!("cannot create {}", output.display()))?;
    let task1 = output.join("task1.csv");
    let task2 = output.join("task2.csv");
    write_task1(&task1, &corpus.detection).or_input(format!("cannot write {}", task1.display()))?;
    write_task2(&task2, &corpus.spans).or_input(format!("cannot write {}", task2.display()))?;
    println!("wrote {count} sentences ({positives} counterfactual) to {}", output.display());

    let mut manifest = RunManifest::new("synth");
    manifest.seed = Some(seed);
    manifest.set("count", count)?;
    manifest.set("positives", positives)?;
    manifest.output(&task1)?;
    manifest.output(&task2)?;
    manifest.write(output.join("manifest.json"))?;
    Ok(())
}
