//! `gapfill` command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::artifact;
use crate::candidates::{CandidateMode, DEFAULT_DYNAMIC_CAP, DEFAULT_STATIC_K};
use crate::corpus::{self, ReadStats};
use crate::corrector::{CorrectorConfig, DEFAULT_CHUNK_SIZE};
use crate::error::{Error, Result};
use crate::eval::{evaluate, GoldEdit};
use crate::gaps::{pair_filter, GapCounter};
use crate::katz::DEFAULT_DISCOUNT_THRESHOLD;
use crate::model::{BuildConfig, DEFAULT_HYPER_V};
use crate::ngram::{CorpusCounter, BATCH_LINES};
use crate::testset::TestSetGenerator;
use crate::tokenizer::tokenize_line;
use crate::Model;

#[derive(Debug, Parser)]
#[command(name = "gapfill", version, about = "Restore a single missing word per sentence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count a corpus and write a model file.
    Train(TrainArgs),
    /// Insert at most one word into each input sentence.
    Correct(CorrectArgs),
    /// Remove one interior word from each sentence to build a test set.
    MakeTestset(MakeTestsetArgs),
    /// Score corrected sentences against references.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training corpus, one tokenized sentence per line.
    pub corpus: PathBuf,
    /// Output model file.
    pub out: PathBuf,
    /// Words seen fewer times are mapped to <unk>.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Size of the static candidate lexicon.
    #[arg(long, default_value_t = DEFAULT_STATIC_K)]
    pub static_k: usize,
    /// Middle words seen fewer times between a pair are pruned.
    #[arg(long, default_value_t = 1)]
    pub gap_min_count: u64,
    /// Counts at or above this are not discounted.
    #[arg(long, default_value_t = DEFAULT_DISCOUNT_THRESHOLD)]
    pub discount_threshold: u32,
    /// Separation-ratio threshold stored as the model's default.
    #[arg(long, default_value_t = DEFAULT_HYPER_V)]
    pub hyper_v: f64,
    /// Only keep gap statistics for pairs adjacent in this sentence file
    /// (reads the corpus a second time).
    #[arg(long)]
    pub test_filter: Option<PathBuf>,
    /// Fold tokens to lower case at ingestion.
    #[arg(long)]
    pub lowercase: bool,
    /// Counting threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    pub model: PathBuf,
    pub input: PathBuf,
    pub output: PathBuf,
    /// Separation-ratio threshold [default: the model's, normally 27].
    #[arg(long)]
    pub hyper_v: Option<f64>,
    /// Candidate sources.
    #[arg(long, default_value = "combined", value_parser = ["static", "dynamic", "combined"])]
    pub mode: String,
    /// Static lexicon size [default: the model's, normally 100].
    #[arg(long)]
    pub static_k: Option<usize>,
    /// Maximum dynamic candidates per gap.
    #[arg(long, default_value_t = DEFAULT_DYNAMIC_CAP)]
    pub dynamic_cap: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Sentences per worker task.
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: usize,
    /// Insert at the best positive-ratio gap even when none passes the threshold.
    #[arg(long)]
    pub force_insert: bool,
}

#[derive(Debug, Args)]
pub struct MakeTestsetArgs {
    pub input: PathBuf,
    /// Sentences with one word removed.
    pub test_out: PathBuf,
    /// The untouched sentences.
    pub gold_out: PathBuf,
    /// `<gap_index>\t<removed_word>` per test sentence.
    pub annotation_out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub hyp: PathBuf,
    pub reference: PathBuf,
    /// Gold edit annotations for position/word accuracy.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Also report token-level edit distance.
    #[arg(long)]
    pub token_level: bool,
    /// Print a single-line JSON record instead of the table.
    #[arg(long)]
    pub json: bool,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gapfill: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Train(a) => cmd_train(&a),
        Command::Correct(a) => cmd_correct(&a),
        Command::MakeTestset(a) => cmd_make_testset(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn report_skipped(path: &Path, stats: ReadStats) {
    if stats.invalid_utf8 > 0 {
        eprintln!(
            "warning: {}: skipped {} invalid UTF-8 lines",
            path.display(),
            stats.invalid_utf8
        );
    }
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let config = BuildConfig {
        min_count: a.min_count,
        discount_threshold: a.discount_threshold,
        static_k: a.static_k,
        gap_min_count: a.gap_min_count,
        hyper_v: a.hyper_v,
        lowercase: a.lowercase,
    };
    config.validate()?;
    let started = Instant::now();
    let model: Model<f64> = pool(a.threads)?.install(|| -> Result<_> {
        let mut counter = CorpusCounter::new(a.lowercase);
        if a.test_filter.is_none() {
            counter = counter.with_gap_tables();
        }
        let stats = corpus::for_each_batch(corpus::open(&a.corpus)?, BATCH_LINES, |batch| {
            counter.add_lines(batch);
            Ok(())
        })?;
        report_skipped(&a.corpus, stats);
        let (vocab, counts, gaps) = counter.finish(a.min_count, a.gap_min_count)?;
        let gaps = match (&a.test_filter, gaps) {
            (None, Some(g)) => g,
            (Some(filter_path), _) => {
                let mut test_ids = Vec::new();
                corpus::for_each_batch(corpus::open(filter_path)?, BATCH_LINES, |batch| {
                    test_ids.extend(batch.iter().map(|l| vocab.ids(&tokenize_line(l))));
                    Ok(())
                })?;
                let filter = pair_filter(test_ids.iter().map(Vec::as_slice));
                let mut gc = GapCounter::new(Some(filter));
                corpus::for_each_batch(corpus::open(&a.corpus)?, BATCH_LINES, |batch| {
                    let ids: Vec<_> = batch
                        .iter()
                        .map(|l| vocab.ids(&tokenize_line(l)))
                        .filter(|s| !s.is_empty())
                        .collect();
                    gc.add_batch(&ids);
                    Ok(())
                })?;
                gc.finish(a.gap_min_count)
            }
            (None, None) => unreachable!("gap tables requested in the counting pass"),
        };
        Model::from_parts(vocab, counts, gaps, config)
    })?;
    artifact::save(&model, &a.out)?;
    let v = &model.vocab;
    println!("sentences      {}", v.sentences());
    println!("tokens         {}", v.total_tokens());
    println!("vocabulary     {}", v.len());
    println!("bigrams        {}", model.counts().num_bigrams());
    println!("trigrams       {}", model.counts().num_trigrams());
    println!("gap pairs      {}", model.gaps.num_pairs());
    println!("elapsed        {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

pub fn cmd_correct(a: &CorrectArgs) -> Result<()> {
    let model: Model<f64> = artifact::load(&a.model)?;
    let config = CorrectorConfig {
        hyper_v: a.hyper_v.unwrap_or(model.config.hyper_v),
        mode: a.mode.parse::<CandidateMode>()?,
        static_k: a.static_k,
        dynamic_cap: a.dynamic_cap,
        force_insert: a.force_insert,
    };
    let corrector = model.corrector(config)?;
    let raw = corpus::read_raw_lines(&a.input)?;
    let texts: Vec<&str> = raw
        .iter()
        .map(|l| l.as_ref().map(String::as_str).unwrap_or(""))
        .collect();

    let started = Instant::now();
    let results = corrector.correct_batch(&texts, a.threads, a.chunk_size)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut out = BufWriter::new(File::create(&a.output)?);
    let (mut inserted, mut malformed) = (0usize, 0usize);
    for (line, result) in raw.iter().zip(&results) {
        match (line, result) {
            (Ok(_), Ok((fixed, corr))) => {
                inserted += usize::from(!corr.is_empty());
                out.write_all(fixed.as_bytes())?;
            }
            (Ok(text), Err(_)) => {
                malformed += 1;
                out.write_all(text.as_bytes())?;
            }
            (Err(bytes), _) => {
                malformed += 1;
                out.write_all(bytes)?;
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let n = results.len();
    let per_sec = if elapsed > 0.0 { n as f64 / elapsed } else { f64::INFINITY };
    println!("sentences      {n}");
    println!("insertions     {inserted}");
    println!("passed through {malformed}");
    println!("threads        {}", a.threads);
    println!("wall clock     {elapsed:.3}s");
    println!("throughput     {per_sec:.1} sentences/s");
    println!(
        "per 1000       {:.3}s",
        if n > 0 { elapsed * 1000.0 / n as f64 } else { 0.0 }
    );
    Ok(())
}

pub fn cmd_make_testset(a: &MakeTestsetArgs) -> Result<()> {
    let mut gen = TestSetGenerator::new(a.seed);
    let mut test = BufWriter::new(File::create(&a.test_out)?);
    let mut gold = BufWriter::new(File::create(&a.gold_out)?);
    let mut ann = BufWriter::new(File::create(&a.annotation_out)?);
    let (mut written, mut skipped) = (0u64, 0u64);
    let stats = corpus::for_each_batch(corpus::open(&a.input)?, BATCH_LINES, |batch| {
        for line in batch {
            match gen.damage(&tokenize_line(line)) {
                Some(case) => {
                    writeln!(test, "{}", case.damaged.join(" "))?;
                    writeln!(gold, "{}", case.original.join(" "))?;
                    writeln!(ann, "{}", case.edit)?;
                    written += 1;
                }
                None => skipped += 1,
            }
        }
        Ok(())
    })?;
    report_skipped(&a.input, stats);
    test.flush()?;
    gold.flush()?;
    ann.flush()?;
    println!("test sentences {written}");
    println!("skipped (<3)   {skipped}");
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let hyps = corpus::read_lines_lossy(&a.hyp)?;
    let refs = corpus::read_lines_lossy(&a.reference)?;
    let gold = match &a.annotations {
        Some(p) => Some(
            corpus::read_lines_lossy(p)?
                .iter()
                .map(|l| GoldEdit::parse(l))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let report = evaluate(&hyps, &refs, gold.as_deref(), a.token_level)?;
    if a.json {
        println!(
            "{}",
            serde_json::to_string(&report).map_err(|e| Error::Data(e.to_string()))?
        );
    } else {
        print!("{report}");
    }
    Ok(())
}
