//! `phonomem` command-line tool.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors
//! (unreadable files, unknown symbols, malformed models).

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use phonomem::alphabet::DigraphTable;
use phonomem::export::BranchExport;
use phonomem::generator::{
    enumerate_branch_space, gibberish, grow_counted, predict_completions, ranked_candidates, segment,
    GibberishPolicy, PenaltySet,
};
use phonomem::model::{DEFAULT_G0, DEFAULT_RANGE};
use phonomem::trainer::Normalize;
use phonomem::{corpora, persist, train, verify_decay, Alphabet, Corpus, InteractionModel, TrainConfig};

#[derive(Parser)]
#[command(name = "phonomem", version, about = "Train and query phonotactic energy models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a word list and save it.
    Train(TrainArgs),
    /// Print the energy of a word.
    Energy {
        model: PathBuf,
        word: String,
        /// Also print the energy of every gap, in units of g0.
        #[arg(long)]
        profile: bool,
    },
    /// Grow a word from a prefix, greedily or with the rank die.
    Generate(GenerateArgs),
    /// Export the branching space below a prefix.
    Branch(BranchArgs),
    /// Split a word at high-energy gaps.
    Segment {
        model: PathBuf,
        word: String,
        /// Cut every gap whose energy exceeds this value.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Rank lexicon words that complete a prefix.
    Predict {
        model: PathBuf,
        prefix: String,
        /// Inverse temperature of the next-sound distribution.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Lexicon file or builtin:NAME; defaults to the training corpus.
        #[arg(long)]
        corpus: Option<String>,
    },
    /// Show model parameters.
    Inspect {
        model: PathBuf,
        /// Print (g0 - g(r))^-1 for each range; `inf` marks a zero denominator.
        #[arg(long)]
        reciprocal: bool,
    },
    /// Interactive next-sound game on standard input.
    Explore {
        model: PathBuf,
        #[arg(default_value = "")]
        prefix: String,
        /// Inverse temperature used for the displayed probabilities.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Word list file, or builtin:latin / builtin:turkish.
    corpus: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
    eta: f64,
    /// Number of gradient-flow timesteps.
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ginit: f64,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    normalize: NormalizeArg,
    /// Interaction range R.
    #[arg(long, default_value_t = DEFAULT_RANGE)]
    range: usize,
    #[arg(long, default_value_t = DEFAULT_G0, allow_hyphen_values = true)]
    g0: f64,
    /// Let couplings go negative instead of clamping at zero.
    #[arg(long)]
    no_clamp: bool,
    /// Explicit symbol order, comma-separated; sets the tie-break order.
    #[arg(long)]
    order: Option<String>,
    /// Multi-character spelling of one sound, as SPELLING=SYMBOL. Repeatable.
    #[arg(long = "digraph", value_name = "SPELLING=SYMBOL")]
    digraphs: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    PerRangeSum,
}

#[derive(clap::Args)]
struct GenerateArgs {
    model: PathBuf,
    prefix: String,
    /// Number of sounds to append.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Stop before a sound whose new gap energy would exceed this value.
    /// Greedy growth only.
    #[arg(long, allow_hyphen_values = true)]
    stop_tau: Option<f64>,
    /// Probability of taking the next-to-lowest sound at each step.
    #[arg(long, default_value_t = 0.2)]
    p_next: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct BranchArgs {
    model: PathBuf,
    prefix: String,
    /// Sounds appended beyond the prefix.
    #[arg(long, default_value_t = 6)]
    right: usize,
    /// Number of rows.
    #[arg(long, default_value_t = 10)]
    down: usize,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    /// Corpus used to flag input words; defaults to the training corpus.
    #[arg(long)]
    corpus: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// A problem with the command line that clap cannot see.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Train(args) => cmd_train(args, &mut out),
        Command::Energy { model, word, profile } => {
            let m = load(&model)?;
            let w = tokenize(m.alphabet(), &word)?;
            writeln!(out, "energy: {}", m.word_energy(&w))?;
            if profile {
                writeln!(out, "profile: {}", join(&in_g0_units(&m, &m.energy_profile(&w).gaps)))?;
            }
            Ok(())
        }
        Command::Generate(args) => cmd_generate(args, &mut out),
        Command::Branch(args) => cmd_branch(args, &mut out),
        Command::Segment { model, word, threshold } => {
            if threshold.is_nan() || threshold < 0.0 {
                return Err(usage("--threshold must be nonnegative"));
            }
            let m = load(&model)?;
            let w = tokenize(m.alphabet(), &word)?;
            let parts = segment(&m, &w, threshold);
            let mut total = 0.0;
            for p in &parts {
                let e = m.word_energy(p);
                total += e;
                writeln!(out, "{}\t{}", m.alphabet().render(p), e)?;
            }
            writeln!(out, "total: {} (uncut {})", total, m.word_energy(&w))?;
            Ok(())
        }
        Command::Predict { model, prefix, beta, corpus } => {
            if beta.is_nan() || beta < 0.0 {
                return Err(usage("--beta must be nonnegative"));
            }
            let m = load(&model)?;
            let p = tokenize(m.alphabet(), &prefix)?;
            let lexicon = lexicon(&m, corpus.as_deref())?;
            for c in predict_completions(&m, &p, &lexicon, beta) {
                writeln!(out, "{}\t{:e}", m.alphabet().render(&c.word), c.probability)?;
            }
            Ok(())
        }
        Command::Inspect { model, reciprocal } => cmd_inspect(&load(&model)?, reciprocal, &mut out),
        Command::Explore { model, prefix, beta } => {
            if beta.is_nan() || beta < 0.0 {
                return Err(usage("--beta must be nonnegative"));
            }
            let m = load(&model)?;
            let start = tokenize(m.alphabet(), &prefix)?;
            explore(&m, start.into_inner(), beta, io::stdin().lock(), &mut out)
        }
    }
}

fn cmd_train(args: TrainArgs, out: &mut impl Write) -> Result<()> {
    let cfg = TrainConfig {
        eta: args.eta,
        timesteps: args.steps,
        g_init: args.ginit,
        clamp: !args.no_clamp,
        normalize: match args.normalize {
            NormalizeArg::None => Normalize::None,
            NormalizeArg::PerRangeSum => Normalize::PerRangeSum,
        },
        range: args.range,
        g0: args.g0,
        ..TrainConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut digraphs = DigraphTable::new();
    for spec in &args.digraphs {
        let (spelling, symbol) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--digraph expects SPELLING=SYMBOL, got {spec:?}")))?;
        digraphs.insert(spelling.to_string(), symbol.to_string());
    }
    let corpus = read_corpus(&args.corpus, &digraphs, args.order.as_deref())?;
    let mut model = train(&corpus, &cfg)?;
    model.meta.timestamp = Some(timestamp());
    persist::save(&model, &args.out).with_context(|| format!("writing {}", args.out.display()))?;

    writeln!(out, "d = {}", model.size())?;
    writeln!(out, "R = {}", model.range())?;
    for r in 1..=model.range() {
        writeln!(out, "mean g({r}) = {}", model.mean_interaction(r))?;
    }
    let decay = verify_decay(&model);
    writeln!(out, "decay: {}", if decay { "ok" } else { "violated" })?;
    writeln!(out, "saved {}", args.out.display())?;
    Ok(())
}

fn cmd_generate(args: GenerateArgs, out: &mut impl Write) -> Result<()> {
    if !(0.0..=1.0).contains(&args.p_next) {
        return Err(usage("--p-next must lie in [0, 1]"));
    }
    if args.stop_tau.is_some() && args.p_next != 0.0 {
        return Err(usage("--stop-tau applies to greedy growth; pass --p-next 0"));
    }
    let m = load(&args.model)?;
    let prefix = tokenize(m.alphabet(), &args.prefix)?;
    let (word, profile) = if args.p_next == 0.0 {
        let g = grow_counted(&m, &prefix, args.steps, args.stop_tau, &PenaltySet::new())?;
        let profile = m.energy_profile(&g.word);
        (g.word, profile)
    } else {
        let policy = GibberishPolicy {
            p_next: args.p_next,
            seed: args.seed,
            max_length: prefix.len() + args.steps,
        };
        let g = gibberish(&m, &prefix, &policy)?;
        writeln!(out, "ranks: {}", g.ranks.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))?;
        (g.word, g.profile)
    };
    writeln!(out, "word: {}", m.alphabet().render(&word))?;
    writeln!(out, "energy: {}", m.word_energy(&word))?;
    writeln!(out, "profile: {}", join(&in_g0_units(&m, &profile.gaps)))?;
    Ok(())
}

fn cmd_branch(args: BranchArgs, out: &mut impl Write) -> Result<()> {
    if args.right == 0 || args.down == 0 {
        return Err(usage("--right and --down must be at least 1"));
    }
    let m = load(&args.model)?;
    let prefix = tokenize(m.alphabet(), &args.prefix)?;
    let corpus = lexicon(&m, args.corpus.as_deref())?;
    let space = enumerate_branch_space(&m, &prefix, args.right, args.down);
    let export = BranchExport::new(&space, &corpus);
    let text = match args.format {
        Format::Dot => export.to_dot(),
        Format::Json => export.to_json()? + "\n",
    };
    match args.out {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_inspect(m: &InteractionModel, reciprocal: bool, out: &mut impl Write) -> Result<()> {
    let a = m.alphabet();
    writeln!(out, "alphabet: {}", a.symbols().join(" "))?;
    writeln!(out, "d = {}", m.size())?;
    writeln!(out, "R = {}", m.range())?;
    writeln!(out, "g0 = {}", m.g0())?;
    for r in 1..=m.range() {
        writeln!(out, "mean g({r}) = {}", m.mean_interaction(r))?;
    }
    let meta = &m.meta;
    if let Some(src) = &meta.corpus_source {
        writeln!(out, "corpus: {src}")?;
    }
    if let Some(n) = meta.corpus_words {
        writeln!(out, "corpus words: {n}")?;
    }
    if let Some(h) = &meta.corpus_hash {
        writeln!(out, "corpus sha256: {h}")?;
    }
    if let Some(t) = meta.timestamp {
        writeln!(out, "timestamp: {t}")?;
    }
    if !meta.ablated.is_empty() {
        writeln!(out, "ablated ranges: {:?}", meta.ablated)?;
    }
    if reciprocal {
        let d = m.size();
        for r in 1..=m.range() {
            writeln!(out, "reciprocal r={r}")?;
            writeln!(out, "\t{}", a.symbols().join("\t"))?;
            let values = m.reciprocal(r);
            for (i, row) in values.chunks(d).enumerate() {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| v.map_or_else(|| "inf".to_string(), |x| format!("{x:.4}")))
                    .collect();
                writeln!(out, "{}\t{}", a.symbols()[i], cells.join("\t"))?;
            }
        }
    }
    Ok(())
}

/// Line protocol: a number takes that rank, an empty line takes rank 0,
/// `b` removes the last sound, `q` quits, anything else restarts from
/// that text.
fn explore(m: &InteractionModel, mut word: Vec<usize>, beta: f64, input: impl BufRead, out: &mut impl Write) -> Result<()> {
    let a = m.alphabet();
    show_choices(m, &word, beta, out)?;
    for line in input.lines() {
        let line = line?;
        let cmd = line.trim();
        match cmd {
            "q" => break,
            "b" => {
                word.pop();
            }
            "" => word.push(ranked_candidates(m, &word)[0].0),
            _ => match cmd.parse::<usize>() {
                Ok(rank) if rank < m.size() => word.push(ranked_candidates(m, &word)[rank].0),
                Ok(rank) => writeln!(out, "rank {rank} out of range 0..{}", m.size())?,
                Err(_) => match a.tokenize(cmd) {
                    Ok(w) => word = w.into_inner(),
                    Err(e) => writeln!(out, "{e}")?,
                },
            },
        }
        show_choices(m, &word, beta, out)?;
    }
    Ok(())
}

fn show_choices(m: &InteractionModel, word: &[usize], beta: f64, out: &mut impl Write) -> Result<()> {
    let a = m.alphabet();
    let dist = m.next_sound_distribution(word, beta);
    writeln!(out, "word: {} (energy {})", a.render(word), m.word_energy(word))?;
    for (rank, (s, e)) in ranked_candidates(m, word).into_iter().enumerate().take(5) {
        writeln!(out, "  {rank}: {} energy {e} p {:.4}", a.render(&[s]), dist.probabilities[s])?;
    }
    write!(out, "> ")?;
    out.flush()?;
    Ok(())
}

fn load(path: &Path) -> Result<InteractionModel> {
    persist::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn tokenize(alphabet: &Alphabet, text: &str) -> Result<phonomem::Word> {
    alphabet.tokenize(text).with_context(|| format!("reading {text:?}"))
}

fn read_text(source: &str) -> Result<String> {
    if let Some(text) = corpora::builtin_text(source).filter(|_| source.starts_with(corpora::BUILTIN_PREFIX)) {
        return Ok(text.to_string());
    }
    if source.starts_with(corpora::BUILTIN_PREFIX) {
        anyhow::bail!("no built-in corpus {source:?}; use builtin:latin or builtin:turkish");
    }
    let bytes = std::fs::read(source).with_context(|| format!("reading corpus {source}"))?;
    phonomem::alphabet::decode_lines(&bytes).with_context(|| format!("decoding corpus {source}"))
}

fn read_corpus(source: &str, digraphs: &DigraphTable, order: Option<&str>) -> Result<Corpus> {
    let text = read_text(source)?;
    let corpus = match order {
        Some(order) => {
            let symbols = order.split(',').map(str::trim).filter(|s| !s.is_empty());
            let alphabet = Alphabet::from_symbols(symbols, digraphs.clone()).map_err(|e| usage(format!("--order: {e}")))?;
            Corpus::parse_with_alphabet(&text, alphabet, source)?
        }
        None => Corpus::parse(&text, source, Some(digraphs))?,
    };
    Ok(corpus)
}

/// Corpus for flags and completions, tokenized with the model alphabet.
fn lexicon(m: &InteractionModel, source: Option<&str>) -> Result<Corpus> {
    let source = match source.or(m.meta.corpus_source.as_deref()) {
        Some(s) => s.to_string(),
        None => anyhow::bail!("model records no corpus; pass --corpus"),
    };
    let text = read_text(&source).context("pass --corpus to choose another lexicon")?;
    Ok(Corpus::parse_with_alphabet(&text, m.alphabet().clone(), source)?)
}

fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn in_g0_units(m: &InteractionModel, gaps: &[f64]) -> Vec<f64> {
    if m.g0() == 0.0 {
        gaps.to_vec()
    } else {
        gaps.iter().map(|g| g / m.g0()).collect()
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}
