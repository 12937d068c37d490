use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctcdec::batch::{parse_hypothesis_file, run_batch, write_batch, Manifest, Scheme};
use ctcdec::committee::{CommitteeConfig, DEFAULT_NULL_CONFIDENCE, DEFAULT_VOTE_LAMBDA};
use ctcdec::ctc::{detect_boundaries, DEFAULT_BOUNDARY_THRESHOLD};
use ctcdec::dictionary::{build_lexicon, DecodeParams, Lexicon, LexiconPolicy, OovPolicy};
use ctcdec::eval::{evaluate_texts, EvalOptions};
use ctcdec::expression::{compile_rules, RuleConfig};
use ctcdec::io::{load_matrix, store_matrix, MatrixFormat};
use ctcdec::{decode_best_path, generate_synthetic, Alphabet, BeamWidth};

#[derive(Parser)]
#[command(name = "ctcdec", version, about = "Decode, score and inspect CTC confidence matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode every record of a manifest, or a single matrix.
    Decode(DecodeArgs),
    /// Score hypotheses against references (CER and WER).
    Eval(EvalArgs),
    /// Lexicon utilities.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Generate synthetic matrices for testing.
    Synth(SynthArgs),
    /// Print matrix statistics and NaC boundary intervals.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeName {
    /// Best path
    DecBp,
    /// Expression-constrained search
    DecCe,
    /// Dictionary-constrained search
    DecDm,
    /// Committee of dictionary decoders
    DecE,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeName,
    /// Manifest of `<id>\t<matrix>...[\tref=<file>]` records.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    manifest: Option<PathBuf>,
    /// Decode one matrix file and print its text.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Rule file for dec-ce (default: the built-in HTRtS rules).
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Also apply the expression rules in dec-dm.
    #[arg(long)]
    with_rules: bool,
    /// Beam width, or `inf` for an exhaustive search.
    #[arg(long, default_value_t = BeamWidth::default())]
    beam: BeamWidth,
    /// Lexicon file of `<count>\t<word>` lines (dec-dm, dec-e).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Weight of the unigram prior.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Per-word insertion bonus.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// `reject` or `pass-through-punctuation`.
    #[arg(long, default_value = "reject")]
    oov: OovPolicy,
    /// Committee size for dec-e (default: every expert in the manifest).
    #[arg(long)]
    experts: Option<usize>,
    /// Vote share weight against word confidence.
    #[arg(long, default_value_t = DEFAULT_VOTE_LAMBDA)]
    lambda: f64,
    /// Confidence assigned to NULL votes.
    #[arg(long, default_value_t = DEFAULT_NULL_CONFIDENCE)]
    null_conf: f64,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Hypotheses, plain lines or `<id>\t<text>`.
    #[arg(long)]
    hyp: PathBuf,
    /// References, plain lines or `<id>\t<text>`.
    #[arg(long)]
    r#ref: PathBuf,
    #[arg(long)]
    ignore_case: bool,
    #[arg(long)]
    ignore_punctuation: bool,
    /// Take the normalization alphabet from this matrix instead of the
    /// HTRtS preset.
    #[arg(long)]
    alphabet_from: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Count words in transcript files (one line per transcript).
    Build {
        /// Transcript files or directories of `*.txt` files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatName {
    Text,
    Binary,
}

impl From<FormatName> for MatrixFormat {
    fn from(f: FormatName) -> Self {
        match f {
            FormatName::Text => MatrixFormat::Text,
            FormatName::Binary => MatrixFormat::Binary,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Text of a single line.
    #[arg(long, conflicts_with = "lines", required_unless_present = "lines")]
    text: Option<String>,
    /// File with one line of text per record; writes a manifest directory.
    #[arg(long)]
    lines: Option<PathBuf>,
    /// Output matrix file (with --text) or directory (with --lines).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    frames_per_char: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Matrices per line, each with its own seed.
    #[arg(long, default_value_t = 1)]
    experts: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatName,
}

#[derive(Args)]
struct InspectArgs {
    matrix: PathBuf,
    /// NaC confidence at which a frame counts as a boundary.
    #[arg(long, default_value_t = DEFAULT_BOUNDARY_THRESHOLD)]
    threshold: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decode(args) => decode(args),
        Command::Eval(args) => eval(args),
        Command::Lexicon(LexiconCommand::Build { inputs, out }) => lexicon_build(&inputs, out.as_deref()),
        Command::Synth(args) => synth(args),
        Command::Inspect(args) => inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    let path = path.context("this scheme needs --lexicon")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Lexicon::parse(&text, LexiconPolicy::default()).with_context(|| format!("parsing {}", path.display()))
}

fn load_rules(path: Option<&Path>) -> Result<RuleConfig> {
    match path {
        None => Ok(RuleConfig::htrts()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            text.parse().with_context(|| format!("parsing {}", p.display()))
        }
    }
}

/// Alphabet of the first matrix that loads, falling back to the preset.
fn probe_alphabet(paths: &[&Path]) -> Arc<Alphabet> {
    paths
        .iter()
        .find_map(|p| load_matrix(p).ok())
        .map(|m| m.alphabet().clone())
        .unwrap_or_else(|| Arc::new(Alphabet::htrts()))
}

fn decode(args: DecodeArgs) -> Result<()> {
    let (manifest, single) = match (&args.manifest, &args.matrix) {
        (Some(path), _) => (
            Manifest::load(path).with_context(|| format!("loading manifest {}", path.display()))?,
            false,
        ),
        (None, Some(path)) => {
            let text = format!("-\t{}\n", path.display());
            (Manifest::parse(&text, Path::new(""))?, true)
        }
        (None, None) => bail!("need --manifest or --matrix"),
    };
    let firsts: Vec<&Path> = manifest.records.iter().map(|r| r.matrices[0].as_path()).collect();
    let params = DecodeParams {
        lm_weight: args.alpha,
        insertion_bonus: args.beta,
        beam: args.beam,
        oov: args.oov,
    };
    let model = |needed: bool| -> Result<Option<_>> {
        if !needed {
            return Ok(None);
        }
        let alphabet = probe_alphabet(&firsts);
        Ok(Some(compile_rules(&load_rules(args.rules.as_deref())?, alphabet)?))
    };
    let scheme = match args.scheme {
        SchemeName::DecBp => Scheme::BestPath,
        SchemeName::DecCe => Scheme::Expression {
            model: model(true)?.expect("model requested"),
            beam: args.beam,
        },
        SchemeName::DecDm => Scheme::Dictionary {
            lexicon: load_lexicon(args.lexicon.as_deref())?,
            params,
            model: model(args.with_rules)?,
        },
        SchemeName::DecE => {
            let experts = args.experts.unwrap_or(manifest.experts().max(1));
            let config = CommitteeConfig {
                lambda: args.lambda,
                null_confidence: args.null_conf,
                ..CommitteeConfig::new(experts)
            };
            config.validate()?;
            Scheme::Committee {
                lexicon: load_lexicon(args.lexicon.as_deref())?,
                params,
                config,
            }
        }
    };
    let lines = run_batch(&manifest, &scheme)?;
    let mut out = output(args.out.as_deref())?;
    if single {
        match &lines[0].result {
            Ok(h) => writeln!(out, "{}", h.text)?,
            Err(e) => bail!("{e}"),
        }
        out.flush()?;
    } else {
        write_batch(&lines, out)?;
    }
    let failed = lines.iter().filter(|l| l.result.is_err()).count();
    if failed > 0 {
        log::warn!("{failed} of {} lines failed", lines.len());
    }
    Ok(())
}

/// Plain lines, or `(id, text)` pairs when every non-empty line has a tab.
fn read_texts(path: &Path) -> Result<(Option<Vec<String>>, Vec<String>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let with_ids = !text.trim().is_empty() && text.lines().filter(|l| !l.is_empty()).all(|l| l.contains('\t'));
    if with_ids {
        let (ids, texts) = parse_hypothesis_file(&text)?.into_iter().unzip();
        Ok((Some(ids), texts))
    } else {
        Ok((None, text.lines().map(str::to_string).collect()))
    }
}

fn eval(args: EvalArgs) -> Result<()> {
    let alphabet = match &args.alphabet_from {
        Some(p) => load_matrix(p).with_context(|| format!("loading {}", p.display()))?.alphabet().clone(),
        None => Arc::new(Alphabet::htrts()),
    };
    let (hyp_ids, hyps) = read_texts(&args.hyp)?;
    let (ref_ids, refs) = read_texts(&args.r#ref)?;
    let hyps: Vec<String> = match (hyp_ids, ref_ids) {
        (Some(hyp_ids), Some(ref_ids)) => {
            let by_id: std::collections::HashMap<&str, &str> =
                hyp_ids.iter().map(String::as_str).zip(hyps.iter().map(String::as_str)).collect();
            ref_ids
                .iter()
                .map(|id| {
                    let h = by_id.get(id.as_str()).copied().unwrap_or_else(|| {
                        log::warn!("no hypothesis for {id}");
                        ""
                    });
                    // failed lines count as empty output
                    if h.starts_with("ERROR:") { String::new() } else { h.to_string() }
                })
                .collect()
        }
        (None, None) => hyps,
        _ => bail!("either both files carry line ids or neither does"),
    };
    let options = EvalOptions {
        ignore_case: args.ignore_case,
        ignore_punctuation: args.ignore_punctuation,
    };
    let report = evaluate_texts(&hyps, &refs, &alphabet, &options)?;
    print!("{}\n{}", report.to_table(), report.to_key_values());
    Ok(())
}

fn transcript_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "txt"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

fn lexicon_build(inputs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let alphabet = Alphabet::htrts();
    let mut corpus = Vec::new();
    for file in transcript_files(inputs)? {
        let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
        for line in text.lines() {
            let line = alphabet
                .normalize_transcript(line)
                .with_context(|| format!("normalizing {}", file.display()))?;
            corpus.push(line);
        }
    }
    let lexicon = build_lexicon(&corpus, &alphabet, LexiconPolicy::default())?;
    let mut w = output(out)?;
    w.write_all(lexicon.to_text().as_bytes())?;
    w.flush()?;
    log::info!("{} words, {} tokens", lexicon.len(), lexicon.total_count());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let alphabet = Arc::new(Alphabet::htrts());
    let format = MatrixFormat::from(args.format);
    if let Some(text) = &args.text {
        let m = generate_synthetic(text, &alphabet, args.frames_per_char, args.noise, args.seed)?;
        store_matrix(&m, &args.out, format)?;
        return Ok(());
    }
    let lines_path = args.lines.as_ref().expect("clap enforces --text or --lines");
    let lines = fs::read_to_string(lines_path).with_context(|| format!("reading {}", lines_path.display()))?;
    fs::create_dir_all(&args.out)?;
    let mut manifest = String::new();
    let mut refs = String::new();
    let ext = match format {
        MatrixFormat::Text => "ctc",
        MatrixFormat::Binary => "ctcb",
    };
    for (i, line) in lines.lines().enumerate() {
        let text = alphabet.normalize_transcript(line)?;
        let id = format!("line{:05}", i + 1);
        manifest.push_str(&id);
        for e in 0..args.experts {
            let seed = args.seed.wrapping_add((i * args.experts + e) as u64);
            let m = generate_synthetic(&text, &alphabet, args.frames_per_char, args.noise, seed)?;
            let name = format!("{id}.e{}.{ext}", e + 1);
            store_matrix(&m, args.out.join(&name), format)?;
            manifest.push('\t');
            manifest.push_str(&name);
        }
        manifest.push('\n');
        refs.push_str(&format!("{id}\t{text}\n"));
    }
    fs::write(args.out.join("manifest.tsv"), manifest)?;
    fs::write(args.out.join("refs.tsv"), refs)?;
    Ok(())
}

fn inspect(args: InspectArgs) -> Result<()> {
    let m = load_matrix(&args.matrix).with_context(|| format!("loading {}", args.matrix.display()))?;
    let alphabet = m.alphabet();
    let max_conf: Vec<f64> = m.rows().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let nac = m.nac_column();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let best = decode_best_path(&m);
    println!("frames\t{}", m.frames());
    println!("symbols\t{}", alphabet.len());
    println!("nac_column\t{}", alphabet.nac_index());
    println!("mean_max_confidence\t{:.6}", mean(&max_conf));
    println!("min_max_confidence\t{:.6}", max_conf.iter().copied().fold(1.0, f64::min));
    println!("mean_nac_confidence\t{:.6}", mean(&nac));
    println!("best_path\t{}", best.text);
    println!("best_path_log_score\t{:.6}", best.score);
    let boundaries = detect_boundaries(&m, args.threshold)?;
    println!("boundaries\t{}", boundaries.len());
    for b in boundaries {
        println!("boundary\t{}\t{}", b.start, b.end);
    }
    Ok(())
}
