mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{float, print_json, table, Csv};
use semaxis::decomposition::{
    axis_top_words, normalize_rows, sem_decompose, top_p_indices, top_p_sum, NormalizedEmbeddings,
};
use semaxis::diagnostics::{
    component_distribution, norm_rank_correlation, product_distribution, rank_analysis,
    sample_pair_cosines, sorted_profiles, DistributionReport, ProfileMode, DEFAULT_SAMPLES,
};
use semaxis::eval::{run_suite, SuiteConfig};
use semaxis::io::{read_embedding_text, write_cache};
use semaxis::retrieval::{
    ablate, analogy_query, analogy_search_topp, make_ideal, search_topk, ExcludePolicy, Hit,
};
use semaxis::transform::{
    load_transformed, save_transformed, IcaParams, Pipeline, Space, TransformedEmbeddings,
};

const EXIT_USAGE: u8 = 2;
const EXIT_LOOKUP: u8 = 3;
const EXIT_MISSING: u8 = 4;
const EXIT_NUMERIC: u8 = 5;

#[derive(Parser)]
#[command(name = "semaxis", version, about = "Interpretable semantic axes for word embeddings")]
struct Cli {
    /// Directory holding pca.semx and ica.semx.
    #[arg(long, global = true, env = "SEMAXIS_CACHE_DIR", default_value = ".")]
    cache_dir: PathBuf,

    /// Print a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit centering, whitening and ICA; write raw, PCA and ICA caches.
    Transform(TransformArgs),
    /// Top words on one axis.
    InspectAxis(InspectArgs),
    /// Per-axis products of two normalized word vectors.
    Decompose(DecomposeArgs),
    /// Nearest words to the equal-weight combination of some axes.
    Search(SearchArgs),
    /// Nearest words to a word with one axis zeroed.
    Ablate(AblateArgs),
    /// `b − a + c` analogy with top-p scoring.
    Analogy(AnalogyArgs),
    /// Word-similarity and analogy benchmarks from a TOML suite.
    Eval(EvalArgs),
    /// Rank, profile and distribution diagnostics.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct TransformArgs {
    /// Embedding text file (`word v1 ... vd` per line).
    #[arg(long)]
    input: PathBuf,
    /// Expected dimension; inferred from the first line when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    #[arg(long, default_value_t = 1e-10, value_parser = positive_float)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to the cache directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SpaceArg {
    #[arg(long, value_enum, default_value_t = SpaceChoice::Ica)]
    space: SpaceChoice,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceChoice {
    Pca,
    Ica,
}

impl From<SpaceChoice> for Space {
    fn from(s: SpaceChoice) -> Self {
        match s {
            SpaceChoice::Pca => Space::Pca,
            SpaceChoice::Ica => Space::Ica,
        }
    }
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    axis: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Human-supplied label attached to the report.
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long, visible_alias = "word-a")]
    a: String,
    #[arg(long, visible_alias = "word-b")]
    b: String,
    /// Report only the `p` largest products.
    #[arg(long)]
    top_p: Option<usize>,
    /// CSV of (axis, product) for plotting.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct SearchArgs {
    /// Comma-separated axis indices.
    #[arg(long, value_delimiter = ',', required = true)]
    axes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    word: String,
    #[arg(long)]
    axis: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct AnalogyArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long)]
    c: String,
    /// Axes used for scoring; all axes when omitted.
    #[arg(long)]
    p: Option<usize>,
    /// Allow the query words themselves as answers.
    #[arg(long)]
    no_exclude: bool,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    suite: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(value_enum)]
    kind: DiagnoseKind,
    /// Axis for `ranks`.
    #[arg(long, default_value_t = 0)]
    axis: usize,
    /// Words on the axis used for the norm/rank correlation.
    #[arg(long, default_value_t = 100)]
    top: usize,
    /// Lanes for `profiles`.
    #[arg(long, value_enum, default_value_t = ModeChoice::PerAxis)]
    mode: ModeChoice,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    space: SpaceArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagnoseKind {
    Ranks,
    Profiles,
    CosineDist,
    ComponentDist,
    ProductDist,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeChoice {
    PerAxis,
    PerEmbedding,
}

fn positive_float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

/// An error that already knows its exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit_code(e: &anyhow::Error) -> u8 {
    use semaxis::Error as E;
    if let Some(x) = e.downcast_ref::<Exit>() {
        return x.code;
    }
    match e.downcast_ref::<E>() {
        Some(E::UnknownWord(_) | E::IndexOutOfRange { .. }) => EXIT_LOOKUP,
        Some(E::InvalidArgument(_)) => EXIT_USAGE,
        Some(E::Numeric(_) | E::RankDeficient { .. } | E::ZeroNorm { .. }) => EXIT_NUMERIC,
        Some(E::Io(io)) if io.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING,
        _ => 1,
    }
}

fn require(path: &Path, what: &str) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Exit {
            code: EXIT_MISSING,
            message: format!("{what} not found: {}", path.display()),
        }
        .into())
    }
}

fn cache_file(dir: &Path, space: Space) -> PathBuf {
    dir.join(format!("{space}.semx"))
}

fn load_space(dir: &Path, space: Space) -> anyhow::Result<TransformedEmbeddings> {
    let path = cache_file(dir, space);
    require(&path, &format!("{space} cache (run `semaxis transform` first)"))?;
    let (t, _) = load_transformed(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(t)
}

struct Loaded {
    raw: TransformedEmbeddings,
    norm: NormalizedEmbeddings,
}

fn load(dir: &Path, space: Space) -> anyhow::Result<Loaded> {
    let raw = load_space(dir, space)?;
    let norm = normalize_rows(&raw)?;
    Ok(Loaded { raw, norm })
}

fn hits_table(hits: &[Hit]) -> String {
    let rows: Vec<Vec<String>> = hits
        .iter()
        .enumerate()
        .map(|(r, h)| vec![(r + 1).to_string(), h.word.clone(), h.index.to_string(), format!("{:.6}", h.score)])
        .collect();
    table(&["rank", "word", "index", "score"], &rows)
}

#[derive(Serialize)]
struct TransformSummary<'a> {
    input: &'a Path,
    words: usize,
    dim: usize,
    duplicates: usize,
    iterations: usize,
    converged: bool,
    max_iter: usize,
    tolerance: f64,
    seed: u64,
    skewness_min: f64,
    skewness_max: f64,
    skewness: Vec<f64>,
    files: Vec<PathBuf>,
}

fn cmd_transform(cli: &Cli, a: &TransformArgs) -> anyhow::Result<()> {
    let parsed = read_embedding_text(&a.input, a.dim)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let params = IcaParams {
        max_iter: a.max_iter as usize,
        tolerance: a.tol,
        seed: a.seed,
    };
    let p = Pipeline::fit(&parsed.embeddings, params)?;
    let dir = a.out_dir.clone().unwrap_or_else(|| cli.cache_dir.clone());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let raw = dir.join("raw.semx");
    write_cache(&parsed.embeddings, &raw)?;
    let mut files = vec![raw];
    for space in [Space::Pca, Space::Ica] {
        let path = cache_file(&dir, space);
        save_transformed(p.space(space), &p.transform(space), &path)?;
        files.push(path);
    }
    let skew = p.ica.axis_skewness.to_vec();
    let summary = TransformSummary {
        input: &a.input,
        words: parsed.embeddings.n(),
        dim: parsed.embeddings.dim(),
        duplicates: parsed.duplicates,
        iterations: p.ica.n_iterations_used,
        converged: p.ica.converged,
        max_iter: p.ica.max_iter,
        tolerance: p.ica.tolerance,
        seed: p.ica.seed,
        skewness_min: skew.iter().cloned().fold(f64::INFINITY, f64::min),
        skewness_max: skew.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        skewness: skew,
        files,
    };
    if !summary.converged {
        eprintln!("warning: FastICA stopped at the iteration cap without converging");
    }
    if cli.pretty {
        println!(
            "{} words x {} dims ({} duplicates skipped)\nFastICA: {} iterations, converged: {}\nskewness: max {:.4}, min {:.4}",
            summary.words,
            summary.dim,
            summary.duplicates,
            summary.iterations,
            summary.converged,
            summary.skewness_max,
            summary.skewness_min
        );
        for f in &summary.files {
            println!("wrote {}", f.display());
        }
        Ok(())
    } else {
        print_json(&summary)
    }
}

fn cmd_inspect(cli: &Cli, a: &InspectArgs) -> anyhow::Result<()> {
    let l = load(&cli.cache_dir, a.space.space.into())?;
    let mut rep = axis_top_words(&l.norm, a.axis, a.k)?;
    if let Some(label) = &a.label {
        rep = rep.with_label(label.clone());
    }
    if cli.pretty {
        let rows: Vec<Vec<String>> = rep
            .top_entries
            .iter()
            .enumerate()
            .map(|(r, e)| vec![(r + 1).to_string(), e.word.clone(), format!("{:.6}", e.value)])
            .collect();
        let title = match &rep.label {
            Some(label) => format!("axis {} [{label}]", rep.axis),
            None => format!("axis {}", rep.axis),
        };
        println!("{title}\n{}", table(&["rank", "word", "value"], &rows));
        Ok(())
    } else {
        print_json(&rep)
    }
}

#[derive(Serialize)]
struct DecomposeOutput<'a> {
    space: Space,
    word_a: &'a str,
    word_b: &'a str,
    /// Axes in descending product order.
    axes: Vec<usize>,
    products: Vec<f64>,
    /// Sum over the listed axes.
    top_p_sum: f64,
    /// Cosine similarity (sum over all axes).
    total: f64,
}

fn cmd_decompose(cli: &Cli, a: &DecomposeArgs) -> anyhow::Result<()> {
    let space = a.space.space.into();
    let l = load(&cli.cache_dir, space)?;
    let (i, j) = (l.norm.lookup(&a.a)?, l.norm.lookup(&a.b)?);
    let dec = sem_decompose(&l.norm, i, j)?;
    let p = a.top_p.unwrap_or(l.norm.dim());
    let axes = top_p_indices(&dec, p)?;
    let out = DecomposeOutput {
        space,
        word_a: &a.a,
        word_b: &a.b,
        products: axes.iter().map(|&x| dec.products[x]).collect(),
        top_p_sum: top_p_sum(&dec, p)?,
        total: dec.total,
        axes,
    };
    if let Some(path) = &a.out {
        let mut csv = Csv::new(&["axis", "product"]);
        for (k, v) in dec.products.iter().enumerate() {
            csv.row([k.to_string(), float(*v)]);
        }
        csv.write(path)?;
    }
    if cli.pretty {
        let rows: Vec<Vec<String>> = out
            .axes
            .iter()
            .zip(&out.products)
            .map(|(x, v)| vec![x.to_string(), format!("{v:.6}")])
            .collect();
        println!(
            "{} / {} in {space} space: cosine {:.6}, top-{p} sum {:.6}\n{}",
            a.a,
            a.b,
            out.total,
            out.top_p_sum,
            table(&["axis", "product"], &rows)
        );
        Ok(())
    } else {
        print_json(&out)
    }
}

#[derive(Serialize)]
struct SearchOutput {
    axes: Vec<usize>,
    weight: f64,
    hits: Vec<Hit>,
}

fn cmd_search(cli: &Cli, a: &SearchArgs) -> anyhow::Result<()> {
    let l = load(&cli.cache_dir, a.space.space.into())?;
    let ideal = make_ideal(&a.axes, l.norm.dim())?;
    let hits = search_topk(ideal.vector.view(), &l.norm, a.k, &[])?;
    if cli.pretty {
        println!("axes {:?}, weight {:.6}\n{}", ideal.axes, ideal.weight, hits_table(&hits));
        Ok(())
    } else {
        print_json(&SearchOutput {
            axes: ideal.axes,
            weight: ideal.weight,
            hits,
        })
    }
}

#[derive(Serialize)]
struct AblateOutput<'a> {
    word: &'a str,
    zeroed_axis: usize,
    removed_component: f64,
    hits: Vec<Hit>,
}

fn cmd_ablate(cli: &Cli, a: &AblateArgs) -> anyhow::Result<()> {
    let l = load(&cli.cache_dir, a.space.space.into())?;
    let w = l.norm.lookup(&a.word)?;
    let abl = ablate(&l.norm, w, a.axis)?;
    let hits = search_topk(abl.vector.view(), &l.norm, a.k, &[w])?;
    if cli.pretty {
        println!("{} with axis {} zeroed\n{}", a.word, a.axis, hits_table(&hits));
        Ok(())
    } else {
        print_json(&AblateOutput {
            word: &a.word,
            zeroed_axis: a.axis,
            removed_component: l.norm.row(w)[a.axis],
            hits,
        })
    }
}

#[derive(Serialize)]
struct AnalogyOutput<'a> {
    a: &'a str,
    b: &'a str,
    c: &'a str,
    p: usize,
    exclude_policy: ExcludePolicy,
    answer: Hit,
}

fn cmd_analogy(cli: &Cli, a: &AnalogyArgs) -> anyhow::Result<()> {
    let l = load(&cli.cache_dir, a.space.space.into())?;
    let (i1, i2, i3) = (l.norm.lookup(&a.a)?, l.norm.lookup(&a.b)?, l.norm.lookup(&a.c)?);
    let q = analogy_query(&l.raw, i1, i2, i3)?;
    let p = a.p.unwrap_or(l.norm.dim());
    let policy = if a.no_exclude {
        ExcludePolicy::None
    } else {
        ExcludePolicy::ExcludeQueryWords
    };
    let hit = analogy_search_topp(&q, &l.norm, p, policy)?;
    if cli.pretty {
        println!("{} : {} :: {} : {}  (score {:.6}, p = {p})", a.a, a.b, a.c, hit.word, hit.score);
        Ok(())
    } else {
        print_json(&AnalogyOutput {
            a: &a.a,
            b: &a.b,
            c: &a.c,
            p,
            exclude_policy: policy,
            answer: hit,
        })
    }
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> anyhow::Result<()> {
    require(&a.suite, "suite config")?;
    let cfg = SuiteConfig::read(&a.suite).with_context(|| format!("reading {}", a.suite.display()))?;
    for path in cfg.wordsim.iter().chain(&cfg.analogy) {
        require(path, "benchmark file")?;
    }
    let spaces = cfg
        .spaces
        .iter()
        .map(|&s| load_space(&cli.cache_dir, s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let report = run_suite(&cfg, &spaces)?;
    if let Some(path) = &a.out {
        std::fs::write(path, output::to_json(&report, true)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.pretty {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.task.clone(),
                    r.space.to_string(),
                    r.p.to_string(),
                    format!("{:.4}", r.score),
                    r.used.to_string(),
                    r.skipped.to_string(),
                ]
            })
            .collect();
        println!("{}", table(&["task", "space", "p", "score", "used", "skipped"], &rows));
        Ok(())
    } else {
        print_json(&report)
    }
}

#[derive(Serialize)]
struct DistributionSummary {
    kind: &'static str,
    space: Space,
    sample_size: usize,
    seed: u64,
    mean: f64,
    variance: f64,
    inverse_variance: f64,
    expected_inverse_variance: f64,
    discrepancy: f64,
}

fn distribution_csv(r: &DistributionReport) -> Csv {
    let mut csv = Csv::new(&["bin_lo", "bin_hi", "empirical_density", "theoretical_density", "density_at_center"]);
    for b in &r.bins {
        csv.row([
            float(b.lo),
            float(b.hi),
            float(b.empirical_density),
            float(b.theoretical_density),
            float(b.density_at_center),
        ]);
    }
    csv
}

#[derive(Serialize)]
struct RanksSummary {
    axis: usize,
    top: usize,
    norm_rank_spearman: Option<f64>,
}

fn cmd_diagnose(cli: &Cli, a: &DiagnoseArgs) -> anyhow::Result<()> {
    let space: Space = a.space.space.into();
    let l = load(&cli.cache_dir, space)?;
    let (csv, json) = match a.kind {
        DiagnoseKind::Ranks => {
            let recs = rank_analysis(l.raw.data().view(), a.axis, l.norm.original_norms().as_slice().unwrap())?;
            let mut csv = Csv::new(&["word", "norm", "rank_in_axis", "rank_in_embedding"]);
            let mut sorted = recs.clone();
            sorted.sort_by_key(|r| r.rank_in_axis);
            for r in &sorted {
                csv.row([
                    l.norm.vocab().word(r.word).to_owned(),
                    float(r.norm),
                    r.rank_in_axis.to_string(),
                    r.rank_in_embedding.to_string(),
                ]);
            }
            let rho = norm_rank_correlation(&recs, a.top.min(recs.len())).ok();
            let summary = RanksSummary {
                axis: a.axis,
                top: a.top,
                norm_rank_spearman: rho,
            };
            (csv, output::to_json(&summary, true)?)
        }
        DiagnoseKind::Profiles => {
            let mode = match a.mode {
                ModeChoice::PerAxis => ProfileMode::PerAxis,
                ModeChoice::PerEmbedding => ProfileMode::PerEmbedding,
            };
            let prof = sorted_profiles(l.norm.data().view(), mode)?;
            let mut csv = Csv::new(&["position", "mean", "sigma"]);
            for (k, (m, s)) in prof.mean.iter().zip(&prof.sigma).enumerate() {
                csv.row([(k + 1).to_string(), float(*m), float(*s)]);
            }
            (csv, output::to_json(&prof, true)?)
        }
        kind => {
            let (name, rep) = match kind {
                DiagnoseKind::CosineDist => ("cosine", sample_pair_cosines(&l.norm, a.samples, a.seed)?),
                DiagnoseKind::ComponentDist => ("component", component_distribution(&l.norm, a.samples, a.seed)?),
                _ => ("product", product_distribution(&l.norm, a.samples, a.seed)?),
            };
            let summary = DistributionSummary {
                kind: name,
                space,
                sample_size: rep.sample_size,
                seed: a.seed,
                mean: rep.mean,
                variance: rep.variance,
                inverse_variance: rep.inverse_variance,
                expected_inverse_variance: rep.expected_inverse_variance(),
                discrepancy: rep.discrepancy,
            };
            (distribution_csv(&rep), output::to_json(&summary, true)?)
        }
    };
    match &a.out {
        Some(path) => csv.write(path).with_context(|| format!("writing {}", path.display()))?,
        None if cli.pretty => print!("{}", csv.as_str()),
        None => {}
    }
    if !cli.pretty || a.out.is_some() {
        println!("{json}");
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Transform(a) => cmd_transform(cli, a),
        Command::InspectAxis(a) => cmd_inspect(cli, a),
        Command::Decompose(a) => cmd_decompose(cli, a),
        Command::Search(a) => cmd_search(cli, a),
        Command::Ablate(a) => cmd_ablate(cli, a),
        Command::Analogy(a) => cmd_analogy(cli, a),
        Command::Eval(a) => cmd_eval(cli, a),
        Command::Diagnose(a) => cmd_diagnose(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
