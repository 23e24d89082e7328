//! The `lsmq` command-line tool. Exit status: 0 success, 1 usage or invalid
//! input, 2 numerical failure, 3 I/O or parse failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::frechet::{credible_radius, frechet_mean, FrechetConfig};
use crate::io::{
    align_for_display, coordinates_csv, csv_table, embed_mean, format_adjacency, format_matrix,
    parse_adjacency, parse_matrix, parse_names, parse_pairs, read_draws, read_file, write_draws, write_file,
};
use crate::link::LinkFunction;
use crate::quotient::{gram_of, CenteredFactor, Configuration, GramMatrix};
use crate::sim::{
    calibrate_intercept, expected_density, mh_sample, simulate_graph, simulate_template, Regime,
    SamplerConfig, SimulationSpec, GROUP_NAMES,
};
use crate::stats::pearson;
use crate::summaries::{
    all_pairs, dyad_summaries, node_uncertainty, nodewise_loss, posterior_predictive, reference_sensitivity,
    UncertaintyMethod,
};
use crate::tangent::tangent_residuals;

#[derive(Debug, Parser)]
#[command(
    name = "lsmq",
    version,
    about = "Rigid-motion invariant posterior summaries for latent space network models"
)]
struct Cli {
    /// Relative step tolerance for the Fréchet mean.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap for the Fréchet mean.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Well,
    Weak,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LinkArg {
    Logistic,
    Probit,
}

impl LinkArg {
    fn link(self) -> LinkFunction {
        match self {
            LinkArg::Logistic => LinkFunction::Logistic,
            LinkArg::Probit => LinkFunction::Probit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Empirical variances of the draws' distances.
    Mc,
    /// Delta method at the Fréchet mean.
    Delta,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a three-group template, calibrate the intercept, draw a graph.
    Simulate(SimulateArgs),
    /// Intercept giving a target expected density for fixed positions.
    Calibrate(CalibrateArgs),
    /// Run the Metropolis sampler on a graph.
    Sample(SampleArgs),
    /// Fréchet mean, variation and credible radii.
    Summarize(SummarizeArgs),
    /// Per-dyad distance and edge-probability summaries.
    Dyads(DyadsArgs),
    /// Node uncertainty, and node-wise loss against a true Gram matrix.
    Nodes(NodesArgs),
    /// Coordinates from a Gram matrix.
    Embed(EmbedArgs),
    /// Reference sensitivity of fixed-reference Procrustes means.
    Sensitivity(SensitivityArgs),
    /// Posterior predictive replicate graphs.
    Predictive(PredictiveArgs),
    /// Draws aligned to a mean factor, for plotting.
    Align(AlignArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prefix for the output files.
    #[arg(long = "out-prefix")]
    out_prefix: PathBuf,
    /// Group sizes `L,B,R`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
    link: LinkArg,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Position matrix file.
    #[arg(long)]
    positions: PathBuf,
    #[arg(long)]
    density: f64,
    #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
    link: LinkArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// JSON sampler configuration; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Number of retained draws.
    #[arg(long)]
    draws: Option<usize>,
    /// Draws file to write; intercepts and acceptance report go alongside.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SummarizeArgs {
    #[arg(long)]
    draws: PathBuf,
    /// Prefix for `.json`, `.mean_factor` and `.mean_gram`; JSON to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DyadsArgs {
    #[arg(long)]
    draws: PathBuf,
    /// File of `i j` lines; all pairs when omitted.
    #[arg(long, conflicts_with = "all")]
    pairs: Option<PathBuf>,
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Adds edge-probability columns; needs intercepts.
    #[arg(long, value_enum)]
    link: Option<LinkArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NodesArgs {
    #[arg(long)]
    draws: PathBuf,
    /// True Gram matrix file; adds the node-wise loss.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Node names, one per line.
    #[arg(long)]
    names: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Mc)]
    method: MethodArg,
    /// Number of highest-uncertainty nodes to list.
    #[arg(long, default_value_t = 3)]
    top: usize,
    /// Prefix for `.json` and `.csv`; JSON to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long)]
    names: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SensitivityArgs {
    #[arg(long)]
    draws: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictiveArgs {
    #[arg(long)]
    draws: PathBuf,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = LinkArg::Logistic)]
    link: LinkArg,
    /// Replicate `t` is written to `<prefix>.<t>.graph`, densities to `<prefix>.json`.
    #[arg(long = "out-prefix")]
    out_prefix: PathBuf,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long)]
    draws: PathBuf,
    /// Mean factor matrix file.
    #[arg(long)]
    mean: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command, returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprintln!("{e}");
                    eprintln!("{}", Cli::command().render_help());
                    1
                }
            };
        }
    };
    let result = match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {t} threads: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lsmq: {e}");
            e.exit_code()
        }
    }
}

struct Ctx {
    quiet: bool,
    frechet: FrechetConfig,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let mut frechet = FrechetConfig::default();
    if let Some(t) = cli.tol {
        frechet.tolerance = t;
    }
    if let Some(m) = cli.max_iter {
        frechet.max_iterations = m;
    }
    let ctx = Ctx {
        quiet: cli.quiet,
        frechet,
    };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Calibrate(a) => calibrate(a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Summarize(a) => summarize(&ctx, a),
        Command::Dyads(a) => dyads(a),
        Command::Nodes(a) => nodes(&ctx, a),
        Command::Embed(a) => embed(a),
        Command::Sensitivity(a) => sensitivity(a),
        Command::Predictive(a) => predictive(a),
        Command::Align(a) => align(a),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|_| "null".into());
    s.push('\n');
    s
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn read_names(path: Option<&PathBuf>, n: usize) -> Result<Option<Vec<String>>> {
    let Some(path) = path else { return Ok(None) };
    let names = parse_names(&read_file(path)?);
    if names.len() != n {
        return Err(Error::shape(
            format!("{n} names"),
            format!("{} names", names.len()),
        ));
    }
    Ok(Some(names))
}

fn simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<()> {
    let regime = match a.regime {
        RegimeArg::Well => Regime::Well,
        RegimeArg::Weak => Regime::Weak,
    };
    let mut spec = SimulationSpec::for_regime(regime);
    if let Some(s) = &a.sizes {
        let [l, b, r] = s[..] else {
            return Err(Error::invalid(format!(
                "--sizes needs three values, got {}",
                s.len()
            )));
        };
        spec.group_sizes = [l, b, r];
    }
    if let Some(d) = a.density {
        spec.target_density = d;
    }
    let link = a.link.link();
    let (x, labels) = simulate_template(&spec, a.seed)?;
    let alpha = calibrate_intercept(&x, spec.target_density, &link)?;
    let graph = simulate_graph(&x, alpha, &link, a.seed);
    ctx.note(format!(
        "simulated n = {}, alpha = {alpha:.6}, {} edges",
        x.n(),
        graph.edge_count()
    ));

    let p = &a.out_prefix;
    write_file(&with_suffix(p, ".positions"), &format_matrix(x.positions()))?;
    let labels_text: String = labels.iter().map(|&g| format!("{}\n", GROUP_NAMES[g])).collect();
    write_file(&with_suffix(p, ".labels"), &labels_text)?;
    write_file(&with_suffix(p, ".graph"), &format_adjacency(&graph))?;
    write_file(
        &with_suffix(p, ".truth.gram"),
        &format_matrix(gram_of(&x).as_matrix()),
    )?;
    let report = json!({
        "seed": a.seed,
        "regime": regime,
        "group_sizes": spec.group_sizes,
        "link": link.name(),
        "alpha": alpha,
        "target_density": spec.target_density,
        "expected_density": expected_density(&x, alpha, &link),
        "empirical_density": graph.density(),
    });
    write_file(&with_suffix(p, ".alpha.json"), &to_json(&report))
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let x = Configuration::new(parse_matrix(&read_file(&a.positions)?)?)?;
    let link = a.link.link();
    let alpha = calibrate_intercept(&x, a.density, &link)?;
    let report = json!({
        "link": link.name(),
        "alpha": alpha,
        "target_density": a.density,
        "expected_density": expected_density(&x, alpha, &link),
    });
    emit(a.out.as_deref(), &to_json(&report))
}

fn sample(ctx: &Ctx, a: &SampleArgs) -> Result<()> {
    let graph = parse_adjacency(&read_file(&a.graph)?)?;
    let mut config: SamplerConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_file(path)?).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?,
        None => SamplerConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(b) = a.burn_in {
        config.burn_in = b;
    }
    if let Some(t) = a.thin {
        config.thin = t;
    }
    if let Some(m) = a.draws {
        config.draws = m;
    }
    ctx.note(format!(
        "sampling n = {}, r = {}, {} sweeps",
        graph.n(),
        a.rank,
        config.burn_in + config.thin * config.draws
    ));
    let out = mh_sample(&graph, a.rank, &config)?;
    write_draws(&a.out, &out.draws)?;
    let report = json!({
        "seed": config.seed,
        "config": config,
        "n": graph.n(),
        "rank": a.rank,
        "draws": out.draws.len(),
        "acceptance_position": out.acceptance_position,
        "acceptance_alpha": out.acceptance_alpha,
        "initial_alpha": out.initial_alpha,
        "log_posterior": out.log_posterior,
    });
    write_file(&with_suffix(&a.out, ".acceptance.json"), &to_json(&report))
}

fn summarize(ctx: &Ctx, a: &SummarizeArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let res = frechet_mean(&draws, &ctx.frechet)?;
    if !res.converged {
        ctx.note(format!(
            "warning: Fréchet iteration stopped at the cap of {} iterations",
            res.iterations
        ));
    }
    let mut radii = serde_json::Map::new();
    for level in [0.5, 0.9, 0.95] {
        radii.insert(level.to_string(), json!(credible_radius(&res, level)?));
    }
    let report = json!({
        "n": draws.n(),
        "rank": draws.rank_bound(),
        "draws": draws.len(),
        "variation": res.variation,
        "credible_radius": radii,
        "iterations": res.iterations,
        "converged": res.converged,
        "stop_reason": res.stop_reason,
        "tolerance": ctx.frechet.tolerance,
        "max_iterations": ctx.frechet.max_iterations,
        "objective_trace": res.objective_trace,
        "per_draw_distances": res.per_draw_distances,
        "mean_gram": matrix_rows(res.mean_gram.as_matrix()),
        "mean_factor": matrix_rows(res.mean_factor.as_matrix()),
    });
    match &a.out {
        Some(p) => {
            write_file(
                &with_suffix(p, ".mean_factor"),
                &format_matrix(res.mean_factor.as_matrix()),
            )?;
            write_file(
                &with_suffix(p, ".mean_gram"),
                &format_matrix(res.mean_gram.as_matrix()),
            )?;
            write_file(&with_suffix(p, ".json"), &to_json(&report))
        }
        None => emit(None, &to_json(&report)),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn dyads(a: &DyadsArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let pairs = match &a.pairs {
        Some(path) => parse_pairs(&read_file(path)?)?,
        None => all_pairs(draws.n()),
    };
    let link = a.link.map(LinkArg::link);
    let table = dyad_summaries(&draws, &pairs, a.level, link.as_ref())?;
    let header = [
        "i",
        "j",
        "mean_distance",
        "median_distance",
        "var_distance",
        "ci_lo",
        "ci_hi",
        "mean_probability",
        "ci_prob_lo",
        "ci_prob_hi",
        "mean_link_effect",
    ];
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|s| {
            vec![
                s.i.to_string(),
                s.j.to_string(),
                s.mean_distance.to_string(),
                s.median_distance.to_string(),
                s.var_distance.to_string(),
                s.ci_lo.to_string(),
                s.ci_hi.to_string(),
                opt(s.mean_probability),
                opt(s.ci_prob_lo),
                opt(s.ci_prob_hi),
                opt(s.mean_link_effect),
            ]
        })
        .collect();
    emit(a.out.as_deref(), &csv_table(&header, &rows)?)
}

/// Indices of the `k` largest values, ties to the smaller index.
fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

fn nodes(ctx: &Ctx, a: &NodesArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let names = read_names(a.names.as_ref(), draws.n())?;
    let u = match a.method {
        MethodArg::Mc => node_uncertainty(&draws, UncertaintyMethod::MonteCarlo)?,
        MethodArg::Delta => {
            let fm = frechet_mean(&draws, &ctx.frechet)?;
            let sample = tangent_residuals(&fm.mean_factor, &draws)?;
            if !sample.excluded().is_empty() {
                ctx.note(format!(
                    "excluded {} rank-deficient draws from the delta method",
                    sample.excluded().len()
                ));
            }
            node_uncertainty(&draws, UncertaintyMethod::Delta(&sample))?
        }
    };
    let loss = match &a.truth {
        Some(path) => {
            let truth = GramMatrix::new(parse_matrix(&read_file(path)?)?, draws.rank_bound())?;
            Some(nodewise_loss(&draws, &truth)?)
        }
        None => None,
    };
    let label = |i: usize| names.as_ref().map_or_else(|| i.to_string(), |n| n[i].clone());
    let top: Vec<Value> = top_indices(&u.values, a.top.min(draws.n()))
        .into_iter()
        .map(|i| json!({"node": i, "name": label(i), "uncertainty": u.values[i]}))
        .collect();
    let nodes: Vec<Value> = (0..draws.n())
        .map(|i| {
            json!({
                "node": i,
                "name": label(i),
                "uncertainty": u.values[i],
                "loss": loss.as_ref().map(|l| l[i]),
            })
        })
        .collect();
    let report = json!({
        "method": u.method,
        "draws": draws.len(),
        "top_uncertainty": top,
        "uncertainty_loss_correlation": loss.as_ref().and_then(|l| pearson(&u.values, l)),
        "nodes": nodes,
    });
    match &a.out {
        Some(p) => {
            let rows: Vec<Vec<String>> = (0..draws.n())
                .map(|i| {
                    vec![
                        i.to_string(),
                        label(i),
                        u.values[i].to_string(),
                        opt(loss.as_ref().map(|l| l[i])),
                    ]
                })
                .collect();
            write_file(
                &with_suffix(p, ".csv"),
                &csv_table(&["node", "name", "uncertainty", "loss"], &rows)?,
            )?;
            write_file(&with_suffix(p, ".json"), &to_json(&report))
        }
        None => emit(None, &to_json(&report)),
    }
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let b = GramMatrix::new(parse_matrix(&read_file(&a.gram)?)?, a.rank)?;
    let names = read_names(a.names.as_ref(), b.n())?;
    emit(
        a.out.as_deref(),
        &coordinates_csv(&embed_mean(&b), names.as_deref())?,
    )
}

fn sensitivity(a: &SensitivityArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let res = reference_sensitivity(&draws, a.k, a.seed)?;
    let report = json!({
        "seed": a.seed,
        "s_ref": res.s_ref,
        "k": res.k,
        "reference_indices": res.reference_indices,
        "pairwise_gaps": res.pairwise_gaps,
    });
    emit(a.out.as_deref(), &to_json(&report))
}

fn predictive(a: &PredictiveArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let link = a.link.link();
    let reps = posterior_predictive(&draws, &link, a.count, a.seed)?;
    let width = (reps.len().max(2) - 1).to_string().len();
    for (t, g) in reps.iter().enumerate() {
        write_file(
            &with_suffix(&a.out_prefix, &format!(".{t:0width$}.graph")),
            &format_adjacency(g),
        )?;
    }
    let densities: Vec<f64> = reps.iter().map(|g| g.density()).collect();
    let report = json!({
        "seed": a.seed,
        "link": link.name(),
        "count": a.count,
        "mean_density": crate::stats::mean(&densities),
        "densities": densities,
    });
    write_file(&with_suffix(&a.out_prefix, ".json"), &to_json(&report))
}

fn align(a: &AlignArgs) -> Result<()> {
    let draws = read_draws(&a.draws)?;
    let mean = CenteredFactor::recentered(parse_matrix(&read_file(&a.mean)?)?);
    let tables = align_for_display(&draws, &mean)?;
    let r = draws.rank_bound();
    let mut header = vec!["draw".to_string(), "node".to_string()];
    header.extend((1..=r).map(|k| format!("x{k}")));
    let rows: Vec<Vec<String>> = tables
        .iter()
        .enumerate()
        .flat_map(|(m, t)| {
            t.row_iter()
                .enumerate()
                .map(move |(i, row)| {
                    let mut cells = vec![m.to_string(), i.to_string()];
                    cells.extend(row.iter().map(|v| v.to_string()));
                    cells
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    emit(a.out.as_deref(), &csv_table(&header, &rows)?)
}
