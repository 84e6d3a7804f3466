//! Experiment runner behind the `expass` binary: configuration, the five
//! commands, CSV and SVG output.

mod checkpoint;
mod config;
mod svg;
mod theory;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::explain::{explain_graph, graph_seed, precision_at_k, topk_count, write_dump, ExplainerKind};
use crate::graph::{spectral_pack, split, Graph, GraphSet, Split, MOTIF_SIZE};
use crate::layers::{infer, init_params, EdgeWeights, ModelParams};
use crate::metrics::{dirichlet_energy, f1_score, gdr, gef_protocol, SplitTag};
use crate::train::{evaluate, positive_auroc, train, TrainOutput};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use config::ExperimentConfig;
pub use svg::{line_chart, Series};
pub use theory::{theory_suite, TheoryReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Train,
    Oversmoothing,
    AblateTopk,
    Explain,
    Theory,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Train,
        Command::Oversmoothing,
        Command::AblateTopk,
        Command::Explain,
        Command::Theory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Oversmoothing => "oversmoothing",
            Self::AblateTopk => "ablate-topk",
            Self::Explain => "explain",
            Self::Theory => "theory",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Training regime of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Vanilla,
    Expass,
    DropEdge,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vanilla => "vanilla",
            Self::Expass => "expass",
            Self::DropEdge => "dropedge",
        }
    }
}

/// One training run of a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Job {
    pub variant: Variant,
    pub seed: u64,
    pub depth: usize,
    pub topk: f64,
    pub dropedge_p: f64,
}

/// Test-split measurements of a trained model.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TestMetrics {
    pub loss: f64,
    pub auroc: Option<f64>,
    pub f1: f64,
    pub gef: Option<f64>,
    /// GDR of the pooled readout embeddings.
    pub gdr: Option<f64>,
    /// GDR of the mean-pooled embeddings after each layer.
    pub gdr_layers: Vec<Option<f64>>,
    /// Mean Dirichlet energy over test graphs after each layer.
    pub dirichlet_layers: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct JobResult {
    pub job: Job,
    pub output: TrainOutput,
    pub test: TestMetrics,
}

/// Files written and lines to print. `violations` is nonzero only when the
/// theory suite finds a failing asserted bound.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: Vec<String>,
    pub violations: usize,
}

/// Process exit code for an error: 2 for configuration and checkpoint
/// problems, 3 for dataset problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Checkpoint(_) | Error::Json(_) => 2,
        Error::Parse { .. } | Error::MissingFile(_) | Error::Stratification(_) => 3,
        _ => 1,
    }
}

/// Worker pool capped by `EXPASS_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("EXPASS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("EXPASS_THREADS={v:?} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Validates `cfg`, then runs `cmd` on the worker pool, writing under
/// `cfg.out_dir`.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    if matches!(cmd, Command::AblateTopk | Command::Explain) && cfg.explainer == ExplainerKind::None {
        return Err(Error::Config(format!("{cmd} needs an explainer")));
    }
    if cmd == Command::Explain && cfg.checkpoints.is_empty() {
        return Err(Error::Config("explain needs at least one checkpoint".into()));
    }
    let pool = worker_pool()?;
    fs::create_dir_all(&cfg.out_dir)?;
    pool.install(|| match cmd {
        Command::Train => cmd_train(cfg),
        Command::Oversmoothing => cmd_oversmoothing(cfg),
        Command::AblateTopk => cmd_ablate_topk(cfg),
        Command::Explain => cmd_explain(cfg),
        Command::Theory => cmd_theory(cfg),
    })
}

fn graphs_of<'a>(set: &'a GraphSet, ids: &[usize]) -> Vec<&'a Graph> {
    ids.iter().map(|&i| &set.graphs()[i]).collect()
}

/// Trains one job and measures it on the test split. GEF is computed when
/// `with_gef`, GDR and Dirichlet energy when `with_smoothing`.
pub fn run_job(
    cfg: &ExperimentConfig,
    set: &GraphSet,
    job: Job,
    with_gef: bool,
    with_smoothing: bool,
) -> Result<JobResult> {
    let sp = split(set, cfg.split, job.seed)?;
    let init = init_params(cfg.arch, cfg.dims(set, job.depth), job.seed)?;
    let explainer = match job.variant {
        Variant::Expass => cfg.explainer,
        _ => ExplainerKind::None,
    };
    let tcfg = cfg.train_config(job.seed, explainer, job.topk, job.dropedge_p);
    let output = train(init, set, &sp, &tcfg)?;
    let test = test_metrics(cfg, set, &sp, &output.params, job.seed, with_gef, with_smoothing)?;
    log::info!(
        "{} seed {} depth {} topk {}: test auroc {:?} f1 {:.3}",
        job.variant.name(),
        job.seed,
        job.depth,
        job.topk,
        test.auroc,
        test.f1
    );
    Ok(JobResult { job, output, test })
}

/// Runs `jobs` in parallel; results keep the order of `jobs`.
pub fn run_jobs(
    cfg: &ExperimentConfig,
    set: &GraphSet,
    jobs: &[Job],
    with_gef: bool,
    with_smoothing: bool,
) -> Result<Vec<JobResult>> {
    jobs.par_iter()
        .map(|&j| run_job(cfg, set, j, with_gef, with_smoothing))
        .collect()
}

pub fn test_metrics(
    cfg: &ExperimentConfig,
    set: &GraphSet,
    sp: &Split,
    params: &ModelParams,
    seed: u64,
    with_gef: bool,
    with_smoothing: bool,
) -> Result<TestMetrics> {
    let test = graphs_of(set, &sp.test);
    let labels: Vec<usize> = test.iter().map(|g| g.label()).collect();
    let eval = evaluate(params, &test, None)?;
    let mut m = TestMetrics {
        loss: eval.loss,
        auroc: positive_auroc(&eval, &labels),
        f1: f1_score(&eval.predictions, &labels, cfg.f1_average, set.num_classes()),
        ..TestMetrics::default()
    };
    if with_gef && cfg.gef_explainer != ExplainerKind::None {
        let pairs: Vec<(usize, &Graph)> = sp.test.iter().map(|&i| (i, &set.graphs()[i])).collect();
        m.gef = Some(gef_protocol(
            params,
            &pairs,
            cfg.gef_explainer,
            &cfg.explainer_config(),
            cfg.eval_topk(),
            seed,
        )?);
    }
    if with_smoothing {
        let (gdr_final, gdr_layers, dirichlet_layers) = smoothing(params, &test, &labels)?;
        m.gdr = gdr_final;
        m.gdr_layers = gdr_layers;
        m.dirichlet_layers = dirichlet_layers;
    }
    Ok(m)
}

type SmoothingStats = (Option<f64>, Vec<Option<f64>>, Vec<f64>);

fn smoothing(params: &ModelParams, graphs: &[&Graph], labels: &[usize]) -> Result<SmoothingStats> {
    let depth = params.depth();
    let hidden = params.hidden_dim();
    let mut pooled = vec![Vec::with_capacity(graphs.len() * hidden); depth];
    let mut readout = Vec::with_capacity(graphs.len() * hidden);
    let mut energy = vec![0.0; depth];
    for g in graphs {
        let inf = infer(params, g, &EdgeWeights::ones(g))?;
        let pack = spectral_pack(g)?;
        for (l, h) in inf.embeddings.iter().enumerate() {
            energy[l] += dirichlet_energy(h, &pack)?;
            let n = h.rows().max(1) as f64;
            pooled[l].extend((0..h.cols()).map(|c| (0..h.rows()).map(|r| h.get(r, c)).sum::<f64>() / n));
        }
        readout.extend_from_slice(inf.pooled.data());
    }
    let k = graphs.len();
    let layer_gdr = pooled
        .into_iter()
        .map(|p| Tensor::new(k, hidden, p).ok().and_then(|t| gdr(&t, labels).ok()))
        .collect();
    let width = if k == 0 { 0 } else { readout.len() / k };
    let final_gdr = Tensor::new(k, width, readout).ok().and_then(|t| gdr(&t, labels).ok());
    let denom = k.max(1) as f64;
    Ok((final_gdr, layer_gdr, energy.into_iter().map(|e| e / denom).collect()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn joined(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(";")
}

/// Mean and standard error (sample deviation over √n; 0 for one value).
pub fn mean_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn write_svg(path: &Path, svg: String, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(path, svg)?;
    files.push(path.to_path_buf());
    Ok(())
}

fn train_variants(cfg: &ExperimentConfig) -> Vec<Variant> {
    let mut v = vec![Variant::Vanilla];
    if cfg.explainer != ExplainerKind::None {
        v.push(Variant::Expass);
    }
    if cfg.dropedge_p > 0.0 {
        v.push(Variant::DropEdge);
    }
    v
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = cfg.load_dataset()?;
    let variants = train_variants(cfg);
    let jobs: Vec<Job> = variants
        .iter()
        .flat_map(|&variant| {
            cfg.seeds.iter().map(move |&seed| Job {
                variant,
                seed,
                depth: cfg.depth,
                topk: cfg.topk,
                dropedge_p: if variant == Variant::DropEdge { cfg.dropedge_p } else { 0.0 },
            })
        })
        .collect();
    let results = run_jobs(cfg, &set, &jobs, true, false)?;
    let out = &cfg.out_dir;
    let arch = cfg.arch.name();
    let mut files = Vec::new();

    let metrics_path = out.join("metrics.csv");
    let mut w = writer(&metrics_path)?;
    w.write_record(["arch", "variant", "seed", "epoch", "split", "loss", "auroc", "f1", "gef", "masked_graph_count"])?;
    for r in &results {
        let v = r.job.variant.name();
        for rec in &r.output.records {
            w.write_record([
                arch.to_string(),
                v.to_string(),
                rec.seed.to_string(),
                rec.epoch.to_string(),
                rec.split.to_string(),
                rec.loss.to_string(),
                opt(rec.auroc),
                rec.f1.to_string(),
                opt(rec.gef),
                rec.masked_graph_count.to_string(),
            ])?;
        }
        let masked = r.output.masks.iter().filter(|m| m.is_some()).count();
        w.write_record([
            arch.to_string(),
            v.to_string(),
            r.job.seed.to_string(),
            cfg.epochs.to_string(),
            SplitTag::Test.to_string(),
            r.test.loss.to_string(),
            opt(r.test.auroc),
            r.test.f1.to_string(),
            opt(r.test.gef),
            masked.to_string(),
        ])?;
    }
    w.flush()?;
    files.push(metrics_path);

    let summary_path = out.join("summary.csv");
    let mut w = writer(&summary_path)?;
    w.write_record([
        "arch", "variant", "n_seeds", "auroc_mean", "auroc_stderr", "f1_mean", "f1_stderr", "gef_mean", "gef_stderr",
    ])?;
    let mut report = Vec::new();
    for &variant in &variants {
        let rs: Vec<&JobResult> = results.iter().filter(|r| r.job.variant == variant).collect();
        let au: Vec<f64> = rs.iter().filter_map(|r| r.test.auroc).collect();
        let f1: Vec<f64> = rs.iter().map(|r| r.test.f1).collect();
        let gef: Vec<f64> = rs.iter().filter_map(|r| r.test.gef).collect();
        let (am, ase) = split_opt(mean_stderr(&au));
        let (fm, fse) = split_opt(mean_stderr(&f1));
        let (gm, gse) = split_opt(mean_stderr(&gef));
        w.write_record([
            arch.to_string(),
            variant.name().to_string(),
            rs.len().to_string(),
            opt(am),
            opt(ase),
            opt(fm),
            opt(fse),
            opt(gm),
            opt(gse),
        ])?;
        report.push(format!(
            "{arch} {}: auroc {} f1 {} gef {}",
            variant.name(),
            pm(am, ase),
            pm(fm, fse),
            pm(gm, gse)
        ));
    }
    w.flush()?;
    files.push(summary_path);

    for r in &results {
        let stem = format!("{arch}_{}_seed{}", r.job.variant.name(), r.job.seed);
        for (epoch, params) in &r.output.checkpoints {
            let p = out.join("checkpoints").join(format!("{stem}_epoch{epoch}.ckpt"));
            save_checkpoint(&p, params, *epoch)?;
            files.push(p);
        }
        if !cfg.checkpoint_epochs.contains(&cfg.epochs) {
            let p = out.join("checkpoints").join(format!("{stem}_epoch{}.ckpt", cfg.epochs));
            save_checkpoint(&p, &r.output.params, cfg.epochs)?;
            files.push(p);
        }
        if !r.output.explanations.is_empty() {
            let p = out.join(format!("explanations_{stem}.csv"));
            let rows: Vec<_> = r
                .output
                .explanations
                .iter()
                .map(|e| (&set.graphs()[e.graph_id], e))
                .collect();
            write_dump(fs::File::create(&p)?, &rows)?;
            files.push(p);
        }
    }
    Ok(Outcome {
        files,
        report,
        violations: 0,
    })
}

fn split_opt(x: Option<(f64, f64)>) -> (Option<f64>, Option<f64>) {
    match x {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    }
}

fn pm(m: Option<f64>, s: Option<f64>) -> String {
    match (m, s) {
        (Some(m), Some(s)) => format!("{m:.3}±{s:.3}"),
        _ => "n/a".into(),
    }
}

fn mean_series(results: &[JobResult], variant: Variant, x: impl Fn(&Job) -> f64, xs: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .map(|&xv| {
            let ys: Vec<f64> = results
                .iter()
                .filter(|r| r.job.variant == variant && x(&r.job) == xv)
                .filter_map(|r| r.test.gdr)
                .collect();
            (xv, mean_stderr(&ys).map(|(m, _)| m).unwrap_or(f64::NAN))
        })
        .collect()
}

fn non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn cmd_oversmoothing(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = cfg.load_dataset()?;
    let variants: Vec<Variant> = train_variants(cfg).into_iter().filter(|v| *v != Variant::DropEdge).collect();
    let mut jobs = Vec::new();
    for &depth in &cfg.depths {
        for &variant in &variants {
            for &seed in &cfg.seeds {
                jobs.push(Job {
                    variant,
                    seed,
                    depth,
                    topk: cfg.topk,
                    dropedge_p: 0.0,
                });
            }
        }
    }
    let results = run_jobs(cfg, &set, &jobs, false, true)?;
    let path = cfg.out_dir.join("oversmoothing.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "arch",
        "depth",
        "variant",
        "seed",
        "gdr",
        "auroc",
        "f1",
        "dirichlet_last",
        "energy_nonincreasing",
        "gdr_layers",
        "dirichlet_layers",
    ])?;
    let mut report = Vec::new();
    for r in &results {
        let d = &r.test.dirichlet_layers;
        let flag = non_increasing(d);
        if !flag {
            report.push(format!(
                "depth {} {} seed {}: Dirichlet energy rises between layers",
                r.job.depth,
                r.job.variant.name(),
                r.job.seed
            ));
        }
        w.write_record([
            cfg.arch.name().to_string(),
            r.job.depth.to_string(),
            r.job.variant.name().to_string(),
            r.job.seed.to_string(),
            opt(r.test.gdr),
            opt(r.test.auroc),
            r.test.f1.to_string(),
            opt(d.last().copied()),
            flag.to_string(),
            joined(r.test.gdr_layers.iter().map(|g| opt(*g))),
            joined(d.iter().map(|e| e.to_string())),
        ])?;
    }
    w.flush()?;
    let mut files = vec![path];
    let depths: Vec<f64> = cfg.depths.iter().map(|&d| d as f64).collect();
    let series: Vec<Series> = variants
        .iter()
        .map(|&v| Series {
            name: v.name(),
            points: mean_series(&results, v, |j| j.depth as f64, &depths),
        })
        .collect();
    for s in &series {
        report.push(format!("{} mean GDR by depth: {:?}", s.name, s.points));
    }
    let svg = line_chart("Group distance ratio by depth", "depth", "GDR", &series);
    write_svg(&cfg.out_dir.join("oversmoothing.svg"), svg, &mut files)?;
    Ok(Outcome {
        files,
        report,
        violations: 0,
    })
}

fn cmd_ablate_topk(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = cfg.load_dataset()?;
    let mut topks = cfg.topks.clone();
    topks.sort_by(f64::total_cmp);
    let monotone = set
        .graphs()
        .iter()
        .all(|g| topks.windows(2).all(|w| topk_count(g.num_edges(), w[0]) <= topk_count(g.num_edges(), w[1])));
    log::info!("mask sizes monotone in topK over all graphs: {monotone}");
    let mut jobs = Vec::new();
    for &topk in &cfg.topks {
        for (variant, dropedge_p) in [(Variant::Expass, 0.0), (Variant::DropEdge, 1.0 - topk)] {
            for &seed in &cfg.seeds {
                jobs.push(Job {
                    variant,
                    seed,
                    depth: cfg.depth,
                    topk,
                    dropedge_p,
                });
            }
        }
    }
    let results = run_jobs(cfg, &set, &jobs, false, true)?;
    let path = cfg.out_dir.join("ablate_topk.csv");
    let mut w = writer(&path)?;
    w.write_record(["arch", "topk", "variant", "seed", "gdr", "auroc", "f1", "masked_graph_count"])?;
    for r in &results {
        w.write_record([
            cfg.arch.name().to_string(),
            r.job.topk.to_string(),
            r.job.variant.name().to_string(),
            r.job.seed.to_string(),
            opt(r.test.gdr),
            opt(r.test.auroc),
            r.test.f1.to_string(),
            r.output.masks.iter().filter(|m| m.is_some()).count().to_string(),
        ])?;
    }
    w.flush()?;
    let mut files = vec![path];
    let series: Vec<Series> = [Variant::Expass, Variant::DropEdge]
        .iter()
        .map(|&v| Series {
            name: v.name(),
            points: mean_series(&results, v, |j| j.topk, &topks),
        })
        .collect();
    let mut report = vec![format!("mask sizes monotone in topK: {monotone}")];
    for s in &series {
        report.push(format!("{} mean GDR by topK: {:?}", s.name, s.points));
    }
    let svg = line_chart("Group distance ratio by topK", "topK (DropEdge keep probability)", "GDR", &series);
    write_svg(&cfg.out_dir.join("ablate_topk.svg"), svg, &mut files)?;
    Ok(Outcome {
        files,
        report,
        violations: 0,
    })
}

fn cmd_explain(cfg: &ExperimentConfig) -> Result<Outcome> {
    let set = cfg.load_dataset()?;
    let seed = cfg.seeds[0];
    let ids = if cfg.graph_ids.is_empty() {
        split(&set, cfg.split, seed)?.test.into_iter().take(10).collect()
    } else {
        cfg.graph_ids.clone()
    };
    if let Some(&bad) = ids.iter().find(|&&i| i >= set.len()) {
        return Err(Error::Config(format!("graph id {bad} outside dataset of {}", set.len())));
    }
    let k = cfg.precision_k.unwrap_or(MOTIF_SIZE);
    let ecfg = cfg.explainer_config();
    let explain_path = cfg.out_dir.join("explain.csv");
    let mut w = writer(&explain_path)?;
    w.write_record(["epoch", "graph_id", "u", "v", "score"])?;
    let mut precision_rows = Vec::new();
    let mut report = Vec::new();
    for ckpt in &cfg.checkpoints {
        let (epoch, params) = load_checkpoint(ckpt)?;
        if params.dims().input != set.feature_dim() || params.dims().classes != set.num_classes() {
            return Err(Error::Checkpoint(format!("{} does not match the dataset", ckpt.display())));
        }
        let explanations: Vec<_> = ids
            .par_iter()
            .map(|&id| {
                let g = &set.graphs()[id];
                explain_graph(cfg.explainer, &params, g, id, g.label(), &ecfg, graph_seed(seed, id))
            })
            .collect::<Result<_>>()?;
        let mut precisions = Vec::new();
        for (&id, e) in ids.iter().zip(explanations) {
            let g = &set.graphs()[id];
            let e = e.ok_or_else(|| Error::Config("explainer produced no scores".into()))?;
            for (&(u, v), s) in g.edges().iter().zip(e.edge_scores.values()) {
                w.write_record([epoch.to_string(), id.to_string(), u.to_string(), v.to_string(), s.to_string()])?;
            }
            if !g.motif_edges().is_empty() {
                let p = precision_at_k(&e.edge_scores, g.motif_edges(), k);
                precisions.push(p);
                precision_rows.push([epoch.to_string(), id.to_string(), k.to_string(), p.to_string()]);
            }
        }
        if let Some((m, _)) = mean_stderr(&precisions) {
            report.push(format!("epoch {epoch}: mean precision@{k} {m:.3} over {} motif graphs", precisions.len()));
        }
    }
    w.flush()?;
    let mut files = vec![explain_path];
    if cfg.is_synthetic() {
        let path = cfg.out_dir.join("precision.csv");
        let mut w = writer(&path)?;
        w.write_record(["epoch", "graph_id", "k", "precision"])?;
        for row in precision_rows {
            w.write_record(row)?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(Outcome {
        files,
        report,
        violations: 0,
    })
}

fn cmd_theory(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rep = theory_suite(cfg.instances, cfg.seeds[0])?;
    let path = cfg.out_dir.join("theory.csv");
    rep.write_csv(&path)?;
    Ok(Outcome {
        files: vec![path],
        report: rep.summary(),
        violations: rep.violations(),
    })
}
