use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ppdepth::analysis::{
    contour_csv, contour_grid, depth_csv, gof_csv, gof_table, loo_r_search, rank, score, train_classifier,
    AccuracyTable, ClassifierConfig, ContourDepth, LikelihoodClassifier, ACCURACY_HEADER,
};
use ppdepth::depth::{fit_with_notes, CardinalityFit, ConditionalDepth, ConditionalKind, FitConfig};
use ppdepth::{simulate_hpp, simulate_ipp, sniff_domain, Dataset, DepthModel, IntensityModel, TimeDomain};

#[derive(Parser)]
#[command(name = "ppdepth", version, about = "Dirichlet depths for temporal point processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Poisson-process realizations
    #[command(subcommand)]
    Simulate(Simulate),
    /// Fit a depth model to a dataset
    Fit(FitArgs),
    /// Score every realization: index,cardinality,weight,conditional_depth,depth
    Depth(ScoreArgs),
    /// Rank realizations from deepest to shallowest
    Rank(RankArgs),
    /// Maximum-depth classification with an optional baseline
    Classify(ClassifyArgs),
    /// Depth against the KS p-value of the time-rescaled events
    Gof(GofArgs),
    /// Two-event depth on a simplex grid
    Contour(ContourArgs),
}

#[derive(Subcommand)]
enum Simulate {
    /// Homogeneous Poisson process
    Hpp {
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t2: f64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inhomogeneous Poisson process from a two-column intensity file
    Ipp {
        #[arg(long)]
        intensity: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DomainArgs {
    /// Window start, when the data file has no `# domain:` header
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Window end, when the data file has no `# domain:` header
    #[arg(long, allow_negative_numbers = true)]
    t2: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Hpp,
    SampleDirichlet,
    TsDirichlet,
    Mahalanobis,
}

impl From<Kind> for ConditionalKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Hpp => ConditionalKind::Hpp,
            Kind::SampleDirichlet => ConditionalKind::SampleDirichlet,
            Kind::TsDirichlet => ConditionalKind::TsDirichlet,
            Kind::Mahalanobis => ConditionalKind::Mahalanobis,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "sample-dirichlet")]
    kind: Kind,
    /// Weight exponent
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    r: f64,
    /// Cardinality cap (default: largest count + 5)
    #[arg(long = "K")]
    cap: Option<usize>,
    /// Bootstrap repetitions
    #[arg(long = "B", default_value_t = 10)]
    repetitions: usize,
    /// Histogram bins for intensity estimation
    #[arg(long)]
    bins: Option<usize>,
    /// Gaussian smoothing bandwidth (0 disables smoothing)
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repair non-monotone bootstrap means instead of failing
    #[arg(long)]
    repair: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// empirical, poisson, mixture or mixture:<m>
    #[arg(long, default_value = "poisson")]
    cardinality: String,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the estimated intensity (ts-dirichlet only)
    #[arg(long)]
    intensity_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Baseline {
    Likelihood,
    Mahalanobis,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// empirical, poisson, mixture or mixture:<m>
    #[arg(long, default_value = "mixture")]
    cardinality: String,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Never abstain: fall back to the most probable cardinality
    #[arg(long)]
    force: bool,
    /// Comma-separated r values for a leave-one-out accuracy report
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r_grid: Vec<f64>,
    /// Write per-item predictions here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GofArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Intensity for rescaling (default: the model's own, or one estimated from the data)
    #[arg(long)]
    intensity: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContourKind {
    Dirichlet,
    Mahalanobis,
}

#[derive(Args)]
struct ContourArgs {
    #[arg(long, value_enum, default_value = "dirichlet")]
    kind: ContourKind,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t2: f64,
    /// Two mean event times; defaults to the homogeneous centre
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    mean: Option<Vec<f64>>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn effective_seed(flag: u64) -> anyhow::Result<u64> {
    match std::env::var("PPDEPTH_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            ppdepth::Error::InvalidParameter(format!("PPDEPTH_SEED is not an integer: {v:?}")).into()
        }),
        Err(_) => Ok(flag),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn load_dataset(
    path: &Path,
    fallback: Option<TimeDomain>,
    args: Option<&DomainArgs>,
) -> anyhow::Result<Dataset> {
    let text = read(path)?;
    let flags = match args {
        Some(DomainArgs { t1: Some(a), t2: Some(b) }) => Some(TimeDomain::new(*a, *b)?),
        Some(DomainArgs { t1: None, t2: None }) | None => None,
        Some(_) => return Err(ppdepth::Error::InvalidParameter("give both --t1 and --t2".into()).into()),
    };
    let domain = flags.or_else(|| sniff_domain(&text)).or(fallback).ok_or_else(|| {
        ppdepth::Error::InvalidParameter(format!(
            "{} has no '# domain: t1 t2' header; pass --t1 and --t2",
            path.display()
        ))
    })?;
    Dataset::parse(&text, domain).with_context(|| format!("in {}", path.display()))
}

fn load_model(path: &Path) -> anyhow::Result<DepthModel> {
    DepthModel::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn warn_missing_rows(missing: usize) {
    if missing > 0 {
        eprintln!(
            "warning: {missing} realization(s) have no conditional row for their cardinality; depth set to 0"
        );
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(Simulate::Hpp { rate, t1, t2, n, seed, output }) => {
            let data = simulate_hpp(rate, TimeDomain::new(t1, t2)?, n, effective_seed(seed)?)?;
            emit(output.as_deref(), &data.render_with_header())
        }
        Command::Simulate(Simulate::Ipp { intensity, n, seed, output }) => {
            let lam = IntensityModel::parse(&read(&intensity)?)
                .with_context(|| format!("in {}", intensity.display()))?;
            let data = simulate_ipp(&lam, n, effective_seed(seed)?)?;
            emit(output.as_deref(), &data.render_with_header())
        }
        Command::Fit(args) => {
            let data = load_dataset(&args.data, None, Some(&args.domain))?;
            let m = &args.model;
            let config = FitConfig {
                kind: m.kind.into(),
                r: m.r,
                cap: m.cap,
                cardinality: args.cardinality.parse::<CardinalityFit>()?,
                repetitions: m.repetitions,
                bins: m.bins,
                bandwidth: m.bandwidth,
                seed: effective_seed(m.seed)?,
                repair: m.repair,
            };
            let (model, notes) = fit_with_notes(&data, &config)?;
            if !notes.repaired_rows.is_empty() {
                eprintln!("warning: repaired non-monotone mean rows for k = {:?}", notes.repaired_rows);
            }
            if notes.dropped_components > 0 {
                eprintln!("warning: dropped {} degenerate mixture component(s)", notes.dropped_components);
            }
            if let (Some(path), ConditionalDepth::TsDirichlet(lam)) =
                (&args.intensity_out, model.conditional())
            {
                emit(Some(path), &lam.render())?;
            }
            emit(Some(&args.output), &(model.to_json()? + "\n"))
        }
        Command::Depth(args) => {
            let model = load_model(&args.model)?;
            let data = load_dataset(&args.data, Some(model.domain()), None)?;
            let scores = score(&data, &model)?;
            warn_missing_rows(scores.iter().filter(|b| b.missing_row).count());
            emit(args.output.as_deref(), &depth_csv(&scores))
        }
        Command::Rank(args) => {
            let model = load_model(&args.model)?;
            let data = load_dataset(&args.data, Some(model.domain()), None)?;
            let report = rank(&data, &model)?;
            warn_missing_rows(report.entries().iter().filter(|e| e.breakdown.missing_row).count());
            emit(None, &report.to_csv(args.top))
        }
        Command::Classify(args) => classify(args),
        Command::Gof(args) => {
            let model = load_model(&args.model)?;
            let data = load_dataset(&args.data, Some(model.domain()), None)?;
            let lam = match (&args.intensity, model.conditional()) {
                (Some(path), _) => IntensityModel::parse(&read(path)?)?,
                (None, ConditionalDepth::TsDirichlet(lam)) => lam.clone(),
                (None, ConditionalDepth::Hpp) => IntensityModel::constant(model.domain(), 1.0)?,
                (None, _) => ppdepth::estimate_intensity(&data, None, None)?,
            };
            emit(args.output.as_deref(), &gof_csv(&gof_table(&data, &model, &lam)?))
        }
        Command::Contour(args) => {
            let domain = TimeDomain::new(args.t1, args.t2)?;
            let mean = args.mean.map(|v| [v[0], v[1]]);
            let kind = match (args.kind, mean) {
                (ContourKind::Dirichlet, mean) => ContourDepth::Dirichlet(mean),
                (ContourKind::Mahalanobis, None) => ContourDepth::Mahalanobis(None),
                (ContourKind::Mahalanobis, Some(m)) => {
                    let mut row = ppdepth::MahalanobisTable::hpp(domain, 2).row(2).cloned().expect("row 2");
                    row.mean = m.to_vec();
                    ContourDepth::Mahalanobis(Some(row))
                }
            };
            emit(args.output.as_deref(), &contour_csv(&contour_grid(domain, &kind, args.resolution)?))
        }
    }
}

fn classify(args: ClassifyArgs) -> anyhow::Result<()> {
    let train = load_dataset(&args.train, None, Some(&args.domain))?;
    let test = load_dataset(&args.test, Some(train.domain()), Some(&args.domain))?;
    if test.domain() != train.domain() {
        return Err(ppdepth::Error::DomainMismatch.into());
    }
    let m = &args.model;
    let config = ClassifierConfig {
        kind: m.kind.into(),
        r: m.r,
        cap: m.cap,
        cardinality: args.cardinality.parse::<CardinalityFit>()?,
        repetitions: m.repetitions,
        bins: m.bins,
        bandwidth: m.bandwidth,
        seed: effective_seed(m.seed)?,
        repair: true,
    };
    let classifier = train_classifier(&train, &config)?;
    let labels = classifier.labels().to_vec();

    let mut predictions = String::from("index,label,predicted,tie,forced");
    for l in &labels {
        predictions.push_str(&format!(",depth_{l}"));
    }
    predictions.push('\n');
    let truth: Option<Vec<String>> = test.labels().map(<[String]>::to_vec);
    let mut predicted = Vec::with_capacity(test.len());
    for (i, s) in test.realizations().iter().enumerate() {
        let p = if args.force { classifier.classify_forced(s)? } else { classifier.classify(s)? };
        let truth_label = truth.as_ref().map_or("", |t| t[i].as_str());
        predictions.push_str(&format!(
            "{i},{truth_label},{},{},{}",
            p.label.as_deref().unwrap_or("abstain"),
            p.tie,
            p.forced
        ));
        for d in &p.depths {
            predictions.push_str(&format!(",{d}"));
        }
        predictions.push('\n');
        predicted.push(p.label);
    }
    emit(args.output.as_deref(), &predictions)?;

    let Some(truth) = truth else {
        return Ok(());
    };
    let mut table = String::from(ACCURACY_HEADER);
    table.push_str(&AccuracyTable::new(&truth, &predicted).to_csv(ConditionalKind::from(m.kind).name()));
    match args.baseline {
        Some(Baseline::Likelihood) => {
            let lik = LikelihoodClassifier::train(&train, m.bins, m.bandwidth)?;
            let preds = test
                .realizations()
                .iter()
                .map(|s| lik.classify(s).map(|l| Some(l.to_string())))
                .collect::<ppdepth::Result<Vec<_>>>()?;
            table.push_str(&AccuracyTable::new(&truth, &preds).to_csv("likelihood"));
        }
        Some(Baseline::Mahalanobis) => {
            let base = train_classifier(
                &train,
                &ClassifierConfig { kind: ConditionalKind::Mahalanobis, ..config.clone() },
            )?;
            let preds = test
                .realizations()
                .iter()
                .map(|s| if args.force { base.classify_forced(s) } else { base.classify(s) }.map(|p| p.label))
                .collect::<ppdepth::Result<Vec<_>>>()?;
            table.push_str(&AccuracyTable::new(&truth, &preds).to_csv("mahalanobis"));
        }
        None => {}
    }
    if !args.r_grid.is_empty() {
        table.push_str("\nr,loo_accuracy\n");
        for (r, acc) in loo_r_search(&train, &config, &args.r_grid)? {
            table.push_str(&format!("{r},{acc}\n"));
        }
    }
    if args.output.is_none() {
        println!();
    }
    emit(None, &table)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<ppdepth::Error>()) {
        2
    } else if err.chain().any(|e| e.is::<io::Error>()) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let validation: anyhow::Error = ppdepth::Error::EmptyDataset.into();
        assert_eq!(exit_code(&validation.context("while fitting")), 2);
        let io_err: anyhow::Error = io::Error::new(io::ErrorKind::NotFound, "gone").into();
        assert_eq!(exit_code(&io_err), 1);
    }
}
