use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fourier_head::binning::{mixed_precision_bins, uniform_bins, BinStrategy};
use fourier_head::canonical::{fmt_canonical, to_canonical_json};
use fourier_head::experiments::{self, ArtifactWriter, SweepSpec, TrainSettings, TrainToyConfig, ValidationOptions};
use fourier_head::fourier::FourierDensity;
use fourier_head::smoothness::{smoothness as smoothness_of, Discrepancy, SignalHistogram, SmoothnessConfig};
use fourier_head::trainer::{HeadKind, Objective};

use crate::config::resolve;
use crate::error::{validation, CliError, CliResult};
use crate::{Common, SweepArgs, TrainFlags};

fn parse<T: std::str::FromStr<Err = fourier_head::Error>>(s: &str) -> CliResult<T> {
    s.trim().parse().map_err(CliError::from)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| CliError::Validation(format!("bad {what} '{p}'"))))
        .collect()
}

fn parse_objective(s: &str) -> CliResult<Objective> {
    match s {
        "cross_entropy" | "ce" => Ok(Objective::CrossEntropy),
        "mle" => Ok(Objective::Mle),
        "mse" => Ok(Objective::Mse),
        other => validation(format!("unknown objective '{other}' (expected cross_entropy, mle or mse)")),
    }
}

fn settings(t: &TrainFlags) -> TrainSettings {
    TrainSettings {
        learning_rate: t.learning_rate,
        batch_size: t.batch_size,
        epochs: t.epochs,
        dataset_size: t.dataset_size,
        data_seed: t.data_seed,
        ..TrainSettings::default()
    }
}

fn print_paths(dir: &Path) {
    println!("artifacts written to {}", dir.display());
}

#[allow(clippy::too_many_arguments)]
pub fn train_toy(
    common: &Common,
    train: &TrainFlags,
    dataset: &str,
    head: &str,
    frequencies: usize,
    gamma: f64,
    objective: Option<&str>,
    fixed_gmm_weights: bool,
    seeds: Vec<u64>,
) -> CliResult<()> {
    let flags = TrainToyConfig {
        dataset: parse(dataset)?,
        head: parse(head)?,
        frequencies,
        gamma,
        learn_gmm_weights: !fixed_gmm_weights,
        objective: objective.map(parse_objective).transpose()?,
        seeds,
        train: settings(train),
    };
    let cfg = resolve(flags, common.config.as_deref())?;
    cfg.validate()?;
    let out = ArtifactWriter::new(&common.out, "train-toy", &cfg)?;
    let result = experiments::train_toy(&cfg, train.jobs, &out)?;
    for o in &result.cells {
        match &o.result {
            Ok(s) => println!(
                "seed {}: kl {} smoothness {} mse {} perplexity {} (best epoch {})",
                o.cell.seed,
                s.report.kl.map(fmt_canonical).unwrap_or("-".into()),
                s.report.smoothness.map(fmt_canonical).unwrap_or("-".into()),
                fmt_canonical(s.report.mse),
                s.report.perplexity.map(fmt_canonical).unwrap_or("-".into()),
                s.best_epoch
            ),
            Err(e) => println!("seed {}: failed: {e}", o.cell.seed),
        }
    }
    if let Some(a) = &result.aggregate {
        if let Some(kl) = a.kl {
            println!("mean kl {} +- {}", fmt_canonical(kl.mean), fmt_canonical(kl.std));
        }
        println!("mean mse {} +- {}", fmt_canonical(a.mse.mean), fmt_canonical(a.mse.std));
    }
    print_paths(out.dir());
    if result.cells.iter().any(|o| o.result.is_err()) {
        return Err(CliError::Runtime("some seeds failed to train".into()));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SweepConfig {
    sweep: SweepSpec,
    train: TrainSettings,
}

pub fn sweep(args: &SweepArgs, mle: bool) -> CliResult<()> {
    let mut spec = if mle { SweepSpec::mle() } else { SweepSpec::default() };
    if let Some(d) = &args.datasets {
        spec.datasets = d.split(',').map(parse).collect::<CliResult<_>>()?;
    }
    if let Some(h) = &args.heads {
        spec.heads = h.split(',').map(parse::<HeadKind>).collect::<CliResult<_>>()?;
    }
    if let Some(f) = &args.frequencies {
        spec.frequencies = parse_list(f, "frequency")?;
    }
    if let Some(g) = &args.gammas {
        spec.gammas = parse_list(g, "gamma")?;
    }
    if let Some(s) = &args.seeds {
        spec.seeds = s.clone();
    }
    spec.learn_gmm_weights = !args.fixed_gmm_weights;
    let cfg = resolve(SweepConfig { sweep: spec, train: settings(&args.train) }, args.common.config.as_deref())?;
    if mle && cfg.sweep.objective != Objective::Mle {
        return validation("mle-sweep requires the mle objective");
    }
    cfg.sweep.validate()?;
    cfg.train.validate()?;
    let command = if mle { "mle-sweep" } else { "sweep" };
    let out = ArtifactWriter::new(&args.common.out, command, &cfg)?;
    let cells = cfg.sweep.cells().len();
    println!("{command}: {cells} training runs on {} thread(s)", args.train.jobs);
    let result = experiments::sweep(&cfg.sweep, &cfg.train, args.train.jobs, &out)?;
    for g in &result.groups {
        let Some(a) = &g.aggregate else { continue };
        let n = g.num_frequencies.map(|n| format!(" N={n} gamma={}", fmt_canonical(g.gamma.unwrap_or(0.0)))).unwrap_or_default();
        let show = |v: Option<fourier_head::trainer::MeanStd>| v.map(|m| fmt_canonical(m.mean)).unwrap_or("-".into());
        println!(
            "{} {}{n}: kl {} smoothness {} perplexity {}",
            g.dataset.name(),
            g.head.name(),
            show(a.kl),
            show(a.smoothness),
            show(a.perplexity)
        );
    }
    for f in &result.fits {
        match &f.fit {
            Ok(fit) => println!(
                "fit {} gamma={}: C1 {} C2 {} t {} relative residual {} accepted {}",
                f.dataset.name(),
                fmt_canonical(f.gamma),
                fmt_canonical(fit.c1),
                fmt_canonical(fit.c2),
                fmt_canonical(fit.t),
                fmt_canonical(fit.relative_residual),
                fit.accepted
            ),
            Err(e) => println!("fit {} gamma={}: {e}", f.dataset.name(), fmt_canonical(f.gamma)),
        }
    }
    if result.failed_cells > 0 {
        println!("{} cells failed; see cells.csv", result.failed_cells);
    }
    print_paths(out.dir());
    Ok(())
}

pub fn validate_smoothness(common: &Common, seed: u64, trials: usize, max_harmonics: usize) -> CliResult<()> {
    let flags = ValidationOptions { seed, noise_trials: trials, max_harmonics, ..ValidationOptions::default() };
    let opts = resolve(flags, common.config.as_deref())?;
    if opts.noise_trials == 0 || opts.max_harmonics < 2 {
        return validation("need at least one noise trial and two harmonics");
    }
    let out = ArtifactWriter::new(&common.out, "validate-smoothness", &opts)?;
    let report = experiments::run_validate_smoothness(&opts, &out)?;
    for (name, ok) in &report.checks {
        println!("[{}] {name}", if *ok { "PASS" } else { "FAIL" });
    }
    print_paths(out.dir());
    if !report.passed {
        return validation("smoothness validation failed");
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct DensityEvalConfig {
    density: Option<PathBuf>,
    points: usize,
    bins: Option<usize>,
}

#[derive(Debug, Serialize)]
struct DensityEvalResult {
    num_frequencies: usize,
    points: usize,
    min: f64,
    integral: f64,
    pmf: Option<Vec<f64>>,
    pre_normalization_sum: Option<f64>,
}

pub fn density_eval(common: &Common, density: Option<PathBuf>, points: usize, bins: Option<usize>) -> CliResult<()> {
    let cfg = resolve(DensityEvalConfig { density, points, bins }, common.config.as_deref())?;
    let Some(path) = &cfg.density else { return validation("--density FILE is required") };
    if cfg.points < 2 {
        return validation("--points must be at least 2");
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let d: FourierDensity =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{} is not a valid density: {e}", path.display())))?;
    let h = 2.0 / (cfg.points - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..cfg.points)
        .map(|i| {
            let z = (-1.0 + i as f64 * h).min(1.0);
            d.eval(z).map(|p| (z, p))
        })
        .collect::<Result<_, _>>()?;
    let mut body = String::from("z,density\n");
    for (z, p) in &grid {
        body.push_str(&format!("{},{}\n", fmt_canonical(*z), fmt_canonical(*p)));
    }
    let ps: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let integral = h * (ps.iter().sum::<f64>() - 0.5 * (ps[0] + ps[ps.len() - 1]));
    let (pmf, pre) = match cfg.bins {
        Some(m) => {
            let layout = uniform_bins(m, -1.0, 1.0)?;
            let (y, s) = d.discretize(layout.centers())?;
            (Some(y.into_probs()), Some(s))
        }
        None => (None, None),
    };
    let result = DensityEvalResult {
        num_frequencies: d.num_frequencies(),
        points: cfg.points,
        min: ps.iter().copied().fold(f64::INFINITY, f64::min),
        integral,
        pmf,
        pre_normalization_sum: pre,
    };
    let out = ArtifactWriter::new(&common.out, "density-eval", &cfg)?;
    out.write_csv("density.csv", &body)?;
    out.write_json("density.json", &result)?;
    println!("N = {}, min density {}, integral {}", result.num_frequencies, fmt_canonical(result.min), fmt_canonical(integral));
    print_paths(out.dir());
    Ok(())
}

/// Reads the first column of a CSV of numbers, skipping a non-numeric
/// header row.
fn read_column(path: &Path) -> CliResult<Vec<f64>> {
    let reader: Box<dyn std::io::Read> = if path == Path::new("-") {
        Box::new(std::io::stdin())
    } else {
        Box::new(std::fs::File::open(path).map_err(|e| CliError::Validation(format!("cannot open {}: {e}", path.display())))?)
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let Some(field) = rec.get(0).map(str::trim).filter(|f| !f.is_empty()) else { continue };
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return validation(format!("{}: row {} is not a number: '{field}'", path.display(), i + 1)),
        }
    }
    Ok(values)
}

#[derive(Debug, Serialize, Deserialize)]
struct BinsConfig {
    strategy: BinStrategy,
    bins: usize,
    lo: f64,
    hi: f64,
    d: f64,
    samples: Option<PathBuf>,
}

pub fn bins_build(common: &Common, strategy: &str, bins: usize, lo: f64, hi: f64, d: f64, samples: Option<PathBuf>) -> CliResult<()> {
    let strategy = match strategy {
        "uniform" => BinStrategy::Uniform,
        "mixed_precision" | "mixed" => BinStrategy::MixedPrecision,
        other => return validation(format!("unknown strategy '{other}' (expected uniform or mixed_precision)")),
    };
    let cfg = resolve(BinsConfig { strategy, bins, lo, hi, d, samples }, common.config.as_deref())?;
    #[derive(Serialize)]
    struct BinsResult {
        layout: fourier_head::binning::BinLayout,
        clamped: usize,
    }
    let result = match cfg.strategy {
        BinStrategy::Uniform => BinsResult { layout: uniform_bins(cfg.bins, cfg.lo, cfg.hi)?, clamped: 0 },
        BinStrategy::MixedPrecision => {
            let Some(path) = &cfg.samples else { return validation("mixed precision needs --samples FILE") };
            let mp = mixed_precision_bins(&read_column(path)?, cfg.bins, cfg.d, cfg.lo, cfg.hi)?;
            BinsResult { layout: mp.layout, clamped: mp.clamped }
        }
    };
    let out = ArtifactWriter::new(&common.out, "bins-build", &cfg)?;
    out.write_json("bins.json", &result)?;
    println!("{} bins on [{}, {}], {} samples clamped", result.layout.len(), cfg.lo, cfg.hi, result.clamped);
    print_paths(out.dir());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SmoothnessCliConfig {
    input: Option<PathBuf>,
    discrepancy: Discrepancy,
    sigma_max: usize,
}

pub fn smoothness(input: Option<PathBuf>, discrepancy: &str, sigma_max: usize, out: Option<PathBuf>, config: Option<PathBuf>) -> CliResult<()> {
    let discrepancy = match discrepancy.to_ascii_lowercase().as_str() {
        "l2" => Discrepancy::L2,
        "l1" => Discrepancy::L1,
        other => return validation(format!("unknown discrepancy '{other}' (expected l2 or l1)")),
    };
    let cfg = resolve(SmoothnessCliConfig { input, discrepancy, sigma_max }, config.as_deref())?;
    let Some(path) = &cfg.input else { return validation("--input FILE is required") };
    let y = SignalHistogram::new(read_column(path)?)?;
    let report = smoothness_of(&y, &SmoothnessConfig { sigma_max: cfg.sigma_max, discrepancy: cfg.discrepancy })?;
    match out {
        Some(dir) => {
            let w = ArtifactWriter::new(&dir, "smoothness", &cfg)?;
            w.write_json("smoothness.json", &report)?;
            print_paths(w.dir());
        }
        None => println!("{}", to_canonical_json(&report).map_err(|e| CliError::Runtime(e.to_string()))?),
    }
    Ok(())
}
