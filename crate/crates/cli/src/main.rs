use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use concord_core::clustering::{fcm, kmeans, pd_cluster, true_fuzzy_partition};
use concord_core::io::{
    read_dataset, read_labeled_dataset, read_partition, write_labels, write_membership_csv, ComparisonReport,
    CrispReport, CsvOptions, InputFormat, LabelColumn, LabeledFile,
};
use concord_core::simulation::{
    bias_experiment, study1, study2, study3, BiasConfig, LabeledDataset, Study2Reference, StudyConfig, StudyResult,
};
use concord_core::{aci, ClusteringConfig, ExpectationConfig, ExpectationMode};

const EXIT_INPUT: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_NOT_CONVERGED: u8 = 5;

/// Compare crisp and fuzzy partitions with chance-corrected concordance.
#[derive(Parser)]
#[command(name = "concord", version, about)]
struct Cli {
    /// Log progress and dropped columns.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NDC, expected NDC, ACI and pair-counting indices for two partitions.
    Compare(CompareArgs),
    /// Cluster a dataset and write memberships (or labels) plus a JSON sidecar.
    Cluster(ClusterArgs),
    /// PD memberships at the class means of a labeled dataset.
    Truth(TruthArgs),
    /// Run a simulation study and write its tables.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Closed,
    Enum,
    Mc,
}

#[derive(Args, Clone)]
struct ExpectArgs {
    /// Expected-NDC estimator.
    #[arg(long, value_enum, default_value = "closed")]
    expect: Expect,
    /// Monte Carlo permutations.
    #[arg(long, default_value_t = 1000)]
    h: usize,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of pairs for exhaustive enumeration (at most 10).
    #[arg(long, default_value_t = 8)]
    enum_limit: usize,
}

impl ExpectArgs {
    fn config(&self) -> ExpectationConfig {
        expectation(self.expect, self.h, self.seed, self.enum_limit)
    }
}

fn expectation(expect: Expect, h: usize, seed: u64, enumeration_limit: usize) -> ExpectationConfig {
    let mode = match expect {
        Expect::Closed => ExpectationMode::ClosedForm,
        Expect::Enum => ExpectationMode::Enumeration,
        Expect::Mc => ExpectationMode::MonteCarlo,
    };
    ExpectationConfig {
        mode,
        h,
        seed,
        enumeration_limit,
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Auto,
    Labels,
    Membership,
}

#[derive(Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    #[command(flatten)]
    expect: ExpectArgs,
    /// Headline the ACI clamped at 0 (both values are always reported).
    #[arg(long)]
    clamp: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Input interpretation; auto treats a one-column integer file as labels.
    #[arg(long, value_enum, default_value = "auto")]
    format: Format,
    /// Rescale membership rows that do not sum to 1.
    #[arg(long)]
    renormalize: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Fcm,
    Pd,
    Kmeans,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV.
    data: PathBuf,
    /// Column holding class labels: `last`, a 0-based index or a header name.
    #[arg(long)]
    label_column: Option<LabelColumn>,
    /// Z-score every feature before clustering.
    #[arg(long)]
    standardize: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(value_enum)]
    algorithm: Algorithm,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    fuzzifier: f64,
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 5)]
    n_init: usize,
    /// Output CSV; the sidecar goes to the same path with `.json` appended.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TruthArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Study1,
    Study2,
    Study3,
    Bias,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    study: Study,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Expected-NDC estimator; Monte Carlo seeds are derived per cell from --seed.
    #[arg(long, value_enum, default_value = "closed")]
    expect: Expect,
    /// Monte Carlo permutations.
    #[arg(long, default_value_t = 1000)]
    h: usize,
    /// Bias experiment: number of random datasets.
    #[arg(long, default_value_t = 1000)]
    n_datasets: usize,
    /// Bias experiment: smallest sample size.
    #[arg(long, default_value_t = 100)]
    n_min: usize,
    /// Bias experiment: largest sample size.
    #[arg(long, default_value_t = 1200)]
    n_max: usize,
    /// Study 2: compare each solution with the crisp labels instead of the
    /// solution at the true number of centers.
    #[arg(long)]
    vs_truth: bool,
    /// Study 3: labeled dataset CSVs to add to the synthetic ones.
    #[arg(long)]
    data: Vec<PathBuf>,
    /// Study 3: label column of the --data files.
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
    /// Study 3: z-score the --data files.
    #[arg(long)]
    standardize: bool,
}

fn delimiter(c: char) -> anyhow::Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .context("delimiter must be a single ASCII character")
}

fn load(args: &DataArgs, need_labels: bool) -> anyhow::Result<LabeledFile> {
    let delim = delimiter(args.delimiter)?;
    let label = match (&args.label_column, need_labels) {
        (Some(l), _) => Some(l.clone()),
        (None, true) => Some(LabelColumn::Last),
        (None, false) => None,
    };
    let mut file = match &label {
        Some(l) => read_labeled_dataset(&args.data, l, delim),
        None => read_dataset(&args.data, delim),
    }
    .with_context(|| format!("reading {}", args.data.display()))?;
    if args.standardize {
        file.data = file.data.standardized();
    }
    Ok(file)
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn compare(args: &CompareArgs) -> anyhow::Result<u8> {
    let opts = CsvOptions {
        delimiter: delimiter(args.delimiter)?,
        header: None,
        renormalize: args.renormalize,
    };
    let format = match args.format {
        Format::Auto => InputFormat::Auto,
        Format::Labels => InputFormat::Labels,
        Format::Membership => InputFormat::Membership,
    };
    let read = |p: &PathBuf| read_partition(p, format, &opts).with_context(|| format!("reading {}", p.display()));
    let (a, b) = (read(&args.first)?, read(&args.second)?);
    let cfg = args.expect.config();
    let result = aci(&a.to_fuzzy(), &b.to_fuzzy(), &cfg)?;
    let crisp = match (a.as_crisp(), b.as_crisp()) {
        (Some(p), Some(q)) => Some(CrispReport::new(&p, &q)?),
        _ => None,
    };
    let report = ComparisonReport::new(&result, crisp);
    if args.json {
        let mut value = serde_json::to_value(&report)?;
        value["clamp"] = json!(args.clamp);
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        if args.clamp {
            println!("ACI = {:.4} (clamped)", report.aci_clamped);
        } else {
            println!("ACI = {:.4}", report.aci);
        }
        print!("{}", report.to_text());
    }
    Ok(0)
}

#[derive(Serialize)]
struct ClusterSidecar<'a> {
    version: &'a str,
    algorithm: &'a str,
    input: String,
    n: usize,
    p: usize,
    features: &'a [String],
    dropped: &'a [String],
    standardized: bool,
    config: ClusteringConfig,
    objective: f64,
    iterations: usize,
    converged: bool,
    centers: &'a [Vec<f64>],
}

fn cluster(args: &ClusterArgs) -> anyhow::Result<u8> {
    let file = load(&args.data, false)?;
    let cfg = ClusteringConfig {
        k: args.k,
        max_iter: args.max_iter,
        tol: args.tol,
        seed: args.seed,
        fuzzifier: args.fuzzifier,
        n_init: args.n_init,
    };
    let x = &file.data;
    let (name, objective, iterations, converged, centers) = match args.algorithm {
        Algorithm::Fcm => {
            let r = fcm(x, &cfg)?;
            write_membership_csv(&args.out, &r.partition, false)?;
            ("fcm", r.objective, r.iterations, r.converged, r.centers)
        }
        Algorithm::Pd => {
            let r = pd_cluster(x, &cfg)?;
            write_membership_csv(&args.out, &r.partition, false)?;
            ("pd", r.objective, r.iterations, r.converged, r.centers)
        }
        Algorithm::Kmeans => {
            let r = kmeans(x, &cfg)?;
            write_labels(&args.out, &r.labels)?;
            ("kmeans", r.inertia, r.iterations, r.converged, r.centers)
        }
    };
    write_json(
        &sidecar(&args.out),
        &ClusterSidecar {
            version: concord_core::VERSION,
            algorithm: name,
            input: args.data.data.display().to_string(),
            n: x.n(),
            p: x.p(),
            features: &file.feature_names,
            dropped: &file.dropped,
            standardized: args.data.standardize,
            config: cfg,
            objective,
            iterations,
            converged,
            centers: &centers,
        },
    )?;
    if converged {
        Ok(0)
    } else {
        log::warn!("{name} did not converge within {} iterations", cfg.max_iter);
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn truth(args: &TruthArgs) -> anyhow::Result<u8> {
    let file = load(&args.data, true)?;
    let p = true_fuzzy_partition(&file.data, file.require_labels()?)?;
    write_membership_csv(&args.out, &p, false)?;
    Ok(0)
}

fn write_study(dir: &Path, res: &StudyResult) -> anyhow::Result<()> {
    let csv = dir.join(format!("{}.csv", res.study));
    res.write_csv(fs::File::create(&csv).with_context(|| format!("writing {}", csv.display()))?)?;
    write_json(&dir.join(format!("{}.json", res.study)), res)?;
    Ok(())
}

fn write_matrices(dir: &Path, res: &StudyResult) -> anyhow::Result<()> {
    for index in ["ndc", "aci"] {
        let path = dir.join(format!("{}_{index}.csv", res.study));
        res.matrix(index)
            .write_csv(fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?)?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<u8> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let expectation = expectation(args.expect, args.h, args.seed, 8);
    let cfg = StudyConfig {
        expectation,
        ..StudyConfig::default()
    };
    let res = match args.study {
        Study::Study1 => study1(args.seed, &cfg)?,
        Study::Study2 => {
            let reference = if args.vs_truth {
                Study2Reference::CrispTruth
            } else {
                Study2Reference::TrueC
            };
            let res = study2(args.seed, &cfg, reference)?;
            write_matrices(&args.out, &res)?;
            res
        }
        Study::Study3 => {
            let mut extra = Vec::new();
            for path in &args.data {
                let file = load(
                    &DataArgs {
                        data: path.clone(),
                        label_column: Some(args.label_column.clone()),
                        standardize: args.standardize,
                        delimiter: ',',
                    },
                    true,
                )?;
                let labels = file.require_labels()?.clone();
                extra.push(LabeledDataset {
                    name: path
                        .file_stem()
                        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into()),
                    data: file.data,
                    labels,
                });
            }
            study3(args.seed, &cfg, &extra)?
        }
        Study::Bias => {
            if args.n_min > args.n_max {
                bail!("--n-min must not exceed --n-max");
            }
            let bcfg = BiasConfig {
                n_range: (args.n_min, args.n_max),
                expectation,
                ..BiasConfig::default()
            };
            let bias = bias_experiment(args.n_datasets, args.seed, &bcfg)?;
            let path = args.out.join("bias_datasets.csv");
            let mut w = String::from("dataset,n,c,dims,alpha,ari,aci,diff,mc_std_error\n");
            for r in &bias.rows {
                w += &format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.dataset,
                    r.n,
                    r.c,
                    r.dims,
                    r.alpha,
                    r.ari,
                    r.aci,
                    r.aci - r.ari,
                    r.mc_std_error.map_or(String::new(), |s| s.to_string())
                );
            }
            fs::write(&path, w).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "mean(ACI - ARI) = {:e} over {} datasets",
                bias.mean_diff,
                bias.rows.len()
            );
            println!("max |ACI - ARI| = {:e}", bias.max_abs_diff);
            let res = bias.to_study_result();
            write_study(&args.out, &res)?;
            return Ok(0);
        }
    };
    write_study(&args.out, &res)?;
    print!("{}", res.to_table());
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<concord_core::Error>()) {
        Some(e) if e.is_input_error() => EXIT_INPUT,
        Some(_) => EXIT_NUMERIC,
        None if err.chain().any(|e| e.is::<std::io::Error>()) => EXIT_INPUT,
        None => EXIT_NUMERIC,
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CONCORD_THREADS") {
        let n: usize = v.trim().parse().context("CONCORD_THREADS must be a positive integer")?;
        if n == 0 {
            bail!("CONCORD_THREADS must be a positive integer");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let run = || -> anyhow::Result<u8> {
        init_threads()?;
        match &cli.command {
            Command::Compare(a) => compare(a),
            Command::Cluster(a) => cluster(a),
            Command::Truth(a) => truth(a),
            Command::Simulate(a) => simulate(a),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
