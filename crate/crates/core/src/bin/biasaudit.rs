use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use biasaudit::audit::{
    bias_vector, compare_detectors, compare_test_strategies, correlate_with_proportions, load_proportions,
    run_audit_with_inputs, subsample_sweep, AuditConfig, BiasMetric, CompareMode, DetectorReport, InputEcho,
    ProportionCorrelation,
};
use biasaudit::error::{Error, Result};
use biasaudit::report::{
    matrix_csv, read_report_sets, strategy_csv, sweep_csv, to_json, write_pair, write_report_set,
};
use biasaudit::scores::TableMeta;
use biasaudit::simulator::{load_sim_spec, RNG_ALGORITHM};
use biasaudit::stats::CorrelationMethod;
use biasaudit::{load_schema, load_scores, simulate, AttributeSchema, BriskStarMode, BiasReportSet, EodMode, ScoreTable};

/// Attribute-conditioned bias audits of binary classifier score tables.
#[derive(Parser)]
#[command(name = "biasaudit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-attribute brisk, brisk★, EOD and Bonferroni-corrected paired t-tests.
    Audit {
        /// Attribute schema JSON; the built-in facial schema when omitted.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Score table, optionally suffixed with `:detector-name`. Repeatable.
        #[arg(long = "scores", required = true)]
        scores: Vec<String>,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        /// Bonferroni denominator (default: number of executed tests).
        #[arg(long)]
        m: Option<u64>,
        #[arg(long, default_value = "signed", value_parser = parse_brisk_star_mode)]
        brisk_star_mode: BriskStarMode,
        /// `integrated` or `threshold=T`.
        #[arg(long, default_value = "integrated", value_parser = parse_eod_mode)]
        eod_mode: EodMode,
        /// `pooled` or `pairwise=LABEL`.
        #[arg(long, default_value = "pooled", value_parser = parse_compare)]
        compare: CompareMode,
        #[arg(long, default_value_t = 0.1)]
        max_skip: f64,
        /// Restrict to these attributes (comma-separated).
        #[arg(long, value_delimiter = ',')]
        attributes: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include every subgroup's integrated delta in report.json.
        #[arg(long)]
        subgroup_deltas: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a synthetic score table from a simulation spec.
    Simulate {
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-detector and training-proportion correlations of saved audits.
    Corr {
        /// Directory holding report.json, or subdirectories that do.
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        proportions: Option<PathBuf>,
        #[arg(long, default_value = "pearson")]
        method: CorrelationMethod,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stability of the averaged |EOD| under random subsampling.
    Sweep {
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        scores: String,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1,0.05,0.01")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classical (pooled Welch) versus paired p-values per attribute.
    CompareTests {
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        scores: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_brisk_star_mode(s: &str) -> std::result::Result<BriskStarMode, String> {
    match s {
        "signed" => Ok(BriskStarMode::SignedExtremum),
        "literal" => Ok(BriskStarMode::LiteralMax),
        other => Err(format!("expected `signed` or `literal`, got `{other}`")),
    }
}

fn parse_eod_mode(s: &str) -> std::result::Result<EodMode, String> {
    if s == "integrated" {
        return Ok(EodMode::Integrated);
    }
    let t = s
        .strip_prefix("threshold=")
        .ok_or_else(|| format!("expected `integrated` or `threshold=T`, got `{s}`"))?;
    let t: f64 = t.parse().map_err(|_| format!("bad threshold `{t}`"))?;
    if !(0.0..=1.0).contains(&t) {
        return Err(format!("threshold {t} outside [0, 1]"));
    }
    Ok(EodMode::AtThreshold(t))
}

fn parse_compare(s: &str) -> std::result::Result<CompareMode, String> {
    if s == "pooled" {
        return Ok(CompareMode::PooledRest);
    }
    match s.strip_prefix("pairwise=") {
        Some(label) if !label.is_empty() => Ok(CompareMode::Pairwise(label.to_string())),
        _ => Err(format!("expected `pooled` or `pairwise=LABEL`, got `{s}`")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn schema_from(path: Option<&Path>) -> Result<Arc<AttributeSchema>> {
    match path {
        Some(p) => Ok(Arc::new(load_schema(&read(p)?).map_err(|e| e.in_file(p))?)),
        None => Ok(Arc::new(AttributeSchema::facial_attributes())),
    }
}

/// Splits `path[:name]`; a suffix only counts as a name when the whole
/// argument is not itself an existing file.
fn split_scores_arg(arg: &str) -> (PathBuf, Option<String>) {
    if !Path::new(arg).exists() {
        if let Some((path, name)) = arg.rsplit_once(':') {
            if !name.is_empty() && !name.contains(['/', '\\']) {
                return (PathBuf::from(path), Some(name.to_string()));
            }
        }
    }
    (PathBuf::from(arg), None)
}

fn load_table(arg: &str, schema: &Arc<AttributeSchema>) -> Result<(ScoreTable, InputEcho)> {
    let (path, name) = split_scores_arg(arg);
    let stem = path
        .file_stem()
        .map_or_else(|| "scores".to_string(), |s| s.to_string_lossy().into_owned());
    let meta = TableMeta {
        detector: name.unwrap_or_else(|| stem.clone()),
        dataset: stem,
    };
    let table = load_scores(&read(&path)?, schema.clone(), meta.clone()).map_err(|e| e.in_file(&path))?;
    for w in table.warnings() {
        eprintln!("warning: {}: {w}", path.display());
    }
    let echo = InputEcho {
        path: path.display().to_string(),
        detector: meta.detector,
        dataset: meta.dataset,
    };
    Ok((table, echo))
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn audit_summary(set: &BiasReportSet) {
    let m = &set.metadata;
    println!(
        "{} tests executed, m = {}, adjusted alpha = {:e}",
        m.tests_executed, m.bonferroni_m, m.adjusted_alpha
    );
    for d in &set.detectors {
        for e in &d.entries {
            match (&e.bias, e.ttest) {
                (Some(b), Some(t)) => println!(
                    "{:<24} {:<40} brisk {:+.5} eod {:+.5} p {:.3e}{}",
                    d.detector,
                    e.attribute,
                    b.brisk,
                    b.eod,
                    t.p_value,
                    if e.significant { "  *" } else { "" }
                ),
                _ => eprintln!("warning: {} {}: {:?}", d.detector, e.attribute, e.status),
            }
        }
    }
}

#[derive(Serialize)]
struct ProportionReport {
    detector: String,
    #[serde(flatten)]
    correlation: ProportionCorrelation,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Audit {
            schema,
            scores,
            alpha,
            m,
            brisk_star_mode,
            eod_mode,
            compare,
            max_skip,
            attributes,
            seed,
            subgroup_deltas,
            out,
        } => {
            let schema = schema_from(schema.as_deref())?;
            let (tables, inputs): (Vec<_>, Vec<_>) = scores
                .iter()
                .map(|s| load_table(s, &schema))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            let config = AuditConfig {
                alpha,
                m_override: m,
                brisk_star_mode,
                eod_mode,
                compare,
                max_skip,
                attributes,
                seed,
                subgroup_deltas,
            };
            let set = run_audit_with_inputs(&tables, &config, inputs)?;
            print_written(&write_report_set(&out, &set)?);
            audit_summary(&set);
            if set.any_not_measurable() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Simulate { schema, spec, out } => {
            let schema = schema_from(schema.as_deref())?;
            let spec = load_sim_spec(&read(&spec)?, schema).map_err(|e| e.in_file(&spec))?;
            let table = simulate(&spec)?;
            let file = fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
            table.write_csv(std::io::BufWriter::new(file))?;
            let sidecar = PathBuf::from(format!("{}.meta.json", out.display()));
            let meta = serde_json::json!({
                "rng": RNG_ALGORITHM,
                "seed": spec.seed,
                "records": table.len(),
                "spec": spec.to_doc(),
            });
            fs::write(&sidecar, to_json(&meta)?).map_err(|e| Error::io(&sidecar, e))?;
            print_written(&[out, sidecar]);
        }
        Command::Corr {
            reports,
            proportions,
            method,
            out,
        } => {
            let sets = read_report_sets(&reports)?;
            let mut merged = sets[0].clone();
            merged.detectors = sets.iter().flat_map(|s| s.detectors.clone()).collect::<Vec<DetectorReport>>();
            let mut written = Vec::new();
            if merged.detectors.len() >= 2 {
                for (metric, stem) in [(BiasMetric::Brisk, "corr_brisk"), (BiasMetric::BriskStar, "corr_brisk_star")] {
                    let matrix = compare_detectors(&merged, metric, method)?;
                    written.extend(write_pair(&out, stem, &matrix, &matrix_csv(&matrix))?);
                }
            } else if proportions.is_none() {
                return Err(Error::InsufficientSamples(
                    "detector correlation needs at least 2 detectors".into(),
                ));
            }
            if let Some(p) = proportions {
                let props = load_proportions(&read(&p)?).map_err(|e| e.in_file(&p))?;
                let mut rows = Vec::new();
                for d in &merged.detectors {
                    let correlation = correlate_with_proportions(&bias_vector(d, BiasMetric::Brisk), &props, method)?;
                    for name in &correlation.missing {
                        eprintln!("warning: {}: no training proportion for {name}; excluded", d.detector);
                    }
                    rows.push(ProportionReport {
                        detector: d.detector.clone(),
                        correlation,
                    });
                }
                let mut csv = String::from("detector,coefficient,n,method\n");
                for r in &rows {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        r.detector,
                        r.correlation.result.coefficient,
                        r.correlation.result.n,
                        serde_json::to_value(r.correlation.result.method)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default()
                    ));
                }
                written.extend(write_pair(&out, "corr_proportions", &rows, &csv)?);
            }
            print_written(&written);
        }
        Command::Sweep {
            schema,
            scores,
            fractions,
            reps,
            seed,
            out,
        } => {
            let schema = schema_from(schema.as_deref())?;
            let (table, _) = load_table(&scores, &schema)?;
            let sweep = subsample_sweep(&table, &fractions, reps, seed)?;
            print_written(&write_pair(&out, "sweep", &sweep, &sweep_csv(&sweep))?);
            for p in &sweep.points {
                println!("fraction {:<6} mean |EOD| {:.5} ± {:.5}", p.fraction, p.mean, p.std);
            }
            println!("full-data mean |brisk| {:.5}", sweep.reference_brisk);
        }
        Command::CompareTests { schema, scores, out } => {
            let schema = schema_from(schema.as_deref())?;
            let (table, _) = load_table(&scores, &schema)?;
            let contrasts = AuditConfig::default().contrasts(table.schema())?;
            let rows = compare_test_strategies(&table, &contrasts)?;
            print_written(&write_pair(&out, "compare_tests", &rows, &strategy_csv(&rows))?);
            for r in &rows {
                println!(
                    "{:<40} classical p {:.3e}  paired p {:.3e}",
                    r.attribute, r.classical.p_value, r.paired.p_value
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
