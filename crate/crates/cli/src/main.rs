//! `evclass`: batch pipeline for evidential contextual classification.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on data errors.
//! Every subcommand writes a manifest next to its output; wall-clock times
//! go to a separate file so the manifest itself is reproducible.

use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use evclass::classifier::{bayes_preclassify, evidential_classify, fit_gaussians, PipelineConfig};
use evclass::eval::{accuracy_report, contingency, render_comparison, ContingencyTable};
use evclass::mass_model::{MassModel, MassModelConfig};
use evclass::pipeline::{fit_model, mask_labels, select_training_regions, DEFAULT_TRAIN_FRACTION};
use evclass::raster::{raster_paths, read_labelmap, read_raster, write_labelmap, write_raster, LabelMap};
use evclass::regions::Connectivity;
use evclass::synth::{generate_scene, SceneSpec, GENERATOR};
use evclass::Frame;

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "evclass",
    version,
    about = "Evidential contextual classification of multispectral images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene: raster, ground truth and frame.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Pixelwise Gaussian maximum likelihood classification.
    Preclassify {
        #[arg(long)]
        raster: PathBuf,
        /// Ground truth from which the training regions are drawn.
        #[arg(long = "train-labels")]
        train_labels: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
        /// Labels as a comma-separated list or a JSON file; defaults to 1..=max label.
        #[arg(long)]
        frame: Option<String>,
        /// Also write the selected training subset.
        #[arg(long = "train-out")]
        train_out: Option<PathBuf>,
    },
    /// Fit the histogram mass model.
    Fit {
        #[arg(long)]
        raster: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Labels as a comma-separated list or a JSON file.
        #[arg(long)]
        frame: String,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        /// Preclassification to learn from; computed from the training subset when absent.
        #[arg(long)]
        preclass: Option<PathBuf>,
        #[command(flatten)]
        training: TrainingArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Refine a preclassification with the evidential region procedure.
    Classify {
        #[arg(long)]
        raster: PathBuf,
        #[arg(long)]
        preclass: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Contingency table of a prediction against ground truth.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        /// Labels as a comma-separated list or a JSON file; defaults to 1..=max label.
        #[arg(long)]
        frame: Option<String>,
        /// Pixels labeled in this map (typically the training subset) are not scored.
        #[arg(long)]
        exclude: Option<PathBuf>,
    },
    /// Print a side-by-side accuracy comparison of contingency tables.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        tables: Vec<PathBuf>,
    },
}

#[derive(clap::Args, Clone, Copy, Serialize)]
struct TrainingArgs {
    /// Share of ground truth regions per class used for training.
    #[arg(long = "train-fraction", default_value_t = DEFAULT_TRAIN_FRACTION, value_parser = parse_fraction)]
    train_fraction: f64,
    /// Seed of the training region draw.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

/// Pipeline and mass model settings read by `fit` and `classify`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    pipeline: PipelineConfig,
    mass: MassModelConfig,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.pipeline.validate()?;
    config.mass.validate()?;
    Ok(config)
}

/// A comma-separated label list, or a JSON file holding either a label
/// array or an object with a `frame` array (such as a scene spec).
fn parse_frame(arg: &str) -> Result<Frame> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
        let labels = match value {
            Value::Object(mut map) => map
                .remove("frame")
                .with_context(|| format!("{arg}: no \"frame\" key"))?,
            other => other,
        };
        return serde_json::from_value(labels).with_context(|| format!("{arg}: not a label list"));
    }
    Ok(Frame::new(arg.split(',').map(str::trim))?)
}

fn numeric_frame(maps: &[&LabelMap]) -> Result<Frame> {
    let max = maps.iter().flat_map(|m| m.labels()).copied().max().unwrap_or(0);
    if max == 0 {
        bail!("label map has no labeled pixels");
    }
    Ok(Frame::new((1..=max).map(|l| l.to_string()))?)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Compact JSON with object keys sorted.
fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's default map is ordered by key, so a round trip through
    // Value sorts every object
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

/// Reproducibility record of one run.
struct Manifest {
    command: &'static str,
    config: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: SystemTime,
}

impl Manifest {
    fn new(command: &'static str, config: Value) -> Self {
        Self {
            command,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: SystemTime::now(),
        }
    }

    fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// A raster is recorded as its header and its payload.
    fn raster(&mut self, path: &Path) -> &mut Self {
        let (header, payload) = raster_paths(path);
        self.inputs.push(header);
        self.inputs.push(payload);
        self
    }

    fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Writes `path` and, next to it, the run times with a `.time.json`
    /// suffix in place of `.json`.
    fn write(&self, path: &Path) -> Result<()> {
        let canonical = canonical_json(&self.config)?;
        let files = |paths: &[PathBuf]| -> Result<Vec<Value>> {
            paths
                .iter()
                .map(|p| {
                    let bytes = fs::read(p).with_context(|| format!("hashing {}", p.display()))?;
                    Ok(json!({ "path": p.display().to_string(), "fnv1a64": format!("{:016x}", fnv1a(&bytes)) }))
                })
                .collect()
        };
        let doc = json!({
            "tool": "evclass",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "generator": GENERATOR,
            "config": self.config,
            "config_hash": format!("{:016x}", fnv1a(canonical.as_bytes())),
            "inputs": files(&self.inputs)?,
            "outputs": files(&self.outputs)?,
        });
        write_text(path, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
        let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let times = json!({ "started_unix": secs(self.started), "finished_unix": secs(SystemTime::now()) });
        let time_path = path.with_file_name(
            path.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.strip_suffix(".json").unwrap_or(n).to_string() + ".time.json")
                .unwrap_or_else(|| "manifest.time.json".into()),
        );
        write_text(&time_path, &(serde_json::to_string_pretty(&times)? + "\n"))
    }
}

/// Manifest path for a single-file output: `<output>.manifest.json`.
fn manifest_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn training_subset(labels: &LabelMap, training: TrainingArgs) -> Result<LabelMap> {
    Ok(select_training_regions(
        labels,
        training.train_fraction,
        training.seed,
        Connectivity::Four,
    )?)
}

fn synth(spec_path: &Path, out: &Path) -> Result<()> {
    let spec = SceneSpec::load(spec_path)?;
    let mut manifest = Manifest::new("synth", serde_json::to_value(&spec)?);
    manifest.input(spec_path);
    let (raster, truth) = generate_scene(&spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let raster_path = out.join("raster.json");
    write_raster(&raster, &raster_path)?;
    let truth_path = out.join("truth.pgm");
    write_labelmap(&truth, &truth_path)?;
    let frame_path = out.join("frame.json");
    write_text(&frame_path, &(serde_json::to_string_pretty(&spec.frame)? + "\n"))?;
    manifest
        .output(&raster_path)
        .output(&raster_path.with_extension("raw"))
        .output(&truth_path)
        .output(&frame_path);
    manifest.write(&out.join("manifest.json"))
}

fn preclassify(
    raster_path: &Path,
    labels_path: &Path,
    out: &Path,
    training: TrainingArgs,
    frame: Option<&str>,
    train_out: Option<&Path>,
) -> Result<()> {
    let raster = read_raster(raster_path)?;
    let labels = read_labelmap(labels_path)?;
    labels.check_shape(&raster)?;
    let frame = match frame {
        Some(f) => parse_frame(f)?,
        None => numeric_frame(&[&labels])?,
    };
    let train = training_subset(&labels, training)?;
    let gaussians = fit_gaussians(&raster, &train, &frame)?;
    let pre = bayes_preclassify(&raster, &gaussians)?;
    write_labelmap(&pre, out)?;
    let mut manifest = Manifest::new("preclassify", json!({ "training": training, "frame": frame }));
    manifest.raster(raster_path).input(labels_path).output(out);
    if let Some(path) = train_out {
        write_labelmap(&train, path)?;
        manifest.output(path);
    }
    manifest.write(&manifest_for(out))
}

#[allow(clippy::too_many_arguments)]
fn fit(
    raster_path: &Path,
    labels_path: &Path,
    frame: &str,
    out: &Path,
    preclass_path: Option<&Path>,
    training: TrainingArgs,
    config_path: Option<&Path>,
) -> Result<()> {
    let frame = parse_frame(frame)?;
    let config = load_config(config_path)?;
    let raster = read_raster(raster_path)?;
    let labels = read_labelmap(labels_path)?;
    labels.check_shape(&raster)?;
    let preclass = preclass_path.map(read_labelmap).transpose()?;
    if let Some(p) = &preclass {
        p.check_shape(&raster)?;
    }
    let train = training_subset(&labels, training)?;
    let model = fit_model(
        &raster,
        &train,
        &frame,
        preclass.as_ref(),
        &config.pipeline,
        &config.mass,
    )?;
    model.save(out)?;
    let mut manifest = Manifest::new("fit", json!({ "training": training, "frame": frame, "run": config }));
    manifest.raster(raster_path).input(labels_path);
    if let Some(p) = preclass_path {
        manifest.input(p);
    }
    if let Some(p) = config_path {
        manifest.input(p);
    }
    manifest.output(out).write(&manifest_for(out))
}

fn classify(
    raster_path: &Path,
    preclass_path: &Path,
    model_path: &Path,
    out: &Path,
    report_path: &Path,
    config_path: Option<&Path>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let raster = read_raster(raster_path)?;
    let preclass = read_labelmap(preclass_path)?;
    preclass.check_shape(&raster)?;
    let model = MassModel::load(model_path)?;
    let result = evidential_classify(&raster, &preclass, &model, &config.pipeline)?;
    write_labelmap(&result.labels, out)?;
    write_text(report_path, &(serde_json::to_string_pretty(&result.report)? + "\n"))?;
    let mut manifest = Manifest::new("classify", json!({ "pipeline": config.pipeline }));
    manifest.raster(raster_path).input(preclass_path).input(model_path);
    if let Some(p) = config_path {
        manifest.input(p);
    }
    manifest.output(out).output(report_path).write(&manifest_for(out))
}

fn eval(truth_path: &Path, pred_path: &Path, out: &Path, frame: Option<&str>, exclude: Option<&Path>) -> Result<()> {
    let mut truth = read_labelmap(truth_path)?;
    let pred = read_labelmap(pred_path)?;
    if truth.shape() != pred.shape() {
        bail!(
            "truth is {}x{} but prediction is {}x{}",
            truth.width(),
            truth.height(),
            pred.width(),
            pred.height()
        );
    }
    if let Some(path) = exclude {
        truth = mask_labels(&truth, &read_labelmap(path)?, false)?;
    }
    let frame = match frame {
        Some(f) => parse_frame(f)?,
        None => numeric_frame(&[&truth, &pred])?,
    };
    let table = contingency(&truth, &pred, &frame)?;
    let report = accuracy_report(&table)?;
    write_text(out, &table.to_csv())?;
    println!(
        "overall accuracy {:.2}% ({} of {} pixels)",
        report.overall, report.correct, report.total
    );
    let mut manifest = Manifest::new("eval", json!({ "frame": frame }));
    manifest.input(truth_path).input(pred_path);
    if let Some(p) = exclude {
        manifest.input(p);
    }
    manifest.output(out).write(&manifest_for(out))
}

fn report(paths: &[PathBuf]) -> Result<()> {
    let tables = paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let table = ContingencyTable::from_csv(&text).with_context(|| format!("parsing {}", p.display()))?;
            let name = p
                .file_stem()
                .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, table))
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", render_comparison(&tables)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { spec, out } => synth(&spec, &out),
        Command::Preclassify {
            raster,
            train_labels,
            out,
            training,
            frame,
            train_out,
        } => preclassify(
            &raster,
            &train_labels,
            &out,
            training,
            frame.as_deref(),
            train_out.as_deref(),
        ),
        Command::Fit {
            raster,
            labels,
            frame,
            out,
            preclass,
            training,
            config,
        } => fit(
            &raster,
            &labels,
            &frame,
            &out,
            preclass.as_deref(),
            training,
            config.as_deref(),
        ),
        Command::Classify {
            raster,
            preclass,
            model,
            out,
            report,
            config,
        } => classify(&raster, &preclass, &model, &out, &report, config.as_deref()),
        Command::Eval {
            truth,
            pred,
            out,
            frame,
            exclude,
        } => eval(&truth, &pred, &out, frame.as_deref(), exclude.as_deref()),
        Command::Report { tables } => report(&tables),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help/--version
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
