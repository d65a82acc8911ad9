//! `xplain` command line. Exit codes: 0 success, 1 domain error, 2 usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use xplain_core::views::{FormatId, ReferenceId};
use xplain_core::{run_conformance, Hyperparams, ModelKind};

use crate::config::{SessionConfig, PORT_ENV};
use crate::engine::{train_on_split, Engine, ExplainDefaults, Method};
use crate::error::AppError;
use crate::persist::{load_dataset_file, load_model, save_model};
use crate::server::{build_service, serve};

#[derive(Debug, Parser)]
#[command(name = "xplain", version, about = "Train a classifier and explain its predictions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on the 80% split and write the model file.
    Train(TrainArgs),
    /// Predict one instance.
    Predict(PredictArgs),
    /// Run one explainer and print its JSON.
    Explain(ExplainArgs),
    /// Print the chart series of one view as JSON.
    ExportChart(ExportChartArgs),
    /// Check the nine design features and print a pass table.
    Conformance(ConformanceArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArg {
    /// CSV file; the bundled IRIS data when omitted.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArg,
    /// `decision_tree` (`tree`) or `logistic_regression` (`logistic`).
    #[arg(long, value_name = "KIND", default_value = "decision_tree")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArg,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// JSON array, or object keyed by feature name.
    #[arg(long, value_name = "JSON")]
    pub instance: String,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub data: DataArg,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// lime, shap, anchors or cf.
    #[arg(long)]
    pub method: Method,
    #[arg(long, value_name = "JSON")]
    pub instance: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub target_class: Option<usize>,
    /// JSON object overriding explainer settings.
    #[arg(long, value_name = "JSON")]
    pub config: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportChartArgs {
    #[command(flatten)]
    pub data: DataArg,
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Reference method id, e.g. `why` or `certainty`.
    #[arg(long)]
    pub reference: ReferenceId,
    #[arg(long, value_name = "JSON")]
    pub instance: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// bar or waterfall, where the view offers a choice.
    #[arg(long)]
    pub chart_kind: Option<String>,
    /// shap or lime.
    #[arg(long)]
    pub attribution: Option<String>,
    #[arg(long)]
    pub foil_class: Option<usize>,
    #[arg(long)]
    pub desired_class: Option<usize>,
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConformanceArgs {
    #[command(flatten)]
    pub data: DataArg,
    /// Model file; a depth-3 tree is trained when omitted.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Print the rows as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML session config; defaults apply when omitted.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value).expect("serializes");
    writeln!(out, "{text}").map_err(|e| AppError::io(Path::new("<stdout>"), e))
}

fn parse_json(flag: &str, text: &str) -> Result<Value, AppError> {
    serde_json::from_str(text).map_err(|e| AppError::Invalid {
        field: flag.into(),
        message: format!("not valid JSON: {e}"),
    })
}

fn engine_for(model: &Path, data: &DataArg) -> Result<Engine, AppError> {
    let dataset = load_dataset_file(data.data.as_deref())?;
    Engine::new(dataset, load_model(model)?, ExplainDefaults::default())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, AppError> {
    match command {
        Command::Train(a) => {
            let dataset = load_dataset_file(a.data.data.as_deref())?;
            let d = Hyperparams::default();
            let h = Hyperparams {
                max_depth: a.max_depth.unwrap_or(d.max_depth),
                iterations: a.iterations.unwrap_or(d.iterations),
                learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
            };
            let (model, accuracy, n_train, n_test) = train_on_split(&dataset, a.model, &h, a.seed)?;
            save_model(&model, &a.out)?;
            print_json(
                out,
                &json!({
                    "model": a.out.display().to_string(),
                    "kind": a.model,
                    "seed": a.seed,
                    "holdout_accuracy": accuracy,
                    "n_train": n_train,
                    "n_test": n_test,
                    "dataset_fingerprint": model.dataset_fingerprint(),
                }),
            )?;
        }
        Command::Predict(a) => {
            let engine = engine_for(&a.model, &a.data)?;
            let x = engine.parse_instance(&parse_json("instance", &a.instance)?)?;
            print_json(out, &serde_json::to_value(engine.predict(&x)?).expect("serializes"))?;
        }
        Command::Explain(a) => {
            let engine = engine_for(&a.model, &a.data)?;
            let x = engine.parse_instance(&parse_json("instance", &a.instance)?)?;
            let overrides = match &a.config {
                Some(text) => parse_json("config", text)?,
                None => Value::Null,
            };
            let explained = engine.explain(a.method, &x, a.target_class, &overrides, a.seed)?;
            print_json(
                out,
                &json!({"method": a.method, "result": explained.result, "seed": a.seed, "config": explained.config}),
            )?;
        }
        Command::ExportChart(a) => {
            let engine = engine_for(&a.model, &a.data)?;
            let x = engine.parse_instance(&parse_json("instance", &a.instance)?)?;
            let mut options = json!({"seed": a.seed});
            for (k, v) in [("chart_kind", a.chart_kind), ("attribution", a.attribution)] {
                if let Some(v) = v {
                    options[k] = v.into();
                }
            }
            for (k, v) in [("foil_class", a.foil_class), ("desired_class", a.desired_class)] {
                if let Some(v) = v {
                    options[k] = v.into();
                }
            }
            let (view, _) = engine.render(a.reference, FormatId::Chart, &x, &options)?;
            let chart = &view["payload"]["content"];
            match &a.out {
                Some(path) => {
                    let text = serde_json::to_string_pretty(chart).expect("serializes") + "\n";
                    std::fs::write(path, text).map_err(|e| AppError::io(path, e))?;
                }
                None => print_json(out, chart)?,
            }
        }
        Command::Conformance(a) => {
            let dataset = load_dataset_file(a.data.data.as_deref())?;
            let model = match &a.model {
                Some(p) => load_model(p)?,
                None => {
                    let h = Hyperparams {
                        max_depth: 3,
                        ..Hyperparams::default()
                    };
                    train_on_split(&dataset, ModelKind::DecisionTree, &h, 7)?.0
                }
            };
            crate::persist::check_fingerprint(&model, &dataset)?;
            let rows = run_conformance(&model, &dataset, None, a.seed);
            let passed = rows.iter().filter(|r| r.passed).count();
            if a.json {
                print_json(out, &serde_json::to_value(&rows).expect("serializes"))?;
            } else {
                let io = |e| AppError::io(Path::new("<stdout>"), e);
                writeln!(out, "{:<4} {:<6} design feature", "id", "result").map_err(io)?;
                for r in &rows {
                    let status = if r.passed { "PASS" } else { "FAIL" };
                    writeln!(out, "{:<4} {:<6} {}", r.id, status, r.description).map_err(io)?;
                    if !r.passed {
                        writeln!(out, "{:<11} {}", "", r.detail).map_err(io)?;
                    }
                }
                writeln!(out, "{passed}/{} passed", rows.len()).map_err(io)?;
            }
            return Ok(if passed == rows.len() { 0 } else { 1 });
        }
        Command::Serve(a) => {
            let mut cfg = match &a.config {
                Some(p) => SessionConfig::load(p)?,
                None => SessionConfig::default(),
            };
            cfg.apply_env(std::env::var(PORT_ENV).ok())?;
            let service = build_service(&cfg)?;
            let _ = writeln!(err, "model {} loaded", service.engine().model_fingerprint());
            let rt = tokio::runtime::Runtime::new().map_err(|e| AppError::io(Path::new("<runtime>"), e))?;
            rt.block_on(serve(service, &cfg.server.host, cfg.server.port))?;
        }
    }
    Ok(0)
}
