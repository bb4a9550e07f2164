//! `gaitsense` command-line tool.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data errors.

mod files;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gaitsense::bank::{Criterion, GaitBank};
use gaitsense::features::{affective_features, feature_csv_header, feature_csv_row};
use gaitsense::gait::{normalize_root, JointId};
use gaitsense::io::save_gait;
use gaitsense::pipeline::Pipeline;
use gaitsense::study::{self, ResponseMatrix};
use gaitsense::synth::synth_corpus;
use gaitsense::{EmotionLabel, LstmModel, RandomForest, TrainConfig};
use serde_json::json;

const LSTM_FILE: &str = "lstm.json";
const FOREST_FILE: &str = "forest.json";
const LOSS_FILE: &str = "loss_curve.csv";

#[derive(Debug, Parser)]
#[command(name = "gaitsense", version, about = "Perceived-emotion analysis of 3D walking sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the 29 affective features of each gait
    Extract {
        /// Gait files or directories of gait files
        #[arg(required = true)]
        gaits: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the LSTM and the random forest
    Train {
        /// Directory of gait files
        #[arg(long)]
        features_dir: PathBuf,
        /// `gait_id,label` CSV
        #[arg(long)]
        labels: PathBuf,
        /// Training config JSON; omitted fields take their defaults
        #[arg(long)]
        config: Option<PathBuf>,
        /// Model output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict emotion, class probabilities, valence and arousal
    Classify {
        #[arg(required = true)]
        gaits: Vec<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-frame, per-joint saliency of one gait
    Saliency {
        gait: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate perception-study ratings into labels, correlations and PCA
    Aggregate {
        ratings: PathBuf,
        #[arg(long, default_value_t = study::DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Drop participants whose ratings never vary
        #[arg(long)]
        drop_constant_raters: bool,
    },
    /// Generate a synthetic labeled corpus
    Synth {
        #[arg(long)]
        emotion: EmotionArg,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pick a gait with the requested emotion from a labeled directory
    Select {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        emotion: EmotionName,
        #[arg(long, value_enum, default_value_t = CriterionArg::First)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target mean foot speed in m/s, for `closest_speed`
        #[arg(long, required_if_eq("criterion", "closest_speed"))]
        speed: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum EmotionName {
    Happy,
    Angry,
    Sad,
    Neutral,
}

impl From<EmotionName> for EmotionLabel {
    fn from(e: EmotionName) -> Self {
        match e {
            EmotionName::Happy => Self::Happy,
            EmotionName::Angry => Self::Angry,
            EmotionName::Sad => Self::Sad,
            EmotionName::Neutral => Self::Neutral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum EmotionArg {
    Happy,
    Angry,
    Sad,
    Neutral,
    All,
}

impl EmotionArg {
    fn labels(self) -> Vec<EmotionLabel> {
        match self {
            Self::Happy => vec![EmotionLabel::Happy],
            Self::Angry => vec![EmotionLabel::Angry],
            Self::Sad => vec![EmotionLabel::Sad],
            Self::Neutral => vec![EmotionLabel::Neutral],
            Self::All => EmotionLabel::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum CriterionArg {
    First,
    Random,
    #[value(name = "closest_speed")]
    ClosestSpeed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Extract { gaits, out } => extract(&gaits, out.as_deref()),
        Command::Train {
            features_dir,
            labels,
            config,
            out,
        } => train(&features_dir, &labels, config.as_deref(), &out),
        Command::Classify { gaits, model, out } => classify(&gaits, &model, out.as_deref()),
        Command::Saliency { gait, model, out } => saliency(&gait, &model, out.as_deref()),
        Command::Aggregate {
            ratings,
            theta,
            out,
            drop_constant_raters,
        } => aggregate(&ratings, theta, &out, drop_constant_raters),
        Command::Synth {
            emotion,
            n,
            seed,
            out,
        } => synth(emotion, n, seed, &out),
        Command::Select {
            bank,
            emotion,
            criterion,
            seed,
            speed,
        } => select(&bank, emotion, criterion, seed, speed),
    }
}

fn extract(inputs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut text = feature_csv_header();
    text.push('\n');
    for (path, g) in files::load_all(&files::gait_paths(inputs)?)? {
        let f = affective_features(&g).with_context(|| format!("{}", path.display()))?;
        text.push_str(&feature_csv_row(g.id(), &f));
        text.push('\n');
    }
    files::emit(out, &text)
}

fn train(dir: &Path, labels_path: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg: TrainConfig = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("{}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("{}", p.display()))?
        }
        None => TrainConfig::default(),
    };
    let labels = files::read_labels(labels_path)?;
    let mut gaits = files::load_all(&files::gait_paths(&[dir.to_path_buf()])?)?;
    gaits.sort_by(|a, b| a.1.id().cmp(b.1.id()));

    let mut data = Vec::new();
    for (id, label) in &labels {
        let Some(label) = label else { continue };
        let Some((_, g)) = gaits.iter().find(|(_, g)| g.id() == id) else {
            bail!("{}: gait '{id}' not found in {}", labels_path.display(), dir.display());
        };
        data.push((g.clone(), *label));
    }
    let fitted = Pipeline::fit(&data, &cfg)?;

    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    files::write(&out.join(LSTM_FILE), &fitted.pipeline.lstm.to_json())?;
    files::write(&out.join(FOREST_FILE), &fitted.pipeline.forest.to_json())?;
    let mut curve = String::from("epoch,loss\n");
    for (epoch, loss) in fitted.loss_curve.iter().enumerate() {
        writeln!(curve, "{epoch},{loss}")?;
    }
    files::write(&out.join(LOSS_FILE), &curve)?;
    eprintln!("trained on {} gaits; model written to {}", data.len(), out.display());
    Ok(())
}

fn load_pipeline(dir: &Path) -> Result<Pipeline> {
    if !dir.is_dir() {
        bail!("model directory {} does not exist", dir.display());
    }
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read_to_string(&p).with_context(|| format!("{}", p.display()))
    };
    let lstm = LstmModel::from_json(&read(LSTM_FILE)?)
        .with_context(|| format!("{}", dir.join(LSTM_FILE).display()))?;
    let forest = RandomForest::from_json(&read(FOREST_FILE)?)
        .with_context(|| format!("{}", dir.join(FOREST_FILE).display()))?;
    let pipeline = Pipeline { lstm, forest };
    if pipeline.forest.stats.dim() != pipeline.feature_dim() {
        bail!(
            "{}: forest expects {} features but the LSTM provides {}",
            dir.display(),
            pipeline.forest.stats.dim(),
            pipeline.feature_dim()
        );
    }
    Ok(pipeline)
}

fn classify(inputs: &[PathBuf], model: &Path, out: Option<&Path>) -> Result<()> {
    let pipeline = load_pipeline(model)?;
    let mut text = String::from("gait_id,label,p_happy,p_angry,p_sad,p_neutral,valence,arousal\n");
    for (path, g) in files::load_all(&files::gait_paths(inputs)?)? {
        let c = pipeline.classify(&g).with_context(|| format!("{}", path.display()))?;
        let [ph, pa, ps, pn] = c.probabilities.0;
        writeln!(
            text,
            "{},{},{ph},{pa},{ps},{pn},{},{}",
            g.id(),
            c.label,
            c.affect.valence,
            c.affect.arousal
        )?;
    }
    files::emit(out, &text)
}

fn saliency(path: &Path, model: &Path, out: Option<&Path>) -> Result<()> {
    let pipeline = load_pipeline(model)?;
    let g = files::load(path)?;
    let map = pipeline.lstm.saliency(&normalize_root(&g));
    let mut text = String::from("frame");
    for j in JointId::ALL {
        text.push(',');
        text.push_str(j.name());
    }
    text.push('\n');
    for (t, row) in map.iter().enumerate() {
        write!(text, "{t}")?;
        for v in row {
            write!(text, ",{v}")?;
        }
        text.push('\n');
    }
    files::emit(out, &text)
}

fn aggregate(path: &Path, theta: f64, out: &Path, drop_constant: bool) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    let mut m = ResponseMatrix::from_csv(&text).with_context(|| format!("{}", path.display()))?;
    if drop_constant {
        m = m.without_constant_raters();
    }
    let means = study::mean_responses(&m);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    files::write_labels(
        &out.join(files::LABELS_FILE),
        means.iter().map(|r| (r.gait_id.as_str(), study::assign_label(&r.means, theta))),
    )?;

    let corr = study::response_correlation(&m).with_context(|| format!("{}", path.display()))?;
    let mut csv = String::from("emotion,happy,angry,sad,neutral\n");
    for e in EmotionLabel::ALL {
        let row = corr.matrix[e.index()];
        writeln!(csv, "{e},{},{},{},{}", row[0], row[1], row[2], row[3])?;
        if corr.constant[e.index()] {
            eprintln!("warning: mean {e} ratings are constant; its correlations are reported as 0");
        }
    }
    files::write(&out.join("correlation.csv"), &csv)?;

    let rows: Vec<Vec<f64>> = means.iter().map(|r| r.means[..3].to_vec()).collect();
    let pca = study::pca(&rows).with_context(|| format!("{}", path.display()))?;
    let report = json!({
        "columns": ["happy", "angry", "sad"],
        "mean": pca.mean,
        "components": pca.components,
        "explained_variance": pca.explained_variance,
        "explained_variance_ratio": pca.explained_variance_ratio,
    });
    files::write(&out.join("pca.json"), &serde_json::to_string_pretty(&report)?)
}

fn synth(emotion: EmotionArg, n: usize, seed: u64, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let labels_path = out.join(files::LABELS_FILE);
    let mut labels = if labels_path.exists() {
        files::read_labels(&labels_path)?
    } else {
        Default::default()
    };
    for e in emotion.labels() {
        for g in synth_corpus(e, n, seed) {
            let path = out.join(format!("{}.json", g.id()));
            save_gait(&g, &path).with_context(|| format!("{}", path.display()))?;
            labels.insert(g.id().to_string(), Some(e));
        }
    }
    files::write_labels(&labels_path, labels.iter().map(|(id, l)| (id.as_str(), *l)))
}

fn select(
    dir: &Path,
    emotion: EmotionName,
    criterion: CriterionArg,
    seed: u64,
    speed: Option<f64>,
) -> Result<()> {
    let labels = files::read_labels(&dir.join(files::LABELS_FILE))?;
    let mut paths = Vec::new();
    let mut entries = Vec::new();
    for (path, g) in files::load_all(&files::gait_paths(&[dir.to_path_buf()])?)? {
        if let Some(Some(label)) = labels.get(g.id()) {
            entries.push((g, *label));
            paths.push(path);
        }
    }
    let criterion = match criterion {
        CriterionArg::First => Criterion::First,
        CriterionArg::Random => Criterion::Random { seed },
        CriterionArg::ClosestSpeed => Criterion::ClosestSpeed {
            speed: speed.context("--speed is required for closest_speed")?,
        },
    };
    let i = GaitBank::new(entries).select_index(emotion.into(), criterion)?;
    println!("{}", paths[i].display());
    Ok(())
}
