use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gaitsense::io::load_gait;
use gaitsense::{EmotionLabel, Gait};

pub const LABELS_FILE: &str = "labels.csv";
pub const UNLABELED: &str = "unlabeled";

/// Whether `path` holds a gait: any `.json`, or a `.csv` whose first line is
/// the `fps,` header (so label and feature tables in the same directory are
/// skipped).
fn is_gait_file(path: &Path) -> Result<bool> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(true),
        Some("csv") => {
            let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
            Ok(text.lines().next().is_some_and(|l| l.trim_start().starts_with("fps")))
        }
        _ => Ok(false),
    }
}

/// Expand directories into their gait files and sort everything by path.
pub fn gait_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = fs::read_dir(input).with_context(|| format!("{}", input.display()))?;
            for entry in entries {
                let path = entry?.path();
                if path.is_file() && is_gait_file(&path)? {
                    out.push(path);
                }
            }
        } else {
            out.push(input.clone());
        }
    }
    out.sort();
    Ok(out)
}

pub fn load(path: &Path) -> Result<Gait> {
    load_gait(path).with_context(|| format!("{}", path.display()))
}

pub fn load_all(paths: &[PathBuf]) -> Result<Vec<(PathBuf, Gait)>> {
    paths.iter().map(|p| Ok((p.clone(), load(p)?))).collect()
}

/// `gait_id,label` rows; unlabeled rows map to `None`.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, Option<EmotionLabel>>> {
    let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "gait_id,label" => {}
        _ => bail!("{}: line 1: expected header 'gait_id,label'", path.display()),
    }
    let mut labels = BTreeMap::new();
    for (i, line) in lines {
        let Some((id, label)) = line.split_once(',') else {
            bail!("{}: line {}: expected 'gait_id,label'", path.display(), i + 1);
        };
        let label = label.trim();
        let value = if label == UNLABELED {
            None
        } else {
            Some(
                label
                    .parse::<EmotionLabel>()
                    .with_context(|| format!("{}: line {}", path.display(), i + 1))?,
            )
        };
        labels.insert(id.trim().to_string(), value);
    }
    Ok(labels)
}

pub fn write_labels<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = (&'a str, Option<EmotionLabel>)>,
) -> Result<()> {
    let mut text = String::from("gait_id,label\n");
    for (id, label) in rows {
        let name = label.map_or(UNLABELED, EmotionLabel::name);
        text.push_str(&format!("{id},{name}\n"));
    }
    write(path, &text)
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
