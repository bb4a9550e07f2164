//! Gait file formats.
//!
//! CSV layout:
//!
//! ```text
//! fps,30
//! t,root_x,root_y,root_z,spine_x,...,rfoot_z
//! 0,0,0.93,0,...
//! ```
//!
//! Joint columns may appear in any order in the header; they are remapped to
//! the canonical [`JointId`] order on load. JSON layout is
//! `{"id": "...", "fps": 30, "frames": [[48 numbers], ...]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gait::{Gait, GaitError, JointId, Pose, JOINT_COUNT, POSE_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitFormat {
    Csv,
    Json,
}

impl GaitFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}, column {column}: {value:?} is not a number")]
    NonNumeric {
        line: usize,
        column: usize,
        value: String,
    },
    #[error("line {line}: expected 48 coordinates, found {found}")]
    WrongColumnCount { line: usize, found: usize },
    #[error("frame rate must be positive, got {0}")]
    InvalidFrameRate(f64),
    #[error("line {line}: {source}")]
    InvalidFrame { line: usize, source: GaitError },
    #[error(transparent)]
    Gait(#[from] GaitError),
    #[error("invalid UTF-8: {0}")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unrecognized gait file extension for {0}")]
    UnknownFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Column name of coordinate `axis` (0..3) of joint `j`.
pub fn coordinate_column(j: JointId, axis: usize) -> String {
    format!("{}_{}", j.name(), ["x", "y", "z"][axis])
}

pub fn parse_gait(bytes: &[u8], format: GaitFormat) -> Result<Gait, ParseError> {
    let text = std::str::from_utf8(bytes)?;
    match format {
        GaitFormat::Csv => parse_csv(text),
        GaitFormat::Json => parse_json(text),
    }
}

pub fn serialize_gait(g: &Gait, format: GaitFormat) -> String {
    match format {
        GaitFormat::Csv => to_csv(g),
        GaitFormat::Json => to_json(g),
    }
}

/// Load a gait file, using the file stem as the id when the file has none.
pub fn load_gait(path: &Path) -> Result<Gait, ParseError> {
    let format = GaitFormat::from_path(path)
        .ok_or_else(|| ParseError::UnknownFormat(path.display().to_string()))?;
    let bytes = std::fs::read(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut g = parse_gait(&bytes, format)?;
    if g.id().is_empty() {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            g.set_id(stem);
        }
    }
    Ok(g)
}

pub fn save_gait(g: &Gait, path: &Path) -> Result<(), ParseError> {
    let format = GaitFormat::from_path(path)
        .ok_or_else(|| ParseError::UnknownFormat(path.display().to_string()))?;
    std::fs::write(path, serialize_gait(g, format)).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_number(cell: &str, line: usize, column: usize) -> Result<f64, ParseError> {
    cell.trim().parse::<f64>().map_err(|_| ParseError::NonNumeric {
        line,
        column,
        value: cell.to_string(),
    })
}

fn parse_csv(text: &str) -> Result<Gait, ParseError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (ln, fps_line) = lines.next().ok_or(ParseError::MalformedHeader {
        line: 1,
        message: "empty file".into(),
    })?;
    let fps_cells: Vec<&str> = fps_line.split(',').map(str::trim).collect();
    if fps_cells.len() != 2 || fps_cells[0] != "fps" {
        return Err(ParseError::MalformedHeader {
            line: ln + 1,
            message: "expected `fps,<rate>`".into(),
        });
    }
    let fps = parse_number(fps_cells[1], ln + 1, 2)?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(ParseError::InvalidFrameRate(fps));
    }

    let (ln, header) = lines.next().ok_or(ParseError::MalformedHeader {
        line: ln + 2,
        message: "missing column header".into(),
    })?;
    let columns = column_mapping(header, ln + 1)?;

    let mut frames = Vec::new();
    for (ln, row) in lines {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != POSE_DIM + 1 {
            return Err(ParseError::WrongColumnCount {
                line: ln + 1,
                found: cells.len().saturating_sub(1),
            });
        }
        parse_number(cells[0], ln + 1, 1)?;
        let mut coords = [0.0; POSE_DIM];
        for (k, cell) in cells[1..].iter().enumerate() {
            coords[columns[k]] = parse_number(cell, ln + 1, k + 2)?;
        }
        let pose = Pose::new(coords).map_err(|source| ParseError::InvalidFrame {
            line: ln + 1,
            source,
        })?;
        frames.push(pose);
    }
    Ok(Gait::new("", fps, frames)?)
}

/// Maps each coordinate column of the header to its canonical flat index.
fn column_mapping(header: &str, line: usize) -> Result<Vec<usize>, ParseError> {
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.first() != Some(&"t") {
        return Err(ParseError::MalformedHeader {
            line,
            message: "first column must be `t`".into(),
        });
    }
    if names.len() != POSE_DIM + 1 {
        return Err(ParseError::WrongColumnCount {
            line,
            found: names.len() - 1,
        });
    }
    let mut mapping = Vec::with_capacity(POSE_DIM);
    let mut seen = [false; POSE_DIM];
    for name in &names[1..] {
        let bad = || ParseError::MalformedHeader {
            line,
            message: format!("unknown coordinate column {name:?}"),
        };
        let (joint, axis) = name.rsplit_once('_').ok_or_else(bad)?;
        let joint: JointId = joint.parse().map_err(|_| bad())?;
        let axis = match axis.to_ascii_lowercase().as_str() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => return Err(bad()),
        };
        let k = 3 * joint.index() + axis;
        if std::mem::replace(&mut seen[k], true) {
            return Err(ParseError::MalformedHeader {
                line,
                message: format!("duplicate column {name:?}"),
            });
        }
        mapping.push(k);
    }
    Ok(mapping)
}

fn to_csv(g: &Gait) -> String {
    let mut out = format!("fps,{}\nt", g.frame_rate());
    for j in JointId::ALL {
        for axis in 0..3 {
            out.push(',');
            out.push_str(&coordinate_column(j, axis));
        }
    }
    out.push('\n');
    for (t, pose) in g.frames().iter().enumerate() {
        let _ = write!(out, "{}", t as f64 / g.frame_rate());
        for c in pose.coords() {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct GaitJson {
    #[serde(default)]
    id: String,
    fps: f64,
    frames: Vec<Vec<f64>>,
}

fn parse_json(text: &str) -> Result<Gait, ParseError> {
    let raw: GaitJson = serde_json::from_str(text)?;
    if !(raw.fps.is_finite() && raw.fps > 0.0) {
        return Err(ParseError::InvalidFrameRate(raw.fps));
    }
    let frames = raw
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let coords: [f64; POSE_DIM] =
                f.as_slice().try_into().map_err(|_| ParseError::WrongColumnCount {
                    line: i + 1,
                    found: f.len(),
                })?;
            Pose::new(coords).map_err(|source| ParseError::InvalidFrame { line: i + 1, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Gait::new(raw.id, raw.fps, frames)?)
}

fn to_json(g: &Gait) -> String {
    let raw = GaitJson {
        id: g.id().to_string(),
        fps: g.frame_rate(),
        frames: g.frames().iter().map(|p| p.coords().to_vec()).collect(),
    };
    serde_json::to_string(&raw).expect("gait serializes")
}

const _: () = assert!(POSE_DIM == 3 * JOINT_COUNT);

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let mut h = "t".to_string();
        for j in JointId::ALL {
            for a in 0..3 {
                h.push(',');
                h.push_str(&coordinate_column(j, a));
            }
        }
        h
    }

    #[test]
    fn two_zero_frames() {
        let row = format!("0{}", ",0".repeat(48));
        let text = format!("fps,30\n{}\n{row}\n{row}\n", header());
        let g = parse_gait(text.as_bytes(), GaitFormat::Csv).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.frame_rate(), 30.0);
    }

    #[test]
    fn short_row_names_arity() {
        let row = format!("0{}", ",0".repeat(47));
        let text = format!("fps,30\n{}\n{row}\n", header());
        let err = parse_gait(text.as_bytes(), GaitFormat::Csv).unwrap_err();
        assert!(matches!(err, ParseError::WrongColumnCount { line: 3, found: 47 }));
        assert!(err.to_string().contains("expected 48 coordinates"));
    }

    #[test]
    fn short_header_names_arity() {
        let h = header();
        let h = &h[..h.rfind(',').unwrap()];
        let text = format!("fps,30\n{h}\n");
        let err = parse_gait(text.as_bytes(), GaitFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("expected 48 coordinates"), "{err}");
    }

    #[test]
    fn distinct_errors() {
        let row = format!("0{}", ",0".repeat(48));
        let bad_fps = format!("fps,0\n{}\n{row}\n{row}\n", header());
        assert!(matches!(
            parse_gait(bad_fps.as_bytes(), GaitFormat::Csv),
            Err(ParseError::InvalidFrameRate(_))
        ));
        let bad_header = format!("rate,30\n{}\n", header());
        assert!(matches!(
            parse_gait(bad_header.as_bytes(), GaitFormat::Csv),
            Err(ParseError::MalformedHeader { line: 1, .. })
        ));
        let bad_cell = format!("fps,30\n{}\n{row}\n0,abc{}\n", header(), ",0".repeat(47));
        assert!(matches!(
            parse_gait(bad_cell.as_bytes(), GaitFormat::Csv),
            Err(ParseError::NonNumeric { line: 4, column: 2, .. })
        ));
    }

    #[test]
    fn columns_are_remapped_to_canonical_order() {
        // swap the root and rfoot column blocks in the header
        let names: Vec<String> = header().split(',').map(String::from).collect();
        let mut swapped = names.clone();
        for a in 0..3 {
            swapped.swap(1 + a, 1 + 45 + a);
        }
        let mut row = vec!["0".to_string()];
        row.extend((0..48).map(|k| k.to_string()));
        let text = format!("fps,10\n{}\n{}\n{}\n", swapped.join(","), row.join(","), row.join(","));
        let g = parse_gait(text.as_bytes(), GaitFormat::Csv).unwrap();
        assert_eq!(g.joint(0, JointId::Root).x, 45.0);
        assert_eq!(g.joint(0, JointId::RFoot).x, 0.0);
        assert_eq!(g.joint(0, JointId::Spine).y, 4.0);
    }

    #[test]
    fn json_frame_arity() {
        let text = r#"{"id":"a","fps":30,"frames":[[0,0,0],[0,0,0]]}"#;
        assert!(matches!(
            parse_gait(text.as_bytes(), GaitFormat::Json),
            Err(ParseError::WrongColumnCount { line: 1, found: 3 })
        ));
    }
}
