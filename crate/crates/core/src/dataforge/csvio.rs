use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{CourtSpec, RawFrame, RawShot};

pub(crate) const HEADER: &str = "shot_id,frame_idx,x_ft,y_ft,z_ft,game_clock_s,label";

/// Margin beyond the court rectangle that coordinates may occupy.
const BOUNDS_MARGIN_FT: f64 = 10.0;
/// Generous ceiling for ball height; indoor arenas are far lower.
const MAX_Z_FT: f64 = 100.0;

/// Load shots from the documented CSV schema:
/// `shot_id,frame_idx,x_ft,y_ft,z_ft,game_clock_s,label` with
/// label ∈ {hit,miss}. Shots come back grouped by id in first-appearance
/// order, frames ordered by frame index.
pub fn load_csv(path: &Path, court: &CourtSpec) -> Result<Vec<RawShot>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Schema(format!("{other:?}")),
        })?;

    {
        let headers = reader
            .headers()
            .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?;
        let got = headers.iter().collect::<Vec<_>>().join(",");
        if got != HEADER {
            return Err(Error::Schema(format!(
                "header {got:?}, expected {HEADER:?}"
            )));
        }
    }

    let mut order: Vec<u64> = Vec::new();
    let mut shots: HashMap<u64, (Vec<(u64, RawFrame)>, bool)> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => Error::Parse {
                line: pos.line(),
                message: e.to_string(),
            },
            None => Error::Schema(e.to_string()),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field {name}"),
            })
        };
        let parse_u64 = |i: usize, name: &str| -> Result<u64> {
            field(i, name)?.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad {name} {:?}", record.get(i).unwrap_or("")),
            })
        };
        let parse_f64 = |i: usize, name: &str| -> Result<f64> {
            let v: f64 = field(i, name)?.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad {name} {:?}", record.get(i).unwrap_or("")),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite {name} {v:?}"),
                });
            }
            Ok(v)
        };

        let shot_id = parse_u64(0, "shot_id")?;
        let frame_idx = parse_u64(1, "frame_idx")?;
        let frame = RawFrame {
            x_ft: parse_f64(2, "x_ft")?,
            y_ft: parse_f64(3, "y_ft")?,
            z_ft: parse_f64(4, "z_ft")?,
            clock_s: parse_f64(5, "game_clock_s")?,
        };
        let hit = match field(6, "label")?.trim() {
            "hit" => true,
            "miss" => false,
            other => {
                return Err(Error::Schema(format!(
                    "unknown label token {other:?} at line {line}"
                )));
            }
        };

        let entry = shots.entry(shot_id).or_insert_with(|| {
            order.push(shot_id);
            (Vec::new(), hit)
        });
        if entry.1 != hit {
            return Err(Error::Schema(format!(
                "shot {shot_id} has conflicting labels (line {line})"
            )));
        }
        entry.0.push((frame_idx, frame));
    }

    let x_lo = -BOUNDS_MARGIN_FT;
    let x_hi = court.length_ft + BOUNDS_MARGIN_FT;
    let y_lo = -BOUNDS_MARGIN_FT;
    let y_hi = court.width_ft + BOUNDS_MARGIN_FT;

    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let (mut frames, hit) = shots.remove(&id).expect("inserted above");
        frames.sort_by_key(|(idx, _)| *idx);
        let frames: Vec<RawFrame> = frames.into_iter().map(|(_, f)| f).collect();
        for pair in frames.windows(2) {
            if pair[1].clock_s > pair[0].clock_s {
                return Err(Error::Schema(format!(
                    "shot {id}: game clock increases between frames"
                )));
            }
        }
        for f in &frames {
            let in_bounds = f.x_ft >= x_lo
                && f.x_ft <= x_hi
                && f.y_ft >= y_lo
                && f.y_ft <= y_hi
                && f.z_ft >= -BOUNDS_MARGIN_FT
                && f.z_ft <= MAX_Z_FT;
            if !in_bounds {
                return Err(Error::Schema(format!(
                    "shot {id}: coordinates ({}, {}, {}) outside court bounds + {BOUNDS_MARGIN_FT} ft",
                    f.x_ft, f.y_ft, f.z_ft
                )));
            }
        }
        out.push(RawShot { id, frames, hit });
    }
    Ok(out)
}

/// Render shots in the documented schema. Floats are printed in shortest
/// round-trip form (full precision), lines end in LF.
pub fn shots_to_csv_string(shots: &[RawShot]) -> String {
    let mut out = String::with_capacity(shots.len() * 64);
    out.push_str(HEADER);
    out.push('\n');
    for shot in shots {
        let label = if shot.hit { "hit" } else { "miss" };
        for (idx, f) in shot.frames.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                shot.id, idx, f.x_ft, f.y_ft, f.z_ft, f.clock_s, label
            )
            .unwrap();
        }
    }
    out
}

/// Write shots as CSV atomically.
pub fn save_csv(shots: &[RawShot], path: &Path) -> Result<()> {
    crate::write_atomic(path, shots_to_csv_string(shots).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_shots() -> Vec<RawShot> {
        vec![
            RawShot {
                id: 4,
                frames: (0..14)
                    .map(|k| RawFrame {
                        x_ft: 25.0 + k as f64,
                        y_ft: 25.0,
                        z_ft: 8.0 + 0.25 * k as f64,
                        clock_s: 300.0 - 0.04 * k as f64,
                    })
                    .collect(),
                hit: true,
            },
            RawShot {
                id: 9,
                frames: (0..13)
                    .map(|k| RawFrame {
                        x_ft: 60.0 + 0.5 * k as f64,
                        y_ft: 20.0,
                        z_ft: 9.0,
                        clock_s: 120.0,
                    })
                    .collect(),
                hit: false,
            },
        ]
    }

    #[test]
    fn round_trip_of_emitted_fixture() {
        let shots = fixture_shots();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shots.csv");
        save_csv(&shots, &path).unwrap();
        let loaded = load_csv(&path, &CourtSpec::default()).unwrap();
        assert_eq!(loaded, shots);
        assert_eq!(loaded[0].frames.len(), 14);
        assert_eq!(loaded[1].frames.len(), 13);
    }

    #[test]
    fn header_only_file_gives_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, format!("{HEADER}\n")).unwrap();
        let loaded = load_csv(&path, &CourtSpec::default()).unwrap();
        assert!(loaded.is_empty());
    }

    #[test]
    fn nan_coordinate_is_parse_error_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nan.csv");
        std::fs::write(
            &path,
            format!("{HEADER}\n1,0,25.0,25.0,8.0,300.0,hit\n1,1,NaN,25.0,8.1,299.96,hit\n"),
        )
        .unwrap();
        let err = load_csv(&path, &CourtSpec::default()).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("x_ft"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_label_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("label.csv");
        std::fs::write(&path, format!("{HEADER}\n1,0,25.0,25.0,8.0,300.0,swish\n")).unwrap();
        assert!(matches!(
            load_csv(&path, &CourtSpec::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn wrong_header_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hdr.csv");
        std::fs::write(&path, "a,b,c\n").unwrap();
        assert!(matches!(
            load_csv(&path, &CourtSpec::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn increasing_clock_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clock.csv");
        std::fs::write(
            &path,
            format!("{HEADER}\n1,0,25.0,25.0,8.0,300.0,hit\n1,1,25.5,25.0,8.1,301.0,hit\n"),
        )
        .unwrap();
        assert!(matches!(
            load_csv(&path, &CourtSpec::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn out_of_bounds_coordinate_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oob.csv");
        std::fs::write(&path, format!("{HEADER}\n1,0,150.0,25.0,8.0,300.0,hit\n")).unwrap();
        assert!(matches!(
            load_csv(&path, &CourtSpec::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn frames_reordered_by_frame_idx() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("order.csv");
        std::fs::write(
            &path,
            format!(
                "{HEADER}\n1,1,26.0,25.0,8.1,299.96,hit\n1,0,25.0,25.0,8.0,300.0,hit\n"
            ),
        )
        .unwrap();
        let shots = load_csv(&path, &CourtSpec::default()).unwrap();
        assert_eq!(shots[0].frames[0].x_ft, 25.0);
        assert_eq!(shots[0].frames[1].x_ft, 26.0);
    }
}
