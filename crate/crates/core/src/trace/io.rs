use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::HandMask;
use crate::model::{validate_frame, CameraConfig, JointSample, SkeletonFrame};

/// One line of a trace file: a frame plus an optional hand mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RecordWire", into = "RecordWire")]
pub struct TraceRecord {
    pub frame: SkeletonFrame,
    pub mask: Option<HandMask>,
}

#[derive(Serialize, Deserialize)]
struct RecordWire {
    i: u64,
    t: f64,
    joints: Vec<JointSample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<HandMask>,
}

impl From<RecordWire> for TraceRecord {
    fn from(w: RecordWire) -> Self {
        TraceRecord {
            frame: SkeletonFrame::new(w.i, w.t, w.joints),
            mask: w.mask,
        }
    }
}

impl From<TraceRecord> for RecordWire {
    fn from(r: TraceRecord) -> Self {
        RecordWire {
            i: r.frame.index,
            t: r.frame.t_ms,
            joints: r.frame.joints,
            mask: r.mask,
        }
    }
}

impl TraceRecord {
    pub fn new(frame: SkeletonFrame) -> Self {
        TraceRecord { frame, mask: None }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {}", .violations.join("; "))]
    Invalid { line: usize, violations: Vec<String> },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Frame spacing must stay within +/-50% of the nominal period.
const PACING_TOLERANCE: f64 = 0.5;

/// Parses newline-delimited records, validating each against `camera` and
/// the stream invariants (increasing index, time consistent with the frame
/// rate). Blank lines are skipped.
pub fn parse_trace<R: BufRead>(reader: R, camera: &CameraConfig) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records: Vec<TraceRecord> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord = serde_json::from_str(&line).map_err(|e| TraceError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        let previous = records.last().map(|r| &r.frame);
        let mut violations: Vec<String> = validate_frame(&record.frame, camera, previous.map(|p| p.index))
            .err()
            .unwrap_or_default()
            .iter()
            .map(ToString::to_string)
            .collect();
        if let Some(prev) = previous.filter(|p| p.index < record.frame.index) {
            let dt = record.frame.t_ms - prev.t_ms;
            let nominal = (record.frame.index - prev.index) as f64 * camera.frame_period_ms();
            if dt < 0.0 {
                violations.push(format!("time went backwards: t = {} after {}", record.frame.t_ms, prev.t_ms));
            } else if (dt - nominal).abs() > PACING_TOLERANCE * nominal {
                violations.push(format!(
                    "frame spacing {dt:.3} ms inconsistent with {:.3} ms at {} fps",
                    nominal, camera.frame_rate
                ));
            }
        }
        if !violations.is_empty() {
            return Err(TraceError::Invalid {
                line: line_no,
                violations,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_trace<W: Write>(mut writer: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_trace_file(path: impl AsRef<Path>, camera: &CameraConfig) -> Result<Vec<TraceRecord>, TraceError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| TraceError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace(BufReader::new(file), camera)
}

pub fn write_trace_file(path: impl AsRef<Path>, records: &[TraceRecord]) -> Result<(), TraceError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| TraceError::File {
        path: path.to_path_buf(),
        source,
    })?;
    write_trace(BufWriter::new(file), records)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JointId;

    fn cam() -> CameraConfig {
        CameraConfig::default()
    }

    #[test]
    fn empty_input_is_empty_trace() {
        assert!(parse_trace("".as_bytes(), &cam()).unwrap().is_empty());
        assert!(parse_trace("\n\n".as_bytes(), &cam()).unwrap().is_empty());
    }

    #[test]
    fn field_names_on_the_wire() {
        let r = TraceRecord::new(SkeletonFrame::new(
            3,
            100.0,
            vec![JointSample::tracked(JointId::RightHand, 1.5, 2.0, 1.25)],
        ));
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(
            line,
            r#"{"i":3,"t":100.0,"joints":[{"id":"right_hand","x":1.5,"y":2.0,"z":1.25,"tr":true}]}"#
        );
    }

    #[test]
    fn negative_depth_names_z() {
        let text = r#"{"i":0,"t":0,"joints":[{"id":"left_hand","x":10,"y":10,"z":-1,"tr":true}]}"#;
        let err = parse_trace(text.as_bytes(), &cam()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 1"), "{msg}");
        assert!(msg.contains(".z"), "{msg}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"i\":0,\"t\":0,\"joints\":[]}\nnot json\n";
        match parse_trace(text.as_bytes(), &cam()).unwrap_err() {
            TraceError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_bad_pacing_and_order() {
        let ok = "{\"i\":0,\"t\":0,\"joints\":[]}\n{\"i\":1,\"t\":33.3,\"joints\":[]}\n";
        assert_eq!(parse_trace(ok.as_bytes(), &cam()).unwrap().len(), 2);
        let too_slow = "{\"i\":0,\"t\":0,\"joints\":[]}\n{\"i\":1,\"t\":100,\"joints\":[]}\n";
        assert!(parse_trace(too_slow.as_bytes(), &cam()).is_err());
        let repeated = "{\"i\":4,\"t\":0,\"joints\":[]}\n{\"i\":4,\"t\":33,\"joints\":[]}\n";
        assert!(matches!(
            parse_trace(repeated.as_bytes(), &cam()).unwrap_err(),
            TraceError::Invalid { line: 2, .. }
        ));
    }

    #[test]
    fn masks_ride_inline() {
        let mask = HandMask::from_rows(&["##", "#."]).unwrap();
        let r = TraceRecord {
            frame: SkeletonFrame::new(0, 0.0, vec![]),
            mask: Some(mask),
        };
        let text = to_jsonl(std::slice::from_ref(&r));
        assert!(text.contains(r#""mask":"2x2:0,3,1""#), "{text}");
        assert_eq!(parse_trace(text.as_bytes(), &cam()).unwrap(), vec![r]);
    }
}
