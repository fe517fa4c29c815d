//! Newline-delimited JSON wire formats for detection streams and track files.
//!
//! Detection stream, one record per frame:
//!
//! ```text
//! {"frame":0,"ts_ms":0,"dets":[{"bbox":[x0,y0,x1,y1],"class":"car","score":0.9,"emb":[...]}]}
//! ```
//!
//! Track file, one record per track:
//!
//! ```text
//! {"id":1,"class":"car","class_majority":"car","max_score":0.9,"boxes":[{"frame":0,"bbox":[...],"predicted":false}]}
//! ```
//!
//! Floats are written in shortest round-trip form, so reading back a written
//! stream reproduces every field bit for bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, StreamError};
use crate::model::{
    BoundingBox, Detection, Frame, Track, TrackBox, VehicleClass, EMBEDDING_DIM,
    EMBEDDING_NORM_TOLERANCE,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ts_ms: Option<u64>,
    dets: Vec<DetRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetRecord {
    bbox: [f64; 4],
    class: VehicleClass,
    score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emb: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackRecord {
    id: u64,
    class: VehicleClass,
    class_majority: VehicleClass,
    max_score: f64,
    boxes: Vec<TrackBoxRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackBoxRecord {
    frame: u64,
    bbox: [f64; 4],
    predicted: bool,
}

fn invalid(line: usize) -> impl Fn(ModelError) -> StreamError {
    move |source| StreamError::InvalidValue { line, source }
}

fn check_embedding(line: usize, mut emb: Vec<f64>) -> Result<Vec<f64>, StreamError> {
    if emb.len() != EMBEDDING_DIM {
        return Err(StreamError::EmbeddingLength {
            line,
            len: emb.len(),
            expected: EMBEDDING_DIM,
        });
    }
    let norm = emb.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(StreamError::EmbeddingNorm { line, norm });
    }
    if (norm - 1.0).abs() > EMBEDDING_NORM_TOLERANCE {
        log::warn!("line {line}: embedding norm {norm} renormalized to 1");
        emb.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(emb)
}

fn record_to_frame(line: usize, rec: FrameRecord) -> Result<Frame, StreamError> {
    let mut detections = Vec::with_capacity(rec.dets.len());
    for d in rec.dets {
        let bbox = BoundingBox::try_from(d.bbox).map_err(invalid(line))?;
        let mut det = Detection::new(bbox, d.class, d.score).map_err(invalid(line))?;
        if let Some(emb) = d.emb {
            det.embedding = Some(check_embedding(line, emb)?);
        }
        detections.push(det);
    }
    Ok(Frame {
        index: rec.frame,
        timestamp_ms: rec.ts_ms,
        detections,
    })
}

/// Parses a detection stream. Blank lines are ignored; any malformed record
/// aborts the whole read.
pub fn ingest_stream<R: BufRead>(source: R) -> Result<Vec<Frame>, StreamError> {
    let mut frames: Vec<Frame> = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FrameRecord =
            serde_json::from_str(&line).map_err(|e| StreamError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if let Some(prev) = frames.last() {
            if rec.frame <= prev.index {
                return Err(StreamError::NonMonotoneFrame {
                    line: line_no,
                    previous: prev.index,
                    index: rec.frame,
                });
            }
        }
        frames.push(record_to_frame(line_no, rec)?);
    }
    Ok(frames)
}

/// Convenience wrapper over [`ingest_stream`] for in-memory input.
pub fn ingest_bytes(bytes: &[u8]) -> Result<Vec<Frame>, StreamError> {
    ingest_stream(bytes)
}

fn frame_to_record(frame: &Frame) -> FrameRecord {
    FrameRecord {
        frame: frame.index,
        ts_ms: frame.timestamp_ms,
        dets: frame
            .detections
            .iter()
            .map(|d| DetRecord {
                bbox: d.bbox.to_array(),
                class: d.class,
                score: d.score,
                emb: d.embedding.clone(),
            })
            .collect(),
    }
}

pub fn write_stream<W: Write>(frames: &[Frame], mut out: W) -> Result<(), StreamError> {
    for frame in frames {
        let line = serde_json::to_string(&frame_to_record(frame))
            .map_err(|e| StreamError::Io(e.to_string()))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn stream_to_bytes(frames: &[Frame]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_stream(frames, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn write_tracks<W: Write>(tracks: &[Track], mut out: W) -> Result<(), StreamError> {
    for t in tracks {
        let rec = TrackRecord {
            id: t.id,
            class: t.class,
            class_majority: t.class_majority,
            max_score: t.max_score,
            boxes: t
                .boxes
                .iter()
                .map(|b| TrackBoxRecord {
                    frame: b.frame,
                    bbox: b.bbox.to_array(),
                    predicted: b.predicted,
                })
                .collect(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| StreamError::Io(e.to_string()))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn tracks_to_bytes(tracks: &[Track]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_tracks(tracks, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn read_tracks<R: BufRead>(source: R) -> Result<Vec<Track>, StreamError> {
    let mut tracks = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrackRecord =
            serde_json::from_str(&line).map_err(|e| StreamError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if !(0.0..=1.0).contains(&rec.max_score) {
            return Err(StreamError::InvalidValue {
                line: line_no,
                source: ModelError::ScoreOutOfRange(rec.max_score),
            });
        }
        let mut boxes = Vec::with_capacity(rec.boxes.len());
        for b in rec.boxes {
            if boxes.last().is_some_and(|p: &TrackBox| p.frame >= b.frame) {
                return Err(StreamError::Malformed {
                    line: line_no,
                    message: format!("track {} box frames not increasing", rec.id),
                });
            }
            boxes.push(TrackBox {
                frame: b.frame,
                bbox: BoundingBox::try_from(b.bbox).map_err(invalid(line_no))?,
                predicted: b.predicted,
            });
        }
        if boxes.is_empty() {
            return Err(StreamError::Malformed {
                line: line_no,
                message: format!("track {} has no boxes", rec.id),
            });
        }
        tracks.push(Track::from_parts(
            rec.id,
            rec.class,
            rec.class_majority,
            rec.max_score,
            boxes,
        ));
    }
    Ok(tracks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BoundingBox {
        BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert_eq!(ingest_bytes(b"").unwrap(), Vec::<Frame>::new());
        assert_eq!(ingest_bytes(b"\n\n").unwrap(), Vec::<Frame>::new());
    }

    #[test]
    fn single_detection_round_trip() {
        let det = Detection::new(unit_box(), VehicleClass::Car, 0.9).unwrap();
        let frames = vec![Frame::new(0, vec![det])];
        let bytes = stream_to_bytes(&frames);
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            "{\"frame\":0,\"dets\":[{\"bbox\":[0.0,0.0,10.0,10.0],\"class\":\"car\",\"score\":0.9}]}\n"
        );
        assert_eq!(ingest_bytes(&bytes).unwrap(), frames);
    }

    #[test]
    fn non_monotone_frames_rejected() {
        let input = b"{\"frame\":3,\"dets\":[]}\n{\"frame\":2,\"dets\":[]}\n";
        let err = ingest_bytes(input).unwrap_err();
        assert!(matches!(
            err,
            StreamError::NonMonotoneFrame {
                line: 2,
                previous: 3,
                index: 2
            }
        ));
        assert!(err.to_string().contains("non-monotone frame index"));
    }

    #[test]
    fn duplicate_frame_index_rejected() {
        let input = b"{\"frame\":1,\"dets\":[]}\n{\"frame\":1,\"dets\":[]}\n";
        assert!(ingest_bytes(input).is_err());
    }

    #[test]
    fn malformed_record_reports_line() {
        let input = b"{\"frame\":0,\"dets\":[]}\n{\"frame\":1,\"dets\":[{]}\n";
        match ingest_bytes(input).unwrap_err() {
            StreamError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_class_and_bad_score_rejected() {
        let bad_class = b"{\"frame\":0,\"dets\":[{\"bbox\":[0,0,1,1],\"class\":\"bus\",\"score\":0.5}]}";
        assert!(matches!(
            ingest_bytes(bad_class).unwrap_err(),
            StreamError::Malformed { line: 1, .. }
        ));
        let bad_score = b"{\"frame\":0,\"dets\":[{\"bbox\":[0,0,1,1],\"class\":\"car\",\"score\":1.5}]}";
        assert!(matches!(
            ingest_bytes(bad_score).unwrap_err(),
            StreamError::InvalidValue { line: 1, .. }
        ));
    }

    #[test]
    fn zero_area_box_rejected() {
        let input = b"{\"frame\":0,\"dets\":[{\"bbox\":[0,0,0,1],\"class\":\"car\",\"score\":0.5}]}";
        assert!(matches!(
            ingest_bytes(input).unwrap_err(),
            StreamError::InvalidValue {
                line: 1,
                source: ModelError::DegenerateBox(..)
            }
        ));
    }

    #[test]
    fn embedding_length_checked() {
        let emb = vec![0.0; 127];
        let rec = format!(
            "{{\"frame\":0,\"dets\":[{{\"bbox\":[0,0,1,1],\"class\":\"car\",\"score\":0.5,\"emb\":{}}}]}}",
            serde_json::to_string(&emb).unwrap()
        );
        assert!(matches!(
            ingest_bytes(rec.as_bytes()).unwrap_err(),
            StreamError::EmbeddingLength { len: 127, .. }
        ));
    }

    #[test]
    fn off_norm_embedding_renormalized_and_zero_rejected() {
        let mut emb = vec![0.0; EMBEDDING_DIM];
        emb[3] = 2.0;
        let rec = format!(
            "{{\"frame\":0,\"dets\":[{{\"bbox\":[0,0,1,1],\"class\":\"car\",\"score\":0.5,\"emb\":{}}}]}}",
            serde_json::to_string(&emb).unwrap()
        );
        let frames = ingest_bytes(rec.as_bytes()).unwrap();
        let got = frames[0].detections[0].embedding.as_ref().unwrap();
        assert_eq!(got[3], 1.0);

        let zero = rec.replace("2.0", "0.0");
        assert!(matches!(
            ingest_bytes(zero.as_bytes()).unwrap_err(),
            StreamError::EmbeddingNorm { .. }
        ));
    }

    #[test]
    fn absent_embedding_is_omitted() {
        let det = Detection::new(unit_box(), VehicleClass::Truck, 0.25).unwrap();
        let bytes = stream_to_bytes(&[Frame::new(5, vec![det])]);
        assert!(!std::str::from_utf8(&bytes).unwrap().contains("emb"));
    }

    #[test]
    fn tracks_round_trip() {
        let det = Detection::new(unit_box(), VehicleClass::Car, 0.7).unwrap();
        let mut t = Track::start(4, 10, &det);
        t.push_predicted(11, unit_box().translate(1.0 / 3.0, 0.1).unwrap());
        t.push_measured(12, &det);
        t.finish();
        let bytes = tracks_to_bytes(&[t.clone()]);
        let back = read_tracks(bytes.as_slice()).unwrap();
        assert_eq!(back, vec![t]);
    }
}
