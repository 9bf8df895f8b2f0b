//! Parsing, cleaning and normalization of keypoint streams.
//!
//! Canonical stream format is UTF-8 JSON, one frame object per line:
//! `{"t": seconds, "joints": {"left_ankle": [x,y,z,c], ...}}` (2D uses
//! `[x,y,c]`). A whole-file JSON array of the same objects is accepted on
//! import. Flattened OpenPose-style keypoint arrays are supported through
//! [`SchemaOptions::joint_order`].

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::GaitError;
use crate::types::{
    AxisConvention, Dims, JointId, JointSample, SkeletonFrame, SkeletonSequence,
};

pub const DEFAULT_CONFIDENCE_FLOOR: f64 = 0.1;
pub const DEFAULT_FRAME_RATE: f64 = 30.0;

/// Import options for keypoint streams.
#[derive(Debug, Clone)]
pub struct SchemaOptions {
    /// Joints with confidence strictly below this are treated as missing.
    pub confidence_floor: f64,
    /// Joint ordering for flattened positional keypoint arrays. `None`
    /// selects the canonical named-joint schema.
    pub joint_order: Option<Vec<JointId>>,
    /// Nominal frame rate. When `None` it is inferred from timestamps
    /// (median frame-to-frame interval), falling back to 30 Hz.
    pub frame_rate: Option<f64>,
}

impl Default for SchemaOptions {
    fn default() -> Self {
        SchemaOptions {
            confidence_floor: DEFAULT_CONFIDENCE_FLOOR,
            joint_order: None,
            frame_rate: None,
        }
    }
}

fn infer_frame_rate(frames: &[SkeletonFrame]) -> f64 {
    if frames.len() < 2 {
        return DEFAULT_FRAME_RATE;
    }
    let mut dts: Vec<f64> = frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dt = dts[dts.len() / 2];
    if dt > 0.0 {
        1.0 / dt
    } else {
        DEFAULT_FRAME_RATE
    }
}

fn check_monotone(frames: &[SkeletonFrame]) -> Result<(), GaitError> {
    for w in frames.windows(2) {
        if w[1].t <= w[0].t {
            return Err(GaitError::Ordering {
                frame: w[1].index,
                t: w[1].t,
                prev: w[0].t,
            });
        }
    }
    Ok(())
}

fn coords_from_value(v: &Value, line: usize) -> Result<Vec<f64>, GaitError> {
    let arr = v.as_array().ok_or_else(|| GaitError::Parse {
        line,
        message: "joint value must be an array".into(),
    })?;
    arr.iter()
        .map(|x| {
            x.as_f64().ok_or_else(|| GaitError::Parse {
                line,
                message: "joint coordinates must be numbers".into(),
            })
        })
        .collect()
}

fn frame_from_object(
    obj: &serde_json::Map<String, Value>,
    index: usize,
    line: usize,
    opts: &SchemaOptions,
    dims: &mut Option<Dims>,
) -> Result<SkeletonFrame, GaitError> {
    let mut joints = BTreeMap::new();
    let mut insert = |joint: JointId, coords: &[f64], dims: &mut Option<Dims>| -> Result<(), GaitError> {
        let (d, pos, conf) = match coords.len() {
            3 => (Dims::Two, [coords[0], coords[1], 0.0], coords[2]),
            4 => (Dims::Three, [coords[0], coords[1], coords[2]], coords[3]),
            n => {
                return Err(GaitError::Parse {
                    line,
                    message: format!("joint entry has {n} values, expected 3 (2D) or 4 (3D)"),
                })
            }
        };
        match dims {
            Some(prev) if *prev != d => {
                return Err(GaitError::SchemaMismatch(
                    "mixed 2D and 3D joint entries in one stream".into(),
                ))
            }
            Some(_) => {}
            None => *dims = Some(d),
        }
        if conf >= opts.confidence_floor {
            joints.insert(joint, JointSample { pos, conf });
        }
        Ok(())
    };

    if let Some(order) = &opts.joint_order {
        let kp = obj.get("keypoints").ok_or_else(|| GaitError::Parse {
            line,
            message: "positional schema requires a 'keypoints' array".into(),
        })?;
        let flat = coords_from_value(kp, line)?;
        if flat.len() % order.len() != 0 {
            return Err(GaitError::SchemaMismatch(format!(
                "keypoint array length {} is not a multiple of the {} configured joints",
                flat.len(),
                order.len()
            )));
        }
        let stride = flat.len() / order.len();
        if stride != 3 && stride != 4 {
            return Err(GaitError::SchemaMismatch(format!(
                "{stride} values per joint, expected 3 (2D) or 4 (3D)"
            )));
        }
        for (k, joint) in order.iter().enumerate() {
            insert(*joint, &flat[k * stride..(k + 1) * stride], dims)?;
        }
    } else {
        let jmap = obj
            .get("joints")
            .and_then(Value::as_object)
            .ok_or_else(|| GaitError::Parse {
                line,
                message: "frame object missing 'joints' map".into(),
            })?;
        for (name, v) in jmap {
            let joint: JointId = name.parse()?;
            let coords = coords_from_value(v, line)?;
            insert(joint, &coords, dims)?;
        }
    }

    let t = match obj.get("t") {
        Some(v) => v.as_f64().ok_or_else(|| GaitError::Parse {
            line,
            message: "'t' must be a number".into(),
        })?,
        None => index as f64 / opts.frame_rate.unwrap_or(DEFAULT_FRAME_RATE),
    };

    Ok(SkeletonFrame { index, t, joints })
}

/// Parse line-delimited or array JSON keypoint data.
pub fn parse_keypoint_json(bytes: &[u8], opts: &SchemaOptions) -> Result<SkeletonSequence, GaitError> {
    let text = std::str::from_utf8(bytes).map_err(|e| GaitError::Parse {
        line: 0,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let mut frames = Vec::new();
    let mut dims = None;

    if text.trim_start().starts_with('[') {
        let arr: Vec<Value> = serde_json::from_str(text).map_err(|e| GaitError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        for (i, v) in arr.iter().enumerate() {
            let obj = v.as_object().ok_or_else(|| GaitError::Parse {
                line: i + 1,
                message: "array element is not an object".into(),
            })?;
            frames.push(frame_from_object(obj, i, i + 1, opts, &mut dims)?);
        }
    } else {
        let mut index = 0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(line).map_err(|e| GaitError::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let obj = v.as_object().ok_or_else(|| GaitError::Parse {
                line: lineno + 1,
                message: "frame line is not a JSON object".into(),
            })?;
            frames.push(frame_from_object(obj, index, lineno + 1, opts, &mut dims)?);
            index += 1;
        }
    }

    check_monotone(&frames)?;
    let frame_rate = opts.frame_rate.unwrap_or_else(|| infer_frame_rate(&frames));
    Ok(SkeletonSequence {
        dims: dims.unwrap_or(Dims::Three),
        frame_rate,
        convention: AxisConvention::identity(),
        frames,
    })
}

fn fmt_f64(x: f64) -> String {
    let mut buf = ryu_format(x);
    // serde_json prints integral floats with a trailing .0; match it.
    if !buf.contains('.') && !buf.contains('e') && !buf.contains("inf") && !buf.contains("NaN") {
        buf.push_str(".0");
    }
    buf
}

fn ryu_format(x: f64) -> String {
    // shortest round-trip representation, same routine serde_json uses
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}

/// Serialize to the canonical frame-per-line JSON form. Parsing the output
/// reproduces the sequence exactly; re-serializing is byte-identical.
pub fn serialize_keypoint_json(seq: &SkeletonSequence) -> String {
    let mut out = String::new();
    for frame in &seq.frames {
        out.push_str("{\"t\":");
        out.push_str(&fmt_f64(frame.t));
        out.push_str(",\"joints\":{");
        let mut first = true;
        for (joint, sample) in &frame.joints {
            if !first {
                out.push(',');
            }
            first = false;
            out.push('"');
            out.push_str(joint.name());
            out.push_str("\":[");
            out.push_str(&fmt_f64(sample.pos[0]));
            out.push(',');
            out.push_str(&fmt_f64(sample.pos[1]));
            if seq.dims == Dims::Three {
                out.push(',');
                out.push_str(&fmt_f64(sample.pos[2]));
            }
            out.push(',');
            out.push_str(&fmt_f64(sample.conf));
            out.push(']');
        }
        out.push_str("}}\n");
    }
    out
}

/// Column binding for CSV import: maps a header name to (joint, field).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvField {
    X,
    Y,
    Z,
    Conf,
}

/// Options for CSV import. With an empty `column_map` the binding is
/// derived from the header: `<joint>_<axis>` and `<joint>_conf`.
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub column_map: Vec<(String, JointId, CsvField)>,
    pub confidence_floor: Option<f64>,
    pub frame_rate: Option<f64>,
}

fn bind_column(name: &str) -> Option<(JointId, CsvField)> {
    let (prefix, suffix) = name.rsplit_once('_')?;
    let field = match suffix {
        "x" => CsvField::X,
        "y" => CsvField::Y,
        "z" => CsvField::Z,
        "conf" => CsvField::Conf,
        _ => return None,
    };
    let joint: JointId = prefix.parse().ok()?;
    Some((joint, field))
}

/// Parse CSV keypoint data with header `frame,t,<joint>_<axis>,...,<joint>_conf`.
pub fn parse_keypoint_csv(bytes: &[u8], opts: &CsvOptions) -> Result<SkeletonSequence, GaitError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| GaitError::Parse { line: 1, message: e.to_string() })?
        .clone();

    let explicit: BTreeMap<&str, (JointId, CsvField)> = opts
        .column_map
        .iter()
        .map(|(name, joint, field)| (name.as_str(), (*joint, *field)))
        .collect();

    // column index -> binding
    let mut bindings: Vec<Option<(JointId, CsvField)>> = Vec::with_capacity(headers.len());
    let mut frame_col = None;
    let mut t_col = None;
    let mut has_z = false;
    for (i, name) in headers.iter().enumerate() {
        match name {
            "frame" => {
                frame_col = Some(i);
                bindings.push(None);
            }
            "t" => {
                t_col = Some(i);
                bindings.push(None);
            }
            _ => {
                let bound = explicit.get(name).copied().or_else(|| bind_column(name));
                match bound {
                    Some(b) => {
                        if b.1 == CsvField::Z {
                            has_z = true;
                        }
                        bindings.push(Some(b));
                    }
                    None => {
                        return Err(GaitError::Config(format!(
                            "CSV column '{name}' cannot be bound to a joint field"
                        )))
                    }
                }
            }
        }
    }
    let t_col = t_col.ok_or_else(|| GaitError::Config("CSV is missing the 't' column".into()))?;

    let floor = opts.confidence_floor.unwrap_or(DEFAULT_CONFIDENCE_FLOOR);
    let mut frames = Vec::new();
    for (rec_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| GaitError::Parse {
            line: rec_no + 2,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(GaitError::Parse {
                line: rec_no + 2,
                message: format!(
                    "row has {} fields, header has {}",
                    record.len(),
                    headers.len()
                ),
            });
        }
        let parse_cell = |i: usize| -> Result<Option<f64>, GaitError> {
            let cell = record.get(i).unwrap_or("");
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(Some).map_err(|e| GaitError::Parse {
                line: rec_no + 2,
                message: format!("bad number '{cell}': {e}"),
            })
        };

        let index = match frame_col {
            Some(c) => parse_cell(c)?.map(|v| v as usize).unwrap_or(rec_no),
            None => rec_no,
        };
        let t = parse_cell(t_col)?.ok_or_else(|| GaitError::Parse {
            line: rec_no + 2,
            message: "missing timestamp".into(),
        })?;

        // gather per-joint cells
        let mut acc: BTreeMap<JointId, [Option<f64>; 4]> = BTreeMap::new();
        for (i, binding) in bindings.iter().enumerate() {
            if let Some((joint, field)) = binding {
                let slot = match field {
                    CsvField::X => 0,
                    CsvField::Y => 1,
                    CsvField::Z => 2,
                    CsvField::Conf => 3,
                };
                acc.entry(*joint).or_default()[slot] = parse_cell(i)?;
            }
        }
        let mut joints = BTreeMap::new();
        for (joint, cells) in acc {
            let (x, y, conf) = match (cells[0], cells[1], cells[3]) {
                (Some(x), Some(y), Some(c)) => (x, y, c),
                _ => continue, // missing cells -> missing joint
            };
            let z = if has_z {
                match cells[2] {
                    Some(z) => z,
                    None => continue,
                }
            } else {
                0.0
            };
            if conf >= floor {
                joints.insert(joint, JointSample { pos: [x, y, z], conf });
            }
        }
        frames.push(SkeletonFrame { index, t, joints });
    }

    check_monotone(&frames)?;
    let frame_rate = opts.frame_rate.unwrap_or_else(|| infer_frame_rate(&frames));
    Ok(SkeletonSequence {
        dims: if has_z { Dims::Three } else { Dims::Two },
        frame_rate,
        convention: AxisConvention::identity(),
        frames,
    })
}

/// Serialize to the canonical CSV form with one column group per joint that
/// appears anywhere in the sequence.
pub fn serialize_keypoint_csv(seq: &SkeletonSequence) -> String {
    let mut present: Vec<JointId> = JointId::ALL
        .iter()
        .copied()
        .filter(|j| seq.frames.iter().any(|f| f.joints.contains_key(j)))
        .collect();
    if present.is_empty() {
        present = vec![
            JointId::LeftKnee,
            JointId::RightKnee,
            JointId::LeftAnkle,
            JointId::RightAnkle,
            JointId::LeftToe,
            JointId::RightToe,
        ];
    }
    let axes: &[(&str, usize)] = match seq.dims {
        Dims::Three => &[("x", 0), ("y", 1), ("z", 2)],
        Dims::Two => &[("x", 0), ("y", 1)],
    };
    let mut out = String::from("frame,t");
    for j in &present {
        for (name, _) in axes {
            out.push_str(&format!(",{}_{}", j.name(), name));
        }
        out.push_str(&format!(",{}_conf", j.name()));
    }
    out.push('\n');
    for frame in &seq.frames {
        out.push_str(&frame.index.to_string());
        out.push(',');
        out.push_str(&fmt_f64(frame.t));
        for j in &present {
            match frame.joints.get(j) {
                Some(s) => {
                    for (_, k) in axes {
                        out.push(',');
                        out.push_str(&fmt_f64(s.pos[*k]));
                    }
                    out.push(',');
                    out.push_str(&fmt_f64(s.conf));
                }
                None => {
                    for _ in 0..=axes.len() {
                        out.push(',');
                    }
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Re-express all positions through a signed axis permutation. Confidences
/// are untouched; the output is considered canonical.
pub fn normalize_axes(
    seq: &SkeletonSequence,
    convention: &AxisConvention,
) -> Result<SkeletonSequence, GaitError> {
    convention.validate()?;
    let mut out = seq.clone();
    for frame in &mut out.frames {
        for sample in frame.joints.values_mut() {
            sample.pos = convention.apply(sample.pos);
        }
    }
    out.convention = AxisConvention::identity();
    Ok(out)
}

/// Frames filled per joint by [`fill_gaps`].
pub type FillMask = BTreeMap<JointId, Vec<usize>>;

/// Linearly interpolate missing joints across gaps of at most
/// `max_gap_frames` frames when both endpoints exist.
pub fn fill_gaps(seq: &SkeletonSequence, max_gap_frames: usize) -> (SkeletonSequence, FillMask) {
    let mut out = seq.clone();
    let mut mask = FillMask::new();
    let n = seq.frames.len();
    for joint in JointId::ALL {
        // positions of frames where the joint is present
        let present: Vec<usize> = (0..n)
            .filter(|&i| seq.frames[i].joints.contains_key(&joint))
            .collect();
        if present.len() < 2 {
            continue;
        }
        for w in present.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gap = b - a - 1;
            if gap == 0 || gap > max_gap_frames {
                continue;
            }
            let pa = seq.frames[a].joints[&joint];
            let pb = seq.frames[b].joints[&joint];
            for i in a + 1..b {
                let u = (i - a) as f64 / (b - a) as f64;
                let pos = [
                    pa.pos[0] + u * (pb.pos[0] - pa.pos[0]),
                    pa.pos[1] + u * (pb.pos[1] - pa.pos[1]),
                    pa.pos[2] + u * (pb.pos[2] - pa.pos[2]),
                ];
                let conf = pa.conf.min(pb.conf);
                out.frames[i].joints.insert(joint, JointSample { pos, conf });
                mask.entry(joint).or_default().push(i);
            }
        }
    }
    (out, mask)
}

/// Centered moving average over present samples. `window_frames` must be odd.
pub fn smooth(seq: &SkeletonSequence, window_frames: usize) -> Result<SkeletonSequence, GaitError> {
    if window_frames == 0 || window_frames.is_multiple_of(2) {
        return Err(GaitError::Config(format!(
            "smoothing window must be odd and >= 1, got {window_frames}"
        )));
    }
    if window_frames == 1 {
        return Ok(seq.clone());
    }
    let half = window_frames / 2;
    let n = seq.frames.len();
    let mut out = seq.clone();
    for joint in JointId::ALL {
        for i in 0..n {
            if !seq.frames[i].joints.contains_key(&joint) {
                continue;
            }
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let mut sum = [0.0f64; 3];
            let mut count = 0usize;
            for frame in &seq.frames[lo..=hi] {
                if let Some(s) = frame.joints.get(&joint) {
                    sum[0] += s.pos[0];
                    sum[1] += s.pos[1];
                    sum[2] += s.pos[2];
                    count += 1;
                }
            }
            let sample = out.frames[i].joints.get_mut(&joint).unwrap();
            sample.pos = [
                sum[0] / count as f64,
                sum[1] / count as f64,
                sum[2] / count as f64,
            ];
        }
    }
    Ok(out)
}
