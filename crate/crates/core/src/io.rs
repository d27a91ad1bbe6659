//! NDJSON dataset format, one instance per line:
//!
//! ```text
//! {"X": [[ch0, ch1, ...], ...], "y": <int | real | [T values]>, "t": [T reals]?, "context": [c reals]?}
//! ```
//!
//! The schema is inferred from the first record and enforced on the rest.
//! Integer targets are class labels, non-integer numbers are real values.
//! Reals are written in shortest round-trip decimal form, so a written
//! dataset reads back bit-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::dataset::{
    Schema, SequenceDataset, SequenceInstance, SequenceTarget, Target, TargetKind, ValueKind,
};
use crate::error::{Error, Result};

/// A dataset together with the names of its class labels, when the source
/// file used string labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub dataset: SequenceDataset,
    /// `label_names[k]` is the original name of dense label `k`.
    pub label_names: Option<Vec<String>>,
}

enum RawTarget {
    Fixed(Target),
    Name(String),
}

struct RawRecord {
    line: usize,
    rows: Vec<Vec<f64>>,
    target: RawTarget,
    time: Option<Vec<f64>>,
    context: Option<Vec<f64>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn schema_err(line: usize, message: impl Into<String>) -> Error {
    Error::Schema {
        line,
        message: message.into(),
    }
}

fn real_vec(line: usize, field: &str, v: &Value) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(line, format!("`{field}` must be an array of numbers")))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| parse_err(line, format!("`{field}` must contain only numbers")))
        })
        .collect()
}

fn parse_target(line: usize, v: &Value) -> Result<RawTarget> {
    match v {
        Value::Number(n) => Ok(RawTarget::Fixed(match n.as_u64() {
            Some(l) => Target::Label(l as usize),
            None => Target::Scalar(n.as_f64().unwrap_or(f64::NAN)),
        })),
        Value::String(s) => Ok(RawTarget::Name(s.clone())),
        Value::Array(arr) => {
            let labels: Option<Vec<usize>> =
                arr.iter().map(|x| x.as_u64().map(|l| l as usize)).collect();
            let target = match labels {
                Some(l) if !arr.is_empty() => SequenceTarget::Labels(l),
                _ => SequenceTarget::Values(real_vec(line, "y", v)?),
            };
            Ok(RawTarget::Fixed(Target::Sequence(target)))
        }
        _ => Err(parse_err(
            line,
            "`y` must be a number, a string or an array",
        )),
    }
}

fn parse_line(line: usize, text: &str) -> Result<RawRecord> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err(line, e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| parse_err(line, "record must be a JSON object"))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "X" | "y" | "t" | "context"))
    {
        return Err(parse_err(line, format!("unknown field `{key}`")));
    }
    let x = obj
        .get("X")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err(line, "missing array field `X`"))?;
    let rows = x
        .iter()
        .map(|row| real_vec(line, "X", row))
        .collect::<Result<Vec<_>>>()?;
    let target = parse_target(
        line,
        obj.get("y")
            .ok_or_else(|| parse_err(line, "missing field `y`"))?,
    )?;
    let time = obj.get("t").map(|v| real_vec(line, "t", v)).transpose()?;
    let context = obj
        .get("context")
        .map(|v| real_vec(line, "context", v))
        .transpose()?;
    Ok(RawRecord {
        line,
        rows,
        target,
        time,
        context,
    })
}

/// Adapts a target parsed from a later line to the schema's kind where the
/// only difference is integer-vs-real notation.
fn coerce(target: Target, expected: TargetKind) -> Target {
    match (target, expected) {
        (Target::Label(l), TargetKind::ScalarValue) => Target::Scalar(l as f64),
        (
            Target::Sequence(SequenceTarget::Labels(v)),
            TargetKind::AlignedSequence(ValueKind::Real),
        ) => Target::Sequence(SequenceTarget::Values(
            v.into_iter().map(|l| l as f64).collect(),
        )),
        (t, _) => t,
    }
}

fn parse_reader<R: BufRead>(reader: R, allow_names: bool) -> Result<LabeledDataset> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        records.push(parse_line(line_no, &text)?);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let named = records
        .iter()
        .filter(|r| matches!(r.target, RawTarget::Name(_)))
        .count();
    let label_names = if named == 0 {
        None
    } else {
        if !allow_names {
            let line = records
                .iter()
                .find(|r| matches!(r.target, RawTarget::Name(_)))
                .map_or(1, |r| r.line);
            return Err(schema_err(
                line,
                "string class labels are not supported by this reader",
            ));
        }
        if let Some(r) = records
            .iter()
            .find(|r| !matches!(r.target, RawTarget::Name(_)))
        {
            return Err(schema_err(r.line, "mixed string and numeric targets"));
        }
        let mut names: Vec<String> = records
            .iter()
            .filter_map(|r| match &r.target {
                RawTarget::Name(n) => Some(n.clone()),
                RawTarget::Fixed(_) => None,
            })
            .collect();
        names.sort();
        names.dedup();
        Some(names)
    };

    let mut schema: Option<Schema> = None;
    let mut instances = Vec::with_capacity(records.len());
    for rec in records {
        let line = rec.line;
        let target = match rec.target {
            RawTarget::Fixed(t) => t,
            RawTarget::Name(n) => {
                let names = label_names.as_ref().expect("names collected above");
                Target::Label(names.binary_search(&n).expect("name collected above"))
            }
        };
        let target = match &schema {
            Some(s) => coerce(target, s.target_kind),
            None => target,
        };
        let mut inst = SequenceInstance::from_rows(&rec.rows, target)
            .map_err(|_| schema_err(line, "rows of `X` have different lengths"))?;
        if let Some(t) = rec.time {
            inst = inst.with_time(t);
        }
        if let Some(c) = rec.context {
            inst = inst.with_context(c);
        }
        let s = *schema.get_or_insert_with(|| Schema::of(&inst));
        if let Some(v) = inst.violations(0, &s).into_iter().next() {
            return Err(schema_err(
                line,
                format!("field {}: {}", v.field, v.message),
            ));
        }
        instances.push(inst);
    }
    let schema = schema.expect("at least one record");
    let mut dataset = SequenceDataset::new_unchecked(schema, instances);
    if let Some(names) = &label_names {
        dataset = dataset.with_class_count(names.len())?;
    }
    Ok(LabeledDataset {
        dataset,
        label_names,
    })
}

/// Reads a dataset from NDJSON text. String labels are rejected.
pub fn parse_ndjson<R: BufRead>(reader: R) -> Result<SequenceDataset> {
    parse_reader(reader, false).map(|l| l.dataset)
}

pub fn read_ndjson(path: impl AsRef<Path>) -> Result<SequenceDataset> {
    let path = path.as_ref();
    parse_ndjson(open(path)?)
}

/// Like [`read_ndjson`], but maps string class labels to dense integers in
/// sorted name order and returns the mapping.
pub fn read_ndjson_labeled(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    parse_reader(open(path)?, true)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

#[derive(Serialize)]
#[serde(untagged)]
enum TargetOut<'a> {
    Label(usize),
    Scalar(f64),
    Labels(&'a [usize]),
    Values(&'a [f64]),
}

#[derive(Serialize)]
struct RecordOut<'a> {
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    y: TargetOut<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    context: Option<&'a [f64]>,
}

pub fn write_ndjson_to<W: Write>(dataset: &SequenceDataset, mut writer: W) -> std::io::Result<()> {
    for inst in dataset {
        let y = match inst.target() {
            Target::Label(l) => TargetOut::Label(*l),
            Target::Scalar(v) => TargetOut::Scalar(*v),
            Target::Sequence(SequenceTarget::Labels(v)) => TargetOut::Labels(v),
            Target::Sequence(SequenceTarget::Values(v)) => TargetOut::Values(v),
        };
        let record = RecordOut {
            x: inst
                .samples()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            y,
            t: inst.time(),
            context: inst.context().filter(|c| !c.is_empty()),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_ndjson(dataset: &SequenceDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_ndjson_to(dataset, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<SequenceDataset> {
        parse_ndjson(text.as_bytes())
    }

    #[test]
    fn reads_valid_lines_in_order() {
        let ds = parse(
            "{\"X\": [[1, 2], [3, 4]], \"y\": 0}\n{\"X\": [[5, 6]], \"y\": 1}\n{\"X\": [[7, 8], [9, 10], [11, 12]], \"y\": 0}\n",
        )
        .unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.schema().channels, 2);
        assert_eq!(ds.lengths(), vec![2, 1, 3]);
        assert_eq!(ds.schema().target_kind, TargetKind::ClassLabel);
    }

    #[test]
    fn channel_mismatch_names_the_line() {
        let err =
            parse("{\"X\": [[1, 2]], \"y\": 0}\n{\"X\": [[1, 2, 3]], \"y\": 0}\n").unwrap_err();
        assert!(matches!(err, Error::Schema { line: 2, .. }), "{err}");
    }

    #[test]
    fn target_kind_mismatch_is_schema_error() {
        let err = parse("{\"X\": [[1]], \"y\": 0}\n{\"X\": [[1]], \"y\": 0.5}\n").unwrap_err();
        assert!(matches!(err, Error::Schema { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_json_is_parse_error() {
        let err = parse("{\"X\": [[1]], \"y\": 0}\n{\"X\": [[1]], \n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse("{\"X\": [[1]], \"y\": 0, \"z\": 1}\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse(""), Err(Error::EmptyDataset)));
        assert!(matches!(parse("\n  \n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn non_monotonic_time_is_schema_error() {
        let err = parse("{\"X\": [[1], [2]], \"y\": 0, \"t\": [1, 1]}\n").unwrap_err();
        assert!(matches!(err, Error::Schema { line: 1, .. }), "{err}");
    }

    #[test]
    fn integer_notation_coerces_to_schema_reals() {
        let ds = parse("{\"X\": [[1]], \"y\": 0.5}\n{\"X\": [[1]], \"y\": 2}\n").unwrap();
        assert_eq!(ds[1].target(), &Target::Scalar(2.0));
    }

    #[test]
    fn optional_fields_follow_the_data() {
        let ds = parse("{\"X\": [[1], [2]], \"y\": [0.5, 1.5], \"t\": [0, 2]}\n").unwrap();
        let mut out = Vec::new();
        write_ndjson_to(&ds, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("\"t\":[0.0,2.0]"), "{text}");
        assert!(!text.contains("context"), "{text}");
        assert_eq!(parse(&text).unwrap(), ds);
    }

    #[test]
    fn string_labels_map_to_sorted_indices() {
        let text = "{\"X\": [[1]], \"y\": \"walk\"}\n{\"X\": [[1]], \"y\": \"run\"}\n{\"X\": [[1]], \"y\": \"walk\"}\n";
        let loaded = parse_reader(text.as_bytes(), true).unwrap();
        assert_eq!(
            loaded.label_names,
            Some(vec!["run".to_string(), "walk".to_string()])
        );
        assert_eq!(loaded.dataset[0].target(), &Target::Label(1));
        assert_eq!(loaded.dataset.schema().class_count, Some(2));
        assert!(matches!(parse(text), Err(Error::Schema { line: 1, .. })));
    }
}
