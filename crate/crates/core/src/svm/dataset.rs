//! Tab-separated feature datasets: a header `label` followed by the feature
//! names in manifest order, then one labelled vector per line.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::corpus::RelationLabel;
use crate::features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

#[derive(Debug, Error)]
pub enum FeatureDatasetError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("header does not match the feature manifest")]
    Header,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn header() -> String {
    std::iter::once("label")
        .chain(FEATURE_NAMES)
        .collect::<Vec<_>>()
        .join("\t")
}

pub fn parse_feature_dataset<R: BufRead>(
    reader: R,
) -> Result<Vec<(FeatureVector, RelationLabel)>, FeatureDatasetError> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line.trim() != header() {
                return Err(FeatureDatasetError::Header);
            }
            header_seen = true;
            continue;
        }
        let bad = |message: String| FeatureDatasetError::Malformed { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != FEATURE_COUNT + 1 {
            return Err(bad(format!(
                "expected {} fields, found {}",
                FEATURE_COUNT + 1,
                fields.len()
            )));
        }
        let label: RelationLabel = fields[0]
            .trim()
            .parse()
            .map_err(|s: String| bad(format!("unknown label {s:?}")))?;
        let mut v = [0.0; FEATURE_COUNT];
        for (slot, (f, name)) in v.iter_mut().zip(fields[1..].iter().zip(FEATURE_NAMES)) {
            *slot = f
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("invalid value {f:?} for {name}")))?;
        }
        out.push((FeatureVector::from_array(v), label));
    }
    if !header_seen {
        return Err(FeatureDatasetError::Header);
    }
    Ok(out)
}

pub fn write_feature_dataset<W: Write>(data: &[(FeatureVector, RelationLabel)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", header())?;
    for (fv, label) in data {
        let values: Vec<String> = fv.to_array().iter().map(|x| x.to_string()).collect();
        writeln!(w, "{label}\t{}", values.join("\t"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::synthetic_separable;

    #[test]
    fn round_trip() {
        let data = synthetic_separable(5, 2, RelationLabel::NoRelation, RelationLabel::Redundancy);
        let mut out = Vec::new();
        write_feature_dataset(&data, &mut out).unwrap();
        assert_eq!(parse_feature_dataset(out.as_slice()).unwrap(), data);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_feature_dataset("a\tb\n".as_bytes()),
            Err(FeatureDatasetError::Header)
        ));
        let text = format!("{}\nElaboration\t0.5\n", header());
        assert!(matches!(
            parse_feature_dataset(text.as_bytes()),
            Err(FeatureDatasetError::Malformed { line: 2, .. })
        ));
    }
}
