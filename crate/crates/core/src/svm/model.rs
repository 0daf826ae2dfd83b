//! Model file: a header line carrying the format version and a SHA-256 of
//! the body, then the model as JSON.

use std::io::{Read, Write};

use sha2::{Digest, Sha256};

use super::{SvmError, SvmModel};

pub const MODEL_MAGIC: &str = "LEXREL-MODEL";
pub const FORMAT_VERSION: u32 = 1;

pub fn save_model<W: Write>(model: &SvmModel, mut sink: W) -> Result<(), SvmError> {
    let body = serde_json::to_string_pretty(model).map_err(|e| SvmError::Corrupt(e.to_string()))?;
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    writeln!(sink, "{MODEL_MAGIC} v{} sha256={digest}", model.format_version)?;
    sink.write_all(body.as_bytes())?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(mut source: R) -> Result<SvmModel, SvmError> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| SvmError::Corrupt(format!("unreadable model: {e}")))?;
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| SvmError::Corrupt("missing header line".into()))?;
    let mut parts = header.split(' ');
    if parts.next() != Some(MODEL_MAGIC) {
        return Err(SvmError::Corrupt("not a model file".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| SvmError::Corrupt("malformed version field".into()))?;
    if version != FORMAT_VERSION {
        return Err(SvmError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let expected = parts
        .next()
        .and_then(|d| d.strip_prefix("sha256="))
        .ok_or_else(|| SvmError::Corrupt("missing checksum".into()))?;
    let body = body.strip_suffix('\n').unwrap_or(body);
    if hex::encode(Sha256::digest(body.as_bytes())) != expected {
        return Err(SvmError::Corrupt("checksum mismatch".into()));
    }
    let model: SvmModel = serde_json::from_str(body).map_err(|e| SvmError::Corrupt(e.to_string()))?;
    if model.format_version != FORMAT_VERSION {
        return Err(SvmError::VersionMismatch {
            found: model.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let k = model.classes.len();
    let dims = model.feature_manifest.len();
    if k < 2 || model.biases.len() != k || model.weights.len() != k || model.weights.iter().any(|w| w.len() != dims) {
        return Err(SvmError::Corrupt("inconsistent model dimensions".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RelationLabel;
    use crate::svm::{synthetic_separable, train, TrainingConfig};

    fn model() -> SvmModel {
        let data = synthetic_separable(20, 1, RelationLabel::Elaboration, RelationLabel::NoRelation);
        train(
            &data,
            &TrainingConfig {
                epochs: 10,
                ..TrainingConfig::default()
            },
        )
        .unwrap()
    }

    fn bytes(m: &SvmModel) -> Vec<u8> {
        let mut out = Vec::new();
        save_model(m, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let back = load_model(bytes(&m).as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(bytes(&back), bytes(&m));
    }

    #[test]
    fn truncated_is_corrupt() {
        let b = bytes(&model());
        let cut = &b[..b.len() / 2];
        assert!(matches!(load_model(cut), Err(SvmError::Corrupt(_))));
        assert!(matches!(load_model(&b[..0]), Err(SvmError::Corrupt(_))));
    }

    #[test]
    fn future_version_is_reported() {
        let text = String::from_utf8(bytes(&model())).unwrap().replacen(" v1 ", " v9 ", 1);
        assert!(matches!(
            load_model(text.as_bytes()),
            Err(SvmError::VersionMismatch { found: 9, expected: 1 })
        ));
    }

    #[test]
    fn tampered_body_fails_checksum() {
        let text = String::from_utf8(bytes(&model()))
            .unwrap()
            .replacen("\"lambda\"", "\"lambda\" ", 1);
        assert!(matches!(load_model(text.as_bytes()), Err(SvmError::Corrupt(_))));
    }
}
