use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{ClassifierSpec, ModelKind, ModelPayload, ParamValue, TrainedModel};
use crate::error::{Error, Result};
use crate::features::FeatureSpace;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Training {
    seed: u64,
    n_train: usize,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u64,
    kind: ModelKind,
    hyperparameters: BTreeMap<String, ParamValue>,
    vocabulary: FeatureSpace,
    fingerprint: String,
    payload: Value,
    checksum: String,
    training: Training,
}

fn checksum(payload: &Value) -> String {
    let canonical = serde_json::to_string(payload).expect("json value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn model_to_json(model: &TrainedModel) -> Result<String> {
    let payload = serde_json::to_value(&model.payload)?;
    let envelope = Envelope {
        format_version: FORMAT_VERSION,
        kind: model.spec.kind,
        hyperparameters: model.spec.hyperparameters.clone(),
        vocabulary: (*model.space).clone(),
        fingerprint: model.fingerprint.clone(),
        checksum: checksum(&payload),
        payload,
        training: Training {
            seed: model.seed,
            n_train: model.n_train,
        },
    };
    Ok(serde_json::to_string(&envelope)?)
}

pub fn model_from_json(text: &str) -> Result<TrainedModel> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Integrity(format!("not a model file: {e}")))?;
    let found = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Integrity("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(Error::Migration {
            found,
            supported: FORMAT_VERSION,
        });
    }
    let envelope: Envelope =
        serde_json::from_value(value).map_err(|e| Error::Integrity(format!("malformed envelope: {e}")))?;
    if checksum(&envelope.payload) != envelope.checksum {
        return Err(Error::Integrity("payload checksum mismatch".into()));
    }
    let space = envelope.vocabulary;
    if space.fingerprint() != envelope.fingerprint {
        return Err(Error::Integrity("vocabulary fingerprint mismatch".into()));
    }
    let spec = ClassifierSpec::from_map(envelope.kind, &envelope.hyperparameters)?;
    let mut payload: ModelPayload = serde_json::from_value(envelope.payload)
        .map_err(|e| Error::Integrity(format!("payload does not decode: {e}")))?;
    payload.restore();
    Ok(TrainedModel {
        spec,
        space: Arc::new(space),
        fingerprint: envelope.fingerprint,
        payload,
        seed: envelope.training.seed,
        n_train: envelope.training.n_train,
    })
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
