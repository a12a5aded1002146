use serde_json::Value;
use sha2::{Digest, Sha256};

use zorbalik_core::model::{fit_model, load_model, model_from_json, model_to_json, ClassifierSpec, ModelKind, FORMAT_VERSION};
use zorbalik_core::{Error, TfidfFeaturizer};

fn docs(words: &[&str]) -> Vec<Vec<String>> {
    words.iter().map(|d| d.split(' ').map(String::from).collect()).collect()
}

fn saved() -> (String, TfidfFeaturizer) {
    let train = docs(&["salak adam", "salak kız", "güzel gün", "güzel adam", "aptal salak", "güzel kız"]);
    let f = TfidfFeaturizer::fit(&train, 2);
    let model = fit_model(&ClassifierSpec::new(ModelKind::MultinomialNb), &f.transform(&train), &[1, 1, 0, 0, 1, 0], 7).unwrap();
    (model_to_json(&model).unwrap(), f)
}

fn edit(text: &str, change: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(text).unwrap();
    change(&mut v);
    serde_json::to_string(&v).unwrap()
}

fn reseal(v: &mut Value) {
    let digest = Sha256::digest(serde_json::to_string(&v["payload"]).unwrap().as_bytes());
    v["checksum"] = Value::String(hex::encode(digest));
}

#[test]
fn envelope_fields() {
    let (text, f) = saved();
    let v: Value = serde_json::from_str(&text).unwrap();
    for key in ["format_version", "kind", "hyperparameters", "vocabulary", "fingerprint", "payload", "checksum", "training"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["format_version"], FORMAT_VERSION);
    assert_eq!(v["kind"], "multinomial_nb");
    assert_eq!(v["training"]["seed"], 7);
    assert_eq!(v["training"]["n_train"], 6);
    assert_eq!(v["fingerprint"], f.space().fingerprint());
}

#[test]
fn payload_tamper_is_integrity_error() {
    let (text, _) = saved();
    let tampered = edit(&text, |v| {
        let probe = v["payload"].to_string().replacen("-", "", 1);
        v["payload"] = serde_json::from_str(&probe).unwrap();
    });
    assert!(matches!(model_from_json(&tampered), Err(Error::Integrity(_))));
    let bad_sum = edit(&text, |v| v["checksum"] = Value::String("00".repeat(32)));
    assert!(matches!(model_from_json(&bad_sum), Err(Error::Integrity(_))));
}

#[test]
fn resealed_garbage_payload_is_integrity_error() {
    let (text, _) = saved();
    let garbage = edit(&text, |v| {
        v["payload"] = serde_json::json!({ "no_such_model": 1 });
        reseal(v);
    });
    assert!(matches!(model_from_json(&garbage), Err(Error::Integrity(_))));
}

#[test]
fn vocabulary_tamper_is_integrity_error() {
    let (text, _) = saved();
    let renamed = edit(&text, |v| {
        let s = v["vocabulary"].to_string().replace("salak", "kalas");
        v["vocabulary"] = serde_json::from_str(&s).unwrap();
    });
    assert!(matches!(model_from_json(&renamed), Err(Error::Integrity(_))));
}

#[test]
fn other_versions_need_migration() {
    let (text, _) = saved();
    let future = edit(&text, |v| v["format_version"] = Value::from(FORMAT_VERSION + 1));
    match model_from_json(&future) {
        Err(Error::Migration { found, supported }) => {
            assert_eq!(found, FORMAT_VERSION + 1);
            assert_eq!(supported, FORMAT_VERSION);
        }
        other => panic!("expected migration error, got {other:?}"),
    }
    let unversioned = edit(&text, |v| {
        v.as_object_mut().unwrap().remove("format_version");
    });
    assert!(matches!(model_from_json(&unversioned), Err(Error::Integrity(_))));
    assert!(matches!(model_from_json("not json"), Err(Error::Integrity(_))));
}

#[test]
fn hyperparameter_tamper_is_rejected() {
    let (text, _) = saved();
    let bad = edit(&text, |v| v["hyperparameters"]["alpha"] = Value::String("lots".into()));
    assert!(model_from_json(&bad).is_err());
}

#[test]
fn foreign_feature_space_is_compatibility_error() {
    let (text, _) = saved();
    let model = model_from_json(&text).unwrap();
    let other = docs(&["bir iki", "iki üç", "üç bir", "bir üç"]);
    let f = TfidfFeaturizer::fit(&other, 2);
    match model.predict_proba(&f.transform(&other)) {
        Err(Error::Compatibility { expected, found }) => {
            assert_eq!(expected, model.fingerprint);
            assert_eq!(found, f.space().fingerprint());
        }
        other => panic!("expected compatibility error, got {other:?}"),
    }
}

#[test]
fn reloaded_space_predicts_like_original() {
    let (text, f) = saved();
    let model = model_from_json(&text).unwrap();
    let rebuilt = TfidfFeaturizer::from_space(model.space.clone()).unwrap();
    let probe = docs(&["salak gün", "güzel", "hiç"]);
    assert_eq!(rebuilt.transform(&probe).matrix, f.transform(&probe).matrix);
    assert_eq!(model.predict_proba(&f.transform(&probe)).unwrap(), model.predict_proba(&rebuilt.transform(&probe)).unwrap());
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_model(dir.path().join("absent.json")), Err(Error::Io { .. })));
}
