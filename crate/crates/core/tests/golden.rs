//! Schema check of the verdict document against a stored copy.
//! Set `DQPASS_BLESS=1` to rewrite the stored file.

use std::path::PathBuf;

use dqpass::netcase::{ieee9, VariantFlags};
use dqpass::passcheck::{classify_model, AnalysisBand, ClassifyOptions, ModelKind};
use dqpass::passivate::RegulationSet;
use dqpass::reference::{REGULATION_BUSES, REGULATION_K};
use serde_json::Value;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn same_shape(a: &Value, b: &Value, path: &str, errors: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<_> = x.keys().collect();
            let ky: Vec<_> = y.keys().collect();
            if kx != ky {
                errors.push(format!("{path}: keys {kx:?} vs {ky:?}"));
                return;
            }
            for (k, v) in x {
                same_shape(v, &y[k], &format!("{path}.{k}"), errors);
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                errors.push(format!("{path}: length {} vs {}", x.len(), y.len()));
                return;
            }
            for (i, (v, w)) in x.iter().zip(y).enumerate() {
                same_shape(v, w, &format!("{path}[{i}]"), errors);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() > 1e-7 * x.abs().max(y.abs()).max(1.0) {
                errors.push(format!("{path}: {x} vs {y}"));
            }
        }
        _ if a == b => {}
        _ => errors.push(format!("{path}: {a} vs {b}")),
    }
}

fn check(name: &str, doc: Value) {
    let path = golden_path(name);
    if std::env::var_os("DQPASS_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
        return;
    }
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(&path).expect("golden file")).unwrap();
    let mut errors = Vec::new();
    same_shape(&doc, &stored, "$", &mut errors);
    assert!(errors.is_empty(), "{} differences, first: {:#?}", errors.len(), &errors[..errors.len().min(10)]);
}

#[test]
fn model_two_low_frequency_regulated() {
    let reg = RegulationSet::uniform(&REGULATION_BUSES, REGULATION_K);
    let v = classify_model(
        &ieee9(),
        VariantFlags::BASE,
        ModelKind::II,
        AnalysisBand::LowFrequency,
        &reg,
        &ClassifyOptions::default(),
    )
    .unwrap();
    check("ieee9_model2_lowfreq.json", serde_json::to_value(&v).unwrap());
}

#[test]
fn model_three_wideband() {
    let v = classify_model(
        &ieee9(),
        VariantFlags::BASE,
        ModelKind::III,
        AnalysisBand::WideBand,
        &RegulationSet::none(),
        &ClassifyOptions::default(),
    )
    .unwrap();
    check("ieee9_model3_wideband.json", serde_json::to_value(&v).unwrap());
}
