//! Emitted JSON validates against the published schemas in docs/schemas.

use std::path::PathBuf;

use nsinflation::calculus::first_iterate;
use nsinflation::construction::{build_frequency_family, build_initial_data, Preset};
use nsinflation::experiments::{sweep, ExperimentConfig};
use nsinflation::norms::{xt_norm, CarlesonOptions};
use nsinflation::solver::{snapshot, spectralize};
use serde_json::Value;

fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(schema_dir().join(name)).unwrap()).unwrap()
}

struct Files;

impl jsonschema::Retrieve for Files {
    fn retrieve(
        &self,
        uri: &jsonschema::Uri<String>,
    ) -> Result<Value, Box<dyn std::error::Error + Send + Sync>> {
        let name = uri.path().as_str().rsplit('/').next().unwrap_or_default().to_string();
        Ok(serde_json::from_str(&std::fs::read_to_string(schema_dir().join(name))?)?)
    }
}

fn check(schema: &str, instance: &Value) {
    let v = jsonschema::options()
        .with_base_uri(format!("file:///schemas/{schema}"))
        .with_retriever(Files)
        .build(&load(schema))
        .unwrap_or_else(|e| panic!("{schema}: {e}"));
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn library_values_match_schemas() {
    let cfg = ExperimentConfig::default();
    check("experiment-config.schema.json", &json(&cfg.to_json().unwrap()));
    check("experiment-config.schema.json", &json("{}"));

    let fam = build_frequency_family(2, 2, Preset::Desk, Some(&[4, 8])).unwrap();
    check("frequency-family.schema.json", &serde_json::to_value(&fam).unwrap());
    let lacunary = build_frequency_family(2, 1, Preset::Lacunary, None).unwrap();
    check("frequency-family.schema.json", &serde_json::to_value(&lacunary).unwrap());

    let data = build_initial_data(&fam, 1.5).unwrap();
    check("initial-data.schema.json", &json(&data.to_json().unwrap()));

    let u1 = first_iterate(&data).unwrap().u1;
    check("trig-field.schema.json", &json(&u1.to_json().unwrap()));
    let rep = xt_norm(&u1, 0.25, &CarlesonOptions::default()).unwrap();
    check("norm-report.schema.json", &json(&rep.to_json().unwrap()));

    let g = spectralize(&data.field, 0.0, [32, 32, 1], 1.0).unwrap();
    let bytes = snapshot::encode(&g);
    check("snapshot-sidecar.schema.json", &serde_json::to_value(snapshot::sidecar(&g, &bytes)).unwrap());
}

#[test]
fn run_artifacts_match_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::default();
    c.family.shells = Some(vec![4, 8]);
    c.solver.n = 32;
    c.solver.t_end = 0.2;
    c.sweep.q = vec![0.0, 1.5];
    c.output = Some(dir.path().to_path_buf());
    sweep(&c).unwrap();
    let read = |p: PathBuf| json(&std::fs::read_to_string(p).unwrap());
    check("sweep-summary.schema.json", &read(dir.path().join("sweep.json")));
    check("manifest.schema.json", &read(dir.path().join("manifest.json")));
    for i in 0..2 {
        let p = dir.path().join("points").join(format!("{i:03}"));
        check("inflation-report.schema.json", &read(p.join("report.json")));
        check("manifest.schema.json", &read(p.join("manifest.json")));
        check("snapshot-sidecar.schema.json", &read(p.join("u_final.json")));
        check("initial-data.schema.json", &read(p.join("initial.json")));
        check("trig-field.schema.json", &read(p.join("u1.json")));
    }
}

#[test]
fn schemas_reject_malformed_values() {
    let v = jsonschema::options()
        .with_base_uri("file:///schemas/experiment-config.schema.json".to_string())
        .with_retriever(Files)
        .build(&load("experiment-config.schema.json"))
        .unwrap();
    assert!(!v.is_valid(&json(r#"{"bogus": 1}"#)));
    assert!(!v.is_valid(&json(r#"{"q": "two"}"#)));
}
