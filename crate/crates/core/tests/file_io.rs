use stairprecond::ocpgen::{random_instance, GeneratorConfig, GENERATOR_VERSION};
use stairprecond::BlockTridiagMatrix;

#[test]
fn matrix_file_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.txt");
    let a = random_instance(&GeneratorConfig::new(3, 5, 4)).unwrap();
    a.save(&path).unwrap();
    let back = BlockTridiagMatrix::load(&path).unwrap();
    assert_eq!(back, a);
}

#[test]
fn sidecar_records_generator_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let cfg = GeneratorConfig::new(42, 6, 3);
    cfg.write_sidecar(&path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["version"], GENERATOR_VERSION);
    let back: GeneratorConfig = serde_json::from_value(doc["config"].clone()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(random_instance(&back).unwrap(), random_instance(&cfg).unwrap());
}

#[test]
fn load_reports_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    assert!(BlockTridiagMatrix::load(dir.path().join("missing.txt")).is_err());
}
