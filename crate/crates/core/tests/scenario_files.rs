use caloric::scenarios::{run, ComplementCubeConfig, ScenarioConfig};

#[test]
fn configs_round_trip_through_json() {
    for name in ScenarioConfig::NAMES {
        let cfg = ScenarioConfig::by_name(name, 9).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back, "{name}");
    }
    assert!(ScenarioConfig::by_name("nope", 1).is_none());
}

#[test]
fn result_directory_has_json_and_tables() {
    let mut cfg = ComplementCubeConfig::new(2);
    cfg.n_paths = 4000;
    let result = run(&ScenarioConfig::ComplementCube(cfg)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = result.write_dir(dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    let csv = std::fs::read_to_string(dir.path().join("masses.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("R,mass,standard_error"));
    assert_eq!(csv.lines().count(), 5);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"], "complement-cube");
    assert_eq!(json["config"]["scenario"], "complement-cube");
}
