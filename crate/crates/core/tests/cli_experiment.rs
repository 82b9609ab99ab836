//! Full-pipeline check: the default delta experiment runs through the CLI
//! entry point, passes every verdict, and leaves a machine-readable report.

use oplab::cli::cli_main;

#[test]
fn experiment_delta_default_config_exits_zero() {
    let out = std::env::temp_dir().join(format!("oplab-delta-e2e-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&out);
    let code = cli_main(
        [
            "oplab",
            "experiment",
            "delta",
            "--out",
            out.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    assert_eq!(code, 0);
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("overall = pass"), "{report}");
    let levels = std::fs::read_to_string(out.join("levels.csv")).unwrap();
    // one record per configured grid size
    assert_eq!(levels.lines().count(), 2 + 6, "{levels}");

    // byte-identical on a repeated run with the same configuration
    let out2 = std::env::temp_dir().join(format!("oplab-delta-e2e2-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&out2);
    let code2 = cli_main(
        ["oplab", "experiment", "delta", "--out", out2.to_str().unwrap()]
            .iter()
            .map(|s| s.to_string()),
    );
    assert_eq!(code2, 0);
    assert_eq!(
        report,
        std::fs::read_to_string(out2.join("report.txt")).unwrap()
    );
    assert_eq!(
        levels,
        std::fs::read_to_string(out2.join("levels.csv")).unwrap()
    );
}
