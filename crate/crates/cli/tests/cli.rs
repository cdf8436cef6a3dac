//! Command-line behavior: flag/config precedence, error paths, exit codes,
//! and the trace dump format.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoi-lab"))
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("lab.conf");
    std::fs::write(
        &config,
        "# experiment defaults\nlambda = 0.5\nepsilon = 0.2\ndelta = 5\njmax = 10\n",
    )
    .unwrap();

    // config drives delta=5
    let from_config = tmp.path().join("a.csv");
    let status = bin()
        .args(["pmf", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&from_config)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&from_config).unwrap();
    assert!(text.contains("delta=5"), "config delta ignored: {text}");

    // the flag overrides the config
    let from_flag = tmp.path().join("b.csv");
    let status = bin()
        .args(["pmf", "--delta", "2", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&from_flag)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&from_flag).unwrap();
    assert!(text.contains("delta=2"), "flag lost to config: {text}");
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.conf");
    std::fs::write(&config, "lambda 0.5\n").unwrap();
    let status = bin()
        .args(["pmf", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    // unknown flag (clap)
    assert_eq!(bin().args(["pmf", "--bogus"]).status().unwrap().code(), Some(2));
    // empty threshold range
    assert_eq!(
        bin()
            .args(["sweep", "--delta-min", "5", "--delta-max", "2"])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    // out-of-range physics
    assert_eq!(
        bin().args(["pmf", "--epsilon", "1.0"]).status().unwrap().code(),
        Some(2)
    );
    // jmax below delta + 1
    assert_eq!(
        bin()
            .args(["pmf", "--delta", "5", "--jmax", "3"])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    // bad policy spec
    assert_eq!(
        bin()
            .args(["simulate", "--policy", "triple:1:2:3"])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    // eta grid outside (0, 1]
    assert_eq!(
        bin()
            .args(["tradeoff", "--eta-grid", "0.0,0.5", "--policies", "lb"])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
}

#[test]
fn plot_rejects_missing_inputs_and_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let svg = tmp.path().join("out.svg");
    let status = bin()
        .args(["plot", "--input", "/nonexistent/file.csv", "--output"])
        .arg(&svg)
        .args(["--x", "a", "--y", "b"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let csv = tmp.path().join("data.csv");
    std::fs::write(&csv, "# schema: test\na,b\n1,2\n3,4\n").unwrap();
    let status = bin()
        .args(["plot", "--input"])
        .arg(&csv)
        .args(["--output"])
        .arg(&svg)
        .args(["--x", "a", "--y", "missing"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin()
        .args(["plot", "--input"])
        .arg(&csv)
        .args(["--output"])
        .arg(&svg)
        .args(["--x", "a", "--y", "b"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(svg.exists());
}

#[test]
fn trace_dump_is_tab_separated_slot_records() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("trace.tsv");
    let status = bin()
        .args([
            "simulate",
            "--policy",
            "plgfs",
            "--sim-slots",
            "500",
            "--seed",
            "3",
            "--trace",
        ])
        .arg(&trace)
        .args(["--out"])
        .arg(tmp.path().join("stats.csv"))
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 500);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 6, "line {i}: {line}");
        assert_eq!(fields[0].parse::<u64>().unwrap(), i as u64 + 1);
        for flag in &fields[3..6] {
            assert!(*flag == "0" || *flag == "1", "line {i}: {line}");
        }
    }
}

#[test]
fn tradeoff_svg_option_renders_chart() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("t.csv");
    let svg = tmp.path().join("t.svg");
    let status = bin()
        .args([
            "tradeoff",
            "--eta-grid",
            "0.25,0.5",
            "--policies",
            "lb,random",
            "--out",
        ])
        .arg(&csv)
        .args(["--svg"])
        .arg(&svg)
        .status()
        .unwrap();
    assert!(status.success());
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.contains("<svg"));
    assert!(svg_text.contains("lower_bound"));
    assert!(svg_text.contains("aoi_random"));
}

#[test]
fn stdout_csv_matches_file_output() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("s.csv");
    let args = ["sweep", "--delta-min", "0", "--delta-max", "2", "--sim-slots", "5000", "--seed", "1"];
    let status = bin().args(args).arg("--out").arg(&file).status().unwrap();
    assert!(status.success());
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success());
    assert_eq!(out.stdout, std::fs::read(&file).unwrap());
}

#[test]
fn pmf_handles_degenerate_and_singular_parameters() {
    let tmp = tempfile::tempdir().unwrap();

    // perfect channel, generate-at-will: all mass at age 1
    let out = tmp.path().join("ideal.csv");
    let status = bin()
        .args(["pmf", "--lambda", "1", "--epsilon", "0", "--delta", "1", "--jmax", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert!(rows[0].starts_with("1,1.00000000"));
    for row in &rows[1..] {
        assert!(row.ends_with(",0"), "unexpected mass: {row}");
    }

    // eps + lambda = 1: evaluated through the recurrence, still normalized
    let out = tmp.path().join("singular.csv");
    let status = bin()
        .args(["pmf", "--lambda", "0.8", "--epsilon", "0.2", "--delta", "3", "--jmax", "60", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    // the in-memory PMF is normalized to 1e-12 (covered by the library
    // tests); the printed column carries 9 significant digits per cell
    let total: f64 = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-8, "masses sum to {total}");
}

#[test]
fn tradeoff_single_budget_lower_bound_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lb.csv");
    let status = bin()
        .args(["tradeoff", "--eta-grid", "0.3", "--policies", "lb", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cells: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cells[1], "2.58333333");
    // no simulation or solver ran: the other columns are empty
    assert!(cells[2].is_empty() && cells[3].is_empty() && cells[4].is_empty() && cells[5].is_empty());
}

#[test]
fn tradeoff_converges_to_unconstrained_corner_when_budget_is_loose() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("corner.csv");
    let status = bin()
        .args([
            "tradeoff",
            "--eta-grid",
            "0.5556",
            "--policies",
            "lb,single,random,cmdp",
            "--sim-slots",
            "200000",
            "--dt-cap",
            "40",
            "--dr-cap",
            "200",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    let cells: Vec<f64> = row
        .split(',')
        .map(|c| if c.is_empty() { f64::NAN } else { c.parse().unwrap() })
        .collect();
    // every policy family sits at the unconstrained corner 2.25
    assert!((cells[2] - 2.25).abs() < 0.05, "single {}", cells[2]);
    assert!((cells[3] - 2.25).abs() < 1e-9, "random {}", cells[3]);
    assert!((cells[5] - 2.25).abs() < 0.03, "cmdp {}", cells[5]);
}

#[test]
fn golden_directory_matches_doc_examples() {
    // the pinned goldens exist and carry the schema marker
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in ["pmf.csv", "sweep.csv", "tradeoff.csv", "cmdp.csv", "simulate.csv"] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        assert!(text.starts_with("# schema: aoi-lab/"), "{name}");
    }
}
