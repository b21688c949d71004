use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gfdm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfdm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gfdm(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn help_matches_golden_files() {
    let cases: &[(&str, &[&str])] = &[
        ("gfdm", &[]),
        ("presets", &["presets"]),
        ("presets_list", &["presets", "list"]),
        ("synth", &["synth"]),
        ("demod", &["demod"]),
        ("simulate", &["simulate"]),
        ("analyze", &["analyze"]),
        ("guardband", &["guardband"]),
    ];
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = tempfile::tempdir().unwrap();
    for (name, sub) in cases {
        let mut args = sub.to_vec();
        args.push("--help");
        let text = ok(dir.path(), &args);
        let path = golden_dir().join(format!("help_{name}.txt"));
        if update {
            fs::write(&path, &text).unwrap();
        } else {
            let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(text, want, "{name} help drifted; rerun with UPDATE_GOLDEN=1");
        }
    }
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let synth = ok(dir.path(), &["synth", "--help"]);
    for flag in ["--config", "--preset", "--k", "--m", "--cp", "--rolloff", "--nu-t", "--nu-f", "--silent", "--random", "--data", "--blocks", "--constellation", "--out", "--grid-out"] {
        assert!(synth.contains(flag), "synth help lacks {flag}");
    }
    let simulate = ok(dir.path(), &["simulate", "--help"]);
    for flag in ["--channel", "--taps", "--snr", "--trials", "--seed", "--receiver"] {
        assert!(simulate.contains(flag), "simulate help lacks {flag}");
    }
}

#[test]
fn presets_list_has_eleven_entries() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["presets", "list"]);
    let entries: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(entries.len(), 11);
    for e in &entries {
        for key in ["name", "subcarriers", "subsymbols", "scaling_freq", "scaling_time", "silent_subsymbols", "filter", "claims", "scenario_tag", "feature"] {
            assert!(e.get(key).is_some(), "{e} lacks {key}");
        }
    }
}

fn read_grid(path: &Path) -> Vec<(usize, usize, usize, f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.deserialize().map(|row| row.unwrap()).collect()
}

#[test]
fn synth_then_demod_recovers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--preset", "ofdm", "--k", "64", "--cp", "16", "--random", "7", "--blocks", "4", "--out", "a.iq"]);
    assert_eq!(fs::metadata(d.join("a.iq")).unwrap().len(), 4 * 80 * 16);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["sample_count"], 320);

    let summary = ok(d, &["demod", "--input", "a.iq", "--receiver", "mf", "--decide", "qpsk", "--reference", "a.grid.csv", "--out", "est.csv"]);
    let summary: serde_json::Value = serde_json::from_str(summary.trim()).unwrap();
    assert_eq!(summary["symbols"], 256);
    assert_eq!(summary["symbol_errors"], 0);

    // Soft estimates against the transmitted grid.
    ok(d, &["demod", "--input", "a.iq", "--out", "soft.csv"]);
    let (sent, got) = (read_grid(&d.join("a.grid.csv")), read_grid(&d.join("soft.csv")));
    assert_eq!(sent.len(), got.len());
    for (s, g) in sent.iter().zip(&got) {
        assert_eq!((s.0, s.1, s.2), (g.0, g.1, g.2));
        assert!((s.3 - g.3).abs() < 1e-9 && (s.4 - g.4).abs() < 1e-9);
    }
}

#[test]
fn synth_from_data_file_round_trips_oqam() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--preset", "fbmc-oqam", "--random", "3", "--out", "ref.iq"]);
    ok(d, &["synth", "--preset", "fbmc-oqam", "--data", "ref.grid.csv", "--out", "b.iq"]);
    assert_eq!(fs::read(d.join("ref.iq")).unwrap(), fs::read(d.join("b.iq")).unwrap());
    let summary = ok(d, &["demod", "--input", "b.iq", "--receiver", "zf", "--decide", "qpsk", "--reference", "ref.grid.csv", "--out", "est.csv"]);
    assert!(summary.contains("\"symbol_errors\":0"), "{summary}");
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| -> Vec<&'static str> {
        vec!["simulate", "--preset", "gfdm", "--snr", "0,6,12", "--trials", "40", "--seed", "11", "--receiver", "zf", "--out", out]
    };
    ok(d, &args("one"));
    ok(d, &args("two"));
    for ext in ["csv", "json"] {
        let a = fs::read(d.join(format!("one.{ext}"))).unwrap();
        let b = fs::read(d.join(format!("two.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext} differs");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("one.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["simulate", "--preset", "ofdm", "--k", "16", "--snr", "2,8", "--trials", "60", "--seed", "5"];
    let run = |threads: &str, out: &str| {
        let mut all = args.to_vec();
        all.extend(["--out", out]);
        let status = Command::new(env!("CARGO_BIN_EXE_gfdm"))
            .args(&all)
            .env("GFDM_THREADS", threads)
            .current_dir(d)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("1", "single");
    run("4", "multi");
    assert_eq!(fs::read(d.join("single.csv")).unwrap(), fs::read(d.join("multi.csv")).unwrap());
}

#[test]
fn multipath_simulation_reads_taps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("taps.csv"), "re,im\n0.8,0.0\n0.0,0.5\n0.3,-0.1\n").unwrap();
    ok(d, &["simulate", "--preset", "ofdm", "--k", "16", "--channel", "multipath", "--taps", "taps.csv", "--snr", "30", "--trials", "20", "--receiver", "zf", "--out", "mp"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("mp.json")).unwrap()).unwrap();
    assert_eq!(report["channel"]["type"], "multipath");
    assert_eq!(report["points"][0]["errors"], 0);
}

#[test]
fn analyze_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["analyze", "--preset", "gfdm", "--metrics", "papr,psd,gram,ambiguity", "--band", "-8:7", "--blocks", "20", "--out", "rep.json"]);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["source"], "synthetic");
    assert_eq!(rep["metrics"]["rank"], 80);
    assert!(rep["metrics"]["oob_db"].as_f64().unwrap().is_finite());
    assert_eq!(rep["metrics"]["papr_db"].as_array().unwrap().len(), 20);
    for table in ["rep.psd.csv", "rep.ccdf.csv", "rep.ambiguity.csv"] {
        assert!(d.join(table).exists(), "{table}");
    }

    // The same metrics from a stored stream.
    ok(d, &["synth", "--preset", "ofdm", "--random", "1", "--blocks", "8", "--out", "s.iq"]);
    ok(d, &["analyze", "--input", "s.iq", "--metrics", "papr", "--out", "iq.json"]);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("iq.json")).unwrap()).unwrap();
    assert_eq!(rep["source"], "iq");
    assert_eq!(rep["samples"], 8 * 80);
}

#[test]
fn guardband_reports_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = ok(d, &["guardband", "--preset", "gfdm", "--rolloff", "0.5", "--guard", "0", "--offset", "3", "--out", "gb.json"]);
    assert!(text.starts_with("leakage"));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("gb.json")).unwrap()).unwrap();
    assert_eq!(rep["guard"], 0);
    assert_eq!(rep["time_offset"], 3);
    assert!(rep["leakage_db"].as_f64().unwrap() > -100.0);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Validation: bad hint, unknown preset, missing source, missing file.
    assert_eq!(gfdm(d, &["synth", "--preset", "ofdm", "--k", "0", "--random", "1", "--out", "x.iq"]).status.code(), Some(2));
    assert_eq!(gfdm(d, &["synth", "--preset", "nope", "--random", "1", "--out", "x.iq"]).status.code(), Some(2));
    assert_eq!(gfdm(d, &["synth", "--random", "1", "--out", "x.iq"]).status.code(), Some(2));
    assert_eq!(gfdm(d, &["demod", "--input", "missing.iq", "--out", "x.csv"]).status.code(), Some(2));
    let cfg = d.join("bad.json");
    fs::write(&cfg, "{\"schema\": \"v1\", \"samples_per_period\": 0}").unwrap();
    assert_eq!(gfdm(d, &["simulate", "--config", "bad.json", "--snr", "0", "--out", "r"]).status.code(), Some(2));

    // Runtime: ZF on a rank-deficient grid.
    ok(d, &["synth", "--preset", "sefdm", "--random", "1", "--out", "s.iq"]);
    let out = gfdm(d, &["demod", "--input", "s.iq", "--receiver", "zf", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modem.rank_deficient"));
}

#[test]
fn config_file_matches_preset_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--preset", "gfdm", "--random", "2", "--out", "g.iq"]);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("g.meta.json")).unwrap()).unwrap();
    // The sidecar embeds the bare config; write it back as a config document.
    let config: gfdm_core::params::WaveformConfig = serde_json::from_value(meta["config"].clone()).unwrap();
    fs::write(d.join("g.json"), config.to_json()).unwrap();
    ok(d, &["demod", "--config", "g.json", "--input", "g.iq", "--out", "e.csv"]);
    // A different config is rejected as a validation error.
    let out = gfdm(d, &["demod", "--preset", "ofdm", "--k", "16", "--input", "g.iq", "--out", "e.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
