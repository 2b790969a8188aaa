use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn phoenixmap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phoenixmap"))
        .current_dir(dir)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn synth(dir: &Path, kind: &str, count: &str, seed: &str, out: &str) {
    let o = phoenixmap(
        dir,
        &[
            "synth", "--kind", kind, "--count", count, "--seed", seed, "--out", out,
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_is_reproducible() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "ring", "500", "7", "a.csv");
    synth(dir.path(), "ring", "500", "7", "b.csv");
    synth(dir.path(), "ring", "500", "8", "c.csv");
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
    assert_eq!(
        String::from_utf8(read("a.csv")).unwrap().lines().count(),
        501
    );
}

#[test]
fn render_then_rerender_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "mixture", "1500", "3", "pts.csv");
    let o = phoenixmap(
        dir.path(),
        &[
            "render",
            "--input",
            "pts.csv",
            "--segments",
            "600",
            "--window",
            "60",
            "--out",
            "map.svg",
            "--sidecar",
            "map.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(dir.path().join("map.svg")).unwrap();
    assert!(svg.contains("<path class=\"band\""));

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("map.json")).unwrap()).unwrap();
    let group = &sidecar["groups"][0];
    assert_eq!(group["divisor_count"], 600);
    assert_eq!(sidecar["config"]["window"], 60);
    assert_eq!(group["raw_widths"].as_array().unwrap().len(), 600);

    let o = phoenixmap(
        dir.path(),
        &["rerender", "--sidecar", "map.json", "--out", "again.svg"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        svg,
        fs::read_to_string(dir.path().join("again.svg")).unwrap()
    );
}

#[test]
fn sidecar_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "gaussian", "800", "11", "pts.csv");
    let first = phoenixmap(
        dir.path(),
        &[
            "render",
            "--input",
            "pts.csv",
            "--segments",
            "400",
            "--k",
            "5",
            "--palette",
            "set1",
            "--max-width",
            "12",
            "--out",
            "a.svg",
            "--sidecar",
            "a.json",
        ],
    );
    assert_eq!(code(&first), 0);
    let second = phoenixmap(
        dir.path(),
        &[
            "render",
            "--input",
            "pts.csv",
            "--config",
            "a.json",
            "--out",
            "b.svg",
            "--sidecar",
            "b.json",
        ],
    );
    assert_eq!(
        code(&second),
        0,
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    let read = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap();
    assert_eq!(read("a.svg"), read("b.svg"));
    let groups =
        |f: &str| serde_json::from_str::<serde_json::Value>(&read(f)).unwrap()["groups"].clone();
    assert_eq!(groups("a.json"), groups("b.json"));
}

#[test]
fn predefined_outline() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "uniform", "2000", "5", "pts.csv");
    fs::write(
        dir.path().join("rect.geojson"),
        r#"{"type":"Feature","properties":{},"geometry":{"type":"Polygon",
            "coordinates":[[[10,20],[90,20],[90,80],[10,80],[10,20]]]}}"#,
    )
    .unwrap();
    let o = phoenixmap(
        dir.path(),
        &[
            "render",
            "--input",
            "pts.csv",
            "--outline",
            "rect.geojson",
            "--segments",
            "400",
            "--sidecar",
            "m.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(sidecar["config"]["hull_mode"], "predefined");
    assert_eq!(sidecar["groups"][0]["outline"].as_array().unwrap().len(), 4);
    assert!(dir.path().join("map.svg").exists());
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.csv"), "x,y\n1,2\n3,oops\n").unwrap();
    fs::write(dir.path().join("noy.csv"), "x,z\n1,2\n").unwrap();
    synth(dir.path(), "uniform", "100", "1", "ok.csv");
    for args in [
        &["render", "--input", "missing.csv"][..],
        &["render", "--input", "bad.csv"],
        &["render", "--input", "noy.csv"],
        &["render", "--input", "ok.csv", "--palette", "rainbow"],
        &["render", "--input", "ok.csv", "--segments", "8"],
        &[
            "render",
            "--input",
            "ok.csv",
            "--scale",
            "1",
            "--max-width",
            "3",
        ],
        &["render", "--unknown-flag"],
        &["synth", "--kind", "spiral"],
        &["rerender", "--sidecar", "ok.csv"],
    ] {
        let o = phoenixmap(dir.path(), args);
        assert_eq!(
            code(&o),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = phoenixmap(dir.path(), &["render", "--input", "bad.csv"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn geometry_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("line.csv"), "x,y\n0,0\n1,1\n2,2\n3,3\n").unwrap();
    fs::write(dir.path().join("bowtie.csv"), "x,y\n0,0\n1,1\n1,0\n0,1\n").unwrap();
    fs::write(
        dir.path().join("pts.csv"),
        "x,y\n0.2,0.2\n0.8,0.3\n0.5,0.7\n",
    )
    .unwrap();
    let o = phoenixmap(dir.path(), &["render", "--input", "line.csv"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("'all'"));
    let o = phoenixmap(
        dir.path(),
        &["render", "--input", "pts.csv", "--outline", "bowtie.csv"],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn small_groups_warn_without_colour_when_asked() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x,y,series\n");
    for (x, y) in [
        (0.0, 0.0),
        (4.0, 0.5),
        (5.0, 4.0),
        (1.0, 5.0),
        (2.0, 2.0),
        (3.0, 1.0),
    ] {
        csv += &format!("{x},{y},big\n");
    }
    csv += "9,9,tiny\n";
    fs::write(dir.path().join("pts.csv"), csv).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_phoenixmap"))
        .current_dir(dir.path())
        .args(["render", "--input", "pts.csv", "--segments", "200"])
        .env("PHOENIXMAP_NO_COLOR", "1")
        .env("RUST_LOG_STYLE", "always")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("skipping group 'tiny'"), "{stderr}");
    assert!(!stderr.contains('\u{1b}'), "{stderr:?}");
}
