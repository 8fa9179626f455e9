use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_coarse-lab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ball_stat_counts_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["ball", "--model", "free:2", "--radius", "2", "--stat", "--out", s(dir.path())]);
    assert_eq!(out.trim(), "17 vertices");
}

#[test]
fn growth_table_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["ball", "--model", "z^2", "--radius", "20", "--out", s(dir.path())]);
    let csv = read(dir.path().join("growth.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 21);
    for (r, row) in rows.iter().enumerate() {
        let ball: u64 = row.rsplit(',').next().unwrap().parse().unwrap();
        let r = r as u64;
        assert_eq!(ball, 2 * r * r + 2 * r + 1);
    }
    assert!(read(dir.path().join("growth.svg")).contains("<!-- config "));
}

#[test]
fn ends_of_the_plane() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["ends", "--model", "z^2", "--schedule", "1:8,2:12,3:16", "--out", s(dir.path())]);
    assert!(out.contains("stable(1)"), "{out}");
    assert_eq!(read(dir.path().join("ends.csv")), "r,R,components,ends\n1,8,1,1\n2,12,1,1\n3,16,1,1\n");
}

#[test]
fn refute_strips_and_split_halves() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&["cover", "make", "--kind", "strips", "--len", "8", "--radius", "40", "--out", s(&p.join("strips"))]);
    let cover = p.join("strips/cover.json");
    let out = ok(&["refute", "--model", "z^2", "--cover", s(&cover), "--d", "12", "--out", s(&p.join("r"))]);
    assert!(out.contains("verified"), "{out}");
    let w: serde_json::Value = serde_json::from_str(&read(p.join("r/witness.json"))).unwrap();
    assert_eq!(w["trace"][0]["step"], 1);

    // two half-planes: the relator test cannot proceed
    ok(&["cover", "make", "--kind", "strips", "--len", "100", "--radius", "40", "--out", s(&p.join("halves"))]);
    let cover = p.join("halves/cover.json");
    let (code, out, _) = run(&["refute", "--cover", s(&cover), "--d", "12", "--out", s(&p.join("h"))]);
    assert_eq!(code, 2, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&read(p.join("h/inconclusive.json"))).unwrap();
    assert_eq!(doc["step"], "relator containment");
}

#[test]
fn brick_multiplicity_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&["cover", "make", "--kind", "brick", "--len", "16", "--radius", "32", "--out", s(&p.join("c"))]);
    let cover = p.join("c/cover.json");
    ok(&["cover", "multiplicity", "--cover", s(&cover), "--scales", "2,4,8,16", "--out", s(&p.join("m"))]);
    let csv = read(p.join("m/multiplicity.csv"));
    assert!(csv.lines().nth(2).unwrap().starts_with("4,3,"), "{csv}");
    assert_eq!(read(p.join("m/multiplicity.svg")).matches("<circle").count(), 4);
    let out = ok(&["cover", "check", "--cover", s(&cover), "--out", s(&p.join("k"))]);
    assert!(out.starts_with("pass"), "{out}");
}

#[test]
fn van_kampen_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = ok(&["vk", "build", "--word", "a^2 b^2 a^-2 b^-2", "--out", s(&p.join("b"))]);
    assert!(out.starts_with("4 faces"), "{out}");
    let out = ok(&["vk", "area", "--word", "a^3 b^3 a^-3 b^-3", "--out", s(&p.join("a"))]);
    assert_eq!(out.trim(), "area 9, lower bound 9, exact");
    ok(&["vk", "render", "--diagram", s(&p.join("b/diagram.json")), "--out", s(&p.join("r"))]);
    assert!(read(p.join("r/diagram.svg")).contains("<!-- config "));
}

#[test]
fn corrupted_diagram_is_an_internal_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&["vk", "build", "--word", "a b a^-1 b^-1", "--out", s(&p.join("b"))]);
    let mut d: serde_json::Value = serde_json::from_str(&read(p.join("b/diagram.json"))).unwrap();
    let inv = d["darts"][0]["inverse"].as_u64().unwrap() as usize;
    for i in [0, inv] {
        let l = d["darts"][i]["label"].as_i64().unwrap();
        d["darts"][i]["label"] = (-l).into();
    }
    let bad = p.join("bad.json");
    std::fs::write(&bad, d.to_string()).unwrap();
    let (code, _, err) = run(&["vk", "render", "--diagram", s(&bad), "--out", s(&p.join("r"))]);
    assert_eq!(code, 70, "{err}");
    assert!(read(p.join("r/diagnostic.txt")).contains("effective config"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = s(dir.path());
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&["ball", "--radius", "-1", "--out", o]).0, 64);
    assert_eq!(run(&["ball", "--model", "quaternions", "--out", o]).0, 64);
    assert_eq!(run(&["vk", "area", "--word", "a b", "--out", o]).0, 64);
    assert_eq!(run(&["ball", "--radius", "200", "--budget-vertices", "1000", "--out", o]).0, 3);
    let cfg = dir.path().join("slow.cfg");
    std::fs::write(&cfg, "time_cap = 1\n").unwrap();
    let big = ["ball", "--model", "free:3", "--radius", "30", "--budget-vertices", "100000000000"];
    let (code, _, err) = run(&[&big[..], &["--config", s(&cfg), "--out", o]].concat());
    assert_eq!(code, 3, "{err}");
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# plane\nmodel = z^2\nradius = 3\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = ok(&["ball", "--config", s(&cfg), "--stat", "--out", s(&out_dir)]);
    assert_eq!(out.trim(), "25 vertices");
    let out = ok(&["ball", "--config", s(&cfg), "--radius", "1", "--stat", "--out", s(&out_dir)]);
    assert_eq!(out.trim(), "5 vertices");
    assert!(read(out_dir.join("config.txt")).contains("radius = 1\n"));
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(run(&["ball", "--config", s(&cfg), "--out", s(&out_dir)]).0, 64);
}

#[test]
fn cache_is_reused_and_rebuilt_when_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["ball", "--model", "lamplighter", "--radius", "5", "--stat", "--cache-dir", s(&cache), "--out"];
    let out_dir = dir.path().join("o");
    let mut a = args.to_vec();
    a.push(s(&out_dir));
    let fresh = ok(&a);
    let files: Vec<PathBuf> = std::fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    assert_eq!(ok(&a), fresh);
    std::fs::write(&files[0], "{\"format_version\": 1}").unwrap();
    let (code, out, err) = run(&a);
    assert_eq!((code, out), (0, fresh));
    assert!(err.contains("rebuilding"));
    assert!(read(&files[0]).len() > 100);
}

/// Every file below `dir`, relative path to bytes.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn pipeline(root: &Path) {
    let o = |n: &str| root.join(n).to_str().unwrap().to_string();
    ok(&["report", "--model", "z^2", "--radius", "8", "--out", &o("report")]);
    ok(&["cover", "make", "--kind", "agglomerate", "--D", "8", "--radius", "24", "--seed", "7", "--out", &o("agg")]);
    let cover = o("agg/cover.json");
    run(&["refute", "--cover", &cover, "--d", "12", "--n-used", "8", "--out", &o("refute")]);
    ok(&["cover", "color", "--cover", &cover, "--d", "4", "--out", &o("color")]);
    ok(&["geodesics", "--model", "lamplighter", "--n", "3", "--out", &o("geo")]);
    ok(&["vk", "build", "--word", "a b a b a^3", "--model", "presentation:<a,b | a^3, b^2, abab>", "--out", &o("vk")]);
    ok(&["constants", "--D", "64", "--out", &o("k")]);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    let first = snapshot(a.path());
    pipeline(a.path());
    assert_eq!(snapshot(a.path()), first);
    // a different output directory changes only the config echo and SVG stamps
    pipeline(b.path());
    let other = snapshot(b.path());
    assert_eq!(other.keys().collect::<Vec<_>>(), first.keys().collect::<Vec<_>>());
    for (k, v) in &first {
        let ext = k.extension().and_then(|e| e.to_str()).unwrap_or("");
        if matches!(ext, "csv" | "json" | "md") {
            assert_eq!(&other[k], v, "{}", k.display());
        }
    }
}
