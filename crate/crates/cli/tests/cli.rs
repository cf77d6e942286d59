use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use groundscale::io;
use groundscale::scalemap::build_scale_map;

const RIG: &str = "fx = 700\nfy = 700\ncx = 319.5\ncy = 239.5\nwidth = 640\nheight = 480\n\
    k1 = 0.0\nk2 = 0.0\ncam_height_m = 0.6\npitch_deg = -45\nroll_deg = 0\nyaw_deg = 0\n";

const SCENE_SECTIONS: &str = "\n[field]\nlayout = \"none\"\n\n\
    [[line]]\nx0_m = 0.2\ny0_m = 0.3\nx1_m = 1.5\ny1_m = 0.3\n\n\
    [[line]]\nx0_m = 0.35\ny0_m = -0.6\nx1_m = 0.35\ny1_m = 0.15\n\n\
    [[line]]\nx0_m = 0.7\ny0_m = -0.7\nx1_m = 1.4\ny1_m = -0.45\n\n\
    [[obstacle]]\nx_m = 0.95\ny_m = -0.05\nradius_m = 0.3\nheight_m = 0.4\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_groundscale"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["scalemap", "--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["scalemap", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["scalemap", "--config", "x.toml", "--out", "y.pgm", "--stride", "0"]).status.code(), Some(1));
    assert_eq!(run(&["fuse"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let out = dir.path().join("s.pgm");
    let o = run(&["scalemap", "--config", p(&missing), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.toml"));
}

#[test]
fn scalemap_matches_library_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rig.toml");
    fs::write(&cfg, RIG).unwrap();
    let (out, dump) = (dir.path().join("s.pgm"), dir.path().join("s.f32"));
    let o = run(&["scalemap", "--config", p(&cfg), "--stride", "32", "--out", p(&out), "--dump", p(&dump)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let config = io::parse_config(RIG).unwrap();
    let map = build_scale_map(&config.rig, 32).unwrap();
    assert_eq!(fs::read(&out).unwrap(), io::encode_pgm(&map.to_channel(&config.encoding)));
    assert_eq!(fs::read(&dump).unwrap(), io::encode_float_dump(640, 480, &map.dense()));
}

#[test]
fn synth_detect_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.toml");
    fs::write(&scene, format!("{RIG}{SCENE_SECTIONS}")).unwrap();
    let (gt, pred) = (dir.path().join("gt"), dir.path().join("pred"));

    let o = run(&["synth", "--scene", p(&scene), "--out-dir", p(&gt), "--name", "field"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["ppm", "txt", "frm", "f32", "rig.toml"] {
        assert!(gt.join(format!("field.{ext}")).exists(), "{ext}");
    }
    assert_eq!(io::read_labels(&gt.join("field.txt")).unwrap().len(), 1);

    let o = run(&[
        "detect-classic",
        "--config",
        p(&gt.join("field.rig.toml")),
        "--image",
        p(&gt.join("field.ppm")),
        "--out-dir",
        p(&pred),
        "--annotate",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(pred.join("field.annotated.ppm").exists());
    assert_eq!(io::read_labels(&pred.join("field.txt")).unwrap().len(), 1);
    // keep only label files in the prediction directory
    fs::remove_file(pred.join("field.annotated.ppm")).unwrap();

    let csv = dir.path().join("table.csv");
    let o = run(&["eval", "--pred", p(&pred), "--gt", p(&gt), "--csv", p(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("mAP@0.5"));
    let row = fs::read_to_string(&csv).unwrap().lines().nth(1).unwrap().to_string();
    assert_eq!(row, "0.5,1.000000,1.000000");
}

#[test]
fn eval_perfect_predictor() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, pred) = (dir.path().join("gt"), dir.path().join("pred"));
    fs::create_dir_all(&gt).unwrap();
    fs::create_dir_all(&pred).unwrap();
    fs::write(gt.join("a.txt"), "0 0.5 0.5 0.2 0.2\n1 0.2 0.2 0.1 0.1\n").unwrap();
    fs::write(gt.join("b.txt"), "0 0.3 0.6 0.2 0.4\n").unwrap();
    fs::write(pred.join("a.txt"), "0 0.5 0.5 0.2 0.2 0.9\n1 0.2 0.2 0.1 0.1 0.8\n").unwrap();
    fs::write(pred.join("b.txt"), "0 0.3 0.6 0.2 0.4 0.7\n").unwrap();
    let o = run(&["eval", "--pred", p(&pred), "--gt", p(&gt)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    for line in text.lines().skip(1) {
        assert!(line.split_whitespace().skip(1).all(|v| v == "1.0000"), "{line}");
    }
    fs::write(pred.join("c.txt"), "").unwrap();
    assert_eq!(run(&["eval", "--pred", p(&pred), "--gt", p(&gt)]).status.code(), Some(2));
}

#[test]
fn fuse_split_and_augment() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.toml");
    fs::write(&scene, format!("{RIG}{SCENE_SECTIONS}")).unwrap();
    let d = dir.path();
    assert!(run(&["synth", "--scene", p(&scene), "--out-dir", p(d)]).status.success());

    let (rgb, s) = (d.join("back.ppm"), d.join("back.pgm"));
    let o = run(&["fuse", "--split", p(&d.join("scene.frm")), "--out-rgb", p(&rgb), "--out-s", p(&s)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&rgb).unwrap(), fs::read(d.join("scene.ppm")).unwrap());
    let again = d.join("again.frm");
    assert!(run(&["fuse", "--rgb", p(&rgb), "--s", p(&s), "--out", p(&again)]).status.success());
    assert_eq!(fs::read(&again).unwrap(), fs::read(d.join("scene.frm")).unwrap());

    let outs: Vec<_> = ["1", "4"]
        .iter()
        .map(|jobs| {
            let out = d.join(format!("aug{jobs}"));
            let o = run(&[
                "--jobs",
                jobs,
                "augment",
                "--frame",
                p(&d.join("scene.frm")),
                "--labels",
                p(&d.join("scene.txt")),
                "--seed",
                "5",
                "--n",
                "3",
                "--out-dir",
                p(&out),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            (stdout(&o), out)
        })
        .collect();
    assert_eq!(outs[0].0.replace("aug1", "aug4"), outs[1].0);
    for i in 0..3 {
        for ext in ["frm", "txt"] {
            let name = format!("scene_{i}.{ext}");
            assert_eq!(fs::read(outs[0].1.join(&name)).unwrap(), fs::read(outs[1].1.join(&name)).unwrap());
        }
    }
}
