use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamdecomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const Z2: [&str; 4] = ["--group", "Z^2", "--gens", "(1,0) (0,1)"];

#[test]
fn cover_the_origin() {
    let o = run(&[&["cover"], &Z2[..], &["--set", "(0,0)", "--colour", "1"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("group Z^2\ngens (1,0) (0,1)\nedge "));
    assert!(out.contains("Grid(g1, g2, 4, 4)"));
    assert!(out.trim_end().ends_with("ok"));
}

#[test]
fn cover_writes_a_file_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.txt");
    let o = run(&[
        &["cover"],
        &Z2[..],
        &["--set", "(0,0) (2,1)", "--colour", "2", "--out", path(&file)],
    ]
    .concat());
    assert_eq!(o.status.code(), Some(0));
    let saved = fs::read_to_string(&file).unwrap();

    let o = run(&["verify", "--colouring", path(&file)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(&["export", "--colouring", path(&file), "--format", "text"]);
    assert_eq!(stdout(&o), saved);
}

#[test]
fn broken_fixture_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.txt");
    fs::write(&file, "group Z^2\ngens (1,0) (0,1)\nedge (0,0) gen 2 colour 1\n").unwrap();
    let o = run(&["verify", "--colouring", path(&file)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("violation 2-regular: (0,0) has 3 edges of colour 1"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(
        run(&["cover", "--group", "Q^2", "--gens", "units", "--set", "(0,0)", "--colour", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[&["cover"], &Z2[..], &["--set", "(0,0)", "--colour", "3"]].concat())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["decompose", "--group", "Z", "--gens", "units", "--steps", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn decompose_checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.txt");
    let o = run(&[
        "decompose",
        "--group",
        "Z^3",
        "--gens",
        "units",
        "--steps",
        "1",
        "--window",
        "-2..2",
        "--checkpoint",
        path(&ck),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("colour classes 3"));
    assert!(out.trim_end().ends_with("ok"));

    let o = run(&["verify", "--colouring", path(&ck), "--window", "-1,1"]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&[
        "decompose",
        "--resume",
        path(&ck),
        "--steps",
        "0",
        "--checkpoint",
        path(&dir.path().join("again.txt")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&ck).unwrap(), fs::read(dir.path().join("again.txt")).unwrap());
}

#[test]
fn unstable_windows_are_rejected() {
    let o = run(&[
        "decompose",
        "--group",
        "Z^2",
        "--gens",
        "units",
        "--steps",
        "1",
        "--window",
        "-5..5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn product_of_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.txt");
    fs::write(
        &z,
        "# the integers, folded onto the naturals\nray 1 : ... 5 3 1 [0] 2 4 6 ...\n",
    )
    .unwrap();
    let o = run(&[
        "product",
        "--left",
        path(&z),
        "--right",
        path(&z),
        "--steps",
        "2",
        "--window",
        "0..6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("step 1 colour J1"));
    assert!(out.contains("window [0,6]^2"));
}

#[test]
fn renderings_are_deterministic() {
    for format in ["dot", "svg"] {
        let args = [&["export"], &Z2[..], &["--format", format, "--window", "-2..2"]].concat();
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
    let dot = stdout(&run(
        &[&["export"], &Z2[..], &["--format", "dot", "--window", "-1..1"]].concat()
    ));
    assert_eq!(dot.matches("colour=1").count(), 6);
    assert_eq!(
        run(&[&["export"], &Z2[..], &["--format", "svg"]].concat())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn trace_a_standard_row() {
    let o = run(&[&["trace"], &Z2[..], &["--from", "(3,4)", "--colour", "1"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("double-ray"));
}
