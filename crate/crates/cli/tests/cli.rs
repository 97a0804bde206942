//! End-to-end tests of the `cas` binary: exit codes, file outputs, and the
//! printed protocol numbers.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BBS: &str = "17070454183419799271,13274556879856747067,123456789";

fn cas(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cas"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Small deterministic gray test image.
fn write_pgm(dir: &Path, name: &str, width: usize, height: usize) -> Vec<u8> {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend((0..width * height).map(|p| ((p * 37 + 11) % 256) as u8));
    std::fs::write(dir.join(name), &bytes).unwrap();
    bytes
}

fn write_pbm(dir: &Path, name: &str) -> Vec<u8> {
    // 9x2 bitmap: rows are byte-padded.
    let bytes = b"P4\n9 2\n\x96\x80\x01\x00".to_vec();
    std::fs::write(dir.join(name), &bytes).unwrap();
    bytes
}

#[test]
fn split_then_recover_round_trips_and_reports_iterations() {
    let dir = TempDir::new().unwrap();
    let original = write_pgm(dir.path(), "secret.pgm", 23, 17);

    let out = cas(
        dir.path(),
        &[
            "split", "--k", "3", "--n", "5", "--m", "3", "--rules", "232,232", "--bbs", BBS,
            "-o", "shares", "secret.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("scheme id:"));
    assert!(stdout(&out).contains("rules: [232, 232]"));
    assert!(stdout(&out).contains("indices 3..=7"));
    for slot in 0..5 {
        assert!(dir.path().join(format!("shares/share_{slot}.cas")).exists());
    }

    let out = cas(
        dir.path(),
        &[
            "recover",
            "shares/share_2.cas",
            "shares/share_3.cas",
            "shares/share_4.cas",
            "-o",
            "out.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(
        stdout(&out).contains("5 inverse iterations"),
        "stdout: {}",
        stdout(&out)
    );
    assert!(stdout(&out).contains("alpha=2"));
    let recovered = std::fs::read(dir.path().join("out.pgm")).unwrap();
    assert_eq!(recovered, original);
}

#[test]
fn black_white_images_round_trip() {
    let dir = TempDir::new().unwrap();
    let original = write_pbm(dir.path(), "secret.pbm");
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--rules", "301", "--bbs", BBS, "-o", ".",
            "secret.pbm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let out = cas(
        dir.path(),
        &["recover", "share_0.cas", "share_1.cas", "-o", "out.pbm"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(std::fs::read(dir.path().join("out.pbm")).unwrap(), original);
}

#[test]
fn split_rejects_threshold_above_share_count() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 4, 4);
    let out = cas(
        dir.path(),
        &["split", "--k", "3", "--n", "2", "secret.pgm"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exceeds"), "stderr: {}", stderr(&out));
}

#[test]
fn recover_below_threshold_exits_3() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 6, 6);
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "3", "--n", "5", "--rules", "232,86", "--bbs", BBS, "-o", ".",
            "secret.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = cas(
        dir.path(),
        &["recover", "share_0.cas", "share_1.cas", "-o", "out.pgm"],
    );
    assert_eq!(code(&out), 3);

    let out = cas(
        dir.path(),
        &[
            "recover",
            "share_0.cas",
            "share_2.cas",
            "share_4.cas",
            "-o",
            "out.pgm",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("longest consecutive run: 1"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn mixed_schemes_exit_3() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 5, 5);
    for (i, seed) in ["123456789", "987654321"].iter().enumerate() {
        let bbs = format!(
            "17070454183419799271,13274556879856747067,{seed}"
        );
        let out = cas(
            dir.path(),
            &[
                "split", "--k", "2", "--n", "2", "--rules", "86", "--bbs", &bbs, "-o",
                &format!("run{i}"), "secret.pgm",
            ],
        );
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    let out = cas(
        dir.path(),
        &[
            "recover",
            "run0/share_0.cas",
            "run1/share_1.cas",
            "-o",
            "out.pgm",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("does not belong to scheme"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn fixed_bbs_parameters_reproduce_byte_identical_shares() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 9, 7);
    for run in ["a", "b"] {
        let out = cas(
            dir.path(),
            &[
                "split", "--k", "2", "--n", "3", "--bbs", BBS, "-o", run, "secret.pgm",
            ],
        );
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    for slot in 0..3 {
        let a = std::fs::read(dir.path().join(format!("a/share_{slot}.cas"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b/share_{slot}.cas"))).unwrap();
        assert_eq!(a, b, "share {slot} differs between runs");
    }
}

#[test]
fn inspect_prints_header_fields_and_crc_status() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 3, 3);
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--rules", "232", "--bbs", BBS, "-o", ".",
            "secret.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = cas(dir.path(), &["inspect", "share_0.cas"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for needle in [
        "k: 2",
        "n: 2",
        "m: 2",
        "i: 2 (participant 0)",
        "size: 3x3 cells",
        "rules: [232]",
        "crc: ok",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }

    // A corrupted payload byte reports the crc mismatch and exits 2.
    let path = dir.path().join("share_1.cas");
    let mut bytes = std::fs::read(&path).unwrap();
    let len = bytes.len();
    bytes[len - 6] ^= 0xff;
    std::fs::write(&path, &bytes).unwrap();
    let out = cas(dir.path(), &["inspect", "share_1.cas"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("crc: MISMATCH"), "{}", stdout(&out));
}

#[test]
fn analyze_prints_stats_and_census_verdict() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 16, 16);
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--rules", "232", "--bbs", BBS, "-o", ".",
            "secret.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let out = cas(dir.path(), &["analyze", "share_0.cas"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("chi2="), "{}", stdout(&out));
    assert!(stdout(&out).contains("corr_h="));

    let out = cas(
        dir.path(),
        &["analyze", "--census", "--r", "2", "--s", "2", "--c", "2", "--k", "2"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("perfectness census"), "{text}");
    assert!(text.contains("cases: 256"), "{text}");
    assert!(text.contains("verdict:"), "{text}");

    // Qualified subsets always pin the secret.
    let out = cas(
        dir.path(),
        &[
            "analyze", "--census", "--r", "2", "--s", "2", "--c", "2", "--k", "2",
            "--observed", "2",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict: determined"), "{}", stdout(&out));

    let out = cas(
        dir.path(),
        &["analyze", "--census", "--json", "--observed", "2"],
    );
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["census"]["verdict"], "determined");
}

#[test]
fn analyze_without_work_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let out = cas(dir.path(), &["analyze"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn also_pgm_exports_share_payloads_as_images() {
    let dir = TempDir::new().unwrap();
    write_pgm(dir.path(), "secret.pgm", 8, 8);
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--rules", "86", "--bbs", BBS, "--also-pgm",
            "-o", ".", "secret.pgm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let exported = std::fs::read(dir.path().join("share_0.pgm")).unwrap();
    assert!(exported.starts_with(b"P5\n8 8\n255\n"));
}

#[test]
fn gray_flag_collapses_equal_channel_rgb() {
    let dir = TempDir::new().unwrap();
    let mut ppm = b"P6\n2 2\n255\n".to_vec();
    for v in [10u8, 20, 30, 40] {
        ppm.extend([v, v, v]);
    }
    std::fs::write(dir.path().join("gray.ppm"), &ppm).unwrap();

    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--rules", "86", "--bbs", BBS, "--gray", "-o",
            ".", "gray.ppm",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("depth 8"), "{}", stdout(&out));

    let out = cas(dir.path(), &["inspect", "share_0.cas"]);
    assert!(stdout(&out).contains("depth: 8 bits"));

    // Unequal channels refuse to collapse.
    let mut bad = b"P6\n1 1\n255\n".to_vec();
    bad.extend([1u8, 2, 3]);
    std::fs::write(dir.path().join("bad.ppm"), &bad).unwrap();
    let out = cas(
        dir.path(),
        &[
            "split", "--k", "2", "--n", "2", "--gray", "-o", ".", "bad.ppm",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unequal channels"), "{}", stderr(&out));
}

#[test]
fn malformed_image_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.pgm"), b"P5 2 2 65535 aaaa").unwrap();
    let out = cas(
        dir.path(),
        &["split", "--k", "2", "--n", "2", "bad.pgm"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("maxval"), "{}", stderr(&out));
}
