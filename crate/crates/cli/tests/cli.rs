use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dncfr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dncfr")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn enumerate_reports_one_card_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dncfr(&["enumerate", "ocp3"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("states          58"), "{text}");
    assert!(text.contains("infosets        12"), "{text}");

    fs::write(dir.path().join("game.txt"), "variant=one_card\ndeck_size=3\n").unwrap();
    let listed = dncfr(&["enumerate", "game.txt", "--infosets"], dir.path());
    assert!(listed.status.success(), "{}", String::from_utf8_lossy(&listed.stderr));
    assert!(stdout(&listed).contains("infoset-actions 24"));
}

#[test]
fn run_compare_and_clone() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfr.txt"), "game=ocp3\nmethod=cfr\niterations=64\noutput=cfr\n").unwrap();
    fs::write(dir.path().join("rs.txt"), "game=ocp3\nmethod=rs-mccfr+\nk=1\niterations=64\n").unwrap();
    assert!(dncfr(&["run", "cfr.txt"], dir.path()).status.success());
    let rs = dncfr(&["run", "rs.txt", "-o", "rs"], dir.path());
    assert!(rs.status.success(), "{}", String::from_utf8_lossy(&rs.stderr));
    let header = fs::read_to_string(dir.path().join("rs/trace.csv")).unwrap();
    assert!(header.starts_with("iteration,touched_nodes,exploitability,wall_ms,rsn_loss,asn_loss\n"));

    let cmp = dncfr(&["compare", "cfr/trace.csv", "rs/trace.csv", "--expect", "cfr<=rs"], dir.path());
    assert!(cmp.status.success());
    assert!(stdout(&cmp).contains("cfr"));
    let strict = dncfr(&["compare", "cfr/trace.csv", "rs/trace.csv", "--expect", "rs<=0.001*cfr", "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(3));

    let clone = dncfr(&["clone", "rs/checkpoint.tab", "-o", "net", "--embed", "4"], dir.path());
    assert!(clone.status.success(), "{}", String::from_utf8_lossy(&clone.stderr));
    assert!(stdout(&clone).contains("network exploitability"));
    assert!(dir.path().join("net/rsn.net").exists());
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "game=ocp3\nmethod=cfr\niterations=4\nk=3\n").unwrap();
    let cases: [&[&str]; 4] = [
        &["run", "bad.txt", "-o", "x"],
        &["run", "missing.txt", "-o", "x"],
        &["enumerate", "poker9"],
        &["clone", "nothing.tab"],
    ];
    for args in cases {
        let out = dncfr(args, dir.path());
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
    fs::write(dir.path().join("no_output.txt"), "game=ocp3\nmethod=cfr\niterations=4\n").unwrap();
    assert!(!dncfr(&["run", "no_output.txt"], dir.path()).status.success());
}
