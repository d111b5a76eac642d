use std::fs;

use dncfr::cfr::exploitability;
use dncfr::experiment::{compare, load_checkpoint, load_trace, run, RunManifest, TraceRow};

fn manifest(text: &str) -> RunManifest {
    text.parse().unwrap()
}

#[test]
fn identical_manifests_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let texts = [
        "game=ocp3\nmethod=rs-mccfr+\nk=1\nbatch=3\niterations=64\nseed=4\nwall_time=false\n",
        "game=ocp3\nmethod=double-neural\nbatch=4\niterations=4\nembed=4\nrsn.epochs=10\nasn.epochs=10\nseed=2\nwall_time=false\n",
        "game=ocp3\nmethod=double-neural\nbatch=4\niterations=3\nembed=4\nrsn.epochs=5\nasn.epochs=5\nscalar=f32\nwall_time=false\n",
    ];
    for (i, text) in texts.iter().enumerate() {
        let m = manifest(text);
        let a = dir.path().join(format!("{i}a"));
        let b = dir.path().join(format!("{i}b"));
        run(&m, &a).unwrap();
        run(&m, &b).unwrap();
        let trace = fs::read(a.join("trace.csv")).unwrap();
        assert_eq!(trace, fs::read(b.join("trace.csv")).unwrap(), "{text}");
        let text = String::from_utf8(trace).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iteration,touched_nodes,exploitability,wall_ms,rsn_loss,asn_loss");
    }
}

#[test]
fn checkpoint_reproduces_the_final_exploitability() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest("game=nllh3\nmethod=es-mccfr\niterations=20\nseed=1\n");
    let outcome = run(&m, dir.path()).unwrap();
    let (tree, ckpt) = load_checkpoint(&dir.path().join("checkpoint.tab")).unwrap();
    assert_eq!(ckpt.iteration, 20);
    let expl = exploitability(&tree, &ckpt.sums.average_strategy());
    assert_eq!(Some(expl), outcome.final_exploitability());
    let reloaded = load_trace(&dir.path().join("trace.csv")).unwrap().rows;
    let without_coverage: Vec<_> = outcome.rows.iter().map(|r| TraceRow { coverage: None, ..*r }).collect();
    assert_eq!(reloaded, without_coverage);
    assert!(dir.path().join("coverage.csv").exists());
    let manifest_again: RunManifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap().parse().unwrap();
    assert_eq!(manifest_again, m);
}

#[test]
fn clone_then_neural_records_the_clone_point() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(
        "game=ocp3\nmethod=clone-then-neural\nwarmup=4\niterations=4\nbatch=4\nembed=4\n\
         rsn.epochs=10\nasn.epochs=10\nclone.rsn.epochs=50\nclone.asn.epochs=50\nschedule=every:1\n",
    );
    let outcome = run(&m, dir.path()).unwrap();
    let iterations: Vec<u64> = outcome.rows.iter().map(|r| r.iteration).collect();
    assert_eq!(iterations, (1..=8).collect::<Vec<_>>());
    assert!(outcome.rows[..3].iter().all(|r| r.rsn_loss.is_none()));
    assert!(outcome.rows[3..].iter().all(|r| r.rsn_loss.is_some() && r.asn_loss.is_some()));
    assert!(dir.path().join("rsn.net").exists() && dir.path().join("asn.net").exists());
}

#[test]
fn compare_aligns_real_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (label, text) in [
        ("cfr", "game=ocp3\nmethod=cfr\niterations=128\n"),
        ("os", "game=ocp3\nmethod=os-mccfr\niterations=128\nseed=3\n"),
    ] {
        run(&manifest(text), &dir.path().join(label)).unwrap();
    }
    let traces: Vec<_> =
        ["cfr", "os"].iter().map(|l| load_trace(&dir.path().join(l).join("trace.csv")).unwrap()).collect();
    assert_eq!(traces[0].label, "cfr");
    assert!(traces[0].game.is_some());
    let c = compare(&traces, &["cfr<=os".parse().unwrap()]).unwrap();
    assert_eq!(c.labels, vec!["cfr", "os"]);
    let check = c.checks[0].by_iteration.unwrap();
    assert_eq!(check.at, 128);
    assert!(check.holds, "{check:?}");
    assert!(c.checks[0].by_budget.is_some());

    run(&manifest("game=ocp5\nmethod=cfr\niterations=2\n"), &dir.path().join("other")).unwrap();
    let other = load_trace(&dir.path().join("other").join("trace.csv")).unwrap();
    assert!(compare(&[traces[0].clone(), other], &[]).is_err());
}
