use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermat-tower"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("FERMAT_TOWER_OUT")
        .output()
        .expect("binary runs")
}

fn report(out: &Path, command: &str) -> String {
    std::fs::read_to_string(out.join(format!("{command}.txt"))).expect("report written")
}

#[test]
fn schedule_lists_first_two_primes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["schedule", "--count", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "schedule");
    assert!(r.starts_with("command: schedule\nconfig: schedule --count 2"));
    assert!(r.contains("p_0: 5 genus=6\n"));
    assert!(r.contains("p_1: 2309 genus=2662278 threshold=2304 above=true\n"));
    assert!(r.ends_with("result: pass\n"));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), r);
}

#[test]
fn census_reports_eight_exact_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["census", "--primes", "5", "--level", "0", "--bound", "500"],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "census");
    assert_eq!(r.matches("relation=exact").count(), 8);
    assert_eq!(r.lines().filter(|l| l.starts_with("found: ")).count(), 8);
    assert!(r.contains("catalog recovered: true"));
    assert!(r.contains("psi sum equals z_0: true"));
}

#[test]
fn identity_synthesis_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["synthesize", "--primes", "5", "--samples", "200"],
    );
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "synthesize");
    assert!(r.contains("additive_failures=0 multiplicative_failures=0 injectivity_failures=0"));
    assert_eq!(r.matches("result: ").count(), 1);
    assert!(r.ends_with("result: pass\n"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let runs = [
        &["schedule", "--count", "2"][..],
        &["census", "--primes", "5", "--bound", "160"],
        &[
            "scramble",
            "--primes",
            "5,7",
            "--spec",
            "swap=1 relabel=3",
            "--seed",
            "5",
            "--dump",
            "6",
        ],
        &[
            "synthesize",
            "--primes",
            "5",
            "--spec",
            "relabel=4",
            "--seed",
            "2",
            "--samples",
            "100",
            "--verify-seed",
            "9",
        ],
        &[
            "basis",
            "--primes",
            "5",
            "--op",
            "annihilator",
            "--target",
            "y0",
            "--gens",
            "x0",
        ],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (oa, ob) = (run(a.path(), args), run(b.path(), args));
        assert_eq!(oa.status.code(), Some(0), "{args:?}");
        assert_eq!(oa.stdout, ob.stdout, "{args:?}");
        let command = args[0];
        assert_eq!(
            report(a.path(), command),
            report(b.path(), command),
            "{args:?}"
        );
    }
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], i32, &str); 6] = [
        (&["frobnicate"], 2, ""),
        (&["census", "--primes", "4"], 2, "usage"),
        (&["basis", "--op", "member", "--target", "x0 +"], 2, "usage"),
        (
            &["synthesize", "--primes", "5", "--max-codes", "3"],
            3,
            "budget-exhausted",
        ),
        (
            &["schedule", "--count", "3", "--max-bits", "8"],
            3,
            "budget-exhausted",
        ),
        (
            &[
                "basis",
                "--primes",
                "5,7",
                "--op",
                "member",
                "--target",
                "y1",
                "--max-generators",
                "1",
            ],
            3,
            "budget-exhausted",
        ),
    ];
    for (args, code, reason) in cases {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let stderr = String::from_utf8(o.stderr).unwrap();
        if reason.is_empty() {
            assert!(stderr.contains("Usage:"), "{stderr}");
        } else {
            assert!(stderr.contains(&format!("error ({reason})")), "{stderr}");
            assert!(report(dir.path(), args[0]).contains(&format!("reason: {reason}\n")));
        }
    }
}

#[test]
fn basis_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "basis", "--primes", "5,7", "--op", "member", "--target", "z1",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(report(dir.path(), "basis").contains("member: true\n"));
    let o = run(
        dir.path(),
        &["basis", "--op", "member", "--target", "x0 + 1"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(report(dir.path(), "basis").contains("member: false\n"));
    let o = run(
        dir.path(),
        &[
            "basis",
            "--op",
            "annihilator",
            "--target",
            "y0",
            "--gens",
            "x0",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(report(dir.path(), "basis").contains("witness: T^5 - 1 + x0^5\n"));
    let o = run(dir.path(), &["basis", "--op", "interdep", "--level", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "basis");
    assert!(r.contains("z over x: degree=5 "));
    assert!(r.contains("x over z: degree=12 "));
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fermat-tower"))
        .args(["schedule", "--count", "1"])
        .env("FERMAT_TOWER_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(report(dir.path(), "schedule").contains("p_0: 5"));
}
