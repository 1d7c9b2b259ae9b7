use std::process::{Command, Output};

fn khwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khwall"))
        .args(args)
        .env_remove("KH_TABLE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn jones_of_unknot() {
    let o = khwall(&["jones", "PD[]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "q^-1 + q\n");
}

#[test]
fn trefoil_homology_rows() {
    let o = khwall(&["homology", "3_1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "i  j  group\n0  1  Z\n0  3  Z\n2  5  Z\n3  7  Z/2\n3  9  Z\n"
    );
}

#[test]
fn trefoil_homology_records_z2() {
    let o = khwall(&["homology", "3_1", "--z2", "--format", "records"]);
    let text = stdout(&o);
    assert!(text.starts_with("i: 0\nj: 1\ngroup: Z/2\n\n"), "{text}");
    assert_eq!(text.matches("group:").count(), 6);
}

#[test]
fn cone_reports_chi_check() {
    let o = khwall(&["cone", "3_1", "--double", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("chi_check: pass"), "{text}");
    assert!(text.contains("euler: -q^2 + q^6"), "{text}");
}

#[test]
fn split_and_wall_verdicts() {
    let s = khwall(&["split", "4_1", "--crossing", "3", "--format", "records"]);
    assert_eq!(s.status.code(), Some(0));
    assert!(stdout(&s).contains("upper_triangular: pass"));
    let w = khwall(&["wall", "5_2", "--crossing", "4", "--format", "records"]);
    assert_eq!(w.status.code(), Some(0));
    assert!(stdout(&w).contains("chain_map: pass"));
}

#[test]
fn audit_flags_discrepancies_without_failing() {
    let o = khwall(&["audit", "--max-crossings", "2", "--codim", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("strata: 6"), "{text}");
    assert!(text.contains("discrepancy: "), "{text}");
}

#[test]
fn invariance_with_custom_table() {
    let dir = std::env::temp_dir().join(format!("khwall-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.tsv");
    std::fs::write(
        &good,
        "3_1\tPD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]\n3_1\tPD[X(6,3,1,4), X(4,1,5,2), X(2,5,3,6)]\n",
    )
    .unwrap();
    let o = khwall(&["invariance", "--table", good.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let bad = dir.join("bad.tsv");
    std::fs::write(
        &bad,
        "4_1\tPD[X(8,5,1,6), X(4,1,5,2), X(2,8,3,7), X(6,4,7,3)]\n4_1\tPD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]\n",
    )
    .unwrap();
    let o = khwall(&["invariance", "--table", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fail"));
    let env = Command::new(env!("CARGO_BIN_EXE_khwall"))
        .args(["jones", "3_1"])
        .env("KH_TABLE", &bad)
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2), "KH_TABLE without 3_1 must not resolve it");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn expand_coefficients() {
    let o = khwall(&["expand", "3_1", "--order", "2"]);
    assert_eq!(stdout(&o), "k  coefficient\n0  2\n1  0\n2  -23\n");
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(khwall(&["homology", "PD[X(1,2)]"]).status.code(), Some(2));
    assert_eq!(khwall(&["homology", "no_such_knot"]).status.code(), Some(2));
    assert_eq!(khwall(&["cone", "3_1"]).status.code(), Some(2));
    assert_eq!(
        khwall(&["homology", "7_1", "--max-states", "64"]).status.code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&khwall(&["audit", "--max-crossings", "2", "--format", "records"]));
    let b = stdout(&khwall(&["audit", "--max-crossings", "2", "--format", "records"]));
    assert_eq!(a, b);
}
