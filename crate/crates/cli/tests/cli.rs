use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    run_env(args, stdin, &[])
}

fn run_env(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cliq2"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("binary starts");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(out: &'a str, key: &str) -> Option<&'a str> {
    out.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn lemma1_at_m6() {
    let o = run(&["check", "lemma1", "--m", "6", "--k", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("enumerated=200 formula=200 PASS"), "{out}");
    assert_eq!(field(&out, "brute_force"), Some("200"));
}

#[test]
fn lemma9_join_pos_is_clean() {
    let args = [
        "check", "lemma9", "--m", "5", "--k", "3", "--ell", "3", "--p", "4", "--L", "162",
        "--seed", "7", "--trials", "50",
    ];
    let o = run(&args, None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "join_pos_trials"), Some("50"));
    assert_eq!(field(&out, "join_pos_violations"), Some("0"));
}

#[test]
fn appendix_b_at_2_pow_48() {
    let o = run(&["bounds", "appendixB", "--log2m", "48"], None);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let verdicts: Vec<&str> = out
        .lines()
        .filter(|l| l.contains("lhs_log2_bounds"))
        .filter_map(|l| {
            l.rsplit(' ')
                .next()
                .filter(|w| *w == "PASS" || *w == "FAIL")
        })
        .collect();
    assert_eq!(
        verdicts,
        ["PASS", "FAIL", "FAIL", "FAIL", "PASS", "FAIL", "FAIL"]
    );
    assert_eq!(
        field(&out, "L"),
        Some("lhs_log2_bounds [1037.4026,1037.4027] rhs_log2_bounds [798.7200,798.7200] FAIL")
    );
    assert_eq!(field(&out, "failing"), Some("p_minus_1_pow_ell,L,L_squared,ratio_pow_ell_over_L_squared,quarter_two_pow_p_over_L_squared"));
}

#[test]
fn strict_schedule_rejects_small_m() {
    let o = run(
        &["bounds", "schedule", "--log2m", "24", "--mode", "strict"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strict chain"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["bogus"], None).status.code(), Some(2));
    assert_eq!(
        run(&["check", "lemma1", "--m", "many"], None).status.code(),
        Some(2)
    );
}

#[test]
fn cap_override_exits_2() {
    let o = run_env(
        &["enum", "neg2", "--m", "5", "--k", "3"],
        None,
        &[("CLIQ2_CAP", "10")],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn json_carries_the_text_fields() {
    let o = run(&["--json", "check", "lemma1", "--m", "6", "--k", "3"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"], "lemma1");
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["fields"]["enumerated"], 200);
    assert!(v["sections"].is_object());
}

#[test]
fn output_independent_of_workers() {
    let base = [
        "check", "lemma11", "--m", "5", "--k", "3", "--ell", "3", "--p", "4", "--seed", "9",
        "--trials", "60",
    ];
    let outs: Vec<Vec<u8>> = ["1", "3", "8"]
        .iter()
        .map(|w| {
            let mut args = base.to_vec();
            args.extend(["--workers", w]);
            run(&args, None).stdout
        })
        .collect();
    assert!(!outs[0].is_empty());
    assert!(outs.iter().all(|o| *o == outs[0]));
}

#[test]
fn enum_pos2_counts() {
    let out = stdout(&run(&["enum", "pos2", "--m", "5", "--k", "3"], None));
    assert_eq!(field(&out, "count"), Some("30"));
}

#[test]
fn pluck_from_stdin() {
    let fam = "+[(1,2)] -[]\n+[(1,3)] -[]\n+[(1,4)] -[]\n+[(1,5)] -[]\n";
    let o = run(
        &[
            "pluck", "-", "--m", "5", "--k", "3", "--ell", "2", "--p", "3", "--L", "2",
        ],
        Some(fam),
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "steps"), Some("1"));
    assert_eq!(field(&out, "result_size"), Some("2"));
    let result: Vec<&str> = out
        .lines()
        .skip_while(|l| *l != "[result]")
        .skip(1)
        .collect();
    assert_eq!(result, ["+[] -[]", "+[(1,5)] -[]"]);
}

#[test]
fn base_keeps_incomparable_members() {
    let fam = "+[(1,2)] -[]\n+[(1,2)(2,3)] -[(4,5)]\n+[(1,3)] -[]\n";
    let out = stdout(&run(&["base", "-"], Some(fam)));
    assert_eq!(field(&out, "input_size"), Some("3"));
    assert_eq!(field(&out, "base_size"), Some("2"));
    assert!(!out.contains("(2,3)"));
}

#[test]
fn eval_three_valued() {
    let o = run(
        &["eval", "-", "--m", "3", "--assign", "1=1,3=0"],
        Some("((v1 & v2) | ~v3)"),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "value"), Some("1"));
    let o = run(
        &["eval", "-", "--m", "3", "--assign", "1=1"],
        Some("(v1 & v2)"),
    );
    assert_eq!(field(&stdout(&o), "value"), Some("?"));
}

#[test]
fn equiv_pass_and_counterexample() {
    let dir = std::env::temp_dir().join(format!("cliq2-equiv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let (a, b, c) = (
        write("a", "(v1 | v2)"),
        write("b", "(v2 | v1)"),
        write("c", "(v1 & v2)"),
    );
    assert_eq!(
        run(&["equiv", &a, &b, "--m", "3"], None).status.code(),
        Some(0)
    );
    let o = run(&["equiv", &a, &c, "--m", "3"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(field(&stdout(&o), "counterexample").is_some());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn demorgan_pushes_negations_to_inputs() {
    let circuit = "g1 = VAR x1\ng2 = VAR x2\ng3 = NOT g1\ng4 = AND g3 g2\nroot g4\n";
    let o = run(&["demorgan", "-"], Some(circuit));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "truth_tables_agree"), Some("true"));
    assert!(out.contains("NVAR x1") && !out.contains("NOT"));
}

#[test]
fn rail_chain_at_m4() {
    let o = run(
        &["rail", "--m", "4", "--k", "3", "--ell", "2", "--p", "3"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "psi_approx_cliq2"), Some("true"));
    assert_eq!(field(&out, "rail_agrees"), Some("true"));
}

#[test]
fn approx_formula_lists_members() {
    let o = run(
        &[
            "approx", "formula", "-", "--m", "5", "--k", "3", "--ell", "2", "--p", "3",
        ],
        Some("(v1 | v2)"),
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "cs"), Some("3"));
    let result: Vec<&str> = out
        .lines()
        .skip_while(|l| *l != "[result]")
        .skip(1)
        .collect();
    assert_eq!(result, ["+[(1,2)] -[]", "+[(1,3)] -[]"]);
}

#[test]
fn experiment_is_reproducible() {
    let args = [
        "experiment",
        "theorem13",
        "--m",
        "5",
        "--k",
        "3",
        "--ell",
        "3",
        "--p",
        "4",
        "--L",
        "162",
    ];
    let (a, b) = (run(&args, None), run(&args, None));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(field(&stdout(&a), "case"), Some("2"));
}
