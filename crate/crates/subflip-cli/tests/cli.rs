//! End-to-end checks of the command-line surface: deterministic output,
//! thin-shim parity with the library, and the documented exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subflip"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("subflip-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

#[test]
fn gen_co_matching_matches_library() {
    let out = run(&["gen", "co-matching", "3"]);
    assert!(out.status.success());
    let expect = subflip::io::render_graph(&subflip::graph::gen::co_matching(3).unwrap());
    assert_eq!(stdout(&out), expect);

    // Identical invocations are byte-identical.
    let again = run(&["gen", "co-matching", "3"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn param_on_p4() {
    let g = subflip::graph::gen::path(4).unwrap();
    let path = write_temp("p4.txt", &subflip::io::render_graph(&g));
    let out = run(&["param", "--graph", path.to_str().unwrap(), "--kind", "co-matching"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2");
}

#[test]
fn sparsify_then_recover_round_trips() {
    let g = subflip::graph::gen::clique(3).unwrap().with_all_loops();
    let graph_path = write_temp("k3.txt", &subflip::io::render_graph(&g));
    let out = run(&["sparsify", "--graph", graph_path.to_str().unwrap(), "--k", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let witness_path = write_temp("k3.witness", &stdout(&out));
    let back = run(&["recover", "--witness", witness_path.to_str().unwrap()]);
    assert!(back.status.success());
    assert_eq!(stdout(&back), subflip::io::render_graph(&g));
}

#[test]
fn rank_and_boundf() {
    let g = subflip::graph::gen::path(4).unwrap();
    let path = write_temp("rank-p4.txt", &subflip::io::render_graph(&g));
    let out = run(&[
        "rank",
        "--graph",
        path.to_str().unwrap(),
        "--r",
        "inf",
        "--k",
        "2",
        "--mode",
        "subflip",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2");

    let out = run(&["boundf", "2", "1", "2", "1"]);
    assert_eq!(stdout(&out).trim(), "8");
}

#[test]
fn transfer_prints_partition_and_bound() {
    let g = subflip::Graph::build(4, &[(0, 2)], &Default::default()).unwrap();
    let graph_path = write_temp("single-edge.txt", &subflip::io::render_graph(&g));
    let p = subflip::Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let part_path = write_temp("sides.txt", &subflip::io::render_partition(&p));
    let out = run(&[
        "transfer",
        "--graph",
        graph_path.to_str().unwrap(),
        "--partition",
        part_path.to_str().unwrap(),
        "--t",
        "2",
        "--verify",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# size 2 within bound 8"), "{text}");
    assert!(text.contains("# guarantee holds"), "{text}");
}

#[test]
fn formula_classify_and_collapse() {
    let out = run(&["formula", "existsS Y (Y(x) | E(x,y))", "--collapse"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("collapsed top | E(x,y)"), "{text}");

    let out = run(&["formula", "dist<=2(x,y)", "--classify"]);
    let text = stdout(&out);
    assert!(text.contains("ep true"), "{text}");
    assert!(text.contains("qrank 1"), "{text}");
}

#[test]
fn transduce_identity() {
    let g = subflip::Graph::build(3, &[(0, 1)], &std::collections::BTreeSet::from([2])).unwrap();
    let witness = write_temp("ident.witness", &subflip::io::render_graph(&g));
    let t = write_temp("ident.t", "colors:\nnu: top\neta: E(x,y)\n");
    let out = run(&[
        "transduce",
        "--transduction",
        t.to_str().unwrap(),
        "--witness",
        witness.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# domain 0 1 2"));
    assert!(text.ends_with(&subflip::io::render_graph(&g)), "{text}");
}

#[test]
fn exit_codes() {
    // Usage error: unknown subcommand -> clap exits 2.
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // Domain error: malformed input file -> 1.
    let path = write_temp("bad.txt", "not a graph\n");
    let out = run(&["param", "--graph", path.to_str().unwrap(), "--kind", "co-matching"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["gen", "co-matching", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nep_family_check() {
    let g = subflip::graph::gen::co_matching(3).unwrap();
    let path = write_temp("cm3.txt", &subflip::io::render_graph(&g));
    let out = run(&[
        "nep",
        "--graph",
        path.to_str().unwrap(),
        "--formula",
        "E(x1,y2)",
        "--x-vars",
        "x1 x2",
        "--y-vars",
        "y1 y2",
        "--tuples",
        "0 3;1 4;2 5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "true");
}
