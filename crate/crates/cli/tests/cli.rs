use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    p.to_str().unwrap().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("freerig-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freerig")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn reduce_and_cyclic() {
    assert_eq!(stdout(&["reduce", "abB"]), "a\n");
    assert_eq!(stdout(&["reduce", "aA"]), "1\n");
    assert_eq!(stdout(&["cyclic", "baBAB"]), "B\nconjugator ba\n");
    assert_eq!(stdout(&["count", "ab", "A"]), "1\n");
}

#[test]
fn saved_graph_reports_index() {
    let graph = stdout(&["fold", "-r", "2", "a,baB"]);
    let path = scratch("h.graph");
    std::fs::write(&path, &graph).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["index", p]), "infinite\n");
    assert_eq!(stdout(&["member", p, "baaaB"]), "true\n");
    assert_eq!(stdout(&["member", p, "ab"]), "false\n");
    assert_eq!(stdout(&["reads", p, "abaab"]), "false\n");

    let finite = scratch("finite.graph");
    std::fs::write(&finite, stdout(&["fold", "a,bb,baB"])).unwrap();
    assert_eq!(stdout(&["index", finite.to_str().unwrap()]), "2\n");
}

#[test]
fn based_graph_file() {
    let path = scratch("based.graph");
    std::fs::write(&path, stdout(&["fold", "a,baB", "--tail", "B"])).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with("bridge B\n"), "{text}");
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&["reads", p, "Bab"]), "true\n");
    assert_eq!(stdout(&["powbound", p, "-z", "b"]), "2\n");
    assert_eq!(stdout(&["reads", p, "bbb"]), "false\n");
}

#[test]
fn converge_row() {
    let out = stdout(&["converge", "-u", "a", "-r", "b", "-L", "1", "-i", "9", "--tree", "rose:1,2"]);
    assert_eq!(
        out,
        "# seed 0\ni, d_i_num, d_i_den, lambda_i, tree_id, gap_i\n9, 1, 10, 1/40, 0, 0.100000000000\n"
    );
}

#[test]
fn converge_in_parallel_matches() {
    let args = ["converge", "-u", "ab", "-r", "b", "-L", "2", "-i", "1..30", "--tree", "rose:1,2", "--tree", "rose:3/2,1"];
    let serial = stdout(&args);
    let mut par = args.to_vec();
    par.extend(["--jobs", "3"]);
    assert_eq!(stdout(&par), serial);
    assert_eq!(serial.lines().count(), 2 + 60);

    let csv = scratch("conv.csv");
    let mut to_file = args.to_vec();
    to_file.extend(["--csv", csv.to_str().unwrap()]);
    stdout(&to_file);
    let written = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(written, serial.split_once('\n').unwrap().1);
}

#[test]
fn certificate_pipeline() {
    let cosets = fixture("fib_cosets.txt");
    let map = fixture("fibonacci.map");
    let escape = stdout(&["escape", &cosets, "--map", &map]);
    assert!(escape.contains("\nm 4\n"), "{escape}");
    assert_eq!(stdout(&["buildz", "--map", &map, "-i", "4"]), "z abaababa\nn 4\n");

    let cert = stdout(&["certify", &cosets, "--map", &map]);
    assert!(cert.contains("z abaababa\n"), "{cert}");
    let path = scratch("cert.txt");
    std::fs::write(&path, &cert).unwrap();
    let p = path.to_str().unwrap();
    let report = stdout(&["checkw", &cosets, p, "--samples", "500", "--seed", "11"]);
    assert!(report.starts_with("# seed 11\n"), "{report}");
    assert!(report.ends_with("violations 0\n"), "{report}");
    assert_eq!(stdout(&["checkw", &cosets, p, "--samples", "500", "--seed", "11"]), report);
}

#[test]
fn lowered_certificate_fails() {
    let cosets = fixture("fib_cosets.txt");
    let cert = stdout(&["certify", &cosets, "--map", &fixture("fibonacci.map")]);
    let lowered: String = cert
        .lines()
        .map(|l| if l.starts_with("M ") { "M 0".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    let path = scratch("lowered.txt");
    std::fs::write(&path, lowered).unwrap();
    let out = run(&["checkw", &cosets, path.to_str().unwrap(), "--samples", "200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: violations\n"));
}

#[test]
fn domain_errors_exit_one() {
    let full = scratch("full.txt");
    std::fs::write(&full, "1 ; a, baB\n1 ; a, b\n").unwrap();
    let out = run(&["certify", full.to_str().unwrap(), "--map", &fixture("fibonacci.map")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().next(), Some("error: finite-index"));

    let out = run(&["reduce", "-r", "2", "abc"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: unknown-letter\n"));

    let out = run(&["index", "/nonexistent/graph"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: io\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["converge", "-u", "a"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn trees_and_witnesses() {
    assert_eq!(stdout(&["length", "abAB", "--tree", "rose:1,3/2"]), "5 5.00000000000\n");
    assert_eq!(stdout(&["length", "ab", "--tree", &fixture("rose_1_2.tree")]), "3 3.00000000000\n");
    assert_eq!(stdout(&["spectra", "--tree", "rose:1,1", "--tree", "rose:1,2"]), "differ b 1 2\n");
    assert!(stdout(&["spectra", "--tree", "rose:1,2", "--tree", &fixture("rose_1_2.tree")]).starts_with("agree "));
    assert_eq!(
        stdout(&["witness", "-u", "a", "-r", "b", "-i", "1..2"]),
        "connectors 1 1 b 1\n1 abAbabAB\n2 aabAAbaabAAB\n"
    );
    assert_eq!(
        stdout(&["distinguish", "-r", "a", "--tree", "rose:1,1", "--tree", "rose:1,2"]),
        "# seed 0\nu b\ni 1\nwitness baBabaBA\nlengths 8 12\n"
    );
}

#[test]
fn maps() {
    let fib = fixture("fibonacci.map");
    assert_eq!(stdout(&["iterate", "a", "--map", &fib, "-i", "1..3"]), "1 ab\n2 aba\n3 abaab\n");
    assert_eq!(stdout(&["iterate", "e2", "--map", &fib, "-i", "2"]), "2 ab\n");
    let rebased = stdout(&["rebase", "ab", "--map", &fib]);
    assert_eq!(rebased, "rank 2\nvertices 1\nbase 0\nedge a 0 0\n");
    let tri = fixture("tribonacci.map");
    assert_eq!(stdout(&["iterate", "a", "--map", &tri, "-i", "3"]), "3 abacaba\n");
}
