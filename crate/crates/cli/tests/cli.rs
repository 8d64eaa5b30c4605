//! End-to-end runs of the command surface through `run`, including the exit
//! code contract and output determinism.

use std::fs;
use std::path::PathBuf;

use opetope_cli::{builtin_fixture, run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};
use opetopes::document;

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(tempfile::tempdir().unwrap())
    }

    fn fixture(&self, name: &str) -> String {
        let doc = builtin_fixture(name).unwrap();
        self.write(&format!("{name}.ost"), &document::serialize(&doc))
    }

    fn write(&self, name: &str, text: &str) -> String {
        let path: PathBuf = self.0.path().join(name);
        fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }
}

#[test]
fn validate_tri2_passes_with_exit_zero() {
    let dir = Dir::new();
    let path = dir.fixture("tri2");
    let (code, out) = run(&["validate", &path]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("all pass"));
}

#[test]
fn validate_broken_document_exits_one() {
    let dir = Dir::new();
    let doc = builtin_fixture("tri2").unwrap();
    let mut text = document::serialize(&doc);
    // Drop one diamond from the JSON.
    let start = text.find("\"diamonds\"").unwrap();
    let open = text[start..].find('{').unwrap() + start;
    let close = text[open..].find('}').unwrap() + open;
    text.replace_range(open..=close + 1, "");
    let path = dir.write("broken.ost", &text);
    let (code, out) = run(&["validate", &path]);
    assert_eq!(code, EXIT_INVALID, "{out}");
    assert!(out.contains("INVALID"));
}

#[test]
fn garbage_input_exits_two() {
    let dir = Dir::new();
    let path = dir.write("junk.ost", "not json");
    let (code, _) = run(&["validate", &path]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _) = run(&["no-such-command"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn classify_tri2_lists_the_three_families() {
    let dir = Dir::new();
    let path = dir.fixture("tri2");
    let (code, out) = run(&["classify", &path]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "p0: Glob2\np1: Inner\np2: Glob1\n");
}

#[test]
fn enumerate_degree_three_two_nodes_counts_nine() {
    let (code, out) = run(&[
        "enumerate",
        "--degree",
        "3",
        "--nodes",
        "2",
        "--max-arity",
        "2",
        "--count",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "9");
}

#[test]
fn encode_decode_round_trip_through_files() {
    let dir = Dir::new();
    let path = dir.fixture("loop");
    let (code, out) = run(&["encode", &path]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "{deg(o)}");

    let (code, decoded) = run(&["decode", "{deg(o)}"]);
    assert_eq!(code, EXIT_OK);
    let path2 = dir.write("decoded.ost", &decoded);
    let (code, out) = run(&["iso", &path, &path2]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn hom_counts_arrows() {
    let dir = Dir::new();
    let path = dir.fixture("tri2");
    let (code, out) = run(&["hom", &path, "p1", "c"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("1 arrow(s)"), "{out}");
}

#[test]
fn boundary_horn_fill_pipeline() {
    let dir = Dir::new();
    let path = dir.fixture("tri2");
    let (code, bd) = run(&["boundary", &path]);
    assert_eq!(code, EXIT_OK);
    let bd_path = dir.write("bd.ost", &bd);
    let (code, horn) = run(&["horn", &bd_path]);
    assert_eq!(code, EXIT_OK);
    let horn_path = dir.write("horn.ost", &horn);
    let (code, out) = run(&["validate", &horn_path]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, filled) = run(&["fill", &bd_path]);
    assert_eq!(code, EXIT_OK);
    let filled_path = dir.write("filled.ost", &filled);
    let (code, out) = run(&["iso", &path, &filled_path]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn shift_target_and_graft_compose() {
    let dir = Dir::new();
    let tri2 = dir.fixture("tri2");
    let tri1 = dir.fixture("tri1");
    let (code, pd) = run(&["shift", &tri2]);
    assert_eq!(code, EXIT_OK);
    let pd_path = dir.write("pd.ost", &pd);

    let (code, tgt) = run(&["target", &pd_path]);
    assert_eq!(code, EXIT_OK);
    let tgt_path = dir.write("tgt.ost", &tgt);
    let arr = dir.fixture("arr");
    let (code, _) = run(&["iso", &tgt_path, &arr]);
    assert_eq!(code, EXIT_OK);

    let (code, part) = run(&["shift", &tri1]);
    assert_eq!(code, EXIT_OK);
    let part_path = dir.write("part.ost", &part);
    let (code, grafted) = run(&["graft", &pd_path, &format!("a1={part_path}")]);
    assert_eq!(code, EXIT_OK, "{grafted}");
    let grafted_path = dir.write("grafted.ost", &grafted);
    let (code, out) = run(&["validate", &grafted_path]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn subst_accepts_trivial_assignment_set() {
    let dir = Dir::new();
    let tri2 = dir.fixture("tri2");
    let (_, pd) = run(&["shift", &tri2]);
    let pd_path = dir.write("pd.ost", &pd);
    let (code, out) = run(&["subst", &pd_path]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn oracle_enumerate_small_profile() {
    let (code, out) = run(&["oracle-enumerate", "--profile", "2,2,1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "{nd({nd(o)()})(lf)}");
}

#[test]
fn counts_table_is_consistent() {
    let (code, out) = run(&["counts", "--max-degree", "2", "--max-cells", "16"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("degree"));
    assert!(!out.contains(" NO"), "{out}");
}

#[test]
fn render_outputs_ascii_and_dot() {
    let dir = Dir::new();
    let tri2 = dir.fixture("tri2");
    let (_, pd) = run(&["shift", &tri2]);
    let pd_path = dir.write("pd.ost", &pd);
    let (code, text) = run(&["render", &pd_path]);
    assert_eq!(code, EXIT_OK);
    assert!(text.starts_with("nd "));
    let (code, dot) = run(&["render", "--dot", &pd_path]);
    assert_eq!(code, EXIT_OK);
    assert!(dot.starts_with("digraph"));
    let (code, dot) = run(&["render", &tri2, "--cell", "c"]);
    assert_eq!(code, EXIT_OK);
    assert!(dot.starts_with("digraph"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = Dir::new();
    let path = dir.fixture("op3");
    for args in [
        vec!["validate", path.as_str()],
        vec!["encode", path.as_str()],
        vec!["classify", path.as_str()],
        vec!["enumerate", "--degree", "2", "--max-nodes", "3"],
    ] {
        let (c1, o1) = run(&args);
        let (c2, o2) = run(&args);
        assert_eq!(c1, c2);
        assert_eq!(o1, o2, "nondeterministic output for {args:?}");
    }
}

#[test]
fn json_format_is_stable_and_parseable() {
    let dir = Dir::new();
    let path = dir.fixture("tri2");
    let (code, out) = run(&["--format", "json", "validate", &path]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ok"], serde_json::json!(true));
    let (_, out) = run(&["--format", "json", "hom", &path, "p0", "c"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["count"], serde_json::json!(1));
}

#[test]
fn fuel_override_env_is_honored() {
    let dir = Dir::new();
    let path = dir.fixture("op3");
    std::env::set_var("OPETOPE_FUEL_OVERRIDE", "0");
    let (code, _) = run(&["validate", &path]);
    std::env::remove_var("OPETOPE_FUEL_OVERRIDE");
    // With zero fuel the three-step rewrites cannot run, so validation
    // reports a failure instead of passing.
    assert_eq!(code, EXIT_INVALID);
    let (code, _) = run(&["validate", &path]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn morphism_documents_validate() {
    let dir = Dir::new();
    let tri2 = dir.fixture("tri2");
    let (_, renamed) = run(&["decode", "{nd({nd(o)()})(nd({nd(o)()})(lf))}"]);
    let renamed_path = dir.write("renamed.ost", &renamed);
    let (code, morphism) = run(&["--format", "json", "iso", &tri2, &renamed_path]);
    assert_eq!(code, EXIT_OK);
    let m_path = dir.write("m.ost", &morphism);
    let (code, out) = run(&["validate", &m_path]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn slice_outputs_the_arrow_at_an_edge() {
    let dir = Dir::new();
    let tri2 = dir.fixture("tri2");
    let (code, sliced) = run(&["slice", &tri2, "a1"]);
    assert_eq!(code, EXIT_OK);
    let sliced_path = dir.write("sliced.ost", &sliced);
    let arr = dir.fixture("arr");
    let (code, out) = run(&["iso", &sliced_path, &arr]);
    assert_eq!(code, EXIT_OK, "{out}");
}
