use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uainf::algebra::{fixture_a1, fixture_a2, fixture_m2};
use uainf::io;

fn uainf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uainf")).args(args).output().expect("spawn uainf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Files {
    dir: tempfile::TempDir,
}

impl Files {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for (name, p) in [("a1", fixture_a1()), ("a2", fixture_a2()), ("m2", fixture_m2())] {
            std::fs::write(dir.path().join(format!("{name}.json")), io::write_algebra(&p)).unwrap();
        }
        Files { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        std::fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }
}

#[test]
fn check_operad_exit_codes() {
    let f = Files::new();
    let report = f.arg("report.tsv");
    let ok = uainf(&["check-operad", "--max-arity", "4", "--report", &report]);
    assert_eq!(code(&ok), 0);
    let tsv = std::fs::read_to_string(&report).unwrap();
    assert!(tsv.lines().skip(1).all(|l| l.ends_with("\tok\t0")), "{tsv}");
    assert_eq!(code(&uainf(&["check-operad", "--max-arity", "0"])), 2);
    let faulty = uainf(&["check-operad", "--max-arity", "4", "--inject-sign-fault"]);
    assert_eq!(code(&faulty), 1);
    assert!(stdout(&faulty).lines().any(|l| l.starts_with("d_squared") && l.contains("\tdefect\t")));
    let unwritable = uainf(&["check-operad", "--max-arity", "2", "--report", "/nonexistent/dir/r.tsv"]);
    assert_eq!(code(&unwritable), 2);
}

#[test]
fn transfer_round_trip() {
    let f = Files::new();
    let out = f.arg("v.json");
    let o = uainf(&["transfer", "--algebra", &f.arg("a2.json"), "--max-arity", "4", "--normalize-unit", "true", "--out", &out]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("corked_operations_vanish\ttrue"), "{text}");
    assert!(text.contains("homology_dim\t1"), "{text}");
    assert_eq!(code(&uainf(&["verify-structure", "--structure", &out])), 0);
    assert_eq!(code(&uainf(&["verify-morphism", "--morphism", &f.arg("v.morphism.json")])), 0);
    assert_eq!(code(&uainf(&["verify-structure", "--structure", &out, "--max-arity", "9"])), 2);

    let custom = f.arg("j.json");
    let o = uainf(&["transfer", "--algebra", &f.arg("a1.json"), "--max-arity", "5", "--out", &out, "--morphism-out", &custom]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(&custom).exists());
    let v = io::parse_structure(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v, uainf::structures::UAInfStructure::from_unital_dga(&fixture_a1(), 5).unwrap());
}

#[test]
fn corrupted_structure_file_is_a_defect() {
    let f = Files::new();
    let out = f.arg("v.json");
    assert_eq!(code(&uainf(&["transfer", "--algebra", &f.arg("a1.json"), "--max-arity", "3", "--out", &out])), 0);
    let mut file = io::structure_file(&io::parse_structure(&std::fs::read_to_string(&out).unwrap()).unwrap());
    let op = file.operations.iter_mut().find(|o| o.n == 2 && o.corks.is_empty()).unwrap();
    let entry = op.entries.iter_mut().find(|e| e.inputs == ["1", "x"]).unwrap();
    entry.terms = vec![("x".into(), "2".into())];
    let bad = f.write("bad.json", &io::write_structure(&io::structure_from_file(&file).unwrap()));
    let o = uainf(&["verify-structure", "--structure", &bad]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("defect"));
}

#[test]
fn input_errors_exit_two() {
    let f = Files::new();
    let out = f.arg("v.json");
    let non_assoc = f.write(
        "bad.json",
        r#"{"basis":[{"name":"1","degree":0},{"name":"x","degree":0},{"name":"y","degree":0}],"unit":"1",
        "product":[{"left":"x","right":"x","terms":[["y","1"]]},{"left":"x","right":"y","terms":[["x","1"]]}]}"#,
    );
    let o = uainf(&["transfer", "--algebra", &non_assoc, "--max-arity", "4", "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("associative"));
    assert!(!Path::new(&out).exists());
    let garbage = f.write("garbage.json", "{\"basis\": [");
    assert_eq!(code(&uainf(&["verify-structure", "--structure", &garbage])), 2);
    assert_eq!(code(&uainf(&["verify-morphism", "--morphism", &garbage])), 2);
    assert_eq!(code(&uainf(&["rectify", "--algebra", &f.arg("missing.json"), "--max-weight", "2"])), 2);
    assert_eq!(code(&uainf(&["transfer", "--algebra", &f.arg("a1.json")])), 2);
    assert_eq!(code(&uainf(&["--threads", "0", "check-operad", "--max-arity", "2"])), 2);
}

#[test]
fn cohomology_commands() {
    let f = Files::new();
    let o = uainf(&["cohomology", "--algebra", &f.arg("a1.json"), "--max-degree", "3", "--method", "compare"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "degree\taq\thochschild_shifted\tstatus\n1\t1\t1\tok\n2\t1\t1\tok\n3\t1\t1\tok\n");
    let k = f.write("k.json", r#"{"basis":[{"name":"1","degree":0}],"unit":"1"}"#);
    let o = uainf(&["cohomology", "--algebra", &k, "--max-degree", "3", "--method", "hochschild"]);
    assert_eq!(stdout(&o), "degree\tdim\n0\t1\n1\t0\n2\t0\n3\t0\n");
    let o = uainf(&["cohomology", "--algebra", &f.arg("m2.json"), "--max-degree", "2", "--method", "aq"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("1\t0\n2\t0\n"), "{}", stdout(&o));
    assert_eq!(code(&uainf(&["cohomology", "--algebra", &f.arg("a1.json"), "--max-degree", "0", "--method", "compare"])), 2);
    let o = uainf(&["cohomology", "--algebra", &f.arg("a2.json"), "--max-degree", "2", "--method", "aq"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree 0"));

    let a1 = fixture_a1();
    let bimodule = f.write("m.json", &io::write_bimodule(&uainf::algebra::Bimodule::regular(&a1), &a1));
    let o = uainf(&["cohomology", "--algebra", &f.arg("a1.json"), "--bimodule", &bimodule, "--max-degree", "2", "--method", "compare"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn rectify_and_selftests() {
    let f = Files::new();
    let o = uainf(&["rectify", "--algebra", &f.arg("a2.json"), "--max-weight", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for cmd in ["selftest-structures", "selftest-morphisms"] {
        let o = uainf(&[cmd, "--seed", "5", "--count", "2"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with("\ttrue")), "{}", stdout(&o));
    }
}
