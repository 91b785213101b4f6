use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const GADGET: &str = "if i < a1_size then\n  j <- a1[i];\n  x <- a2[j]\nend\n";
const SPACE: &str = "i in {1, 4}\na1_size = 4\na1 = [0, 7, 1, 2]\na2 : size 8 in {0}\na3 : size 1 in {42, 43}\n";
const LABELS: &str = "i: public\na1_size: public\nj: public\nx: public\na1: public\na2: public\n";

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [("g.aw", GADGET), ("g.space", SPACE), ("g.labels", LABELS)] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Files { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn slh() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slh"));
    cmd.env_remove("SLH_MAX_DIRS").env_remove("SLH_FUEL");
    cmd
}

fn run_with_stdin(mut cmd: Command, input: &str) -> Output {
    let mut child = cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn repro_exit_codes() {
    let o = slh().args(["repro", "--listing", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("directives: force load a3 0 step"), "{}", stdout(&o));
    for listing in 2..=6 {
        let o = slh().args(["repro", "--listing", &listing.to_string()]).output().unwrap();
        let expect = if listing == 2 { 0 } else { 1 };
        assert_eq!(o.status.code(), Some(expect), "listing {listing}: {}", stdout(&o));
    }
    let o = slh().args(["repro", "--listing", "9"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn syntax_errors_and_empty_input_exit_2() {
    let mut cmd = slh();
    cmd.args(["parse", "-"]);
    let o = run_with_stdin(cmd, "");
    assert_eq!(o.status.code(), Some(2));
    let mut cmd = slh();
    cmd.args(["parse", "-"]);
    let o = run_with_stdin(cmd, "if");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1, column 3"));
}

#[test]
fn sequential_run_text_and_json() {
    let f = Files::new();
    std::fs::write(f.path("s1"), "i = 1\na1_size = 4\na1 = [0, 7, 1, 2]\na2 = [0, 0, 0, 0, 0, 0, 0, 0]\n").unwrap();
    let o = slh().args(["run", "--sem", "seq", "--state"]).arg(f.path("s1")).arg(f.path("g.aw")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("  branch true\n  read a1 1\n  read a2 7\n"), "{}", stdout(&o));

    let o = slh()
        .args(["--format", "json", "run", "--sem", "seq", "--state"])
        .arg(f.path("s1"))
        .arg(f.path("g.aw"))
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcome"], "terminated");
    assert_eq!(v["trace"], serde_json::json!(["branch true", "read a1 1", "read a2 7"]));
    assert_eq!(v["state"]["scalars"]["j"], 7);
}

#[test]
fn relsec_json_witness() {
    let f = Files::new();
    let o = slh()
        .args(["--format", "json", "check", "--property", "relsec", "--labels"])
        .arg(f.path("g.labels"))
        .arg("--space")
        .arg(f.path("g.space"))
        .arg(f.path("g.aw"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["diverges_at"], 3);
    assert_eq!(v["trace1"][2], "read a2 42");
    assert_eq!(v["trace2"][2], "read a2 43");
}

#[test]
fn hardened_gadget_holds() {
    let f = Files::new();
    for variant in ["fislh", "fvslh", "uslh", "fsfvslh"] {
        let o = slh()
            .args(["check", "--property", "relsec", "--variant", variant, "--labels"])
            .arg(f.path("g.labels"))
            .arg("--space")
            .arg(f.path("g.space"))
            .arg(f.path("g.aw"))
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{variant}: {}", stdout(&o));
    }
}

#[test]
fn environment_overrides_bounds() {
    let f = Files::new();
    let check = |env: &str| {
        slh()
            .env("SLH_MAX_DIRS", env)
            .args(["check", "--property", "relsec", "--labels"])
            .arg(f.path("g.labels"))
            .arg("--space")
            .arg(f.path("g.space"))
            .arg(f.path("g.aw"))
            .output()
            .unwrap()
    };
    let o = check("2");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max-dirs 2"), "{}", stdout(&o));
    assert_eq!(check("abc").status.code(), Some(2));
}

#[test]
fn harden_prints_masked_program() {
    let f = Files::new();
    let o = slh().args(["harden", "--variant", "islh"]).arg(f.path("g.aw")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("j <- a1[(b = 1 ? 0 : i)]"), "{text}");
    assert!(text.contains("b := (i < a1_size ? 1 : b)"), "{text}");
}

#[test]
fn help_exits_zero() {
    let o = slh().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("repro"));
}
