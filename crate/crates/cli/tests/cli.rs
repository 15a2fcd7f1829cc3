use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn model(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.cait"));
    p.to_string_lossy().into_owned()
}

fn cait(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cait")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("cait-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn check_accepts_bundled_models() {
    for name in ["thermostat", "smart_home_gps", "split_writes"] {
        let o = cait(&["check", &model(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("ok\n"));
    }
}

#[test]
fn check_reports_ill_formed_networks() {
    let f = scratch("shared.cait", "location h\ndelta 0\nactuator a domain {0, 1}\nnetwork\nn[a = 0 |> nil] stat @ h | m[a = 1 |> nil] stat @ h\n");
    let o = cait(&["check", "--json", &f]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["problems"].as_array().unwrap().len(), 1);
}

#[test]
fn parse_errors_and_bad_usage_exit_with_two() {
    let f = scratch("broken.cait", "location h\ndelta 1\nnetwork\nn[|> q!1] stat @ h\n");
    let o = cait(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4:6"));
    assert_eq!(cait(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cait(&["check", "/nonexistent/model.cait"]).status.code(), Some(2));
}

#[test]
fn budget_overrun_exits_with_two() {
    let o = cait(&["lts", "--budget", "3", &model("thermostat")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn bisim_verdicts_set_the_exit_code() {
    let o = cait(&["bisim", &model("split_writes"), &model("sequential_writes")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("distinct\n"));
    assert!(text.contains("distinguishing play: "));

    let o = cait(&["bisim", "--json", &model("lights_proximity"), &model("lights_gps")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"], "bisimilar");
    assert_eq!(v["stats"]["blocks"], 17);
}

#[test]
fn expand_compares_within_one_universe() {
    assert_eq!(cait(&["expand", &model("split_writes"), &model("sequential_writes")]).status.code(), Some(1));
    assert_eq!(cait(&["expand", &model("split_writes"), &model("split_writes")]).status.code(), Some(0));
    assert_eq!(cait(&["expand", &model("split_writes"), &model("thermostat")]).status.code(), Some(2));
}

#[test]
fn lts_graph_export_has_a_header_and_tab_separated_rows() {
    let o = cait(&["lts", "--export", "graph", &model("split_writes")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(' ').collect();
    assert_eq!(header[0], "states");
    assert_eq!(header[2], "init");
    let states: usize = header[1].parse().unwrap();
    for row in lines {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 3, "{row}");
        assert!(cols[0].parse::<usize>().unwrap() < states);
        assert!(cols[2].parse::<usize>().unwrap() < states);
    }
    let dot = stdout(&cait(&["lts", "--mode", "intensional", "--export", "dot", &model("split_writes")]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn reduce_trace_lines() {
    let o = cait(&["reduce", "--steps", "4", "--trace", &model("split_writes")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let traced: Vec<&str> = text.lines().filter(|l| l.contains(" :: ")).collect();
    assert_eq!(traced.len(), 4);
    for l in traced {
        let (label, hash) = l.split_once(" :: ").unwrap();
        assert!(["tau", "sigma", "act(a)"].contains(&label), "{l}");
        assert_eq!(hash.len(), 16);
        assert!(u64::from_str_radix(hash, 16).is_ok());
    }
}

#[test]
fn interactive_reduce_reads_choices() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cait"))
        .args(["reduce", "--interactive", "--trace", &model("thermostat")])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"7\n0\nq\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("therm@"), "sensor updates are offered");
    assert!(text.contains("pick a number"));
    assert!(text.contains("after 1 steps"));
}

#[test]
fn props_and_laws_pass() {
    let o = cait(&["props", &model("thermostat")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = cait(&["props", "--json", "--bound", &model("split_writes")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rd_bound"], 3);
    assert!(v["reports"].as_array().unwrap().is_empty());
    let o = cait(&["laws"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("ok")).count(), 7);
}

#[test]
fn smart_home_subcommand() {
    let o = cait(&["smart-home", "--variant", "gps", "--check", "props"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = cait(&["smart-home", "--check", "equiv", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lights"]["result"], "bisimilar");
    assert!(v["full"].is_null());
    // a threshold outside the temperature domain is a configuration error
    assert_eq!(cait(&["smart-home", "--theta", "21"]).status.code(), Some(2));
}
