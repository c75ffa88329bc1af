use std::process::{Command, Output};

fn ring_cdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ring-cdc"))
        .args(args)
        .output()
        .expect("spawn ring-cdc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ncl_of(o: &Output) -> String {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    assert_eq!(v["schema"], "1");
    v["ncl"].as_str().unwrap().to_string()
}

#[test]
fn run_reports_exact_loads() {
    for (args, expect) in [
        (["--problem", "allgather", "--n", "8", "--r", "2", "--d", "3"], "1"),
        (["--problem", "alltoall", "--n", "8", "--r", "3", "--d", "1"], "11/2"),
        (["--problem", "allgather", "--n", "8", "--r", "8", "--d", "1"], "0"),
    ] {
        let mut full = vec!["run"];
        full.extend(args);
        full.push("--check-oracle");
        let o = ring_cdc(&full);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(ncl_of(&o), expect);
    }
}

#[test]
fn scheme_and_placement_variants() {
    let o = ring_cdc(&["run", "--problem", "allgather", "--n", "9", "--r", "1", "--d", "1", "--scheme", "fragouli"]);
    assert_eq!(ncl_of(&o), "4");
    let o = ring_cdc(&["run", "--problem", "alltoall", "--n", "8", "--r", "3", "--d", "1", "--scheme", "uncoded"]);
    assert_eq!(ncl_of(&o), "11");
    let o = ring_cdc(&["alltoall", "--n", "8", "--r", "4", "--d", "1", "--placement", "appendix-c", "--check-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(ncl_of(&o), "2");
    let o = ring_cdc(&["allgather", "--n", "12", "--r", "3", "--d", "2", "--verify-payloads"]);
    assert_eq!(ncl_of(&o), "3");
    let o = ring_cdc(&["baseline", "--scheme", "fragouli", "--n", "8"]);
    assert_eq!(ncl_of(&o), "4");
    let o = ring_cdc(&["baseline", "--scheme", "uncoded", "--problem", "allgather", "--n", "8", "--r", "2", "--d", "3"]);
    assert_eq!(ncl_of(&o), "2");
}

#[test]
fn bad_parameters_exit_with_usage_code() {
    for args in [
        vec!["run", "--problem", "allgather", "--n", "8", "--r", "2", "--d", "5"],
        vec!["run", "--problem", "allgather", "--n", "8", "--r", "9", "--d", "1"],
        vec!["run", "--problem", "alltoall", "--n", "8", "--r", "2", "--d", "1", "--placement", "appendix-c"],
        vec!["run", "--problem", "alltoall", "--n", "8", "--r", "2", "--d", "1", "--scheme", "fragouli"],
        vec!["run", "--problem", "nothing", "--n", "8", "--r", "2", "--d", "1"],
        vec!["sweep", "--problem", "allgather", "--n", "x"],
        vec!["bounds", "--problem", "allgather", "--n", "8", "--r", "0", "--d", "1"],
    ] {
        assert_eq!(ring_cdc(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn ledger_is_written_as_csv() {
    let dir = std::env::temp_dir().join(format!("ring-cdc-ledger-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ledger.csv");
    let o = ring_cdc(&["allgather", "--n", "8", "--r", "2", "--d", "3", "--emit-ledger", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tick,round,step,sender,labels,size_units"));
    assert_eq!(lines.next(), Some("1,1,1,1,V1+V2,1"));
    assert_eq!(text.lines().count(), 9);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn goldens_replay_cleanly() {
    let o = ring_cdc(&["goldens"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    assert!(out.lines().all(|l| l.ends_with(": identical")));
}

#[test]
fn sweeps_are_deterministic_and_empty_ranges_give_a_header() {
    let header = "problem,n,r,d,placement,scheme,ncl_exact,ncl_float,lb_exact,lb_float,uncoded_exact,ticks,complete\n";
    assert_eq!(stdout(&ring_cdc(&["sweep", "--problem", "allgather", "--n", ""])), header);
    let args = ["sweep", "--problem", "alltoall", "--n", "8..12", "--d", "1,2", "--r-min", "2"];
    let a = stdout(&ring_cdc(&args));
    assert_eq!(a, stdout(&ring_cdc(&args)));
    assert!(a.starts_with(header));
    assert!(a.contains("\nalltoall,8,3,1,cyclic,coded,11/2,5.500000,4,4.000000,11,"));
    let c = stdout(&ring_cdc(&["sweep", "--problem", "alltoall", "--n", "8", "--placement", "appendix-c"]));
    assert_eq!(c.lines().count(), 6);
}

#[test]
fn bounds_print_exact_and_decimal_values() {
    let out = stdout(&ring_cdc(&["bounds", "--problem", "alltoall", "--n", "8", "--r", "3", "--d", "1"]));
    let line = |name: &str| out.lines().find(|l| l.starts_with(name)).unwrap().split_whitespace().skip(1).collect::<Vec<_>>();
    assert_eq!(line("achievable_exact"), ["11/2", "5.500000"]);
    assert_eq!(line("lb_cyclic"), ["4", "4.000000"]);
    assert_eq!(line("appendix_c"), ["n/a"]);
    let out = stdout(&ring_cdc(&["bounds", "--problem", "allgather", "--n", "50", "--r", "10", "--d", "2"]));
    assert!(out.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["achievable", "10", "10.000000"]));
    let out = stdout(&ring_cdc(&["bounds", "--problem", "allgather", "--n", "8", "--r", "3/2", "--d", "3"]));
    assert!(out.lines().any(|l| l.starts_with("memory_sharing") && !l.contains("n/a")));
}
