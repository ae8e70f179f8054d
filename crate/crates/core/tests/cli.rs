use std::path::Path;
use std::process::{Command, Output};

fn firmdyn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_firmdyn"))
        .args(args)
        .current_dir(dir)
        .env_remove("FIRMDYN_STEP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const REFERENCE: &str = "a = 100\nA = 20\nB = 0.08\nm = 2\nc = -4\nq0 = 1000\n";

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.cfg"),
        "a=100\nA=20\nB=0.08\nm=2\nq0=900\nt_span=[0,100]\n",
    )
    .unwrap();
    let o = firmdyn(&["simulate", "s.cfg", "-o", "out.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,q,p,C,Pi,Q,series"));
    assert!(lines.next().unwrap().starts_with("0,900,"));
    assert_eq!(
        text.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 10001
    );
    assert!(text.ends_with("# event,100,horizon\n"));
}

#[test]
fn piecewise_run_reports_the_switch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "mode = piecewise\na=100\nA=20\nB=0.08\nm=2\nq0=0\nt_span=[0,50]\n\
               regime = 0, 200, 90, -0.5\nregime = 200, inf, 20, 0.08\n";
    std::fs::write(dir.path().join("p.cfg"), cfg).unwrap();
    let o = firmdyn(&["simulate", "p.cfg"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let event = text.lines().find(|l| l.starts_with("# event")).unwrap();
    assert_eq!(event, "# event,9.59158109119,regime_switch");
    assert!(text.lines().any(|l| l.starts_with("9.59158109119,200,")));
}

#[test]
fn step_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.cfg"),
        "a=100\nA=20\nB=0.08\nm=2\nq0=900\nt_span=[0,10]\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_firmdyn"))
        .args(["simulate", "s.cfg"])
        .current_dir(dir.path())
        .env("FIRMDYN_STEP", "0.5")
        .output()
        .unwrap();
    let rows = stdout(&o).lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 21);
}

#[test]
fn bankruptcy_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("r.cfg"), REFERENCE).unwrap();
    let o = firmdyn(&["bankruptcy", "r.cfg"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regime_class,declining"));
    assert!(text.contains("survival_time,39.940575099"));
    assert!(text.lines().any(|l| l.starts_with("dT/dA,-")));

    let o = firmdyn(&["sweep", "r.cfg", "--vary", "a=90,100,110"], dir.path());
    assert!(o.status.success());
    let times: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(times.len(), 3);
    assert!(times[0] < times[1] && times[1] < times[2]);
}

#[test]
fn portfolio_keeps_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = "firm_id,a,b,A,B,h0,m,c,G,q0\n\
                 s1,100,0,20,0.08,0,2,0,0,900\n\
                 bad,0,0,20,0.08,0,2,0,0,900\n\
                 d1,100,0,20,0.08,0,2,-4,0,1000\n";
    std::fs::write(dir.path().join("firms.csv"), input).unwrap();
    let o = firmdyn(&["portfolio", "firms.csv"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "s1,1000,stable_equilibrium,,");
    assert_eq!(lines[2], "bad,,error: a > 0 violated,,");
    assert!(lines[3].starts_with("d1,1000,declining,39.94"));
}

#[test]
fn boat_mirrors_the_firm() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("f.cfg"),
        "a=100\nA=20\nB=0.08\nm=2\nq0=900\n",
    )
    .unwrap();
    let boat = firmdyn(
        &["boat", "--config", "f.cfg", "--t1", "10", "--step", "1"],
        dir.path(),
    );
    let firm = firmdyn(&["simulate", "f.cfg"], dir.path());
    assert!(boat.status.success() && firm.status.success());
    let firm_text = stdout(&firm);
    for line in stdout(&boat).lines().skip(1) {
        let (t, v) = line.split_once(',').unwrap();
        let q = firm_text
            .lines()
            .find(|l| l.split(',').next() == Some(t))
            .and_then(|l| l.split(',').nth(1))
            .unwrap();
        assert_eq!(v, q, "t = {t}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        firmdyn(&["figure", "fig9"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(
        firmdyn(&["simulate", "missing.cfg"], dir.path())
            .status
            .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("bad.cfg"), "a=100\nA=20\nB=0.08\nm=-1\n").unwrap();
    let o = firmdyn(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m >= 0 violated"));
}

#[test]
fn presets_match_the_caption_table() {
    let expected: Vec<String> = include_str!("data/figure_captions.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    let produced: Vec<String> = firmdyn::cli_reports::PRESET_NAMES
        .iter()
        .flat_map(|n| {
            firmdyn::cli_reports::figure_preset(n)
                .unwrap()
                .caption_lines()
        })
        .collect();
    assert_eq!(produced, expected);
}
