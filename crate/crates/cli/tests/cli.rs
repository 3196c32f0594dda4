// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamcolor"))
        .args(args)
        .current_dir(dir)
        .env_remove("STREAMCOLOR_SEED")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const GEN_ONE_SIDED: [&str; 11] = [
    "gen",
    "--family",
    "regular-bipartite",
    "--n",
    "100",
    "--delta",
    "8",
    "--mode",
    "vertex-one-sided",
    "--seed",
    "1",
];

fn gen_edges(dir: &Path, name: &str, family: &str, delta: &str) {
    let o = cli(
        dir,
        &[
            "gen", "--family", family, "--n", "200", "--delta", delta, "--mode", "edge", "--seed", "3", "-o", name,
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn gen_run_verify() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let o = cli(d, &[&GEN_ONE_SIDED[..], &["-o", "s.txt"]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(d.join("s.txt"))
        .unwrap()
        .starts_with("H 100 100 8 vertex-one-sided 0 1\n"));
    let o = cli(d, &["run", "--alg", "one-sided", "s.txt", "-o", "out.txt"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).starts_with(&format!("budget {}\n", 3 * 22 + 8)));
    let o = cli(d, &["verify", "s.txt", "out.txt"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("proper: true"));
    let o = cli(d, &["verify", "--budget", "3", "s.txt", "out.txt"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn gen_is_deterministic_and_checks_specs() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let a = stdout(&cli(d, &GEN_ONE_SIDED));
    let b = stdout(&cli(d, &GEN_ONE_SIDED));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let o = cli(
        d,
        &[
            "gen",
            "--family",
            "regular-bipartite",
            "--n",
            "100",
            "--delta",
            "0",
            "--mode",
            "edge",
        ],
    );
    assert_eq!(code(&o), 2);
    let o = cli(
        d,
        &[
            "gen",
            "--family",
            "regular-general",
            "--n",
            "9",
            "--delta",
            "3",
            "--mode",
            "edge",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn seed_env_overrides_flag() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let run = |env: Option<&str>, seed: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_streamcolor"));
        c.args([
            "gen",
            "--family",
            "random-bipartite",
            "--n",
            "50",
            "--delta",
            "5",
            "--mode",
            "edge",
            "--seed",
            seed,
        ]);
        c.env_remove("STREAMCOLOR_SEED").current_dir(d);
        if let Some(v) = env {
            c.env("STREAMCOLOR_SEED", v);
        }
        String::from_utf8(c.output().unwrap().stdout).unwrap()
    };
    assert_eq!(run(Some("9"), "1"), run(None, "9"));
    assert_ne!(run(None, "1"), run(None, "9"));
}

#[test]
fn edge_general_respects_its_budget() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    gen_edges(d, "e.txt", "regular-general", "64");
    let o = cli(
        d,
        &[
            "run",
            "--alg",
            "edge-general",
            "--s",
            "4",
            "--force-stream",
            "e.txt",
            "-o",
            "out.txt",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = fs::read_to_string(d.join("out.txt")).unwrap();
    let trailer = out.lines().last().unwrap();
    let used: f64 = trailer.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(used <= 60.0 * 64f64.powf(1.5) / 4.0);
    assert_eq!(code(&cli(d, &["verify", "e.txt", "out.txt"])), 0);
}

#[test]
fn run_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    gen_edges(d, "e.txt", "random-bipartite", "8");
    assert_eq!(code(&cli(d, &["run", "--alg", "one-sided", "e.txt", "-o", "o.txt"])), 3);
    fs::write(d.join("bad.txt"), "H 4 0 2 edge 0 1\ne 0 1\ne 0 2\ne 0 3\n").unwrap();
    assert_eq!(
        code(&cli(d, &["run", "--alg", "edge-sqrt", "bad.txt", "-o", "o.txt"])),
        3
    );
    assert_eq!(code(&cli(d, &["run", "--alg", "edge-sqrt", "missing.txt"])), 1);
    assert_eq!(code(&cli(d, &["run", "--alg", "nope", "e.txt"])), 2);
    assert_eq!(code(&cli(d, &["run", "--alg", "edge-general", "--s", "0", "e.txt"])), 2);
}

#[test]
fn strict_bounds_exit_four() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let mut seen = false;
    for seed in 0..20 {
        let seed = seed.to_string();
        let o = cli(
            d,
            &[
                "gen",
                "--family",
                "regular-bipartite",
                "--n",
                "1024",
                "--delta",
                "128",
                "--mode",
                "edge",
                "--seed",
                &seed,
                "-o",
                "g.txt",
            ],
        );
        assert_eq!(code(&o), 0);
        let o = cli(
            d,
            &[
                "run",
                "--alg",
                "edge-sqrt",
                "--force-stream",
                "--strict-bounds",
                "g.txt",
                "-o",
                "o.txt",
            ],
        );
        match code(&o) {
            0 => {}
            4 => {
                seen = true;
                break;
            }
            c => panic!("exit {c}: {}", stderr(&o)),
        }
    }
    assert!(seen);
}

#[test]
fn verify_reports_problems() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("s.txt"), "H 3 0 2 edge 0 1\ne 0 1\ne 1 2\n").unwrap();
    fs::write(d.join("good.txt"), "c 0 1 0\nc 1 2 1\nT 2 0\n").unwrap();
    fs::write(d.join("clash.txt"), "c 0 1 7\nc 1 2 7\n").unwrap();
    fs::write(d.join("short.txt"), "c 0 1 0\n").unwrap();
    fs::write(d.join("junk.txt"), "c 0 x 0\n").unwrap();
    assert_eq!(code(&cli(d, &["verify", "s.txt", "good.txt"])), 0);
    let o = cli(d, &["verify", "s.txt", "clash.txt"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("vertex 1 color 7"), "{}", stdout(&o));
    let o = cli(d, &["verify", "s.txt", "short.txt"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("missing"));
    assert_eq!(code(&cli(d, &["verify", "s.txt", "junk.txt"])), 5);
    fs::write(d.join("empty.txt"), "").unwrap();
    fs::write(d.join("e.txt"), "H 1 0 1 edge 0 1\n").unwrap();
    assert_eq!(code(&cli(d, &["verify", "e.txt", "empty.txt"])), 0);
}

#[test]
fn kout_rows() {
    let tmp = TempDir::new().unwrap();
    let o = cli(tmp.path(), &["kout", "--n", "1", "--c", "3", "--trials", "500"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,c,u_size,k,trials,failures,rate,ci_low,ci_high,seed"
    );
    assert!(lines.next().unwrap().starts_with("1,3,3,3,500,0,0.000000,"));
    let o = cli(
        tmp.path(),
        &["kout", "--n", "50", "--c", "2.72", "--trials", "10000", "--seed", "7"],
    );
    let row: Vec<String> = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    assert_eq!(&row[..5], ["50", "2.72", "136", "3", "10000"]);
    assert!(row[6].parse::<f64>().unwrap() <= 1e-3);
    assert_eq!(code(&cli(tmp.path(), &["kout", "--n", "1", "--c", "abc"])), 2);
}

#[test]
fn bench_table() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("grid.toml"),
        "presets = [\"one-sided\", \"edge-general\"]\nfamilies = [\"regular-bipartite\"]\nn = [64]\ndelta = [8]\ns = [1, 2]\nseeds = 2\nmaster_seed = 5\nforce_stream = true\n",
    )
    .unwrap();
    let a = cli(d, &["bench", "--config", "grid.toml", "--no-timing"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# force_stream=true master_seed=5");
    assert_eq!(
        lines[1],
        "preset,family,n,delta,s,seed,proper,colors_used,budget,peak_words,spilled_vertices,spilled_edges,millis"
    );
    assert_eq!(lines.len(), 2 + 2 + 4);
    assert!(lines[2..].iter().all(|l| l.split(',').nth(6) == Some("true")));
    assert_eq!(
        text,
        stdout(&cli(
            d,
            &["bench", "--config", "grid.toml", "--no-timing", "--jobs", "1"]
        ))
    );
    fs::write(d.join("empty.toml"), "").unwrap();
    let o = cli(d, &["bench", "--config", "empty.toml"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);
    fs::write(d.join("bad.toml"), "presets = [\"nope\"]\n").unwrap();
    assert_eq!(code(&cli(d, &["bench", "--config", "bad.toml"])), 2);
}
