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

use serde_json::Value;

fn acyclic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acyclic"))
        .args(args)
        .env_remove("ACYCLIC_PHASE_BUDGET")
        .env_remove("ACYCLIC_RETRY_BUDGET")
        .env_remove("ACYCLIC_NODE_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn petersen_colors_with_five() {
    let out = acyclic(&["color", "--gen", "petersen", "--seed", "7"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["K"], 5);
    assert_eq!(v["outcome"], "success");
    assert_eq!(v["verdict"]["verdict"], "acyclic");
    assert_eq!(v["coloring"].as_array().unwrap().len(), 15);
}

#[test]
fn two_colors_cannot_color_a_hexagon() {
    let out = acyclic(&["color", "--gen", "cycle:6", "--colors", "2", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_input_error() {
    assert_eq!(acyclic(&["color", "missing.txt"]).status.code(), Some(1));
    assert_eq!(
        acyclic(&["color", "--gen", "wheel:5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        acyclic(&[
            "color",
            "--gen",
            "petersen",
            "--colors",
            "3",
            "--epsilon",
            "0.5"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        acyclic(&["stats", "--gen", "petersen", "--trials", "10"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_is_deterministic() {
    let args = ["color", "--gen", "regular:10,3,2", "--seed", "99", "--log"];
    let a = acyclic(&args);
    let b = acyclic(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn emitted_coloring_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    fs::write(&graph, "# a 3x3 grid with labels\n10 11\n11 12\n20 21\n21 22\n30 31\n31 32\n10 20\n20 30\n11 21\n21 31\n12 22\n22 32\n").unwrap();
    let coloring = dir.path().join("c.txt");
    let out = acyclic(&[
        "color",
        path(&graph),
        "--seed",
        "5",
        "--coloring-out",
        path(&coloring),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = acyclic(&["verify", path(&coloring), path(&graph)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"]["verdict"], "acyclic");
}

#[test]
fn alternating_hexagon_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let coloring = dir.path().join("c.txt");
    // Canonical edges of cycle:6 are 01 05 12 23 34 45.
    fs::write(&coloring, "2 6\n1\n2\n2\n1\n2\n1\n").unwrap();
    let out = acyclic(&["verify", path(&coloring), "--gen", "cycle:6"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdict"]["verdict"], "bichromatic");

    fs::write(&coloring, "3 6\n1\n2\n1\n3\n2\n3\n").unwrap();
    let out = acyclic(&["verify", path(&coloring), "--gen", "cycle:6"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdict"]["verdict"], "improper");

    fs::write(&coloring, "3 5\n1\n2\n3\n1\n2\n").unwrap();
    let out = acyclic(&["verify", path(&coloring), "--gen", "cycle:6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_reports_exact_values() {
    let out = acyclic(&["oracle", "--gen", "complete:4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["chi_a"], 5);
    let out = acyclic(&["oracle", "--gen", "complete:4", "--k-max", "4"]);
    assert_eq!(json(&out)["lower_bound"], 5);
    let out = acyclic(&["oracle", "--gen", "petersen", "--node-budget", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_report_tail() {
    let out = acyclic(&[
        "stats", "--gen", "petersen", "--trials", "500", "--seed", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["K"], 5);
    assert_eq!(v["trials"], 500);
    assert_eq!(v["dominated"], true);
    let out = acyclic(&[
        "stats", "--gen", "grid:1x6", "--trials", "100", "--seed", "4", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "n,count,survival,bound\n0,100,1,\n");
}

#[test]
fn asymptotics_table() {
    let out = acyclic(&["asymptotics", "--q", "0.5", "--delta", "3", "--colors", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0]["rho"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((rows[1]["q"].as_f64().unwrap() - 0.4).abs() < 1e-15);
    let out = acyclic(&["asymptotics", "--q", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn forests_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.json");
    let out = acyclic(&[
        "forests",
        "dump",
        "--gen",
        "petersen",
        "--colors",
        "2",
        "--seed",
        "3",
        "--phase-budget",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    fs::write(&file, &out.stdout).unwrap();
    let out = acyclic(&[
        "forests",
        "validate",
        path(&file),
        "--gen",
        "petersen",
        "--colors",
        "2",
        "--trials",
        "1000",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)["feasibility"]["verdict"], "feasible");

    // Two roots on the same edge are never feasible.
    fs::write(
        &file,
        r#"{"trees":[{"edge":0,"cycle":0,"anchor":0},{"edge":0,"cycle":0,"anchor":0}]}"#,
    )
    .unwrap();
    let out = acyclic(&["forests", "validate", path(&file), "--gen", "cycle:6"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["feasibility"]["verdict"], "roots_share_edge");
}
