//! Starts the REST service on a free port and drives a session over HTTP.

use matr::interface::{self, AppState};
use matr::metalogic::FIG1_YAML;
use serde_json::Value;

fn main() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    rt.spawn(interface::serve_on(listener, AppState::default()));

    let http = reqwest::blocking::Client::new();
    let created: Value = http
        .post(format!("{base}/session"))
        .header("content-type", "application/yaml")
        .body(FIG1_YAML)
        .send()
        .unwrap()
        .json()
        .unwrap();
    let id = created["session-id"].as_str().unwrap();
    println!("session {id}");

    loop {
        let resp = http
            .post(format!("{base}/session/{id}/step"))
            .send()
            .unwrap();
        if resp.status() == reqwest::StatusCode::CONFLICT {
            println!("complete");
            break;
        }
        let report: Value = resp.json().unwrap();
        let s = &report["stats"][0];
        println!(
            "iteration {}: {} applied, status {}",
            s["iteration"], s["applied"], report["status"]
        );
        if report["status"] != "running" && report["status"] != "complete" {
            break;
        }
    }

    let pruned: Value = http
        .get(format!(
            "{base}/session/{id}/pruned?goal=%28-%3E%20%28and%20A%20B%29%20C%29"
        ))
        .send()
        .unwrap()
        .json()
        .unwrap();
    println!(
        "pruned cost {}, {} nodes",
        pruned["cost"],
        pruned["nodes"].as_array().unwrap().len()
    );
}
