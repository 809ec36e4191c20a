//! Hosts codelets out of process and runs fig1 with conditional proof
//! delegated to that server through the `external` codelet.

use matr::engine::Engine;
use matr::interface::{self, AppState};
use matr::metalogic::FIG1_YAML;

fn main() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt
        .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
        .unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(interface::serve_on(listener, AppState::default()));

    let yaml = FIG1_YAML.replace(
        "  - name: conditional-proof\n",
        &format!("  - name: external\n    params: {{url: \"http://{addr}\", codelet: conditional-proof}}\n"),
    );
    let mut engine = Engine::from_yaml(&yaml).unwrap();
    let report = engine.run();
    println!("{:?} after {} iterations", report.status, report.iterations);
    for d in &report.diagnostics {
        println!("[{}] {}: {}", d.iteration, d.codelet, d.message);
    }
}
