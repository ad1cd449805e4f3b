//! Every request expressible through both the CLI and the HTTP service
//! must yield the same numbers.

use std::process::Command;
use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use eqdose_core::{Engine, TissueLibrary};
use eqdose_service::{cors_layer, router};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TOLERANCE: f64 = 1e-9;

fn cli(args: &[&str]) -> (i32, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_eqdose"))
        .arg("--json")
        .args(args)
        .env_remove("EQDOSE_TISSUES")
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        serde_json::from_slice(&o.stdout).unwrap(),
    )
}

async fn service(path: &str, body: Value) -> (u16, Value) {
    let app = router(
        Arc::new(Engine::new(TissueLibrary::seed())),
        cors_layer(&[]).unwrap(),
    );
    let req = Request::post(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

/// Structural equality with numbers compared to [`TOLERANCE`].
fn assert_close(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!(
                (x - y).abs() <= TOLERANCE * x.abs().max(1.0),
                "{path}: {x} vs {y}"
            );
        }
        (Value::Object(x), Value::Object(y)) => {
            let mut kx: Vec<_> = x.keys().collect();
            let mut ky: Vec<_> = y.keys().collect();
            kx.sort();
            ky.sort();
            assert_eq!(kx, ky, "{path}");
            for (k, v) in x {
                assert_close(v, &y[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{path}");
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                assert_close(u, v, &format!("{path}[{i}]"));
            }
        }
        _ => assert_eq!(a, b, "{path}"),
    }
}

struct Case {
    command: &'static str,
    endpoint: &'static str,
    tissue: &'static str,
    syntax: &'static str,
    courses: Value,
    extra_args: &'static [&'static str],
    config: Value,
}

fn cases() -> Vec<Case> {
    let c = |command, endpoint, tissue, syntax, courses: Value| Case {
        command,
        endpoint,
        tissue,
        syntax,
        courses,
        extra_args: &[],
        config: json!({}),
    };
    let mut out = Vec::new();
    for (command, endpoint) in [
        ("bed", "/bed"),
        ("equiv", "/equivalent"),
        ("ntcp", "/ntcp"),
        ("risk", "/risk"),
    ] {
        out.push(c(
            command,
            endpoint,
            "spinal cord",
            "10x3",
            json!([{"n": 10, "d": 3}]),
        ));
        out.push(c(
            command,
            endpoint,
            "lung",
            "1x8 gap30 1x8",
            json!([{"n": 1, "d": 8, "gap_after": 30}, {"n": 1, "d": 8}]),
        ));
        out.push(c(
            command,
            endpoint,
            "rectum",
            "25x1.8 15x2",
            json!([{"n": 25, "d": 1.8}, {"n": 15, "d": 2}]),
        ));
        out.push(c(
            command,
            endpoint,
            "skin",
            "28x1.8+ja5",
            json!([{"n": 28, "d": 1.8, "ja": 5}]),
        ));
    }
    for (command, endpoint) in [("bed", "/bed"), ("equiv", "/equivalent")] {
        out.push(c(
            command,
            endpoint,
            "oropharynx",
            "22x1.8@2/day",
            json!([{"n": 22, "d": 1.8, "m_per_day": 2, "delta_t": 6}]),
        ));
        out.push(c(
            command,
            endpoint,
            "prostate",
            "39x2",
            json!([{"n": 39, "d": 2}]),
        ));
        out.push(c(
            command,
            endpoint,
            "glioblastoma",
            "4x4.5gap14 4x4",
            json!([{"n": 4, "d": 4.5, "gap_after": 14}, {"n": 4, "d": 4}]),
        ));
        out.push(c(
            command,
            endpoint,
            "spinal cord",
            "20x2+ja21",
            json!([{"n": 20, "d": 2, "ja": 21}]),
        ));
        out.push(c(
            command,
            endpoint,
            "spinal cord",
            "0x2",
            json!([{"n": 0, "d": 2}]),
        ));
    }
    out.push(Case {
        extra_args: &["--d-ref", "1.8", "--reference-week", "4"],
        config: json!({"d_ref": 1.8, "reference_week": 4}),
        ..c(
            "equiv",
            "/equivalent",
            "breast",
            "20x2.5+ja5",
            json!([{"n": 20, "d": 2.5, "ja": 5}]),
        )
    });
    out.push(Case {
        extra_args: &["--max-bracket", "2"],
        config: json!({"max_bracket": 2}),
        ..c(
            "equiv",
            "/equivalent",
            "spinal cord",
            "10x3",
            json!([{"n": 10, "d": 3}]),
        )
    });
    out
}

#[tokio::test]
async fn cli_and_service_agree() {
    for case in cases() {
        let mut args = vec![
            case.command,
            "--tissue",
            case.tissue,
            "--course",
            case.syntax,
        ];
        args.extend_from_slice(case.extra_args);
        let (exit, from_cli) = cli(&args);
        let (status, from_service) = service(
            case.endpoint,
            json!({"tissue": case.tissue, "courses": case.courses, "config": case.config}),
        )
        .await;
        let label = format!("{} {}", case.command, case.syntax);
        let expected_status = match exit {
            0 => 200,
            2 => 400,
            3 => 422,
            other => panic!("{label}: exit {other}"),
        };
        assert_eq!(status, expected_status, "{label}");
        assert_close(&from_cli, &from_service, &label);
    }
}

#[tokio::test]
async fn dvh_parity() {
    let doc = "dose\tvolume %\n0\t100\n12.5\t80\n24\t7\n30.2\t0\n";
    let path = std::env::temp_dir().join(format!("eqdose-parity-{}.tsv", std::process::id()));
    std::fs::write(&path, doc).unwrap();
    let (exit, from_cli) = cli(&[
        "dvh-summarize",
        path.to_str().unwrap(),
        "--fractions",
        "15",
        "--structure",
        "parotid",
        "--echo",
    ]);
    std::fs::remove_file(&path).unwrap();
    let (status, from_service) = service(
        "/dvh/summarize",
        json!({"document": doc, "structure": "parotid", "n_fractions": 15, "echo": true}),
    )
    .await;
    assert_eq!((exit, status), (0, 200));
    assert_close(&from_cli, &from_service, "dvh");
}
