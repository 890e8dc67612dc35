use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use matsel_core::{
    compare_metrics, ClassificationResult, CompareOptions, ComparisonReport, DesignRequirement,
    MaterialClass, MetricKind, SelectionMode,
};
use matsel_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core", "data", "fixtures", name]
        .iter()
        .collect()
}

fn state(db: &str) -> Arc<AppState> {
    let config = ServiceConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        db: fixture(db),
        schema: None,
        rules: None,
        mode: SelectionMode::Oriented,
    };
    Arc::new(AppState::load(&config).unwrap())
}

async fn call(state: Arc<AppState>, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => builder
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => builder.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

fn reference_req() -> Value {
    json!([
        {"property": "Tensile Strength", "value": 20},
        {"property": "Yield Strength", "value": 23.9},
        {"property": "Impact Strength", "value": 4},
        {"property": "Hardness", "value": 56.67},
        {"property": "Tensile Modulus", "value": 2000}
    ])
}

#[tokio::test]
async fn healthz_and_schema() {
    let (status, body) = call(state("six.csv"), "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["materials"], 6);

    let (status, body) = call(state("six.csv"), "GET", "/api/schema", None).await;
    assert_eq!(status, StatusCode::OK);
    let props = body.as_array().unwrap();
    assert_eq!(props.len(), 23);
    assert_eq!(props[0]["name"], "Tensile Strength");
    let density = props.iter().find(|p| p["name"] == "Density").unwrap();
    assert_eq!(density["kind"], "interval");
    let machin = props.iter().find(|p| p["name"] == "Machinability").unwrap();
    assert_eq!(machin["labels"].as_array().unwrap().len(), 5);

    let (_, body) = call(state("six.csv"), "GET", "/api/metrics", None).await;
    assert_eq!(body.as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn classify_reference_requirement() {
    let body = json!({ "requirement": reference_req() }).to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/classify", Some(&body)).await;
    assert_eq!(status, StatusCode::OK);
    let result: ClassificationResult = serde_json::from_value(value).unwrap();
    assert_eq!(result.class, MaterialClass::Polymer);
    assert_eq!(result.index_pattern, vec![1, 2, 5, 6]);
}

#[tokio::test]
async fn compare_returns_full_report() {
    let body = json!({ "requirement": reference_req() }).to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/compare", Some(&body)).await;
    assert_eq!(status, StatusCode::OK, "{value}");
    let report: ComparisonReport = serde_json::from_value(value).unwrap();
    assert_eq!(report.candidates, 2);
    assert_eq!(report.reports.len(), 6);
    assert!(report.reports.iter().all(|r| r.winner_id == "X"));

    let body = json!({
        "requirement": reference_req(),
        "metrics": ["geomavg", "corrcoef"],
        "mode": "paper-min",
        "top_k": 1
    })
    .to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/compare", Some(&body)).await;
    assert_eq!(status, StatusCode::OK);
    let report: ComparisonReport = serde_json::from_value(value).unwrap();
    assert_eq!(report.reports[0].winner_id, "G");
    assert_eq!(report.reports[0].ranking.len(), 1);
}

#[tokio::test]
async fn interval_and_ordinal_values_as_strings() {
    let body = json!({ "requirement": [
        {"property": "Tensile Strength", "value": 30},
        {"property": "Density", "value": "0.9..1.2"},
        {"property": "Machinability", "value": "Good"}
    ]})
    .to_string();
    let (status, value) = call(state("six.csv"), "POST", "/api/classify", Some(&body)).await;
    assert_eq!(status, StatusCode::OK, "{value}");
}

#[tokio::test]
async fn malformed_requests_are_400() {
    let st = state("xg.csv");
    for body in [
        "not json",
        r#"{"requirement": []}"#,
        r#"{"requirement": [{"property": "Colour", "value": 1}]}"#,
        r#"{"requirement": [{"property": "Density", "value": 1.0}]}"#,
        r#"{"requirement": [{"property": "Tensile Strength", "value": 20}], "metrics": []}"#,
        r#"{"requirement": [{"property": "Tensile Strength", "value": 20}], "metrics": ["nosuch"]}"#,
        r#"{"requirement": [{"property": "Tensile Strength", "value": 20}], "mode": "max"}"#,
        r#"{"requirement": [{"property": "Tensile Strength", "value": 20}], "top_k": 0}"#,
        r#"{"requirement": [{"property": "Tensile Strength", "value": 20}], "extra": 1}"#,
    ] {
        let (status, value) = call(st.clone(), "POST", "/api/compare", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body} -> {value}");
        assert!(value["error"].is_string());
    }
}

#[tokio::test]
async fn unanswerable_requests_are_422() {
    let body = json!({ "requirement": [{"property": "Poisson Ratio", "value": 0.3}] }).to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/classify", Some(&body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(value["nearest_misses"].is_array());

    // Conditions evaluable but unmet.
    let body = json!({ "requirement": [
        {"property": "Tensile Strength", "value": 150},
        {"property": "Tensile Modulus", "value": 20000}
    ]})
    .to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/classify", Some(&body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let ids: Vec<u64> = value["nearest_misses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["rule_id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, vec![1, 2, 17]);

    let body = json!({ "requirement": [
        {"property": "Tensile Strength", "value": 900},
        {"property": "Density", "value": "7.5..7.9"}
    ]})
    .to_string();
    let (status, value) = call(state("xg.csv"), "POST", "/api/compare", Some(&body)).await;
    // xg.csv holds exactly one metal.
    assert_eq!(status, StatusCode::OK, "{value}");
    assert_eq!(value["class"], "Metal");

    let polymers: Vec<String> = std::fs::read_to_string(fixture("six.csv"))
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("id,") || l.starts_with('P'))
        .map(String::from)
        .collect();
    let path = std::env::temp_dir().join(format!("matsel-polymers-{}.csv", std::process::id()));
    std::fs::write(&path, polymers.join("\n")).unwrap();
    let config = ServiceConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        db: path.clone(),
        schema: None,
        rules: None,
        mode: SelectionMode::Oriented,
    };
    let st = Arc::new(AppState::load(&config).unwrap());
    let _ = std::fs::remove_file(&path);
    let (status, value) = call(st, "POST", "/api/compare", Some(&body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(value["error"].as_str().unwrap().contains("Metal"));
}

#[tokio::test]
async fn serves_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(state("six.csv"));
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });

    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut buf = String::new();
    stream.read_to_string(&mut buf).await.unwrap();
    assert!(buf.starts_with("HTTP/1.1 200"), "{buf}");
    assert!(buf.contains(r#""materials":6"#), "{buf}");
}

#[tokio::test]
async fn cors_headers_present() {
    let req = Request::builder()
        .method("GET")
        .uri("/healthz")
        .header("origin", "http://example.test")
        .body(Body::empty())
        .unwrap();
    let resp = router(state("six.csv")).oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn material_lookup() {
    let (status, value) = call(state("xg.csv"), "GET", "/api/materials/X", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(value["class"], "Polymer");
    let props = value["properties"].as_array().unwrap();
    assert_eq!(props.len(), 23);
    assert_eq!(props[0], json!({"property": "Tensile Strength", "value": "27.456"}));

    let (status, value) = call(state("xg.csv"), "GET", "/api/materials/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(value["error"].as_str().unwrap().contains("nope"));
}

#[tokio::test]
async fn schema_is_stable() {
    let st = state("six.csv");
    let (_, a) = call(st.clone(), "GET", "/api/schema", None).await;
    let (_, b) = call(st, "GET", "/api/schema", None).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn matches_direct_library_call() {
    let st = state("xg.csv");
    for (mode, normalize) in [("oriented", false), ("paper-min", false), ("oriented", true)] {
        let body = json!({ "requirement": reference_req(), "mode": mode, "normalize": normalize }).to_string();
        let (status, value) = call(st.clone(), "POST", "/api/compare", Some(&body)).await;
        assert_eq!(status, StatusCode::OK, "{value}");
        let served: ComparisonReport = serde_json::from_value(value).unwrap();

        let cells = [
            ("Tensile Strength", "20"),
            ("Yield Strength", "23.9"),
            ("Impact Strength", "4"),
            ("Hardness", "56.67"),
            ("Tensile Modulus", "2000"),
        ];
        let req = DesignRequirement::from_cells(&st.schema, &cells).unwrap();
        let options = CompareOptions {
            metrics: MetricKind::ALL.to_vec(),
            mode: mode.parse().unwrap(),
            normalize,
            top_k: None,
        };
        let direct = compare_metrics(&st.db, &req, &st.kb, &st.schema, &options).unwrap();
        assert_eq!(served, direct);
    }
}

#[tokio::test]
async fn concurrent_requests_agree_with_serial() {
    let st = state("xg.csv");
    let body = json!({ "requirement": reference_req() }).to_string();
    let (_, serial) = call(st.clone(), "POST", "/api/compare", Some(&body)).await;
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let st = st.clone();
            let body = body.clone();
            tokio::spawn(async move { call(st, "POST", "/api/compare", Some(&body)).await })
        })
        .collect();
    for h in handles {
        let (status, value) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        assert_eq!(value, serial);
    }
}
