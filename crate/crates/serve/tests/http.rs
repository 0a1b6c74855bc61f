use std::net::SocketAddr;
use std::path::PathBuf;

use impactrank_core::export::{write_dump, DumpSpec};
use impactrank_core::{build_graph, compute_all, Doi, MeasureParams, PubRecord};
use impactrank_serve::{
    get_scores, load_store, router, RequestError, ScoreStore, ServeOptions, StoreError,
};
use serde_json::{json, Value};

const DOIS: [&str; 4] = ["10.1/a", "10.1/b", "10.1/c", "10.1/d"];

fn write_dumps(dir: &std::path::Path, graph_id: &str) -> Vec<PathBuf> {
    let recs = DOIS
        .iter()
        .zip([2015, 2018, 2019, 2020])
        .map(|(d, y)| PubRecord::new(Doi::parse(d).unwrap(), y));
    let edges = [
        ("10.1/b", "10.1/a"),
        ("10.1/c", "10.1/a"),
        ("10.1/d", "10.1/b"),
        ("10.1/d", "10.1/c"),
    ];
    let (g, _) = build_graph(recs, edges).unwrap();
    let set = compute_all(&g, &MeasureParams::with_current_year(2021)).unwrap();
    set.iter()
        .map(|sv| {
            let spec = DumpSpec::new(sv, graph_id, true).unwrap();
            write_dump(sv, &g, &spec, dir).unwrap()
        })
        .collect()
}

fn store(dir: &tempfile::TempDir) -> ScoreStore {
    load_store(&write_dumps(dir.path(), "toy")).unwrap()
}

async fn spawn(store: ScoreStore, cap: usize) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(store, ServeOptions { batch_cap: cap });
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    addr
}

#[test]
fn store_joins_five_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let s = store(&dir);
    assert_eq!(s.len(), 4);
    assert_eq!(s.metadata.graph_id, "toy");
    assert_eq!(s.metadata.params["PR"]["a"], "0.5");
    assert_eq!(s.metadata.params["CC"].len(), 0);
    let a = s.get(&Doi::parse("10.1/a").unwrap()).unwrap();
    assert_eq!(a.cc, 2.0);
}

#[test]
fn store_rejects_mixed_graphs_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = write_dumps(dir.path(), "one");
    let other = tempfile::tempdir().unwrap();
    paths[4] = write_dumps(other.path(), "two").pop().unwrap();
    assert!(matches!(
        load_store(&paths),
        Err(StoreError::GraphIdMismatch(..))
    ));

    paths.truncate(4);
    assert!(matches!(
        load_store(&paths),
        Err(StoreError::WrongDumpCount(4))
    ));

    // drop one row from the RAM dump
    let mut paths = write_dumps(dir.path(), "one");
    let ram = paths
        .iter()
        .position(|p| p.to_string_lossy().contains("RAM_"))
        .unwrap();
    let rows = impactrank_core::export::read_dump(&paths[ram]).unwrap();
    let name = paths[ram]
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .trim_end_matches(".gz")
        .to_string();
    let plain = dir.path().join(name);
    let body: String = rows[1..]
        .iter()
        .map(|(d, s)| format!("{d}\t{s:?}\n"))
        .collect();
    std::fs::write(&plain, body).unwrap();
    paths[ram] = plain;
    match load_store(&paths) {
        Err(StoreError::MissingDoi { doi, dump }) => {
            assert_eq!(doi, rows[0].0.as_str());
            assert!(dump.to_string_lossy().contains("RAM_"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lookup_normalises_and_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let s = store(&dir);
    let res = get_scores(
        &s,
        &["https://doi.org/10.1/C", "10.1/zzz", "garbage", "10.1/a"],
        10,
    )
    .unwrap();
    let found: Vec<bool> = res.iter().map(|r| r.found).collect();
    assert_eq!(found, [true, false, false, true]);
    assert_eq!(res[0].doi, "https://doi.org/10.1/C");
    assert_eq!(get_scores::<&str>(&s, &[], 10), Err(RequestError::Empty));
    assert_eq!(
        get_scores(&s, &["10.1/a"; 3], 2),
        Err(RequestError::OverCap { got: 3, cap: 2 })
    );
}

#[tokio::test]
async fn http_contract() {
    let dir = tempfile::tempdir().unwrap();
    let addr = spawn(store(&dir), 3).await;
    let base = format!("http://{addr}/v1");
    let client = reqwest::Client::new();

    let health: Value = client
        .get(format!("{base}/health"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(health["graph_id"], "toy");
    assert_eq!(health["dois"], 4);

    let r = client
        .get(format!("{base}/scores/10.1/a"))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 200);
    let body: Value = r.json().await.unwrap();
    assert_eq!(body["metadata"]["graph_id"], "toy");
    assert_eq!(body["results"][0]["found"], true);
    assert_eq!(body["results"][0]["scores"]["cc"], 2.0);
    for key in ["cc", "icc", "pagerank", "ram", "attrank"] {
        assert!(body["results"][0]["scores"][key].is_number(), "{key}");
    }

    let r = client
        .get(format!("{base}/scores/10.1/missing"))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 404);
    let body: Value = r.json().await.unwrap();
    assert_eq!(body["results"][0]["found"], false);
    assert!(body["results"][0].get("scores").is_none());

    let r = client
        .post(format!("{base}/scores"))
        .json(&json!({"dois": ["10.1/D", "nope", "10.1/b"]}))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 200);
    let body: Value = r.json().await.unwrap();
    let got: Vec<(&str, bool)> = body["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["doi"].as_str().unwrap(), r["found"].as_bool().unwrap()))
        .collect();
    assert_eq!(got, [("10.1/D", true), ("nope", false), ("10.1/b", true)]);

    for bad in [
        json!({"dois": []}),
        json!({"dois": ["10.1/a", "10.1/a", "10.1/a", "10.1/a"]}),
        json!({"doi": "x"}),
    ] {
        let r = client
            .post(format!("{base}/scores"))
            .json(&bad)
            .send()
            .await
            .unwrap();
        assert_eq!(r.status(), 400, "{bad}");
        let body: Value = r.json().await.unwrap();
        assert!(body["error"].is_string());
    }
    let r = client
        .post(format!("{base}/scores"))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), 400);
}
