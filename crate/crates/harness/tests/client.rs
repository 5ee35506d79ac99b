use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use planbench_harness::{query_model, ClientError, EndpointConfig, RetryPolicy};
use serde_json::Value;

/// Serves the scripted `(status, body)` responses in order, one per
/// connection, and records each request's headers and JSON body.
struct MockServer {
    url: String,
    seen: Arc<Mutex<Vec<(String, Value)>>>,
}

fn read_request(stream: &mut TcpStream) -> (String, Value) {
    let mut reader = BufReader::new(stream);
    let mut headers = String::new();
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if line == "\r\n" || line.is_empty() {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        headers.push_str(&line);
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    (
        headers,
        serde_json::from_slice(&body).unwrap_or(Value::Null),
    )
}

fn serve(script: Vec<(u16, &'static str)>) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in script {
            let (mut stream, _) = listener.accept().unwrap();
            let req = read_request(&mut stream);
            log.lock().unwrap().push(req);
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    MockServer { url, seen }
}

fn config(url: &str) -> EndpointConfig {
    EndpointConfig {
        token_env: None,
        retry: RetryPolicy {
            max_attempts: 3,
            backoff_ms: 1,
        },
        timeout_secs: 5.0,
        ..EndpointConfig::new(url, "test-model")
    }
}

#[test]
fn completion_round_trip() {
    let server = serve(vec![(200, r#"{"text": "pick-up b1, stack b1 b2"}"#)]);
    let c = query_model(&config(&server.url), "the prompt").unwrap();
    assert_eq!(c.text, "pick-up b1, stack b1 b2");
    assert!(c.seconds >= 0.0);
    let seen = server.seen.lock().unwrap();
    let body = &seen[0].1;
    assert_eq!(body["prompt"], "the prompt");
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["temperature"], 0.2);
    assert!(!seen[0].0.to_ascii_lowercase().contains("authorization"));
}

#[test]
fn bearer_token_comes_from_the_environment() {
    let server = serve(vec![(
        200,
        r#"{"choices": [{"message": {"content": "ok"}}]}"#,
    )]);
    let var = "PLANBENCH_TEST_TOKEN_A";
    std::env::set_var(var, "sekrit");
    let cfg = EndpointConfig {
        token_env: Some(var.into()),
        ..config(&server.url)
    };
    assert_eq!(query_model(&cfg, "p").unwrap().text, "ok");
    let headers = server.seen.lock().unwrap()[0].0.to_ascii_lowercase();
    assert!(
        headers.contains("authorization: bearer sekrit"),
        "{headers}"
    );
}

#[test]
fn missing_token_fails_before_sending() {
    let cfg = EndpointConfig {
        token_env: Some("PLANBENCH_TEST_TOKEN_UNSET".into()),
        ..config("http://127.0.0.1:9")
    };
    assert_eq!(
        query_model(&cfg, "p"),
        Err(ClientError::MissingToken(
            "PLANBENCH_TEST_TOKEN_UNSET".into()
        ))
    );
}

#[test]
fn server_errors_are_retried() {
    let server = serve(vec![(503, "{}"), (429, "{}"), (200, r#"{"text": "done"}"#)]);
    assert_eq!(query_model(&config(&server.url), "p").unwrap().text, "done");
    assert_eq!(server.seen.lock().unwrap().len(), 3);
}

#[test]
fn retries_run_out() {
    let server = serve(vec![(500, "{}"), (500, "{}"), (500, "{}")]);
    match query_model(&config(&server.url), "p") {
        Err(ClientError::Transport { attempts: 3, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn auth_failure_is_not_retried() {
    let server = serve(vec![
        (401, r#"{"error": "bad key"}"#),
        (200, r#"{"text": "x"}"#),
    ]);
    assert_eq!(
        query_model(&config(&server.url), "p"),
        Err(ClientError::Auth(401))
    );
    assert_eq!(server.seen.lock().unwrap().len(), 1);
}

#[test]
fn malformed_and_client_errors() {
    let server = serve(vec![(200, r#"{"data": []}"#), (400, "nope")]);
    assert!(matches!(
        query_model(&config(&server.url), "p"),
        Err(ClientError::Malformed(_))
    ));
    assert!(matches!(
        query_model(&config(&server.url), "p"),
        Err(ClientError::Status { status: 400, .. })
    ));
}

#[test]
fn unreachable_host_exhausts_retries() {
    // Bind then drop to get a port nobody listens on.
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let cfg = config(&format!("http://127.0.0.1:{port}/"));
    match query_model(&cfg, "p") {
        Err(ClientError::Transport { attempts, .. }) => assert_eq!(attempts, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_config_is_rejected() {
    let cfg = EndpointConfig {
        temperature: -1.0,
        ..config("http://127.0.0.1:9")
    };
    assert!(matches!(
        query_model(&cfg, "p"),
        Err(ClientError::InvalidConfig(_))
    ));
}
