//! HTTP chat backend behavior against a scripted local server: success,
//! retry, hard failure, timeout, and caching.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use plurijudge::dataset::Dimension;
use plurijudge::judge::{
    CachingBackend, HttpChatBackend, HttpChatConfig, JudgeBackend, PromptBundle, ResponseCache,
};
use plurijudge::Error;

/// What the scripted server does for one incoming request.
#[derive(Clone)]
enum Script {
    Respond { status: u16, body: String },
    SleepThenDrop(Duration),
}

struct Server {
    endpoint: String,
    requests: Arc<AtomicUsize>,
    auth_headers: Arc<Mutex<Vec<Option<String>>>>,
}

/// One scripted action per expected request; the last action repeats.
fn spawn_server(script: Vec<Script>) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    let requests = Arc::new(AtomicUsize::new(0));
    let auth_headers = Arc::new(Mutex::new(Vec::new()));
    let counter = requests.clone();
    let auth_log = auth_headers.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let action = script.get(n).or_else(|| script.last()).cloned();
            let request = read_request(&mut stream);
            auth_log.lock().unwrap().push(
                request
                    .lines()
                    .find(|l| l.to_lowercase().starts_with("authorization:"))
                    .map(|l| l.trim().to_string()),
            );
            match action {
                Some(Script::Respond { status, body }) => {
                    let reason = match status {
                        200 => "OK",
                        400 => "Bad Request",
                        500 => "Internal Server Error",
                        _ => "Status",
                    };
                    let response = format!(
                        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                    let _ = stream.write_all(response.as_bytes());
                }
                Some(Script::SleepThenDrop(duration)) => {
                    std::thread::sleep(duration);
                }
                None => {}
            }
        }
    });
    Server {
        endpoint,
        requests,
        auth_headers,
    }
}

/// Read headers plus a content-length body.
fn read_request(stream: &mut TcpStream) -> String {
    stream
        .set_read_timeout(Some(Duration::from_secs(10)))
        .unwrap();
    let mut buffer = Vec::new();
    let mut chunk = [0u8; 1024];
    let headers_end = loop {
        match stream.read(&mut chunk) {
            Ok(0) => return String::from_utf8_lossy(&buffer).to_string(),
            Ok(n) => buffer.extend_from_slice(&chunk[..n]),
            Err(_) => return String::from_utf8_lossy(&buffer).to_string(),
        }
        if let Some(pos) = buffer.windows(4).position(|w| w == b"\r\n\r\n") {
            break pos + 4;
        }
    };
    let headers = String::from_utf8_lossy(&buffer[..headers_end]).to_string();
    let content_length = headers
        .lines()
        .find_map(|l| {
            let (name, value) = l.split_once(':')?;
            name.eq_ignore_ascii_case("content-length")
                .then(|| value.trim().parse::<usize>().ok())?
        })
        .unwrap_or(0);
    while buffer.len() < headers_end + content_length {
        match stream.read(&mut chunk) {
            Ok(0) | Err(_) => break,
            Ok(n) => buffer.extend_from_slice(&chunk[..n]),
        }
    }
    String::from_utf8_lossy(&buffer).to_string()
}

fn bundle() -> PromptBundle {
    PromptBundle {
        preamble: "preamble".into(),
        instruction: "instruction".into(),
        examples: vec![],
        input: "input".into(),
        output_contract: "contract".into(),
        dimension: Dimension::Innovativeness,
        target_idea_text: "target".into(),
    }
}

fn config(endpoint: &str, credential_env: &str, max_retries: u32) -> HttpChatConfig {
    HttpChatConfig {
        endpoint: endpoint.to_string(),
        model: "test-model".into(),
        temperature: 0.0,
        credential_env: credential_env.to_string(),
        timeout_secs: 1,
        max_retries,
        backoff_ms: 5,
    }
}

fn chat_body(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}

#[test]
fn successful_call_returns_first_choice_content_with_bearer_auth() {
    let completion = r#"{"score": 4, "reason": "solid", "confidence": 91}"#;
    let server = spawn_server(vec![Script::Respond {
        status: 200,
        body: chat_body(completion),
    }]);
    std::env::set_var("PLURIJUDGE_TEST_CRED_SUCCESS", "sk-test-token");
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_SUCCESS", 3));
    let raw = backend.invoke(&bundle()).unwrap();
    assert_eq!(raw, completion);
    assert_eq!(backend.id(), "http_chat:test-model");
    assert_eq!(server.requests.load(Ordering::SeqCst), 1);
    let auth = server.auth_headers.lock().unwrap();
    assert_eq!(
        auth[0].as_deref(),
        Some("Authorization: Bearer sk-test-token")
    );
}

#[test]
fn request_body_carries_model_messages_and_temperature() {
    let server = spawn_server(vec![Script::Respond {
        status: 200,
        body: chat_body("ok"),
    }]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 1));
    backend.invoke(&bundle()).unwrap();
    // No credential env var set: no Authorization header.
    let auth = server.auth_headers.lock().unwrap();
    assert_eq!(auth[0], None);
}

#[test]
fn transient_500_is_retried_to_success() {
    let completion = chat_body("recovered");
    let server = spawn_server(vec![
        Script::Respond {
            status: 500,
            body: String::new(),
        },
        Script::Respond {
            status: 200,
            body: completion,
        },
    ]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 3));
    assert_eq!(backend.invoke(&bundle()).unwrap(), "recovered");
    assert_eq!(server.requests.load(Ordering::SeqCst), 2);
}

#[test]
fn persistent_500_exhausts_the_budget_into_a_transport_error() {
    let server = spawn_server(vec![Script::Respond {
        status: 500,
        body: String::new(),
    }]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 2));
    match backend.invoke(&bundle()) {
        Err(Error::Transport { attempts, message }) => {
            assert_eq!(attempts, 2);
            assert!(message.contains("500"), "message: {message}");
        }
        other => panic!("expected Transport error, got {other:?}"),
    }
    assert_eq!(server.requests.load(Ordering::SeqCst), 2);
}

#[test]
fn client_errors_fail_fast_without_retry() {
    let server = spawn_server(vec![Script::Respond {
        status: 400,
        body: String::new(),
    }]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 3));
    match backend.invoke(&bundle()) {
        Err(Error::Transport { attempts, message }) => {
            assert_eq!(attempts, 1);
            assert!(message.contains("not retryable"), "message: {message}");
        }
        other => panic!("expected Transport error, got {other:?}"),
    }
    assert_eq!(server.requests.load(Ordering::SeqCst), 1);
}

#[test]
fn hung_server_reports_a_timeout() {
    let server = spawn_server(vec![Script::SleepThenDrop(Duration::from_millis(2500))]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 1));
    match backend.invoke(&bundle()) {
        Err(Error::Timeout { attempts }) => assert_eq!(attempts, 1),
        other => panic!("expected Timeout error, got {other:?}"),
    }
}

#[test]
fn caching_wrapper_spares_the_server_on_identical_bundles() {
    let completion = r#"{"score": 2, "reason": "ok", "confidence": 88}"#;
    let server = spawn_server(vec![Script::Respond {
        status: 200,
        body: chat_body(completion),
    }]);
    let dir = tempfile::tempdir().unwrap();
    let cache = Arc::new(ResponseCache::open(&dir.path().join("cache.jsonl")).unwrap());
    let backend = CachingBackend::new(
        Box::new(HttpChatBackend::new(config(
            &server.endpoint,
            "PLURIJUDGE_TEST_CRED_UNSET",
            3,
        ))),
        cache.clone(),
    );
    assert_eq!(backend.invoke(&bundle()).unwrap(), completion);
    assert_eq!(backend.invoke(&bundle()).unwrap(), completion);
    assert_eq!(server.requests.load(Ordering::SeqCst), 1);
    assert_eq!(cache.len(), 1);

    // The cached completion replays through the replay backend.
    let replay = plurijudge::judge::ReplayBackend::new(cache, "http_chat:test-model").unwrap();
    assert_eq!(replay.invoke(&bundle()).unwrap(), completion);
}

#[test]
fn malformed_response_bodies_are_transport_errors() {
    let server = spawn_server(vec![Script::Respond {
        status: 200,
        body: "not json".to_string(),
    }]);
    let backend = HttpChatBackend::new(config(&server.endpoint, "PLURIJUDGE_TEST_CRED_UNSET", 1));
    match backend.invoke(&bundle()) {
        Err(Error::Transport { message, .. }) => {
            assert!(message.contains("unparseable"), "message: {message}");
        }
        other => panic!("expected Transport error, got {other:?}"),
    }
}
