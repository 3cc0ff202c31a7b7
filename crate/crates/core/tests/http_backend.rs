#![cfg(feature = "http")]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use uno_arena::error::BackendError;
use uno_arena::llm::{ChatBackend, ChatMessage, HttpBackend, HttpSettings};

struct Seen {
    path: String,
    auth: Option<String>,
    body: serde_json::Value,
}

/// Serve the given `(status, body)` responses in order, one per connection.
fn fake_server(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut len = 0;
            let mut auth = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let path = request_line.split_whitespace().nth(1).unwrap().to_string();
            let _ = tx.send(Seen { path, auth, body: serde_json::from_slice(&buf).unwrap() });
            let mut out = stream;
            write!(
                out,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1"), rx)
}

fn reply(content: &str) -> String {
    serde_json::json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string()
}

#[test]
fn posts_chat_completion_and_reads_reply() {
    let (url, seen) = fake_server(vec![(200, reply("{\"action\": 1}"))]);
    std::env::set_var("UNO_ARENA_TEST_KEY", "sekrit");
    let mut settings = HttpSettings::new(url, "test-model");
    settings.api_key_env = Some("UNO_ARENA_TEST_KEY".into());
    settings.max_tokens = Some(64);
    let mut b = HttpBackend::new(settings, None).unwrap();
    let out = b.complete(&[ChatMessage::system("s"), ChatMessage::user("u")]).unwrap();
    assert_eq!(out, "{\"action\": 1}");
    let req = seen.recv().unwrap();
    assert_eq!(req.path, "/v1/chat/completions");
    assert_eq!(req.auth.as_deref(), Some("Bearer sekrit"));
    assert_eq!(req.body["model"], "test-model");
    assert_eq!(req.body["messages"][1]["role"], "user");
    assert_eq!(req.body["temperature"], 0.0);
    assert_eq!(req.body["max_tokens"], 64);
}

#[test]
fn retries_server_errors_then_gives_up_on_client_errors() {
    let (url, seen) = fake_server(vec![(503, "{}".into()), (200, reply("ok"))]);
    let mut b = HttpBackend::new(HttpSettings::new(url, "m"), None).unwrap();
    assert_eq!(b.complete(&[ChatMessage::user("u")]).unwrap(), "ok");
    assert_eq!(seen.iter().take(2).count(), 2);

    let (url, _seen) = fake_server(vec![(400, "{\"error\":\"bad\"}".into())]);
    let mut b = HttpBackend::new(HttpSettings::new(url, "m"), None).unwrap();
    assert!(matches!(b.complete(&[ChatMessage::user("u")]), Err(BackendError::Status { status: 400, .. })));

    let (url, _seen) = fake_server(vec![(200, "{\"choices\": []}".into())]);
    let mut b = HttpBackend::new(HttpSettings::new(url, "m"), None).unwrap();
    assert!(matches!(b.complete(&[ChatMessage::user("u")]), Err(BackendError::Malformed(_))));
}

#[test]
fn missing_key_is_reported() {
    let mut settings = HttpSettings::new("http://127.0.0.1:9/v1", "m");
    settings.api_key_env = Some("UNO_ARENA_SURELY_UNSET_VAR".into());
    assert!(matches!(HttpBackend::new(settings, None), Err(BackendError::MissingKey(_))));
}
