use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::backend::{BackendError, ChatBackend, ChatRequest};

pub const API_KEY_ENV: &str = "MSCOT_API_KEY";
const REDACTED: &str = "Bearer [REDACTED]";

/// Chat-completions client. The token never reaches logs, Debug output or transcripts.
pub struct RemoteEndpoint {
    base_url: String,
    model: String,
    token: String,
    backoff: Vec<Duration>,
    client: reqwest::blocking::Client,
    transcript: Option<Mutex<File>>,
}

impl fmt::Debug for RemoteEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteEndpoint")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("token", &"[REDACTED]")
            .finish()
    }
}

impl RemoteEndpoint {
    pub fn new(base_url: &str, model: &str, token: String, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(RemoteEndpoint {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            token,
            backoff: vec![Duration::from_secs(1), Duration::from_secs(2), Duration::from_secs(4)],
            client,
            transcript: None,
        })
    }

    pub fn from_env(base_url: &str, model: &str, timeout: Duration) -> Result<Self, BackendError> {
        match std::env::var(API_KEY_ENV) {
            Ok(t) if !t.is_empty() => Self::new(base_url, model, t, timeout),
            _ => Err(BackendError::MissingKey),
        }
    }

    pub fn with_backoff(mut self, backoff: Vec<Duration>) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_transcript(mut self, path: &Path) -> std::io::Result<Self> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        self.transcript = Some(Mutex::new(f));
        Ok(self)
    }

    fn body(&self, req: &ChatRequest) -> Value {
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.decoding.temperature,
            "max_tokens": req.decoding.max_new_tokens,
        })
    }

    fn once(&self, body: &Value) -> Result<String, BackendError> {
        let resp = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.token)
            .json(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    BackendError::Timeout
                } else {
                    BackendError::Transport(e.without_url().to_string())
                }
            })?;
        let code = resp.status().as_u16();
        let text = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&code) {
            return Err(BackendError::Status { code, body: text.chars().take(512).collect() });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed("missing choices[0].message.content".into()))
    }

    fn log(&self, body: &Value, result: &Result<String, BackendError>) {
        let Some(t) = &self.transcript else { return };
        let mut entry = json!({"request": body, "authorization": REDACTED});
        match result {
            Ok(r) => entry["reply"] = json!(r),
            Err(e) => entry["error"] = json!(e.to_string()),
        }
        let mut f = t.lock().unwrap_or_else(|p| p.into_inner());
        if let Err(e) = writeln!(f, "{entry}") {
            log::warn!("transcript write failed: {e}");
        }
    }
}

fn retryable(e: &BackendError) -> bool {
    match e {
        BackendError::Transport(_) | BackendError::Timeout => true,
        BackendError::Status { code, .. } => *code == 429 || *code >= 500,
        _ => false,
    }
}

impl ChatBackend for RemoteEndpoint {
    fn kind(&self) -> &'static str {
        "remote"
    }

    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        let body = self.body(req);
        let mut waits = self.backoff.iter();
        loop {
            let result = self.once(&body);
            self.log(&body, &result);
            match result {
                Err(e) if retryable(&e) => match waits.next() {
                    Some(d) => {
                        log::debug!("retrying after {e} in {d:?}");
                        thread::sleep(*d);
                    }
                    None => return Err(e),
                },
                other => return other,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::backend::Decoding;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;

    /// Serve canned responses in order, returning the raw requests seen.
    fn serve(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let h = thread::spawn(move || {
            let mut seen = Vec::new();
            for (code, body) in responses {
                let (mut s, _) = listener.accept().unwrap();
                let mut r = BufReader::new(s.try_clone().unwrap());
                let mut head = String::new();
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    r.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    head.push_str(&line);
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                r.read_exact(&mut buf).unwrap();
                seen.push(head + &String::from_utf8(buf).unwrap());
                let resp = format!(
                    "HTTP/1.1 {code} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                s.write_all(resp.as_bytes()).unwrap();
            }
            seen
        });
        (url, h)
    }

    fn req() -> ChatRequest {
        ChatRequest {
            system: "sys".into(),
            user: "hello".into(),
            decoding: Decoding::default(),
            attempt: 0,
            hint: None,
        }
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"True"}}]}"#;

    #[test]
    fn posts_chat_completion_shape() {
        let (url, h) = serve(vec![(200, OK.into())]);
        let ep = RemoteEndpoint::new(&url, "m1", "sekrit".into(), Duration::from_secs(5)).unwrap();
        assert_eq!(ep.complete(&req()).unwrap(), "True");
        let seen = h.join().unwrap();
        let raw = &seen[0];
        assert!(raw.starts_with("POST /chat/completions"));
        assert!(raw.to_ascii_lowercase().contains("authorization: bearer sekrit"));
        let body: Value = serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        assert_eq!(body["model"], "m1");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["max_tokens"], 512);
        assert_eq!(body["messages"][1]["content"], "hello");
    }

    #[test]
    fn retries_server_errors_then_succeeds() {
        let (url, h) = serve(vec![(503, "{}".into()), (200, OK.into())]);
        let ep = RemoteEndpoint::new(&url, "m", "t".into(), Duration::from_secs(5))
            .unwrap()
            .with_backoff(vec![Duration::from_millis(10)]);
        assert_eq!(ep.complete(&req()).unwrap(), "True");
        assert_eq!(h.join().unwrap().len(), 2);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, h) = serve(vec![(400, "bad".into())]);
        let ep = RemoteEndpoint::new(&url, "m", "t".into(), Duration::from_secs(5)).unwrap();
        assert!(matches!(ep.complete(&req()), Err(BackendError::Status { code: 400, .. })));
        h.join().unwrap();
    }

    #[test]
    fn token_is_redacted_everywhere() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let (url, h) = serve(vec![(200, OK.into())]);
        let ep = RemoteEndpoint::new(&url, "m", "sekrit-token".into(), Duration::from_secs(5))
            .unwrap()
            .with_transcript(&path)
            .unwrap();
        assert!(!format!("{ep:?}").contains("sekrit"));
        ep.complete(&req()).unwrap();
        h.join().unwrap();
        let t = std::fs::read_to_string(&path).unwrap();
        assert!(t.contains(REDACTED));
        assert!(!t.contains("sekrit"));
    }
}
