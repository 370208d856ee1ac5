//! Uniform player-backend boundary.
//!
//! Three backends implement [`Backend`]: a remote chat-completion endpoint
//! ([`HttpBackend`]), a replay backend serving canned fixture replies
//! ([`ScriptedBackend`]), and a deterministic rule-driven player
//! ([`SyntheticBackend`]) used for offline experiments and tests. Every
//! request/response pair can be mirrored to an append-only transcript log
//! keyed by request hash.

use crate::parse::render_selection;
use crate::response::ResponseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: ChatRole,
    pub content: String,
}

impl ChatTurn {
    pub fn system(content: impl Into<String>) -> Self {
        ChatTurn { role: ChatRole::System, content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        ChatTurn { role: ChatRole::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        ChatTurn { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("authentication rejected by endpoint")]
    Auth,
    #[error("rate limited and retry budget exhausted")]
    RateLimited,
    #[error("conversation exceeds the model context window")]
    ContextOverflow,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("scripted fixture miss: game {game_key:?} turn {turn_index}")]
    FixtureMiss { game_key: String, turn_index: u32 },
    #[error("invalid request: {0}")]
    Precondition(String),
    #[error("transcript log: {0}")]
    Transcript(String),
}

/// Documented fixed ratio used to turn a word budget into a token ceiling.
pub const TOKENS_PER_WORD: f64 = 1.4;

/// Maps a word budget to a generation token ceiling (1 word ≈ 1.4 tokens).
pub fn word_budget_hint(budget_words: u32) -> Result<u32, GatewayError> {
    if budget_words == 0 {
        return Err(GatewayError::Precondition("word budget must be positive".to_string()));
    }
    Ok((budget_words as f64 * TOKENS_PER_WORD).round() as u32)
}

/// Remote endpoint settings. The API key is read from the environment by
/// name; neither configs nor records ever hold key material.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key_env: String,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_request_cap")]
    pub per_minute_request_cap: u32,
    #[serde(default = "default_temperature")]
    pub sampling_temperature: f64,
}

fn default_max_retries() -> u32 {
    3
}
fn default_timeout_secs() -> u64 {
    120
}
fn default_request_cap() -> u32 {
    60
}
fn default_temperature() -> f64 {
    // The source study does not report decoding parameters; 1.0 is the
    // configurable default and the value used is stored per record.
    1.0
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.per_minute_request_cap == 0 {
            return Err(GatewayError::Precondition(
                "per_minute_request_cap must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// A player backend: given the running conversation, produce the next
/// assistant reply. Implementations must be safe for concurrent sessions.
pub trait Backend: Send + Sync {
    fn complete(
        &self,
        game_key: &str,
        turn_index: u32,
        history: &[ChatTurn],
        budget_words: u32,
    ) -> Result<String, GatewayError>;

    /// Stable human-readable description stored in each GameRecord.
    fn descriptor(&self) -> String;

    /// Whether replies are a pure function of the inputs (no network, no
    /// wall clock). Offline backends get deterministic record timestamps.
    fn is_deterministic(&self) -> bool {
        false
    }
}

fn check_history(history: &[ChatTurn]) -> Result<(), GatewayError> {
    match history.first() {
        Some(turn) if turn.role == ChatRole::System => Ok(()),
        _ => Err(GatewayError::Precondition("history must start with a system turn".to_string())),
    }
}

fn request_hash(history: &[ChatTurn], budget_words: u32) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(history).expect("serializable history"));
    hasher.update(budget_words.to_le_bytes());
    hex::encode(hasher.finalize())
}

/// Append-only transcript log: one JSON line per request/response pair.
#[derive(Debug)]
pub struct TranscriptLog {
    path: PathBuf,
    file: Mutex<std::fs::File>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub timestamp: String,
    pub game_key: String,
    pub turn_index: u32,
    pub request_hash: String,
    pub request: Vec<ChatTurn>,
    pub response: String,
}

impl TranscriptLog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref().to_path_buf();
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| GatewayError::Transcript(e.to_string()))?;
        Ok(TranscriptLog { path, file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, entry: &TranscriptEntry) -> Result<(), GatewayError> {
        let mut line =
            serde_json::to_string(entry).map_err(|e| GatewayError::Transcript(e.to_string()))?;
        line.push('\n');
        let mut file = self.file.lock().expect("transcript lock");
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| GatewayError::Transcript(e.to_string()))
    }

    pub fn read_all(path: impl AsRef<Path>) -> Result<Vec<TranscriptEntry>, GatewayError> {
        let content = std::fs::read_to_string(path).map_err(|e| GatewayError::Transcript(e.to_string()))?;
        content
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| GatewayError::Transcript(e.to_string())))
            .collect()
    }
}

/// Front door used by sessions: delegates to a backend and mirrors every
/// exchange to the transcript log.
pub struct Gateway {
    backend: Box<dyn Backend>,
    transcript: Option<TranscriptLog>,
}

impl Gateway {
    pub fn new(backend: Box<dyn Backend>, transcript: Option<TranscriptLog>) -> Self {
        Gateway { backend, transcript }
    }

    pub fn descriptor(&self) -> String {
        self.backend.descriptor()
    }

    pub fn is_deterministic(&self) -> bool {
        self.backend.is_deterministic()
    }

    pub fn complete(
        &self,
        game_key: &str,
        turn_index: u32,
        history: &[ChatTurn],
        budget_words: u32,
    ) -> Result<String, GatewayError> {
        check_history(history)?;
        let reply = self.backend.complete(game_key, turn_index, history, budget_words)?;
        if let Some(log) = &self.transcript {
            log.append(&TranscriptEntry {
                timestamp: chrono::Utc::now().to_rfc3339(),
                game_key: game_key.to_string(),
                turn_index,
                request_hash: request_hash(history, budget_words),
                request: history.to_vec(),
                response: reply.clone(),
            })?;
        }
        Ok(reply)
    }
}

// ---------------------------------------------------------------------------
// Rate limiting

/// Token bucket with per-minute capacity. Time is injected so the refill
/// logic is testable without sleeping.
#[derive(Debug)]
struct TokenBucket {
    capacity: f64,
    tokens: f64,
    refill_per_sec: f64,
    last: Instant,
}

impl TokenBucket {
    fn new(per_minute: u32, now: Instant) -> Self {
        TokenBucket {
            capacity: per_minute as f64,
            tokens: per_minute as f64,
            refill_per_sec: per_minute as f64 / 60.0,
            last: now,
        }
    }

    fn try_acquire(&mut self, now: Instant) -> bool {
        let elapsed = now.saturating_duration_since(self.last).as_secs_f64();
        self.tokens = (self.tokens + elapsed * self.refill_per_sec).min(self.capacity);
        self.last = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            true
        } else {
            false
        }
    }
}

// ---------------------------------------------------------------------------
// HTTP backend

/// Chat-completion client with exponential backoff and a shared per-endpoint
/// token bucket.
pub struct HttpBackend {
    config: EndpointConfig,
    client: reqwest::blocking::Client,
    bucket: Mutex<TokenBucket>,
}

/// Base delay for exponential backoff.
const BACKOFF_BASE: Duration = Duration::from_millis(250);
/// Per-sleep ceiling.
const BACKOFF_MAX_SLEEP: Duration = Duration::from_secs(8);
/// Documented cap on the total retry delay for one request.
pub const BACKOFF_TOTAL_CAP: Duration = Duration::from_secs(60);

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout_secs))
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let bucket = Mutex::new(TokenBucket::new(config.per_minute_request_cap, Instant::now()));
        Ok(HttpBackend { config, client, bucket })
    }

    fn api_key(&self) -> Result<String, GatewayError> {
        std::env::var(&self.config.api_key_env).map_err(|_| GatewayError::Auth)
    }

    fn acquire_slot(&self) {
        loop {
            if self.bucket.lock().expect("bucket lock").try_acquire(Instant::now()) {
                return;
            }
            std::thread::sleep(Duration::from_millis(50));
        }
    }

    /// Computes the backoff for attempt `n` (0-based), bounded per sleep.
    fn backoff_delay(attempt: u32) -> Duration {
        let exp = BACKOFF_BASE.saturating_mul(1u32 << attempt.min(16));
        exp.min(BACKOFF_MAX_SLEEP)
    }

    fn send_once(
        &self,
        key: &str,
        history: &[ChatTurn],
        max_tokens: u32,
    ) -> Result<Result<String, GatewayError>, GatewayError> {
        // Outer Err: permanent failure. Inner Err: retryable.
        let messages: Vec<_> = history
            .iter()
            .map(|t| {
                json!({
                    "role": match t.role {
                        ChatRole::System => "system",
                        ChatRole::User => "user",
                        ChatRole::Assistant => "assistant",
                    },
                    "content": t.content,
                })
            })
            .collect();
        let body = json!({
            "model": self.config.model_name,
            "messages": messages,
            "max_tokens": max_tokens,
            "temperature": self.config.sampling_temperature,
        });
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let resp = match self.client.post(&url).bearer_auth(key).json(&body).send() {
            Ok(r) => r,
            Err(e) => return Ok(Err(GatewayError::Transport(e.to_string()))),
        };
        let status = resp.status();
        let text = resp.text().unwrap_or_default();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(GatewayError::Auth);
        }
        if status.as_u16() == 429 {
            return Ok(Err(GatewayError::RateLimited));
        }
        if status.as_u16() == 400 && text.contains("context_length") {
            return Err(GatewayError::ContextOverflow);
        }
        if status.is_server_error() {
            return Ok(Err(GatewayError::Transport(format!("server error {status}"))));
        }
        if !status.is_success() {
            return Err(GatewayError::Transport(format!("unexpected status {status}: {text}")));
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Transport(format!("bad response body: {e}")))?;
        let content = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| GatewayError::Transport("missing message content".to_string()))?;
        Ok(Ok(content.to_string()))
    }
}

impl Backend for HttpBackend {
    fn complete(
        &self,
        _game_key: &str,
        _turn_index: u32,
        history: &[ChatTurn],
        budget_words: u32,
    ) -> Result<String, GatewayError> {
        check_history(history)?;
        let max_tokens = word_budget_hint(budget_words)?;
        let key = self.api_key()?;
        let mut total_delay = Duration::ZERO;
        let mut last_retryable = GatewayError::Transport("no attempt made".to_string());
        for attempt in 0..=self.config.max_retries {
            self.acquire_slot();
            match self.send_once(&key, history, max_tokens)? {
                Ok(reply) => return Ok(reply),
                Err(retryable) => last_retryable = retryable,
            }
            if attempt < self.config.max_retries {
                let delay = Self::backoff_delay(attempt);
                if total_delay + delay > BACKOFF_TOTAL_CAP {
                    break;
                }
                total_delay += delay;
                std::thread::sleep(delay);
            }
        }
        Err(last_retryable)
    }

    fn descriptor(&self) -> String {
        format!("http:{}@{}", self.config.model_name, self.config.base_url)
    }
}

// ---------------------------------------------------------------------------
// Scripted backend

/// Replay backend: a total map from (game key, turn index) to canned reply.
/// Lookups outside the fixture are hard errors, never fabricated text.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedBackend {
    entries: HashMap<String, String>,
}

fn script_key(game_key: &str, turn_index: u32) -> String {
    format!("{game_key}#{turn_index}")
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, game_key: &str, turn_index: u32, reply: impl Into<String>) {
        self.entries.insert(script_key(game_key, turn_index), reply.into());
    }

    pub fn from_json(content: &str) -> Result<Self, GatewayError> {
        serde_json::from_str(content).map_err(|e| GatewayError::Precondition(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable script")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Backend for ScriptedBackend {
    fn complete(
        &self,
        game_key: &str,
        turn_index: u32,
        history: &[ChatTurn],
        _budget_words: u32,
    ) -> Result<String, GatewayError> {
        check_history(history)?;
        self.entries
            .get(&script_key(game_key, turn_index))
            .cloned()
            .ok_or_else(|| GatewayError::FixtureMiss {
                game_key: game_key.to_string(),
                turn_index,
            })
    }

    fn descriptor(&self) -> String {
        format!("scripted:{} entries", self.entries.len())
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------
// Synthetic backend

/// Deterministic rule-driven player: answers dialog requests with canned
/// discussion text and elicitations with a seeded, parseable selection.
/// Replies are a pure function of (seed, game key, turn index, prompt), so
/// whole experiments replay bit-identically.
#[derive(Debug, Clone)]
pub struct SyntheticBackend {
    seed: u64,
    /// When set, selection answers are unparseable gibberish; used to
    /// exercise the re-elicitation and failed-game paths.
    pub noncompliant: bool,
}

impl SyntheticBackend {
    pub fn new(seed: u64) -> Self {
        SyntheticBackend { seed, noncompliant: false }
    }

    fn rng_for(&self, game_key: &str, turn_index: u32) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(game_key.as_bytes());
        hasher.update(turn_index.to_le_bytes());
        let digest = hasher.finalize();
        ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().unwrap()))
    }

    fn pick_selection(
        &self,
        rng: &mut ChaCha8Rng,
        game_move: crate::catalog::GameMove,
    ) -> String {
        let mut v = ResponseVector::new();
        let range = game_move.index_range();
        for i in range.clone() {
            v.set_bit(i, rng.gen_bool(0.35));
        }
        if v.chosen_count(game_move) == 0 {
            let idx = rng.gen_range(range.start..range.end);
            v.set_bit(idx, true);
        }
        format!("After discussion the team selects: {}.", render_selection(&v, game_move))
    }
}

impl Backend for SyntheticBackend {
    fn complete(
        &self,
        game_key: &str,
        turn_index: u32,
        history: &[ChatTurn],
        _budget_words: u32,
    ) -> Result<String, GatewayError> {
        check_history(history)?;
        let prompt = history
            .last()
            .filter(|t| t.role == ChatRole::User)
            .map(|t| t.content.as_str())
            .unwrap_or("");
        let mut rng = self.rng_for(game_key, turn_index);
        use crate::catalog::GameMove;

        let reply = if prompt.contains("Please confirm you are ready") {
            "We are ready to proceed with the second move.".to_string()
        } else if prompt.starts_with("Simulate a conversation")
            || prompt.starts_with("Continue the conversation")
        {
            format!(
                "The players weigh their options. Speaker {} favors caution while speaker {} \
                 urges a firmer posture; the team agrees to keep deliberating.",
                rng.gen_range(1..=6),
                rng.gen_range(1..=6)
            )
        } else if prompt.contains("Select your orders for engaging") {
            if self.noncompliant {
                "The committee remains undecided at this time.".to_string()
            } else {
                self.pick_selection(&mut rng, GameMove::Move1)
            }
        } else if prompt.contains("Select Your Response Actions") {
            if self.noncompliant {
                "The committee remains undecided at this time.".to_string()
            } else {
                self.pick_selection(&mut rng, GameMove::Move2)
            }
        } else if prompt.contains("Course of Action") {
            "Pursue a calibrated mix of deterrence and diplomacy over the coming week.".to_string()
        } else if prompt.contains("Desired End State") {
            "A de-escalated standoff with freedom of navigation restored and no further \
             casualties on either side."
                .to_string()
        } else if prompt.contains("Restate the team's final selection") {
            // Format reminder: comply on the retry unless configured not to.
            if self.noncompliant {
                "No comment.".to_string()
            } else {
                let mv = if history.iter().any(|t| t.content.contains("Select Your Response Actions"))
                {
                    GameMove::Move2
                } else {
                    GameMove::Move1
                };
                self.pick_selection(&mut rng, mv)
            }
        } else {
            "Understood.".to_string()
        };
        Ok(reply)
    }

    fn descriptor(&self) -> String {
        format!("synthetic:seed={}", self.seed)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_budget_examples() {
        assert_eq!(word_budget_hint(350).unwrap(), 490);
        assert_eq!(word_budget_hint(1050).unwrap(), 1470);
        assert!(matches!(word_budget_hint(0), Err(GatewayError::Precondition(_))));
    }

    #[test]
    fn scripted_lookup_and_miss() {
        let mut backend = ScriptedBackend::new();
        backend.insert("g1", 0, "canned reply");
        let history = [ChatTurn::system("sys"), ChatTurn::user("hello")];
        assert_eq!(backend.complete("g1", 0, &history, 100).unwrap(), "canned reply");
        let err = backend.complete("g1", 1, &history, 100).unwrap_err();
        assert!(matches!(err, GatewayError::FixtureMiss { turn_index: 1, .. }));
    }

    #[test]
    fn scripted_json_round_trip() {
        let mut backend = ScriptedBackend::new();
        backend.insert("g1", 0, "a");
        backend.insert("g2", 3, "b");
        let reloaded = ScriptedBackend::from_json(&backend.to_json()).unwrap();
        assert_eq!(reloaded.len(), 2);
        let history = [ChatTurn::system("sys")];
        assert_eq!(reloaded.complete("g2", 3, &history, 10).unwrap(), "b");
    }

    #[test]
    fn history_must_start_with_system_turn() {
        let backend = SyntheticBackend::new(1);
        let err = backend.complete("g", 0, &[ChatTurn::user("hi")], 10).unwrap_err();
        assert!(matches!(err, GatewayError::Precondition(_)));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let backend = SyntheticBackend::new(42);
        let history = [
            ChatTurn::system("sys"),
            ChatTurn::user("Select your orders for engaging (select all that apply)"),
        ];
        let a = backend.complete("game-1", 5, &history, 100).unwrap();
        let b = backend.complete("game-1", 5, &history, 100).unwrap();
        assert_eq!(a, b);
        let c = backend.complete("game-2", 5, &history, 100).unwrap();
        assert_ne!(a, c, "different games should usually differ");
        // The selection answer must be parseable.
        let parsed = crate::parse::parse_selection(&a, crate::catalog::GameMove::Move1).unwrap();
        assert!(parsed.vector.chosen_count(crate::catalog::GameMove::Move1) > 0);
    }

    #[test]
    fn token_bucket_respects_capacity() {
        let start = Instant::now();
        let mut bucket = TokenBucket::new(2, start);
        assert!(bucket.try_acquire(start));
        assert!(bucket.try_acquire(start));
        assert!(!bucket.try_acquire(start), "cap of 2 exhausted");
        // After 30 seconds one token has refilled.
        assert!(bucket.try_acquire(start + Duration::from_secs(30)));
        assert!(!bucket.try_acquire(start + Duration::from_secs(30)));
    }

    #[test]
    fn backoff_is_bounded() {
        let mut total = Duration::ZERO;
        for attempt in 0..32 {
            let d = HttpBackend::backoff_delay(attempt);
            assert!(d <= BACKOFF_MAX_SLEEP);
            if total + d > BACKOFF_TOTAL_CAP {
                break;
            }
            total += d;
        }
        assert!(total <= BACKOFF_TOTAL_CAP);
    }

    /// Minimal one-connection-per-response HTTP stub for exercising the
    /// client's status handling without a real endpoint.
    fn stub_server(
        responses: Vec<(u16, String)>,
    ) -> (String, std::sync::Arc<std::sync::atomic::AtomicUsize>) {
        use std::io::{Read, Write};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = std::sync::Arc::new(std::sync::atomic::AtomicUsize::new(0));
        let hits_thread = hits.clone();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = Vec::new();
                let mut tmp = [0u8; 4096];
                let header_end = loop {
                    let n = stream.read(&mut tmp).unwrap();
                    buf.extend_from_slice(&tmp[..n]);
                    if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                        break pos + 4;
                    }
                };
                let headers = String::from_utf8_lossy(&buf[..header_end]).to_ascii_lowercase();
                let content_length: usize = headers
                    .lines()
                    .find_map(|l| l.strip_prefix("content-length:"))
                    .map(|v| v.trim().parse().unwrap())
                    .unwrap_or(0);
                while buf.len() < header_end + content_length {
                    let n = stream.read(&mut tmp).unwrap();
                    buf.extend_from_slice(&tmp[..n]);
                }
                hits_thread.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}"), hits)
    }

    fn stub_config(base_url: String, key_env: &str) -> EndpointConfig {
        EndpointConfig {
            base_url,
            model_name: "test-model".to_string(),
            api_key_env: key_env.to_string(),
            max_retries: 3,
            request_timeout_secs: 5,
            per_minute_request_cap: 600,
            sampling_temperature: 1.0,
        }
    }

    #[test]
    fn http_auth_failure_is_permanent() {
        let (url, hits) = stub_server(vec![(401, "{}".to_string())]);
        std::env::set_var("WARGAME_TEST_KEY_A", "k");
        let backend = HttpBackend::new(stub_config(url, "WARGAME_TEST_KEY_A")).unwrap();
        let history = [ChatTurn::system("sys"), ChatTurn::user("hi")];
        let err = backend.complete("g", 0, &history, 50).unwrap_err();
        assert!(matches!(err, GatewayError::Auth));
        // A 401 must not burn the retry budget.
        assert_eq!(hits.load(std::sync::atomic::Ordering::SeqCst), 1);
    }

    #[test]
    fn http_server_error_is_retried_until_success() {
        let ok = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "hello back"}}]
        })
        .to_string();
        let (url, hits) = stub_server(vec![(500, "oops".to_string()), (200, ok)]);
        std::env::set_var("WARGAME_TEST_KEY_B", "k");
        let backend = HttpBackend::new(stub_config(url, "WARGAME_TEST_KEY_B")).unwrap();
        let history = [ChatTurn::system("sys"), ChatTurn::user("hi")];
        let reply = backend.complete("g", 0, &history, 50).unwrap();
        assert_eq!(reply, "hello back");
        assert_eq!(hits.load(std::sync::atomic::Ordering::SeqCst), 2);
    }

    #[test]
    fn missing_api_key_env_is_auth_error_without_a_request() {
        let config = stub_config("http://127.0.0.1:9".to_string(), "WARGAME_TEST_KEY_UNSET");
        let backend = HttpBackend::new(config).unwrap();
        let history = [ChatTurn::system("sys")];
        let err = backend.complete("g", 0, &history, 50).unwrap_err();
        assert!(matches!(err, GatewayError::Auth));
    }

    #[test]
    fn transcript_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transcript.jsonl");
        let log = TranscriptLog::open(&path).unwrap();
        let history = vec![ChatTurn::system("s"), ChatTurn::user("u")];
        log.append(&TranscriptEntry {
            timestamp: "2026-01-01T00:00:00Z".to_string(),
            game_key: "g".to_string(),
            turn_index: 0,
            request_hash: request_hash(&history, 100),
            request: history.clone(),
            response: "r".to_string(),
        })
        .unwrap();
        let entries = TranscriptLog::read_all(&path).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].request, history);
        assert_eq!(entries[0].request_hash, request_hash(&history, 100));
    }
}
