use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine;
use serde_json::{json, Value};

use super::prompts::Prompt;
use super::{parse_reply, AnswerSource, ReasonerAnswer, ReasonerError};
use crate::matching::RgbImage;

pub const ENV_URL: &str = "SHELF_REASONER_URL";
pub const ENV_KEY: &str = "SHELF_REASONER_KEY";
pub const ENV_MODEL: &str = "SHELF_REASONER_MODEL";

/// Multimodal chat endpoint: one prompt plus one image in, text out.
pub trait ChatClient: Send + Sync {
    fn complete(&self, prompt: &Prompt, image: &RgbImage) -> Result<String, ReasonerError>;
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            api_key: None,
            model: model.into(),
            timeout: Duration::from_secs(10),
            max_retries: 2,
        }
    }

    /// `None` when no endpoint URL is configured.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var(ENV_URL).ok().filter(|u| !u.is_empty())?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4o".to_string());
        let mut cfg = Self::new(url, model);
        cfg.api_key = std::env::var(ENV_KEY).ok().filter(|k| !k.is_empty());
        Some(cfg)
    }
}

/// OpenAI-compatible chat-completion client.
pub struct HttpChatClient {
    cfg: RemoteConfig,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn new(cfg: RemoteConfig) -> Result<Self, ReasonerError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ReasonerError::Endpoint(e.to_string()))?;
        Ok(Self { cfg, http })
    }

    pub fn request_body(&self, prompt: &Prompt, image: &RgbImage) -> Value {
        let png = base64::engine::general_purpose::STANDARD.encode(image.encode_png());
        json!({
            "model": self.cfg.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": [
                    {"type": "text", "text": prompt.user},
                    {"type": "image_url", "image_url": {"url": format!("data:image/png;base64,{png}")}},
                ]},
            ],
        })
    }

    fn attempt(&self, body: &Value) -> Result<String, ReasonerError> {
        let mut req = self.http.post(&self.cfg.url).json(body);
        if let Some(key) = &self.cfg.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ReasonerError::Endpoint(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ReasonerError::Endpoint(format!("HTTP {status}")));
        }
        let reply: Value = resp.json().map_err(|e| ReasonerError::Endpoint(e.to_string()))?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ReasonerError::Endpoint("reply has no message content".into()))
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &Prompt, image: &RgbImage) -> Result<String, ReasonerError> {
        let body = self.request_body(prompt, image);
        let mut last = None;
        for attempt in 0..=self.cfg.max_retries {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(err) => {
                    tracing::warn!(attempt, %err, "reasoner endpoint failed");
                    last = Some(err);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

/// Scripted replies for tests; errors once the script runs out.
#[derive(Debug, Default)]
pub struct MockChatClient {
    replies: Mutex<VecDeque<Result<String, ReasonerError>>>,
    fixed: Option<String>,
    prompts: Mutex<Vec<Prompt>>,
}

impl MockChatClient {
    pub fn scripted(replies: impl IntoIterator<Item = Result<String, ReasonerError>>) -> Self {
        Self {
            replies: Mutex::new(replies.into_iter().collect()),
            ..Self::default()
        }
    }

    /// Same reply to every request.
    pub fn always(reply: impl Into<String>) -> Self {
        Self {
            fixed: Some(reply.into()),
            ..Self::default()
        }
    }

    pub fn prompts(&self) -> Vec<Prompt> {
        self.prompts.lock().expect("mock lock").clone()
    }
}

impl ChatClient for MockChatClient {
    fn complete(&self, prompt: &Prompt, _image: &RgbImage) -> Result<String, ReasonerError> {
        self.prompts.lock().expect("mock lock").push(prompt.clone());
        if let Some(f) = &self.fixed {
            return Ok(f.clone());
        }
        self.replies
            .lock()
            .expect("mock lock")
            .pop_front()
            .unwrap_or_else(|| Err(ReasonerError::Endpoint("mock endpoint exhausted".into())))
    }
}

/// Sends the prompt and frame to the endpoint and parses the reply.
pub fn remote_reason(prompt: &Prompt, image: &RgbImage, client: &dyn ChatClient) -> Result<ReasonerAnswer, ReasonerError> {
    let text = client.complete(prompt, image)?;
    let parsed = parse_reply(&text)?;
    Ok(ReasonerAnswer {
        text: text.trim().to_string(),
        parsed,
        source: AnswerSource::Remote,
    })
}
