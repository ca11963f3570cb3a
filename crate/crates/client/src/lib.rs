//! Async client for the mhcd HTTP service. Request and response bodies are the
//! types of [`mhcd_core::protocol`].

use mhcd_core::engine::RunStats;
use mhcd_core::protocol::*;
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("{kind}: {message}")]
    Api {
        status: StatusCode,
        kind: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn send<B: Serialize, T: DeserializeOwned>(&self, method: Method, path: &str, body: Option<&B>) -> Result<T> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        Err(match serde_json::from_str::<ErrorBody>(&text) {
            Ok(e) => ClientError::Api {
                status,
                kind: e.kind,
                message: e.message,
            },
            Err(_) => ClientError::Api {
                status,
                kind: "http".into(),
                message: text,
            },
        })
    }

    pub async fn health(&self) -> Result<Health> {
        self.send::<(), _>(Method::GET, "/health", None).await
    }

    pub async fn detect(&self, req: &DetectRequest) -> Result<DetectResponse> {
        self.send(Method::POST, "/v1/detect", Some(req)).await
    }

    pub async fn oracle(&self, req: &OracleRequest) -> Result<OracleResponse> {
        self.send(Method::POST, "/v1/oracle", Some(req)).await
    }

    pub async fn bench(&self, req: &BenchRequest) -> Result<BenchResponse> {
        self.send(Method::POST, "/v1/bench", Some(req)).await
    }

    pub async fn stream(&self, req: &StreamRequest) -> Result<StreamResponse> {
        self.send(Method::POST, "/v1/stream", Some(req)).await
    }

    pub async fn create_session(&self, req: &CreateSession) -> Result<SessionCreated> {
        self.send(Method::POST, "/v1/sessions", Some(req)).await
    }

    pub async fn push_events(&self, id: u64, events: impl Into<String>) -> Result<EventsApplied> {
        let body = PushEvents { events: events.into() };
        self.send(Method::POST, &format!("/v1/sessions/{id}/events"), Some(&body)).await
    }

    pub async fn session_assignment(&self, id: u64) -> Result<String> {
        let r: AssignmentResponse = self
            .send::<(), _>(Method::GET, &format!("/v1/sessions/{id}/assignment"), None)
            .await?;
        Ok(r.assignment)
    }

    pub async fn session_stats(&self, id: u64) -> Result<RunStats> {
        self.send::<(), _>(Method::GET, &format!("/v1/sessions/{id}/stats"), None).await
    }

    pub async fn delete_session(&self, id: u64) -> Result<()> {
        let resp = self
            .http
            .delete(format!("{}/v1/sessions/{id}", self.base))
            .send()
            .await?;
        if resp.status().is_success() {
            return Ok(());
        }
        let status = resp.status();
        let e: ErrorBody = resp.json().await?;
        Err(ClientError::Api {
            status,
            kind: e.kind,
            message: e.message,
        })
    }
}
