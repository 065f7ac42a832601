use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::read_npy;
use crate::error::{Error, Result};
use crate::prng::randn;
use crate::secure::{chacha_randn, SecureSeed};
use crate::seed::Seed;
use crate::tensor::{LatentVector, Tensor};

/// A deterministic generator `(prefix, modifiers, seed) -> latent` with a
/// fixed output shape.
pub trait GeneratorOracle: Send + Sync {
    fn name(&self) -> &str;

    fn generate(&self, prefix: &str, modifiers: &[String], seed: Seed) -> Result<LatentVector>;

    /// The most recent request and response, for oracles that talk to
    /// another process.
    fn last_exchange(&self) -> Option<String> {
        None
    }
}

/// Weight of the prompt field in a mock latent. With unit-variance fields,
/// `MSE(z, ε_seed) = 2 - 2 sqrt(1 - λ)`, which is 1.0 at `λ = 0.75`.
pub const MOCK_LAMBDA: f64 = 0.75;

/// Weight of the modifier component inside the prompt field.
pub const MOCK_STYLE: f64 = 0.5;

/// Synthetic generator: `z = sqrt(1-λ) ε_seed + sqrt(λ) g(prompt)` where
/// `ε_seed` is the framework noise for `seed` and
/// `g = sqrt(1-β) f(prefix) + sqrt(β) Σ f(m) / sqrt(k)` over the `k`
/// modifiers (`g = f(prefix)` when `k = 0`). Each `f` is an independent
/// unit-normal field keyed by a hash of its string.
pub struct MockOracle {
    shape: Vec<usize>,
    lambda: f64,
    style: f64,
    fields: RwLock<HashMap<String, Arc<Vec<f32>>>>,
}

impl MockOracle {
    pub fn new(shape: &[usize]) -> Result<Self> {
        Self::with_weights(shape, MOCK_LAMBDA, MOCK_STYLE)
    }

    pub fn with_weights(shape: &[usize], lambda: f64, style: f64) -> Result<Self> {
        crate::tensor::element_count(shape)?;
        if !(0.0..=1.0).contains(&lambda) || !(0.0..=1.0).contains(&style) {
            return Err(Error::Config("mock weights must lie in [0, 1]".into()));
        }
        Ok(Self {
            shape: shape.to_vec(),
            lambda,
            style,
            fields: RwLock::new(HashMap::new()),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn field(&self, key: String) -> Result<Arc<Vec<f32>>> {
        if let Some(f) = self.fields.read().expect("field cache poisoned").get(&key) {
            return Ok(f.clone());
        }
        let digest: [u8; 32] = Sha256::digest(key.as_bytes()).into();
        let f = Arc::new(chacha_randn(&SecureSeed::new(digest), &self.shape)?.into_data());
        let mut cache = self.fields.write().expect("field cache poisoned");
        Ok(cache.entry(key).or_insert(f).clone())
    }

    /// The prompt field `g`, independent of the seed.
    pub fn prompt_field(&self, prefix: &str, modifiers: &[String]) -> Result<Vec<f64>> {
        let base = self.field(format!("seedscan-mock/prefix/{prefix}"))?;
        if modifiers.is_empty() {
            return Ok(base.iter().map(|&v| f64::from(v)).collect());
        }
        let a = (1.0 - self.style).sqrt();
        let b = (self.style / modifiers.len() as f64).sqrt();
        let mut g: Vec<f64> = base.iter().map(|&v| a * f64::from(v)).collect();
        for m in modifiers {
            let f = self.field(format!("seedscan-mock/modifier/{m}"))?;
            for (acc, &v) in g.iter_mut().zip(f.iter()) {
                *acc += b * f64::from(v);
            }
        }
        Ok(g)
    }
}

impl GeneratorOracle for MockOracle {
    fn name(&self) -> &str {
        "mock"
    }

    fn generate(&self, prefix: &str, modifiers: &[String], seed: Seed) -> Result<LatentVector> {
        let eps = randn(seed, &self.shape)?;
        let g = self.prompt_field(prefix, modifiers)?;
        let (a, b) = ((1.0 - self.lambda).sqrt(), self.lambda.sqrt());
        let data = eps
            .data()
            .iter()
            .zip(&g)
            .map(|(&e, &g)| (a * f64::from(e) + b * g) as f32)
            .collect();
        Tensor::new(data, self.shape.clone())
    }
}

/// One request line of the stdio protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub id: u64,
    pub prefix: String,
    pub modifiers: Vec<String>,
    pub seed: Seed,
}

/// One response line: a latent path on success, an error message otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    shape: Option<Vec<usize>>,
    last_exchange: String,
}

/// Out-of-process oracle speaking line-delimited JSON over the standard
/// streams of `sh -c CMD`. Requests are serialized; the latent shape of the
/// first response is pinned for the rest of the session.
pub struct ExecOracle {
    name: String,
    timeout: Duration,
    session: Mutex<Session>,
}

impl ExecOracle {
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self> {
        let name = format!("exec:{command}");
        let launch = |reason: String| Error::Oracle {
            oracle: name.clone(),
            reason,
        };
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| launch(format!("launch failed: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            name,
            timeout,
            session: Mutex::new(Session {
                child,
                stdin,
                lines,
                next_id: 0,
                shape: None,
                last_exchange: String::new(),
            }),
        })
    }

    fn fail(&self, s: &Session, reason: impl std::fmt::Display) -> Error {
        Error::Oracle {
            oracle: self.name.clone(),
            reason: format!("{reason}; last exchange: {}", s.last_exchange),
        }
    }

    fn exit_note(s: &mut Session) -> String {
        match s.child.try_wait() {
            Ok(Some(status)) => format!(" (process exited with {status})"),
            _ => String::new(),
        }
    }
}

impl GeneratorOracle for ExecOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, prefix: &str, modifiers: &[String], seed: Seed) -> Result<LatentVector> {
        let mut s = self.session.lock().unwrap_or_else(|p| p.into_inner());
        let id = s.next_id;
        s.next_id += 1;
        let req = OracleRequest {
            id,
            prefix: prefix.to_owned(),
            modifiers: modifiers.to_vec(),
            seed,
        };
        let line = serde_json::to_string(&req).expect("request serializes");
        s.last_exchange = format!(">> {line}");
        if let Err(e) = writeln!(s.stdin, "{line}").and_then(|_| s.stdin.flush()) {
            let note = Self::exit_note(&mut s);
            return Err(self.fail(&s, format!("write failed: {e}{note}")));
        }
        let reply = match s.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(self.fail(&s, format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(self.fail(&s, format!("no response within {:?}", self.timeout)));
            }
            Err(RecvTimeoutError::Disconnected) => {
                std::thread::sleep(Duration::from_millis(20));
                let note = Self::exit_note(&mut s);
                return Err(self.fail(&s, format!("output closed{note}")));
            }
        };
        s.last_exchange = format!(">> {line} << {reply}");
        let resp: OracleResponse =
            serde_json::from_str(&reply).map_err(|e| self.fail(&s, format!("malformed response: {e}")))?;
        if resp.id != id {
            return Err(self.fail(&s, format!("response id {} for request {id}", resp.id)));
        }
        if let Some(err) = resp.error {
            return Err(self.fail(&s, format!("generation failed: {err}")));
        }
        let path = resp
            .latent_path
            .ok_or_else(|| self.fail(&s, "response has neither latent_path nor error"))?;
        let latent = read_npy(&path).map_err(|e| self.fail(&s, e))?;
        match &s.shape {
            None => s.shape = Some(latent.shape().to_vec()),
            Some(shape) if shape != latent.shape() => {
                return Err(self.fail(
                    &s,
                    format!("shape contract violated: {:?} after {shape:?}", latent.shape()),
                ));
            }
            Some(_) => {}
        }
        Ok(latent)
    }

    fn last_exchange(&self) -> Option<String> {
        Some(
            self.session
                .lock()
                .unwrap_or_else(|p| p.into_inner())
                .last_exchange
                .clone(),
        )
    }
}

impl Drop for ExecOracle {
    fn drop(&mut self) {
        let s = self.session.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = s.child.kill();
        let _ = s.child.wait();
    }
}
