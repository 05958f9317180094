//! Evaluation exchange with an external trainer: newline-delimited JSON
//! over a child process's standard streams, or a watched directory pair.
//! Schema-versioned; responses are validated for shape and finiteness.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::result::EvaluationResult;
use crate::error::{Error, Result};
use crate::reward::CommandProfile;

/// Exchange schema version.
pub const PROTOCOL_SCHEMA: u32 = 1;

/// One evaluation request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRequest {
    pub schema: u32,
    pub id: String,
    /// Path to the exported URDF (meshes sit next to it).
    pub urdf: String,
    pub command: CommandProfile,
    pub preference: String,
    pub seed: u64,
}

impl EvalRequest {
    pub fn new(
        id: impl Into<String>,
        urdf: impl Into<String>,
        command: CommandProfile,
        preference: &str,
        seed: u64,
    ) -> Self {
        EvalRequest {
            schema: PROTOCOL_SCHEMA,
            id: id.into(),
            urdf: urdf.into(),
            command,
            preference: preference.to_string(),
            seed,
        }
    }
}

/// One evaluation response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResponse {
    pub schema: u32,
    pub id: String,
    pub fitness: f64,
    pub mean_episode_reward: f64,
    pub velocity_term_sum: f64,
    pub energy_term_sum: f64,
    #[serde(default)]
    pub gait_params: Option<serde_json::Value>,
    #[serde(default)]
    pub error: Option<String>,
}

impl EvalResponse {
    pub fn into_result(self, seed: u64) -> EvaluationResult {
        EvaluationResult {
            mean_episode_reward: self.mean_episode_reward,
            velocity_term_sum: self.velocity_term_sum,
            energy_term_sum: self.energy_term_sum,
            fitness: self.fitness,
            gait_params: None,
            seed,
            failed: false,
        }
    }
}

/// Where the evaluator lives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Endpoint {
    /// Spawn a child per request; one JSON line in on stdin, one out on
    /// stdout.
    Subprocess { program: String, args: Vec<String> },
    /// Drop `<id>.json` into `requests`, poll `responses/<id>.json`.
    Directory { requests: PathBuf, responses: PathBuf },
}

/// External evaluator client with timeout and retry.
#[derive(Debug, Clone)]
pub struct ExternalEvaluator {
    pub endpoint: Endpoint,
    pub timeout: Duration,
    pub retries: u32,
}

impl ExternalEvaluator {
    pub fn new(endpoint: Endpoint) -> Self {
        Self { endpoint, timeout: Duration::from_secs(3600), retries: 1 }
    }

    /// Round-trips one request, retrying once (by default) on failure.
    pub fn evaluate(&self, request: &EvalRequest) -> Result<EvalResponse> {
        let mut last_err = None;
        for _attempt in 0..=self.retries {
            match self.evaluate_once(request) {
                Ok(resp) => return Ok(resp),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt ran"))
    }

    fn evaluate_once(&self, request: &EvalRequest) -> Result<EvalResponse> {
        let raw = match &self.endpoint {
            Endpoint::Subprocess { program, args } => {
                self.subprocess_round_trip(program, args, request)?
            }
            Endpoint::Directory { requests, responses } => {
                self.directory_round_trip(requests, responses, request)?
            }
        };
        let resp: EvalResponse = serde_json::from_str(&raw)
            .map_err(|e| Error::MalformedResponse(format!("{e}: {raw:.200}")))?;
        validate_response(&resp, request)?;
        Ok(resp)
    }

    fn subprocess_round_trip(
        &self,
        program: &str,
        args: &[String],
        request: &EvalRequest,
    ) -> Result<String> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Evaluation(format!("cannot spawn {program}: {e}")))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let line = serde_json::to_string(request)?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .map_err(|e| Error::Evaluation(format!("write to evaluator failed: {e}")))?;
        drop(stdin);

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        // Detached reader: joining could block on pipes held open by
        // grandchildren that outlive the kill.
        std::thread::spawn(move || {
            let mut line = String::new();
            let res = BufReader::new(stdout).read_line(&mut line).map(|_| line);
            let _ = tx.send(res);
        });
        let outcome = rx.recv_timeout(self.timeout);
        let raw = match outcome {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Evaluation(format!("evaluator read failed: {e}")));
            }
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::EvaluationTimeout { seconds: self.timeout.as_secs() });
            }
        };
        let status = child
            .wait()
            .map_err(|e| Error::Evaluation(format!("evaluator wait failed: {e}")))?;
        if !status.success() {
            return Err(Error::Evaluation(format!(
                "evaluator exited with {status}"
            )));
        }
        if raw.trim().is_empty() {
            return Err(Error::MalformedResponse("evaluator produced no output".into()));
        }
        Ok(raw)
    }

    fn directory_round_trip(
        &self,
        requests: &PathBuf,
        responses: &PathBuf,
        request: &EvalRequest,
    ) -> Result<String> {
        std::fs::create_dir_all(requests)?;
        std::fs::create_dir_all(responses)?;
        // Write-then-rename so watchers never see a partial request.
        let tmp = requests.join(format!(".{}.tmp", request.id));
        let dst = requests.join(format!("{}.json", request.id));
        std::fs::write(&tmp, serde_json::to_string(request)?)?;
        std::fs::rename(&tmp, &dst)?;

        let reply = responses.join(format!("{}.json", request.id));
        let deadline = Instant::now() + self.timeout;
        loop {
            if reply.exists() {
                let raw = std::fs::read_to_string(&reply)?;
                if !raw.trim().is_empty() {
                    return Ok(raw);
                }
            }
            if Instant::now() >= deadline {
                return Err(Error::EvaluationTimeout { seconds: self.timeout.as_secs() });
            }
            std::thread::sleep(Duration::from_millis(20));
        }
    }
}

fn validate_response(resp: &EvalResponse, request: &EvalRequest) -> Result<()> {
    if resp.schema != PROTOCOL_SCHEMA {
        return Err(Error::MalformedResponse(format!(
            "schema {} (expected {PROTOCOL_SCHEMA})",
            resp.schema
        )));
    }
    if resp.id != request.id {
        return Err(Error::MalformedResponse(format!(
            "response id {:?} does not match request {:?}",
            resp.id, request.id
        )));
    }
    if let Some(err) = &resp.error {
        return Err(Error::Evaluation(format!("evaluator reported: {err}")));
    }
    let values = [
        resp.fitness,
        resp.mean_episode_reward,
        resp.velocity_term_sum,
        resp.energy_term_sum,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedResponse("non-finite value in response".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh_double(script: &str) -> ExternalEvaluator {
        ExternalEvaluator {
            endpoint: Endpoint::Subprocess {
                program: "/bin/sh".into(),
                args: vec!["-c".into(), script.into()],
            },
            timeout: Duration::from_millis(2000),
            retries: 1,
        }
    }

    fn request() -> EvalRequest {
        EvalRequest::new("r1", "/tmp/robot.urdf", CommandProfile::default(), "none", 7)
    }

    #[test]
    fn echo_double_round_trips() {
        let script = r#"read line; printf '%s\n' '{"schema":1,"id":"r1","fitness":1.0,"mean_episode_reward":1.0,"velocity_term_sum":0.5,"energy_term_sum":0.25}'"#;
        let resp = sh_double(script).evaluate(&request()).unwrap();
        assert_eq!(resp.fitness, 1.0);
        assert_eq!(resp.id, "r1");
        let result = resp.into_result(7);
        assert_eq!(result.fitness, 1.0);
        assert!(!result.failed);
    }

    #[test]
    fn missing_fitness_field_is_malformed() {
        let script = r#"read line; printf '%s\n' '{"schema":1,"id":"r1","mean_episode_reward":1.0,"velocity_term_sum":0,"energy_term_sum":0}'"#;
        let err = sh_double(script).evaluate(&request()).unwrap_err();
        assert!(matches!(err, Error::MalformedResponse(_)), "{err}");
    }

    #[test]
    fn wrong_id_is_malformed() {
        let script = r#"read line; printf '%s\n' '{"schema":1,"id":"other","fitness":1,"mean_episode_reward":1,"velocity_term_sum":0,"energy_term_sum":0}'"#;
        let err = sh_double(script).evaluate(&request()).unwrap_err();
        assert!(matches!(err, Error::MalformedResponse(_)));
    }

    #[test]
    fn timeout_then_failure_after_one_retry() {
        let mut double = sh_double("sleep 5");
        double.timeout = Duration::from_millis(150);
        let t0 = Instant::now();
        let err = double.evaluate(&request()).unwrap_err();
        assert!(matches!(err, Error::EvaluationTimeout { .. }));
        // Two attempts (one retry), each bounded by the timeout.
        let elapsed = t0.elapsed();
        assert!(
            elapsed >= Duration::from_millis(300) && elapsed < Duration::from_millis(2500),
            "elapsed {elapsed:?}"
        );
    }

    #[test]
    fn nonzero_exit_is_an_evaluation_error() {
        let err = sh_double("read line; exit 3").evaluate(&request()).unwrap_err();
        assert!(matches!(err, Error::Evaluation(_)), "{err}");
    }

    #[test]
    fn directory_exchange_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let requests = dir.path().join("req");
        let responses = dir.path().join("resp");
        let eval = ExternalEvaluator {
            endpoint: Endpoint::Directory {
                requests: requests.clone(),
                responses: responses.clone(),
            },
            timeout: Duration::from_secs(5),
            retries: 0,
        };
        let req = request();
        // A stand-in worker answering from another thread.
        let worker = {
            let (requests, responses) = (requests.clone(), responses.clone());
            std::thread::spawn(move || {
                let req_path = requests.join("r1.json");
                while !req_path.exists() {
                    std::thread::sleep(Duration::from_millis(5));
                }
                let parsed: EvalRequest =
                    serde_json::from_str(&std::fs::read_to_string(&req_path).unwrap()).unwrap();
                std::fs::create_dir_all(&responses).unwrap();
                let resp = serde_json::json!({
                    "schema": 1, "id": parsed.id, "fitness": 2.5,
                    "mean_episode_reward": 2.0, "velocity_term_sum": 0.1,
                    "energy_term_sum": 0.3,
                });
                std::fs::write(responses.join("r1.json"), resp.to_string()).unwrap();
            })
        };
        let resp = eval.evaluate(&req).unwrap();
        worker.join().unwrap();
        assert_eq!(resp.fitness, 2.5);
    }
}
