//! Bundled mock text-to-3D service: a tiny HTTP/1.1 server answering
//! `POST /v1/generate` with base64-encoded STL candidates. Ships with the
//! repo so no test depends on a paid external service.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use quadforge::error::{Error, Result};
use quadforge::shapes::{synthetic_quadruped, QuadrupedParams};

/// Where candidate meshes come from.
#[derive(Debug, Clone)]
pub enum MockFixtures {
    /// Serve every `.stl` in a directory, sorted by name.
    Dir(PathBuf),
    /// Procedural candidates: a sound creature, one with a detached blob
    /// (connectivity failure), and one with a missing leg (symmetry
    /// failure).
    Builtin,
}

fn builtin_candidates() -> Vec<(String, Vec<u8>)> {
    let sound = synthetic_quadruped(&QuadrupedParams::default());
    let blob = synthetic_quadruped(&QuadrupedParams {
        extra_blob: true,
        ..QuadrupedParams::default()
    });
    let lame = synthetic_quadruped(&QuadrupedParams {
        drop_leg: Some(1),
        ..QuadrupedParams::default()
    });
    [("creature", sound), ("creature_blob", blob), ("creature_lame", lame)]
        .into_iter()
        .map(|(name, mesh)| (name.to_string(), stl_bytes(&mesh)))
        .collect()
}

fn stl_bytes(mesh: &quadforge::mesh::TriangleMesh) -> Vec<u8> {
    let dir = std::env::temp_dir().join(format!("mockmesh_{}.stl", std::process::id()));
    quadforge::mesh::save_stl_binary(mesh, &dir).expect("write temp stl");
    let bytes = std::fs::read(&dir).expect("read temp stl");
    let _ = std::fs::remove_file(&dir);
    bytes
}

impl MockFixtures {
    fn candidates(&self, count: usize) -> Result<Vec<(String, Vec<u8>)>> {
        let mut all = match self {
            MockFixtures::Builtin => builtin_candidates(),
            MockFixtures::Dir(dir) => {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "stl"))
                    .collect();
                entries.sort();
                entries
                    .into_iter()
                    .map(|p| {
                        let name = p.file_stem().unwrap().to_string_lossy().into_owned();
                        Ok((name, std::fs::read(&p)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        all.truncate(count.max(1));
        Ok(all)
    }
}

/// Serves requests until the listener errors (or forever). Binds are the
/// caller's job so tests can grab an ephemeral port first.
pub fn serve(listener: TcpListener, fixtures: MockFixtures) -> Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        // One candidate bank is cheap to build; regenerate per request to
        // stay stateless.
        if let Err(e) = handle(stream, &fixtures) {
            eprintln!("mock service: request failed: {e}");
        }
    }
    Ok(())
}

/// Serves exactly `n` requests, for tests.
pub fn serve_n(listener: TcpListener, fixtures: MockFixtures, n: usize) -> Result<()> {
    for stream in listener.incoming().take(n) {
        handle(stream?, &fixtures)?;
    }
    Ok(())
}

fn handle(stream: TcpStream, fixtures: &MockFixtures) -> Result<()> {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    let mut authorized = false;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(v) = lower.strip_prefix("content-length:") {
            content_length = v.trim().parse().unwrap_or(0);
        }
        if lower.starts_with("authorization:") && lower.contains("bearer") {
            authorized = true;
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let mut stream = reader.into_inner();

    let respond = |stream: &mut TcpStream, status: &str, body: &str| -> Result<()> {
        write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )?;
        Ok(())
    };

    if !request_line.starts_with("POST /v1/generate") {
        return respond(&mut stream, "404 Not Found", r#"{"error":"unknown endpoint"}"#);
    }
    if !authorized {
        return respond(&mut stream, "401 Unauthorized", r#"{"error":"missing bearer token"}"#);
    }
    let payload: serde_json::Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(_) => {
            return respond(&mut stream, "400 Bad Request", r#"{"error":"invalid JSON"}"#)
        }
    };
    let count = payload.get("count").and_then(|c| c.as_u64()).unwrap_or(4) as usize;
    if payload.get("prompt").and_then(|p| p.as_str()).unwrap_or("").is_empty() {
        return respond(&mut stream, "400 Bad Request", r#"{"error":"missing prompt"}"#);
    }

    let candidates = fixtures
        .candidates(count)
        .map_err(|e| Error::Ingestion(format!("fixture error: {e}")))?;
    let entries: Vec<serde_json::Value> = candidates
        .iter()
        .map(|(id, bytes)| {
            serde_json::json!({
                "id": id,
                "format": "stl",
                "data_base64": BASE64.encode(bytes),
            })
        })
        .collect();
    let body = serde_json::json!({ "candidates": entries }).to_string();
    respond(&mut stream, "200 OK", &body)
}
