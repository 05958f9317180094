//! HTTP client for the text-to-3D generation service.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use quadforge::error::{Error, Result};
use serde::Deserialize;

/// The structured prompt wrapped around a 1–3 word user description.
pub fn render_prompt(description: &str) -> Result<String> {
    let words = description.split_whitespace().count();
    if !(1..=3).contains(&words) {
        return Err(Error::Config(format!(
            "description must be one to three words, got {words}: {description:?}"
        )));
    }
    Ok(format!("Quadrupedal walking robot resembling a \"{description}\""))
}

#[derive(Debug, Deserialize)]
struct GenerateResponse {
    candidates: Vec<CandidateEntry>,
}

#[derive(Debug, Deserialize)]
struct CandidateEntry {
    id: String,
    format: String,
    data_base64: String,
}

/// One downloaded candidate mesh.
pub struct CandidatePayload {
    pub id: String,
    pub bytes: Vec<u8>,
}

/// Requests `count` candidates for the rendered prompt.
pub fn request_candidates(
    endpoint: &str,
    api_key: &str,
    prompt: &str,
    count: usize,
) -> Result<Vec<CandidatePayload>> {
    let url = format!("{}/v1/generate", endpoint.trim_end_matches('/'));
    let payload = serde_json::json!({ "prompt": prompt, "count": count });
    let mut response = ureq::post(&url)
        .header("authorization", format!("Bearer {api_key}"))
        .send_json(&payload)
        .map_err(|e| Error::Ingestion(format!("request to {url} failed: {e}")))?;
    let parsed: GenerateResponse = response
        .body_mut()
        .read_json()
        .map_err(|e| Error::Ingestion(format!("bad service response: {e}")))?;
    parsed
        .candidates
        .into_iter()
        .map(|c| {
            if c.format != "stl" {
                return Err(Error::Ingestion(format!(
                    "candidate {} has unsupported format {:?}",
                    c.id, c.format
                )));
            }
            let bytes = BASE64
                .decode(c.data_base64.as_bytes())
                .map_err(|e| Error::Ingestion(format!("candidate {}: {e}", c.id)))?;
            Ok(CandidatePayload { id: c.id, bytes })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_template_wraps_the_description() {
        let p = render_prompt("sea turtle").unwrap();
        assert_eq!(p, "Quadrupedal walking robot resembling a \"sea turtle\"");
    }

    #[test]
    fn four_word_description_is_rejected() {
        assert!(render_prompt("a very fancy dog").is_err());
        assert!(render_prompt("").is_err());
    }
}
