//! Text standardization ahead of detection and embedding.

use unicode_normalization::UnicodeNormalization;

use crate::GatewayError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preprocessed {
    pub text: String,
    pub tokens: Vec<String>,
}

/// NFC, whitespace runs collapsed to one space and trimmed, optional
/// lowercasing. Tokens are the maximal alphanumeric runs.
pub fn preprocess(text: &str, lowercase: bool) -> Preprocessed {
    let nfc: String = text.nfc().collect();
    let mut out = nfc.split_whitespace().collect::<Vec<_>>().join(" ");
    if lowercase {
        out = out.to_lowercase();
    }
    let tokens = tokenize(&out);
    Preprocessed { text: out, tokens }
}

pub fn preprocess_bytes(bytes: &[u8], lowercase: bool) -> Result<Preprocessed, GatewayError> {
    let s = std::str::from_utf8(bytes)
        .map_err(|e| GatewayError::BadRequest(format!("invalid UTF-8 at byte {}", e.valid_up_to())))?;
    Ok(preprocess(s, lowercase))
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}
