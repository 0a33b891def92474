//! Pattern and checksum based PII detection.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use privlab_core::synthdata::{luhn_checksum, FIRST_NAMES, LAST_NAMES};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::PiiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PiiKind {
    Email,
    Ssn,
    CreditCard,
    Phone,
    PersonName,
}

impl PiiKind {
    pub const ALL: [PiiKind; 5] = [
        PiiKind::Email,
        PiiKind::Ssn,
        PiiKind::CreditCard,
        PiiKind::Phone,
        PiiKind::PersonName,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PiiKind::Email => "EMAIL",
            PiiKind::Ssn => "SSN",
            PiiKind::CreditCard => "CREDIT_CARD",
            PiiKind::Phone => "PHONE",
            PiiKind::PersonName => "PERSON_NAME",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Overlap tie-break rank; higher wins.
    fn priority(self) -> u8 {
        match self {
            PiiKind::CreditCard => 5,
            PiiKind::Ssn => 4,
            PiiKind::Phone => 3,
            PiiKind::Email => 2,
            PiiKind::PersonName => 1,
        }
    }

    fn confidence(self) -> f64 {
        match self {
            PiiKind::Email | PiiKind::CreditCard => 0.99,
            PiiKind::Ssn => 0.95,
            PiiKind::Phone => 0.9,
            PiiKind::PersonName => 0.8,
        }
    }
}

impl fmt::Display for PiiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detected entity; `value == text[start..end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiiSpan {
    pub kind: PiiKind,
    pub start: usize,
    pub end: usize,
    pub value: String,
    pub confidence: f64,
}

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?(?:\.[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?)*\.[A-Za-z]{2,}").unwrap()
    })
}

fn ssn_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d{3}-\d{2}-\d{4}").unwrap())
}

fn phone_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:\+1[ .\-]?)?(?:\(\d{3}\) ?\d{3}[ .\-]\d{4}|\d{3}[ .\-]\d{3}[ .\-]\d{4}|\d{10})").unwrap()
    })
}

fn digit_run_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:[ \-]\d+)*").unwrap())
}

fn names() -> &'static (HashSet<&'static str>, HashSet<&'static str>) {
    static SETS: OnceLock<(HashSet<&'static str>, HashSet<&'static str>)> = OnceLock::new();
    SETS.get_or_init(|| {
        (
            FIRST_NAMES.iter().copied().collect(),
            LAST_NAMES.iter().copied().collect(),
        )
    })
}

fn byte_before(text: &str, i: usize) -> Option<u8> {
    i.checked_sub(1).map(|j| text.as_bytes()[j])
}

fn byte_at(text: &str, i: usize) -> Option<u8> {
    text.as_bytes().get(i).copied()
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// True when the match is not glued to further digits or word characters.
fn isolated(text: &str, start: usize, end: usize) -> bool {
    !byte_before(text, start).is_some_and(|b| is_word_byte(b) || b == b'-' && byte_before(text, start - 1).is_some_and(|c| c.is_ascii_digit()))
        && !byte_at(text, end).is_some_and(|b| is_word_byte(b) || b == b'-' && byte_at(text, end + 1).is_some_and(|c| c.is_ascii_digit()))
}

pub fn is_email(s: &str) -> bool {
    email_re().find(s).is_some_and(|m| m.start() == 0 && m.end() == s.len())
}

/// `ddd-dd-dddd` with an area number that is not 000, 666 or 9xx.
pub fn is_ssn(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 11 || b[3] != b'-' || b[6] != b'-' {
        return false;
    }
    let digits_ok = b.iter().enumerate().all(|(i, c)| i == 3 || i == 6 || c.is_ascii_digit());
    let area = &s[..3];
    digits_ok && area != "000" && area != "666" && b[0] != b'9'
}

/// 11–19 digits, optionally grouped with single spaces or dashes, Luhn-valid.
pub fn is_card_number(s: &str) -> bool {
    let digits: String = s.chars().filter(char::is_ascii_digit).collect();
    let shape_ok = s.chars().all(|c| c.is_ascii_digit() || c == ' ' || c == '-')
        && !s.starts_with([' ', '-'])
        && !s.ends_with([' ', '-'])
        && !s.contains("  ")
        && !s.contains("--");
    shape_ok && (11..=19).contains(&digits.len()) && luhn_checksum(&digits).unwrap_or(false)
}

pub fn is_phone(s: &str) -> bool {
    phone_re().find(s).is_some_and(|m| m.start() == 0 && m.end() == s.len())
}

/// "First Last" with both halves in the bundled wordlists.
pub fn is_person_name(s: &str) -> bool {
    let (first, last) = names();
    match s.split_once(' ') {
        Some((f, l)) => first.contains(f) && last.contains(l),
        None => false,
    }
}

/// Re-checks a span against its kind's validator.
pub fn validate_span(text: &str, span: &PiiSpan) -> bool {
    let Some(v) = text.get(span.start..span.end) else {
        return false;
    };
    v == span.value
        && match span.kind {
            PiiKind::Email => is_email(v),
            PiiKind::Ssn => is_ssn(v),
            PiiKind::CreditCard => is_card_number(v),
            PiiKind::Phone => is_phone(v),
            PiiKind::PersonName => is_person_name(v),
        }
}

fn push(out: &mut Vec<PiiSpan>, text: &str, kind: PiiKind, start: usize, end: usize) {
    out.push(PiiSpan {
        kind,
        start,
        end,
        value: text[start..end].to_string(),
        confidence: kind.confidence(),
    });
}

fn email_candidates(text: &str, out: &mut Vec<PiiSpan>) {
    for m in email_re().find_iter(text) {
        push(out, text, PiiKind::Email, m.start(), m.end());
    }
}

fn ssn_candidates(text: &str, out: &mut Vec<PiiSpan>) {
    for m in ssn_re().find_iter(text) {
        if isolated(text, m.start(), m.end()) && is_ssn(m.as_str()) {
            push(out, text, PiiKind::Ssn, m.start(), m.end());
        }
    }
}

fn phone_candidates(text: &str, out: &mut Vec<PiiSpan>) {
    for m in phone_re().find_iter(text) {
        if isolated(text, m.start(), m.end()) {
            push(out, text, PiiKind::Phone, m.start(), m.end());
        }
    }
}

/// Splits each run of digit groups and keeps, scanning left to right, the
/// longest Luhn-valid sub-run of 11–19 digits starting at each group.
fn card_candidates(text: &str, out: &mut Vec<PiiSpan>) {
    let group_re = {
        static RE: OnceLock<Regex> = OnceLock::new();
        RE.get_or_init(|| Regex::new(r"\d+").unwrap())
    };
    for run in digit_run_re().find_iter(text) {
        let glued = |b: u8| b.is_ascii_alphabetic() || b == b'_';
        if byte_before(text, run.start()).is_some_and(glued) || byte_at(text, run.end()).is_some_and(glued) {
            continue;
        }
        let groups: Vec<(usize, usize)> = group_re
            .find_iter(run.as_str())
            .map(|g| (run.start() + g.start(), run.start() + g.end()))
            .collect();
        let mut i = 0;
        while i < groups.len() {
            let mut found = None;
            let mut digits = 0;
            for j in i..groups.len() {
                digits += groups[j].1 - groups[j].0;
                if digits > 19 {
                    break;
                }
                let (s, e) = (groups[i].0, groups[j].1);
                if digits >= 11 && is_card_number(&text[s..e]) {
                    found = Some(j);
                }
            }
            match found {
                Some(j) => {
                    push(out, text, PiiKind::CreditCard, groups[i].0, groups[j].1);
                    i = j + 1;
                }
                None => i += 1,
            }
        }
    }
}

fn name_candidates(text: &str, out: &mut Vec<PiiSpan>) {
    let bytes = text.as_bytes();
    let mut words: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphabetic() && (i == 0 || !is_word_byte(bytes[i - 1])) {
            let s = i;
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            if i == bytes.len() || !(is_word_byte(bytes[i]) || bytes[i] >= 0x80) {
                words.push((s, i));
            }
        } else {
            i += 1;
        }
    }
    for w in words.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.0 == a.1 + 1 && bytes[a.1] == b' ' && is_person_name(&text[a.0..b.1]) {
            push(out, text, PiiKind::PersonName, a.0, b.1);
        }
    }
}

/// Detects PII spans: non-overlapping, sorted by start. Overlaps are
/// resolved by longest match, then earliest start, then kind priority.
pub fn detect(text: &str) -> Vec<PiiSpan> {
    let mut cands = Vec::new();
    email_candidates(text, &mut cands);
    ssn_candidates(text, &mut cands);
    card_candidates(text, &mut cands);
    phone_candidates(text, &mut cands);
    name_candidates(text, &mut cands);

    cands.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(b.kind.priority().cmp(&a.kind.priority()))
    });
    let mut kept: Vec<PiiSpan> = Vec::new();
    for c in cands {
        if kept.iter().all(|k| c.end <= k.start || c.start >= k.end) {
            kept.push(c);
        }
    }
    kept.sort_by_key(|s| s.start);
    kept
}

/// [`detect`] over raw bytes, rejecting invalid UTF-8.
pub fn detect_bytes(bytes: &[u8]) -> Result<Vec<PiiSpan>, PiiError> {
    let text = std::str::from_utf8(bytes).map_err(|e| PiiError::Encoding(e.valid_up_to()))?;
    Ok(detect(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<(PiiKind, String)> {
        detect(text).into_iter().map(|s| (s.kind, s.value)).collect()
    }

    #[test]
    fn email_example() {
        let spans = detect("Contact alice@example.com now");
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].kind, spans[0].start, spans[0].end), (PiiKind::Email, 8, 25));
    }

    #[test]
    fn card_requires_luhn() {
        assert_eq!(kinds("card 79927398713 on file"), vec![(PiiKind::CreditCard, "79927398713".into())]);
        assert!(kinds("card 79927398710").is_empty());
        assert_eq!(
            kinds("paid 4111 1111 1111 1111 today"),
            vec![(PiiKind::CreditCard, "4111 1111 1111 1111".into())]
        );
        assert_eq!(
            kinds("4111111111111111 5 times"),
            vec![(PiiKind::CreditCard, "4111111111111111".into())]
        );
    }

    #[test]
    fn ssn_rules() {
        assert_eq!(kinds("SSN 123-45-6789."), vec![(PiiKind::Ssn, "123-45-6789".into())]);
        for bad in ["000-12-3456", "666-12-3456", "912-12-3456", "1123-45-6789", "123-45-67890"] {
            assert!(detect(bad).iter().all(|s| s.kind != PiiKind::Ssn), "{bad}");
        }
    }

    #[test]
    fn phone_layouts() {
        for p in ["(555) 234-5678", "555-234-5678", "555.234.5678", "+1 555-234-5678", "5552345678"] {
            assert_eq!(kinds(&format!("call {p} now")), vec![(PiiKind::Phone, p.to_string())], "{p}");
        }
    }

    #[test]
    fn names_are_wordlist_bigrams() {
        assert_eq!(kinds("Contact Alice Fox today"), vec![(PiiKind::PersonName, "Alice Fox".into())]);
        assert!(kinds("alice fox").is_empty());
        assert!(kinds("Alice Wonderland").is_empty());
        assert!(kinds("AliceFox").is_empty());
    }

    #[test]
    fn empty_text_and_invalid_utf8() {
        assert!(detect("").is_empty());
        assert!(matches!(detect_bytes(&[b'a', 0xff]), Err(PiiError::Encoding(1))));
    }

    #[test]
    fn overlap_prefers_longest_then_priority() {
        // An SSN inside an email local part loses to the longer email.
        let v = kinds("x123-45-6789@mail.test");
        assert_eq!(v, vec![(PiiKind::Email, "x123-45-6789@mail.test".into())]);
    }

    #[test]
    fn spans_validate_independently() {
        let text = "John Smith (555) 234-5678 john.smith7@example.org 123-45-6789 4111111111111111";
        let spans = detect(text);
        assert_eq!(spans.len(), 5);
        assert!(spans.iter().all(|s| validate_span(text, s)));
        assert!(spans.windows(2).all(|w| w[0].end <= w[1].start));
    }
}
