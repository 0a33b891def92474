use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Record, SynthError};

/// Which record field a rendered span came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Name,
    Email,
    Ssn,
    CreditCard,
    Phone,
    Age,
    Income,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpan {
    pub field: Field,
    pub range: Range<usize>,
}

/// Rendered sentence plus the exact byte ranges of every substituted field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedText {
    pub text: String,
    pub spans: Vec<FieldSpan>,
}

/// Sentence templates; `{field}` placeholders are replaced verbatim.
pub const TEMPLATES: &[&str] = &[
    "{name}'s SSN is {ssn}.",
    "Contact {name} at {email}.",
    "{name} paid with card {card}.",
    "Call {name} on {phone}.",
    "Record for {name}: email {email}, phone {phone}, SSN {ssn}, card {card}.",
    "{name} (age {age}) reports an annual income of {income}.",
];

fn field_value(r: &Record, field: Field) -> String {
    match field {
        Field::Name => r.name.clone(),
        Field::Email => r.email.clone(),
        Field::Ssn => r.ssn.clone(),
        Field::CreditCard => r.credit_card.clone(),
        Field::Phone => r.phone.clone(),
        Field::Age => r.age.to_string(),
        Field::Income => format!("{:.2}", r.income),
    }
}

fn placeholder(name: &str) -> Option<Field> {
    Some(match name {
        "name" => Field::Name,
        "email" => Field::Email,
        "ssn" => Field::Ssn,
        "card" => Field::CreditCard,
        "phone" => Field::Phone,
        "age" => Field::Age,
        "income" => Field::Income,
        _ => return None,
    })
}

pub fn render_text(r: &Record, template_id: usize) -> Result<RenderedText, SynthError> {
    let template = TEMPLATES
        .get(template_id)
        .ok_or(SynthError::UnknownTemplate(template_id))?;
    let mut text = String::with_capacity(template.len() + 64);
    let mut spans = Vec::new();
    let mut rest = *template;
    while let Some(open) = rest.find('{') {
        text.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("templates are well-formed");
        let field = placeholder(&rest[open + 1..close]).expect("templates use known fields");
        let value = field_value(r, field);
        let start = text.len();
        text.push_str(&value);
        spans.push(FieldSpan {
            field,
            range: start..text.len(),
        });
        rest = &rest[close + 1..];
    }
    text.push_str(rest);
    Ok(RenderedText { text, spans })
}
