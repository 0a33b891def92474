//! Deterministic synthetic identities: financial/medical records with
//! fake names, emails, SSNs, card numbers and phones, plus the normalized
//! numeric view the attack models train on.
//!
//! Every record is a pure function of `(seed, id)`.

mod io;
mod render;
mod wordlists;

pub use io::{read_jsonl, write_features_csv, write_jsonl};
pub use render::{render_text, Field, FieldSpan, RenderedText, TEMPLATES};
pub use wordlists::{EMAIL_DOMAINS, FIRST_NAMES, LAST_NAMES};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{sigmoid, Matrix};

pub const AGE_RANGE: (u32, u32) = (18, 90);
pub const INCOME_RANGE: (f64, f64) = (10_000.0, 200_000.0);

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("record count must be at least 1")]
    ZeroRecords,
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("split of {n} records at fraction {fraction} leaves one side empty")]
    EmptySplit { n: usize, fraction: f64 },
    #[error("unknown template id {0}")]
    UnknownTemplate(usize),
    #[error("not a digit string: {0:?}")]
    NotDigits(String),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One synthetic identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: u64,
    pub name: String,
    pub email: String,
    pub ssn: String,
    pub credit_card: String,
    pub phone: String,
    pub age: u32,
    pub income: f64,
    pub gender: u8,
    pub condition: u8,
}

impl Record {
    /// Generates record `id` of the stream identified by `seed`.
    pub fn synthesize(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        let first = *FIRST_NAMES.choose(&mut rng).expect("non-empty");
        let last = *LAST_NAMES.choose(&mut rng).expect("non-empty");
        let domain = *EMAIL_DOMAINS.choose(&mut rng).expect("non-empty");
        let email = format!(
            "{}.{}{}@{}",
            first.to_ascii_lowercase(),
            last.to_ascii_lowercase(),
            rng.gen_range(1..1000),
            domain
        );
        let ssn = random_ssn(&mut rng);
        let credit_card = random_card(&mut rng);
        let phone = random_phone(&mut rng);
        let age = rng.gen_range(AGE_RANGE.0..=AGE_RANGE.1);
        let income = (rng.gen_range(INCOME_RANGE.0..=INCOME_RANGE.1) * 100.0).round() / 100.0;
        let gender = rng.gen_range(0..=1u8);
        let p = condition_probability(age, income);
        let condition = u8::from(rng.gen::<f64>() < p);
        Self {
            id,
            name: format!("{first} {last}"),
            email,
            ssn,
            credit_card,
            phone,
            age,
            income,
            gender,
            condition,
        }
    }

    pub fn age_norm(&self) -> f64 {
        normalize_age(self.age as f64)
    }

    pub fn income_norm(&self) -> f64 {
        normalize_income(self.income)
    }
}

pub fn normalize_age(age: f64) -> f64 {
    (age - AGE_RANGE.0 as f64) / (AGE_RANGE.1 - AGE_RANGE.0) as f64
}

pub fn normalize_income(income: f64) -> f64 {
    (income - INCOME_RANGE.0) / (INCOME_RANGE.1 - INCOME_RANGE.0)
}

/// Ground-truth label rule: `sigmoid(4·(age_norm − ½) + 2·(income_norm − ½))`.
pub fn condition_probability(age: u32, income: f64) -> f64 {
    sigmoid(4.0 * (normalize_age(age as f64) - 0.5) + 2.0 * (normalize_income(income) - 0.5))
}

/// Random SSN with area in 001..=899 excluding 666.
pub fn random_ssn<R: Rng>(rng: &mut R) -> String {
    let area = loop {
        let a = rng.gen_range(1..=899u32);
        if a != 666 {
            break a;
        }
    };
    format!(
        "{area:03}-{:02}-{:04}",
        rng.gen_range(1..=99u32),
        rng.gen_range(1..=9999u32)
    )
}

/// 16-digit card number starting with 4 and carrying a valid Luhn digit.
pub fn random_card<R: Rng>(rng: &mut R) -> String {
    let mut digits = String::with_capacity(16);
    digits.push('4');
    for _ in 0..14 {
        digits.push(char::from(b'0' + rng.gen_range(0..10u8)));
    }
    let check = luhn_check_digit(&digits).expect("digits only");
    digits.push(char::from(b'0' + check));
    digits
}

/// NANP-shaped phone in one of two common layouts.
pub fn random_phone<R: Rng>(rng: &mut R) -> String {
    let area = rng.gen_range(200..=999u32);
    let exchange = rng.gen_range(200..=999u32);
    let line = rng.gen_range(0..=9999u32);
    if rng.gen_bool(0.5) {
        format!("({area}) {exchange}-{line:04}")
    } else {
        format!("{area}-{exchange}-{line:04}")
    }
}

fn luhn_sum(digits: &str, with_check_slot: bool) -> Result<u32, SynthError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(SynthError::NotDigits(digits.to_string()));
    }
    let offset = usize::from(with_check_slot);
    Ok(digits
        .bytes()
        .rev()
        .enumerate()
        .map(|(i, b)| {
            let d = u32::from(b - b'0');
            if (i + offset) % 2 == 1 {
                let dd = d * 2;
                if dd > 9 {
                    dd - 9
                } else {
                    dd
                }
            } else {
                d
            }
        })
        .sum())
}

/// Standard Luhn mod-10 validity of a digit string.
pub fn luhn_checksum(digits: &str) -> Result<bool, SynthError> {
    Ok(luhn_sum(digits, false)? % 10 == 0)
}

/// Digit that makes `payload + digit` Luhn-valid.
pub fn luhn_check_digit(payload: &str) -> Result<u8, SynthError> {
    let s = luhn_sum(payload, true)?;
    Ok(((10 - s % 10) % 10) as u8)
}

/// Min-max bounds used to normalize the numeric features.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    pub age: (f64, f64),
    pub income: (f64, f64),
}

impl Default for FeatureBounds {
    fn default() -> Self {
        Self {
            age: (AGE_RANGE.0 as f64, AGE_RANGE.1 as f64),
            income: INCOME_RANGE,
        }
    }
}

/// Number of columns in [`Dataset::feature_view`]: age, income, gender.
pub const FEATURE_DIM: usize = 3;
const SSN_DIGITS: usize = 9;
const CARD_DIGITS: usize = 16;
/// Number of columns in [`Dataset::identity_view`].
pub const IDENTITY_DIM: usize = FEATURE_DIM + SSN_DIGITS + CARD_DIGITS;

/// Digits of `s` scaled to [0,1], truncated or zero-padded to `len`.
fn digit_features(s: &str, len: usize) -> impl Iterator<Item = f64> + '_ {
    s.bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| f64::from(b - b'0') / 9.0)
        .chain(std::iter::repeat(0.0))
        .take(len)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub bounds: FeatureBounds,
}

impl Dataset {
    pub fn from_records(records: Vec<Record>) -> Self {
        Self {
            records,
            bounds: FeatureBounds::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `n × 3` matrix of (age_norm, income_norm, gender).
    pub fn feature_view(&self) -> Matrix {
        let rows: Vec<[f64; FEATURE_DIM]> = self.records.iter().map(|r| self.features_of(r)).collect();
        if rows.is_empty() {
            return Matrix::zeros(0, FEATURE_DIM);
        }
        Matrix::from_rows(&rows)
    }

    pub fn features_of(&self, r: &Record) -> [f64; FEATURE_DIM] {
        let (a0, a1) = self.bounds.age;
        let (i0, i1) = self.bounds.income;
        [
            (r.age as f64 - a0) / (a1 - a0),
            (r.income - i0) / (i1 - i0),
            r.gender as f64,
        ]
    }

    /// Maps a normalized feature row back to (age, income, gender).
    pub fn inverse_transform(&self, row: &[f64]) -> (f64, f64, f64) {
        let (a0, a1) = self.bounds.age;
        let (i0, i1) = self.bounds.income;
        (row[0] * (a1 - a0) + a0, row[1] * (i1 - i0) + i0, row[2])
    }

    /// Feature view extended with the record's identifiers: normalized SSN
    /// digits and card digits. Identifiers that were masked (no digits left)
    /// encode as zeros.
    pub fn identity_view(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = self
            .records
            .iter()
            .map(|r| {
                let mut v = self.features_of(r).to_vec();
                v.extend(digit_features(&r.ssn, SSN_DIGITS));
                v.extend(digit_features(&r.credit_card, CARD_DIGITS));
                v
            })
            .collect();
        if rows.is_empty() {
            return Matrix::zeros(0, IDENTITY_DIM);
        }
        Matrix::from_rows(&rows)
    }

    /// `n × 1` matrix of condition labels.
    pub fn label_view(&self) -> Matrix {
        Matrix::from_vec(
            self.records.len(),
            1,
            self.records.iter().map(|r| r.condition as f64).collect(),
        )
        .expect("one label per record")
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.condition == 1).count() as f64 / self.records.len() as f64
    }
}

/// `n` records with ids `0..n` from the stream `seed`.
pub fn generate(n: usize, seed: u64) -> Result<Dataset, SynthError> {
    generate_range(0, n, seed)
}

/// Records with ids `start..start + n`; disjoint ranges give disjoint pools.
pub fn generate_range(start: u64, n: usize, seed: u64) -> Result<Dataset, SynthError> {
    if n == 0 {
        return Err(SynthError::ZeroRecords);
    }
    Ok(Dataset::from_records(
        (start..start + n as u64).map(|id| Record::synthesize(seed, id)).collect(),
    ))
}

/// Seeded disjoint partition into `(train, holdout)`.
pub fn split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), SynthError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SynthError::InvalidFraction(train_fraction));
    }
    let n = ds.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(SynthError::EmptySplit {
            n,
            fraction: train_fraction,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| Dataset {
        records: idx.iter().map(|&i| ds.records[i].clone()).collect(),
        bounds: ds.bounds,
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}
