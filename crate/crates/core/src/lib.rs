//! Core of the privacy red-team lab: a small neural-network engine, a seeded
//! synthetic-identity generator, differential-privacy mechanisms and the five
//! privacy attacks (membership inference, extraction, poisoning, inversion and
//! property inference) built on top of them.

pub mod nn;
pub mod synthdata;
pub mod dp;
pub mod attacks;
