//! Discourse relation classification for sentence pairs drawn from court
//! case transcripts.

pub mod annotate;
pub mod citation;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod svm;
pub mod testing;
