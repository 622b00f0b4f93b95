//! A lexicalist transfer engine for short, conversational sentences: shallow
//! source parsing into a bag of signs, bilingual-lexicon transfer, and
//! bag generation with a restrictive target grammar.

pub mod formats;
pub mod fs;
pub mod generator;
pub mod lingware;
pub mod parser;
pub mod pipeline;
pub mod sexpr;
pub mod transfer;
