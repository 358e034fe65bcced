//! Blog-post supervision around the `blogsv-core` engine: list files and the
//! versioned lexicon store, the moderation queue with its journal, corpus
//! reports, bundled table fixtures, the detection simulator and the HTTP
//! service.

pub mod corpus;
pub mod ids;
pub mod journal;
pub mod lexicon;
pub mod queue;
pub mod repro;
pub mod service;
pub mod simulate;
