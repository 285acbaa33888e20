//! Classifying research papers as requirements-engineering or not, and as
//! empirical or not, from their extracted text.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synthetic;
pub mod textprep;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/text-pipeline.md")]
    struct TextPipeline;
    #[doc = include_str!("../../../book/src/features.md")]
    struct Features;
    #[doc = include_str!("../../../book/src/classifiers.md")]
    struct Classifiers;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    struct Evaluation;
    #[doc = include_str!("../../../book/src/statistics.md")]
    struct Statistics;
    #[doc = include_str!("../../../book/src/running.md")]
    struct Running;
}
