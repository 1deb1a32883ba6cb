//! The unified alignment corpus: task conversions, synthetic data and
//! reproducible corpus builds.

mod builder;
mod convert;
mod declarative;
mod example;
mod synth;

pub use builder::{
    build_corpus, convert_sources, load_manifest, BuildReport, CorpusBuildConfig, CorpusError,
    DatasetReport, Pipeline, RejectedRow, SourceFormat, SourceManifest, DEFAULT_PER_DATASET_CAP,
};
pub use convert::{
    convert_binary, convert_regression, convert_three_way, map_three_way_label, AnswerKind,
    BinarySource, Provenance, Rejection, StsSource, ThreeWaySource,
};
pub use declarative::{
    declarative_claim, past_tense, third_person, ConversionError, DeclarativeConverter,
    TemplateConverter,
};
pub use example::{
    validate_corpus, AlignmentExample, BinLabel, Label, Split, Task, ThreeWayLabel, Violation,
};
pub use synth::{
    derive_seed, mask_count, mask_tokens, FrequencyExtractor, Infiller, MaskRetention, MaskedText,
    Paraphraser, Summarizer, SynonymParaphraser, SynthError, DEFAULT_MASK_RATIO, MASK_TOKEN,
};
