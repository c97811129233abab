//! Token-consumption measurement for LLM code-reasoning tasks: Java syntax
//! analysis, smell detection, complexity and similarity metrics, prompt
//! composition, a chat-completion gateway and an experiment harness.

pub mod complexity;
pub mod corpus;
pub mod gateway;
pub mod harness;
pub mod prompt;
pub mod similarity;
pub mod smells;
pub mod syntax;

pub use complexity::{ComplexityError, ComplexityProfile, HalsteadProfile, ScoreMode};
pub use corpus::{load_corpus, CorpusError, SampleLabel, SourceSample};
pub use gateway::{
    estimate_tokens, BackendConfig, BackendKind, Gateway, GatewayError, InferenceRecord,
    MockBackend, MockScript, RequestMeta,
};
pub use harness::{
    aggregate, run_experiment, verify_reports, AggregateStats, ExperimentError, ExperimentSpec,
    RunOptions, TrialRecord,
};
pub use prompt::{compose, PromptBundle, PromptError, PromptStrategy, Role, TaskKind, TemplateSet};
pub use similarity::{
    codebleu, docstring_similarity, CodeBleuScore, CodeBleuWeights, DocSimScore, SimilarityError,
};
pub use smells::{DetectorConfig, SmellCategory, SmellError, SmellFinding, SmellKind};
pub use syntax::{FunctionUnit, Language, SourceText, Span, SyntaxError, SyntaxTree};
