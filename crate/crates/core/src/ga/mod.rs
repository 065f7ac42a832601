//! Genetic search for the prompt modifiers behind a target latent.

mod evolve;
mod genome;
mod operators;
mod oracle;
mod vocab;

pub use evolve::{evolve, fitness, EvolveResult};
pub use genome::{assemble_prompt, Genome, MAX_LEN, MIN_LEN};
pub use operators::{crossover, crossover_at, init_population, mutate, tournament_select, GaConfig, MutationEvents};
pub use oracle::{ExecOracle, GeneratorOracle, MockOracle, OracleRequest, OracleResponse, MOCK_LAMBDA, MOCK_STYLE};
pub use vocab::{ModifierVocabulary, VocabEntry, DEFAULT_THRESHOLD};
