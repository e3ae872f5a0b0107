//! Retrieval-augmented multi-hop question answering engine.
//!
//! The pipeline decomposes a question into a plan of logical-form steps
//! (`lf`, `planner`), decides per retrieval step whether the model's own
//! knowledge suffices (`boundary`), resolves the remaining steps through an
//! iterative search loop over a local corpus (`depth`, `retrieve`), runs the
//! non-retrieval steps through dedicated executors (`exec`, `mathexpr`), and
//! records everything in a replayable trace (`engine`). `eval` scores traces
//! with EM/F1 and a two-run stability metric; `llm` provides the chat-client
//! abstraction with a deterministic scripted backend for offline runs.

pub mod boundary;
pub mod config;
pub mod depth;
pub mod engine;
pub mod eval;
pub mod exec;
pub mod lf;
pub mod llm;
pub mod mathexpr;
pub mod planner;
pub mod protocol;
pub mod replay;
pub mod retrieve;
