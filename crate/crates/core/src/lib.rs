//! Adversarial exploration harness for tool-using agents.
//!
//! The crate searches for prompt-injection attack chains against an agent
//! operating in a simulated tool world. The search is return-then-explore:
//! an archive of signature-keyed cells, each holding a world snapshot and
//! the trajectory that reached it, is repeatedly selected from, restored,
//! and expanded with mutated user prompts. Episodes are screened by an
//! optional guardrail, scanned for findings, checked for causally verified
//! attacks, and scored; novel signatures become new cells.
//!
//! Everything a campaign does is a deterministic function of its config
//! and seed: one seeded stream drives selection, mutation, and the
//! scripted target's behavior, and iteration-budget campaigns serialize to
//! byte-identical ledgers that can be re-verified offline.
//!
//! Module map:
//! * [`world`] — simulated tools, provenance, danger classes, snapshots.
//! * [`injection`] — planted instruction phrases and the calls they induce.
//! * [`trajectory`] — recorded episode steps and secret scrubbing.
//! * [`signature`] — trajectory equivalence under three schemes.
//! * [`archive`] — signature-keyed cells and weighted selection.
//! * [`prompts`] — general corpus, targeted banks, action mutation.
//! * [`agents`] — the scripted probabilistic target and remote backend.
//! * [`remote`] — chat-completions transport, transcripts, replay.
//! * [`guardrail`] — all-or-nothing per-turn content screening.
//! * [`episode`] — the turn executor (speculate, screen, commit/rollback).
//! * [`detection`] — finding scanners and the causal attack verifier.
//! * [`scoring`] — the additive episode reward.
//! * [`orchestrator`] — campaign loop, ensembles, seed sensitivity.
//! * [`report`] — ledgers, offline verification, tables, plot data.
//! * [`stream`] — the seeded randomness stream behind it all.

pub mod agents;
pub mod archive;
pub mod detection;
pub mod episode;
pub mod guardrail;
pub mod injection;
pub mod orchestrator;
pub mod prompts;
pub mod remote;
pub mod report;
pub mod scoring;
pub mod signature;
pub mod stream;
pub mod trajectory;
pub mod world;
