//! Episode trajectories: the ordered record of everything that happened.
//!
//! A trajectory interleaves harness-injected user messages with agent
//! decisions (tool calls and their results, refusals, final answers) and
//! guardrail blocks. It is simultaneously:
//!
//! * the agent's conversation context,
//! * the input to state-signature computation,
//! * the evidence detection reasons over, and
//! * the persisted artifact a ledger can be re-verified from.
//!
//! Steps produced by the agent carry the ordinal of the decision that
//! produced them. Decision ordinals are what the attack verifier's adjacency
//! window counts, so they are recorded rather than re-derived.
//!
//! Trajectories are recorded *scrubbed*: before a tool result is appended,
//! every occurrence of a registered secret's content is replaced by
//! [`SECRET_PLACEHOLDER`]. Secret values therefore never reach signatures,
//! detection, agents, or ledgers — only the world itself holds them — and
//! offline re-verification sees exactly the bytes the live run saw.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{ToolCall, ToolResult};

/// Stable stand-in for scrubbed secret content.
pub const SECRET_PLACEHOLDER: &str = "[REDACTED:SECRET]";

/// Structural problems that make a trajectory unusable.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("malformed trajectory: result at step {0} has no matching call")]
    DanglingResult(usize),
    #[error("malformed trajectory: call at step {0} was never resolved")]
    UnresolvedCall(usize),
}

/// One entry in an episode record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryStep {
    /// Message injected by the harness (the mutated prompt).
    UserMessage { text: String },
    /// Tool call issued by the agent in decision `decision`.
    ToolCall { decision: u32, call: ToolCall },
    /// Result of the immediately preceding unresolved call.
    ToolResult { decision: u32, result: ToolResult },
    /// Screening suppressed this decision's calls; nothing executed.
    GuardrailBlock {
        decision: u32,
        matched_pattern: String,
        suppressed_calls: u32,
    },
    /// The agent declined the request outright.
    Refusal { decision: u32, text: String },
    /// The agent finished the turn with a plain answer.
    Answer { decision: u32, text: String },
}

/// Ordered, append-only record of one episode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Tool names of every issued call, in step order.
    #[must_use]
    pub fn tool_names(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter_map(|step| match step {
                TrajectoryStep::ToolCall { call, .. } => Some(call.tool.name()),
                _ => None,
            })
            .collect()
    }

    /// Issued calls in step order.
    #[must_use]
    pub fn tool_calls(&self) -> Vec<&ToolCall> {
        self.steps
            .iter()
            .filter_map(|step| match step {
                TrajectoryStep::ToolCall { call, .. } => Some(call),
                _ => None,
            })
            .collect()
    }

    /// Executed results in step order.
    #[must_use]
    pub fn tool_results(&self) -> Vec<&ToolResult> {
        self.steps
            .iter()
            .filter_map(|step| match step {
                TrajectoryStep::ToolResult { result, .. } => Some(result),
                _ => None,
            })
            .collect()
    }

    /// User messages in order.
    #[must_use]
    pub fn user_messages(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter_map(|step| match step {
                TrajectoryStep::UserMessage { text } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Highest decision ordinal used so far, if any agent decision exists.
    #[must_use]
    pub fn last_decision(&self) -> Option<u32> {
        self.steps
            .iter()
            .rev()
            .find_map(|step| match step {
                TrajectoryStep::ToolCall { decision, .. }
                | TrajectoryStep::ToolResult { decision, .. }
                | TrajectoryStep::GuardrailBlock { decision, .. }
                | TrajectoryStep::Refusal { decision, .. }
                | TrajectoryStep::Answer { decision, .. } => Some(*decision),
                TrajectoryStep::UserMessage { .. } => None,
            })
    }

    /// Index of the step starting the current turn (the last user message).
    #[must_use]
    pub fn current_turn_start(&self) -> usize {
        self.steps
            .iter()
            .rposition(|s| matches!(s, TrajectoryStep::UserMessage { .. }))
            .map_or(0, |i| i)
    }

    /// Checks that every result resolves a call and no call dangles.
    ///
    /// Calls and results must pair up in order within each decision: a
    /// decision's calls are recorded first, then their results in the same
    /// order (or a single guardrail block instead of any results).
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let mut pending: Vec<usize> = Vec::new();
        for (index, step) in self.steps.iter().enumerate() {
            match step {
                TrajectoryStep::ToolCall { .. } => pending.push(index),
                TrajectoryStep::ToolResult { .. } => {
                    if pending.is_empty() {
                        return Err(TrajectoryError::DanglingResult(index));
                    }
                    pending.remove(0);
                }
                TrajectoryStep::GuardrailBlock { .. } => {
                    // A block stands in for the suppressed calls' results.
                    pending.clear();
                }
                _ => {
                    if let Some(&unresolved) = pending.first() {
                        return Err(TrajectoryError::UnresolvedCall(unresolved));
                    }
                }
            }
        }
        if let Some(&unresolved) = pending.first() {
            return Err(TrajectoryError::UnresolvedCall(unresolved));
        }
        Ok(())
    }
}

/// Replaces secret contents with [`SECRET_PLACEHOLDER`] wherever they occur.
///
/// Built once per campaign from the world's registered secrets and applied
/// to every result and call before it is recorded.
#[derive(Debug, Clone, Default)]
pub struct SecretScrubber {
    values: Vec<String>,
}

impl SecretScrubber {
    /// `values` are the raw secret contents; empty values are ignored.
    #[must_use]
    pub fn new(values: Vec<String>) -> Self {
        Self {
            values: values.into_iter().filter(|v| !v.is_empty()).collect(),
        }
    }

    #[must_use]
    pub fn scrub_text(&self, text: &str) -> String {
        let mut out = text.to_string();
        for value in &self.values {
            if out.contains(value.as_str()) {
                out = out.replace(value.as_str(), SECRET_PLACEHOLDER);
            }
        }
        out
    }

    #[must_use]
    pub fn scrub_result(&self, result: &ToolResult) -> ToolResult {
        ToolResult {
            output: self.scrub_text(&result.output),
            ..result.clone()
        }
    }

    #[must_use]
    pub fn scrub_call(&self, call: &ToolCall) -> ToolCall {
        ToolCall {
            tool: call.tool.clone(),
            args: call
                .args
                .iter()
                .map(|(k, v)| (k.clone(), self.scrub_text(v)))
                .collect(),
        }
    }
}
