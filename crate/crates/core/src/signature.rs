//! State signatures: which episodes count as "the same place".
//!
//! The archive deduplicates trajectories by a signature over what happened
//! in them. Three schemes trade off granularity:
//!
//! * [`SchemeKind::ToolsOnly`] — the ordered tool-name sequence. Cheap, but
//!   every refused episode hashes identically (no tools ran), so behavioral
//!   surface collapses into a single cell on refusal-heavy agents.
//! * [`SchemeKind::ToolsArgs`] — adds canonically serialized arguments.
//! * [`SchemeKind::FullIntent`] — tools, arguments, a digest of the last
//!   `message_window` user messages, and every tool output. Refusals of
//!   *different* requests now land in different cells, which is what keeps
//!   exploration alive against a safety-trained target.
//!
//! Canonical serialization is length-prefixed and type-tagged so that field
//! boundaries can never be confused (`["ab","c"]` is distinct from
//! `["a","bc"]`), and arguments are serialized as sorted `key=value` pairs.
//! The digest is 64-bit FNV-1a: stable across platforms and toolchain
//! versions, trivially reimplementable, and collision-safe at the scale of
//! an archive (thousands of cells). Reproducibility matters here; speed and
//! adversarial collision resistance do not.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::trajectory::{Trajectory, TrajectoryError};

/// How many trailing user messages [`SchemeKind::FullIntent`] digests.
pub const DEFAULT_MESSAGE_WINDOW: usize = 3;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte string.
#[must_use]
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Signature scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    ToolsOnly,
    ToolsArgs,
    FullIntent,
}

impl SchemeKind {
    /// Stable short name used in CLI flags and ledger text.
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::ToolsOnly => "tools",
            SchemeKind::ToolsArgs => "tools-args",
            SchemeKind::FullIntent => "full",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A cell key: the scheme it was computed under plus the digest.
///
/// Scheme is part of identity so signatures computed under different
/// schemes can never alias, even on the empty trajectory (whose canonical
/// serialization is empty under every scheme).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub scheme: SchemeKind,
    pub digest: u64,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{:016x}", self.scheme, self.digest)
    }
}

// Field tags for the canonical serialization. One byte each; a tag is
// always followed by a 4-byte big-endian length and that many bytes.
const TAG_TOOL: u8 = b't';
const TAG_ARGS: u8 = b'a';
const TAG_MSG_DIGEST: u8 = b'm';
const TAG_OUTPUT: u8 = b'o';
const TAG_USER_MSG: u8 = b'u';

fn push_field(buf: &mut Vec<u8>, tag: u8, bytes: &[u8]) {
    buf.push(tag);
    buf.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    buf.extend_from_slice(bytes);
}

/// Canonical byte serialization of a trajectory under a scheme.
///
/// Exposed so tests and external audits can check discrimination claims on
/// the serialization itself, independent of any hash function. Blocks are
/// emitted in a fixed order: tool names, then arguments, then (full-intent
/// only) the digest of the trailing user-message window, then outputs.
/// Empty blocks contribute nothing, so an empty trajectory canonicalizes to
/// the empty byte string under every scheme.
pub fn canonical_serialization(
    trajectory: &Trajectory,
    scheme: SchemeKind,
    message_window: usize,
) -> Result<Vec<u8>, TrajectoryError> {
    trajectory.validate()?;
    let mut buf = Vec::new();

    for call in trajectory.tool_calls() {
        push_field(&mut buf, TAG_TOOL, call.tool.name().as_bytes());
    }
    if scheme == SchemeKind::ToolsOnly {
        return Ok(buf);
    }

    for call in trajectory.tool_calls() {
        // BTreeMap iteration is already key-sorted; join pairs with a unit
        // separator so values containing '=' cannot smear across keys.
        let args = call
            .args
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("\u{1f}");
        push_field(&mut buf, TAG_ARGS, args.as_bytes());
    }
    if scheme == SchemeKind::ToolsArgs {
        return Ok(buf);
    }

    let messages = trajectory.user_messages();
    let window_start = messages.len().saturating_sub(message_window);
    let window = &messages[window_start..];
    if !window.is_empty() {
        let mut inner = Vec::new();
        for message in window {
            push_field(&mut inner, TAG_USER_MSG, message.as_bytes());
        }
        let digest = fnv1a64(&inner).to_be_bytes();
        push_field(&mut buf, TAG_MSG_DIGEST, &digest);
    }
    for result in trajectory.tool_results() {
        push_field(&mut buf, TAG_OUTPUT, result.output.as_bytes());
    }
    Ok(buf)
}

/// Computes the signature of a trajectory under a scheme.
pub fn compute_signature(
    trajectory: &Trajectory,
    scheme: SchemeKind,
    message_window: usize,
) -> Result<Signature, TrajectoryError> {
    let canonical = canonical_serialization(trajectory, scheme, message_window)?;
    Ok(Signature {
        scheme,
        digest: fnv1a64(&canonical),
    })
}
