use alloc::string::String;

use crate::netmodel::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Generator or solver configuration that cannot be satisfied.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("time slot {slot} out of range (network has {count} slots)")]
    SlotOutOfRange { slot: usize, count: usize },

    #[error("query slot {query} does not match the network's active slot {network}")]
    SlotMismatch { query: usize, network: usize },

    #[error("network must contain at least one node and one link")]
    EmptyNetwork,

    #[error("link {index}: {reason}")]
    InvalidLink { index: usize, reason: String },

    #[error("duplicate link {from} -> {to} with id {id}")]
    DuplicateLink { from: NodeId, to: NodeId, id: u64 },

    #[error("node {0} is not part of the network")]
    UnknownNode(NodeId),

    #[error("no route from {origin} to {destination}")]
    NoRoute { origin: NodeId, destination: NodeId },

    #[error("path is not contiguous between positions {0} and {next}", next = .0 + 1)]
    DiscontiguousPath(usize),

    #[error("path and CD-fraction vectors differ in length ({links} links, {fractions} fractions)")]
    LengthMismatch { links: usize, fractions: usize },

    #[error("capacity exceeded: {what} is {actual}, limit {limit}; {hint}")]
    Capacity {
        what: &'static str,
        actual: usize,
        limit: usize,
        hint: &'static str,
    },
}
