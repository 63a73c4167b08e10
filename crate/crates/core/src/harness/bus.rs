//! The synchronous message bus and its boundary audit.

use std::collections::BTreeSet;

use crate::error::ProtocolError;
use crate::rci::{TradeMessage, PAYLOAD_FIELDS};

/// Records what crosses agent boundaries. The negotiation is private by
/// construction — agents exchange nothing but `{P, lambda}` — and the
/// audit turns that claim into a checkable assertion: it accumulates the
/// union of payload field names over every delivered message.
#[derive(Debug, Clone, Default)]
pub struct AuditLog {
    fields: BTreeSet<String>,
    delivered: u64,
}

impl AuditLog {
    fn record(&mut self, fields: &[&str]) {
        self.delivered += 1;
        // The canonical payload is by far the common case; skip the set
        // insert once both names are present.
        if self.fields.len() != PAYLOAD_FIELDS.len() || fields != PAYLOAD_FIELDS {
            for f in fields {
                if !self.fields.contains(*f) {
                    self.fields.insert((*f).to_owned());
                }
            }
        }
    }

    /// Union of payload field names seen so far.
    pub fn field_union(&self) -> &BTreeSet<String> {
        &self.fields
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Passes iff nothing beyond the `{P, lambda}` payload ever crossed an
    /// agent boundary.
    pub fn verify(&self) -> Result<(), ProtocolError> {
        let extra: Vec<String> = self
            .fields
            .iter()
            .filter(|f| !PAYLOAD_FIELDS.contains(&f.as_str()))
            .cloned()
            .collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(ProtocolError::PayloadSchema(extra))
        }
    }
}

/// Per-directed-edge mailboxes with barrier delivery semantics: within a
/// round every edge carries exactly one message, and new deliveries only
/// happen after [`MessageBus::begin_round`] cleared the previous round.
#[derive(Debug, Clone, Default)]
pub struct MessageBus {
    slots: Vec<Option<TradeMessage>>,
    audit: AuditLog,
}

impl MessageBus {
    pub fn new(edge_count: usize) -> Self {
        MessageBus {
            slots: vec![None; edge_count],
            audit: AuditLog::default(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.slots.len()
    }

    /// Drops all mailboxes so the next round's outboxes can be delivered.
    pub fn begin_round(&mut self) {
        for slot in &mut self.slots {
            *slot = None;
        }
    }

    /// Delivers one message on a directed edge. A second delivery on the
    /// same edge within a round is a protocol violation.
    pub fn deliver(&mut self, edge: usize, msg: TradeMessage) -> Result<(), ProtocolError> {
        if self.slots[edge].is_some() {
            return Err(ProtocolError::DuplicateMessage {
                from: msg.sender.to_string(),
                to: msg.receiver.to_string(),
            });
        }
        self.audit.record(&PAYLOAD_FIELDS);
        self.slots[edge] = Some(msg);
        Ok(())
    }

    /// Test hook: delivers a message while declaring an arbitrary payload
    /// schema to the audit log, e.g. to prove that smuggling an extra
    /// field fails the privacy audit.
    pub fn deliver_with_fields(
        &mut self,
        edge: usize,
        msg: TradeMessage,
        fields: &[&str],
    ) -> Result<(), ProtocolError> {
        if self.slots[edge].is_some() {
            return Err(ProtocolError::DuplicateMessage {
                from: msg.sender.to_string(),
                to: msg.receiver.to_string(),
            });
        }
        self.audit.record(fields);
        self.slots[edge] = Some(msg);
        Ok(())
    }

    pub fn read(&self, edge: usize) -> Option<TradeMessage> {
        self.slots[edge]
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }
}
