//! Reference inputs bundled with the crate.

/// The purchase order process.
pub const PURCHASE_ORDER: &str = include_str!("../../../fixtures/purchase_order.bps");
/// "Delivery completes within 9 time units of payment."
pub const PO_DEADLINE_9: &str = include_str!("../../../fixtures/po_deadline9.prop");
/// "Delivery completes within 8 time units of payment."
pub const PO_DEADLINE_8: &str = include_str!("../../../fixtures/po_deadline8.prop");
/// Reference clause set obtained by removing the interpreter for the PO
/// process and the 9-unit deadline.
pub const REMOVAL_OUTPUT: &str = include_str!("../../../fixtures/removal_output.chc");
/// Reference clause set after the equivalence-based minimization.
pub const EQUIVALENCE_OUTPUT: &str = include_str!("../../../fixtures/equivalence_output.chc");
