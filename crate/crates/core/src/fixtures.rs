//! The example programs, golden machines and traces shipped with the crate.

pub const COMPUTE_SUM: &str = include_str!("../fixtures/compute_sum.scade");
pub const COMPUTE_SUM_MCH: &str = include_str!("../fixtures/compute_sum.mch");
pub const PROTOCOL_V1: &str = include_str!("../fixtures/protocol_v1.scade");
pub const PROTOCOL_V1_MCH: &str = include_str!("../fixtures/protocol_v1.mch");
pub const PROTOCOL_V2: &str = include_str!("../fixtures/protocol_v2.scade");
pub const PROTOCOL_V2_MCH: &str = include_str!("../fixtures/protocol_v2.mch");
pub const COMPUTE_SUM_TRACE: &str = include_str!("../fixtures/compute_sum.trace");
pub const CYCLIC: &str = include_str!("../fixtures/cyclic.scade");

/// (source, golden machine) pairs.
pub const CORPUS: [(&str, &str, &str); 3] = [
    ("compute_sum", COMPUTE_SUM, COMPUTE_SUM_MCH),
    ("protocol_v1", PROTOCOL_V1, PROTOCOL_V1_MCH),
    ("protocol_v2", PROTOCOL_V2, PROTOCOL_V2_MCH),
];
