//! Seeded lock-step runs over the fixture corpus.

mod common;

use common::seeded_lockstep;
use scade2b::fixtures;

#[test]
fn compute_sum_agrees_on_random_traces() {
    assert_eq!(seeded_lockstep(fixtures::COMPUTE_SUM, 0..100, 20).unwrap(), 100);
}

#[test]
fn protocols_agree_on_random_traces() {
    for src in [fixtures::PROTOCOL_V1, fixtures::PROTOCOL_V2] {
        assert_eq!(seeded_lockstep(src, 0..100, 20).unwrap(), 100);
    }
}
