//! `fby(x; n; a)` yields `a` for the first `n` cycles, then `x` delayed by `n`.

mod common;

use common::fby_law_holds;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn delay_law(depth in 1usize..=5, init in -100i64..=100, xs in prop::collection::vec(-1000i64..=1000, 30)) {
        if let Err(e) = fby_law_holds(depth, init, &xs) {
            return Err(TestCaseError::fail(e));
        }
    }
}

#[test]
fn short_traces_only_see_the_initial_value() {
    fby_law_holds(5, 7, &[1, 2, 3]).unwrap();
}
