//! Check the safety invariant of both protocol versions.

use scade2b::checker::{check, Outcome, Overrides};
use scade2b::fixtures;
use scade2b::frontend::compile;
use scade2b::translator::translate;

fn main() {
    for (name, src) in [("protocol v1", fixtures::PROTOCOL_V1), ("protocol v2", fixtures::PROTOCOL_V2)] {
        let m = translate(&compile(src).unwrap()).unwrap().machine;
        let outcome = check(&m, &Overrides::default(), 10_000).unwrap();
        println!("{name}: {outcome}");
        if let Outcome::Violation(c) = outcome {
            println!("{}", c.table());
        }
    }
}
