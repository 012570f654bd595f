//! Translate the ComputeSum fixture and print the machine.
//!
//! `cargo run --example translate -- --unicode` prints mathematical symbols.

use scade2b::bmachine::{emit_machine, emit_machine_unicode};
use scade2b::fixtures;
use scade2b::frontend::compile;
use scade2b::translator::translate;

fn main() {
    let unicode = std::env::args().any(|a| a == "--unicode");
    let tp = compile(fixtures::COMPUTE_SUM).expect("fixture compiles");
    let t = translate(&tp).expect("fixture translates");
    let text = if unicode { emit_machine_unicode(&t.machine) } else { emit_machine(&t.machine) };
    print!("{text}");
    for w in &t.warnings {
        eprintln!("warning: {w}");
    }
    println!("\n// binding: operation {} with buffers {:?}", t.binding.operation, t.binding.fby);
}
