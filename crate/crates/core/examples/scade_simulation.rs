//! Run ComputeSum cycle by cycle on the SCADE interpreter.

use scade2b::fixtures;
use scade2b::frontend::compile;
use scade2b::harness::{format_line, Trace};
use scade2b::scade_interp::Simulator;
use scade2b::Value;

fn main() {
    let tp = compile(fixtures::COMPUTE_SUM).unwrap();
    let sim = Simulator::main(&tp).unwrap();
    let (inputs, _) = tp.signature("ComputeSum").unwrap();
    let trace = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).unwrap();
    for (k, (outs, state)) in sim.run(&trace.cycles).unwrap().iter().enumerate() {
        println!("cycle {}: {}", k + 1, format_line(outs));
        for (id, cells) in &state.fby {
            println!("    fby #{id} = {}", Value::Array(cells.clone()));
        }
        for (sm, st) in &state.automata {
            println!("    {sm} in {st}");
        }
    }
}
