//! Compare ComputeSum with its translation, then with a mutated translation.

use scade2b::b_interp::Animator;
use scade2b::fixtures;
use scade2b::frontend::compile;
use scade2b::harness::{drop_fby_shift, run_lockstep, Trace};
use scade2b::scade_interp::Simulator;
use scade2b::translator::translate;

fn main() {
    let tp = compile(fixtures::COMPUTE_SUM).unwrap();
    let (inputs, _) = tp.signature("ComputeSum").unwrap();
    let trace = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).unwrap();
    let sim = Simulator::main(&tp).unwrap();

    let t = translate(&tp).unwrap();
    let anim = Animator::new(&t.machine).unwrap();
    println!("translated: {}", run_lockstep(&sim, &anim, &t.binding, &trace.cycles));

    let random = Trace::generate(&inputs, &tp.env, 42, 50);
    println!("seed 42:    {}", run_lockstep(&sim, &anim, &t.binding, &random.cycles));

    let mut mutant = t.machine.clone();
    drop_fby_shift(&mut mutant, "store", 0);
    let anim = Animator::new(&mutant).unwrap();
    println!("mutant:     {}", run_lockstep(&sim, &anim, &t.binding, &trace.cycles));
}
