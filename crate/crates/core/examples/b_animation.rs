//! Animate the hand-written ComputeSum machine directly.

use scade2b::b_interp::{Animator, InvariantMode};
use scade2b::bmachine::parse_machine;
use scade2b::fixtures;
use scade2b::Value;

fn main() {
    let m = parse_machine(fixtures::COMPUTE_SUM_MCH).unwrap();
    let anim = Animator::new(&m).unwrap();
    let mut state = anim.init().unwrap();
    let ints = |xs: [i64; 5]| Value::Array(xs.into_iter().map(Value::Int).collect());
    let cycles = [
        (ints([0, 0, 0, 0, 0]), 0),
        (ints([1, 2, 3, 4, 5]), 1),
        (ints([6, 7, 8, 9, 10]), 2),
    ];
    for (input, fby_in) in cycles {
        let r = anim
            .invoke(&state, "ComputeSum", &[input, Value::Int(fby_in)], InvariantMode::Enforce)
            .unwrap();
        let outs: Vec<String> = r.outputs.iter().map(|(k, v)| format!("{k}={}", v.to_b_string())).collect();
        println!("{}", outs.join(" "));
        println!("  store = {}", r.state.get("store").unwrap().to_b_string());
        state = r.state;
    }
}
