//! The addition `map` example and an early-stopping `mapw`, on both sides.

use scade2b::b_interp::Animator;
use scade2b::frontend::compile;
use scade2b::harness::{b_step, format_line};
use scade2b::scade_interp::{Io, Simulator};
use scade2b::translator::translate;
use scade2b::Value;

const SRC: &str = "
function add(a: int32; b: int32) returns (c: int32)
let c = a + b; tel

function below(a: int32; b: int32) returns (go: bool; c: int32)
let go = a + b < 10; c = a + b; tel

node iterate(A1: int32^10; A2: int32^10) returns (v: int32^10; n: int32; w: int32^10)
let
  v = (map add <<10>>)(A1, A2);
  n, w = (mapw below <<10>> if true default (-1))(A1, A2);
tel
";

fn main() {
    let tp = compile(SRC).unwrap();
    let t = translate(&tp).unwrap();
    let ints = |xs: Vec<i64>| Value::Array(xs.into_iter().map(Value::Int).collect());
    let inputs: Io = [
        ("A1".to_string(), ints((1..=10).collect())),
        ("A2".to_string(), ints((0..10).collect())),
    ]
    .into();

    let sim = Simulator::main(&tp).unwrap();
    let (outs, _) = sim.step(&sim.init_state(), &inputs).unwrap();
    println!("scade: {}", format_line(&outs));

    let anim = Animator::new(&t.machine).unwrap();
    let (obs, _, diags) = b_step(&anim, &t.binding, &anim.init().unwrap(), &inputs).unwrap();
    println!("b:     {}", format_line(&obs.outputs));
    println!("loop diagnostics: {}", diags.len());
}
