//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scade2b::b_interp::Animator;
use scade2b::bmachine::{parse_machine, token_diff};
use scade2b::checker::{check, replay, Outcome, Overrides};
use scade2b::fixtures;
use scade2b::frontend::{ast::HofKind, compile};
use scade2b::harness::{b_step, drop_fby_shift, run_lockstep, DivergenceKind, Observation, Trace};
use scade2b::scade_interp::{Io, Simulator};
use scade2b::translator::translate;
use scade2b::Value;
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_translation() -> Verdict {
    for (name, src, golden) in fixtures::CORPUS {
        let start = Instant::now();
        let tp = compile(src).map_err(|e| format!("{name}: {e}"))?;
        let tr = translate(&tp).map_err(|e| format!("{name}: {e}"))?;
        let got = scade2b::bmachine::emit_machine(&tr.machine);
        if let Some(d) = token_diff(&got, golden) {
            return Err(format!("{name}: {d}"));
        }
        ensure(start.elapsed() < Duration::from_secs(1), || format!("{name} took {:?}", start.elapsed()))?;
        parse_machine(golden).map_err(|e| format!("{name} golden: {e}"))?;
    }
    Ok("3 machines token-equal to their goldens".into())
}

/// Per-cycle observations of the ComputeSum trace on each side.
fn compute_sum_observations() -> Result<(Vec<Observation>, Vec<Observation>), String> {
    let tp = compile(fixtures::COMPUTE_SUM).map_err(|e| e.to_string())?;
    let tr = translate(&tp).map_err(|e| e.to_string())?;
    let (inputs, _) = tp.signature("ComputeSum").ok_or("no ComputeSum")?;
    let trace = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).map_err(|e| e.to_string())?;
    let sim = Simulator::main(&tp).ok_or("no main node")?;
    let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
    let mut s_state = sim.init_state();
    let mut b_state = anim.init().map_err(|e| e.to_string())?;
    let mut s_obs = vec![Observation::of_scade(Io::new(), &s_state, &tr.binding)];
    let mut b_obs = vec![Observation::of_b(&Io::new(), &b_state, &tr.binding)];
    for cycle in &trace.cycles {
        let (outs, ns) = sim.step(&s_state, cycle).map_err(|e| e.to_string())?;
        s_obs.push(Observation::of_scade(outs, &ns, &tr.binding));
        s_state = ns;
        let (o, nb, diags) = b_step(&anim, &tr.binding, &b_state, cycle).map_err(|e| e.to_string())?;
        ensure(diags.is_empty(), || format!("diagnostics {diags:?}"))?;
        b_obs.push(o);
        b_state = nb;
    }
    Ok((s_obs, b_obs))
}

fn compute_sum_replay() -> Verdict {
    let (s, b) = compute_sum_observations()?;
    let expected: &[(usize, &str, &str)] = &[
        (2, "output", "[1,4,9,16,25]"),
        (2, "fby_out", "0"),
        (2, "strucDemo", "{fby_data:1,move:Forward}"),
        (2, "store", "[0,0,1]"),
        (1, "STATE", "stateA"),
        (2, "STATE", "stateB"),
        (3, "output", "[36,49,64,81,100]"),
        (3, "STATE", "stateA"),
        (5, "fby_out", "1"),
        (5, "store", "[2,3,4]"),
    ];
    for (side, obs) in [("scade", &s), ("b", &b)] {
        for &(cycle, name, want) in expected {
            let o = &obs[cycle];
            let got = o.outputs.get(name).or_else(|| o.state.get(name)).map(Value::to_string);
            ensure(got.as_deref() == Some(want), || {
                format!("{side} cycle {cycle} {name}: got {got:?}, expected {want}")
            })?;
        }
    }
    ensure(s == b, || "sides differ".into())?;
    Ok("reference values reproduced on both sides".into())
}

fn protocol_machine(src: &str) -> Result<scade2b::bmachine::Machine, String> {
    let tp = compile(src).map_err(|e| e.to_string())?;
    Ok(translate(&tp).map_err(|e| e.to_string())?.machine)
}

fn protocol_violation() -> Verdict {
    let m = protocol_machine(fixtures::PROTOCOL_V1)?;
    let Outcome::Violation(c) = check(&m, &Overrides::default(), 10_000).map_err(|e| e.to_string())? else {
        return Err("no violation found".into());
    };
    let events: Vec<String> = c.steps.iter().map(|s| s.args[0].1.to_b_string()).collect();
    let outs: Vec<String> = c.steps.iter().map(|s| s.outputs[0].1.to_b_string()).collect();
    ensure(events == ["ConnectRequest", "ConnectAck", "DisconnectRequest"], || format!("events {events:?}"))?;
    ensure(outs == ["FALSE", "TRUE", "FALSE"], || format!("outputs {outs:?}"))?;
    let last = c.final_state();
    let show = |n: &str| last.get(n).map(|v| v.to_b_string()).unwrap_or_default();
    ensure(show("connection_state") == "Disconnecting" && show("process_state") == "Enable", || {
        format!("final state {last:?}")
    })?;
    let anim = Animator::new(&m).map_err(|e| e.to_string())?;
    ensure(replay(&anim, &c).map_err(|e| e.to_string())?, || "counterexample does not replay".into())?;
    Ok("3-step counterexample ending in Disconnecting/Enable".into())
}

fn protocol_repair() -> Verdict {
    let m = protocol_machine(fixtures::PROTOCOL_V2)?;
    match check(&m, &Overrides::default(), 10_000).map_err(|e| e.to_string())? {
        Outcome::Verified { states: 4, transitions } => Ok(format!("verified, 4 states, {transitions} transitions")),
        other => Err(other.to_string()),
    }
}

fn hof_oracle() -> Verdict {
    for (k, kind) in HofKind::ALL.into_iter().enumerate() {
        common::check_hof_kind(kind, 1 + k as u64, 100)?;
    }
    Ok("12 variants x 100 cases agree with the recurrences".into())
}

fn map_example() -> Verdict {
    let src = "function add(a: int32; b: int32) returns (c: int32) let c = a + b; tel
               node sum(A1: int32^10; A2: int32^10) returns (v: int32^10) let v = (map add <<10>>)(A1, A2); tel";
    let tp = compile(src).map_err(|e| e.to_string())?;
    let tr = translate(&tp).map_err(|e| e.to_string())?;
    let ints = |xs: &[i64]| Value::Array(xs.iter().map(|&x| Value::Int(x)).collect());
    let inputs: Io = [
        ("A1".to_string(), ints(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10])),
        ("A2".to_string(), ints(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9])),
    ]
    .into();
    let want = ints(&[1, 3, 5, 7, 9, 11, 13, 15, 17, 19]);
    let sim = Simulator::main(&tp).ok_or("no main node")?;
    let (s, _) = sim.step(&sim.init_state(), &inputs).map_err(|e| e.to_string())?;
    let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
    let init = anim.init().map_err(|e| e.to_string())?;
    let (b, _, _) = b_step(&anim, &tr.binding, &init, &inputs).map_err(|e| e.to_string())?;
    ensure(s["v"] == want, || format!("scade {}", s["v"]))?;
    ensure(b.outputs["v"] == want, || format!("b {}", b.outputs["v"]))?;
    Ok(format!("v = {want} on both sides"))
}

fn lockstep_equivalence() -> Verdict {
    let mut runs = 0;
    for (name, src, _) in fixtures::CORPUS {
        runs += common::seeded_lockstep(src, 0..100, 20).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{runs} traces x 20 cycles equivalent, no loop diagnostics"))
}

fn fby_delay_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let depth = rng.gen_range(1..=5);
        let init = rng.gen_range(-100..=100);
        let xs: Vec<i64> = (0..30).map(|_| rng.gen_range(-1000..=1000)).collect();
        common::fby_law_holds(depth, init, &xs)?;
    }
    Ok("50 traces x 30 cycles".into())
}

fn mutation_sensitivity() -> Verdict {
    let tp = compile(fixtures::COMPUTE_SUM).map_err(|e| e.to_string())?;
    let mut tr = translate(&tp).map_err(|e| e.to_string())?;
    ensure(drop_fby_shift(&mut tr.machine, "store", 0), || "shift not found".into())?;
    let (inputs, _) = tp.signature("ComputeSum").ok_or("no ComputeSum")?;
    let trace = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).map_err(|e| e.to_string())?;
    let sim = Simulator::main(&tp).ok_or("no main node")?;
    let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
    let r = run_lockstep(&sim, &anim, &tr.binding, &trace.cycles);
    let d = r.divergence.ok_or("no divergence")?;
    ensure(d.cycle == 4 && d.kind == DivergenceKind::State, || format!("{d:?}"))?;
    Ok(format!("divergence at cycle 4 on `{}`", d.name))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("golden translation", Duration::from_secs(3), golden_translation),
        ("ComputeSum replay", Duration::from_secs(1), compute_sum_replay),
        ("protocol violation", Duration::from_secs(1), protocol_violation),
        ("repaired protocol", Duration::from_secs(1), protocol_repair),
        ("iterator oracle", Duration::from_secs(10), hof_oracle),
        ("map worked example", Duration::from_secs(1), map_example),
        ("lock-step equivalence", Duration::from_secs(30), lockstep_equivalence),
        ("fby delay law", Duration::from_secs(10), fby_delay_law),
        ("mutation sensitivity", Duration::from_secs(1), mutation_sensitivity),
    ];
    let mut failed = 0;
    for (k, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = result.and_then(|m| {
            ensure(took < *budget, || format!("took {took:?}, budget {budget:?}")).map(|_| m)
        });
        match result {
            Ok(m) => println!("criterion {} {name:<24} PASS  {:>8.1?}  {m}", k + 1, took),
            Err(e) => {
                failed += 1;
                println!("criterion {} {name:<24} FAIL  {:>8.1?}  {e}", k + 1, took);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
