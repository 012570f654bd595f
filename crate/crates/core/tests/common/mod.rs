//! Generators and oracles shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scade2b::b_interp::Animator;
use scade2b::frontend::{ast::HofFamily, ast::HofKind, compile};
use scade2b::harness::{b_step, run_lockstep, DiffReport, Trace};
use scade2b::scade_interp::{Io, Simulator};
use scade2b::translator::translate;
use scade2b::Value;

/// Integer expression over the operator's inputs.
#[derive(Debug, Clone)]
pub enum E {
    Var(usize),
    Lit(i64),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    Mul(Box<E>, Box<E>),
    Ite(Box<E>, Box<E>, Box<E>, Box<E>),
}

impl E {
    fn gen(rng: &mut ChaCha8Rng, vars: usize, depth: u32) -> E {
        if depth == 0 || rng.gen_ratio(1, 3) {
            return if rng.gen_ratio(3, 4) {
                E::Var(rng.gen_range(0..vars))
            } else {
                E::Lit(rng.gen_range(0..10))
            };
        }
        let pick = rng.gen_range(0..4);
        let mut sub = || Box::new(E::gen(rng, vars, depth - 1));
        match pick {
            0 => E::Add(sub(), sub()),
            1 => E::Sub(sub(), sub()),
            2 => E::Mul(sub(), sub()),
            _ => {
                let (a, b, c, d) = (sub(), sub(), sub(), sub());
                E::Ite(a, b, c, d)
            }
        }
    }

    fn eval(&self, env: &[i64]) -> i64 {
        match self {
            E::Var(k) => env[*k],
            E::Lit(v) => *v,
            E::Add(a, b) => a.eval(env) + b.eval(env),
            E::Sub(a, b) => a.eval(env) - b.eval(env),
            E::Mul(a, b) => a.eval(env) * b.eval(env),
            E::Ite(a, b, c, d) => {
                if a.eval(env) < b.eval(env) {
                    c.eval(env)
                } else {
                    d.eval(env)
                }
            }
        }
    }

    fn render(&self, names: &[String]) -> String {
        match self {
            E::Var(k) => names[*k].clone(),
            E::Lit(v) => v.to_string(),
            E::Add(a, b) => format!("({} + {})", a.render(names), b.render(names)),
            E::Sub(a, b) => format!("({} - {})", a.render(names), b.render(names)),
            E::Mul(a, b) => format!("({} * {})", a.render(names), b.render(names)),
            E::Ite(a, b, c, d) => format!(
                "(if {} < {} then {} else {})",
                a.render(names),
                b.render(names),
                c.render(names),
                d.render(names)
            ),
        }
    }
}

/// One random iterator application with concrete arguments.
#[derive(Debug, Clone)]
pub struct HofCase {
    pub kind: HofKind,
    pub size: usize,
    pub accs: usize,
    /// Per-element results of the operator.
    pub outs: usize,
    pub arrays: Vec<Vec<i64>>,
    pub acc_inits: Vec<i64>,
    pub init_cond: bool,
    pub defaults: Vec<i64>,
    /// Continuation flag as `lhs < rhs`.
    pub cond: Option<(E, E)>,
    /// Accumulator updates then per-element results, each reduced mod 97.
    pub exprs: Vec<E>,
}

const MODULUS: i64 = 97;

impl HofCase {
    pub fn generate(kind: HofKind, rng: &mut ChaCha8Rng) -> HofCase {
        let size = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=2);
        let (accs, outs) = match kind.family() {
            HofFamily::Map => (0, rng.gen_range(1..=2)),
            HofFamily::Fold => (1, 0),
            HofFamily::MapFold => (rng.gen_range(1..=2), rng.gen_range(1..=2)),
        };
        let vars = kind.indexed() as usize + accs + n;
        HofCase {
            kind,
            size,
            accs,
            outs,
            arrays: (0..n).map(|_| (0..size).map(|_| rng.gen_range(-20..=20)).collect()).collect(),
            acc_inits: (0..accs).map(|_| rng.gen_range(-20..=20)).collect(),
            init_cond: !kind.is_while() || rng.gen_ratio(4, 5),
            defaults: (0..outs).map(|_| rng.gen_range(0..10)).collect(),
            cond: kind
                .is_while()
                .then(|| (E::gen(rng, vars, 1), E::gen(rng, vars, 1))),
            exprs: (0..accs + outs).map(|_| E::gen(rng, vars, 2)).collect(),
        }
    }

    fn op_inputs(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.kind.indexed() {
            names.push("i".to_string());
        }
        names.extend((0..self.accs).map(|k| format!("a{k}")));
        names.extend((0..self.arrays.len()).map(|k| format!("x{k}")));
        names
    }

    /// Names bound by the equation, in left-hand-side order.
    pub fn lhs(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.kind.is_while() {
            names.push("idx".to_string());
            if self.kind.family() == HofFamily::MapFold {
                names.push("c".to_string());
            }
        }
        names.extend((0..self.accs).map(|k| format!("r{k}")));
        names.extend((0..self.outs).map(|k| format!("v{k}")));
        names
    }

    pub fn source(&self) -> String {
        let ins = self.op_inputs();
        let mut params: Vec<String> = ins.iter().map(|n| format!("{n}: int32")).collect();
        let mut results = Vec::new();
        let mut eqs = Vec::new();
        if let Some((l, r)) = &self.cond {
            results.push("oc: bool".to_string());
            eqs.push(format!("oc = {} < {};", l.render(&ins), r.render(&ins)));
        }
        for (k, e) in self.exprs.iter().enumerate() {
            let name = if k < self.accs { format!("oa{k}") } else { format!("oy{}", k - self.accs) };
            results.push(format!("{name}: int32"));
            eqs.push(format!("{name} = {} mod {MODULUS};", e.render(&ins)));
        }
        let op = format!(
            "function f({}) returns ({})\nlet\n  {}\ntel\n",
            params.join("; "),
            results.join("; "),
            eqs.join("\n  ")
        );
        params.clear();
        params.extend((0..self.accs).map(|k| format!("s{k}: int32")));
        params.extend((0..self.arrays.len()).map(|k| format!("A{k}: int32^{}", self.size)));
        let lhs = self.lhs();
        let outs: Vec<String> = lhs
            .iter()
            .map(|n| match n.as_str() {
                "idx" => "idx: int32".to_string(),
                "c" => "c: bool".to_string(),
                r if r.starts_with('r') => format!("{r}: int32"),
                v => format!("{v}: int32^{}", self.size),
            })
            .collect();
        let mut head = self.kind.keyword().to_string();
        if self.kind.family() == HofFamily::MapFold {
            head.push_str(&format!(" {}", self.accs));
        }
        head.push_str(&format!(" f <<{}>>", self.size));
        if self.kind.is_while() {
            head.push_str(&format!(" if {}", self.init_cond));
            if self.outs > 0 {
                let d: Vec<String> = self.defaults.iter().map(|d| d.to_string()).collect();
                head.push_str(&format!(" default ({})", d.join(", ")));
            }
        }
        let args: Vec<String> = (0..self.accs)
            .map(|k| format!("s{k}"))
            .chain((0..self.arrays.len()).map(|k| format!("A{k}")))
            .collect();
        format!(
            "{op}\nnode main({}) returns ({})\nlet\n  {} = ({head})({});\ntel\n",
            params.join("; "),
            outs.join("; "),
            lhs.join(", "),
            args.join(", ")
        )
    }

    pub fn inputs(&self) -> Io {
        let mut io = Io::new();
        for (k, v) in self.acc_inits.iter().enumerate() {
            io.insert(format!("s{k}"), Value::Int(*v));
        }
        for (k, a) in self.arrays.iter().enumerate() {
            io.insert(format!("A{k}"), Value::Array(a.iter().map(|&x| Value::Int(x)).collect()));
        }
        io
    }

    /// Unrolls the defining recurrence over every position: an iteration
    /// whose incoming flag is false leaves index, flag and accumulators as
    /// they were.
    pub fn oracle(&self) -> Io {
        let mut idx = 0usize;
        let mut cond = self.init_cond;
        let mut accs = self.acc_inits.clone();
        let mut cells: Vec<Vec<Option<i64>>> = vec![vec![None; self.size]; self.outs];
        for i in 0..self.size {
            if !cond {
                continue;
            }
            let mut env = Vec::new();
            if self.kind.indexed() {
                env.push(i as i64);
            }
            env.extend(&accs);
            env.extend(self.arrays.iter().map(|a| a[i]));
            let next: Vec<i64> = self.exprs.iter().map(|e| e.eval(&env) % MODULUS).collect();
            if let Some((l, r)) = &self.cond {
                cond = l.eval(&env) < r.eval(&env);
            }
            accs = next[..self.accs].to_vec();
            for (j, c) in cells.iter_mut().enumerate() {
                c[i] = Some(next[self.accs + j]);
            }
            idx += 1;
        }
        let mut io = Io::new();
        if self.kind.is_while() {
            io.insert("idx".into(), Value::Int(idx as i64));
            if self.kind.family() == HofFamily::MapFold {
                io.insert("c".into(), Value::Bool(cond));
            }
        }
        for (k, a) in accs.iter().enumerate() {
            io.insert(format!("r{k}"), Value::Int(*a));
        }
        for (j, c) in cells.iter().enumerate() {
            let d = self.defaults.get(j).copied().unwrap_or(0);
            io.insert(format!("v{j}"), Value::Array(c.iter().map(|x| Value::Int(x.unwrap_or(d))).collect()));
        }
        io
    }

    /// Outputs of one cycle on the SCADE and on the B side.
    pub fn run_both(&self) -> Result<(Io, Io), String> {
        let src = self.source();
        let tp = compile(&src).map_err(|e| format!("{e}\n{src}"))?;
        let sim = Simulator::main(&tp).ok_or("no main node")?;
        let inputs = self.inputs();
        let (s_out, _) = sim.step(&sim.init_state(), &inputs).map_err(|e| format!("scade: {e}\n{src}"))?;
        let tr = translate(&tp).map_err(|e| format!("{e}\n{src}"))?;
        let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
        let init = anim.init().map_err(|e| e.to_string())?;
        let (obs, _, diags) = b_step(&anim, &tr.binding, &init, &inputs).map_err(|e| format!("b: {e}\n{src}"))?;
        if !diags.is_empty() {
            return Err(format!("loop diagnostics {diags:?}\n{src}"));
        }
        Ok((s_out, obs.outputs))
    }
}

/// Checks `cases` seeded cases of `kind`; returns the first mismatch.
pub fn check_hof_kind(kind: HofKind, seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..cases {
        let case = HofCase::generate(kind, &mut rng);
        let want = case.oracle();
        let (s, b) = case.run_both()?;
        if s != want || b != want {
            return Err(format!(
                "{} case {k}: oracle {want:?}\nscade {s:?}\nb {b:?}\n{}\ninputs {:?}",
                kind.keyword(),
                case.source(),
                case.inputs()
            ));
        }
    }
    Ok(())
}

/// Node delaying `x` by `depth` cycles with initial value `init`.
pub fn fby_source(depth: usize, init: i64) -> String {
    format!("node delay(x: int32) returns (y: int32) let y = fby(x; {depth}; {init}); tel")
}

/// Checks the delay law on both sides for one input sequence.
pub fn fby_law_holds(depth: usize, init: i64, xs: &[i64]) -> Result<(), String> {
    let tp = compile(&fby_source(depth, init)).map_err(|e| e.to_string())?;
    let sim = Simulator::main(&tp).ok_or("no main node")?;
    let tr = translate(&tp).map_err(|e| e.to_string())?;
    let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
    let mut s_state = sim.init_state();
    let mut b_state = anim.init().map_err(|e| e.to_string())?;
    for (k, &x) in xs.iter().enumerate() {
        let t = k + 1;
        let want = if t <= depth { init } else { xs[t - depth - 1] };
        let inputs: Io = [("x".to_string(), Value::Int(x))].into();
        let (out, ns) = sim.step(&s_state, &inputs).map_err(|e| e.to_string())?;
        let (obs, nb, _) = b_step(&anim, &tr.binding, &b_state, &inputs).map_err(|e| e.to_string())?;
        for (side, got) in [("scade", &out["y"]), ("b", &obs.outputs["y"])] {
            if got != &Value::Int(want) {
                return Err(format!("depth {depth} init {init}: {side} gave {got} at cycle {t}, expected {want}"));
            }
        }
        s_state = ns;
        b_state = nb;
    }
    Ok(())
}

/// Lock-step runs of seeded random traces over one source.
pub fn seeded_lockstep(src: &str, seeds: std::ops::Range<u64>, cycles: usize) -> Result<usize, String> {
    let tp = compile(src).map_err(|e| e.to_string())?;
    let tr = translate(&tp).map_err(|e| e.to_string())?;
    let sim = Simulator::main(&tp).ok_or("no main node")?;
    let anim = Animator::new(&tr.machine).map_err(|e| e.to_string())?;
    let (inputs, _) = tp.signature(&tr.binding.node).ok_or("no signature")?;
    let mut runs = 0;
    for seed in seeds {
        let trace = Trace::generate(&inputs, &tp.env, seed, cycles);
        let r: DiffReport = run_lockstep(&sim, &anim, &tr.binding, &trace.cycles);
        if !r.is_equivalent() || !r.diagnostics.is_empty() || r.cycles_compared != cycles {
            return Err(format!("seed {seed}: {r}"));
        }
        runs += 1;
    }
    Ok(runs)
}
