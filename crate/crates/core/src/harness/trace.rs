//! Trace files: one cycle per line of `name=value` pairs.

use crate::frontend::{Ty, TypeEnv};
use crate::scade_interp::Io;
use crate::value::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    File(String),
    Seeded { seed: u64, length: usize },
    Inline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub cycles: Vec<Io>,
    pub provenance: Provenance,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Reads a trace, typing each value by the declared input of that name.
    pub fn parse(text: &str, inputs: &[(String, Ty)], env: &TypeEnv) -> Result<Trace, TraceError> {
        let mut cycles = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| TraceError { line: k + 1, message };
            let mut cycle = Io::new();
            for pair in split_pairs(line) {
                let (name, value) = pair
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected name=value, found `{pair}`")))?;
                let ty = inputs
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, t)| t)
                    .ok_or_else(|| err(format!("unknown input `{name}`")))?;
                let v = parse_value(value, ty, env).map_err(err)?;
                if cycle.insert(name.to_string(), v).is_some() {
                    return Err(err(format!("input `{name}` given twice")));
                }
            }
            for (n, _) in inputs {
                if !cycle.contains_key(n) {
                    return Err(err(format!("missing input `{n}`")));
                }
            }
            cycles.push(cycle);
        }
        Ok(Trace {
            cycles,
            provenance: Provenance::Inline,
        })
    }

    /// Pseudorandom trace, uniform over each input's declared range.
    pub fn generate(inputs: &[(String, Ty)], env: &TypeEnv, seed: u64, length: usize) -> Trace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cycles = (0..length)
            .map(|_| {
                inputs
                    .iter()
                    .map(|(n, t)| (n.clone(), random_value(t, env, &mut rng)))
                    .collect()
            })
            .collect();
        Trace {
            cycles,
            provenance: Provenance::Seeded { seed, length },
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            writeln!(f, "{}", format_line(c))?;
        }
        Ok(())
    }
}

/// `a=1 b=[1,2]` in key order.
pub fn format_line(values: &Io) -> String {
    values
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Splits on spaces that are not inside brackets or braces.
fn split_pairs(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in line.chars() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if !ch.is_whitespace() {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Parses one value in trace notation against its expected type.
pub fn parse_value(text: &str, ty: &Ty, env: &TypeEnv) -> Result<Value, String> {
    let mut p = ValueParser { s: text.as_bytes(), pos: 0 };
    let v = p.value(ty, env)?;
    if p.pos != p.s.len() {
        return Err(format!("trailing text in `{text}`"));
    }
    if !ty.admits(&v, env) {
        return Err(format!("{v} is not a value of {ty}"));
    }
    Ok(v)
}

struct ValueParser<'s> {
    s: &'s [u8],
    pos: usize,
}

impl ValueParser<'_> {
    fn eat(&mut self, c: u8) -> bool {
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{}` at offset {}", c as char, self.pos))
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self
            .s
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_' || *c == b'-')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn value(&mut self, ty: &Ty, env: &TypeEnv) -> Result<Value, String> {
        match ty {
            Ty::Int(_) => {
                let w = self.word();
                w.parse().map(Value::Int).map_err(|_| format!("`{w}` is not an integer"))
            }
            Ty::Bool => match self.word().as_str() {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                w => Err(format!("`{w}` is not a boolean")),
            },
            Ty::Enum(e) => Ok(Value::member(e.clone(), self.word())),
            Ty::Array(elem, _) => {
                self.expect(b'[')?;
                let mut cells = Vec::new();
                if !self.eat(b']') {
                    loop {
                        cells.push(self.value(elem, env)?);
                        if self.eat(b']') {
                            break;
                        }
                        self.expect(b',')?;
                    }
                }
                Ok(Value::Array(cells))
            }
            Ty::Struct(s) => {
                let fields = env.struct_fields(s).ok_or_else(|| format!("unknown struct {s}"))?;
                self.expect(b'{')?;
                let mut rec = Vec::new();
                for (k, (name, fty)) in fields.iter().enumerate() {
                    if k > 0 {
                        self.expect(b',')?;
                    }
                    let got = self.word();
                    if &got != name {
                        return Err(format!("expected field `{name}`, found `{got}`"));
                    }
                    self.expect(b':')?;
                    rec.push((name.clone(), self.value(fty, env)?));
                }
                self.expect(b'}')?;
                Ok(Value::Record(rec))
            }
        }
    }
}

fn random_value(ty: &Ty, env: &TypeEnv, rng: &mut ChaCha8Rng) -> Value {
    match ty {
        Ty::Int(Some(k)) => {
            let (lo, hi) = k.range();
            Value::Int(rng.gen_range(lo..=hi))
        }
        Ty::Int(None) => Value::Int(rng.gen_range(i64::from(i32::MIN)..=i64::from(i32::MAX))),
        Ty::Bool => Value::Bool(rng.gen()),
        Ty::Enum(e) => {
            let ms = env.enum_members(e).unwrap_or(&[]);
            Value::member(e.clone(), ms[rng.gen_range(0..ms.len())].clone())
        }
        Ty::Array(elem, size) => Value::Array((0..size.len).map(|_| random_value(elem, env, rng)).collect()),
        Ty::Struct(s) => Value::Record(
            env.struct_fields(s)
                .unwrap_or(&[])
                .iter()
                .map(|(f, t)| (f.clone(), random_value(t, env, rng)))
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frontend::compile;

    #[test]
    fn compute_sum_trace_parses() {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let (inputs, _) = tp.signature("ComputeSum").unwrap();
        let t = Trace::parse(fixtures::COMPUTE_SUM_TRACE, &inputs, &tp.env).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.cycles[3]["input"].to_string(), "[0,2,4,6,8]");
        let again = Trace::parse(&t.to_string(), &inputs, &tp.env).unwrap();
        assert_eq!(again.cycles, t.cycles);
    }

    #[test]
    fn bad_lines_are_located() {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let (inputs, _) = tp.signature("ComputeSum").unwrap();
        let e = Trace::parse("# c\ninput=[0,0,0,0,0] fby_in=256\n", &inputs, &tp.env).unwrap_err();
        assert_eq!(e.line, 2);
        let e = Trace::parse("input=[0,0,0,0,0]\n", &inputs, &tp.env).unwrap_err();
        assert!(e.message.contains("fby_in"), "{e}");
    }

    #[test]
    fn records_and_enums_parse() {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let ty = Ty::Struct("structType".into());
        let v = parse_value("{fby_data:3,move:Reverse}", &ty, &tp.env).unwrap();
        assert_eq!(v.to_string(), "{fby_data:3,move:Reverse}");
        assert!(parse_value("{fby_data:3,move:Up}", &ty, &tp.env).is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let tp = compile(fixtures::COMPUTE_SUM).unwrap();
        let (inputs, _) = tp.signature("ComputeSum").unwrap();
        let a = Trace::generate(&inputs, &tp.env, 0, 3);
        assert_eq!(a.len(), 3);
        assert!(a.cycles.iter().all(|c| c["input"].as_array().unwrap().len() == 5));
        assert_eq!(a, Trace::generate(&inputs, &tp.env, 0, 3));
        assert_ne!(a.cycles, Trace::generate(&inputs, &tp.env, 1, 3).cycles);
    }
}
