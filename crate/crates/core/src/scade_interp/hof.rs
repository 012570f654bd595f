//! Execution of the twelve iterators over already evaluated arguments.

use super::EvalError;
use crate::frontend::ast::{HofFamily, HofKind};
use crate::value::Value;

/// The iterated operator: `[index] accs elements` to `[cond] accs results`.
pub type OpFn<'a> = dyn FnMut(&[Value]) -> Result<Vec<Value>, EvalError> + 'a;

/// Static shape of one iterator application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HofShape {
    pub kind: HofKind,
    pub accs: usize,
    pub size: usize,
    /// Number of per-element results of the operator (`m`).
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HofResult {
    /// Number of iterations performed, for the `w` variants.
    pub idx: Option<usize>,
    /// Final continuation flag, for the `w` variants.
    pub cond: Option<bool>,
    pub accs: Vec<Value>,
    pub arrays: Vec<Vec<Value>>,
}

impl HofResult {
    /// Values in the order of the equation's left-hand side.
    pub fn into_lhs(self, kind: HofKind) -> Vec<Value> {
        let mut out = Vec::new();
        if let Some(i) = self.idx {
            out.push(Value::Int(i as i64));
        }
        if kind.family() == HofFamily::MapFold {
            if let Some(c) = self.cond {
                out.push(Value::Bool(c));
            }
        }
        out.extend(self.accs);
        out.extend(self.arrays.into_iter().map(Value::Array));
        out
    }
}

/// Runs `op` over the arrays. `op` receives `[index] accs elements` and
/// returns `[cond] accs results`.
pub fn eval_hof(
    shape: HofShape,
    init_cond: Option<bool>,
    defaults: &[Value],
    acc_inits: Vec<Value>,
    arrays: &[Vec<Value>],
    op: &mut OpFn,
) -> Result<HofResult, EvalError> {
    let kind = shape.kind;
    let w = kind.is_while();
    let mut cond = if w { init_cond.unwrap_or(true) } else { true };
    let mut accs = acc_inits;
    let mut results: Vec<Vec<Value>> = vec![Vec::with_capacity(shape.size); shape.outputs];
    let mut idx = 0;
    while idx < shape.size && cond {
        let mut args = Vec::with_capacity(1 + accs.len() + arrays.len());
        if kind.indexed() {
            args.push(Value::Int(idx as i64));
        }
        args.extend(accs.iter().cloned());
        for a in arrays {
            let cell = a.get(idx).ok_or(EvalError::IndexOutOfBounds {
                index: idx as i64,
                len: a.len(),
            })?;
            args.push(cell.clone());
        }
        let out = op(&args).map_err(|e| EvalError::InIteration {
            index: idx,
            source: Box::new(e),
        })?;
        let mut it = out.into_iter();
        if w {
            cond = it.next().and_then(|v| v.as_bool()).unwrap_or(false);
        }
        accs = it.by_ref().take(shape.accs).collect();
        for r in results.iter_mut() {
            r.push(it.next().expect("operator arity"));
        }
        idx += 1;
    }
    for (r, d) in results.iter_mut().zip(defaults.iter().chain(std::iter::repeat(&Value::Int(0)))) {
        r.resize(shape.size, d.clone());
    }
    Ok(HofResult {
        idx: w.then_some(idx),
        cond: w.then_some(cond),
        accs,
        arrays: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Value> {
        v.iter().map(|&x| Value::Int(x)).collect()
    }

    #[test]
    fn map_adds_pointwise() {
        let a1 = ints(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let a2 = ints(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let shape = HofShape { kind: HofKind::Map, accs: 0, size: 10, outputs: 1 };
        let r = eval_hof(shape, None, &[], vec![], &[a1, a2], &mut |a| {
            Ok(vec![Value::Int(a[0].as_int().unwrap() + a[1].as_int().unwrap())])
        })
        .unwrap();
        assert_eq!(r.arrays[0], ints(&[1, 3, 5, 7, 9, 11, 13, 15, 17, 19]));
    }

    #[test]
    fn fold_threads_the_accumulator() {
        let shape = HofShape { kind: HofKind::Fold, accs: 1, size: 3, outputs: 0 };
        let r = eval_hof(shape, None, &[], ints(&[0]), &[ints(&[1, 2, 3])], &mut |a| {
            Ok(vec![Value::Int(a[0].as_int().unwrap() + a[1].as_int().unwrap())])
        })
        .unwrap();
        assert_eq!(r.accs, ints(&[6]));
    }

    #[test]
    fn foldw_with_false_initcond_does_nothing() {
        let shape = HofShape { kind: HofKind::Foldw, accs: 1, size: 3, outputs: 0 };
        let r = eval_hof(shape, Some(false), &[], ints(&[7]), &[ints(&[1, 2, 3])], &mut |_| {
            panic!("operator must not run")
        })
        .unwrap();
        assert_eq!((r.idx, r.accs), (Some(0), ints(&[7])));
    }

    #[test]
    fn mapwi_stops_and_fills_defaults() {
        let shape = HofShape { kind: HofKind::Mapwi, accs: 0, size: 4, outputs: 1 };
        let r = eval_hof(shape, Some(true), &ints(&[99]), vec![], &[ints(&[5, 6, 7, 8])], &mut |a| {
            let i = a[0].as_int().unwrap();
            Ok(vec![Value::Bool(i < 1), Value::Int(10 * i + a[1].as_int().unwrap())])
        })
        .unwrap();
        assert_eq!(r.arrays[0], ints(&[5, 16, 99, 99]));
        assert_eq!((r.idx, r.cond), (Some(2), Some(false)));
    }
}
