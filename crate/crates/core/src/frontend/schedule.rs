//! Topological scheduling of the items of one block.
//!
//! An `x = fby(..)` equation is split in two units: the read of the buffer
//! head, which depends on nothing from the current cycle, and the shift, which
//! consumes the current input. Ties are broken by a fixed class order and then
//! by source position, so schedules are deterministic.

use super::ast::*;
use super::FrontendError;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Item(usize),
    FbyRead(usize),
    FbyShift(usize),
}

impl Unit {
    pub fn index(self) -> usize {
        match self {
            Unit::Item(i) | Unit::FbyRead(i) | Unit::FbyShift(i) => i,
        }
    }
}

pub fn free_vars(e: &Expr, out: &mut BTreeSet<String>) {
    super::visit_expr(e, &mut |x| {
        if let ExprKind::Var(n) | ExprKind::Ident(n) = &x.kind {
            out.insert(n.clone());
        }
    });
}

/// Variables read (`uses`) and written (`defs`) anywhere inside a block.
pub fn deep_uses_defs(b: &Block, uses: &mut BTreeSet<String>, defs: &mut BTreeSet<String>) {
    for item in &b.items {
        match item {
            BodyItem::Equation(eq) => {
                defs.extend(eq.lhs.iter().filter_map(|l| l.name().map(String::from)));
                free_vars(&eq.rhs, uses);
            }
            BodyItem::Activate(a) => {
                free_vars(&a.cond, uses);
                deep_uses_defs(&a.then_branch, uses, defs);
                deep_uses_defs(&a.else_branch, uses, defs);
            }
            BodyItem::Automaton(sm) => {
                for st in &sm.states {
                    for t in &st.unless {
                        free_vars(&t.cond, uses);
                    }
                    deep_uses_defs(&st.body, uses, defs);
                }
            }
        }
    }
}

fn class(item: &BodyItem, unit: Unit) -> u8 {
    match (unit, item) {
        (Unit::FbyShift(_), _) => 0,
        (_, BodyItem::Equation(_)) => 1,
        (_, BodyItem::Automaton(_)) => 2,
        (_, BodyItem::Activate(_)) => 3,
    }
}

struct UnitDeps {
    unit: Unit,
    uses: BTreeSet<String>,
    defs: BTreeSet<String>,
}

fn unit_deps(b: &Block) -> Result<Vec<UnitDeps>, FrontendError> {
    let mut out = Vec::new();
    for (i, item) in b.items.iter().enumerate() {
        match item {
            BodyItem::Equation(eq) => {
                let defs: BTreeSet<String> =
                    eq.lhs.iter().filter_map(|l| l.name().map(String::from)).collect();
                if let ExprKind::Fby(f) = &eq.rhs.kind {
                    out.push(UnitDeps {
                        unit: Unit::FbyRead(i),
                        uses: BTreeSet::new(),
                        defs,
                    });
                    let mut uses = BTreeSet::new();
                    free_vars(&f.input, &mut uses);
                    out.push(UnitDeps {
                        unit: Unit::FbyShift(i),
                        uses,
                        defs: BTreeSet::new(),
                    });
                } else {
                    let mut uses = BTreeSet::new();
                    free_vars(&eq.rhs, &mut uses);
                    out.push(UnitDeps {
                        unit: Unit::Item(i),
                        uses,
                        defs,
                    });
                }
            }
            BodyItem::Activate(_) | BodyItem::Automaton(_) => {
                let mut cond_uses = BTreeSet::new();
                let (mut inner_uses, mut defs) = (BTreeSet::new(), BTreeSet::new());
                let span = match item {
                    BodyItem::Activate(a) => {
                        free_vars(&a.cond, &mut cond_uses);
                        deep_uses_defs(&a.then_branch, &mut inner_uses, &mut defs);
                        deep_uses_defs(&a.else_branch, &mut inner_uses, &mut defs);
                        a.span
                    }
                    BodyItem::Automaton(sm) => {
                        for st in &sm.states {
                            for t in &st.unless {
                                free_vars(&t.cond, &mut cond_uses);
                            }
                            deep_uses_defs(&st.body, &mut inner_uses, &mut defs);
                        }
                        sm.span
                    }
                    BodyItem::Equation(_) => unreachable!(),
                };
                let self_cycle: Vec<String> = cond_uses.intersection(&defs).cloned().collect();
                if !self_cycle.is_empty() {
                    return Err(FrontendError::new(
                        span,
                        format!(
                            "instantaneous dependency cycle: {} (condition reads a variable its own body defines)",
                            self_cycle.join(", ")
                        ),
                    ));
                }
                let mut uses = cond_uses;
                uses.extend(inner_uses.difference(&defs).cloned());
                out.push(UnitDeps {
                    unit: Unit::Item(i),
                    uses,
                    defs,
                });
            }
        }
    }
    Ok(out)
}

fn item_span(item: &BodyItem) -> Span {
    match item {
        BodyItem::Equation(e) => e.span,
        BodyItem::Activate(a) => a.span,
        BodyItem::Automaton(sm) => sm.span,
    }
}

/// Orders the items of one block so every variable is written before it is
/// read in the same cycle. Nested blocks are ordered separately.
pub fn dependency_order(b: &Block) -> Result<Vec<Unit>, FrontendError> {
    let units = unit_deps(b)?;
    let mut def_site: HashMap<&str, usize> = HashMap::new();
    for (k, u) in units.iter().enumerate() {
        for d in &u.defs {
            def_site.insert(d.as_str(), k);
        }
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); units.len()];
    let mut indeg = vec![0usize; units.len()];
    for (k, u) in units.iter().enumerate() {
        let mut preds: BTreeSet<usize> = u
            .uses
            .iter()
            .filter_map(|v| def_site.get(v.as_str()).copied())
            .collect();
        if let Unit::FbyShift(i) = u.unit {
            preds.insert(
                units
                    .iter()
                    .position(|x| x.unit == Unit::FbyRead(i))
                    .expect("read unit"),
            );
        }
        for p in preds {
            succ[p].push(k);
            indeg[k] += 1;
        }
    }
    let key = |k: usize| {
        let u = units[k].unit;
        Reverse((class(&b.items[u.index()], u), u.index(), k))
    };
    let mut heap: BinaryHeap<_> = (0..units.len()).filter(|&k| indeg[k] == 0).map(key).collect();
    let mut order = Vec::with_capacity(units.len());
    while let Some(Reverse((_, _, k))) = heap.pop() {
        order.push(units[k].unit);
        for &s in &succ[k] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                heap.push(key(s));
            }
        }
    }
    if order.len() < units.len() {
        let remaining: Vec<usize> = (0..units.len()).filter(|&k| indeg[k] > 0).collect();
        let mut used: BTreeSet<&str> = BTreeSet::new();
        for &k in &remaining {
            used.extend(units[k].uses.iter().map(|s| s.as_str()));
        }
        let vars: BTreeMap<&str, ()> = remaining
            .iter()
            .flat_map(|&k| units[k].defs.iter().map(|s| s.as_str()))
            .filter(|d| used.contains(d))
            .map(|d| (d, ()))
            .collect();
        let names: Vec<&str> = vars.keys().copied().collect();
        let span = item_span(&b.items[units[remaining[0]].unit.index()]);
        return Err(FrontendError::new(
            span,
            format!("instantaneous dependency cycle: {}", names.join(", ")),
        ));
    }
    Ok(order)
}

/// Checks every block of a node for cycles.
pub fn check_block(b: &Block) -> Result<(), FrontendError> {
    dependency_order(b)?;
    for item in &b.items {
        match item {
            BodyItem::Equation(_) => {}
            BodyItem::Activate(a) => {
                check_block(&a.then_branch)?;
                check_block(&a.else_branch)?;
            }
            BodyItem::Automaton(sm) => {
                for st in &sm.states {
                    check_block(&st.body)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn body(src: &str) -> Block {
        parse_program(src).unwrap().nodes.pop().unwrap().body
    }

    fn lhs_names(b: &Block, order: &[Unit]) -> Vec<String> {
        order
            .iter()
            .map(|u| match (&b.items[u.index()], u) {
                (BodyItem::Equation(eq), Unit::FbyShift(_)) => {
                    format!("shift:{}", eq.lhs[0].name().unwrap())
                }
                (BodyItem::Equation(eq), _) => eq.lhs[0].name().unwrap().to_string(),
                _ => "block".into(),
            })
            .collect()
    }

    #[test]
    fn simple_chain() {
        let b = body(
            "function sq(x: uint8) returns (y: uint8) let y = x; tel
             node n(input: uint8^5) returns (output: uint8^5)
             var L12: uint8^5; L13: uint8^5;
             let output = L12; L13 = input; L12 = (map sq <<5>>)(L13); tel",
        );
        let order = dependency_order(&b).unwrap();
        assert_eq!(lhs_names(&b, &order), ["L13", "L12", "output"]);
    }

    #[test]
    fn cycle_is_reported_with_sorted_names() {
        let b = body("node n() returns (a: int32; b: int32) let b = a; a = b; tel");
        let e = dependency_order(&b).unwrap_err();
        assert!(e.message.ends_with("cycle: a, b"), "{}", e.message);
    }

    #[test]
    fn fby_breaks_the_cycle() {
        let b = body("node n() returns (a: int32; b: int32) let a = fby(b; 1; 0); b = a + 1; tel");
        let order = dependency_order(&b).unwrap();
        assert_eq!(lhs_names(&b, &order), ["a", "b", "shift:a"]);
    }

    #[test]
    fn condition_reading_own_definition_is_a_cycle() {
        let b = body(
            "node n() returns (y: bool)
             let activate if y then let y = true; tel else let y = false; tel returns .. ; tel",
        );
        assert!(dependency_order(&b).unwrap_err().message.contains("cycle: y"));
    }
}
