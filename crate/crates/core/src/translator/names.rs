//! Mapping of SCADE identifiers onto B identifiers.
//!
//! A name whose stem (trailing underscores removed) is a B keyword or a
//! predefined B name gets one extra trailing underscore. The map is injective
//! and `unmangle` inverts it.

use crate::value::Value;
use std::collections::HashSet;

const B_RESERVED: &[&str] = &[
    "MACHINE", "REFINEMENT", "IMPLEMENTATION", "REFINES", "SETS", "CONSTANTS", "CONCRETE_CONSTANTS",
    "ABSTRACT_CONSTANTS", "PROPERTIES", "VARIABLES", "CONCRETE_VARIABLES", "ABSTRACT_VARIABLES",
    "INVARIANT", "ASSERTIONS", "INITIALISATION", "OPERATIONS", "DEFINITIONS", "SEES", "INCLUDES",
    "EXTENDS", "PROMOTES", "USES", "IMPORTS", "VALUES", "CONSTRAINTS", "LOCAL_OPERATIONS", "END",
    "BEGIN", "PRE", "THEN", "IF", "ELSIF", "ELSE", "CASE", "OF", "EITHER", "OR", "SELECT", "WHEN",
    "ANY", "WHERE", "LET", "BE", "IN", "VAR", "WHILE", "DO", "VARIANT", "CHOICE", "ASSERT", "skip",
    "or", "not", "mod", "bool", "rec", "struct", "card", "dom", "ran", "max", "min", "id", "succ",
    "pred", "union", "inter", "size", "seq", "seq1", "iseq", "iseq1", "perm", "first", "last",
    "front", "tail", "rev", "conc", "closure", "closure1", "iterate", "prj1", "prj2", "fnc", "rel",
    "POW", "POW1", "FIN", "FIN1", "BOOL", "TRUE", "FALSE", "INTEGER", "INT", "NAT", "NAT1",
    "NATURAL", "NATURAL1", "MAXINT", "MININT", "STRING", "btrue", "bfalse", "SIGMA", "PI", "UNION",
    "INTER", "uint8_t", "uint16_t", "uint32_t", "int8_t", "int16_t", "int32_t",
];

pub fn is_b_reserved(s: &str) -> bool {
    B_RESERVED.contains(&s)
}

pub fn mangle(name: &str) -> String {
    if is_b_reserved(name.trim_end_matches('_')) {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

pub fn unmangle(name: &str) -> String {
    match name.strip_suffix('_') {
        Some(base) if is_b_reserved(base.trim_end_matches('_')) => base.to_string(),
        _ => name.to_string(),
    }
}

/// Applies `f` to every enum set, member and record field name inside `v`.
pub fn rename_value(v: &Value, f: &dyn Fn(&str) -> String) -> Value {
    match v {
        Value::Int(_) | Value::Bool(_) => v.clone(),
        Value::Enum { set, member } => Value::member(f(set), f(member)),
        Value::Array(cells) => Value::Array(cells.iter().map(|c| rename_value(c, f)).collect()),
        Value::Record(fields) => Value::Record(
            fields
                .iter()
                .map(|(n, x)| (f(n), rename_value(x, f)))
                .collect(),
        ),
    }
}

/// Names already in use in some scope; hands out fresh ones.
#[derive(Debug, Clone, Default)]
pub struct NameSet {
    taken: HashSet<String>,
}

impl NameSet {
    pub fn insert(&mut self, name: impl Into<String>) {
        self.taken.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.taken.contains(name) || is_b_reserved(name)
    }

    /// `base` itself if free, else `base1`, `base2`, ... The result is reserved.
    pub fn fresh(&mut self, base: &str) -> String {
        let mut k = 0;
        let name = loop {
            let cand = if k == 0 {
                base.to_string()
            } else {
                format!("{base}{k}")
            };
            if !self.contains(&cand) {
                break cand;
            }
            k += 1;
        };
        self.taken.insert(name.clone());
        name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mangling_is_injective_and_invertible() {
        let names = ["x", "skip", "skip_", "skip__", "END", "uint8_t", "store", "_"];
        let mangled: HashSet<String> = names.iter().map(|n| mangle(n)).collect();
        assert_eq!(mangled.len(), names.len());
        for n in names {
            assert_eq!(unmangle(&mangle(n)), n);
        }
        assert_eq!(mangle("skip"), "skip_");
        assert_eq!(mangle("input"), "input");
    }

    #[test]
    fn fresh_names_skip_taken_ones() {
        let mut ns = NameSet::default();
        ns.insert("idx");
        assert_eq!(ns.fresh("idx"), "idx1");
        assert_eq!(ns.fresh("idx"), "idx2");
        assert_eq!(ns.fresh("acc"), "acc");
    }
}
