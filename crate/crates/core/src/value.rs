//! Runtime values shared by the SCADE and B interpreters.
//!
//! Arrays are total functions on `0..n-1`, so the B side reuses the same
//! representation. Integer ranges are enforced where values are written, not
//! carried inside the value.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    /// Member of an enumerated set (SCADE enum or automaton state set).
    Enum { set: String, member: String },
    Array(Vec<Value>),
    /// Fields in declaration order.
    Record(Vec<(String, Value)>),
}

impl Value {
    pub fn member(set: impl Into<String>, member: impl Into<String>) -> Value {
        Value::Enum {
            set: set.into(),
            member: member.into(),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match self {
            Value::Array(cells) => Some(cells),
            _ => None,
        }
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Record(fields) => fields.iter().find(|(f, _)| f == name).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Renders the value in B notation (`TRUE`, `{0 |-> 1}`, `rec(a: 1)`).
    pub fn to_b_string(&self) -> String {
        let mut out = String::new();
        self.write_b(&mut out);
        out
    }

    fn write_b(&self, out: &mut String) {
        match self {
            Value::Int(v) => out.push_str(&v.to_string()),
            Value::Bool(true) => out.push_str("TRUE"),
            Value::Bool(false) => out.push_str("FALSE"),
            Value::Enum { member, .. } => out.push_str(member),
            Value::Array(cells) => {
                out.push('{');
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&format!("{i} |-> "));
                    c.write_b(out);
                }
                out.push('}');
            }
            Value::Record(fields) => {
                out.push_str("rec(");
                for (i, (f, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(f);
                    out.push_str(": ");
                    v.write_b(out);
                }
                out.push(')');
            }
        }
    }
}

/// Trace-file notation: `true`, `[1,2]`, `{a:1,b:Stop}`. Never contains spaces.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Enum { member, .. } => f.write_str(member),
            Value::Array(cells) => {
                f.write_str("[")?;
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("]")
            }
            Value::Record(fields) => {
                f.write_str("{")?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{name}:{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_notations() {
        let rec = Value::Record(vec![
            ("fby_data".into(), Value::Int(1)),
            ("move".into(), Value::member("MOVE", "Forward")),
        ]);
        assert_eq!(rec.to_string(), "{fby_data:1,move:Forward}");
        assert_eq!(rec.to_b_string(), "rec(fby_data: 1, move: Forward)");
        let arr = Value::Array(vec![Value::Int(0), Value::Bool(true)]);
        assert_eq!(arr.to_string(), "[0,true]");
        assert_eq!(arr.to_b_string(), "{0 |-> 0, 1 |-> TRUE}");
    }
}
