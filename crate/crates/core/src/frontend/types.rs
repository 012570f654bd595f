//! Resolved types and the global type environment.

use crate::value::Value;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntKind {
    U8,
    U16,
    U32,
    I8,
    I16,
    I32,
}

impl IntKind {
    /// Order used when declaring the B range constants.
    pub const DECLARATION_ORDER: [IntKind; 6] = [
        IntKind::U32,
        IntKind::U16,
        IntKind::U8,
        IntKind::I32,
        IntKind::I16,
        IntKind::I8,
    ];

    pub fn range(self) -> (i64, i64) {
        match self {
            IntKind::U8 => (0, 255),
            IntKind::U16 => (0, 65_535),
            IntKind::U32 => (0, 4_294_967_295),
            IntKind::I8 => (-128, 127),
            IntKind::I16 => (-32_768, 32_767),
            IntKind::I32 => (-2_147_483_648, 2_147_483_647),
        }
    }

    pub fn scade_name(self) -> &'static str {
        match self {
            IntKind::U8 => "uint8",
            IntKind::U16 => "uint16",
            IntKind::U32 => "uint32",
            IntKind::I8 => "int8",
            IntKind::I16 => "int16",
            IntKind::I32 => "int32",
        }
    }

    pub fn b_name(self) -> &'static str {
        match self {
            IntKind::U8 => "uint8_t",
            IntKind::U16 => "uint16_t",
            IntKind::U32 => "uint32_t",
            IntKind::I8 => "int8_t",
            IntKind::I16 => "int16_t",
            IntKind::I32 => "int32_t",
        }
    }
}

/// Array length; `sym` remembers the constant it was written with.
#[derive(Debug, Clone, Eq)]
pub struct ArraySize {
    pub len: i64,
    pub sym: Option<String>,
}

impl PartialEq for ArraySize {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    /// `None` for untyped integer literals and index arithmetic.
    Int(Option<IntKind>),
    Bool,
    Enum(String),
    Array(Box<Ty>, ArraySize),
    Struct(String),
}

impl Ty {
    pub fn is_int(&self) -> bool {
        matches!(self, Ty::Int(_))
    }

    /// Range check used on every write.
    pub fn admits(&self, v: &Value, env: &TypeEnv) -> bool {
        match (self, v) {
            (Ty::Int(None), Value::Int(_)) => true,
            (Ty::Int(Some(k)), Value::Int(x)) => {
                let (lo, hi) = k.range();
                lo <= *x && *x <= hi
            }
            (Ty::Bool, Value::Bool(_)) => true,
            (Ty::Enum(e), Value::Enum { set, member }) => {
                set == e && env.enum_members(e).is_some_and(|ms| ms.contains(member))
            }
            (Ty::Array(elem, size), Value::Array(cells)) => {
                cells.len() as i64 == size.len && cells.iter().all(|c| elem.admits(c, env))
            }
            (Ty::Struct(s), Value::Record(fields)) => match env.struct_fields(s) {
                Some(decl) => {
                    decl.len() == fields.len()
                        && decl
                            .iter()
                            .zip(fields)
                            .all(|((dn, dt), (n, fv))| dn == n && dt.admits(fv, env))
                }
                None => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int(Some(k)) => f.write_str(k.scade_name()),
            Ty::Int(None) => f.write_str("integer"),
            Ty::Bool => f.write_str("bool"),
            Ty::Enum(n) | Ty::Struct(n) => f.write_str(n),
            Ty::Array(e, s) => match &s.sym {
                Some(sym) => write!(f, "{e}^{sym}"),
                None => write!(f, "{e}^{}", s.len),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstInfo {
    pub name: String,
    pub ty: Ty,
    pub value: Value,
}

#[derive(Debug, Clone, Default)]
pub struct TypeEnv {
    /// Enumerations in declaration order.
    pub enums: Vec<(String, Vec<String>)>,
    pub structs: Vec<(String, Vec<(String, Ty)>)>,
    pub aliases: HashMap<String, Ty>,
    pub consts: Vec<ConstInfo>,
    /// Automaton name and its states, in declaration order.
    pub automata: Vec<(String, Vec<String>)>,
    member_of: HashMap<String, String>,
}

impl TypeEnv {
    pub(crate) fn add_enum(&mut self, name: &str, members: &[String]) {
        for m in members {
            self.member_of.insert(m.clone(), name.to_string());
        }
        self.enums.push((name.to_string(), members.to_vec()));
    }

    pub fn enum_members(&self, name: &str) -> Option<&[String]> {
        self.enums
            .iter()
            .chain(self.automata.iter())
            .find(|(n, _)| n == name)
            .map(|(_, ms)| ms.as_slice())
    }

    /// Enumeration declaring `member`, if any.
    pub fn enum_of_member(&self, member: &str) -> Option<&str> {
        self.member_of.get(member).map(|s| s.as_str())
    }

    pub fn struct_fields(&self, name: &str) -> Option<&[(String, Ty)]> {
        self.structs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, fs)| fs.as_slice())
    }

    pub fn constant(&self, name: &str) -> Option<&ConstInfo> {
        self.consts.iter().find(|c| c.name == name)
    }

    /// Zero value of a type: 0, false, first member, or the composite of those.
    pub fn default_value(&self, ty: &Ty) -> Value {
        match ty {
            Ty::Int(_) => Value::Int(0),
            Ty::Bool => Value::Bool(false),
            Ty::Enum(e) => {
                let first = self
                    .enum_members(e)
                    .and_then(|ms| ms.first())
                    .cloned()
                    .unwrap_or_default();
                Value::member(e.clone(), first)
            }
            Ty::Array(elem, size) => {
                Value::Array(vec![self.default_value(elem); size.len.max(0) as usize])
            }
            Ty::Struct(s) => Value::Record(
                self.struct_fields(s)
                    .unwrap_or(&[])
                    .iter()
                    .map(|(f, t)| (f.clone(), self.default_value(t)))
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_follow_the_declared_width() {
        let env = TypeEnv::default();
        let u8t = Ty::Int(Some(IntKind::U8));
        assert!(u8t.admits(&Value::Int(255), &env));
        assert!(!u8t.admits(&Value::Int(256), &env));
        assert!(Ty::Int(Some(IntKind::I8)).admits(&Value::Int(-128), &env));
    }

    #[test]
    fn defaults_are_structural() {
        let mut env = TypeEnv::default();
        env.add_enum("MOVE", &["Stop".into(), "Forward".into()]);
        env.structs.push((
            "S".into(),
            vec![
                ("a".into(), Ty::Int(Some(IntKind::U8))),
                ("m".into(), Ty::Enum("MOVE".into())),
            ],
        ));
        let v = env.default_value(&Ty::Struct("S".into()));
        assert_eq!(v.to_string(), "{a:0,m:Stop}");
    }
}
