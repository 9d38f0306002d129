use indexmap::IndexMap;

use super::names::{ConstName, TypeName};
use super::types::SimpleType;

/// Kind tag of a declared base type. Recorded but not used by unification.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Type,
    Cotype,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Signature {
    pub types: IndexMap<TypeName, Kind>,
    pub consts: IndexMap<ConstName, SimpleType>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn const_type(&self, c: &ConstName) -> Option<&SimpleType> {
        self.consts.get(c)
    }

    pub fn has_type(&self, t: &TypeName) -> bool {
        self.types.contains_key(t)
    }
}
