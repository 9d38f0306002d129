use std::fmt;
use std::sync::Arc;

use super::names::TypeName;

/// Simple types; arrows associate to the right.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SimpleType {
    Base(TypeName),
    Arrow(Arc<SimpleType>, Arc<SimpleType>),
}

impl SimpleType {
    pub fn base(name: &str) -> Self {
        SimpleType::Base(TypeName::new(name))
    }

    pub fn arrow(arg: SimpleType, result: SimpleType) -> Self {
        SimpleType::Arrow(Arc::new(arg), Arc::new(result))
    }

    /// `a1 -> ... -> an -> result`.
    pub fn arrows(args: impl IntoIterator<Item = SimpleType>, result: SimpleType) -> Self {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(result, |acc, a| SimpleType::arrow(a, acc))
    }

    /// Argument types and the final base type.
    pub fn uncurry(&self) -> (Vec<SimpleType>, TypeName) {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                SimpleType::Base(b) => return (args, b.clone()),
                SimpleType::Arrow(a, r) => {
                    args.push((**a).clone());
                    cur = r;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    pub fn result_base(&self) -> TypeName {
        self.uncurry().1
    }

    /// Drops the first `n` arguments.
    pub fn drop_args(&self, n: usize) -> Option<SimpleType> {
        let mut cur = self;
        for _ in 0..n {
            match cur {
                SimpleType::Arrow(_, r) => cur = r,
                SimpleType::Base(_) => return None,
            }
        }
        Some(cur.clone())
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Base(b) => write!(f, "{b}"),
            SimpleType::Arrow(a, r) => match **a {
                SimpleType::Arrow(..) => write!(f, "({a}) -> {r}"),
                SimpleType::Base(_) => write!(f, "{a} -> {r}"),
            },
        }
    }
}
