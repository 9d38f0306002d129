use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Prefix of every engine-generated identifier. The lexer rejects it, so
/// generated names can never clash with names written by the user.
pub const GEN_PREFIX: char = '$';

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_generated(&self) -> bool {
        self.0.starts_with(GEN_PREFIX)
    }

    /// The name with the generated-name prefix removed.
    pub fn display_name(&self) -> &str {
        self.0.trim_start_matches(GEN_PREFIX)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! name_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub Sym);

        impl $name {
            pub fn new(s: &str) -> Self {
                $name(Sym::new(s))
            }

            pub fn as_str(&self) -> &str {
                self.0.as_str()
            }

            pub fn is_generated(&self) -> bool {
                self.0.is_generated()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.0.as_str())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.0.display_name())
            }
        }
    };
}

name_type!(
    /// A bound (or instantiated) term variable.
    Var
);
name_type!(
    /// A unification metavariable.
    MetaId
);
name_type!(
    /// A recursion constant.
    RecId
);
name_type!(
    /// A constructor declared in the signature.
    ConstName
);
name_type!(
    /// A base type name.
    TypeName
);

/// Monotone supply of fresh identifiers, one counter per hint.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    counters: HashMap<String, u64>,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    fn next(&mut self, hint: &str) -> String {
        let n = self.counters.entry(hint.to_string()).or_insert(0);
        *n += 1;
        format!("{GEN_PREFIX}{hint}{n}")
    }

    pub fn fresh_var(&mut self, hint: &str) -> Var {
        Var::new(&self.next(hint))
    }

    pub fn fresh_meta(&mut self, hint: &str) -> MetaId {
        MetaId::new(&self.next(hint))
    }

    pub fn fresh_rec(&mut self, hint: &str) -> RecId {
        RecId::new(&self.next(hint))
    }

    /// Makes sure later fresh names never coincide with `s`.
    pub fn reserve(&mut self, s: &Sym) {
        let Some(rest) = s.as_str().strip_prefix(GEN_PREFIX) else {
            return;
        };
        let split = rest.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (hint, digits) = rest.split_at(split);
        if let Ok(n) = digits.parse::<u64>() {
            let c = self.counters.entry(hint.to_string()).or_insert(0);
            *c = (*c).max(n);
        }
    }
}

/// Returns `base` with primes appended until `taken` rejects no more.
pub fn primed(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut s = format!("{base}'");
    while taken(&s) {
        s.push('\'');
    }
    s
}
