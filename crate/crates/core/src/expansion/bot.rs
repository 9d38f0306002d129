use std::fmt;

use crate::term_core::{ConstName, MetaId, Mode, Var};

/// A variable inside an observation tree. Bound variables are identified
/// by binder level counted from the root, so structural equality of trees
/// is α-equivalence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Atom {
    Bound(usize),
    Free(Var),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BotHead {
    Const(ConstName),
    Var(Atom),
}

/// Depth-k observation of a term.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BotTerm {
    Bot,
    Node {
        lams: usize,
        head: BotHead,
        args: Vec<BotTerm>,
    },
    Leaf {
        lams: usize,
        meta: MetaId,
        mode: Mode,
        args: Vec<Atom>,
    },
}

impl BotTerm {
    pub fn depth(&self) -> usize {
        match self {
            BotTerm::Bot => 0,
            BotTerm::Leaf { .. } => 1,
            BotTerm::Node { args, .. } => 1 + args.iter().map(BotTerm::depth).max().unwrap_or(0),
        }
    }

    /// Replaces everything below depth `k` by ⊥.
    pub fn truncate(&self, k: usize) -> BotTerm {
        if k == 0 {
            return BotTerm::Bot;
        }
        match self {
            BotTerm::Node { lams, head, args } => BotTerm::Node {
                lams: *lams,
                head: head.clone(),
                args: args.iter().map(|a| a.truncate(k - 1)).collect(),
            },
            t => t.clone(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            BotTerm::Node { args, .. } => 1 + args.iter().map(BotTerm::size).sum::<usize>(),
            _ => 1,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, level: usize) -> fmt::Result {
        let atom = |f: &mut fmt::Formatter<'_>, a: &Atom| match a {
            Atom::Bound(i) => write!(f, "x{i}"),
            Atom::Free(v) => write!(f, "{v}"),
        };
        let lam = |f: &mut fmt::Formatter<'_>, n: usize| -> fmt::Result {
            for i in 0..n {
                write!(f, "λx{}. ", level + i)?;
            }
            Ok(())
        };
        match self {
            BotTerm::Bot => write!(f, "⊥"),
            BotTerm::Leaf {
                lams, meta, args, ..
            } => {
                lam(f, *lams)?;
                write!(f, "{meta}")?;
                for a in args {
                    write!(f, " ")?;
                    atom(f, a)?;
                }
                Ok(())
            }
            BotTerm::Node { lams, head, args } => {
                lam(f, *lams)?;
                match head {
                    BotHead::Const(c) => write!(f, "{c}")?,
                    BotHead::Var(a) => atom(f, a)?,
                }
                for a in args {
                    let simple = matches!(a, BotTerm::Bot)
                        || matches!(a, BotTerm::Node { lams: 0, args, .. } if args.is_empty())
                        || matches!(a, BotTerm::Leaf { lams: 0, args, .. } if args.is_empty());
                    if simple {
                        write!(f, " ")?;
                        a.write(f, level + lams)?;
                    } else {
                        write!(f, " (")?;
                        a.write(f, level + lams)?;
                        write!(f, ")")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for BotTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
