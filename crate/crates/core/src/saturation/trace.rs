//! Rule names and the numbered derivation record.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use serde::{Serialize, Serializer};

use crate::surface::Namer;
use crate::term_core::{Def, Equation, MetaId, MetaInfo, RecId, UnifContext};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum RuleId {
    // first-order
    SimpF,
    RExp,
    // shared by both rule sets
    Simp,
    USym,
    NSym,
    UTrans,
    NTrans,
    // higher-order
    UInst,
    NInst,
    SimpF1,
    SimpF2,
    SimpF3,
    ProjF,
    Imit,
    Proj,
    Prune,
    FfD,
    FfS,
    RecExp,
    UAgree,
    NAgree,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::SimpF,
        RuleId::RExp,
        RuleId::Simp,
        RuleId::USym,
        RuleId::NSym,
        RuleId::UTrans,
        RuleId::NTrans,
        RuleId::UInst,
        RuleId::NInst,
        RuleId::SimpF1,
        RuleId::SimpF2,
        RuleId::SimpF3,
        RuleId::ProjF,
        RuleId::Imit,
        RuleId::Proj,
        RuleId::Prune,
        RuleId::FfD,
        RuleId::FfS,
        RuleId::RecExp,
        RuleId::UAgree,
        RuleId::NAgree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::SimpF => "SIMP-F",
            RuleId::RExp => "R-EXP",
            RuleId::Simp => "SIMP",
            RuleId::USym => "U-SYM",
            RuleId::NSym => "N-SYM",
            RuleId::UTrans => "U-TRANS",
            RuleId::NTrans => "N-TRANS",
            RuleId::UInst => "U-INST",
            RuleId::NInst => "N-INST",
            RuleId::SimpF1 => "SIMP-F1",
            RuleId::SimpF2 => "SIMP-F2",
            RuleId::SimpF3 => "SIMP-F3",
            RuleId::ProjF => "PROJ-F",
            RuleId::Imit => "IMIT",
            RuleId::Proj => "PROJ",
            RuleId::Prune => "PRUNE",
            RuleId::FfD => "FF-D",
            RuleId::FfS => "FF-S",
            RuleId::RecExp => "REC-EXP",
            RuleId::UAgree => "U-AGREE",
            RuleId::NAgree => "N-AGREE",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Rules whose conclusions introduce metavariables or recursion
    /// constants.
    pub fn creates_symbols(self) -> bool {
        matches!(
            self,
            RuleId::Imit | RuleId::Proj | RuleId::Prune | RuleId::FfD | RuleId::FfS
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Number of an equation or definition in a derivation, counting the
/// given items first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub struct ItemNo(pub usize);

impl fmt::Display for ItemNo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceItem {
    Eq(Equation),
    Def(RecId, Def),
    Contra,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub rule: RuleId,
    pub premises: Vec<ItemNo>,
    pub produced: Vec<(ItemNo, TraceItem)>,
    /// Metavariables introduced by the step.
    pub new_metas: Vec<(MetaId, MetaInfo)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SatTrace {
    pub given: Vec<(ItemNo, TraceItem)>,
    pub steps: Vec<TraceStep>,
}

impl SatTrace {
    pub fn rules(&self) -> Vec<RuleId> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    pub fn count(&self, rule: RuleId) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }

    /// The step that produced item `n`.
    pub fn producer(&self, n: ItemNo) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.produced.iter().any(|(m, _)| *m == n))
    }

    pub fn item(&self, n: ItemNo) -> Option<&TraceItem> {
        self.given
            .iter()
            .chain(self.steps.iter().flat_map(|s| s.produced.iter()))
            .find(|(m, _)| *m == n)
            .map(|(_, i)| i)
    }

    /// Applies the recorded steps to `initial`.
    pub fn replay(&self, initial: &UnifContext) -> UnifContext {
        let mut out = initial.clone();
        let mut keys: HashSet<(String, String)> = out.eqs.iter().map(Equation::key).collect();
        for s in &self.steps {
            for (m, info) in &s.new_metas {
                out.metas.insert(m.clone(), info.clone());
            }
            for (_, item) in &s.produced {
                match item {
                    TraceItem::Eq(e) => {
                        if keys.insert(e.key()) {
                            out.eqs.push(e.clone());
                        }
                    }
                    TraceItem::Def(r, d) => {
                        out.defs.insert(r.clone(), d.clone());
                    }
                    TraceItem::Contra => out.contra = true,
                }
            }
        }
        out
    }

    /// One line per item: `(n) item   by RULE on (i), (j)`.
    pub fn render(&self, namer: &mut Namer) -> String {
        let all = self.given.iter().chain(self.steps.iter().flat_map(|s| s.produced.iter()));
        for (_, item) in all {
            match item {
                TraceItem::Eq(e) => {
                    namer.reserve_term(&e.lhs);
                    namer.reserve_term(&e.rhs);
                }
                TraceItem::Def(r, d) => namer.reserve_def(r, d),
                TraceItem::Contra => {}
            }
        }
        let mut out = String::new();
        let mut line = |out: &mut String, n: ItemNo, item: &TraceItem, why: &str| {
            let text = match item {
                TraceItem::Eq(e) => format!("{} = {}", namer.term(&e.lhs, false), namer.term(&e.rhs, false)),
                TraceItem::Def(r, d) => {
                    format!("{} =d {}", namer.rec(r), namer.term(&d.as_lambda(), false))
                }
                TraceItem::Contra => "contra".to_string(),
            };
            let _ = writeln!(out, "{n} {text}    {why}");
        };
        for (n, item) in &self.given {
            line(&mut out, *n, item, "given");
        }
        for s in &self.steps {
            let on: Vec<String> = s.premises.iter().map(ItemNo::to_string).collect();
            let why = if on.is_empty() {
                format!("by {}", s.rule)
            } else {
                format!("by {} on {}", s.rule, on.join(", "))
            };
            for (i, (n, item)) in s.produced.iter().enumerate() {
                line(&mut out, *n, item, if i == 0 { &why } else { "" });
            }
        }
        out
    }
}
