use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::Formula;

/// Inference rules of the toy natural-deduction system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `φ ⊢ φ`; one premise.
    Reiterate,
    /// `φ, ψ ⊢ φ ∧ ψ`.
    AndIntro,
    AndElimLeft,
    AndElimRight,
    /// `φ ⊢ φ ∨ ψ` for any well-formed `ψ`.
    OrIntroLeft,
    /// `ψ ⊢ φ ∨ ψ`.
    OrIntroRight,
    /// `φ → ψ, φ ⊢ ψ` (premises in that order).
    ImpElim,
    /// `φ, ¬φ ⊢ ψ` for any `ψ`.
    NotElim,
    /// `¬¬φ ⊢ φ`.
    DoubleNegElim,
    /// `φ ∨ ψ, φ → χ, ψ → χ ⊢ χ`.
    OrElim,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Reiterate,
        Rule::AndIntro,
        Rule::AndElimLeft,
        Rule::AndElimRight,
        Rule::OrIntroLeft,
        Rule::OrIntroRight,
        Rule::ImpElim,
        Rule::NotElim,
        Rule::DoubleNegElim,
        Rule::OrElim,
    ];

    pub fn arity(self) -> usize {
        match self {
            Rule::Reiterate
            | Rule::AndElimLeft
            | Rule::AndElimRight
            | Rule::OrIntroLeft
            | Rule::OrIntroRight
            | Rule::DoubleNegElim => 1,
            Rule::AndIntro | Rule::ImpElim | Rule::NotElim => 2,
            Rule::OrElim => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Rule::Reiterate => "reiterate",
            Rule::AndIntro => "and_intro",
            Rule::AndElimLeft => "and_elim_left",
            Rule::AndElimRight => "and_elim_right",
            Rule::OrIntroLeft => "or_intro_left",
            Rule::OrIntroRight => "or_intro_right",
            Rule::ImpElim => "imp_elim",
            Rule::NotElim => "not_elim",
            Rule::DoubleNegElim => "double_neg_elim",
            Rule::OrElim => "or_elim",
        }
    }

    /// Whether `conclusion` follows from `premises` by this rule.
    pub fn admits(self, premises: &[&Formula], conclusion: &Formula) -> bool {
        use Formula::*;
        if premises.len() != self.arity() {
            return false;
        }
        match self {
            Rule::Reiterate => premises[0] == conclusion,
            Rule::AndIntro => match conclusion {
                And(l, r) => **l == *premises[0] && **r == *premises[1],
                _ => false,
            },
            Rule::AndElimLeft => matches!(premises[0], And(l, _) if **l == *conclusion),
            Rule::AndElimRight => matches!(premises[0], And(_, r) if **r == *conclusion),
            Rule::OrIntroLeft => matches!(conclusion, Or(l, _) if **l == *premises[0]),
            Rule::OrIntroRight => matches!(conclusion, Or(_, r) if **r == *premises[0]),
            Rule::ImpElim => {
                matches!(premises[0], Implies(a, b) if **a == *premises[1] && **b == *conclusion)
            }
            Rule::NotElim => matches!(premises[1], Not(inner) if **inner == *premises[0]),
            Rule::DoubleNegElim => {
                matches!(premises[0], Not(inner) if matches!(&**inner, Not(x) if **x == *conclusion))
            }
            Rule::OrElim => match (premises[0], premises[1], premises[2]) {
                (Or(a, b), Implies(a2, c1), Implies(b2, c2)) => {
                    a == a2 && b == b2 && **c1 == *conclusion && **c2 == *conclusion
                }
                _ => false,
            },
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Reference to a premise: an earlier step (0-based) or an assumption of the
/// target statement (0-based, in the canonical order of the assumption set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseRef {
    Step(usize),
    Assumption(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineStep {
    pub formula: Formula,
    pub rule: Rule,
    #[serde(default)]
    pub premises: Vec<PremiseRef>,
}

impl MachineStep {
    pub fn new(formula: Formula, rule: Rule, premises: impl IntoIterator<Item = PremiseRef>) -> Self {
        Self {
            formula,
            rule,
            premises: premises.into_iter().collect(),
        }
    }
}

/// A level-0 claim of proof: a derivation checkable by the machine verifier.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineProof {
    pub steps: Vec<MachineStep>,
}

impl MachineProof {
    pub fn new(steps: Vec<MachineStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn rules_check_shapes() {
        assert!(Rule::ImpElim.admits(&[&f("p -> q"), &f("p")], &f("q")));
        assert!(!Rule::ImpElim.admits(&[&f("p"), &f("p -> q")], &f("q")));
        assert!(Rule::AndIntro.admits(&[&f("p"), &f("q")], &f("p & q")));
        assert!(Rule::AndElimRight.admits(&[&f("p & q")], &f("q")));
        assert!(Rule::OrIntroLeft.admits(&[&f("p")], &f("p | r")));
        assert!(Rule::NotElim.admits(&[&f("p"), &f("~p")], &f("anything")));
        assert!(Rule::DoubleNegElim.admits(&[&f("~~p")], &f("p")));
        assert!(Rule::OrElim.admits(&[&f("p | q"), &f("p -> r"), &f("q -> r")], &f("r")));
        assert!(!Rule::OrElim.admits(&[&f("p | q"), &f("q -> r"), &f("p -> r")], &f("r")));
        assert!(!Rule::Reiterate.admits(&[], &f("p")));
    }

    #[test]
    fn serde_shape() {
        let step = MachineStep::new(f("q"), Rule::ImpElim, [PremiseRef::Assumption(1), PremiseRef::Step(0)]);
        let text = serde_json::to_string(&step).unwrap();
        assert_eq!(
            text,
            r#"{"formula":"q","rule":"imp_elim","premises":[{"assumption":1},{"step":0}]}"#
        );
        let back: MachineStep = serde_json::from_str(&text).unwrap();
        assert_eq!(back, step);
    }
}
