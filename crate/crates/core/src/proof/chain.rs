use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use super::statement::{DefinitionSet, Statement};
use super::ProofError;

/// One step `S_j` of a chain with its import set `I_j` (1-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainStep {
    #[serde(default)]
    pub assumptions: BTreeSet<Formula>,
    pub conclusion: Formula,
    #[serde(default)]
    pub imports: BTreeSet<usize>,
}

impl ChainStep {
    pub fn new(
        assumptions: impl IntoIterator<Item = Formula>,
        conclusion: Formula,
        imports: impl IntoIterator<Item = usize>,
    ) -> Self {
        Self {
            assumptions: assumptions.into_iter().collect(),
            conclusion,
            imports: imports.into_iter().collect(),
        }
    }
}

/// A level ℓ ≥ 1 claim of proof: local definitions `D` and steps `S_1..S_k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofChain {
    #[serde(default)]
    pub definitions: DefinitionSet,
    pub steps: Vec<ChainStep>,
}

impl ProofChain {
    pub fn new(definitions: DefinitionSet, steps: Vec<ChainStep>) -> Self {
        Self { definitions, steps }
    }

    /// Builds the chain whose step assumption sets are derived from the target
    /// and the import sets, so it is valid by construction as far as `A_j` goes.
    pub fn from_imports(
        target: &Statement,
        definitions: DefinitionSet,
        steps: impl IntoIterator<Item = (Formula, Vec<usize>)>,
    ) -> Self {
        let mut out: Vec<ChainStep> = Vec::new();
        for (conclusion, imports) in steps {
            let mut assumptions = target.assumptions.clone();
            for &i in &imports {
                if let Some(prev) = i.checked_sub(1).and_then(|i| out.get(i)) {
                    assumptions.insert(prev.conclusion.clone());
                }
            }
            out.push(ChainStep::new(assumptions, conclusion, imports));
        }
        Self::new(definitions, out)
    }

    /// The single-step chain restating the target.
    pub fn identity(target: &Statement) -> Self {
        Self::new(
            DefinitionSet::empty(),
            vec![ChainStep::new(
                target.assumptions.clone(),
                target.conclusion.clone(),
                [],
            )],
        )
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step `j` (1-based).
    pub fn step(&self, j: usize) -> Option<&ChainStep> {
        j.checked_sub(1).and_then(|i| self.steps.get(i))
    }

    /// The statement disputed by a question on step `j`: context `Γ ∪ D`,
    /// assumptions `A_j`, conclusion `C_j`.
    pub fn step_statement(&self, target: &Statement, j: usize) -> Option<Statement> {
        let step = self.step(j)?;
        Some(Statement {
            context: target.context.union_lenient(&self.definitions),
            assumptions: step.assumptions.clone(),
            conclusion: step.conclusion.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    EmptyChain,
    ImportIndexOutOfRange {
        step: usize,
        index: usize,
    },
    AssumptionMismatch {
        step: usize,
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    ConclusionMismatch {
        expected: String,
        found: String,
    },
    UndeclaredSymbol {
        location: String,
        symbol: String,
    },
    ShadowedSymbol {
        symbol: String,
    },
    ExpansionIndexOutOfRange {
        index: usize,
    },
    HeightExceeded {
        height: usize,
        limit: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyChain => write!(f, "empty chain"),
            Violation::ImportIndexOutOfRange { step, index } => {
                write!(f, "import index out of range: step {step} imports {index}")
            }
            Violation::AssumptionMismatch {
                step,
                missing,
                unexpected,
            } => write!(
                f,
                "assumption mismatch at step {step}: missing [{}], unexpected [{}]",
                missing.join(", "),
                unexpected.join(", ")
            ),
            Violation::ConclusionMismatch { expected, found } => {
                write!(
                    f,
                    "conclusion mismatch: last step concludes {found}, target is {expected}"
                )
            }
            Violation::UndeclaredSymbol { location, symbol } => {
                write!(f, "undeclared symbol {symbol:?} in {location}")
            }
            Violation::ShadowedSymbol { symbol } => write!(f, "shadowed symbol {symbol:?}"),
            Violation::ExpansionIndexOutOfRange { index } => {
                write!(f, "expansion index out of range: {index}")
            }
            Violation::HeightExceeded { height, limit } => {
                write!(f, "height {height} exceeds level limit {limit}")
            }
        }
    }
}

/// A violation together with the expansion path (step indices from the root
/// chain) of the chain it was found in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub path: Vec<usize>,
    #[serde(flatten)]
    pub violation: Violation,
}

impl fmt::Display for ReportEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.violation)
        } else {
            let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
            write!(f, "[S_{}] {}", path.join(","), self.violation)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<ReportEntry>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: &[usize], violation: Violation) {
        self.violations.push(ReportEntry {
            path: path.to_vec(),
            violation,
        });
    }
}

/// Checks the structural rules of `chain` as a proof of `target`.
pub fn validate_chain(
    target: &Statement,
    chain: &ProofChain,
    level_limit: u32,
) -> Result<ValidationReport, ProofError> {
    if level_limit == 0 {
        return Err(ProofError::LevelLimit);
    }
    let mut report = ValidationReport::default();
    check_chain(target, chain, &[], &mut report);
    Ok(report)
}

fn check_chain(target: &Statement, chain: &ProofChain, path: &[usize], report: &mut ValidationReport) {
    for atom in target.undeclared_atoms() {
        report.push(
            path,
            Violation::UndeclaredSymbol {
                location: "target".into(),
                symbol: atom,
            },
        );
    }

    for symbol in chain.definitions.symbols() {
        if target.context.declares(symbol) {
            report.push(path, Violation::ShadowedSymbol { symbol: symbol.into() });
        }
    }
    let context = target.context.union_lenient(&chain.definitions);

    for def in chain.definitions.definitions() {
        for atom in def.formula.atoms() {
            if !context.declares(atom) {
                report.push(
                    path,
                    Violation::UndeclaredSymbol {
                        location: format!("definition {}", def.symbol),
                        symbol: atom.into(),
                    },
                );
            }
        }
    }

    if chain.steps.is_empty() {
        report.push(path, Violation::EmptyChain);
        return;
    }

    for (i, step) in chain.steps.iter().enumerate() {
        let j = i + 1;
        let mut undeclared = BTreeSet::new();
        for f in step.assumptions.iter().chain(std::iter::once(&step.conclusion)) {
            for atom in f.atoms() {
                if !context.declares(atom) {
                    undeclared.insert(atom.to_string());
                }
            }
        }
        for symbol in undeclared {
            report.push(
                path,
                Violation::UndeclaredSymbol {
                    location: format!("step {j}"),
                    symbol,
                },
            );
        }

        let mut expected = target.assumptions.clone();
        let mut indices_ok = true;
        for &index in &step.imports {
            if index == 0 || index >= j {
                report.push(path, Violation::ImportIndexOutOfRange { step: j, index });
                indices_ok = false;
            } else {
                expected.insert(chain.steps[index - 1].conclusion.clone());
            }
        }
        if indices_ok && expected != step.assumptions {
            report.push(
                path,
                Violation::AssumptionMismatch {
                    step: j,
                    missing: expected.difference(&step.assumptions).map(Formula::to_string).collect(),
                    unexpected: step.assumptions.difference(&expected).map(Formula::to_string).collect(),
                },
            );
        }
    }

    let last = &chain.steps[chain.steps.len() - 1].conclusion;
    if *last != target.conclusion {
        report.push(
            path,
            Violation::ConclusionMismatch {
                expected: target.conclusion.to_string(),
                found: last.to_string(),
            },
        );
    }
}

/// A chain together with finer-grained chains for some of its steps.
/// Keys are 1-based step indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofTree {
    pub chain: ProofChain,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expansions: BTreeMap<usize, ProofTree>,
}

impl ProofTree {
    pub fn leaf(chain: ProofChain) -> Self {
        Self {
            chain,
            expansions: BTreeMap::new(),
        }
    }

    pub fn expand(mut self, step: usize, subtree: ProofTree) -> Self {
        self.expansions.insert(step, subtree);
        self
    }

    /// Number of chain layers on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        1 + self.expansions.values().map(ProofTree::height).max().unwrap_or(0)
    }

    pub fn subtree(&self, path: &[usize]) -> Option<&ProofTree> {
        match path.split_first() {
            None => Some(self),
            Some((head, rest)) => self.expansions.get(head)?.subtree(rest),
        }
    }
}

/// Validates every chain of the tree against the statement it expands, and
/// that the tree fits within `level_limit` chain layers.
pub fn validate_tree(target: &Statement, tree: &ProofTree, level_limit: u32) -> Result<ValidationReport, ProofError> {
    if level_limit == 0 {
        return Err(ProofError::LevelLimit);
    }
    let mut report = ValidationReport::default();
    let height = tree.height();
    if height > level_limit as usize {
        report.push(
            &[],
            Violation::HeightExceeded {
                height,
                limit: level_limit,
            },
        );
    }
    check_tree(target, tree, &mut Vec::new(), &mut report);
    Ok(report)
}

fn check_tree(target: &Statement, tree: &ProofTree, path: &mut Vec<usize>, report: &mut ValidationReport) {
    check_chain(target, &tree.chain, path, report);
    for (&j, subtree) in &tree.expansions {
        match tree.chain.step_statement(target, j) {
            Some(sub_target) => {
                path.push(j);
                check_tree(&sub_target, subtree, path, report);
                path.pop();
            }
            None => report.push(path, Violation::ExpansionIndexOutOfRange { index: j }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn target() -> Statement {
        Statement::new(
            DefinitionSet::with_imports(["A0", "c1", "c2", "goal"]).unwrap(),
            [f("A0")],
            f("goal"),
        )
    }

    fn three_steps() -> ProofChain {
        ProofChain::from_imports(
            &target(),
            DefinitionSet::empty(),
            [(f("c1"), vec![]), (f("c2"), vec![1]), (f("goal"), vec![2])],
        )
    }

    #[test]
    fn valid_chain_has_no_violations() {
        let report = validate_chain(&target(), &three_steps(), 1).unwrap();
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn identity_chain_is_valid() {
        let t = target();
        assert!(validate_chain(&t, &ProofChain::identity(&t), 1).unwrap().is_valid());
    }

    #[test]
    fn level_limit_must_be_positive() {
        assert!(validate_chain(&target(), &three_steps(), 0).is_err());
    }

    #[test]
    fn forward_import_is_out_of_range() {
        let mut chain = three_steps();
        chain.steps[1].imports = [2].into();
        let report = validate_chain(&target(), &chain, 1).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|e| e.violation == Violation::ImportIndexOutOfRange { step: 2, index: 2 }));
        assert!(report.violations[0].to_string().contains("import index out of range"));
    }

    #[test]
    fn zero_import_is_out_of_range() {
        let mut chain = three_steps();
        chain.steps[0].imports = [0].into();
        let report = validate_chain(&target(), &chain, 1).unwrap();
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn extra_assumption_is_reported() {
        let mut chain = three_steps();
        chain.steps[0].assumptions.insert(f("c2"));
        let report = validate_chain(&target(), &chain, 1).unwrap();
        assert_eq!(
            report.violations[0].violation,
            Violation::AssumptionMismatch {
                step: 1,
                missing: vec![],
                unexpected: vec!["c2".into()]
            }
        );
    }

    #[test]
    fn wrong_conclusion_and_empty_chain() {
        let mut chain = three_steps();
        chain.steps[2].conclusion = f("c2");
        let report = validate_chain(&target(), &chain, 1).unwrap();
        assert!(matches!(
            report.violations[0].violation,
            Violation::ConclusionMismatch { .. }
        ));
        let empty = ProofChain::default();
        let report = validate_chain(&target(), &empty, 1).unwrap();
        assert_eq!(report.violations[0].violation, Violation::EmptyChain);
    }

    #[test]
    fn undeclared_and_shadowed_symbols() {
        let t = target();
        let chain = ProofChain::from_imports(
            &t,
            DefinitionSet::with_imports(["c1", "fresh"]).unwrap(),
            [(f("(fresh & mystery)"), vec![]), (f("goal"), vec![1])],
        );
        let report = validate_chain(&t, &chain, 1).unwrap();
        let kinds: Vec<_> = report.violations.iter().map(|e| e.violation.clone()).collect();
        assert!(kinds.contains(&Violation::ShadowedSymbol { symbol: "c1".into() }));
        assert!(kinds.contains(&Violation::UndeclaredSymbol {
            location: "step 1".into(),
            symbol: "mystery".into()
        }));
        assert_eq!(kinds.len(), 3, "{kinds:?}");
    }

    #[test]
    fn tree_height_and_nested_validation() {
        let t = target();
        let root = three_steps();
        let s2 = root.step_statement(&t, 2).unwrap();
        let sub = ProofChain::from_imports(&s2, DefinitionSet::empty(), [(f("c2"), vec![])]);
        let tree = ProofTree::leaf(root.clone()).expand(2, ProofTree::leaf(sub.clone()));
        assert_eq!(tree.height(), 2);
        assert!(validate_tree(&t, &tree, 2).unwrap().is_valid());
        let report = validate_tree(&t, &tree, 1).unwrap();
        assert_eq!(
            report.violations[0].violation,
            Violation::HeightExceeded { height: 2, limit: 1 }
        );

        let mut bad = sub;
        bad.steps[0].assumptions.clear();
        let tree = ProofTree::leaf(root.clone()).expand(2, ProofTree::leaf(bad));
        let report = validate_tree(&t, &tree, 2).unwrap();
        assert_eq!(report.violations[0].path, vec![2]);

        let tree = ProofTree::leaf(root).expand(9, ProofTree::leaf(ProofChain::identity(&t)));
        let report = validate_tree(&t, &tree, 2).unwrap();
        assert_eq!(
            report.violations[0].violation,
            Violation::ExpansionIndexOutOfRange { index: 9 }
        );
    }
}
