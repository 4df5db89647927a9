use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use crate::canonical;

/// A defined symbol together with its defining formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Definition {
    pub symbol: String,
    pub formula: Formula,
}

/// An ordered collection of definitions plus imported references.
///
/// Symbol names (defined or imported) are unique within one set. Definitions
/// only need to be well-formed; they are not checked for consistency.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDefinitionSet")]
pub struct DefinitionSet {
    definitions: Vec<Definition>,
    imports: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefinitionSet {
    #[serde(default)]
    definitions: Vec<Definition>,
    #[serde(default)]
    imports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateSymbol(pub String);

impl fmt::Display for DuplicateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "duplicate symbol {:?}", self.0)
    }
}

impl std::error::Error for DuplicateSymbol {}

impl TryFrom<RawDefinitionSet> for DefinitionSet {
    type Error = DuplicateSymbol;

    fn try_from(raw: RawDefinitionSet) -> Result<Self, Self::Error> {
        DefinitionSet::new(raw.definitions, raw.imports)
    }
}

impl DefinitionSet {
    pub fn new(definitions: Vec<Definition>, imports: Vec<String>) -> Result<Self, DuplicateSymbol> {
        let mut seen = BTreeSet::new();
        for name in imports.iter().chain(definitions.iter().map(|d| &d.symbol)) {
            if !seen.insert(name.as_str()) {
                return Err(DuplicateSymbol(name.clone()));
            }
        }
        Ok(Self { definitions, imports })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// A context consisting only of imported opaque atoms.
    pub fn with_imports<I, S>(imports: I) -> Result<Self, DuplicateSymbol>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(Vec::new(), imports.into_iter().map(Into::into).collect())
    }

    pub fn definitions(&self) -> &[Definition] {
        &self.definitions
    }

    pub fn imports(&self) -> &[String] {
        &self.imports
    }

    pub fn is_empty(&self) -> bool {
        self.definitions.is_empty() && self.imports.is_empty()
    }

    pub fn declares(&self, symbol: &str) -> bool {
        self.imports.iter().any(|s| s == symbol) || self.definitions.iter().any(|d| d.symbol == symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.imports
            .iter()
            .map(String::as_str)
            .chain(self.definitions.iter().map(|d| d.symbol.as_str()))
    }

    /// `self ∪ other`. Shadowing is forbidden: any symbol of `other` already
    /// declared here is an error.
    pub fn union(&self, other: &DefinitionSet) -> Result<DefinitionSet, DuplicateSymbol> {
        let mut definitions = self.definitions.clone();
        definitions.extend(other.definitions.iter().cloned());
        let mut imports = self.imports.clone();
        imports.extend(other.imports.iter().cloned());
        DefinitionSet::new(definitions, imports)
    }

    /// Like [`union`](Self::union) but keeps the outer binding on conflicts.
    pub(crate) fn union_lenient(&self, other: &DefinitionSet) -> DefinitionSet {
        let mut out = self.clone();
        for name in &other.imports {
            if !out.declares(name) {
                out.imports.push(name.clone());
            }
        }
        for def in &other.definitions {
            if !out.declares(&def.symbol) {
                out.definitions.push(def.clone());
            }
        }
        out
    }
}

/// `Γ ⊢ A ⇒ C`: a context of definitions, a finite assumption set and a
/// conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Statement {
    #[serde(default)]
    pub context: DefinitionSet,
    #[serde(default)]
    pub assumptions: BTreeSet<Formula>,
    pub conclusion: Formula,
}

impl Statement {
    pub fn new(context: DefinitionSet, assumptions: impl IntoIterator<Item = Formula>, conclusion: Formula) -> Self {
        Self {
            context,
            assumptions: assumptions.into_iter().collect(),
            conclusion,
        }
    }

    /// Atoms of the assumptions and conclusion that the context does not declare.
    pub fn undeclared_atoms(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        for f in self.assumptions.iter().chain(std::iter::once(&self.conclusion)) {
            for atom in f.atoms() {
                if !self.context.declares(atom) {
                    out.insert(atom.to_string());
                }
            }
        }
        out.into_iter().collect()
    }

    /// Hex SHA-256 of the canonical serialization; the statement's identity.
    pub fn key(&self) -> StatementKey {
        StatementKey(canonical::canonical_hash(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatementKey(pub String);

impl fmt::Display for StatementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_symbols_are_rejected() {
        let def = |s: &str| Definition {
            symbol: s.into(),
            formula: Formula::atom("x"),
        };
        assert!(DefinitionSet::new(vec![def("a"), def("a")], vec![]).is_err());
        assert!(DefinitionSet::new(vec![def("a")], vec!["a".into()]).is_err());
        let err: Result<DefinitionSet, _> =
            serde_json::from_str(r#"{"definitions":[{"symbol":"g","formula":"x"},{"symbol":"g","formula":"y"}]}"#);
        assert!(err.unwrap_err().to_string().contains("duplicate symbol"));
    }

    #[test]
    fn union_forbids_shadowing() {
        let outer = DefinitionSet::with_imports(["A0", "p"]).unwrap();
        let inner = DefinitionSet::with_imports(["q"]).unwrap();
        let both = outer.union(&inner).unwrap();
        assert!(both.declares("q") && both.declares("A0"));
        let shadow = DefinitionSet::with_imports(["p"]).unwrap();
        assert_eq!(outer.union(&shadow).unwrap_err(), DuplicateSymbol("p".into()));
    }

    #[test]
    fn undeclared_atoms_are_listed() {
        let ctx = DefinitionSet::with_imports(["p"]).unwrap();
        let s = Statement::new(ctx, [Formula::atom("p")], "(p -> q)".parse().unwrap());
        assert_eq!(s.undeclared_atoms(), vec!["q".to_string()]);
    }

    #[test]
    fn key_ignores_assumption_order() {
        let ctx = DefinitionSet::with_imports(["p", "q"]).unwrap();
        let a = Statement::new(
            ctx.clone(),
            [Formula::atom("p"), Formula::atom("q")],
            Formula::atom("p"),
        );
        let b = Statement::new(ctx, [Formula::atom("q"), Formula::atom("p")], Formula::atom("p"));
        assert_eq!(a.key(), b.key());
    }
}
