use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::chain::{validate_tree, ProofTree, ValidationReport};
use super::machine::MachineProof;
use super::statement::Statement;
use super::{DocumentError, ProofError};
use crate::canonical;

/// A chain-format claim of proof for `target`, possibly with expansions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub target: Statement,
    pub proof: ProofTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDocument {
    pub target: Statement,
    pub proof: MachineProof,
}

/// The three JSON document kinds, discriminated by a top-level `"kind"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofDocument {
    Statement(Statement),
    Chain(ChainDocument),
    MachineProof(MachineDocument),
}

impl ProofDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            ProofDocument::Statement(_) => "statement",
            ProofDocument::Chain(_) => "chain",
            ProofDocument::MachineProof(_) => "machine_proof",
        }
    }

    pub fn target(&self) -> &Statement {
        match self {
            ProofDocument::Statement(s) => s,
            ProofDocument::Chain(d) => &d.target,
            ProofDocument::MachineProof(d) => &d.target,
        }
    }

    pub fn to_value(&self) -> Value {
        let mut value = match self {
            ProofDocument::Statement(s) => serde_json::to_value(s),
            ProofDocument::Chain(d) => serde_json::to_value(d),
            ProofDocument::MachineProof(d) => serde_json::to_value(d),
        }
        .expect("proof documents always serialize");
        value
            .as_object_mut()
            .expect("documents serialize as objects")
            .insert("kind".into(), Value::String(self.kind().into()));
        value
    }

    /// Canonical serialization: sorted keys, no insignificant whitespace.
    pub fn to_canonical_string(&self) -> String {
        canonical::to_canonical_string(&self.to_value())
    }

    /// Structural check of the document. Chain documents are checked as trees
    /// with `level_limit` bounding their height; statements are checked for
    /// undeclared atoms. Machine proofs are the verifier's business and always
    /// report clean here.
    pub fn structural_report(&self, level_limit: u32) -> Result<ValidationReport, ProofError> {
        use super::chain::{ReportEntry, Violation};
        match self {
            ProofDocument::Chain(d) => validate_tree(&d.target, &d.proof, level_limit),
            ProofDocument::Statement(s) | ProofDocument::MachineProof(MachineDocument { target: s, .. }) => {
                Ok(ValidationReport {
                    violations: s
                        .undeclared_atoms()
                        .into_iter()
                        .map(|symbol| ReportEntry {
                            path: vec![],
                            violation: Violation::UndeclaredSymbol {
                                location: "target".into(),
                                symbol,
                            },
                        })
                        .collect(),
                })
            }
        }
    }
}

impl Serialize for ProofDocument {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProofDocument {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        from_value(value).map_err(serde::de::Error::custom)
    }
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, DocumentError> {
    serde_path_to_error::deserialize(value).map_err(|err| DocumentError::Schema {
        path: err.path().to_string(),
        message: err.into_inner().to_string(),
    })
}

fn from_value(value: Value) -> Result<ProofDocument, DocumentError> {
    let Value::Object(mut map) = value else {
        return Err(DocumentError::Schema {
            path: ".".into(),
            message: "expected a JSON object".into(),
        });
    };
    let kind = match map.remove("kind") {
        Some(Value::String(kind)) => kind,
        Some(_) => {
            return Err(DocumentError::Schema {
                path: "kind".into(),
                message: "expected a string".into(),
            })
        }
        None => {
            return Err(DocumentError::Schema {
                path: "kind".into(),
                message: "missing field `kind`".into(),
            })
        }
    };
    let rest = Value::Object(map);
    match kind.as_str() {
        "statement" => typed(rest).map(ProofDocument::Statement),
        "chain" => typed(rest).map(ProofDocument::Chain),
        "machine_proof" => typed(rest).map(ProofDocument::MachineProof),
        other => Err(DocumentError::Schema {
            path: "kind".into(),
            message: format!("unknown document kind {other:?}"),
        }),
    }
}

/// Parses a JSON proof document.
pub fn parse_proof_document(text: &[u8]) -> Result<ProofDocument, DocumentError> {
    let value: Value = serde_json::from_slice(text).map_err(|err| DocumentError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    })?;
    from_value(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::{ChainStep, DefinitionSet, Formula, ProofChain};

    fn identity_doc() -> ProofDocument {
        let target = Statement::new(
            DefinitionSet::with_imports(["p"]).unwrap(),
            [Formula::atom("p")],
            Formula::atom("p"),
        );
        ProofDocument::Chain(ChainDocument {
            proof: ProofTree::leaf(ProofChain::identity(&target)),
            target,
        })
    }

    #[test]
    fn identity_chain_round_trips() {
        let doc = identity_doc();
        let text = doc.to_canonical_string();
        let back = parse_proof_document(text.as_bytes()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_canonical_string(), text);
        assert!(!text.contains(' '));
    }

    #[test]
    fn pretty_input_canonicalizes() {
        let text = r#"{
            "kind": "statement",
            "conclusion": "p->q",
            "assumptions": ["q", "p"],
            "context": {"imports": ["p", "q"]}
        }"#;
        let doc = parse_proof_document(text.as_bytes()).unwrap();
        assert_eq!(
            doc.to_canonical_string(),
            r#"{"assumptions":["p","q"],"conclusion":"(p -> q)","context":{"definitions":[],"imports":["p","q"]},"kind":"statement"}"#
        );
    }

    #[test]
    fn duplicate_symbol_names_its_path() {
        let text = r#"{"kind":"statement","conclusion":"p",
            "context":{"definitions":[{"symbol":"g","formula":"p"},{"symbol":"g","formula":"p"}],"imports":["p"]}}"#;
        let err = parse_proof_document(text.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate symbol"), "{msg}");
        assert!(msg.contains("context"), "{msg}");
    }

    #[test]
    fn schema_errors_name_the_path() {
        let text = r#"{"kind":"chain","target":{"conclusion":"p"},"proof":{"chain":{"steps":[{"conclusion":"p &"}]}}}"#;
        match parse_proof_document(text.as_bytes()).unwrap_err() {
            DocumentError::Schema { path, .. } => assert_eq!(path, "proof.chain.steps[0].conclusion"),
            other => panic!("{other:?}"),
        }
        let text = r#"{"kind":"machine_proof","target":{"conclusion":"p"},"proof":{"steps":[],"extra":1}}"#;
        assert!(matches!(
            parse_proof_document(text.as_bytes()),
            Err(DocumentError::Schema { .. })
        ));
        match parse_proof_document(b"{\n  \"kind\": ").unwrap_err() {
            DocumentError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn import_sets_serialize_sorted() {
        let step = ChainStep::new([], Formula::atom("p"), [3, 1, 2]);
        assert_eq!(
            serde_json::to_string(&step).unwrap(),
            r#"{"assumptions":[],"conclusion":"p","imports":[1,2,3]}"#
        );
    }
}
