use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::chain::{ChainStep, ProofChain};
use super::formula::Formula;
use super::machine::MachineProof;
use super::statement::DefinitionSet;

pub type Length = Ratio<u64>;

/// Per-symbol weights; symbols without an entry weigh `default_weight`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthMeasure {
    pub default_weight: Length,
    #[serde(default)]
    pub weights: BTreeMap<String, Length>,
}

impl Default for LengthMeasure {
    fn default() -> Self {
        Self::unit()
    }
}

/// Symbol standing for one premise reference of a machine step.
pub const PREMISE_SYMBOL: &str = "#premise";

impl LengthMeasure {
    pub fn unit() -> Self {
        Self::uniform(Ratio::from_integer(1))
    }

    pub fn uniform(weight: Length) -> Self {
        Self {
            default_weight: weight,
            weights: BTreeMap::new(),
        }
    }

    pub fn with_weight(mut self, symbol: impl Into<String>, weight: Length) -> Self {
        self.weights.insert(symbol.into(), weight);
        self
    }

    pub fn weight(&self, symbol: &str) -> Length {
        self.weights.get(symbol).copied().unwrap_or(self.default_weight)
    }

    pub fn measure<M: Measurable + ?Sized>(&self, item: &M) -> Length {
        let mut total = Length::zero();
        item.visit_symbols(&mut |s| total += self.weight(s));
        total
    }

    pub fn measure_steps(&self, steps: &[ChainStep]) -> Length {
        steps.iter().map(|s| self.measure(s)).fold(Length::zero(), |a, b| a + b)
    }
}

/// Anything with a serialized symbol sequence.
pub trait Measurable {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str));

    fn symbol_count(&self) -> usize {
        let mut n = 0;
        self.visit_symbols(&mut |_| n += 1);
        n
    }
}

impl Measurable for Formula {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str)) {
        for token in self.tokens() {
            visit(token.as_str());
        }
    }
}

impl Measurable for DefinitionSet {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str)) {
        for name in self.imports() {
            visit(name);
        }
        for def in self.definitions() {
            visit(&def.symbol);
            def.formula.visit_symbols(visit);
        }
    }
}

impl Measurable for ChainStep {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str)) {
        for a in &self.assumptions {
            a.visit_symbols(visit);
        }
        self.conclusion.visit_symbols(visit);
    }
}

impl Measurable for ProofChain {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str)) {
        self.definitions.visit_symbols(visit);
        for step in &self.steps {
            step.visit_symbols(visit);
        }
    }
}

impl Measurable for MachineProof {
    fn visit_symbols(&self, visit: &mut dyn FnMut(&str)) {
        for step in &self.steps {
            step.formula.visit_symbols(visit);
            visit(step.rule.tag());
            for _ in &step.premises {
                visit(PREMISE_SYMBOL);
            }
        }
    }
}
