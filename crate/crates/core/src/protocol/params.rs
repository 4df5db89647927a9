use serde::{Deserialize, Serialize};

use super::ProtocolError;

/// Parameters of one level ℓ ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelParameters {
    /// λ_ℓ in μ units.
    pub max_length: u64,
    /// σ↑_ℓ, forfeited to the origin question's owner on invalidation.
    pub stake_up: u64,
    /// σ↓_ℓ, forfeited to the first defeating question's owner.
    pub stake_down: u64,
    /// θ_ℓ: questions on a level-ℓ claim must arrive strictly before posted + θ_ℓ.
    pub verification_time: u64,
    /// β_ℓ, escrowed by a level-ℓ question.
    pub bounty: u64,
    /// τ_ℓ: answers to a level-ℓ question must arrive strictly before posted + τ_ℓ.
    pub response_time: u64,
}

/// The level-0 record: machine claims and the questions they answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineParameters {
    pub max_length: u64,
    pub stake_up: u64,
    /// c₀, burned when a machine claim is posted.
    pub cost: u64,
    /// β₀.
    pub bounty: u64,
    /// τ₀.
    pub response_time: u64,
}

/// Per-level parameters fixed by the root: `levels[ℓ - 1]` holds level ℓ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterCascade {
    pub levels: Vec<LevelParameters>,
    pub machine: MachineParameters,
}

impl ParameterCascade {
    pub fn new(levels: Vec<LevelParameters>, machine: MachineParameters) -> Result<Self, ProtocolError> {
        let cascade = Self { levels, machine };
        cascade.validate()?;
        Ok(cascade)
    }

    /// The same level parameters repeated `root_level` times.
    pub fn uniform(root_level: u32, level: LevelParameters, machine: MachineParameters) -> Result<Self, ProtocolError> {
        Self::new(vec![level; root_level as usize], machine)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.levels.is_empty() {
            return Err(ProtocolError::InvalidCascade("root level must be at least 1".into()));
        }
        for (i, lp) in self.levels.iter().enumerate() {
            if lp.verification_time == 0 || lp.response_time == 0 {
                return Err(ProtocolError::InvalidCascade(format!(
                    "level {} windows must be positive",
                    i + 1
                )));
            }
            if lp.stake_up.checked_add(lp.stake_down).is_none() {
                return Err(ProtocolError::InvalidCascade(format!(
                    "level {} stakes overflow",
                    i + 1
                )));
            }
        }
        if self.machine.response_time == 0 {
            return Err(ProtocolError::InvalidCascade(
                "level 0 response time must be positive".into(),
            ));
        }
        if self.machine.stake_up.checked_add(self.machine.cost).is_none() {
            return Err(ProtocolError::InvalidCascade("level 0 stake overflows".into()));
        }
        Ok(())
    }

    /// L.
    pub fn root_level(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Parameters of level `level` (1 ≤ level ≤ L).
    pub fn level(&self, level: u32) -> &LevelParameters {
        &self.levels[level as usize - 1]
    }

    /// β_ℓ, reading the machine record for ℓ = 0.
    pub fn bounty(&self, level: u32) -> u64 {
        if level == 0 {
            self.machine.bounty
        } else {
            self.level(level).bounty
        }
    }

    /// τ_ℓ, reading the machine record for ℓ = 0.
    pub fn response_time(&self, level: u32) -> u64 {
        if level == 0 {
            self.machine.response_time
        } else {
            self.level(level).response_time
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn machine() -> MachineParameters {
        MachineParameters {
            max_length: 100,
            stake_up: 2,
            cost: 1,
            bounty: 1,
            response_time: 10,
        }
    }

    fn level() -> LevelParameters {
        LevelParameters {
            max_length: 100,
            stake_up: 2,
            stake_down: 3,
            verification_time: 10,
            bounty: 1,
            response_time: 10,
        }
    }

    #[test]
    fn windows_must_be_positive() {
        let mut lp = level();
        lp.response_time = 0;
        assert!(ParameterCascade::uniform(2, lp, machine()).is_err());
        assert!(ParameterCascade::new(vec![], machine()).is_err());
        let c = ParameterCascade::uniform(3, level(), machine()).unwrap();
        assert_eq!(c.root_level(), 3);
        assert_eq!(c.bounty(0), 1);
        assert_eq!(c.response_time(2), 10);
    }
}
