use serde::{Deserialize, Serialize};

use super::NetsimError;

/// Per-link one-way delay distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatencyModel {
    Fixed { seconds: f64 },
    Exponential { mean_seconds: f64 },
}

impl Default for LatencyModel {
    /// Exponential with a 2 s mean. Arbitrary; real propagation figures vary widely.
    fn default() -> Self {
        LatencyModel::Exponential { mean_seconds: 2.0 }
    }
}

impl LatencyModel {
    pub fn mean(&self) -> f64 {
        match *self {
            LatencyModel::Fixed { seconds } => seconds,
            LatencyModel::Exponential { mean_seconds } => mean_seconds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerConfig {
    pub node: usize,
    /// Relative units; only the ratios matter.
    pub hashpower: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackMode {
    #[default]
    #[serde(rename = "double-spend-withholding")]
    DoubleSpendWithholding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    /// Attacker share q of the total hashpower, in [0, 1).
    pub hashpower_fraction: f64,
    /// Blocks the victim waits for, counting the one that includes the payment.
    pub confirmations: u64,
    #[serde(default)]
    pub mode: AttackMode,
    /// Independent races to run; the first one is recorded in the logs.
    #[serde(default = "one")]
    pub trials: u64,
}

fn one() -> u64 {
    1
}

fn default_degree() -> usize {
    8
}

fn default_interval() -> f64 {
    600.0
}

/// Scenario description. Node ids run from 0 to `node_count - 1`; an attacker,
/// when configured, is one extra node with id `node_count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub node_count: usize,
    #[serde(default = "default_degree")]
    pub peer_degree: usize,
    #[serde(default)]
    pub latency_model: LatencyModel,
    pub miners: Vec<MinerConfig>,
    #[serde(default = "default_interval")]
    pub block_interval_target_s: f64,
    pub duration_blocks: u64,
    pub rng_seed: u64,
    #[serde(default)]
    pub attacker: Option<AttackConfig>,
}

impl SimConfig {
    /// Honest nodes plus the attacker node, if any.
    pub fn total_nodes(&self) -> usize {
        self.node_count + usize::from(self.attacker.is_some())
    }

    pub fn total_hashpower(&self) -> f64 {
        self.miners.iter().map(|m| m.hashpower).sum()
    }

    pub fn from_json(text: &str) -> Result<SimConfig, NetsimError> {
        let config: SimConfig = serde_json::from_str(text).map_err(|e| NetsimError::BadScenario {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        let bad = |field: &'static str, reason: String| Err(NetsimError::InvalidConfig { field, reason });
        if self.node_count == 0 {
            return bad("node_count", "must be at least 1".into());
        }
        if self.peer_degree >= self.total_nodes() {
            return bad(
                "peer_degree",
                format!("{} must be below the node count {}", self.peer_degree, self.total_nodes()),
            );
        }
        for (i, m) in self.miners.iter().enumerate() {
            if m.node >= self.node_count {
                return bad("miners", format!("miner {i} sits on node {} of {}", m.node, self.node_count));
            }
            if !(m.hashpower.is_finite() && m.hashpower >= 0.0) {
                return bad("miners", format!("miner {i} hashpower {} is not a nonnegative number", m.hashpower));
            }
        }
        let total = self.total_hashpower();
        if !(total.is_finite() && total > 0.0) {
            return bad("miners", "total hashpower must be positive".into());
        }
        let delay = self.latency_model.mean();
        if !(delay.is_finite() && delay >= 0.0) {
            return bad("latency_model", format!("delay {delay} must be a nonnegative number"));
        }
        if !(self.block_interval_target_s.is_finite() && self.block_interval_target_s > 0.0) {
            return bad("block_interval_target_s", "must be positive".into());
        }
        match &self.attacker {
            Some(a) => {
                if !(0.0..1.0).contains(&a.hashpower_fraction) {
                    return Err(NetsimError::InvalidFraction(a.hashpower_fraction));
                }
                if a.trials == 0 {
                    return bad("attacker.trials", "must be at least 1".into());
                }
            }
            None if self.duration_blocks == 0 => return bad("duration_blocks", "must be at least 1".into()),
            None => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"node_count": 3, "peer_degree": 2, "miners": [{"node": 0, "hashpower": 1}],
        "duration_blocks": 10, "rng_seed": 7}"#;

    #[test]
    fn defaults_fill_in() {
        let c: SimConfig = serde_json::from_str(r#"{"node_count": 10, "miners": [{"node": 0, "hashpower": 1}],
            "duration_blocks": 10, "rng_seed": 7}"#)
        .unwrap();
        assert_eq!(c.peer_degree, 8);
        assert_eq!(c.block_interval_target_s, 600.0);
        assert_eq!(c.latency_model, LatencyModel::Exponential { mean_seconds: 2.0 });
        assert!(c.attacker.is_none());
        c.validate().unwrap();
    }

    #[test]
    fn attacker_round_trip() {
        let text = r#"{"node_count": 1, "peer_degree": 1, "latency_model": {"kind": "fixed", "seconds": 0},
            "miners": [{"node": 0, "hashpower": 1}], "duration_blocks": 0, "rng_seed": 1,
            "attacker": {"hashpower_fraction": 0.1, "confirmations": 6, "mode": "double-spend-withholding"}}"#;
        let c = SimConfig::from_json(text).unwrap();
        let a = c.attacker.as_ref().unwrap();
        assert_eq!((a.confirmations, a.trials), (6, 1));
        assert_eq!(c.total_nodes(), 2);
        let back: SimConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = SimConfig::from_json("{\n  \"node_count\": 3,\n  \"bogus\": 1\n}").unwrap_err();
        match err {
            NetsimError::BadScenario { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let base: SimConfig = serde_json::from_str(MINIMAL).unwrap();
        base.validate().unwrap();
        let field_of = |c: SimConfig| match c.validate() {
            Err(NetsimError::InvalidConfig { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field_of(SimConfig { peer_degree: 3, ..base.clone() }), "peer_degree");
        assert_eq!(field_of(SimConfig { node_count: 0, ..base.clone() }), "node_count");
        let mut c = base.clone();
        c.miners[0].hashpower = 0.0;
        assert_eq!(field_of(c), "miners");
        let mut c = base.clone();
        c.miners[0].node = 3;
        assert_eq!(field_of(c), "miners");
        let c = SimConfig { latency_model: LatencyModel::Fixed { seconds: -1.0 }, ..base.clone() };
        assert_eq!(field_of(c), "latency_model");
        let mut c = base.clone();
        c.attacker = Some(AttackConfig {
            hashpower_fraction: 1.0,
            confirmations: 1,
            mode: AttackMode::default(),
            trials: 1,
        });
        assert_eq!(c.validate(), Err(NetsimError::InvalidFraction(1.0)));
    }
}
