use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FiniteGame, FiniteStrategy, Tree};
use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef, UtilityFun};

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub max_depth: usize,
    /// Upper bound on nodes, leaves included.
    pub max_nodes: usize,
    pub payoff_range: RangeInclusive<i64>,
    pub roster: Vec<Agent>,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            max_depth: 4,
            max_nodes: 12,
            payoff_range: -3..=3,
            roster: vec!["A".into(), "B".into()],
        }
    }
}

/// A random finite game, fully determined by `seed`.
pub fn random_game(seed: u64, config: &GameConfig) -> FiniteGame {
    fn grow(rng: &mut ChaCha8Rng, cfg: &GameConfig, depth: usize, spare: &mut usize) -> FiniteGame {
        // a node fills its own slot and opens two more
        if depth < cfg.max_depth && *spare >= 2 && rng.gen_bool(0.65) {
            *spare -= 2;
            let owner = cfg.roster[rng.gen_range(0..cfg.roster.len())].clone();
            let left = grow(rng, cfg, depth + 1, spare);
            let right = grow(rng, cfg, depth + 1, spare);
            Tree::Node {
                owner,
                choice: (),
                left: Box::new(left),
                right: Box::new(right),
            }
        } else {
            Tree::Leaf(
                cfg.roster
                    .iter()
                    .map(|a| (a.clone(), rng.gen_range(cfg.payoff_range.clone())))
                    .collect(),
            )
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spare = config.max_nodes.saturating_sub(1);
    grow(&mut rng, config, 0, &mut spare)
}

/// Attaches uniformly random choices to `game`.
pub fn random_strategy(seed: u64, game: &FiniteGame) -> FiniteStrategy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    game.with_choices(&mut || if rng.gen_bool(0.5) { Choice::L } else { Choice::R })
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub kind: Kind,
    pub max_classes: usize,
    pub roster: Vec<Agent>,
    /// Allow positive offsets and non-constant payoffs.
    pub parametric: bool,
    /// Only reference classes with a larger id, so the class graph is a DAG.
    pub acyclic: bool,
    pub max_offset: u64,
    pub payoff_range: RangeInclusive<i64>,
    pub leaf_probability: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            kind: Kind::Strategy,
            max_classes: 6,
            roster: vec!["A".into(), "B".into()],
            parametric: false,
            acyclic: false,
            max_offset: 2,
            payoff_range: -4..=4,
            leaf_probability: 0.35,
        }
    }
}

/// A random valid system, fully determined by `seed`.
pub fn random_system(seed: u64, config: &SystemConfig) -> CoSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=config.max_classes.max(1));
    let mut classes = Vec::with_capacity(count);
    for id in 0..count {
        let forced_leaf = config.acyclic && id + 1 == count;
        if forced_leaf || rng.gen_bool(config.leaf_probability) {
            let payoff = config
                .roster
                .iter()
                .map(|a| {
                    let slope = if config.parametric { rng.gen_range(-2..=2) } else { 0 };
                    let intercept = rng.gen_range(config.payoff_range.clone());
                    (a.clone(), AffineUtility::new(slope, intercept))
                })
                .collect();
            classes.push(NodeClass::Leaf(UtilityFun(payoff)));
        } else {
            let target = |rng: &mut ChaCha8Rng| {
                let class = if config.acyclic {
                    rng.gen_range(id + 1..count)
                } else {
                    rng.gen_range(0..count)
                };
                let offset = if config.parametric {
                    rng.gen_range(0..=config.max_offset)
                } else {
                    0
                };
                ParamRef::new(class, offset)
            };
            let left = target(&mut rng);
            let right = target(&mut rng);
            let owner = config.roster[rng.gen_range(0..config.roster.len())].clone();
            let choice = match config.kind {
                Kind::Strategy => Some(if rng.gen_bool(0.5) { Choice::L } else { Choice::R }),
                Kind::Game => None,
            };
            classes.push(NodeClass::Node {
                owner,
                choice,
                left,
                right,
            });
        }
    }
    CoSystem {
        kind: config.kind,
        roster: config.roster.iter().cloned().collect(),
        names: (0..count).map(|i| format!("c{i}")).collect(),
        classes,
        root: ParamRef::at(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn games_are_deterministic_in_the_seed() {
        let cfg = GameConfig {
            max_depth: 3,
            ..GameConfig::default()
        };
        assert_eq!(random_game(1, &cfg), random_game(1, &cfg));
        assert_ne!(
            (0..20).map(|s| random_game(s, &cfg)).collect::<Vec<_>>(),
            (20..40).map(|s| random_game(s, &cfg)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn games_respect_the_bounds() {
        let cfg = GameConfig::default();
        for seed in 0..300 {
            let g = random_game(seed, &cfg);
            assert!(g.size() <= cfg.max_nodes);
            assert!(g.height() <= cfg.max_depth);
        }
    }

    #[test]
    fn systems_validate() {
        for acyclic in [false, true] {
            for parametric in [false, true] {
                let cfg = SystemConfig {
                    acyclic,
                    parametric,
                    ..SystemConfig::default()
                };
                for seed in 0..200 {
                    assert_eq!(random_system(seed, &cfg).validate(), Ok(()));
                }
            }
        }
    }
}
