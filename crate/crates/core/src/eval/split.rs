//! Player-level holdout splits for the repeated evaluation protocol.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

/// One repeat's partition of players. No window of a test player ever
/// reaches training, because membership is decided per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub train_players: Vec<String>,
    pub test_players: Vec<String>,
    pub repeat_index: usize,
    pub seed: u64,
}

/// Draws `n_repeats` independent holdout selections of `holdout` players,
/// redrawing any selection that leaves either side single-class. Fails with
/// `InfeasibleSplit` when no selection can cover both classes on both
/// sides (a class with fewer than 2 players, or holdout outside
/// [2, players - 2]).
pub fn make_splits(
    players: &[(String, u8)],
    n_repeats: usize,
    holdout: usize,
    seed: u64,
) -> Result<Vec<GroupSplit>, EvalError> {
    let total = players.len();
    let class1 = players.iter().filter(|(_, s)| *s == 1).count();
    let class0 = total - class1;
    if class0 < 2 || class1 < 2 {
        return Err(EvalError::InfeasibleSplit(format!(
            "each class needs at least 2 players to appear on both sides (have {class0}/{class1})"
        )));
    }
    if holdout < 2 || holdout > total - 2 {
        return Err(EvalError::InfeasibleSplit(format!(
            "holdout {holdout} cannot cover both classes on both sides of {total} players"
        )));
    }

    let mut sorted: Vec<(String, u8)> = players.to_vec();
    sorted.sort();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits = Vec::with_capacity(n_repeats);
    for repeat_index in 0..n_repeats {
        let mut attempts = 0;
        let (train, test) = loop {
            attempts += 1;
            if attempts > 100_000 {
                return Err(EvalError::InfeasibleSplit(
                    "class coverage redraw budget exhausted".into(),
                ));
            }
            // Partial Fisher-Yates: the first `holdout` entries become test.
            let mut order: Vec<usize> = (0..total).collect();
            for k in 0..holdout {
                let j = rng.random_range(k..total);
                order.swap(k, j);
            }
            let (test_idx, train_idx) = order.split_at(holdout);
            let covered = |idx: &[usize]| {
                idx.iter().any(|&i| sorted[i].1 == 1) && idx.iter().any(|&i| sorted[i].1 == 0)
            };
            if covered(test_idx) && covered(train_idx) {
                let mut test: Vec<String> =
                    test_idx.iter().map(|&i| sorted[i].0.clone()).collect();
                let mut train: Vec<String> =
                    train_idx.iter().map(|&i| sorted[i].0.clone()).collect();
                test.sort();
                train.sort();
                break (train, test);
            }
        };
        splits.push(GroupSplit {
            train_players: train,
            test_players: test,
            repeat_index,
            seed,
        });
    }
    Ok(splits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nineteen_players() -> Vec<(String, u8)> {
        (0..19)
            .map(|i| (format!("p{:02}", i + 1), (i < 9) as u8))
            .collect()
    }

    #[test]
    fn default_protocol_shape() {
        let splits = make_splits(&nineteen_players(), 100, 5, 7).unwrap();
        assert_eq!(splits.len(), 100);
        for (i, s) in splits.iter().enumerate() {
            assert_eq!(s.repeat_index, i);
            assert_eq!(s.train_players.len(), 14);
            assert_eq!(s.test_players.len(), 5);
            for p in &s.test_players {
                assert!(!s.train_players.contains(p), "player {p} on both sides");
            }
            let mut all: Vec<&String> =
                s.train_players.iter().chain(s.test_players.iter()).collect();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), 19);
        }
    }

    #[test]
    fn both_sides_cover_both_classes() {
        let players = nineteen_players();
        let label = |id: &String| players.iter().find(|(p, _)| p == id).unwrap().1;
        let splits = make_splits(&players, 200, 5, 3).unwrap();
        for s in &splits {
            for side in [&s.train_players, &s.test_players] {
                assert!(side.iter().any(|p| label(p) == 1));
                assert!(side.iter().any(|p| label(p) == 0));
            }
        }
    }

    #[test]
    fn same_seed_same_splits() {
        let a = make_splits(&nineteen_players(), 50, 5, 11).unwrap();
        let b = make_splits(&nineteen_players(), 50, 5, 11).unwrap();
        assert_eq!(a, b);
        let c = make_splits(&nineteen_players(), 50, 5, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn holdout_eighteen_of_nineteen_is_infeasible() {
        // One player left in training can only carry one class.
        let err = make_splits(&nineteen_players(), 10, 18, 1).unwrap_err();
        assert!(matches!(err, EvalError::InfeasibleSplit(_)));
    }

    #[test]
    fn holdout_seventeen_of_nineteen_is_feasible() {
        let splits = make_splits(&nineteen_players(), 10, 17, 1).unwrap();
        assert_eq!(splits[0].train_players.len(), 2);
    }

    #[test]
    fn singleton_class_is_infeasible() {
        let mut players = nineteen_players();
        players.retain(|(_, s)| *s == 0);
        players.push(("q01".to_string(), 1));
        let err = make_splits(&players, 10, 4, 1).unwrap_err();
        assert!(matches!(err, EvalError::InfeasibleSplit(_)));
    }

    #[test]
    fn split_independent_of_input_order() {
        let mut shuffled = nineteen_players();
        shuffled.reverse();
        let a = make_splits(&nineteen_players(), 20, 5, 9).unwrap();
        let b = make_splits(&shuffled, 20, 5, 9).unwrap();
        assert_eq!(a, b);
    }
}
