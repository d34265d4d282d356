/// Mixed-radix indexing of joint actions, player-last (row-major):
/// `index = Σ_i a_i · Π_{j>i} |A_j|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointActionSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl JointActionSpace {
    /// Returns `None` if any player has no actions or the size overflows `usize`.
    pub fn new(counts: Vec<usize>) -> Option<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return None;
        }
        let mut strides = vec![1; counts.len()];
        let mut size: usize = 1;
        for i in (0..counts.len()).rev() {
            strides[i] = size;
            size = size.checked_mul(counts[i])?;
        }
        Some(Self {
            counts,
            strides,
            size,
        })
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.counts[player]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Player `i`'s component of joint action `index`.
    #[inline]
    pub fn component(&self, index: usize, player: usize) -> usize {
        (index / self.strides[player]) % self.counts[player]
    }

    pub fn encode(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.counts.len());
        actions.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.counts.len())
            .map(|i| self.component(index, i))
            .collect()
    }

    /// Index of the opponents' joint action `a_{-i}` in the space with player
    /// `i` removed (same player-last ordering).
    pub fn opponent_index(&self, index: usize, player: usize) -> usize {
        let mut idx = 0;
        for (j, &n) in self.counts.iter().enumerate() {
            if j != player {
                idx = idx * n + self.component(index, j);
            }
        }
        idx
    }

    /// Number of opponent joint actions for player `i`.
    pub fn opponent_size(&self, player: usize) -> usize {
        self.size / self.counts[player]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn player_last_ordering() {
        let j = JointActionSpace::new(vec![2, 3]).unwrap();
        assert_eq!(j.size(), 6);
        assert_eq!(j.encode(&[1, 0]), 3);
        assert_eq!(j.encode(&[0, 2]), 2);
        assert_eq!(j.decode(5), vec![1, 2]);
    }

    #[test]
    fn rejects_empty_action_set() {
        assert!(JointActionSpace::new(vec![2, 0]).is_none());
        assert!(JointActionSpace::new(vec![]).is_none());
    }

    #[test]
    fn opponent_index_drops_one_player() {
        let j = JointActionSpace::new(vec![2, 3, 2]).unwrap();
        let idx = j.encode(&[1, 2, 1]);
        assert_eq!(j.opponent_index(idx, 0), 2 * 2 + 1);
        assert_eq!(j.opponent_index(idx, 1), 2 + 1);
        assert_eq!(j.opponent_size(1), 4);
    }

    proptest! {
        #[test]
        fn encode_decode_inverse(counts in prop::collection::vec(1usize..5, 1..5), seed in 0usize..10_000) {
            let j = JointActionSpace::new(counts).unwrap();
            let idx = seed % j.size();
            prop_assert_eq!(j.encode(&j.decode(idx)), idx);
        }
    }
}
