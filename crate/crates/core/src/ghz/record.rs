use serde::Serialize;

use super::layout::Layout;

/// Cumulative click counts per detector, indexed like the layout.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DetectionRecord {
    pub n: usize,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RecordClass {
    /// One click in every pair. `bits[i]` is +1 for a click at `[i,1]`.
    Complete { bits: Vec<i8>, parity: i8 },
    /// Extendable to a complete herald.
    Partial,
    /// n = 2 only: both detectors of one pair clicked once, the other pair
    /// is dark. Leaves a Bell state in the rotated dual-rail basis.
    WrongBasis,
    Failed,
}

impl RecordClass {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, RecordClass::Partial)
    }

    pub fn name(&self) -> &'static str {
        match self {
            RecordClass::Complete { .. } => "complete",
            RecordClass::Partial => "partial",
            RecordClass::WrongBasis => "wrong_basis",
            RecordClass::Failed => "failed",
        }
    }
}

impl DetectionRecord {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            counts: vec![0; 2 * n],
        }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn add(&self, other: &[u32]) -> Self {
        Self {
            n: self.n,
            counts: self.counts.iter().zip(other).map(|(a, b)| a + b).collect(),
        }
    }

    /// Clicks per detector pair.
    pub fn pair_totals(&self, layout: &Layout) -> Vec<u32> {
        let mut t = vec![0; self.n];
        for (d, &c) in self.counts.iter().enumerate() {
            t[layout.pair_of(d).0] += c;
        }
        t
    }

    pub fn clicked_pairs(&self, layout: &Layout) -> Vec<bool> {
        self.pair_totals(layout).iter().map(|&c| c > 0).collect()
    }

    pub fn classify(&self, layout: &Layout) -> RecordClass {
        let totals = self.pair_totals(layout);
        if self.counts.iter().all(|&c| c <= 1) && totals.iter().all(|&t| t <= 1) {
            if totals.iter().all(|&t| t == 1) {
                let bits: Vec<i8> = (0..self.n)
                    .map(|i| if self.counts[layout.detector(i, 1)] == 1 { 1 } else { -1 })
                    .collect();
                let parity = bits.iter().product();
                return RecordClass::Complete { bits, parity };
            }
            return RecordClass::Partial;
        }
        if self.n == 2 && self.counts.iter().all(|&c| c <= 1) {
            let mut t = totals.clone();
            t.sort_unstable();
            if t == [0, 2] {
                return RecordClass::WrongBasis;
            }
        }
        RecordClass::Failed
    }

    /// Pattern string such as `0101`, one digit per detector (`+` above 9).
    pub fn pattern(&self) -> String {
        self.counts
            .iter()
            .map(|&c| std::char::from_digit(c, 10).unwrap_or('+'))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes() {
        let l = Layout::new(2).unwrap();
        let rec = |c: [u32; 4]| DetectionRecord {
            n: 2,
            counts: c.to_vec(),
        };
        // detectors [1,0] [1,1] [2,0] [2,1]; pairs {[1,1],[2,0]} and {[2,1],[1,0]}
        match rec([0, 1, 0, 1]).classify(&l) {
            RecordClass::Complete { bits, parity } => {
                assert_eq!(bits, vec![1, 1]);
                assert_eq!(parity, 1);
            }
            c => panic!("{c:?}"),
        }
        match rec([1, 1, 0, 0]).classify(&l) {
            RecordClass::Complete { parity, .. } => assert_eq!(parity, -1),
            c => panic!("{c:?}"),
        }
        assert_eq!(rec([0, 1, 1, 0]).classify(&l), RecordClass::WrongBasis);
        assert_eq!(rec([1, 0, 0, 1]).classify(&l), RecordClass::WrongBasis);
        assert_eq!(rec([0, 2, 0, 0]).classify(&l), RecordClass::Failed);
        assert_eq!(rec([0, 1, 0, 0]).classify(&l), RecordClass::Partial);
        assert_eq!(rec([0, 0, 0, 0]).classify(&l), RecordClass::Partial);
        assert_eq!(rec([0, 1, 0, 1]).pattern(), "0101");
    }
}
