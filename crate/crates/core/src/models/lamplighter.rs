use std::collections::BTreeSet;

use crate::presentation::{Letter, Word};

/// Element of the lamplighter group `Z_2 wr Z`: the finite set of lit
/// lamps (the `(+)_Z Z_2` part) and the cursor position (the `Z` quotient).
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct LamplighterElement {
    lamps: BTreeSet<i64>,
    cursor: i64,
}

impl LamplighterElement {
    pub fn new(lamps: impl IntoIterator<Item = i64>, cursor: i64) -> Self {
        LamplighterElement {
            lamps: lamps.into_iter().collect(),
            cursor,
        }
    }

    pub fn identity() -> Self {
        Self::new([], 0)
    }

    pub fn lamps(&self) -> &BTreeSet<i64> {
        &self.lamps
    }

    pub fn cursor(&self) -> i64 {
        self.cursor
    }

    pub(crate) fn toggle(&self) -> Self {
        let mut lamps = self.lamps.clone();
        if !lamps.remove(&self.cursor) {
            lamps.insert(self.cursor);
        }
        LamplighterElement {
            lamps,
            cursor: self.cursor,
        }
    }

    pub(crate) fn shift(&self, by: i64) -> Self {
        LamplighterElement {
            lamps: self.lamps.clone(),
            cursor: self.cursor + by,
        }
    }

    /// `(L, c)(M, e) = (L xor (M + c), c + e)`.
    pub(crate) fn mul(&self, other: &Self) -> Self {
        let shifted: BTreeSet<i64> = other.lamps.iter().map(|p| p + self.cursor).collect();
        LamplighterElement {
            lamps: self.lamps.symmetric_difference(&shifted).copied().collect(),
            cursor: self.cursor + other.cursor,
        }
    }

    pub(crate) fn inverse(&self) -> Self {
        LamplighterElement {
            lamps: self.lamps.iter().map(|p| p - self.cursor).collect(),
            cursor: -self.cursor,
        }
    }

    /// Lit lamps plus the shortest cursor tour that starts at 0, visits
    /// every lit lamp and stops at the cursor.
    pub fn word_length(&self) -> u64 {
        let (Some(&lo), Some(&hi)) = (self.lamps.first(), self.lamps.last()) else {
            return self.cursor.unsigned_abs();
        };
        let (l, r, c) = (lo.min(0), hi.max(0), self.cursor);
        let left_first = (0 - l) + (r - l) + (r - c).abs();
        let right_first = r + (r - l) + (c - l).abs();
        self.lamps.len() as u64 + left_first.min(right_first) as u64
    }

    /// A geodesic spelling (with `a` = generator 0, `t` = generator 1).
    pub fn spell(&self) -> Word {
        let a = Letter::new(0, false);
        let step = |dir: i64| Letter::new(1, dir < 0);
        let mut out = Vec::new();
        let mut pos = 0i64;
        let (Some(&lo), Some(&hi)) = (self.lamps.first(), self.lamps.last()) else {
            let dir = self.cursor.signum();
            out.extend(std::iter::repeat_n(step(dir), self.cursor.unsigned_abs() as usize));
            return Word::new(out);
        };
        let (l, r, c) = (lo.min(0), hi.max(0), self.cursor);
        let left_first = (0 - l) + (r - l) + (r - c).abs() <= r + (r - l) + (c - l).abs();
        let order = if left_first { [l, r] } else { [r, l] };
        let mut lit: BTreeSet<i64> = BTreeSet::new();
        let visit = |out: &mut Vec<Letter>, p: i64, lit: &mut BTreeSet<i64>| {
            if self.lamps.contains(&p) && lit.insert(p) {
                out.push(a);
            }
        };
        visit(&mut out, pos, &mut lit);
        for target in order.into_iter().chain([c]) {
            while pos != target {
                let dir = (target - pos).signum();
                pos += dir;
                out.push(step(dir));
                visit(&mut out, pos, &mut lit);
            }
        }
        Word::new(out)
    }

    pub fn key(&self) -> String {
        let lamps: Vec<String> = self.lamps.iter().map(i64::to_string).collect();
        format!("{{{}}}@{}", lamps.join(","), self.cursor)
    }
}
