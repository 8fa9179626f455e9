//! Geodesic paths from the identity, their finite-depth extendability, and
//! bi-infinite geodesic witnesses.
//!
//! The inverse limit of the sets `C_n` of length-`n` geodesics is not
//! computable. What is computed instead is the depth-`m` shadow: the
//! length-`n` geodesics that extend to some length-`m` geodesic. A witness
//! found this way certifies geodesity only up to the searched depth.

use std::collections::HashSet;

use crate::cayley::LengthOracle;
use crate::error::{Error, Result};
use crate::models::{Element, GroupModel};
use crate::presentation::{Letter, Word};

/// Vertex budget for the lookup ball of models without closed-form lengths.
pub const ORACLE_BUDGET: usize = 2_000_000;

/// Length-`n` geodesics from the identity in lexicographic label order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicSet {
    pub n: usize,
    pub paths: Vec<Word>,
    /// Set when enumeration stopped at the cap.
    pub truncated: bool,
}

/// A geodesic segment of length `2n` whose midpoint is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiInfiniteWitness {
    pub n: usize,
    /// Labels read from `start` to `end`.
    pub labels: Word,
    pub start: Element,
    pub end: Element,
}

impl BiInfiniteWitness {
    /// Every point of the segment, `start` first; entry `n` is the identity.
    pub fn points(&self, model: &GroupModel) -> Vec<Element> {
        let mut out = vec![self.start.clone()];
        for &l in self.labels.letters() {
            out.push(model.apply(out.last().unwrap(), l));
        }
        out
    }

    /// Re-checks `d(start, end) = 2n = d(start, e) + d(e, end)` from scratch.
    pub fn verify(&self, model: &GroupModel) -> bool {
        let n = self.n as u64;
        let e = model.identity();
        let d = |x: &Element, y: &Element| crate::cayley::distance(model, x, y, 2 * n);
        let pts = self.points(model);
        self.labels.len() == 2 * self.n
            && pts.last() == Some(&self.end)
            && model.is_identity(&pts[self.n])
            && d(&self.start, &self.end) == Some(2 * n)
            && d(&self.start, &e) == Some(n)
            && d(&e, &self.end) == Some(n)
    }
}

struct Search<'a> {
    oracle: LengthOracle<'a>,
    letters: Vec<Letter>,
    dead: HashSet<(String, usize)>,
}

impl<'a> Search<'a> {
    fn new(model: &'a GroupModel, depth: usize) -> Result<Self> {
        Ok(Search {
            oracle: LengthOracle::new(model, depth as u32, ORACLE_BUDGET)?,
            letters: model.generators().letters().collect(),
            dead: HashSet::new(),
        })
    }

    fn model(&self) -> &'a GroupModel {
        self.oracle.model()
    }

    /// Letters `l` with `|g l| = |g| + 1`, in label order.
    fn forward(&self, g: &Element, len: usize) -> Vec<(Letter, Element)> {
        let m = self.model();
        self.letters
            .iter()
            .filter_map(|&l| {
                let y = m.apply(g, l);
                (self.oracle.length(&y) == Some(len as u64 + 1)).then_some((l, y))
            })
            .collect()
    }

    /// Some geodesic continuation of length `remaining` from `g` (at length `len`).
    fn extend(&mut self, g: &Element, len: usize, remaining: usize) -> Option<Vec<Letter>> {
        if remaining == 0 {
            return Some(Vec::new());
        }
        let key = (self.model().canonical_key(g), remaining);
        if self.dead.contains(&key) {
            return None;
        }
        for (l, y) in self.forward(g, len) {
            if let Some(mut rest) = self.extend(&y, len + 1, remaining - 1) {
                rest.insert(0, l);
                return Some(rest);
            }
        }
        self.dead.insert(key);
        None
    }

    fn enumerate(&self, n: usize, cap: usize) -> GeodesicSet {
        let mut out = GeodesicSet {
            n,
            paths: Vec::new(),
            truncated: false,
        };
        let mut prefix = Vec::with_capacity(n);
        self.enumerate_from(&self.model().identity(), n, cap, &mut prefix, &mut out);
        out
    }

    fn enumerate_from(
        &self,
        g: &Element,
        n: usize,
        cap: usize,
        prefix: &mut Vec<Letter>,
        out: &mut GeodesicSet,
    ) {
        if out.truncated {
            return;
        }
        if prefix.len() == n {
            if out.paths.len() == cap {
                out.truncated = true;
            } else {
                out.paths.push(Word::new(prefix.clone()));
            }
            return;
        }
        for (l, y) in self.forward(g, prefix.len()) {
            prefix.push(l);
            self.enumerate_from(&y, n, cap, prefix, out);
            prefix.pop();
        }
    }
}

/// All length-`n` geodesics from the identity, or the first `cap` of them.
pub fn enumerate_geodesics(model: &GroupModel, n: usize, cap: usize) -> Result<GeodesicSet> {
    Ok(Search::new(model, n)?.enumerate(n, cap))
}

/// Drops the last edge; a prefix of a geodesic is a geodesic.
pub fn truncate(g: &Word) -> Result<Word> {
    if g.is_empty() {
        return Err(Error::EmptyPath);
    }
    Ok(g.prefix(g.len() - 1))
}

/// The length-`n` geodesics (from the first `cap`) that extend to some
/// length-`m` geodesic.
pub fn extendable_prefixes(
    model: &GroupModel,
    n: usize,
    m: usize,
    cap: usize,
) -> Result<GeodesicSet> {
    if m < n {
        return Err(Error::InvalidParameter(format!("depth {m} below length {n}")));
    }
    let mut search = Search::new(model, m)?;
    let all = search.enumerate(n, cap);
    let mut keep = Vec::new();
    for w in &all.paths {
        let g = model.evaluate_word(w)?;
        if search.extend(&g, n, m - n).is_some() {
            keep.push(w.clone());
        }
    }
    Ok(GeodesicSet {
        n,
        paths: keep,
        truncated: all.truncated,
    })
}

/// Finds a length-`2n` geodesic `w` and translates it so its midpoint is
/// the identity: `start = h^-1` with `h` the value of the first half.
pub fn bi_infinite_witness(model: &GroupModel, n: usize) -> Result<BiInfiniteWitness> {
    if n == 0 {
        return Err(Error::InvalidParameter("half-length must be positive".into()));
    }
    let mut search = Search::new(model, 2 * n)?;
    let labels = search
        .extend(&model.identity(), 0, 2 * n)
        .ok_or(Error::NotFound)?;
    let w = Word::new(labels);
    let h = model.evaluate_word(&w.prefix(n))?;
    let start = model.invert(&h);
    let end = model.multiply(&start, &model.evaluate_word(&w)?);
    let witness = BiInfiniteWitness {
        n,
        labels: w,
        start,
        end,
    };
    if !witness.verify(model) {
        return Err(Error::InvalidData("bi-infinite witness failed its distance check".into()));
    }
    Ok(witness)
}
