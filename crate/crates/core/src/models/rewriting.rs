//! Bounded Knuth-Bendix completion for group presentations under shortlex.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::presentation::{Letter, Presentation, Word};

/// Budget for a completion run. Exhausting any of them aborts with
/// [`Error::Incomplete`]; a partial system is never returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompletionLimits {
    pub max_rules: usize,
    pub max_rule_length: usize,
    pub max_steps: usize,
}

impl Default for CompletionLimits {
    fn default() -> Self {
        CompletionLimits {
            max_rules: 500,
            max_rule_length: 40,
            max_steps: 50_000,
        }
    }
}

/// A confluent, shortlex-terminating string rewriting system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewritingSystem {
    rules: Vec<(Word, Word)>,
    by_last: HashMap<Letter, Vec<usize>>,
}

impl RewritingSystem {
    fn from_rules(mut rules: Vec<(Word, Word)>) -> Self {
        rules.sort();
        let mut by_last: HashMap<Letter, Vec<usize>> = HashMap::new();
        for (i, (l, _)) in rules.iter().enumerate() {
            if let Some(&last) = l.letters().last() {
                by_last.entry(last).or_default().push(i);
            }
        }
        RewritingSystem { rules, by_last }
    }

    pub fn rules(&self) -> &[(Word, Word)] {
        &self.rules
    }

    /// Normal form by suffix-driven rewriting.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut input: Vec<Letter> = w.letters().iter().rev().copied().collect();
        let mut out: Vec<Letter> = Vec::with_capacity(w.len());
        while let Some(l) = input.pop() {
            out.push(l);
            if let Some(cands) = self.by_last.get(&l) {
                for &i in cands {
                    let (lhs, rhs) = &self.rules[i];
                    let n = lhs.len();
                    if out.len() >= n && out[out.len() - n..] == *lhs.letters() {
                        out.truncate(out.len() - n);
                        input.extend(rhs.letters().iter().rev());
                        break;
                    }
                }
            }
        }
        Word::new(out)
    }

    /// Every critical pair of the system, reduced on both sides.
    pub fn unresolved_critical_pairs(&self) -> Vec<(Word, Word)> {
        let mut out = Vec::new();
        for a in &self.rules {
            for b in &self.rules {
                for (x, y) in overlaps(a, b) {
                    let (x, y) = (self.reduce(&x), self.reduce(&y));
                    if x != y {
                        out.push((x, y));
                    }
                }
            }
        }
        out
    }

    pub fn is_confluent(&self) -> bool {
        self.unresolved_critical_pairs().is_empty()
    }
}

/// Critical pairs from suffix/prefix overlaps and inclusions of `a` in `b`.
fn overlaps(a: &(Word, Word), b: &(Word, Word)) -> Vec<(Word, Word)> {
    let (l1, r1) = a;
    let (l2, r2) = b;
    let (s1, s2) = (l1.letters(), l2.letters());
    let mut out = Vec::new();
    for k in 1..s1.len().min(s2.len()) {
        if s1[s1.len() - k..] == s2[..k] {
            let tail = Word::new(s2[k..].to_vec());
            let head = Word::new(s1[..s1.len() - k].to_vec());
            out.push((r1.concat(&tail), head.concat(r2)));
        }
    }
    if s1.len() < s2.len() {
        for i in 0..=(s2.len() - s1.len()) {
            if s2[i..i + s1.len()] == *s1 {
                let head = Word::new(s2[..i].to_vec());
                let tail = Word::new(s2[i + s1.len()..].to_vec());
                out.push((head.concat(r1).concat(&tail), r2.clone()));
            }
        }
    }
    out
}

fn contains(hay: &[Letter], needle: &[Letter]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

fn reduce_with(rules: &[(Word, Word)], w: &Word) -> Word {
    let mut cur = w.letters().to_vec();
    'outer: loop {
        for (l, r) in rules {
            let n = l.len();
            if n == 0 || n > cur.len() {
                continue;
            }
            if let Some(i) = (0..=cur.len() - n).find(|&i| cur[i..i + n] == *l.letters()) {
                let mut next = cur[..i].to_vec();
                next.extend_from_slice(r.letters());
                next.extend_from_slice(&cur[i + n..]);
                cur = next;
                continue 'outer;
            }
        }
        return Word::new(cur);
    }
}

/// Runs shortlex Knuth-Bendix completion on the group presentation
/// (free inverse rules plus `r -> 1` for every relator). Pending equations
/// are processed shortest first, then lexicographically.
pub fn complete(p: &Presentation, limits: CompletionLimits) -> Result<RewritingSystem> {
    if limits.max_rules == 0 || limits.max_rule_length == 0 || limits.max_steps == 0 {
        return Err(Error::InvalidParameter("completion limits must be positive".into()));
    }
    let mut pending: BTreeSet<(usize, Word, Word)> = BTreeSet::new();
    let push = |pending: &mut BTreeSet<(usize, Word, Word)>, x: Word, y: Word| {
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        pending.insert((hi.len() + lo.len(), hi, lo));
    };
    for l in p.generators().letters() {
        push(&mut pending, Word::new(vec![l, l.inverse()]), Word::empty());
    }
    for r in p.relators() {
        push(&mut pending, r.clone(), Word::empty());
    }

    let mut rules: Vec<(Word, Word)> = Vec::new();
    let mut steps = 0usize;
    while let Some(first) = pending.iter().next().cloned() {
        pending.remove(&first);
        steps += 1;
        if steps > limits.max_steps {
            return Err(Error::Incomplete {
                rules_found: rules.len(),
                budget_used: steps - 1,
            });
        }
        let (_, x, y) = first;
        let (x, y) = (reduce_with(&rules, &x), reduce_with(&rules, &y));
        if x == y {
            continue;
        }
        let (lhs, rhs) = if x > y { (x, y) } else { (y, x) };
        if lhs.len() > limits.max_rule_length {
            return Err(Error::Incomplete {
                rules_found: rules.len(),
                budget_used: steps,
            });
        }
        // Interreduce: rules whose left side contains the new one go back to
        // the queue, right sides are renormalised.
        let mut kept = Vec::with_capacity(rules.len() + 1);
        for (l, r) in rules.drain(..) {
            if contains(l.letters(), lhs.letters()) {
                push(&mut pending, l, r);
            } else {
                kept.push((l, r));
            }
        }
        kept.push((lhs.clone(), rhs));
        let snapshot = kept.clone();
        rules = kept
            .into_iter()
            .map(|(l, r)| {
                let r = reduce_with(&snapshot, &r);
                (l, r)
            })
            .collect();
        if rules.len() > limits.max_rules {
            return Err(Error::Incomplete {
                rules_found: rules.len(),
                budget_used: steps,
            });
        }
        let new_rule = rules.iter().find(|(l, _)| *l == lhs).cloned().unwrap();
        for other in &rules {
            for (a, b) in overlaps(&new_rule, other) {
                push(&mut pending, a, b);
            }
            if other.0 != new_rule.0 {
                for (a, b) in overlaps(other, &new_rule) {
                    push(&mut pending, a, b);
                }
            }
        }
    }
    Ok(RewritingSystem::from_rules(rules))
}
