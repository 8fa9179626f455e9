//! Marked groups with exact equality: built-in models and rewriting-backed
//! models for finite presentations.
//!
//! Every model answers the word problem through [`GroupModel::canonical_key`]:
//! two elements are equal exactly when their keys are equal. Generic
//! presentations are only accepted once bounded completion succeeds, so a
//! model never computes with a guessed equality.

mod lamplighter;
pub mod rewriting;

use std::collections::{HashSet, VecDeque};
use std::fmt;

pub use lamplighter::LamplighterElement;
pub use rewriting::{complete, CompletionLimits, RewritingSystem};

use crate::error::{Error, Result};
use crate::presentation::{parse_presentation, GeneratorSet, Letter, Presentation, Word};

/// A group element in whichever concrete carrier its model uses.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Element {
    /// Coordinates in `Z^k`.
    Vector(Vec<i64>),
    /// Free reduced word, or shortlex normal form of a rewriting model.
    Word(Word),
    Lamp(LamplighterElement),
    /// The affine map `x -> (-1)^flip x + shift` of the infinite dihedral group.
    Affine { flip: bool, shift: i64 },
    Residue(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    FreeAbelian(usize),
    Free(usize),
    Lamplighter,
    InfiniteDihedral,
    Cyclic(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finiteness {
    Finite(u64),
    Infinite,
    Unknown,
}

#[derive(Clone, Debug)]
enum Kind {
    FreeAbelian(usize),
    Free,
    Lamplighter,
    InfiniteDihedral,
    Cyclic(u64),
    Rewriting(RewritingSystem),
}

#[derive(Clone, Debug)]
pub struct GroupModel {
    descriptor: String,
    generators: GeneratorSet,
    presentation: Option<Presentation>,
    kind: Kind,
    finiteness: Finiteness,
}

const FINITENESS_PROBE: usize = 20_000;

pub fn make_builtin_model(kind: BuiltinKind) -> Result<GroupModel> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    let (descriptor, generators, presentation, kind, finiteness) = match kind {
        BuiltinKind::FreeAbelian(k) => {
            if k == 0 {
                return bad("free abelian rank must be at least 1");
            }
            let gens = GeneratorSet::standard(k)?;
            let mut rels = Vec::new();
            for i in 0..k {
                for j in i + 1..k {
                    rels.push(Word::new(vec![
                        Letter::new(i, false),
                        Letter::new(j, false),
                        Letter::new(i, true),
                        Letter::new(j, true),
                    ]));
                }
            }
            let p = Presentation::new(gens.clone(), rels)?;
            let d = if k == 1 { "z".to_string() } else { format!("z^{k}") };
            (d, gens, Some(p), Kind::FreeAbelian(k), Finiteness::Infinite)
        }
        BuiltinKind::Free(k) => {
            if k == 0 {
                return bad("free rank must be at least 1");
            }
            let gens = GeneratorSet::standard(k)?;
            let p = Presentation::new(gens.clone(), Vec::new())?;
            (format!("free:{k}"), gens, Some(p), Kind::Free, Finiteness::Infinite)
        }
        BuiltinKind::Lamplighter => (
            "lamplighter".to_string(),
            GeneratorSet::new(["a", "t"])?,
            None,
            Kind::Lamplighter,
            Finiteness::Infinite,
        ),
        BuiltinKind::InfiniteDihedral => {
            let gens = GeneratorSet::new(["s", "t"])?;
            let s = Letter::new(0, false);
            let t = Letter::new(1, false);
            let p = Presentation::new(
                gens.clone(),
                vec![Word::new(vec![s, s]), Word::new(vec![t, t])],
            )?;
            (
                "dihedral_inf".to_string(),
                gens,
                Some(p),
                Kind::InfiniteDihedral,
                Finiteness::Infinite,
            )
        }
        BuiltinKind::Cyclic(n) => {
            if n == 0 {
                return bad("cyclic order must be at least 1");
            }
            let gens = GeneratorSet::standard(1)?;
            let p = Presentation::new(
                gens.clone(),
                vec![Word::new(vec![Letter::new(0, false); n as usize])],
            )?;
            (format!("cyclic:{n}"), gens, Some(p), Kind::Cyclic(n), Finiteness::Finite(n))
        }
    };
    Ok(GroupModel {
        descriptor,
        generators,
        presentation,
        kind,
        finiteness,
    })
}

/// Model backed by a successful bounded completion of `p`.
pub fn complete_rewriting(p: &Presentation, limits: CompletionLimits) -> Result<GroupModel> {
    let system = complete(p, limits)?;
    let mut model = GroupModel {
        descriptor: format!("presentation:{}", p.render()),
        generators: p.generators().clone(),
        presentation: Some(p.clone()),
        kind: Kind::Rewriting(system),
        finiteness: Finiteness::Unknown,
    };
    for r in p.relators() {
        if !model.is_identity(&model.evaluate_word(r)?) {
            return Err(Error::InvalidData("completed system violates a relator".into()));
        }
    }
    model.finiteness = model.probe_finiteness(FINITENESS_PROBE);
    Ok(model)
}

/// Parses a model descriptor: `z`, `z^k`, `free:k`, `lamplighter`,
/// `dihedral_inf`, `cyclic:n` or `presentation:<...>`.
pub fn model_from_descriptor(text: &str) -> Result<GroupModel> {
    let t = text.trim();
    let num = |s: &str| -> Result<u64> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParameter(format!("bad model descriptor {t:?}")))
    };
    if t == "z" {
        make_builtin_model(BuiltinKind::FreeAbelian(1))
    } else if let Some(k) = t.strip_prefix("z^") {
        make_builtin_model(BuiltinKind::FreeAbelian(num(k)? as usize))
    } else if let Some(k) = t.strip_prefix("free:") {
        make_builtin_model(BuiltinKind::Free(num(k)? as usize))
    } else if t == "lamplighter" {
        make_builtin_model(BuiltinKind::Lamplighter)
    } else if t == "dihedral_inf" {
        make_builtin_model(BuiltinKind::InfiniteDihedral)
    } else if let Some(n) = t.strip_prefix("cyclic:") {
        make_builtin_model(BuiltinKind::Cyclic(num(n)?))
    } else if let Some(p) = t.strip_prefix("presentation:") {
        complete_rewriting(&parse_presentation(p)?, CompletionLimits::default())
    } else {
        Err(Error::InvalidParameter(format!("unknown model descriptor {t:?}")))
    }
}

impl GroupModel {
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn presentation(&self) -> Option<&Presentation> {
        self.presentation.as_ref()
    }

    pub fn require_presentation(&self) -> Result<&Presentation> {
        self.presentation.as_ref().ok_or(Error::NoPresentation)
    }

    pub fn has_presentation(&self) -> bool {
        self.presentation.is_some()
    }

    pub fn finiteness(&self) -> Finiteness {
        self.finiteness
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.finiteness, Finiteness::Finite(_))
    }

    /// Whether this is the rank-`k` free abelian model with coordinate elements.
    pub fn free_abelian_rank(&self) -> Option<usize> {
        match self.kind {
            Kind::FreeAbelian(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_lamplighter(&self) -> bool {
        matches!(self.kind, Kind::Lamplighter)
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            Kind::FreeAbelian(k) => Element::Vector(vec![0; *k]),
            Kind::Free | Kind::Rewriting(_) => Element::Word(Word::empty()),
            Kind::Lamplighter => Element::Lamp(LamplighterElement::identity()),
            Kind::InfiniteDihedral => Element::Affine {
                flip: false,
                shift: 0,
            },
            Kind::Cyclic(_) => Element::Residue(0),
        }
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        if l.generator() < self.generators.len() {
            Ok(())
        } else {
            Err(Error::UnknownGenerator(l.generator()))
        }
    }

    pub fn generator_element(&self, l: Letter) -> Result<Element> {
        self.check_letter(l)?;
        Ok(self.apply(&self.identity(), l))
    }

    /// Right multiplication by a single signed generator. The letter must
    /// belong to this model's generating set.
    pub fn apply(&self, e: &Element, l: Letter) -> Element {
        let sign = if l.is_inverse() { -1 } else { 1 };
        match (&self.kind, e) {
            (Kind::FreeAbelian(_), Element::Vector(v)) => {
                let mut v = v.clone();
                v[l.generator()] += sign;
                Element::Vector(v)
            }
            (Kind::Free, Element::Word(w)) => {
                let mut letters = w.letters().to_vec();
                if letters.last() == Some(&l.inverse()) {
                    letters.pop();
                } else {
                    letters.push(l);
                }
                Element::Word(Word::new(letters))
            }
            (Kind::Rewriting(rs), Element::Word(w)) => {
                let mut v = w.clone();
                v.push(l);
                Element::Word(rs.reduce(&v))
            }
            (Kind::Lamplighter, Element::Lamp(x)) => Element::Lamp(if l.generator() == 0 {
                x.toggle()
            } else {
                x.shift(sign)
            }),
            (Kind::InfiniteDihedral, Element::Affine { flip, shift }) => {
                let g = if l.generator() == 0 { 0 } else { 1 };
                // (e, k) * (-1, g) = (-e, k + e g)
                let eps = if *flip { -1 } else { 1 };
                Element::Affine {
                    flip: !flip,
                    shift: shift + eps * g,
                }
            }
            (Kind::Cyclic(n), Element::Residue(r)) => Element::Residue(if l.is_inverse() {
                (r + n - 1) % n
            } else {
                (r + 1) % n
            }),
            _ => panic!("element {e:?} does not belong to model {}", self.descriptor),
        }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Element {
        match (&self.kind, x, y) {
            (Kind::FreeAbelian(_), Element::Vector(a), Element::Vector(b)) => {
                Element::Vector(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (Kind::Free, Element::Word(a), Element::Word(b)) => {
                Element::Word(a.concat(b).free_reduce())
            }
            (Kind::Rewriting(rs), Element::Word(a), Element::Word(b)) => {
                Element::Word(rs.reduce(&a.concat(b)))
            }
            (Kind::Lamplighter, Element::Lamp(a), Element::Lamp(b)) => Element::Lamp(a.mul(b)),
            (
                Kind::InfiniteDihedral,
                Element::Affine { flip: f1, shift: k1 },
                Element::Affine { flip: f2, shift: k2 },
            ) => {
                let eps = if *f1 { -1 } else { 1 };
                Element::Affine {
                    flip: f1 ^ f2,
                    shift: k1 + eps * k2,
                }
            }
            (Kind::Cyclic(n), Element::Residue(a), Element::Residue(b)) => {
                Element::Residue((a + b) % n)
            }
            _ => panic!("elements do not belong to model {}", self.descriptor),
        }
    }

    pub fn invert(&self, x: &Element) -> Element {
        match (&self.kind, x) {
            (Kind::FreeAbelian(_), Element::Vector(a)) => {
                Element::Vector(a.iter().map(|v| -v).collect())
            }
            (Kind::Free, Element::Word(w)) => Element::Word(w.inverse()),
            (Kind::Rewriting(rs), Element::Word(w)) => Element::Word(rs.reduce(&w.inverse())),
            (Kind::Lamplighter, Element::Lamp(a)) => Element::Lamp(a.inverse()),
            (Kind::InfiniteDihedral, Element::Affine { flip, shift }) => Element::Affine {
                flip: *flip,
                shift: if *flip { *shift } else { -shift },
            },
            (Kind::Cyclic(n), Element::Residue(r)) => Element::Residue((n - r) % n),
            _ => panic!("element {x:?} does not belong to model {}", self.descriptor),
        }
    }

    /// `x^-1 y`, the element whose length is `d(x, y)`.
    pub fn difference(&self, x: &Element, y: &Element) -> Element {
        self.multiply(&self.invert(x), y)
    }

    pub fn is_identity(&self, x: &Element) -> bool {
        *x == self.identity()
    }

    /// Injective string key; equal keys exactly when equal elements.
    pub fn canonical_key(&self, x: &Element) -> String {
        match x {
            Element::Vector(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                format!("({})", parts.join(","))
            }
            Element::Word(w) => self.generators.render_compact(w),
            Element::Lamp(l) => l.key(),
            Element::Affine { flip, shift } => {
                format!("{}x{:+}", if *flip { "-" } else { "" }, shift)
            }
            Element::Residue(r) => r.to_string(),
        }
    }

    pub fn evaluate_word(&self, w: &Word) -> Result<Element> {
        let mut e = self.identity();
        for &l in w.letters() {
            self.check_letter(l)?;
            e = self.apply(&e, l);
        }
        Ok(e)
    }

    /// A word spelling the element (the canonical word where one exists).
    pub fn spell(&self, x: &Element) -> Word {
        match x {
            Element::Vector(v) => {
                let mut out = Vec::new();
                for (g, &c) in v.iter().enumerate() {
                    out.extend(std::iter::repeat_n(Letter::new(g, c < 0), c.unsigned_abs() as usize));
                }
                Word::new(out)
            }
            Element::Word(w) => w.clone(),
            Element::Lamp(l) => l.spell(),
            Element::Affine { flip, shift } => {
                // translations (t s)^k, reflections (t s)^k s
                let (s, t) = (Letter::new(0, false), Letter::new(1, false));
                let mut out = Vec::new();
                let pair = if *shift >= 0 { [t, s] } else { [s, t] };
                for _ in 0..shift.unsigned_abs() {
                    out.extend(pair);
                }
                if *flip {
                    out.push(s);
                }
                Word::new(out).free_reduce()
            }
            Element::Residue(r) => Word::new(vec![Letter::new(0, false); *r as usize]),
        }
    }

    /// Closed-form word length, available for every built-in model.
    pub fn word_length(&self, x: &Element) -> Option<u64> {
        match (&self.kind, x) {
            (Kind::FreeAbelian(_), Element::Vector(v)) => {
                Some(v.iter().map(|c| c.unsigned_abs()).sum())
            }
            (Kind::Free, Element::Word(w)) => Some(w.len() as u64),
            (Kind::Lamplighter, Element::Lamp(l)) => Some(l.word_length()),
            (Kind::InfiniteDihedral, Element::Affine { flip, shift }) => Some(if *flip {
                (2 * shift - 1).unsigned_abs()
            } else {
                2 * shift.unsigned_abs()
            }),
            (Kind::Cyclic(n), Element::Residue(r)) => Some((*r).min(n - r)),
            _ => None,
        }
    }

    pub fn has_closed_form_length(&self) -> bool {
        !matches!(self.kind, Kind::Rewriting(_))
    }

    /// Word length by breadth-first search from the identity, exact when at
    /// most `cap`.
    pub fn bfs_word_length(&self, x: &Element, cap: u64) -> Option<u64> {
        let target = self.canonical_key(x);
        let id = self.identity();
        if self.canonical_key(&id) == target {
            return Some(0);
        }
        let mut seen: HashSet<String> = HashSet::new();
        seen.insert(self.canonical_key(&id));
        let mut frontier = VecDeque::from([id]);
        for depth in 1..=cap {
            let mut next = VecDeque::new();
            for e in frontier {
                for l in self.generators.letters() {
                    let y = self.apply(&e, l);
                    let k = self.canonical_key(&y);
                    if k == target {
                        return Some(depth);
                    }
                    if seen.insert(k) {
                        next.push_back(y);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            frontier = next;
        }
        None
    }

    /// Exact `|x|` if at most `cap`, by closed form when available.
    pub fn length_capped(&self, x: &Element, cap: u64) -> Option<u64> {
        match self.word_length(x) {
            Some(n) => (n <= cap).then_some(n),
            None => self.bfs_word_length(x, cap),
        }
    }

    fn probe_finiteness(&self, cap: usize) -> Finiteness {
        let id = self.identity();
        let mut seen: HashSet<String> = HashSet::from([self.canonical_key(&id)]);
        let mut queue = VecDeque::from([id]);
        while let Some(e) = queue.pop_front() {
            for l in self.generators.letters() {
                let y = self.apply(&e, l);
                if seen.insert(self.canonical_key(&y)) {
                    if seen.len() > cap {
                        return Finiteness::Unknown;
                    }
                    queue.push_back(y);
                }
            }
        }
        Finiteness::Finite(seen.len() as u64)
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(d: &str) -> GroupModel {
        model_from_descriptor(d).unwrap()
    }

    #[test]
    fn integer_evaluation() {
        let z = model("z");
        let w = z.generators().parse_word("a a a a^-1").unwrap();
        assert_eq!(z.canonical_key(&z.evaluate_word(&w).unwrap()), "(2)");
    }

    #[test]
    fn lamplighter_examples() {
        let m = model("lamplighter");
        let g = m.generators();
        let e = m.evaluate_word(&g.parse_word("a t a t^-1").unwrap()).unwrap();
        assert_eq!(e, Element::Lamp(LamplighterElement::new([0, 1], 0)));
        let e = m.evaluate_word(&g.parse_word("t^5 a t^-5").unwrap()).unwrap();
        assert_eq!(e, Element::Lamp(LamplighterElement::new([5], 0)));
        let a = m.generator_element(Letter::new(0, false)).unwrap();
        assert!(m.is_identity(&m.multiply(&a, &a)));
    }

    #[test]
    fn free_and_z2_examples() {
        let f = model("free:2");
        let w = f.generators().parse_word("a b").unwrap();
        assert_eq!(f.canonical_key(&f.evaluate_word(&w).unwrap()), "ab");
        let z2 = model("z^2");
        let r = z2.generators().parse_word("a b a^-1 b^-1").unwrap();
        assert!(z2.is_identity(&z2.evaluate_word(&r).unwrap()));
    }

    #[test]
    fn unknown_generator_rejected() {
        let z = model("z");
        let w = Word::new(vec![Letter::new(1, false)]);
        assert_eq!(z.evaluate_word(&w), Err(Error::UnknownGenerator(1)));
    }

    #[test]
    fn descriptors() {
        assert!(model_from_descriptor("cyclic:0").is_err());
        assert!(model_from_descriptor("quaternions").is_err());
        assert_eq!(model("cyclic:12").finiteness(), Finiteness::Finite(12));
        let p = model("presentation:<a | a^2>");
        assert_eq!(p.finiteness(), Finiteness::Finite(2));
        assert_eq!(p.descriptor(), "presentation:<a | a^2>");
    }

    #[test]
    fn closed_form_lengths_match_bfs() {
        for d in ["z^2", "free:2", "lamplighter", "dihedral_inf", "cyclic:7", "z^3"] {
            let m = model(d);
            // walk a few deterministic words and compare
            let letters: Vec<Letter> = m.generators().letters().collect();
            let mut e = m.identity();
            for i in 0..40usize {
                e = m.apply(&e, letters[(i * 7 + i / 3) % letters.len()]);
                let closed = m.word_length(&e).unwrap();
                assert_eq!(m.bfs_word_length(&e, 7), (closed <= 7).then_some(closed), "{d} {e:?}");
            }
        }
    }

    #[test]
    fn spell_round_trips() {
        for d in ["z^2", "free:2", "lamplighter", "dihedral_inf", "cyclic:5"] {
            let m = model(d);
            let letters: Vec<Letter> = m.generators().letters().collect();
            let mut e = m.identity();
            for i in 0..30usize {
                e = m.apply(&e, letters[(i * 5 + 1) % letters.len()]);
                assert_eq!(m.evaluate_word(&m.spell(&e)).unwrap(), e, "{d}");
            }
        }
    }
}
