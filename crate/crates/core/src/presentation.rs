//! Generators, words and finite presentations.
//!
//! A [`Letter`] is a signed generator index: generator `g` is stored as
//! `g + 1`, its formal inverse as `-(g + 1)`. Letters are ordered
//! `a < a^-1 < b < b^-1 < ...`; this is the order used for breadth-first
//! tie-breaking, lexicographic enumeration and shortlex rewriting.
//!
//! Text grammar for presentations:
//!
//! ```text
//! presentation := "<" gens ( "|" relators )? ">"
//! gens         := ident ( "," ident )*
//! relators     := ( word ( "," word )* )?
//! word         := factor+
//! factor       := name ( "^" integer )?
//! ```
//!
//! Whitespace is insignificant between tokens. Relators are separated by
//! commas. Inside a word, generator names are matched longest-first, so over
//! `<a,b>` the text `abab^-1` reads as `a b a b^-1`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        let v = generator as i32 + 1;
        Letter(if inverse { -v } else { v })
    }

    /// Builds a letter from its signed encoding; `None` for zero.
    pub fn from_signed(v: i32) -> Option<Self> {
        (v != 0).then_some(Letter(v))
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the fixed letter order `a, a^-1, b, b^-1, ...`.
    pub fn rank(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A word over signed generators. Words are not implicitly reduced;
/// call [`Word::free_reduce`] where a reduced carrier is required.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Formal inverse: reversed order, every letter inverted.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Free reduction followed by cancelling matching ends.
    pub fn cyclic_reduce(&self) -> Word {
        let w = self.free_reduce().0;
        let (mut i, mut j) = (0, w.len());
        while j >= i + 2 && w[i] == w[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        Word(w[i..j].to_vec())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && (self.0.len() < 2 || self.0[0] != self.0[self.0.len() - 1].inverse())
    }

    pub fn rotate(&self, k: usize) -> Word {
        let n = self.0.len();
        if n == 0 {
            return Word::empty();
        }
        let k = k % n;
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }

    /// All rotations of the word and of its inverse, deduplicated and sorted.
    pub fn cyclic_conjugates(&self) -> Result<BTreeSet<Word>> {
        if self.is_empty() {
            return Err(Error::EmptyWord);
        }
        let inv = self.inverse();
        let n = self.len();
        Ok((0..n)
            .flat_map(|k| [self.rotate(k), inv.rotate(k)])
            .collect())
    }
}

impl Ord for Word {
    /// Shortlex: shorter first, then lexicographic in the letter order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

pub fn free_reduce(w: &Word) -> Word {
    w.free_reduce()
}

pub fn cyclic_conjugates(r: &Word) -> Result<BTreeSet<Word>> {
    r.cyclic_conjugates()
}

/// Ordered, distinct generator names.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyGeneratorSet);
        }
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(Error::InvalidParameter(format!("bad generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidParameter(format!("duplicate generator {n:?}")));
            }
        }
        Ok(GeneratorSet { names })
    }

    /// Default names `a, b, c, ...` (then `x26, x27, ...`).
    pub fn standard(k: usize) -> Result<Self> {
        GeneratorSet::new((0..k).map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Every signed letter, in the fixed order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len()).flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
    }

    pub fn render_letter(&self, l: Letter) -> String {
        let name = &self.names[l.generator()];
        if l.is_inverse() {
            format!("{name}^-1")
        } else {
            name.clone()
        }
    }

    /// Space-separated rendering with runs collapsed to powers.
    pub fn render_word(&self, w: &Word) -> String {
        let mut parts = Vec::new();
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut j = i;
            while j < letters.len() && letters[j] == l {
                j += 1;
            }
            let k = (j - i) as i64;
            let name = &self.names[l.generator()];
            let exp = if l.is_inverse() { -k } else { k };
            parts.push(if exp == 1 {
                name.clone()
            } else {
                format!("{name}^{exp}")
            });
            i = j;
        }
        parts.join(" ")
    }

    /// Compact rendering: letters concatenated when every name is a single
    /// character, otherwise space separated. Identity renders as `1`.
    pub fn render_compact(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let sep = if self.names.iter().all(|n| n.chars().count() == 1) {
            ""
        } else {
            " "
        };
        w.letters()
            .iter()
            .map(|&l| self.render_letter(l))
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut p = Parser::new(text);
        p.skip_ws();
        let w = p.word_opt(self)?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.error("end of word"));
        }
        Ok(w)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// A finite presentation with freely and cyclically reduced relators.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Presentation {
    generators: GeneratorSet,
    relators: Vec<Word>,
}

impl Presentation {
    /// Relators are cyclically reduced; relators that reduce to the empty
    /// word are dropped.
    pub fn new(generators: GeneratorSet, relators: Vec<Word>) -> Result<Self> {
        let mut out = Vec::new();
        for r in relators {
            if let Some(g) = r.max_generator() {
                if g >= generators.len() {
                    return Err(Error::UnknownGenerator(g));
                }
            }
            let r = r.cyclic_reduce();
            if !r.is_empty() {
                out.push(r);
            }
        }
        Ok(Presentation {
            generators,
            relators: out,
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Longest relator length.
    pub fn max_relator_length(&self) -> Result<usize> {
        self.relators
            .iter()
            .map(Word::len)
            .max()
            .ok_or(Error::NoRelators)
    }

    pub fn render(&self) -> String {
        let rels: Vec<String> = self
            .relators
            .iter()
            .map(|r| self.generators.render_word(r))
            .collect();
        format!("<{} | {}>", self.generators.names.join(","), rels.join(", "))
    }
}

pub fn max_relator_length(p: &Presentation) -> Result<usize> {
    p.max_relator_length()
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut p = Parser::new(text);
    p.skip_ws();
    p.expect('<')?;
    let mut names = Vec::new();
    loop {
        p.skip_ws();
        if names.is_empty() && matches!(p.peek(), Some('|') | Some('>')) {
            return Err(Error::EmptyGeneratorSet);
        }
        names.push(p.identifier()?);
        p.skip_ws();
        match p.peek() {
            Some(',') => p.bump(),
            Some('|') | Some('>') => break,
            _ => return Err(p.error("',' or '|' or '>'")),
        }
    }
    let generators = GeneratorSet::new(names.clone()).map_err(|e| match e {
        Error::InvalidParameter(_) => Error::Syntax {
            position: 0,
            expected: "distinct generator names".into(),
        },
        e => e,
    })?;
    let mut relators = Vec::new();
    if p.peek() == Some('|') {
        p.bump();
        p.skip_ws();
        if p.peek() != Some('>') {
            loop {
                p.skip_ws();
                let w = p.word_opt(&generators)?;
                if w.is_empty() && p.peek() != Some('1') {
                    return Err(p.error("relator word"));
                }
                if p.peek() == Some('1') {
                    p.bump();
                }
                relators.push(w);
                p.skip_ws();
                match p.peek() {
                    Some(',') => p.bump(),
                    Some('>') => break,
                    _ => return Err(p.error("',' or '>'")),
                }
            }
        }
    }
    p.expect('>')?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("end of input"));
    }
    Presentation::new(generators, relators)
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            expected: expected.to_string(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn identifier(&mut self) -> Result<String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => self.bump(),
            _ => return Err(self.error("identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            self.bump();
        }
        Ok(self.text[start..self.pos].to_string())
    }

    /// Parses a possibly empty sequence of factors.
    fn word_opt(&mut self, gens: &GeneratorSet) -> Result<Word> {
        let mut letters = Vec::new();
        loop {
            self.skip_ws();
            let rest = self.rest();
            let found = gens
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            let Some((g, name)) = found else {
                if matches!(self.peek(), Some(c) if c.is_alphabetic() || c == '_') {
                    return Err(self.error("declared generator"));
                }
                break;
            };
            self.pos += name.len();
            let mut exp: i64 = 1;
            self.skip_ws();
            if self.peek() == Some('^') {
                self.bump();
                self.skip_ws();
                exp = self.integer()?;
                if exp == 0 {
                    return Err(self.error("nonzero exponent"));
                }
            }
            let l = Letter::new(g, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                letters.push(l);
            }
        }
        Ok(Word(letters))
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.bump();
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == digits_start {
            return Err(self.error("integer exponent"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| Error::Syntax {
                position: start,
                expected: "integer exponent".into(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> GeneratorSet {
        GeneratorSet::standard(2).unwrap()
    }

    #[test]
    fn parses_commutator_presentation() {
        let p = parse_presentation("<a,b | a b a^-1 b^-1>").unwrap();
        assert_eq!(p.generators().len(), 2);
        assert_eq!(p.relators().len(), 1);
        assert_eq!(p.relators()[0].len(), 4);
    }

    #[test]
    fn parses_powers_and_concatenation() {
        let p = parse_presentation("<a | a^2>").unwrap();
        assert_eq!(p.relators()[0], ab().parse_word("a a").unwrap());
        let q = parse_presentation("<a,b | a^3, b^2, abababababababab^-1a^-1a^0>");
        assert!(matches!(q, Err(Error::Syntax { .. })));
        let q = parse_presentation("<a,b | a^3, b^2, ab ab ab ab ab ab ab>").unwrap();
        assert_eq!(q.max_relator_length().unwrap(), 14);
        let conc = parse_presentation("<a,b | abab^-1>").unwrap();
        assert_eq!(conc.relators()[0].len(), 4);
    }

    #[test]
    fn missing_close_is_syntax_error_at_end() {
        let text = "<a,b | a b a^-1";
        match parse_presentation(text) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, text.len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_generator_set_rejected() {
        assert_eq!(parse_presentation("< | a>"), Err(Error::EmptyGeneratorSet));
        assert!(matches!(parse_presentation("<a | c>"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn relators_are_cyclically_reduced() {
        let p = parse_presentation("<a,b | b a b^-1 b a^-1 b^-1 a a>").unwrap();
        // free reduction leaves b b^-1 a a, then a a
        let r = &p.relators()[0];
        assert!(r.is_cyclically_reduced());
        assert_eq!(r, &ab().parse_word("a a").unwrap());
        let free = parse_presentation("<a,b | >").unwrap();
        assert_eq!(free.max_relator_length(), Err(Error::NoRelators));
    }

    #[test]
    fn free_reduce_examples() {
        let g = ab();
        assert!(g.parse_word("a a^-1").unwrap().free_reduce().is_empty());
        assert_eq!(
            g.parse_word("a b b^-1 a").unwrap().free_reduce(),
            g.parse_word("a a").unwrap()
        );
    }

    #[test]
    fn cyclic_conjugate_examples() {
        let g = ab();
        let set = g.parse_word("a b").unwrap().cyclic_conjugates().unwrap();
        let expect: BTreeSet<Word> = ["a b", "b a", "b^-1 a^-1", "a^-1 b^-1"]
            .iter()
            .map(|s| g.parse_word(s).unwrap())
            .collect();
        assert_eq!(set, expect);
        assert_eq!(g.parse_word("a a").unwrap().cyclic_conjugates().unwrap().len(), 2);
        assert_eq!(Word::empty().cyclic_conjugates(), Err(Error::EmptyWord));
    }

    #[test]
    fn commutator_has_eight_conjugates() {
        // Independent enumeration: rotate the string form of both orientations.
        let w = "abAB";
        let inv: String = w
            .chars()
            .rev()
            .map(|c| if c.is_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() })
            .collect();
        let mut strs = BTreeSet::new();
        for s in [w.to_string(), inv] {
            for k in 0..s.len() {
                strs.insert(format!("{}{}", &s[k..], &s[..k]));
            }
        }
        let g = ab();
        let r = g.parse_word("a b a^-1 b^-1").unwrap();
        assert_eq!(r.cyclic_conjugates().unwrap().len(), strs.len());
        assert_eq!(strs.len(), 8);
    }

    #[test]
    fn render_round_trip() {
        let text = "<x,y,zz | x^3, y y, x y zz^-2 x^-1>";
        let p = parse_presentation(text).unwrap();
        let again = parse_presentation(&p.render()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn letter_order() {
        let a = Letter::new(0, false);
        let ai = Letter::new(0, true);
        let b = Letter::new(1, false);
        assert!(a < ai && ai < b);
        assert_eq!(ai.inverse(), a);
    }
}
