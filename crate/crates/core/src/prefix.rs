//! Words, cylinders, antichains, clopen sets and eventually periodic points
//! of the d-ary Cantor space of one-sided sequences.
//!
//! Every value carries its alphabet size `d`; binary operations check it.
//! All values are immutable and all operations are pure.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite word over the alphabet `{0, .., d-1}`. The empty word denotes
/// the cylinder equal to the whole space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    d: u8,
    letters: Vec<u8>,
}

impl Word {
    pub fn new(d: u8, letters: Vec<u8>) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadAlphabet(d));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l >= d) {
            return Err(Error::BadLetter { letter: bad, d });
        }
        Ok(Word { d, letters })
    }

    pub fn empty(d: u8) -> Self {
        Word { d, letters: Vec::new() }
    }

    pub fn parse(d: u8, s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Word::empty(d));
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let v = c.to_digit(10).ok_or_else(|| Error::Parse(format!("bad digit '{c}'")))? as u8;
            letters.push(v);
        }
        Word::new(d, letters)
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.letters.starts_with(&self.letters)
    }

    pub fn is_strict_prefix_of(&self, other: &Word) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// Prefix-comparable: one is a prefix of the other.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn child(&self, letter: u8) -> Word {
        debug_assert!(letter < self.d);
        let mut letters = self.letters.clone();
        letters.push(letter);
        Word { d: self.d, letters }
    }

    pub fn concat(&self, suffix: &[u8]) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(suffix);
        Word { d: self.d, letters }
    }

    /// The suffix after dropping the first `k` letters.
    pub fn suffix(&self, k: usize) -> &[u8] {
        &self.letters[k..]
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "ε");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let digits: String = self.letters.iter().map(|l| char::from(b'0' + l)).collect();
        s.serialize_str(&digits)
    }
}

fn check_same_d(a: u8, b: u8) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch { left: a, right: b })
    }
}

/// A finite set of pairwise prefix-incomparable words over a fixed alphabet.
///
/// A *complete* antichain additionally covers every infinite sequence; any
/// complete antichain over alphabet size d has size ≡ 1 mod (d-1).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Antichain {
    d: u8,
    cells: Vec<Word>,
}

impl Antichain {
    pub fn new(d: u8, mut cells: Vec<Word>) -> Result<Self> {
        for c in &cells {
            check_same_d(d, c.d())?;
        }
        cells.sort();
        for w in cells.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateCell(w[0].to_string()));
            }
            if w[0].is_prefix_of(&w[1]) {
                return Err(Error::NotAntichain {
                    shorter: w[0].to_string(),
                    longer: w[1].to_string(),
                });
            }
        }
        Ok(Antichain { d, cells })
    }

    pub fn full(d: u8) -> Self {
        Antichain { d, cells: vec![Word::empty(d)] }
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn cells(&self) -> &[Word] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Complete: the cells cover the whole space.
    pub fn is_complete(&self) -> bool {
        ClopenSet::from_cells(self.d, self.cells.clone()).is_full()
    }

    /// The coarsest complete antichain refining both inputs. Each output
    /// cell has a unique ancestor in `self` and in `other`.
    pub fn common_refinement(&self, other: &Antichain) -> Result<Antichain> {
        check_same_d(self.d, other.d)?;
        if !self.is_complete() {
            return Err(Error::IncompleteAntichain(format!("{:?}", self.cells)));
        }
        if !other.is_complete() {
            return Err(Error::IncompleteAntichain(format!("{:?}", other.cells)));
        }
        let mut out = Vec::new();
        let mut stack = vec![Word::empty(self.d)];
        while let Some(w) = stack.pop() {
            let in_a = self.cells.iter().any(|c| c.is_prefix_of(&w));
            let in_b = other.cells.iter().any(|c| c.is_prefix_of(&w));
            if in_a && in_b {
                out.push(w);
            } else {
                for l in (0..self.d).rev() {
                    stack.push(w.child(l));
                }
            }
        }
        Antichain::new(self.d, out)
    }

    /// Expand cells until exactly `target` cells remain, preserving the
    /// union. Succeeds iff `target ≡ |self| mod (d-1)` and `target ≥ |self|`.
    /// Expansion always splits the lexicographically greatest cell, which
    /// keeps the output deterministic.
    pub fn pad(&self, target: usize) -> Result<Antichain> {
        let step = (self.d - 1) as usize;
        if target < self.len() || (target - self.len()) % step != 0 {
            return Err(Error::PadCongruence {
                have: self.len(),
                want: target,
                modulus: step,
                residue: if target >= self.len() { (target - self.len()) % step } else { step },
            });
        }
        let mut cells = self.cells.clone();
        while cells.len() < target {
            let w = cells.pop().expect("non-empty: target > 0");
            for l in 0..self.d {
                cells.push(w.child(l));
            }
            cells.sort();
        }
        Antichain::new(self.d, cells)
    }
}

/// A clopen subset of the Cantor space, kept in canonical form: a sorted
/// antichain in which no d sibling cells are all present (such a block is
/// merged into its parent). Canonical form makes equality structural.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ClopenSet {
    d: u8,
    cells: Vec<Word>,
}

impl ClopenSet {
    /// Canonicalize an arbitrary collection of cylinders.
    pub fn from_cells(d: u8, cells: Vec<Word>) -> Self {
        let mut cells = cells;
        cells.sort();
        cells.dedup();
        // drop cells that already lie under another cell
        let mut kept: Vec<Word> = Vec::with_capacity(cells.len());
        for c in cells {
            if !kept.iter().any(|k| k.is_prefix_of(&c)) {
                kept.push(c);
            }
        }
        // merge full sibling blocks to a fixpoint
        loop {
            let mut merged = false;
            let mut out: Vec<Word> = Vec::with_capacity(kept.len());
            let mut i = 0;
            while i < kept.len() {
                let w = &kept[i];
                let dn = d as usize;
                let mergeable = !w.is_empty()
                    && w.letters().last() == Some(&0)
                    && i + dn <= kept.len()
                    && (0..dn).all(|j| {
                        let s = &kept[i + j];
                        s.len() == w.len()
                            && s.letters()[..w.len() - 1] == w.letters()[..w.len() - 1]
                            && *s.letters().last().unwrap() == j as u8
                    });
                if mergeable {
                    let parent = Word {
                        d,
                        letters: w.letters()[..w.len() - 1].to_vec(),
                    };
                    out.push(parent);
                    merged = true;
                    i += dn;
                } else {
                    out.push(w.clone());
                    i += 1;
                }
            }
            out.sort();
            kept = out;
            if !merged {
                break;
            }
        }
        ClopenSet { d, cells: kept }
    }

    pub fn empty(d: u8) -> Self {
        ClopenSet { d, cells: Vec::new() }
    }

    pub fn full(d: u8) -> Self {
        ClopenSet { d, cells: vec![Word::empty(d)] }
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn cells(&self) -> &[Word] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.cells.len() == 1 && self.cells[0].is_empty()
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet> {
        check_same_d(self.d, other.d)?;
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        Ok(ClopenSet::from_cells(self.d, cells))
    }

    pub fn intersect(&self, other: &ClopenSet) -> Result<ClopenSet> {
        check_same_d(self.d, other.d)?;
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if a.is_prefix_of(b) {
                    cells.push(b.clone());
                } else if b.is_prefix_of(a) {
                    cells.push(a.clone());
                }
            }
        }
        Ok(ClopenSet::from_cells(self.d, cells))
    }

    pub fn complement(&self) -> ClopenSet {
        let mut cells = Vec::new();
        let mut stack = vec![Word::empty(self.d)];
        while let Some(w) = stack.pop() {
            if self.cells.iter().any(|c| c.is_prefix_of(&w)) {
                continue;
            }
            if !self.cells.iter().any(|c| w.is_strict_prefix_of(c)) {
                cells.push(w);
            } else {
                for l in (0..self.d).rev() {
                    stack.push(w.child(l));
                }
            }
        }
        ClopenSet::from_cells(self.d, cells)
    }

    pub fn set_equals(&self, other: &ClopenSet) -> Result<bool> {
        check_same_d(self.d, other.d)?;
        Ok(self == other)
    }

    pub fn subset_of(&self, other: &ClopenSet) -> Result<bool> {
        Ok(&self.intersect(other)? == self)
    }

    /// True iff some cell of the set is a prefix of the sequence.
    pub fn contains_point(&self, p: &EvPeriodicPoint) -> Result<bool> {
        check_same_d(self.d, p.d())?;
        Ok(self.cells.iter().any(|c| p.starts_with(c)))
    }

    /// View the cells as an antichain (canonical cells always form one).
    pub fn as_antichain(&self) -> Antichain {
        Antichain { d: self.d, cells: self.cells.clone() }
    }
}

/// An eventually periodic one-sided sequence `preperiod · period · period · …`,
/// in canonical form: the period is primitive and the preperiod is shortest.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvPeriodicPoint {
    preperiod: Word,
    period: Word,
}

impl EvPeriodicPoint {
    pub fn new(preperiod: Word, period: Word) -> Result<Self> {
        check_same_d(preperiod.d(), period.d())?;
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        let d = preperiod.d();
        let mut pre = preperiod.letters().to_vec();
        let mut per = period.letters().to_vec();
        // primitive period
        let n = per.len();
        for p in 1..n {
            if n % p == 0 && (p..n).all(|i| per[i] == per[i - p]) {
                per.truncate(p);
                break;
            }
        }
        // shortest preperiod: absorb trailing letters into a rotated period
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(EvPeriodicPoint {
            preperiod: Word { d, letters: pre },
            period: Word { d, letters: per },
        })
    }

    /// Parse the `"pre(per)"` form, e.g. `"1(0)"` for 10^∞.
    pub fn parse(d: u8, s: &str) -> Result<Self> {
        let (pre, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("point '{s}': expected pre(per)")))?;
        let per = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("point '{s}': missing ')'")))?;
        EvPeriodicPoint::new(Word::parse(d, pre)?, Word::parse(d, per)?)
    }

    /// The constant sequence `l^∞`.
    pub fn constant(d: u8, l: u8) -> Result<Self> {
        EvPeriodicPoint::new(Word::empty(d), Word::new(d, vec![l])?)
    }

    pub fn d(&self) -> u8 {
        self.preperiod.d()
    }

    pub fn preperiod(&self) -> &Word {
        &self.preperiod
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn letter_at(&self, i: usize) -> u8 {
        let p = self.preperiod.len();
        if i < p {
            self.preperiod.letters()[i]
        } else {
            self.period.letters()[(i - p) % self.period.len()]
        }
    }

    pub fn starts_with(&self, w: &Word) -> bool {
        w.letters().iter().enumerate().all(|(i, &l)| self.letter_at(i) == l)
    }

    /// Drop the first `k` letters.
    pub fn shift(&self, k: usize) -> EvPeriodicPoint {
        let p = self.preperiod.len();
        let d = self.d();
        if k <= p {
            EvPeriodicPoint::new(
                Word { d, letters: self.preperiod.letters()[k..].to_vec() },
                self.period.clone(),
            )
            .expect("period non-empty")
        } else {
            let mut per = self.period.letters().to_vec();
            let r = (k - p) % per.len();
            per.rotate_left(r);
            EvPeriodicPoint::new(Word::empty(d), Word { d, letters: per }).expect("period non-empty")
        }
    }

    /// Prepend a word.
    pub fn prepend(&self, w: &Word) -> Result<EvPeriodicPoint> {
        check_same_d(self.d(), w.d())?;
        let mut pre = w.letters().to_vec();
        pre.extend_from_slice(self.preperiod.letters());
        EvPeriodicPoint::new(Word { d: self.d(), letters: pre }, self.period.clone())
    }

    /// The word of the first `n` letters.
    pub fn prefix(&self, n: usize) -> Word {
        Word {
            d: self.d(),
            letters: (0..n).map(|i| self.letter_at(i)).collect(),
        }
    }
}

impl fmt::Debug for EvPeriodicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EvPeriodicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.preperiod.letters() {
            write!(f, "{l}")?;
        }
        write!(f, "(")?;
        for l in self.period.letters() {
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for EvPeriodicPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Serde glue for values whose alphabet size lives one level up in the JSON.
#[derive(Serialize, Deserialize)]
pub struct ClopenSetJson {
    pub d: u8,
    pub cells: Vec<String>,
}

impl From<&ClopenSet> for ClopenSetJson {
    fn from(c: &ClopenSet) -> Self {
        ClopenSetJson {
            d: c.d(),
            cells: c.cells().iter().map(|w| w.to_string()).collect(),
        }
    }
}

impl ClopenSetJson {
    pub fn build(&self) -> Result<ClopenSet> {
        let cells = self
            .cells
            .iter()
            .map(|s| Word::parse(self.d, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClopenSet::from_cells(self.d, cells))
    }
}

/// Total order comparing two points as infinite sequences (lexicographic).
pub fn point_cmp(a: &EvPeriodicPoint, b: &EvPeriodicPoint) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let bound = a.preperiod.len() + b.preperiod.len() + a.period.len() + b.period.len() + 1;
    for i in 0..bound {
        match a.letter_at(i).cmp(&b.letter_at(i)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
