//! Exact arithmetic in the Higman-Thompson group V_d.
//!
//! An element is stored as a bijection between two complete prefix
//! antichains, canonically reduced: no block of d sibling domain cells maps
//! to the corresponding d sibling range cells. Canonical form makes group
//! equality structural.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::{Antichain, ClopenSet, EvPeriodicPoint, Word};

/// An element of V_d: the map sending `w·ξ` to `u·ξ` for every pair `(w, u)`
/// of the table and every infinite sequence ξ.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrefixMap {
    d: u8,
    /// sorted by domain word, canonically reduced
    pairs: Vec<(Word, Word)>,
}

/// The germ of an element at a point: the local prefix replacement rule on a
/// cylinder containing the base point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Germ {
    pub base: EvPeriodicPoint,
    pub domain_cell: Word,
    pub range_cell: Word,
}

impl PrefixMap {
    /// Validate and canonicalize a prefix-replacement table.
    pub fn new(d: u8, pairs: Vec<(Word, Word)>) -> Result<Self> {
        let (dom, ran): (Vec<Word>, Vec<Word>) = pairs.iter().cloned().unzip();
        let dom = Antichain::new(d, dom)?;
        let ran = Antichain::new(d, ran)?;
        if dom.len() != ran.len() {
            return Err(Error::SizeMismatch { domain: dom.len(), range: ran.len() });
        }
        if !dom.is_complete() {
            return Err(Error::IncompleteAntichain(format!("domain {:?}", dom.cells())));
        }
        if !ran.is_complete() {
            return Err(Error::IncompleteAntichain(format!("range {:?}", ran.cells())));
        }
        let mut pairs = pairs;
        pairs.sort();
        Ok(PrefixMap { d, pairs }.reduce())
    }

    pub fn identity(d: u8) -> Self {
        PrefixMap { d, pairs: vec![(Word::empty(d), Word::empty(d))] }
    }

    pub fn d(&self) -> u8 {
        self.d
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.len() == 1 && self.pairs[0].0 == self.pairs[0].1
    }

    pub fn domain(&self) -> Antichain {
        Antichain::new(self.d, self.pairs.iter().map(|(w, _)| w.clone()).collect())
            .expect("validated")
    }

    pub fn range(&self) -> Antichain {
        Antichain::new(self.d, self.pairs.iter().map(|(_, u)| u.clone()).collect())
            .expect("validated")
    }

    /// Merge sibling blocks greedily to a fixpoint. Internal; inputs are
    /// already valid tables.
    fn reduce(mut self) -> Self {
        let d = self.d as usize;
        loop {
            self.pairs.sort();
            let mut merged = false;
            let mut out: Vec<(Word, Word)> = Vec::with_capacity(self.pairs.len());
            let mut i = 0;
            while i < self.pairs.len() {
                let (w, u) = &self.pairs[i];
                let mergeable = !w.is_empty()
                    && !u.is_empty()
                    && w.letters().last() == Some(&0)
                    && u.letters().last() == Some(&0)
                    && i + d <= self.pairs.len()
                    && (0..d).all(|j| {
                        let (wj, uj) = &self.pairs[i + j];
                        wj.len() == w.len()
                            && uj.len() == u.len()
                            && wj.letters()[..w.len() - 1] == w.letters()[..w.len() - 1]
                            && uj.letters()[..u.len() - 1] == u.letters()[..u.len() - 1]
                            && *wj.letters().last().unwrap() == j as u8
                            && *uj.letters().last().unwrap() == j as u8
                    });
                if mergeable {
                    let pw = Word::new(self.d, w.letters()[..w.len() - 1].to_vec()).unwrap();
                    let pu = Word::new(self.d, u.letters()[..u.len() - 1].to_vec()).unwrap();
                    out.push((pw, pu));
                    merged = true;
                    i += d;
                } else {
                    out.push(self.pairs[i].clone());
                    i += 1;
                }
            }
            self.pairs = out;
            if !merged {
                self.pairs.sort();
                return self;
            }
        }
    }

    /// The map `x ↦ self(other(x))`.
    pub fn compose(&self, other: &PrefixMap) -> Result<PrefixMap> {
        if self.d != other.d {
            return Err(Error::AlphabetMismatch { left: self.d, right: other.d });
        }
        let mut pairs = Vec::new();
        for (w, u) in &other.pairs {
            // match the intermediate word u against self's domain
            if let Some((a, b)) = self.pairs.iter().find(|(a, _)| a.is_prefix_of(u)) {
                pairs.push((w.clone(), b.concat(u.suffix(a.len()))));
            } else {
                for (a, b) in &self.pairs {
                    if u.is_strict_prefix_of(a) {
                        pairs.push((w.concat(a.suffix(u.len())), b.clone()));
                    }
                }
            }
        }
        pairs.sort();
        Ok(PrefixMap { d: self.d, pairs }.reduce())
    }

    pub fn invert(&self) -> PrefixMap {
        let mut pairs: Vec<(Word, Word)> =
            self.pairs.iter().map(|(w, u)| (u.clone(), w.clone())).collect();
        pairs.sort();
        PrefixMap { d: self.d, pairs }.reduce()
    }

    pub fn power(&self, n: u32) -> Result<PrefixMap> {
        let mut acc = PrefixMap::identity(self.d);
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Exact image of an eventually periodic point.
    pub fn evaluate_point(&self, x: &EvPeriodicPoint) -> Result<EvPeriodicPoint> {
        if self.d != x.d() {
            return Err(Error::AlphabetMismatch { left: self.d, right: x.d() });
        }
        let (w, u) = self
            .pairs
            .iter()
            .find(|(w, _)| x.starts_with(w))
            .expect("complete domain antichain covers every point");
        x.shift(w.len()).prepend(u)
    }

    /// Exact image of a clopen set.
    pub fn evaluate_clopen(&self, c: &ClopenSet) -> Result<ClopenSet> {
        if self.d != c.d() {
            return Err(Error::AlphabetMismatch { left: self.d, right: c.d() });
        }
        let mut cells = Vec::new();
        for v in c.cells() {
            for (w, u) in &self.pairs {
                if w.is_prefix_of(v) {
                    cells.push(u.concat(v.suffix(w.len())));
                } else if v.is_strict_prefix_of(w) {
                    cells.push(u.clone());
                }
            }
        }
        Ok(ClopenSet::from_cells(self.d, cells))
    }

    /// The interior of the fixed-point set: the union of table cells with
    /// `w = u`. A canonical pair with `w ≠ u` contributes no interior fixed
    /// cylinder: if the cells are disjoint there are no fixed points at all,
    /// and if one word is a strict prefix of the other the unique fixed
    /// point in the cell is an isolated hyperbolic point.
    pub fn fixed_interior(&self) -> ClopenSet {
        let cells = self
            .pairs
            .iter()
            .filter(|(w, u)| w == u)
            .map(|(w, _)| w.clone())
            .collect();
        ClopenSet::from_cells(self.d, cells)
    }

    /// Support: the complement of the interior of the fixed-point set.
    pub fn support(&self) -> ClopenSet {
        self.fixed_interior().complement()
    }

    /// The local rule of `self` at ξ.
    pub fn germ_at(&self, x: &EvPeriodicPoint) -> Result<Germ> {
        if self.d != x.d() {
            return Err(Error::AlphabetMismatch { left: self.d, right: x.d() });
        }
        let (w, u) = self
            .pairs
            .iter()
            .find(|(w, _)| x.starts_with(w))
            .expect("complete domain antichain covers every point");
        Ok(Germ { base: x.clone(), domain_cell: w.clone(), range_cell: u.clone() })
    }

    /// True iff `self` and `other` have the same germ at ξ: the quotient
    /// `self ∘ other⁻¹` fixes a neighbourhood of `other(ξ)` pointwise.
    pub fn germ_equal(&self, other: &PrefixMap, x: &EvPeriodicPoint) -> Result<bool> {
        let q = self.compose(&other.invert())?;
        let moved = other.evaluate_point(x)?;
        q.fixed_interior().contains_point(&moved)
    }

    /// Extend a partial prefix bijection to a full element. The complements
    /// of the partial domain and range are padded to equal sizes and matched
    /// in lexicographic order.
    pub fn complete_partial(d: u8, partial: Vec<(Word, Word)>) -> Result<PrefixMap> {
        let (dom, ran): (Vec<Word>, Vec<Word>) = partial.iter().cloned().unzip();
        // antichain checks double as injectivity/overlap checks
        let dom = Antichain::new(d, dom)?;
        let ran = Antichain::new(d, ran)?;
        if dom.len() != ran.len() {
            return Err(Error::SizeMismatch { domain: dom.len(), range: ran.len() });
        }
        let dom_rest = ClopenSet::from_cells(d, dom.cells().to_vec()).complement();
        let ran_rest = ClopenSet::from_cells(d, ran.cells().to_vec()).complement();
        if dom_rest.is_empty() != ran_rest.is_empty() {
            return Err(Error::CompletionImpossible(
                "one side is already complete but the other is not".into(),
            ));
        }
        let target = dom_rest.cells().len().max(ran_rest.cells().len());
        let dom_pad = dom_rest.as_antichain().pad(target).map_err(|e| {
            Error::CompletionImpossible(format!("domain complement: {e}"))
        })?;
        let ran_pad = ran_rest.as_antichain().pad(target).map_err(|e| {
            Error::CompletionImpossible(format!("range complement: {e}"))
        })?;
        let mut pairs = partial;
        pairs.extend(
            dom_pad
                .cells()
                .iter()
                .cloned()
                .zip(ran_pad.cells().iter().cloned()),
        );
        PrefixMap::new(d, pairs)
    }
}

impl fmt::Debug for PrefixMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (w, u)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}→{u}")?;
        }
        write!(f, "}}")
    }
}

/// Wire format: `{ "d": 2, "pairs": [["0","11"],["10","0"],["11","10"]] }`,
/// always emitted in canonical form.
#[derive(Serialize, Deserialize)]
pub struct PrefixMapJson {
    pub d: u8,
    pub pairs: Vec<(String, String)>,
}

impl From<&PrefixMap> for PrefixMapJson {
    fn from(g: &PrefixMap) -> Self {
        PrefixMapJson {
            d: g.d(),
            pairs: g
                .pairs()
                .iter()
                .map(|(w, u)| (w.to_string(), u.to_string()))
                .collect(),
        }
    }
}

impl PrefixMapJson {
    pub fn build(&self) -> Result<PrefixMap> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (i, (w, u)) in self.pairs.iter().enumerate() {
            let w = Word::parse(self.d, w).map_err(|e| Error::Schema {
                path: format!("pairs[{i}][0]"),
                message: e.to_string(),
            })?;
            let u = Word::parse(self.d, u).map_err(|e| Error::Schema {
                path: format!("pairs[{i}][1]"),
                message: e.to_string(),
            })?;
            pairs.push((w, u));
        }
        PrefixMap::new(self.d, pairs)
    }
}

/// A small generating set of V_d used by the randomized audits: a rotation
/// of the top-level cylinders, a swap of the first two, and a contraction
/// with a hyperbolic fixed point at 0^∞ (plus its inverse at call sites).
pub fn standard_generators(d: u8) -> Vec<PrefixMap> {
    let top: Vec<Word> = (0..d).map(|i| Word::new(d, vec![i]).unwrap()).collect();

    let mut rot_pairs = Vec::new();
    for i in 0..d {
        rot_pairs.push((top[i as usize].clone(), top[((i + 1) % d) as usize].clone()));
    }
    let rot = PrefixMap::new(d, rot_pairs).unwrap();

    let mut swap_pairs = vec![(top[0].clone(), top[1].clone()), (top[1].clone(), top[0].clone())];
    for i in 2..d {
        swap_pairs.push((top[i as usize].clone(), top[i as usize].clone()));
    }
    let swap = PrefixMap::new(d, swap_pairs).unwrap();

    // domain {00,..,0(d-1), 1,..,d-1}  ->  range {0, 10,..,1(d-1), 2,..,d-1}
    let mut dom: Vec<Word> = (0..d).map(|j| Word::new(d, vec![0, j]).unwrap()).collect();
    dom.extend(top[1..].iter().cloned());
    let mut ran = vec![top[0].clone()];
    ran.extend((0..d).map(|j| Word::new(d, vec![1, j]).unwrap()));
    ran.extend(top[2..].iter().cloned());
    dom.sort();
    ran.sort();
    let contract = PrefixMap::new(d, dom.into_iter().zip(ran).collect()).unwrap();

    vec![rot, swap, contract.clone(), contract.invert()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(d: u8, s: &str) -> Word {
        Word::parse(d, s).unwrap()
    }

    fn elem(d: u8, pairs: &[(&str, &str)]) -> PrefixMap {
        PrefixMap::new(
            d,
            pairs
                .iter()
                .map(|(a, b)| (w(d, a), w(d, b)))
                .collect(),
        )
        .unwrap()
    }

    fn pt(d: u8, s: &str) -> EvPeriodicPoint {
        EvPeriodicPoint::parse(d, s).unwrap()
    }

    #[test]
    fn make_element_validation() {
        let swap = elem(2, &[("0", "1"), ("1", "0")]);
        assert_eq!(swap.pairs().len(), 2);

        let bad = PrefixMap::new(2, vec![(w(2, "0"), w(2, "0")), (w(2, "01"), w(2, "1"))]);
        assert!(bad.is_err());
        let mismatch = PrefixMap::new(
            2,
            vec![
                (w(2, "0"), w(2, "0")),
                (w(2, "10"), w(2, "10")),
                (w(2, "11"), w(2, "1")),
            ],
        );
        assert!(mismatch.is_err());
    }

    #[test]
    fn compose_and_invert() {
        let swap = elem(2, &[("0", "1"), ("1", "0")]);
        assert!(swap.compose(&swap).unwrap().is_identity());

        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        assert!(a.compose(&a.invert()).unwrap().is_identity());
        assert!(a.invert().invert() == a);

        let aa = a.compose(&a).unwrap();
        let expected = elem(2, &[("0", "000"), ("10", "001"), ("110", "01"), ("111", "1")]);
        assert_eq!(aa, expected);
    }

    #[test]
    fn compose_matches_pointwise_evaluation() {
        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        let b = elem(2, &[("0", "1"), ("1", "0")]);
        let ab = a.compose(&b).unwrap();
        for s in ["(0)", "(1)", "1(0)", "01(10)", "(01)", "110(1)", "00(011)"] {
            let x = pt(2, s);
            assert_eq!(
                ab.evaluate_point(&x).unwrap(),
                a.evaluate_point(&b.evaluate_point(&x).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn evaluate_examples() {
        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        assert_eq!(a.evaluate_point(&pt(2, "(0)")).unwrap(), pt(2, "(0)"));
        assert_eq!(a.evaluate_point(&pt(2, "1(0)")).unwrap(), pt(2, "01(0)"));
        let c0 = ClopenSet::from_cells(2, vec![w(2, "0")]);
        let c00 = ClopenSet::from_cells(2, vec![w(2, "00")]);
        assert_eq!(a.evaluate_clopen(&c0).unwrap(), c00);
    }

    #[test]
    fn fixed_interior_cases() {
        assert!(PrefixMap::identity(2).fixed_interior().is_full());
        let swap = elem(2, &[("0", "1"), ("1", "0")]);
        assert!(swap.fixed_interior().is_empty());
        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        assert!(a.fixed_interior().is_empty());
        let half = elem(2, &[("0", "0"), ("10", "11"), ("11", "10")]);
        assert_eq!(
            half.fixed_interior(),
            ClopenSet::from_cells(2, vec![w(2, "0")])
        );
    }

    #[test]
    fn fixed_interior_is_pointwise_fixed() {
        // every depth-6 cylinder inside the fixed interior maps to itself
        let g = elem(2, &[("00", "00"), ("01", "10"), ("10", "01"), ("11", "11")]);
        let fix = g.fixed_interior();
        for cell in fix.cells() {
            let mut stack = vec![cell.clone()];
            while let Some(v) = stack.pop() {
                if v.len() >= 6 {
                    let c = ClopenSet::from_cells(2, vec![v.clone()]);
                    assert_eq!(g.evaluate_clopen(&c).unwrap(), c);
                } else {
                    for l in 0..2 {
                        stack.push(v.child(l));
                    }
                }
            }
        }
    }

    #[test]
    fn germ_examples() {
        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        let zeros = pt(2, "(0)");
        assert!(a.germ_equal(&a, &zeros).unwrap());
        assert!(!a.germ_equal(&PrefixMap::identity(2), &zeros).unwrap());

        // two elements sharing the rule 0 -> 0 but differing on C_1
        let g = elem(2, &[("0", "0"), ("10", "11"), ("11", "10")]);
        let h = elem(2, &[("0", "0"), ("1", "1")]);
        assert!(g.germ_equal(&h, &zeros).unwrap());
    }

    #[test]
    fn complete_partial_examples() {
        let g = PrefixMap::complete_partial(2, vec![(w(2, "0"), w(2, "11"))]).unwrap();
        let expected = elem(2, &[("0", "11"), ("10", "0"), ("11", "10")]);
        assert_eq!(g, expected);

        assert!(PrefixMap::complete_partial(2, vec![]).unwrap().is_identity());

        let h = PrefixMap::complete_partial(2, vec![(w(2, "0"), w(2, "000"))]).unwrap();
        // extension property and validity
        assert_eq!(
            h.evaluate_clopen(&ClopenSet::from_cells(2, vec![w(2, "0")])).unwrap(),
            ClopenSet::from_cells(2, vec![w(2, "000")])
        );
    }

    #[test]
    fn reduction_idempotent() {
        let unreduced = PrefixMap::new(
            2,
            vec![
                (w(2, "00"), w(2, "10")),
                (w(2, "01"), w(2, "11")),
                (w(2, "1"), w(2, "0")),
            ],
        )
        .unwrap();
        assert_eq!(unreduced, elem(2, &[("0", "1"), ("1", "0")]));
        let id = PrefixMap::identity(2);
        assert_eq!(unreduced.compose(&id).unwrap(), unreduced);
    }

    #[test]
    fn generators_sane() {
        for d in [2u8, 3] {
            for g in standard_generators(d) {
                assert!(g.compose(&g.invert()).unwrap().is_identity());
            }
        }
    }
}
