//! Subshifts as Stone systems, return-time combinatorics, suspension-flow
//! charts, and dihedral (φ, σ) systems with leaf itineraries.
//!
//! A point of the suspension is written `[x, t]` with `x` a two-sided
//! sequence and `t` rational. Charts are pairs (clopen cylinder, open
//! interval); flow elements act chart-locally by exact PL maps in the time
//! coordinate. Infinite objects (languages, sequences, freeness) are only
//! ever examined through explicit depth bounds, and exhaustion is an error,
//! never a silent guess.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pl::{Domain, PLMap, Q};

/// Iteration bound when saturating a substitution language.
const SUBST_ITER_BOUND: usize = 64;
/// Length cap on iterated substitution words and point expansions.
const EXPANSION_CAP: usize = 1 << 20;
/// Default scan bound for smallest return times.
pub const RETURN_TIME_BOUND: usize = 64;

#[derive(Clone, Debug)]
pub enum Generator {
    /// non-erasing substitution rules letter -> word
    Substitution(BTreeMap<char, String>),
    /// all two-sided sequences avoiding the given factors
    Forbidden(Vec<String>),
}

/// A subshift presented by a substitution or a forbidden-factor list,
/// together with a memoized legal-word oracle. The shift acts by
/// `(φx)_k = x_{k+1}`.
pub struct StoneSystem {
    alphabet: Vec<char>,
    generator: Generator,
    minimal: bool,
    degenerate: bool,
    cache: Mutex<HashMap<usize, Arc<BTreeSet<String>>>>,
}

fn substitute(rules: &BTreeMap<char, String>, s: &str) -> Result<String> {
    let mut out = String::new();
    for c in s.chars() {
        out.push_str(
            rules
                .get(&c)
                .ok_or_else(|| Error::BadSubstitution(format!("no rule for letter {c:?}")))?,
        );
    }
    Ok(out)
}

fn factors_into(s: &[char], n: usize, acc: &mut BTreeSet<String>) {
    if s.len() >= n {
        for w in s.windows(n) {
            let word: String = w.iter().collect();
            acc.insert(word);
        }
    }
}

pub fn build_substitution_system(rules: BTreeMap<char, String>) -> Result<StoneSystem> {
    if rules.is_empty() {
        return Err(Error::BadSubstitution("empty alphabet".into()));
    }
    let alphabet: Vec<char> = rules.keys().copied().collect();
    for (c, image) in &rules {
        if image.is_empty() {
            return Err(Error::BadSubstitution(format!("erasing rule for letter {c:?}")));
        }
        for x in image.chars() {
            if !rules.contains_key(&x) {
                return Err(Error::BadSubstitution(format!(
                    "rule for {c:?} uses letter {x:?} outside the alphabet"
                )));
            }
        }
    }
    // primitivity of the incidence matrix via boolean powers
    let k = alphabet.len();
    let index: BTreeMap<char, usize> = alphabet.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut m = vec![vec![false; k]; k];
    for (c, image) in &rules {
        for x in image.chars() {
            m[index[c]][index[&x]] = true;
        }
    }
    let mut p = m.clone();
    let mut minimal = false;
    for _ in 0..k * k {
        if p.iter().all(|row| row.iter().all(|&b| b)) {
            minimal = true;
            break;
        }
        let mut next = vec![vec![false; k]; k];
        for i in 0..k {
            for j in 0..k {
                next[i][j] = (0..k).any(|l| p[i][l] && m[l][j]);
            }
        }
        p = next;
    }
    let degenerate = k == 1;
    Ok(StoneSystem {
        alphabet,
        generator: Generator::Substitution(rules),
        minimal: minimal || degenerate,
        degenerate,
        cache: Mutex::new(HashMap::new()),
    })
}

pub fn build_forbidden_system(alphabet: &str, forbidden: &[&str]) -> Result<StoneSystem> {
    let letters: Vec<char> = alphabet.chars().collect();
    if letters.is_empty() {
        return Err(Error::BadSubstitution("empty alphabet".into()));
    }
    let set: BTreeSet<char> = letters.iter().copied().collect();
    if set.len() != letters.len() {
        return Err(Error::BadSubstitution("repeated letter in alphabet".into()));
    }
    let mut words = Vec::new();
    for w in forbidden {
        if w.is_empty() {
            return Err(Error::BadSubstitution("empty forbidden word".into()));
        }
        for c in w.chars() {
            if !set.contains(&c) {
                return Err(Error::BadSubstitution(format!(
                    "forbidden word {w:?} uses letter {c:?} outside the alphabet"
                )));
            }
        }
        words.push(w.to_string());
    }
    Ok(StoneSystem {
        alphabet: letters,
        generator: Generator::Forbidden(words),
        // minimality is not decided for forbidden-factor presentations
        minimal: false,
        degenerate: false,
        cache: Mutex::new(HashMap::new()),
    })
}

impl StoneSystem {
    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal
    }

    /// single-letter substitution systems describe a one-point space
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// All legal words of length `n`, memoized.
    pub fn legal_words(&self, n: usize) -> Result<Arc<BTreeSet<String>>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&n) {
            return Ok(hit.clone());
        }
        let set = match &self.generator {
            Generator::Substitution(rules) => self.substitution_words(rules, n)?,
            Generator::Forbidden(words) => self.forbidden_words(words, n)?,
        };
        let set = Arc::new(set);
        self.cache.lock().unwrap().insert(n, set.clone());
        Ok(set)
    }

    fn substitution_words(&self, rules: &BTreeMap<char, String>, n: usize) -> Result<BTreeSet<String>> {
        if n == 0 {
            return Ok(std::iter::once(String::new()).collect());
        }
        let mut cur: BTreeMap<char, String> =
            self.alphabet.iter().map(|c| (*c, c.to_string())).collect();
        let mut acc = BTreeSet::new();
        for word in cur.values() {
            factors_into(&word.chars().collect::<Vec<_>>(), n, &mut acc);
        }
        let mut stable = 0usize;
        for _ in 0..SUBST_ITER_BOUND {
            let mut next = BTreeMap::new();
            let mut grew = false;
            for (c, word) in &cur {
                let image = substitute(rules, word)?;
                if image.len() > EXPANSION_CAP {
                    return Err(Error::SearchBound {
                        bound: EXPANSION_CAP,
                        context: format!("substitution word for {c:?} exceeds the length cap"),
                    });
                }
                if image.len() > word.len() {
                    grew = true;
                }
                next.insert(*c, image);
            }
            let before = acc.len();
            let mut long_enough = true;
            for word in next.values() {
                let chars: Vec<char> = word.chars().collect();
                if chars.len() < n {
                    long_enough = false;
                }
                factors_into(&chars, n, &mut acc);
            }
            if acc.len() == before && !grew {
                // the iteration reached a fixed point
                return Ok(acc);
            }
            if acc.len() == before && long_enough {
                stable += 1;
            } else {
                stable = 0;
            }
            cur = next;
            if stable >= 2 {
                return Ok(acc);
            }
        }
        Err(Error::SearchBound {
            bound: SUBST_ITER_BOUND,
            context: format!("substitution language did not stabilize at length {n}"),
        })
    }

    fn forbidden_words(&self, forbidden: &[String], n: usize) -> Result<BTreeSet<String>> {
        let ok_suffixes = |w: &str| !forbidden.iter().any(|f| w.ends_with(f.as_str()));
        let mut cur: BTreeSet<String> = std::iter::once(String::new()).collect();
        for _ in 0..n {
            let mut next = BTreeSet::new();
            for w in &cur {
                for c in &self.alphabet {
                    let mut e = w.clone();
                    e.push(*c);
                    if ok_suffixes(&e) {
                        next.insert(e);
                    }
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    pub fn is_legal(&self, w: &str) -> Result<bool> {
        let n = w.chars().count();
        if n == 0 {
            return Ok(true);
        }
        Ok(self.legal_words(n)?.contains(w))
    }

    /// Is there a legal word over the index window spanned by `constraints`
    /// matching every constrained position? Pruned left-to-right search.
    fn exists_legal_completion(&self, constraints: &BTreeMap<i64, char>) -> Result<bool> {
        let (&lo, _) = match constraints.iter().next() {
            Some(kv) => kv,
            None => return Ok(true),
        };
        let (&hi, _) = constraints.iter().next_back().unwrap();
        let span = (hi - lo + 1) as usize;
        if span > 96 {
            return Err(Error::SearchBound {
                bound: 96,
                context: format!("constraint window of span {span} is too wide"),
            });
        }
        let admissible = |prefix: &str| -> Result<bool> {
            match &self.generator {
                Generator::Forbidden(words) => {
                    Ok(!words.iter().any(|f| prefix.ends_with(f.as_str())))
                }
                Generator::Substitution(_) => self.is_legal(prefix),
            }
        };
        fn rec(
            sys: &StoneSystem,
            constraints: &BTreeMap<i64, char>,
            lo: i64,
            span: usize,
            prefix: &mut String,
            admissible: &dyn Fn(&str) -> Result<bool>,
        ) -> Result<bool> {
            if prefix.chars().count() == span {
                // for substitution systems every prefix was checked legal
                return Ok(true);
            }
            let pos = lo + prefix.chars().count() as i64;
            let options: Vec<char> = match constraints.get(&pos) {
                Some(c) => vec![*c],
                None => sys.alphabet.to_vec(),
            };
            for c in options {
                prefix.push(c);
                if admissible(prefix)? && rec(sys, constraints, lo, span, prefix, admissible)? {
                    prefix.pop();
                    return Ok(true);
                }
                prefix.pop();
            }
            Ok(false)
        }
        rec(self, constraints, lo, span, &mut String::new(), &admissible)
    }
}

/// The clopen set of sequences carrying `word` starting at index `position`.
/// The empty word is the whole space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderX {
    pub word: String,
    pub position: i64,
}

impl CylinderX {
    pub fn new(sys: &StoneSystem, word: &str, position: i64) -> Result<CylinderX> {
        if !sys.is_legal(word)? {
            return Err(Error::IllegalWord(word.to_string()));
        }
        Ok(CylinderX { word: word.to_string(), position })
    }

    pub fn full() -> CylinderX {
        CylinderX { word: String::new(), position: 0 }
    }

    pub fn len(&self) -> usize {
        self.word.chars().count()
    }

    pub fn is_full(&self) -> bool {
        self.word.is_empty()
    }

    fn constraints(&self) -> BTreeMap<i64, char> {
        self.word
            .chars()
            .enumerate()
            .map(|(i, c)| (self.position + i as i64, c))
            .collect()
    }
}

/// Merge two cylinder constraint maps; `None` when they conflict, which
/// means the cylinders are disjoint.
fn merge_constraints(
    a: &BTreeMap<i64, char>,
    b: &BTreeMap<i64, char>,
) -> Option<BTreeMap<i64, char>> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.insert(*k, *v) {
            Some(old) if old != *v => return None,
            _ => {}
        }
    }
    Some(out)
}

/// τ_C: the least n ≥ 1 with φⁿ(C) ∩ C ≠ ∅, found by scanning legal words
/// for two occurrences of the cylinder word at distance n.
pub fn smallest_return_time(sys: &StoneSystem, c: &CylinderX) -> Result<usize> {
    if c.is_full() {
        return Ok(1);
    }
    let w: Vec<char> = c.word.chars().collect();
    for n in 1..=RETURN_TIME_BOUND {
        for cand in sys.legal_words(n + w.len())?.iter() {
            let v: Vec<char> = cand.chars().collect();
            if v[..w.len()] == w[..] && v[n..n + w.len()] == w[..] {
                return Ok(n);
            }
        }
    }
    Err(Error::SearchBound {
        bound: RETURN_TIME_BOUND,
        context: format!("no return of [{}] found", c.word),
    })
}

/// Clopen partition of C into word extensions on which the first-return
/// time to C is constant, with its value.
///
/// An extension is decided once it shows a full second occurrence of the
/// cylinder word: any earlier return would be a full occurrence too, so the
/// first full occurrence is the first-return time of every point in the
/// cell. Sibling cells with equal times are merged back to the shortest
/// extension that still decides the time.
pub fn first_return_partition(
    sys: &StoneSystem,
    c: &CylinderX,
    bound: usize,
) -> Result<Vec<(CylinderX, usize)>> {
    if c.is_full() {
        return Ok(vec![(c.clone(), 1)]);
    }
    let w: Vec<char> = c.word.chars().collect();
    fn second_occurrence(e: &[char], w: &[char]) -> Option<usize> {
        (1..=e.len().saturating_sub(w.len()))
            .find(|&p| e[p..p + w.len()] == w[..])
    }
    fn rec(
        sys: &StoneSystem,
        w: &[char],
        e: &mut Vec<char>,
        bound: usize,
    ) -> Result<Vec<(String, usize)>> {
        if let Some(p) = second_occurrence(e, w) {
            return Ok(vec![(e.iter().collect(), p)]);
        }
        if e.len() >= w.len() + bound + w.len() {
            return Err(Error::SearchBound {
                bound,
                context: format!(
                    "first-return time of [{}] not decided within the bound",
                    w.iter().collect::<String>()
                ),
            });
        }
        let mut out: Vec<(String, usize)> = Vec::new();
        let mut child_times: Vec<usize> = Vec::new();
        let mut all_single = true;
        for c in sys.alphabet().to_vec() {
            e.push(c);
            let word: String = e.iter().collect();
            if sys.is_legal(&word)? {
                let sub = rec(sys, w, e, bound)?;
                if sub.len() == 1 && sub[0].0 == word {
                    child_times.push(sub[0].1);
                } else {
                    all_single = false;
                }
                out.extend(sub);
            }
            e.pop();
        }
        if out.is_empty() {
            return Err(Error::SearchBound {
                bound,
                context: format!("extension {:?} has no legal continuation", e.iter().collect::<String>()),
            });
        }
        // merge siblings that agree on the time
        if all_single && child_times.windows(2).all(|p| p[0] == p[1]) && out.len() == child_times.len() {
            return Ok(vec![(e.iter().collect(), child_times[0])]);
        }
        Ok(out)
    }
    let mut e = w.clone();
    let cells = rec(sys, &w, &mut e, bound)?;
    Ok(cells
        .into_iter()
        .map(|(word, t)| (CylinderX { word, position: c.position }, t))
        .collect())
}

/// A suspension chart: the box C × I, injected into the suspension.
#[derive(Clone, Debug)]
pub struct Chart {
    pub c: CylinderX,
    pub time: usize,
    pub i: (Q, Q),
}

/// Complementary charts of the closed chart over C × J, J = (a, b):
/// the leaf through a point of a first-return cell with time t leaves the
/// box at height b and re-enters it at height t + a, so the cell carries
/// the open interval (b, t + a), of length t − |J|.
pub fn chart_decomposition(
    sys: &StoneSystem,
    c: &CylinderX,
    j: (&Q, &Q),
    bound: usize,
) -> Result<Vec<Chart>> {
    let (a, b) = j;
    if a >= b {
        return Err(Error::InadmissibleChart(format!("empty interval ({a}, {b})")));
    }
    let len = b - a;
    let tau = smallest_return_time(sys, c)?;
    if len >= Q::one() || len >= Q::from_integer(BigInt::from(tau)) {
        return Err(Error::InadmissibleChart(format!(
            "|J| = {len} is not below min(1, τ = {tau})"
        )));
    }
    let cells = first_return_partition(sys, c, bound)?;
    Ok(cells
        .into_iter()
        .map(|(cell, t)| Chart {
            c: cell,
            time: t,
            i: (b.clone(), Q::from_integer(BigInt::from(t)) + a),
        })
        .collect())
}

/// A concretely evaluable two-sided sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwoSidedPoint {
    /// `right` repeated over indices ≥ 0, `left` repeated over indices < 0
    /// with its last letter at index −1
    Periodic { left: String, right: String },
    /// fixed point of the `power`-th iterate of `rules`, seeded by a letter
    /// pair: σ^p(left) ends in `left`, σ^p(right) starts with `right`
    Substitutive {
        rules: BTreeMap<char, String>,
        left: char,
        right: char,
        power: u32,
    },
}

impl TwoSidedPoint {
    pub fn periodic(left: &str, right: &str) -> Result<TwoSidedPoint> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::BadSubstitution("periodic point with an empty side".into()));
        }
        Ok(TwoSidedPoint::Periodic { left: left.to_string(), right: right.to_string() })
    }

    pub fn substitutive(
        rules: BTreeMap<char, String>,
        left: char,
        right: char,
        power: u32,
    ) -> Result<TwoSidedPoint> {
        if power == 0 {
            return Err(Error::BadSubstitution("power must be positive".into()));
        }
        let iterate = |c: char| -> Result<String> {
            let mut s = c.to_string();
            for _ in 0..power {
                s = substitute(&rules, &s)?;
            }
            Ok(s)
        };
        let l = iterate(left)?;
        if !l.ends_with(left) || l.chars().count() < 2 {
            return Err(Error::BadSubstitution(format!(
                "σ^{power}({left:?}) = {l:?} must properly end with {left:?}"
            )));
        }
        let r = iterate(right)?;
        if !r.starts_with(right) || r.chars().count() < 2 {
            return Err(Error::BadSubstitution(format!(
                "σ^{power}({right:?}) = {r:?} must properly start with {right:?}"
            )));
        }
        Ok(TwoSidedPoint::Substitutive { rules, left, right, power })
    }

    pub fn letter_at(&self, n: i64) -> Result<char> {
        match self {
            TwoSidedPoint::Periodic { left, right } => {
                if n >= 0 {
                    let r: Vec<char> = right.chars().collect();
                    Ok(r[(n as usize) % r.len()])
                } else {
                    let l: Vec<char> = left.chars().collect();
                    let k = (n.rem_euclid(l.len() as i64)) as usize;
                    Ok(l[k])
                }
            }
            TwoSidedPoint::Substitutive { rules, left, right, power } => {
                let expand = |seed: char| -> Result<String> {
                    let mut s = seed.to_string();
                    loop {
                        let need = n.unsigned_abs() as usize + 1;
                        if s.chars().count() >= need {
                            return Ok(s);
                        }
                        if s.len() > EXPANSION_CAP {
                            return Err(Error::BudgetExceeded {
                                depth: need,
                                context: "point expansion exceeds the length cap".into(),
                            });
                        }
                        let mut t = s.clone();
                        for _ in 0..*power {
                            t = substitute(rules, &t)?;
                        }
                        if t.len() == s.len() {
                            return Err(Error::BudgetExceeded {
                                depth: need,
                                context: "point expansion stopped growing".into(),
                            });
                        }
                        s = t;
                    }
                };
                if n >= 0 {
                    let s: Vec<char> = expand(*right)?.chars().collect();
                    Ok(s[n as usize])
                } else {
                    let s: Vec<char> = expand(*left)?.chars().collect();
                    Ok(s[s.len() - (-n) as usize])
                }
            }
        }
    }

    /// The factor x_lo … x_{hi−1}.
    pub fn window(&self, lo: i64, hi: i64) -> Result<String> {
        (lo..hi).map(|k| self.letter_at(k)).collect()
    }
}

/// (X, φ, σ) with σ acting by index reflection composed with a letter
/// involution: σ(x)_n = ι(x_{−n−1}). The dihedral relations σ² = Id and
/// σφσ = φ⁻¹ then hold at the index level; freeness of the action is
/// certified up to `free_depth` by the absence of legal ι-antipalindromes.
pub struct DInftySystem {
    pub base: StoneSystem,
    iota: BTreeMap<char, char>,
    free_depth: usize,
}

fn reflect_word(iota: &BTreeMap<char, char>, w: &str) -> String {
    w.chars().rev().map(|c| iota[&c]).collect()
}

fn is_antipalindrome(iota: &BTreeMap<char, char>, w: &[char]) -> bool {
    let l = w.len();
    (0..l).all(|i| w[i] == iota[&w[l - 1 - i]])
}

type Pattern = BTreeMap<i64, char>;

fn pattern_sigma(iota: &BTreeMap<char, char>, p: &Pattern) -> Pattern {
    p.iter().map(|(i, c)| (-i - 1, iota[c])).collect()
}

fn pattern_phi(p: &Pattern) -> Pattern {
    p.iter().map(|(i, c)| (i - 1, *c)).collect()
}

fn pattern_phi_inv(p: &Pattern) -> Pattern {
    p.iter().map(|(i, c)| (i + 1, *c)).collect()
}

pub fn build_dinfty(
    base: StoneSystem,
    iota: &BTreeMap<char, char>,
    depth: usize,
) -> Result<DInftySystem> {
    if depth < 2 {
        return Err(Error::SearchBound { bound: depth, context: "freeness check needs depth ≥ 2".into() });
    }
    for c in base.alphabet() {
        let d = iota
            .get(c)
            .ok_or_else(|| Error::RelationFailure(format!("ι undefined on {c:?}")))?;
        if !base.alphabet().contains(d) {
            return Err(Error::RelationFailure(format!("ι({c:?}) = {d:?} leaves the alphabet")));
        }
        if iota.get(d) != Some(c) {
            return Err(Error::RelationFailure(format!(
                "ι is not an involution: ι²({c:?}) ≠ {c:?}"
            )));
        }
    }
    // σ preserves the language iff the language is closed under reflect-ι
    for n in 1..=depth {
        let words = base.legal_words(n)?;
        for w in words.iter() {
            let r = reflect_word(iota, w);
            if !words.contains(&r) {
                return Err(Error::RelationFailure(format!(
                    "σ breaks legality: [{w}] is legal but its reflection [{r}] is not"
                )));
            }
        }
    }
    // dihedral relations on index patterns of sample legal words
    for w in base.legal_words(depth.min(6))?.iter() {
        let p: Pattern = w.chars().enumerate().map(|(i, c)| (i as i64, c)).collect();
        if pattern_sigma(iota, &pattern_sigma(iota, &p)) != p {
            return Err(Error::RelationFailure(format!("σ² ≠ Id on pattern [{w}]")));
        }
        let lhs = pattern_sigma(iota, &pattern_phi(&pattern_sigma(iota, &p)));
        if lhs != pattern_phi_inv(&p) {
            return Err(Error::RelationFailure(format!("σφσ ≠ φ⁻¹ on pattern [{w}]")));
        }
    }
    // a point fixed by a reflection φⁿσ carries arbitrarily long legal
    // ι-antipalindromes of one parity; rule out both parities at the depth
    for l in [depth - 1, depth] {
        for w in base.legal_words(l)?.iter() {
            let chars: Vec<char> = w.chars().collect();
            if is_antipalindrome(iota, &chars) {
                return Err(Error::NotFree {
                    pattern: w.clone(),
                    element: "a reflection φⁿσ".into(),
                });
            }
        }
    }
    Ok(DInftySystem { base, iota: iota.clone(), free_depth: depth })
}

impl DInftySystem {
    pub fn free_depth(&self) -> usize {
        self.free_depth
    }

    pub fn iota(&self, c: char) -> Result<char> {
        self.iota
            .get(&c)
            .copied()
            .ok_or_else(|| Error::RelationFailure(format!("ι undefined on {c:?}")))
    }

    /// Error if `x` agrees with σ(x) on all indices |k| < depth.
    fn check_not_sigma_fixed(&self, x: &TwoSidedPoint, depth: i64) -> Result<()> {
        for k in 0..depth {
            if x.letter_at(k)? != self.iota(x.letter_at(-k - 1)?)? {
                return Ok(());
            }
        }
        Err(Error::NotFree {
            pattern: x.window(-depth, depth)?,
            element: "σ".into(),
        })
    }

    /// The cylinder φⁿσʲ·C.
    fn translate_cylinder(&self, c: &CylinderX, n: i64, j: u8) -> CylinderX {
        let l = c.len() as i64;
        if j == 0 {
            CylinderX { word: c.word.clone(), position: c.position - n }
        } else {
            CylinderX {
                word: reflect_word(&self.iota, &c.word),
                position: -c.position - l - n,
            }
        }
    }
}

fn int_floor(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("index fits in i64")
}

fn int_ceil(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("index fits in i64")
}

/// Integers strictly inside the open interval (lo, hi).
fn ints_strictly_between(lo: &Q, hi: &Q) -> Vec<i64> {
    let a = int_floor(lo) + 1;
    let b = if hi.is_integer() { int_floor(hi) - 1 } else { int_floor(hi) };
    (a..=b).collect()
}

/// The non-trivial dihedral elements (n, j), acting on time by
/// t ↦ (−1)ʲ t − n, that move the interval I across itself.
pub fn interval_stabilizer_candidates(i: (&Q, &Q)) -> Vec<(i64, u8)> {
    let (alpha, beta) = i;
    let len = beta - alpha;
    let mut out = Vec::new();
    for n in ints_strictly_between(&-len.clone(), &len) {
        if n != 0 {
            out.push((n, 0));
        }
    }
    let lo = -(beta + beta);
    let hi = -(alpha + alpha);
    for n in ints_strictly_between(&lo, &hi) {
        out.push((n, 1));
    }
    out
}

/// A clopen neighbourhood C of x with g(C) ∩ C = ∅ for every non-trivial
/// dihedral g whose time part moves I across itself, making (C, I)
/// admissible. Central cylinders of growing depth are tried up to `depth`.
pub fn admissible_chart_around(
    s: &DInftySystem,
    x: &TwoSidedPoint,
    t: &Q,
    i: (&Q, &Q),
    depth: usize,
) -> Result<CylinderX> {
    let (alpha, beta) = i;
    if t <= alpha || t >= beta {
        return Err(Error::InadmissibleChart(format!("t = {t} is not inside ({alpha}, {beta})")));
    }
    let f = interval_stabilizer_candidates(i);
    if f.is_empty() {
        return Ok(CylinderX::full());
    }
    s.check_not_sigma_fixed(x, depth as i64)?;
    let mut blocking = f[0];
    for k in 1..=depth as i64 {
        let word = x.window(-k, k)?;
        if !s.base.is_legal(&word)? {
            return Err(Error::IllegalWord(word));
        }
        let c = CylinderX { word, position: -k };
        let mut separated = true;
        for &(n, j) in &f {
            let g_c = s.translate_cylinder(&c, n, j);
            if let Some(joint) = merge_constraints(&c.constraints(), &g_c.constraints()) {
                if s.base.exists_legal_completion(&joint)? {
                    separated = false;
                    blocking = (n, j);
                    break;
                }
            }
        }
        if separated {
            return Ok(c);
        }
    }
    Err(Error::InadmissibleChart(format!(
        "no separating cylinder within depth {depth}; blocked by (n, j) = {blocking:?}"
    )))
}

/// One traversal of the chart (C, I) by the leaf through x: the time
/// interval in the leaf parametrisation and the orientation sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traversal {
    pub n: i64,
    pub sign: i8,
    pub lo: Q,
    pub hi: Q,
}

fn point_visits(x: &TwoSidedPoint, c: &CylinderX, shift: i64) -> Result<bool> {
    for (m, letter) in c.word.chars().enumerate() {
        if x.letter_at(c.position + m as i64 + shift)? != letter {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sigma_point_visits(
    s: &DInftySystem,
    x: &TwoSidedPoint,
    c: &CylinderX,
    shift: i64,
) -> Result<bool> {
    for (m, letter) in c.word.chars().enumerate() {
        let k = c.position + m as i64 + shift;
        if s.iota(x.letter_at(-k - 1)?)? != letter {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All traversals of the chart (C, I) by the leaf through x inside the
/// window. Positive traversals sit at I + n for n with φⁿ(x) ∈ C; negative
/// ones at the reflection −I − n for n with φⁿσ(x) ∈ C, and run through
/// the chart in the opposite orientation.
pub fn leaf_itinerary(
    s: &DInftySystem,
    x: &TwoSidedPoint,
    window: (&Q, &Q),
    c: &CylinderX,
    i: (&Q, &Q),
) -> Result<Vec<Traversal>> {
    let (lo, hi) = window;
    let (alpha, beta) = i;
    if lo >= hi || alpha >= beta {
        return Err(Error::InadmissibleChart("empty window or chart interval".into()));
    }
    if !s.base.is_legal(&c.word)? {
        return Err(Error::IllegalWord(c.word.clone()));
    }
    let reach = int_ceil(&hi.abs().max(lo.abs())) + c.position.abs() + c.len() as i64 + 2;
    s.check_not_sigma_fixed(x, reach)?;
    let mut out = Vec::new();
    for n in ints_strictly_between(&(lo - beta), &(hi - alpha)) {
        if point_visits(x, c, n)? {
            let q = Q::from_integer(BigInt::from(n));
            out.push(Traversal { n, sign: 1, lo: alpha + &q, hi: beta + &q });
        }
    }
    for n in ints_strictly_between(&(-hi - beta), &(-lo - alpha)) {
        if sigma_point_visits(s, x, c, n)? {
            let q = Q::from_integer(BigInt::from(n));
            out.push(Traversal { n, sign: -1, lo: -beta - &q, hi: -alpha - &q });
        }
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    for pair in out.windows(2) {
        if pair[1].lo < pair[0].hi {
            return Err(Error::InadmissibleChart(format!(
                "traversals at n = {} and n = {} overlap; (C, I) is not admissible",
                pair[0].n, pair[1].n
            )));
        }
    }
    Ok(out)
}

/// The action of a chart-local map f : I → I read in the leaf coordinate
/// on one traversal: the conjugate of f by t ↦ t + n (positive sign) or by
/// the reflection t ↦ −t − n (negative sign, endpoint correspondence
/// reversed).
pub fn leaf_restriction(f: &PLMap, tr: &Traversal) -> Result<PLMap> {
    let (a, b) = match f.domain() {
        Domain::Interval(a, b) => (a.clone(), b.clone()),
        Domain::Line => {
            return Err(Error::PlDomainMismatch("chart map must live on an interval".into()))
        }
    };
    let n = Q::from_integer(BigInt::from(tr.n));
    let vertices: Vec<(Q, Q)> = if tr.sign > 0 {
        if &a + &n != tr.lo || &b + &n != tr.hi {
            return Err(Error::PlDomainMismatch(format!(
                "traversal ({}, {}) is not I + {}",
                tr.lo, tr.hi, tr.n
            )));
        }
        f.points().iter().map(|(x, y)| (x + &n, y + &n)).collect()
    } else {
        if -(&b) - &n != tr.lo || -(&a) - &n != tr.hi {
            return Err(Error::PlDomainMismatch(format!(
                "traversal ({}, {}) is not −I − {}",
                tr.lo, tr.hi, tr.n
            )));
        }
        f.points().iter().rev().map(|(x, y)| (-x - &n, -y - &n)).collect()
    };
    PLMap::interval(vertices)
}

/// One chart-local piece of a flow element: on the box C × [i₀, i₁) the
/// element acts by f in the time coordinate, landing on C × [j₀, j₁).
/// f is a line map so that the image interval may differ from the domain.
#[derive(Clone, Debug)]
pub struct FlowPiece {
    pub c: CylinderX,
    pub i: (Q, Q),
    pub j: (Q, Q),
    pub f: PLMap,
}

impl FlowPiece {
    pub fn new(c: CylinderX, i: (Q, Q), f: PLMap) -> Result<FlowPiece> {
        if i.0 >= i.1 {
            return Err(Error::BadFlowElement(format!("empty piece interval ({}, {})", i.0, i.1)));
        }
        if f.domain() != &Domain::Line {
            return Err(Error::BadFlowElement("piece maps must be line maps".into()));
        }
        let j = (f.eval(&i.0)?, f.eval(&i.1)?);
        Ok(FlowPiece { c, i, j, f })
    }
}

/// An element of the suspension-flow group in partition normal form: the
/// pieces' boxes tile the suspension (time intervals taken half-open) and
/// so do their images.
#[derive(Clone, Debug)]
pub struct FlowElement {
    pub pieces: Vec<FlowPiece>,
}

impl FlowElement {
    pub fn new(pieces: Vec<FlowPiece>) -> Result<FlowElement> {
        if pieces.is_empty() {
            return Err(Error::BadFlowElement("no pieces".into()));
        }
        Ok(FlowElement { pieces })
    }

    pub fn is_dyadic(&self) -> bool {
        self.pieces.iter().all(|p| p.f.is_dyadic())
    }

    /// Certify that the pieces are admissible charts, pairwise disjoint in
    /// both domain and image, and that both families tile the suspension
    /// over every legal pattern of half-width `depth`.
    pub fn validate(&self, sys: &StoneSystem, depth: usize) -> Result<()> {
        for (k, p) in self.pieces.iter().enumerate() {
            if !sys.is_legal(&p.c.word)? {
                return Err(Error::IllegalWord(p.c.word.clone()));
            }
            let tau = Q::from_integer(BigInt::from(smallest_return_time(sys, &p.c)?));
            for (name, (a, b)) in [("domain", &p.i), ("image", &p.j)] {
                if &(b - a) >= &tau {
                    return Err(Error::BadFlowElement(format!(
                        "piece {k}: {name} interval ({a}, {b}) is not shorter than τ = {tau}"
                    )));
                }
            }
        }
        self.check_disjoint(sys, false)?;
        self.check_disjoint(sys, true)?;
        self.check_tiling(sys, depth, false)?;
        self.check_tiling(sys, depth, true)?;
        Ok(())
    }

    fn interval(&self, k: usize, image: bool) -> &(Q, Q) {
        if image {
            &self.pieces[k].j
        } else {
            &self.pieces[k].i
        }
    }

    fn check_disjoint(&self, sys: &StoneSystem, image: bool) -> Result<()> {
        let side = if image { "image" } else { "domain" };
        for a in 0..self.pieces.len() {
            for b in a..self.pieces.len() {
                let ia = self.interval(a, image);
                let ib = self.interval(b, image);
                // I_a meets I_b + n, half-open overlap
                for n in int_ceil(&(&ia.0 - &ib.1)) + 1..=int_floor(&(&ia.1 - &ib.0)) {
                    if (&ib.0 + Q::from_integer(BigInt::from(n)) >= ia.1)
                        || (&ib.1 + Q::from_integer(BigInt::from(n)) <= ia.0)
                    {
                        continue;
                    }
                    if a == b && n == 0 {
                        continue;
                    }
                    let ca = &self.pieces[a].c;
                    let cb = &self.pieces[b].c;
                    let shifted = CylinderX { word: cb.word.clone(), position: cb.position + n };
                    if let Some(joint) = merge_constraints(&ca.constraints(), &shifted.constraints()) {
                        if sys.exists_legal_completion(&joint)? {
                            return Err(Error::BadFlowElement(format!(
                                "{side} boxes of pieces {a} and {b} overlap at shift {n}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_tiling(&self, sys: &StoneSystem, depth: usize, image: bool) -> Result<()> {
        let side = if image { "image" } else { "domain" };
        // shifts n for which I + n can meet [0, 1)
        let mut needed = 0i64;
        let mut shifts: Vec<Vec<i64>> = Vec::new();
        for k in 0..self.pieces.len() {
            let (lo, hi) = self.interval(k, image).clone();
            let ns: Vec<i64> = (int_ceil(&-hi.clone())..=int_floor(&(Q::one() - &lo)))
                .filter(|n| {
                    let q = Q::from_integer(BigInt::from(*n));
                    &lo + &q < Q::one() && &hi + &q > Q::zero()
                })
                .collect();
            let c = &self.pieces[k].c;
            for &n in &ns {
                needed = needed.max((c.position + n).abs());
                needed = needed.max((c.position + c.len() as i64 + n).abs());
            }
            shifts.push(ns);
        }
        if needed > depth as i64 {
            return Err(Error::SearchBound {
                bound: depth,
                context: format!("tiling check needs pattern half-width {needed}"),
            });
        }
        let d = depth as i64;
        for w in sys.legal_words(2 * depth)?.iter() {
            let chars: Vec<char> = w.chars().collect();
            let letter = |k: i64| chars[(k + d) as usize];
            // intervals covering [0, 1) for this pattern, half-open
            let mut covering: Vec<(Q, Q)> = Vec::new();
            for (k, ns) in shifts.iter().enumerate() {
                let c = &self.pieces[k].c;
                for &n in ns {
                    let matches = c
                        .word
                        .chars()
                        .enumerate()
                        .all(|(m, x)| letter(c.position + m as i64 + n) == x);
                    if matches {
                        let (lo, hi) = self.interval(k, image);
                        let q = Q::from_integer(BigInt::from(n));
                        covering.push((lo + &q, hi + &q));
                    }
                }
            }
            covering.sort_by(|a, b| a.0.cmp(&b.0));
            let mut cur = Q::zero();
            for (lo, hi) in &covering {
                if hi <= &cur {
                    continue;
                }
                if lo > &cur {
                    return Err(Error::BadFlowElement(format!(
                        "{side} boxes leave a gap at t = {cur} over the pattern [{w}]"
                    )));
                }
                cur = hi.clone();
                if cur >= Q::one() {
                    break;
                }
            }
            if cur < Q::one() {
                return Err(Error::BadFlowElement(format!(
                    "{side} boxes leave a gap at t = {cur} over the pattern [{w}]"
                )));
            }
        }
        Ok(())
    }
}

/// Apply the element to [x, t]: locate the piece whose box contains the
/// point and apply its time map, returning to the same leaf coordinate.
pub fn flow_eval(g: &FlowElement, x: &TwoSidedPoint, t: &Q) -> Result<Q> {
    for p in &g.pieces {
        // t − n ∈ [i₀, i₁)
        let lo_n = int_ceil(&(t - &p.i.1));
        let hi_n = int_floor(&(t - &p.i.0));
        for n in lo_n..=hi_n {
            let q = Q::from_integer(BigInt::from(n));
            let s = t - &q;
            if s < p.i.0 || s >= p.i.1 {
                continue;
            }
            if point_visits(x, &p.c, n)? {
                return Ok(p.f.eval(&s)? + q);
            }
        }
    }
    Err(Error::UnlocatablePoint)
}

/// The element acting by f on the chart C × J and by the identity on the
/// complementary first-return charts. f must be an interval map on J; it
/// is extended by the identity to a line map.
pub fn chart_local_element(
    sys: &StoneSystem,
    c: &CylinderX,
    j: (&Q, &Q),
    f: &PLMap,
    bound: usize,
) -> Result<FlowElement> {
    match f.domain() {
        Domain::Interval(a, b) if (a, b) == j => {}
        other => {
            return Err(Error::PlDomainMismatch(format!(
                "map domain {other:?} does not match the chart interval ({}, {})",
                j.0, j.1
            )))
        }
    }
    let f_line = PLMap::line(f.points().to_vec())?;
    let mut pieces = vec![FlowPiece::new(c.clone(), (j.0.clone(), j.1.clone()), f_line)?];
    for chart in chart_decomposition(sys, c, j, bound)? {
        pieces.push(FlowPiece::new(chart.c, chart.i, PLMap::identity_line())?);
    }
    FlowElement::new(pieces)
}

/// JSON form of a Stone system.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoneSystemJson {
    Substitution { rules: BTreeMap<char, String> },
    Forbidden { alphabet: String, words: Vec<String> },
}

impl StoneSystemJson {
    pub fn build(&self) -> Result<StoneSystem> {
        match self {
            StoneSystemJson::Substitution { rules } => build_substitution_system(rules.clone()),
            StoneSystemJson::Forbidden { alphabet, words } => {
                let refs: Vec<&str> = words.iter().map(|w| w.as_str()).collect();
                build_forbidden_system(alphabet, &refs)
            }
        }
    }
}
