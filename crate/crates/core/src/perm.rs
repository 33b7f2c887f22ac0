//! Finite permutation laboratory: confining subsets, block systems, orbit
//! profiles, rigid stabilizers, displacement configurations and Alt/Sym
//! detection, all by exhaustive computation at desk scale.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// full enumeration guard: S_10 has 3.6M elements
pub const MAX_ENUM_DEGREE: usize = 10;
pub const ENUMERATION_CAP: usize = 3_700_000;
/// guard for generator-only operations
pub const MAX_DEGREE: usize = 16;

/// A permutation of `{0, …, n−1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::BadPermutation(format!("{images:?}")));
            }
            seen[i] = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(n: usize) -> Self {
        Perm { images: (0..n).collect() }
    }

    /// Build from disjoint cycles; points not mentioned are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for win in 0..cycle.len() {
                let a = cycle[win];
                let b = cycle[(win + 1) % cycle.len()];
                if a >= n || b >= n || used[a] {
                    return Err(Error::BadPermutation(format!("cycle {cycle:?}")));
                }
                used[a] = true;
                images[a] = b;
            }
        }
        Perm::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Result<Perm> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(Perm { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Perm { images }
    }

    pub fn conjugate_by(&self, g: &Perm) -> Result<Perm> {
        g.compose(self)?.compose(&g.inverse())
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &j)| i != j)
            .map(|(i, _)| i)
            .collect()
    }

    /// Non-trivial cycles, each starting at its least point, sorted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.images[cur];
            }
            out.push(cycle);
        }
        out
    }

    pub fn parse_cycles(n: usize, s: &str) -> Result<Perm> {
        let s = s.trim();
        if s == "()" || s.is_empty() {
            return Ok(Perm::identity(n));
        }
        let mut cycles = Vec::new();
        for part in s.split(')') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let inner = part
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("bad cycle notation {s:?}")))?;
            let cycle: Vec<usize> = inner
                .split(|c: char| c == ' ' || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            cycles.push(cycle);
        }
        Perm::from_cycles(n, &cycles)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, p) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A permutation group given by generators; the full element list is
/// computed on demand (guarded) and cached.
#[derive(Debug)]
pub struct PermGroup {
    n: usize,
    generators: Vec<Perm>,
    elements: OnceLock<Vec<Perm>>,
}

impl Clone for PermGroup {
    fn clone(&self) -> Self {
        let g = PermGroup {
            n: self.n,
            generators: self.generators.clone(),
            elements: OnceLock::new(),
        };
        if let Some(e) = self.elements.get() {
            let _ = g.elements.set(e.clone());
        }
        g
    }
}

impl PermGroup {
    pub fn new(n: usize, generators: Vec<Perm>) -> Result<Self> {
        if n > MAX_DEGREE {
            return Err(Error::DegreeTooLarge { n, max: MAX_DEGREE });
        }
        for g in &generators {
            if g.degree() != n {
                return Err(Error::DegreeMismatch(g.degree(), n));
            }
        }
        Ok(PermGroup { n, generators, elements: OnceLock::new() })
    }

    pub fn trivial(n: usize) -> Self {
        PermGroup::new(n, vec![]).expect("small degree")
    }

    pub fn symmetric(n: usize) -> Result<Self> {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::from_cycles(n, &[vec![0, 1]])?);
            gens.push(Perm::from_cycles(n, &[(0..n).collect()])?);
        }
        PermGroup::new(n, gens)
    }

    pub fn alternating(n: usize) -> Result<Self> {
        let mut gens = Vec::new();
        for i in 2..n {
            gens.push(Perm::from_cycles(n, &[vec![0, 1, i]])?);
        }
        PermGroup::new(n, gens)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    /// Full enumeration by closure; sorted for determinism.
    pub fn elements(&self) -> Result<&[Perm]> {
        if self.elements.get().is_none() {
            if self.n > MAX_ENUM_DEGREE {
                return Err(Error::EnumerationOverflow { n: self.n, cap: ENUMERATION_CAP });
            }
            let mut seen: HashSet<Perm> = HashSet::new();
            let mut queue = vec![Perm::identity(self.n)];
            seen.insert(queue[0].clone());
            while let Some(p) = queue.pop() {
                for g in &self.generators {
                    let q = g.compose(&p)?;
                    if seen.insert(q.clone()) {
                        if seen.len() > ENUMERATION_CAP {
                            return Err(Error::EnumerationOverflow {
                                n: self.n,
                                cap: ENUMERATION_CAP,
                            });
                        }
                        queue.push(q);
                    }
                }
            }
            let mut all: Vec<Perm> = seen.into_iter().collect();
            all.sort();
            let _ = self.elements.set(all);
        }
        Ok(self.elements.get().expect("just set"))
    }

    pub fn order(&self) -> Result<usize> {
        Ok(self.elements()?.len())
    }

    pub fn contains(&self, p: &Perm) -> Result<bool> {
        Ok(self.elements()?.binary_search(p).is_ok())
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut orbits = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < orbit.len() {
                for g in &self.generators {
                    let q = g.apply(orbit[i]);
                    if !seen[q] {
                        seen[q] = true;
                        orbit.push(q);
                    }
                }
                i += 1;
            }
            orbit.sort();
            orbits.push(orbit);
        }
        orbits
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }
}

/// Result of a confining test: either confirmation, or a conjugator whose
/// conjugate of `H` misses `P`.
#[derive(Clone, Debug)]
pub struct ConfiningCheck {
    pub confining: bool,
    pub witness: Option<Perm>,
}

/// True iff every conjugate `gHg⁻¹` with `g ∈ G` meets `P`.
pub fn is_confining(p: &[Perm], h: &PermGroup, g: &PermGroup) -> Result<ConfiningCheck> {
    for q in p {
        if q.is_identity() {
            return Err(Error::IdentityElement);
        }
    }
    for conj in g.elements()? {
        let inv = conj.inverse();
        let mut hit = false;
        for q in p {
            // q ∈ conj·H·conj⁻¹  ⇔  conj⁻¹·q·conj ∈ H
            if h.contains(&q.conjugate_by(&inv)?)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(ConfiningCheck { confining: false, witness: Some(conj.clone()) });
        }
    }
    Ok(ConfiningCheck { confining: true, witness: None })
}

/// Smallest confining subset of size ≤ `max_size`, chosen deterministically
/// (elements in sorted order), or `None`. Candidates range over the
/// non-trivial elements of `G`.
pub fn find_confining(
    h: &PermGroup,
    g: &PermGroup,
    max_size: usize,
) -> Result<Option<Vec<Perm>>> {
    let gel = g.elements()?.to_vec();
    let hel: HashSet<&Perm> = h.elements()?.iter().collect();
    let candidates: Vec<&Perm> = gel.iter().filter(|q| !q.is_identity()).collect();
    // coverage masks: bit i of mask(q) set iff gel[i]⁻¹ · q · gel[i] ∈ H
    let words = gel.len().div_ceil(64);
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits = (gel.len() - w * 64).min(64);
            if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 }
        })
        .collect();
    let masks: Vec<Vec<u64>> = candidates
        .iter()
        .map(|q| {
            let mut m = vec![0u64; words];
            for (i, conj) in gel.iter().enumerate() {
                if hel.contains(&q.conjugate_by(&conj.inverse())?) {
                    m[i / 64] |= 1 << (i % 64);
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut stack: Vec<usize> = Vec::new();
    for size in 1..=max_size {
        stack.clear();
        if let Some(found) = search_cover(&candidates, &masks, &full, &mut stack, 0, size) {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

fn search_cover(
    candidates: &[&Perm],
    masks: &[Vec<u64>],
    full: &[u64],
    chosen: &mut Vec<usize>,
    start: usize,
    size: usize,
) -> Option<Vec<Perm>> {
    if chosen.len() == size {
        let covered = full.iter().enumerate().all(|(w, &f)| {
            chosen.iter().fold(0u64, |acc, &i| acc | masks[i][w]) & f == f
        });
        return covered.then(|| chosen.iter().map(|&i| candidates[i].clone()).collect());
    }
    for i in start..candidates.len() {
        chosen.push(i);
        if let Some(found) = search_cover(candidates, masks, full, chosen, i + 1, size) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}

/// A partition of `{0, …, n−1}`; invariance under a group is checked, never
/// assumed.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BlockSystem {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    fn from_classes(classes: &[usize]) -> BlockSystem {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &c) in classes.iter().enumerate() {
            map.entry(c).or_default().push(i);
        }
        let mut blocks: Vec<Vec<usize>> = map.into_values().collect();
        blocks.sort();
        BlockSystem { blocks }
    }

    pub fn is_trivial(&self, n: usize) -> bool {
        self.blocks.len() == 1 || self.blocks.len() == n
    }

    pub fn is_invariant(&self, group: &PermGroup) -> bool {
        let mut class = vec![0usize; group.degree()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                class[i] = b;
            }
        }
        group.generators().iter().all(|g| {
            self.blocks
                .iter()
                .all(|block| block.windows(2).all(|w| class[g.apply(w[0])] == class[g.apply(w[1])]))
        })
    }

    /// Whether `other` refines `self`: every block of `other` is inside a
    /// block of `self`.
    fn refined_by(&self, other: &BlockSystem) -> bool {
        other.blocks.iter().all(|ob| {
            self.blocks.iter().any(|sb| ob.iter().all(|x| sb.contains(x)))
        })
    }
}

#[derive(Clone, Debug)]
pub struct BlockReport {
    pub transitive: bool,
    /// all minimal non-trivial invariant partitions
    pub systems: Vec<BlockSystem>,
    /// meaningful only for transitive groups
    pub primitive: Option<bool>,
}

/// All minimal non-trivial block systems, by the classical union-find
/// refinement: for each β ≠ 0, the finest invariant partition with 0 and β
/// in the same block.
pub fn block_systems(h: &PermGroup) -> BlockReport {
    let n = h.degree();
    let transitive = h.is_transitive();
    let mut candidates: Vec<BlockSystem> = Vec::new();
    for beta in 1..n {
        let mut uf = UnionFind::new(n);
        uf.union(0, beta);
        let mut merged = true;
        while merged {
            merged = false;
            for g in h.generators() {
                // merge images of merged pairs until stable
                for i in 0..n {
                    for j in 0..n {
                        if uf.find(i) == uf.find(j) && uf.find(g.apply(i)) != uf.find(g.apply(j)) {
                            uf.union(g.apply(i), g.apply(j));
                            merged = true;
                        }
                    }
                }
            }
        }
        let classes: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let system = BlockSystem::from_classes(&classes);
        if !system.is_trivial(n) && !candidates.contains(&system) {
            candidates.push(system);
        }
    }
    // keep the finest ones: drop any candidate strictly refined by another
    let systems: Vec<BlockSystem> = candidates
        .iter()
        .filter(|c| {
            !candidates
                .iter()
                .any(|other| *other != **c && c.refined_by(other))
        })
        .cloned()
        .collect();
    let primitive = transitive.then(|| systems.is_empty());
    BlockReport { transitive, systems, primitive }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitProfile {
    pub fixed: Vec<usize>,
    pub orbits: Vec<Vec<usize>>,
}

pub fn orbit_profile(h: &PermGroup) -> OrbitProfile {
    let orbits = h.orbits();
    let fixed = orbits.iter().filter(|o| o.len() == 1).map(|o| o[0]).collect();
    OrbitProfile { fixed, orbits }
}

/// The subgroup of elements of `H` supported inside `Δ`.
pub fn rigid_stabilizer(h: &PermGroup, delta: &BTreeSet<usize>) -> Result<PermGroup> {
    let gens: Vec<Perm> = h
        .elements()?
        .iter()
        .filter(|p| !p.is_identity() && p.support().is_subset(delta))
        .cloned()
        .collect();
    PermGroup::new(h.degree(), gens)
}

/// A family of non-empty subsets indexed by the elements of `P`, stored
/// positionally (entry `i` belongs to `P[i]`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DisplacementConfig {
    pub sets: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug)]
pub struct DisplacementReport {
    pub ok: bool,
    /// name of the first violated condition and the offending indices
    pub violation: Option<String>,
}

fn apply_set(p: &Perm, s: &BTreeSet<usize>) -> BTreeSet<usize> {
    s.iter().map(|&x| p.apply(x)).collect()
}

/// Check the three displacement conditions:
/// i) any two assigned sets are equal or disjoint;
/// ii) each σ either fixes Ω_ρ pointwise or moves it off the union of all
///     assigned sets;
/// iii) σ(Ω_σ) misses both the union of assigned sets and every σ⁻¹(Ω_α).
pub fn check_displacement_config(
    p: &[Perm],
    cfg: &DisplacementConfig,
) -> Result<DisplacementReport> {
    if p.len() != cfg.sets.len() {
        return Err(Error::SizeMismatch { domain: p.len(), range: cfg.sets.len() });
    }
    for (i, s) in cfg.sets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Schema {
                path: format!("sets[{i}]"),
                message: "assigned set is empty".into(),
            });
        }
    }
    let union: BTreeSet<usize> = cfg.sets.iter().flatten().copied().collect();
    for i in 0..p.len() {
        for j in 0..p.len() {
            let (si, sj) = (&cfg.sets[i], &cfg.sets[j]);
            if si != sj && !si.is_disjoint(sj) {
                return Ok(DisplacementReport {
                    ok: false,
                    violation: Some(format!(
                        "i) sets for elements {i} and {j} overlap without being equal"
                    )),
                });
            }
        }
    }
    for (i, sigma) in p.iter().enumerate() {
        for (j, rho_set) in cfg.sets.iter().enumerate() {
            let fixes = rho_set.iter().all(|&x| sigma.apply(x) == x);
            if !fixes && !apply_set(sigma, rho_set).is_disjoint(&union) {
                return Ok(DisplacementReport {
                    ok: false,
                    violation: Some(format!(
                        "ii) element {i} moves the set of element {j} back into the union"
                    )),
                });
            }
        }
    }
    for (i, sigma) in p.iter().enumerate() {
        let image = apply_set(sigma, &cfg.sets[i]);
        if !image.is_disjoint(&union) {
            return Ok(DisplacementReport {
                ok: false,
                violation: Some(format!("iii) element {i}: image of its set meets the union")),
            });
        }
        let inv = sigma.inverse();
        for (j, s) in cfg.sets.iter().enumerate() {
            if !image.is_disjoint(&apply_set(&inv, s)) {
                return Ok(DisplacementReport {
                    ok: false,
                    violation: Some(format!(
                        "iii) element {i}: image of its set meets the preimage of set {j}"
                    )),
                });
            }
        }
    }
    Ok(DisplacementReport { ok: true, violation: None })
}

/// Search for a displacement configuration by backtracking over singleton
/// assignments (enlarging is never needed at these degrees: the checker is
/// re-run on the final assignment).
pub fn find_displacement_config(p: &[Perm]) -> Result<Option<DisplacementConfig>> {
    for (i, sigma) in p.iter().enumerate() {
        if sigma.is_identity() {
            return Err(Error::IdentityElement);
        }
        if sigma.compose(sigma)?.is_identity() {
            return Err(Error::OrderTwoElement { index: i });
        }
    }
    if p.is_empty() {
        return Ok(Some(DisplacementConfig { sets: vec![] }));
    }
    let n = p[0].degree();
    let mut chosen: Vec<usize> = Vec::new();
    if backtrack_displacement(p, n, &mut chosen) {
        let cfg = DisplacementConfig {
            sets: chosen.iter().map(|&x| BTreeSet::from([x])).collect(),
        };
        let report = check_displacement_config(p, &cfg)?;
        if report.ok {
            return Ok(Some(cfg));
        }
    }
    Ok(None)
}

fn backtrack_displacement(p: &[Perm], n: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == p.len() {
        return true;
    }
    let i = chosen.len();
    'point: for x in 0..n {
        // a singleton candidate must at least satisfy x, σx, σ²x distinct
        let sx = p[i].apply(x);
        if sx == x || p[i].apply(sx) == x {
            continue;
        }
        chosen.push(x);
        let cfg = DisplacementConfig {
            sets: chosen.iter().map(|&y| BTreeSet::from([y])).collect(),
        };
        match check_displacement_config(&p[..chosen.len()], &cfg) {
            Ok(r) if r.ok => {
                if backtrack_displacement(p, n, chosen) {
                    return true;
                }
            }
            _ => {}
        }
        chosen.pop();
        continue 'point;
    }
    false
}

/// True iff `H` contains the full alternating group of its degree, detected
/// by membership of every 3-cycle.
pub fn contains_alt(h: &PermGroup) -> Result<bool> {
    let n = h.degree();
    if n < 3 {
        return Ok(true);
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a < b && b < c {
                    for cyc in [vec![a, b, c], vec![a, c, b]] {
                        if !h.contains(&Perm::from_cycles(n, &[cyc])?)? {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Cached multiplication structure for one full symmetric group, used by
/// the exhaustive subgroup audits.
pub struct SymTable {
    pub n: usize,
    pub elems: Vec<Perm>,
    pub mul: Vec<Vec<u32>>,
    pub inv: Vec<u32>,
    pub identity: usize,
}

impl SymTable {
    pub fn build(n: usize) -> Result<SymTable> {
        if n > 7 {
            return Err(Error::DegreeTooLarge { n, max: 7 });
        }
        let g = PermGroup::symmetric(n)?;
        let elems = g.elements()?.to_vec();
        let index: HashMap<&Perm, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut mul = vec![vec![0u32; elems.len()]; elems.len()];
        let mut inv = vec![0u32; elems.len()];
        for (i, a) in elems.iter().enumerate() {
            inv[i] = index[&a.inverse()] as u32;
            for (j, b) in elems.iter().enumerate() {
                mul[i][j] = index[&a.compose(b)?] as u32;
            }
        }
        let identity = index[&Perm::identity(n)];
        Ok(SymTable { n, elems, mul, inv, identity })
    }

    fn conj(&self, g: usize, h: usize) -> usize {
        // g h g⁻¹
        self.mul[self.mul[g][h] as usize][self.inv[g] as usize] as usize
    }

    fn closure(&self, gens: &[usize]) -> Vec<u64> {
        let words = self.elems.len().div_ceil(64);
        let mut bits = vec![0u64; words];
        let set = |bits: &mut Vec<u64>, i: usize| bits[i / 64] |= 1 << (i % 64);
        let get = |bits: &[u64], i: usize| bits[i / 64] >> (i % 64) & 1 == 1;
        let mut members = vec![self.identity];
        set(&mut bits, self.identity);
        let mut frontier = 0;
        while frontier < members.len() {
            let a = members[frontier];
            frontier += 1;
            for &g in gens {
                for b in [self.mul[g][a] as usize, self.mul[a][g] as usize] {
                    if !get(&bits, b) {
                        set(&mut bits, b);
                        members.push(b);
                    }
                }
            }
        }
        bits
    }

    fn conjugate_set(&self, bits: &[u64], g: usize) -> Vec<u64> {
        let mut out = vec![0u64; bits.len()];
        for (w, &word) in bits.iter().enumerate() {
            let mut rem = word;
            while rem != 0 {
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                let h = self.conj(g, w * 64 + b);
                out[h / 64] |= 1 << (h % 64);
            }
        }
        out
    }

    fn canonical_under_conjugacy(&self, bits: &[u64]) -> Vec<u64> {
        (0..self.elems.len())
            .map(|g| self.conjugate_set(bits, g))
            .min()
            .expect("non-empty group")
    }

    /// All subgroups up to conjugacy, as sorted element-index lists.
    pub fn subgroup_classes(&self) -> Vec<Vec<usize>> {
        let mut classes: BTreeSet<Vec<u64>> = BTreeSet::new();
        let trivial = self.closure(&[]);
        classes.insert(self.canonical_under_conjugacy(&trivial));
        let mut frontier: Vec<Vec<u64>> = vec![trivial];
        while let Some(bits) = frontier.pop() {
            let members = bitset_members(&bits);
            for g in 0..self.elems.len() {
                if bits[g / 64] >> (g % 64) & 1 == 1 {
                    continue;
                }
                let mut gens = members.clone();
                gens.push(g);
                let bigger = self.closure(&gens);
                let canon = self.canonical_under_conjugacy(&bigger);
                if classes.insert(canon) {
                    frontier.push(bigger);
                }
            }
        }
        classes.into_iter().map(|bits| bitset_members(&bits)).collect()
    }
}

fn bitset_members(bits: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in bits.iter().enumerate() {
        let mut rem = word;
        while rem != 0 {
            let b = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            out.push(w * 64 + b);
        }
    }
    out
}

/// One row of the fixed-point-bound audit.
#[derive(Clone, Debug, Serialize)]
pub struct FixBoundRow {
    pub subgroup_order: usize,
    pub fixed_points: usize,
    pub has_confining_singleton: bool,
    pub has_confining_pair: bool,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixBoundAudit {
    pub degree: usize,
    pub classes: usize,
    pub rows: Vec<FixBoundRow>,
    pub violations: usize,
}

/// Exhaustive audit over all subgroup classes of S_n: whenever a confining
/// set of size ≤ 2 exists, the subgroup fixes at most (size − 1) points.
pub fn fix_bound_audit(n: usize) -> Result<FixBoundAudit> {
    let table = SymTable::build(n)?;
    let order = table.elems.len();
    let words = order.div_ceil(64);
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits = (order - w * 64).min(64);
            if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 }
        })
        .collect();
    let mut rows = Vec::new();
    let mut violations = 0;
    for members in table.subgroup_classes() {
        let member_set: HashSet<usize> = members.iter().copied().collect();
        let fixed_points = (0..n)
            .filter(|&x| members.iter().all(|&h| table.elems[h].apply(x) == x))
            .count();
        // coverage mask per candidate p: conjugators g with g⁻¹ p g ∈ H
        let mut masks: Vec<Vec<u64>> = Vec::with_capacity(order);
        for p in 0..order {
            let mut m = vec![0u64; words];
            if p != table.identity {
                for g in 0..order {
                    if member_set.contains(&table.conj(table.inv[g] as usize, p)) {
                        m[g / 64] |= 1 << (g % 64);
                    }
                }
            }
            masks.push(m);
        }
        let has_confining_singleton = (0..order)
            .any(|p| p != table.identity && masks[p] == full);
        let mut has_confining_pair = has_confining_singleton;
        if !has_confining_pair {
            'pairs: for p in 0..order {
                if p == table.identity {
                    continue;
                }
                for q in p + 1..order {
                    if q == table.identity {
                        continue;
                    }
                    if (0..words).all(|w| (masks[p][w] | masks[q][w]) & full[w] == full[w]) {
                        has_confining_pair = true;
                        break 'pairs;
                    }
                }
            }
        }
        let violation = (has_confining_singleton && fixed_points > 0)
            || (has_confining_pair && fixed_points > 1);
        if violation {
            violations += 1;
        }
        rows.push(FixBoundRow {
            subgroup_order: members.len(),
            fixed_points,
            has_confining_singleton,
            has_confining_pair,
            violation,
        });
    }
    Ok(FixBoundAudit { degree: n, classes: rows.len(), rows, violations })
}
