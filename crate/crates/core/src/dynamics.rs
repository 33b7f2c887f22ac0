//! Dynamics of prefix-replacement bijections: the finite-order/hyperbolic
//! decomposition, orbit tests, and constructive witnesses for transitivity,
//! compression and germ matching.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::prefix::{ClopenSet, EvPeriodicPoint, Word};
use crate::vd::PrefixMap;

/// The decomposition `X_d = Y ⊔ Z` attached to an element `g`: on the clopen
/// invariant set `Y` the element has finite order, while `Z` carries finitely
/// many hyperbolic periodic points (attracting and repelling) and every other
/// `Z`-orbit flows from the repelling set to the attracting set.
#[derive(Clone, Debug)]
pub struct BrinDecomposition {
    pub y: ClopenSet,
    pub z: ClopenSet,
    /// order of the restriction to `y`; `None` iff `y` is empty
    pub order_on_y: Option<u32>,
    pub att: Vec<EvPeriodicPoint>,
    pub rep: Vec<EvPeriodicPoint>,
    /// hyperbolic cells `(w, u)`: the element (some power of it, in table
    /// form) maps `C_w` onto `C_u` with one word a strict prefix of the other
    pub certificate: Vec<(Word, Word)>,
}

/// Per-power scan data: interior-fixed cells, plus the attracting and
/// repelling trap cells read off the canonical table of the power.
struct PowerScan {
    fixed: ClopenSet,
    att_traps: Vec<Word>,
    rep_traps: Vec<Word>,
    att_points: Vec<EvPeriodicPoint>,
    rep_points: Vec<EvPeriodicPoint>,
    cells: Vec<(Word, Word)>,
}

fn scan_power(h: &PrefixMap) -> PowerScan {
    let d = h.d();
    let mut s = PowerScan {
        fixed: h.fixed_interior(),
        att_traps: Vec::new(),
        rep_traps: Vec::new(),
        att_points: Vec::new(),
        rep_points: Vec::new(),
        cells: Vec::new(),
    };
    for (w, u) in h.pairs() {
        if w.is_strict_prefix_of(u) {
            // C_w maps into its own proper subcell C_u: attracting trap with
            // unique fixed point w·s^∞ where u = w·s
            let tail = Word::new(d, u.letters()[w.len()..].to_vec()).unwrap();
            s.att_traps.push(w.clone());
            s.att_points
                .push(EvPeriodicPoint::new(w.clone(), tail).expect("strict prefix"));
            s.cells.push((w.clone(), u.clone()));
        } else if u.is_strict_prefix_of(w) {
            let tail = Word::new(d, w.letters()[u.len()..].to_vec()).unwrap();
            s.rep_traps.push(u.clone());
            s.rep_points
                .push(EvPeriodicPoint::new(u.clone(), tail).expect("strict prefix"));
            s.cells.push((w.clone(), u.clone()));
        }
    }
    s
}

/// Compute the decomposition by sweeping powers `g, g², …` up to
/// `power_budget`. The result is certified before it is returned:
/// cells interior-fixed by some power accumulate into `Y`, and the sweep
/// stops once the complement is covered by the attracting traps, their
/// backward iterates, and the repelling traps. That coverage rules out any
/// further periodic behaviour outside `Y ∪ att ∪ rep`, so a returned value
/// is exact; if the budget runs out first the search reports an error
/// instead of guessing.
pub fn brin_decomposition_with_budget(
    g: &PrefixMap,
    power_budget: u32,
    basin_budget: u32,
) -> Result<BrinDecomposition> {
    let d = g.d();
    let ginv = g.invert();
    let mut y = ClopenSet::empty(d);
    let mut att: BTreeSet<EvPeriodicPoint> = BTreeSet::new();
    let mut rep: BTreeSet<EvPeriodicPoint> = BTreeSet::new();
    let mut certificate: Vec<(Word, Word)> = Vec::new();
    let mut att_traps = ClopenSet::empty(d);
    let mut rep_traps = ClopenSet::empty(d);
    let mut contributing: Vec<u32> = Vec::new();

    let mut h = PrefixMap::identity(d);
    for k in 1..=power_budget {
        h = g.compose(&h)?;
        let scan = scan_power(&h);
        if !scan.fixed.is_empty() && !scan.fixed.subset_of(&y)? {
            contributing.push(k);
            y = y.union(&scan.fixed)?;
        }
        att.extend(scan.att_points);
        rep.extend(scan.rep_points);
        for c in scan.cells {
            if !certificate.contains(&c) {
                certificate.push(c);
            }
        }
        att_traps = att_traps.union(&ClopenSet::from_cells(d, scan.att_traps))?;
        rep_traps = rep_traps.union(&ClopenSet::from_cells(d, scan.rep_traps))?;

        let z = y.complement();
        if z.is_empty() {
            return finish(g, y, z, att, rep, certificate, &contributing);
        }
        if att_traps.is_empty() || rep_traps.is_empty() {
            continue;
        }
        // basin coverage: grow A ∪ R by preimages of A; if the union covers
        // Z, every Z-point is either trapped near a repeller or provably
        // falls into an attracting trap, so nothing periodic was missed
        let mut basin = att_traps.union(&rep_traps)?;
        let mut covered = z.subset_of(&basin)?;
        for _ in 0..basin_budget {
            if covered {
                break;
            }
            let next = basin.union(&ginv.evaluate_clopen(&basin)?)?;
            if next == basin {
                break;
            }
            basin = next;
            covered = z.subset_of(&basin)?;
        }
        if covered {
            return finish(g, y, z, att, rep, certificate, &contributing);
        }
    }
    Err(Error::BudgetExceeded {
        depth: power_budget as usize,
        context: "finite-order/hyperbolic decomposition power sweep".into(),
    })
}

fn finish(
    g: &PrefixMap,
    y: ClopenSet,
    z: ClopenSet,
    att: BTreeSet<EvPeriodicPoint>,
    rep: BTreeSet<EvPeriodicPoint>,
    certificate: Vec<(Word, Word)>,
    contributing: &[u32],
) -> Result<BrinDecomposition> {
    let order_on_y = if y.is_empty() {
        None
    } else {
        // the order divides the lcm of the contributing powers; take the
        // smallest divisor whose power fixes all of Y
        let lcm = contributing.iter().fold(1u64, |a, &k| num_integer::lcm(a, k as u64));
        let mut order = lcm as u32;
        for n in 1..=lcm as u32 {
            if lcm % n as u64 == 0 && y.subset_of(&g.power(n)?.fixed_interior())? {
                order = n;
                break;
            }
        }
        Some(order)
    };
    Ok(BrinDecomposition {
        y,
        z,
        order_on_y,
        att: att.into_iter().collect(),
        rep: rep.into_iter().collect(),
        certificate,
    })
}

pub const DEFAULT_POWER_BUDGET: u32 = 64;
pub const DEFAULT_BASIN_BUDGET: u32 = 64;

pub fn brin_decomposition(g: &PrefixMap) -> Result<BrinDecomposition> {
    brin_decomposition_with_budget(g, DEFAULT_POWER_BUDGET, DEFAULT_BASIN_BUDGET)
}

/// Cofinality test: two sequences lie in the same orbit of the prefix
/// calculus iff their tails agree after finite shifts. Returns the minimal
/// shift pair `(m, n)` (smallest `m + n`, ties broken by smaller `m`) with
/// `shift^m(ξ) = shift^n(η)`, or `None`.
pub fn same_orbit(
    xi: &EvPeriodicPoint,
    eta: &EvPeriodicPoint,
) -> Result<Option<(usize, usize)>> {
    if xi.d() != eta.d() {
        return Err(Error::AlphabetMismatch { left: xi.d(), right: eta.d() });
    }
    // beyond the preperiod plus one full period, shifted points repeat
    let mmax = xi.preperiod().len() + xi.period().len();
    let nmax = eta.preperiod().len() + eta.period().len();
    for total in 0..=(mmax + nmax) {
        for m in 0..=total.min(mmax) {
            let n = total - m;
            if n > nmax {
                continue;
            }
            if xi.shift(m) == eta.shift(n) {
                return Ok(Some((m, n)));
            }
        }
    }
    Ok(None)
}

fn check_distinct(points: &[EvPeriodicPoint]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoint(i, j));
            }
        }
    }
    Ok(())
}

fn pairwise_prefix_free(words: &[Word]) -> bool {
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i != j && words[i].is_prefix_of(&words[j]) {
                return false;
            }
        }
    }
    true
}

const WITNESS_DEPTH_BOUND: usize = 512;

/// An element moving each `src[i]` to `dst[i]`. Each pair must be cofinal;
/// the construction aligns the tails with a uniform extra depth, takes the
/// induced partial prefix bijection, and completes it.
pub fn transitivity_witness(
    src: &[EvPeriodicPoint],
    dst: &[EvPeriodicPoint],
) -> Result<PrefixMap> {
    if src.len() != dst.len() {
        return Err(Error::SizeMismatch { domain: src.len(), range: dst.len() });
    }
    check_distinct(src)?;
    check_distinct(dst)?;
    let d = src.first().map(|p| p.d()).unwrap_or(2);
    let mut shifts = Vec::with_capacity(src.len());
    for (i, (x, y)) in src.iter().zip(dst).enumerate() {
        match same_orbit(x, y)? {
            Some(mn) => shifts.push(mn),
            None => {
                return Err(Error::NotCofinal {
                    index: i,
                    left: x.to_string(),
                    right: y.to_string(),
                })
            }
        }
    }
    for extra in 0..WITNESS_DEPTH_BOUND {
        let dom: Vec<Word> = src
            .iter()
            .zip(&shifts)
            .map(|(x, (m, _))| x.prefix(m + extra))
            .collect();
        let ran: Vec<Word> = dst
            .iter()
            .zip(&shifts)
            .map(|(y, (_, n))| y.prefix(n + extra))
            .collect();
        if !pairwise_prefix_free(&dom) || !pairwise_prefix_free(&ran) {
            continue;
        }
        let partial: Vec<(Word, Word)> = dom.into_iter().zip(ran).collect();
        match PrefixMap::complete_partial(d, partial) {
            Ok(g) => {
                return Ok(g);
            }
            Err(Error::CompletionImpossible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchBound {
        bound: WITNESS_DEPTH_BOUND,
        context: "aligning cofinal tails for a transitivity witness".into(),
    })
}

/// What to squeeze into the target neighbourhood: a clopen set or a finite
/// list of points.
#[derive(Clone, Debug)]
pub enum CompressTarget {
    Cells(ClopenSet),
    Points(Vec<EvPeriodicPoint>),
}

/// An element mapping the target into the non-empty clopen set `u`. The
/// image lands in distinct proper subcells of the least cell of `u`.
pub fn compress(target: &CompressTarget, u: &ClopenSet) -> Result<PrefixMap> {
    if u.is_empty() {
        return Err(Error::EmptyTargetSet);
    }
    let d = u.d();
    let v = u.cells().first().expect("non-empty").clone();
    let dom: Vec<Word> = match target {
        CompressTarget::Cells(c) => {
            if c.is_full() {
                return Err(Error::TargetNotProper);
            }
            c.cells().to_vec()
        }
        CompressTarget::Points(points) => {
            check_distinct(points)?;
            let mut chosen = Vec::new();
            'depth: for depth in 0..WITNESS_DEPTH_BOUND {
                chosen = points.iter().map(|p| p.prefix(depth)).collect();
                if pairwise_prefix_free(&chosen)
                    && !ClopenSet::from_cells(d, chosen.clone()).is_full()
                {
                    break 'depth;
                }
                if depth + 1 == WITNESS_DEPTH_BOUND {
                    return Err(Error::SearchBound {
                        bound: WITNESS_DEPTH_BOUND,
                        context: "separating points for compression".into(),
                    });
                }
            }
            chosen
        }
    };
    if dom.is_empty() {
        return Ok(PrefixMap::identity(d));
    }
    // distinct proper subcells of C_v at the least depth that leaves room
    let mut depth = 1usize;
    while (d as usize).pow(depth as u32) <= dom.len() {
        depth += 1;
    }
    let ran: Vec<Word> = (0..dom.len())
        .map(|mut i| {
            let mut letters = vec![0u8; depth];
            for slot in (0..depth).rev() {
                letters[slot] = (i % d as usize) as u8;
                i /= d as usize;
            }
            v.concat(&letters)
        })
        .collect();
    PrefixMap::complete_partial(d, dom.into_iter().zip(ran).collect())
}

/// An element agreeing with `g` near each given point: refine `g`'s table
/// until the cells containing the points are pairwise disjoint with disjoint
/// images, keep exactly those pairs, and complete the rest.
pub fn match_germs(g: &PrefixMap, points: &[EvPeriodicPoint]) -> Result<PrefixMap> {
    check_distinct(points)?;
    let d = g.d();
    if points.is_empty() {
        return Ok(PrefixMap::identity(d));
    }
    let base_depth = g.pairs().iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    for extra in 0..WITNESS_DEPTH_BOUND {
        let dom: Vec<Word> = points.iter().map(|p| p.prefix(base_depth + extra)).collect();
        if !pairwise_prefix_free(&dom) {
            continue;
        }
        let mut partial = Vec::with_capacity(dom.len());
        for w in &dom {
            let (a, b) = g
                .pairs()
                .iter()
                .find(|(a, _)| a.is_prefix_of(w))
                .expect("refined below table depth");
            partial.push((w.clone(), b.concat(w.suffix(a.len()))));
        }
        if !pairwise_prefix_free(&partial.iter().map(|(_, u)| u.clone()).collect::<Vec<_>>()) {
            continue;
        }
        match PrefixMap::complete_partial(d, partial) {
            Ok(h) => return Ok(h),
            Err(Error::CompletionImpossible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchBound {
        bound: WITNESS_DEPTH_BOUND,
        context: "separating germ cells".into(),
    })
}

/// A uniformly random element with at most `max_cells` table cells: split a
/// random cell of each side repeatedly, then match the antichains by a
/// random bijection. Used by the randomized audits.
pub fn random_element<R: Rng>(d: u8, max_cells: usize, rng: &mut R) -> PrefixMap {
    let splits = if max_cells > 1 {
        rng.gen_range(0..=(max_cells - 1) / (d as usize - 1).max(1))
    } else {
        0
    };
    let mut dom = vec![Word::empty(d)];
    let mut ran = vec![Word::empty(d)];
    for side in [&mut dom, &mut ran] {
        for _ in 0..splits {
            let i = rng.gen_range(0..side.len());
            let w = side.remove(i);
            for l in 0..d {
                side.push(w.child(l));
            }
        }
    }
    dom.sort();
    let mut perm: Vec<usize> = (0..ran.len()).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let pairs = dom
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, ran[perm[i]].clone()))
        .collect();
    PrefixMap::new(d, pairs).expect("matched complete antichains")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(d: u8, s: &str) -> Word {
        Word::parse(d, s).unwrap()
    }

    fn pt(d: u8, s: &str) -> EvPeriodicPoint {
        EvPeriodicPoint::parse(d, s).unwrap()
    }

    fn elem(d: u8, pairs: &[(&str, &str)]) -> PrefixMap {
        PrefixMap::new(d, pairs.iter().map(|(a, b)| (w(d, a), w(d, b))).collect()).unwrap()
    }

    #[test]
    fn brin_swap_is_finite_order() {
        let swap = elem(2, &[("0", "1"), ("1", "0")]);
        let dec = brin_decomposition(&swap).unwrap();
        assert!(dec.y.is_full());
        assert!(dec.z.is_empty());
        assert_eq!(dec.order_on_y, Some(2));
        assert!(dec.att.is_empty() && dec.rep.is_empty());
    }

    #[test]
    fn brin_translation_like() {
        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        let dec = brin_decomposition(&a).unwrap();
        assert!(dec.y.is_empty());
        assert!(dec.z.is_full());
        assert_eq!(dec.order_on_y, None);
        assert_eq!(dec.att, vec![pt(2, "(0)")]);
        assert_eq!(dec.rep, vec![pt(2, "(1)")]);
    }

    #[test]
    fn brin_mixed_element() {
        // swap on {C_00, C_01}, translation-like shift inside C_1
        let g = elem(
            2,
            &[("00", "01"), ("01", "00"), ("10", "100"), ("110", "101"), ("111", "11")],
        );
        let dec = brin_decomposition(&g).unwrap();
        assert_eq!(dec.y, ClopenSet::from_cells(2, vec![w(2, "0")]));
        assert_eq!(dec.z, ClopenSet::from_cells(2, vec![w(2, "1")]));
        assert_eq!(dec.order_on_y, Some(2));
        assert_eq!(dec.att, vec![pt(2, "1(0)")]);
        assert_eq!(dec.rep, vec![pt(2, "(1)")]);
    }

    #[test]
    fn brin_identity() {
        let dec = brin_decomposition(&PrefixMap::identity(3)).unwrap();
        assert!(dec.y.is_full());
        assert_eq!(dec.order_on_y, Some(1));
    }

    #[test]
    fn brin_period_two_orbit_of_hyperbolic_points() {
        // translation-like on C_0 glued to a swap of the top cells:
        // attracting 2-cycle {0(0)^∞, 1(0)^∞}, repelling 2-cycle at the 1-tails
        let g = elem(2, &[("00", "100"), ("010", "101"), ("011", "11"), ("1", "0")]);
        let dec = brin_decomposition(&g).unwrap();
        for p in dec.att.iter().chain(&dec.rep) {
            let q = g.evaluate_point(p).unwrap();
            assert!(dec.att.contains(&q) || dec.rep.contains(&q));
        }
        assert!(!dec.att.is_empty() && !dec.rep.is_empty());
    }

    #[test]
    fn brin_random_audit_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let g = random_element(2, 8, &mut rng);
            let dec = brin_decomposition(&g).unwrap();
            assert!(dec.y.union(&dec.z).unwrap().is_full());
            assert!(dec.y.intersect(&dec.z).unwrap().is_empty());
            assert_eq!(g.evaluate_clopen(&dec.y).unwrap(), dec.y);
            assert_eq!(g.evaluate_clopen(&dec.z).unwrap(), dec.z);
            if let Some(n) = dec.order_on_y {
                assert!(dec.y.subset_of(&g.power(n).unwrap().fixed_interior()).unwrap());
            }
            assert_eq!(dec.z.is_empty(), dec.att.is_empty() && dec.rep.is_empty());
            if !dec.z.is_empty() {
                assert!(!dec.att.is_empty() && !dec.rep.is_empty());
            }
            for p in &dec.att {
                assert!(dec.z.contains_point(p).unwrap());
                assert!(!dec.rep.contains(p));
            }
        }
    }

    #[test]
    fn same_orbit_examples() {
        assert_eq!(same_orbit(&pt(2, "(0)"), &pt(2, "1(0)")).unwrap(), Some((0, 1)));
        assert_eq!(same_orbit(&pt(2, "(0)"), &pt(2, "(1)")).unwrap(), None);
        let (m, n) = same_orbit(&pt(2, "(01)"), &pt(2, "1(10)")).unwrap().unwrap();
        assert_eq!(pt(2, "(01)").shift(m), pt(2, "1(10)").shift(n));
        assert_eq!(same_orbit(&pt(2, "(01)"), &pt(2, "(01)")).unwrap(), Some((0, 0)));
        assert_eq!(same_orbit(&pt(2, "(01)"), &pt(2, "(10)")).unwrap(), Some((0, 1)));
    }

    #[test]
    fn transitivity_witness_examples() {
        let g = transitivity_witness(&[pt(2, "(0)")], &[pt(2, "1(0)")]).unwrap();
        assert_eq!(g.evaluate_point(&pt(2, "(0)")).unwrap(), pt(2, "1(0)"));

        let src = [pt(2, "(0)"), pt(2, "1(0)")];
        let dst = [pt(2, "1(0)"), pt(2, "(0)")];
        let g = transitivity_witness(&src, &dst).unwrap();
        for (x, y) in src.iter().zip(&dst) {
            assert_eq!(g.evaluate_point(x).unwrap(), *y);
        }

        let same = [pt(2, "(01)"), pt(2, "11(0)")];
        let g = transitivity_witness(&same, &same).unwrap();
        for x in &same {
            assert_eq!(g.evaluate_point(x).unwrap(), *x);
        }

        assert!(matches!(
            transitivity_witness(&[pt(2, "(0)")], &[pt(2, "(1)")]),
            Err(Error::NotCofinal { index: 0, .. })
        ));
        assert!(matches!(
            transitivity_witness(&[pt(2, "(0)"), pt(2, "(0)")], &[pt(2, "(0)"), pt(2, "1(0)")]),
            Err(Error::DuplicatePoint(0, 1))
        ));
    }

    #[test]
    fn compress_examples() {
        let c0 = ClopenSet::from_cells(2, vec![w(2, "0")]);
        let c11 = ClopenSet::from_cells(2, vec![w(2, "11")]);
        let g = compress(&CompressTarget::Cells(c0.clone()), &c11).unwrap();
        assert!(g.evaluate_clopen(&c0).unwrap().subset_of(&c11).unwrap());

        assert!(matches!(
            compress(&CompressTarget::Cells(ClopenSet::full(2)), &c11),
            Err(Error::TargetNotProper)
        ));
        assert!(matches!(
            compress(&CompressTarget::Cells(c0), &ClopenSet::empty(2)),
            Err(Error::EmptyTargetSet)
        ));

        let c01 = ClopenSet::from_cells(2, vec![w(2, "01")]);
        let pts = vec![pt(2, "(0)"), pt(2, "(1)")];
        let g = compress(&CompressTarget::Points(pts.clone()), &c01).unwrap();
        for p in &pts {
            assert!(c01.contains_point(&g.evaluate_point(p).unwrap()).unwrap());
        }
    }

    #[test]
    fn match_germs_examples() {
        let id = PrefixMap::identity(2);
        assert!(match_germs(&id, &[pt(2, "(0)"), pt(2, "(1)")]).unwrap().is_identity());

        let a = elem(2, &[("0", "00"), ("10", "01"), ("11", "1")]);
        let aa = a.compose(&a).unwrap();
        let h = match_germs(&aa, &[pt(2, "(0)")]).unwrap();
        assert!(aa.germ_equal(&h, &pt(2, "(0)")).unwrap());

        let h = match_germs(&a, &[pt(2, "(1)")]).unwrap();
        assert!(a.germ_equal(&h, &pt(2, "(1)")).unwrap());
        assert!(h
            .pairs()
            .iter()
            .any(|(w_, u_)| *w_ == w(2, "11") && *u_ == w(2, "1")));
    }

    #[test]
    fn match_germs_decomposition_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let g = random_element(2, 8, &mut rng);
            let xi = pt(2, "(0)");
            let eta = pt(2, "1(10)");
            let h = match_germs(&g, &[xi.clone(), eta.clone()]).unwrap();
            let q = g.compose(&h.invert()).unwrap();
            let fix = q.fixed_interior();
            assert!(fix.contains_point(&h.evaluate_point(&xi).unwrap()).unwrap());
            assert!(fix.contains_point(&h.evaluate_point(&eta).unwrap()).unwrap());
        }
    }

    #[test]
    fn ping_pong_gadget_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let u = ClopenSet::from_cells(2, vec![w(2, "0")]);
        let mut done = 0;
        while done < 50 {
            // k supported inside C_0 with k² ≠ id
            let inner = random_element(2, 6, &mut rng);
            let mut pairs: Vec<(Word, Word)> = inner
                .pairs()
                .iter()
                .map(|(a, b)| (w(2, "0").concat(a.letters()), w(2, "0").concat(b.letters())))
                .collect();
            pairs.push((w(2, "1"), w(2, "1")));
            let k = PrefixMap::new(2, pairs).unwrap();
            if k.compose(&k).unwrap().is_identity() {
                continue;
            }
            let f = compress(&CompressTarget::Cells(u.clone()), &u.complement()).unwrap();
            assert!(f
                .evaluate_clopen(&u)
                .unwrap()
                .intersect(&u)
                .unwrap()
                .is_empty());
            let conj = f.compose(&k).unwrap().compose(&f.invert()).unwrap();
            let comm = conj
                .compose(&k).unwrap()
                .compose(&conj.invert()).unwrap()
                .compose(&k.invert()).unwrap();
            assert!(comm.is_identity());
            done += 1;
        }
    }
}
