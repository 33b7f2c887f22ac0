//! End-to-end acceptance suite. Each criterion prints one pass/fail line;
//! the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::Command;

use num_bigint::BigInt;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use cantorlab::dynamics::{
    brin_decomposition, compress, match_germs, random_element, transitivity_witness,
};
use cantorlab::flow::{
    build_dinfty, build_forbidden_system, build_substitution_system, chart_decomposition,
    first_return_partition, leaf_itinerary, leaf_restriction, smallest_return_time, CylinderX,
    TwoSidedPoint,
};
use cantorlab::perm::{find_displacement_config, fix_bound_audit, Perm, PermGroup};
use cantorlab::pl::{mixed_identity_witness, q, PLMap, PLMapJson, Q};
use cantorlab::prefix::ClopenSetJson;
use cantorlab::vd::{standard_generators, PrefixMapJson};
use cantorlab::{ClopenSet, CompressTarget, Error, EvPeriodicPoint, PrefixMap, Word};

type CResult = Result<(), String>;

fn s<E: Display>(e: E) -> String {
    e.to_string()
}

fn fail(msg: String) -> CResult {
    Err(msg)
}

fn main() {
    let criteria: Vec<(&str, fn() -> CResult)> = vec![
        ("group algebra: inverses and associativity", c01_group_algebra),
        ("finite-order/hyperbolic decomposition audit", c02_brin_audit),
        ("transitivity witnesses on cofinal tuples", c03_transitivity),
        ("compression witnesses", c04_compression),
        ("germ-pair covering", c05_germ_pairs),
        ("fixed-point bound over S_5 subgroup classes", c06_fix_bound),
        ("displacement configurations over S_9", c07_displacement),
        ("golden-mean return times vs independent enumeration", c08_return_times),
        ("chart decomposition and exact leaf cover", c09_chart_decomposition),
        ("mixed-identity pinning witnesses", c10_mixed_identity),
        ("leaf itinerary signs in the free dihedral toy system", c11_leaf_signs),
        ("serialization round-trips and byte-stable CLI output", c12_serialization),
    ];
    let mut failed = 0;
    for (i, (desc, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(()) => println!("criterion {:2}: pass — {desc}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:2}: FAIL — {desc}: {e}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn random_clopen<R: Rng>(d: u8, rng: &mut R, proper: bool) -> ClopenSet {
    loop {
        let depth = 3u32;
        let total = (d as usize).pow(depth);
        let mut cells = Vec::new();
        for i in 0..total {
            if rng.gen_bool(0.4) {
                let mut letters = Vec::new();
                let mut v = i;
                for _ in 0..depth {
                    letters.push((v % d as usize) as u8);
                    v /= d as usize;
                }
                letters.reverse();
                cells.push(Word::new(d, letters).unwrap());
            }
        }
        let c = ClopenSet::from_cells(d, cells);
        if c.is_empty() {
            continue;
        }
        if proper && c.is_full() {
            continue;
        }
        return c;
    }
}

fn random_point<R: Rng>(d: u8, rng: &mut R, pre_len: usize) -> EvPeriodicPoint {
    let pre: Vec<u8> = (0..pre_len).map(|_| rng.gen_range(0..d)).collect();
    let per_len = rng.gen_range(1..=3);
    let per: Vec<u8> = (0..per_len).map(|_| rng.gen_range(0..d)).collect();
    EvPeriodicPoint::new(Word::new(d, pre).unwrap(), Word::new(d, per).unwrap()).unwrap()
}

fn c01_group_algebra() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2u8, 3u8] {
        for _ in 0..250 {
            let g = random_element(d, 8, &mut rng);
            let prod = g.compose(&g.invert()).map_err(s)?;
            if !prod.is_identity() {
                return fail(format!("g ∘ g⁻¹ ≠ id for {:?}", PrefixMapJson::from(&g).pairs));
            }
        }
    }
    for _ in 0..200 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let a = random_element(d, 6, &mut rng);
        let b = random_element(d, 6, &mut rng);
        let c = random_element(d, 6, &mut rng);
        let left = a.compose(&b).map_err(s)?.compose(&c).map_err(s)?;
        let right = a.compose(&b.compose(&c).map_err(s)?).map_err(s)?;
        if left != right {
            return fail("associativity failed".into());
        }
    }
    Ok(())
}

fn near(a: &EvPeriodicPoint, b: &EvPeriodicPoint, depth: usize) -> bool {
    a.prefix(depth) == b.prefix(depth)
}

fn c02_brin_audit() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for d in [2u8, 3u8] {
        let gens = standard_generators(d);
        for _ in 0..100 {
            let len = rng.gen_range(1..=5);
            let mut g = PrefixMap::identity(d);
            for _ in 0..len {
                g = g.compose(&gens[rng.gen_range(0..gens.len())]).map_err(s)?;
            }
            let dec = brin_decomposition(&g).map_err(s)?;
            // exact partition
            if !dec.y.intersect(&dec.z).map_err(s)?.is_empty()
                || !dec.y.union(&dec.z).map_err(s)?.is_full()
            {
                return fail("Y, Z do not partition the space".into());
            }
            match dec.order_on_y {
                None => {
                    if !dec.y.is_empty() {
                        return fail("missing order on non-empty Y".into());
                    }
                }
                Some(n) => {
                    let fixed = g.power(n).map_err(s)?.fixed_interior();
                    if !dec.y.subset_of(&fixed).map_err(s)? {
                        return fail(format!("g^{n} does not fix Y cell-by-cell"));
                    }
                }
            }
            if dec.z.is_empty() {
                continue;
            }
            // infinite order: both limit sets populated
            if dec.att.is_empty() || dec.rep.is_empty() {
                return fail("hyperbolic part without attractors or repellers".into());
            }
            let ginv = g.invert();
            let mut tested = 0;
            let mut tries = 0;
            while tested < 30 && tries < 300 {
                tries += 1;
                let x = random_point(d, &mut rng, 15);
                if dec.y.contains_point(&x).map_err(s)? {
                    continue;
                }
                tested += 1;
                let mut fwd = x.clone();
                let mut ok_fwd = false;
                for _ in 0..50 {
                    fwd = g.evaluate_point(&fwd).map_err(s)?;
                    if dec.att.iter().any(|a| near(&fwd, a, 10)) {
                        ok_fwd = true;
                        break;
                    }
                }
                let mut bwd = x.clone();
                let mut ok_bwd = false;
                for _ in 0..50 {
                    bwd = ginv.evaluate_point(&bwd).map_err(s)?;
                    if dec.rep.iter().any(|r| near(&bwd, r, 10)) {
                        ok_bwd = true;
                        break;
                    }
                }
                if !ok_fwd || !ok_bwd {
                    return fail("sampled hyperbolic point failed to converge".into());
                }
            }
        }
    }
    Ok(())
}

fn c03_transitivity() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let base = random_point(d, &mut rng, 0);
        let k = rng.gen_range(1..=4);
        let tuple = |rng: &mut ChaCha8Rng| -> Vec<EvPeriodicPoint> {
            let mut out: Vec<EvPeriodicPoint> = Vec::new();
            while out.len() < k {
                let shift = rng.gen_range(0..3);
                let pre_len = rng.gen_range(0..=5);
                let pre: Vec<u8> = (0..pre_len).map(|_| rng.gen_range(0..d)).collect();
                let p = base.shift(shift).prepend(&Word::new(d, pre).unwrap()).unwrap();
                if !out.contains(&p) {
                    out.push(p);
                }
            }
            out
        };
        let src = tuple(&mut rng);
        let dst = tuple(&mut rng);
        let g = transitivity_witness(&src, &dst).map_err(s)?;
        for (a, b) in src.iter().zip(&dst) {
            if &g.evaluate_point(a).map_err(s)? != b {
                return fail(format!("witness moves {a} off its target {b}"));
            }
        }
    }
    Ok(())
}

fn c04_compression() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..200 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let c = random_clopen(d, &mut rng, true);
        let u = random_clopen(d, &mut rng, false);
        let g = compress(&CompressTarget::Cells(c.clone()), &u).map_err(s)?;
        let image = g.evaluate_clopen(&c).map_err(s)?;
        if !image.subset_of(&u).map_err(s)? {
            return fail("compressed image escapes the neighbourhood".into());
        }
    }
    Ok(())
}

fn c05_germ_pairs() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let g = random_element(d, 8, &mut rng);
        let pre = rng.gen_range(0..4);
        let xi = random_point(d, &mut rng, pre);
        let pre = rng.gen_range(0..4);
        let mut eta = random_point(d, &mut rng, pre);
        while eta == xi {
            let pre = rng.gen_range(0..4);
            eta = random_point(d, &mut rng, pre);
        }
        let pts = [xi.clone(), eta.clone()];
        let h = match_germs(&g, &pts).map_err(s)?;
        for p in &pts {
            if !g.germ_equal(&h, p).map_err(s)? {
                return fail(format!("germ mismatch at {p}"));
            }
        }
        let k = g.compose(&h.invert()).map_err(s)?;
        let fixed = k.fixed_interior();
        for p in &pts {
            let moved = h.evaluate_point(p).map_err(s)?;
            if !fixed.contains_point(&moved).map_err(s)? {
                return fail(format!("g·h⁻¹ moves the relocated point {moved}"));
            }
        }
    }
    Ok(())
}

fn c06_fix_bound() -> CResult {
    let audit = fix_bound_audit(5).map_err(s)?;
    if audit.violations != 0 {
        return fail(format!("{} violations among {} classes", audit.violations, audit.classes));
    }
    if audit.classes < 10 {
        return fail("suspiciously few subgroup classes".into());
    }
    Ok(())
}

fn c07_displacement() -> CResult {
    let s9 = PermGroup::symmetric(9).map_err(s)?;
    for sigma in s9.elements().map_err(s)? {
        let order_two = !sigma.is_identity() && sigma.compose(sigma).map_err(s)?.is_identity();
        let result = find_displacement_config(std::slice::from_ref(sigma));
        if sigma.is_identity() {
            if !matches!(result, Err(Error::IdentityElement)) {
                return fail("identity not rejected".into());
            }
        } else if order_two {
            if !matches!(result, Err(Error::OrderTwoElement { .. })) {
                return fail(format!("order-two element {sigma} not rejected"));
            }
        } else {
            match result.map_err(s)? {
                Some(cfg) => {
                    let report = cantorlab::perm::check_displacement_config(
                        std::slice::from_ref(sigma),
                        &cfg,
                    )
                    .map_err(s)?;
                    if !report.ok {
                        return fail(format!(
                            "configuration for {sigma} rejected: {:?}",
                            report.violation
                        ));
                    }
                }
                None => return fail(format!("no configuration found for {sigma}")),
            }
        }
    }
    Ok(())
}

fn fibonacci() -> cantorlab::StoneSystem {
    let rules: BTreeMap<char, String> = [('a', "ab".to_string()), ('b', "a".to_string())].into();
    build_substitution_system(rules).unwrap()
}

fn c08_return_times() -> CResult {
    // independent oracle: iterate the substitution directly on one word and
    // read factors and occurrence gaps off a long prefix of the fixed point
    let mut w = String::from("a");
    while w.len() < 1000 {
        w = w.chars().map(|c| if c == 'a' { "ab" } else { "a" }).collect();
    }
    let chars: Vec<char> = w.chars().collect();
    let occurrences = |letter: char| -> Vec<usize> {
        chars.iter().enumerate().filter(|(_, c)| **c == letter).map(|(i, _)| i).collect()
    };
    let gaps = |pos: &[usize]| -> Vec<usize> {
        let mut g: Vec<usize> = pos.windows(2).map(|p| p[1] - p[0]).collect();
        g.sort();
        g.dedup();
        g
    };
    let a_gaps = gaps(&occurrences('a'));
    let b_gaps = gaps(&occurrences('b'));
    if a_gaps.iter().min() != Some(&1) || b_gaps != vec![2, 3] {
        return fail(format!("oracle gaps unexpected: a {a_gaps:?}, b {b_gaps:?}"));
    }

    let sys = fibonacci();
    // the library language agrees with the oracle's factor sets to length 20
    for n in 1..=20 {
        let mut oracle: Vec<String> = chars
            .windows(n)
            .map(|f| f.iter().collect::<String>())
            .collect();
        oracle.sort();
        oracle.dedup();
        let lib: Vec<String> = sys.legal_words(n).map_err(s)?.iter().cloned().collect();
        if oracle != lib {
            return fail(format!("legal words of length {n} disagree with the oracle"));
        }
    }
    let ca = CylinderX::new(&sys, "a", 0).map_err(s)?;
    let cb = CylinderX::new(&sys, "b", 0).map_err(s)?;
    if smallest_return_time(&sys, &ca).map_err(s)? != 1 {
        return fail("τ over [a] should be 1".into());
    }
    if smallest_return_time(&sys, &cb).map_err(s)? != 2 {
        return fail("τ over [b] should be 2".into());
    }
    let cells = first_return_partition(&sys, &ca, 16).map_err(s)?;
    let got: Vec<(String, usize)> = cells.iter().map(|(c, t)| (c.word.clone(), *t)).collect();
    if got != vec![("aa".to_string(), 1), ("ab".to_string(), 2)] {
        return fail(format!("first-return cells unexpected: {got:?}"));
    }
    Ok(())
}

fn c09_chart_decomposition() -> CResult {
    let sys = fibonacci();
    let ca = CylinderX::new(&sys, "a", 0).map_err(s)?;
    let j = (q(-1, 4), q(1, 4));
    let charts = chart_decomposition(&sys, &ca, (&j.0, &j.1), 16).map_err(s)?;
    let got: Vec<(String, Q, Q)> = charts
        .iter()
        .map(|ch| (ch.c.word.clone(), ch.i.0.clone(), ch.i.1.clone()))
        .collect();
    let want = vec![
        ("aa".to_string(), q(1, 4), q(3, 4)),
        ("ab".to_string(), q(1, 4), q(7, 4)),
    ];
    if got != want {
        return fail(format!("chart intervals unexpected: {got:?}"));
    }

    // exact cover of 100 sampled leaf times: counting the closed base chart
    // and the open complementary charts with half-open bookkeeping, every
    // sample lies in exactly one box
    let rules: BTreeMap<char, String> = [('a', "ab".to_string()), ('b', "a".to_string())].into();
    let x = TwoSidedPoint::substitutive(rules, 'a', 'a', 2).map_err(s)?;
    for k in 0..100 {
        let t = q(9 * k - 200, 100); // spreads over [−2, 7)
        let mut hits = 0;
        for n in -5i64..12 {
            let qn = Q::from_integer(BigInt::from(n));
            if x.letter_at(n).map_err(s)? == 'a' {
                // base chart over the visit at n, interval [−1/4, 1/4)
                if t >= &qn + &j.0 && t < &qn + &j.1 {
                    hits += 1;
                }
                for ch in &charts {
                    let m = ch.c.word.chars().enumerate().all(|(i, c)| {
                        x.letter_at(n + i as i64).map(|l| l == c).unwrap_or(false)
                    });
                    if m && t >= &qn + &ch.i.0 && t < &qn + &ch.i.1 {
                        hits += 1;
                    }
                }
            }
        }
        if hits != 1 {
            return fail(format!("leaf time {t} covered {hits} times"));
        }
    }
    Ok(())
}

fn c10_mixed_identity() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..50 {
        let k = rng.gen_range(1..=3);
        let exponents: Vec<i64> = (0..k)
            .map(|_| {
                let n = rng.gen_range(1..=2);
                if rng.gen_bool(0.5) {
                    n
                } else {
                    -n
                }
            })
            .collect();
        let gs: Vec<PLMap> = (0..k)
            .map(|_| {
                // unboundedly positive: a gentle bump followed by a
                // positive translation part in the tail
                let p = q(rng.gen_range(0..20), 1);
                let c = q(rng.gen_range(1..=4), rng.gen_range(1..=2));
                let bump = PLMap::line(vec![
                    (p.clone(), p.clone()),
                    (&p + q(2, 1), &p + q(3, 1)),
                ])
                .unwrap();
                PLMap::translation(c).compose(&bump).unwrap()
            })
            .collect();
        let w = mixed_identity_witness(&exponents, &gs, (&q(0, 1), &q(500, 1))).map_err(s)?;
        if !w.certified {
            return fail("witness not certified".into());
        }
        if w.value <= w.t[0] || (w.t.len() > 1 && w.value < w.t[w.t.len() - 1]) {
            return fail(format!("value {} does not clear the pin chain", w.value));
        }
    }
    Ok(())
}

fn c11_leaf_signs() -> CResult {
    let sys = build_forbidden_system("aAbB", &["aA", "Aa", "bB", "Bb"]).map_err(s)?;
    let iota: BTreeMap<char, char> = [('a', 'A'), ('A', 'a'), ('b', 'B'), ('B', 'b')].into();
    let dsys = build_dinfty(sys, &iota, 8).map_err(s)?;
    let x = TwoSidedPoint::periodic("abAB", "abAB").map_err(s)?;
    let c = CylinderX::new(&dsys.base, "a", 0).map_err(s)?;
    let i = (q(-1, 4), q(1, 4));
    let trs = leaf_itinerary(&dsys, &x, (&q(-40, 1), &q(40, 1)), &c, (&i.0, &i.1)).map_err(s)?;
    if !trs.iter().any(|t| t.sign > 0) || !trs.iter().any(|t| t.sign < 0) {
        return fail("window misses one orientation".into());
    }
    // the flow element supported on the chart acts by f; the leaf reads its
    // conjugate, which gains time on + traversals and loses it on −
    let f = PLMap::interval(vec![
        (q(-1, 4), q(-1, 4)),
        (q(0, 1), q(1, 8)),
        (q(1, 4), q(1, 4)),
    ])
    .map_err(s)?;
    for tr in &trs {
        let r = leaf_restriction(&f, tr).map_err(s)?;
        let mid = (&tr.lo + &tr.hi) / Q::from_integer(BigInt::from(2));
        let v = r.eval(&mid).map_err(s)?;
        if (tr.sign > 0 && v <= mid) || (tr.sign < 0 && v >= mid) {
            return fail(format!("orientation violated on traversal n = {}", tr.n));
        }
        if tr.sign < 0 {
            let n = Q::from_integer(BigInt::from(tr.n));
            // reflected: the left endpoint comes from I's right endpoint
            if tr.lo != -i.1.clone() - &n || tr.hi != -i.0.clone() - &n {
                return fail("reflected endpoint correspondence broken".into());
            }
        }
    }
    Ok(())
}

fn roundtrip_count() -> usize {
    500
}

fn c12_serialization() -> CResult {
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let n = roundtrip_count();
    // prefix-replacement elements
    for _ in 0..n {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let g = random_element(d, 8, &mut rng);
        let text = serde_json::to_string(&PrefixMapJson::from(&g)).map_err(s)?;
        let back: PrefixMapJson = serde_json::from_str(&text).map_err(s)?;
        if back.build().map_err(s)? != g {
            return fail("prefix map round-trip failed".into());
        }
    }
    // clopen sets
    for _ in 0..n {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let c = random_clopen(d, &mut rng, false);
        let text = serde_json::to_string(&ClopenSetJson::from(&c)).map_err(s)?;
        let back: ClopenSetJson = serde_json::from_str(&text).map_err(s)?;
        if !back.build().map_err(s)?.set_equals(&c).map_err(s)? {
            return fail("clopen set round-trip failed".into());
        }
    }
    // eventually periodic points
    for _ in 0..n {
        let d = if rng.gen_bool(0.5) { 2 } else { 3 };
        let pre = rng.gen_range(0..5);
        let p = random_point(d, &mut rng, pre);
        if EvPeriodicPoint::parse(d, &p.to_string()).map_err(s)? != p {
            return fail("point round-trip failed".into());
        }
    }
    // PL maps, interval and line
    for _ in 0..n {
        let f = if rng.gen_bool(0.5) {
            let mut xs = vec![q(0, 1)];
            let mut ys = vec![q(0, 1)];
            let cuts = rng.gen_range(0..=3);
            for _ in 0..cuts {
                xs.push(q(rng.gen_range(1..32), 32));
                ys.push(q(rng.gen_range(1..32), 32));
            }
            xs.push(q(1, 1));
            ys.push(q(1, 1));
            xs.sort();
            xs.dedup();
            ys.sort();
            ys.dedup();
            while ys.len() > xs.len() {
                ys.remove(1);
            }
            while xs.len() > ys.len() {
                xs.remove(1);
            }
            PLMap::interval(xs.into_iter().zip(ys).collect()).map_err(s)?
        } else {
            PLMap::translation(q(rng.gen_range(-8..8), 2))
        };
        let text = serde_json::to_string(&PLMapJson::from(&f)).map_err(s)?;
        let back: PLMapJson = serde_json::from_str(&text).map_err(s)?;
        if back.build().map_err(s)? != f {
            return fail("PL map round-trip failed".into());
        }
    }
    // permutations
    for _ in 0..n {
        let deg = rng.gen_range(1..=9);
        let mut images: Vec<usize> = (0..deg).collect();
        images.shuffle(&mut rng);
        let p = Perm::new(images).map_err(s)?;
        let text = serde_json::to_string(&p).map_err(s)?;
        let back: Perm = serde_json::from_str(&text).map_err(s)?;
        if back != p {
            return fail("permutation round-trip failed".into());
        }
        if Perm::parse_cycles(deg, &p.to_string()).map_err(s)? != p {
            return fail("cycle notation round-trip failed".into());
        }
    }
    // two-sided points
    for _ in 0..n {
        let p = if rng.gen_bool(0.5) {
            let word = |rng: &mut ChaCha8Rng| -> String {
                (0..rng.gen_range(1..5))
                    .map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' })
                    .collect()
            };
            TwoSidedPoint::periodic(&word(&mut rng), &word(&mut rng)).map_err(s)?
        } else {
            let rules: BTreeMap<char, String> =
                [('a', "ab".to_string()), ('b', "a".to_string())].into();
            TwoSidedPoint::substitutive(rules, 'a', 'a', 2).map_err(s)?
        };
        let text = serde_json::to_string(&p).map_err(s)?;
        let back: TwoSidedPoint = serde_json::from_str(&text).map_err(s)?;
        if back != p {
            return fail("two-sided point round-trip failed".into());
        }
    }
    golden_cli()
}

fn golden_cli() -> CResult {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("golden");
    std::fs::create_dir_all(&dir).map_err(s)?;
    let write = |name: &str, text: &str| -> CResult {
        std::fs::write(dir.join(name), text).map_err(s)
    };
    write("a.json", r#"{"d":2,"pairs":[["0","00"],["10","01"],["11","1"]]}"#)?;
    write("fib.json", r#"{"kind":"substitution","rules":{"a":"ab","b":"a"}}"#)?;
    write(
        "f.json",
        r#"{"kind":"interval","b":"1","pieces":[["0","1/2","0"],["1/2","1","-1/4"],["3/4","2","-1"]]}"#,
    )?;
    write(
        "signs.json",
        r#"{"system":{"kind":"forbidden","alphabet":"aAbB","words":["aA","Aa","bB","Bb"]},"iota":{"a":"A","A":"a","b":"B","B":"b"},"depth":8,"point":{"kind":"periodic","left":"abAB","right":"abAB"},"window":["-10","10"],"cylinder":{"word":"a","position":0},"interval":["-1/4","1/4"]}"#,
    )?;

    let run = |args: &[&str]| -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_cantorlab"))
            .args(args)
            .current_dir(&dir)
            .output()
            .map_err(s)?;
        if !out.status.success() {
            return Err(format!(
                "command {args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        String::from_utf8(out.stdout).map_err(s)
    };

    let cases: Vec<(Vec<&str>, Option<&str>)> = vec![
        (
            vec!["vd", "brin", "a.json", "--json"],
            Some(r#"{"att":["(0)"],"certificate":[["0","00"],["11","1"]],"order_on_y":null,"rep":["(1)"],"verified":true,"y":{"cells":[],"d":2},"z":{"cells":["ε"],"d":2}}"#),
        ),
        (
            vec!["vd", "compose", "a.json", "a.json", "--json"],
            Some(r#"{"d":2,"pairs":[["0","000"],["10","001"],["110","01"],["111","1"]]}"#),
        ),
        (
            vec!["flow", "decompose", "fib.json", "--word", "a", "--from=-1/4", "--to=1/4", "--json"],
            Some(r#"{"charts":[{"interval":["1/4","3/4"],"time":1,"word":"aa"},{"interval":["1/4","7/4"],"time":2,"word":"ab"}]}"#),
        ),
        (
            vec!["vd", "random", "--seed", "7", "--json"],
            Some(r#"{"d":2,"pairs":[["0","1"],["1","0"]]}"#),
        ),
        (
            vec!["pl", "compose", "f.json", "f.json", "--json"],
            Some(r#"{"b":"1","kind":"interval","pieces":[["0","1/4","0"],["1/2","1/2","-1/8"],["3/4","2","-5/4"],["7/8","4","-3"]]}"#),
        ),
        (vec!["flow", "leaf-signs", "signs.json", "--json"], None),
        (vec!["perm", "audit-fixbound", "--degree", "4", "--json"], None),
    ];
    for (args, expected) in &cases {
        let first = run(args)?;
        let second = run(args)?;
        if first != second {
            return fail(format!("output of {args:?} is not byte-stable"));
        }
        if let Some(want) = expected {
            if first.trim_end() != *want {
                return fail(format!("golden mismatch for {args:?}: got {first}"));
            }
        }
    }
    let audit = run(&["perm", "audit-fixbound", "--degree", "4", "--json"])?;
    if !audit.contains("\"violations\":0") {
        return fail("degree-4 audit reports violations".into());
    }
    Ok(())
}
