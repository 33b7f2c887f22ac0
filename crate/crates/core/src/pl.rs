//! Exact piecewise-linear increasing homeomorphisms with rational data, on
//! compact intervals (endpoints fixed) or on the line (identity outside a
//! compact window, up to a translation part carried by the slope-1 tails).
//!
//! A map is stored as the strictly increasing list of its graph vertices
//! `(x, f(x))`; inversion swaps coordinates and composition merges vertex
//! sets, so every operation stays exact.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|e| Error::Parse(format!("rational {s:?}: {e}")))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Domain {
    /// compact interval with both endpoints fixed by the map
    Interval(Q, Q),
    Line,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PLMap {
    domain: Domain,
    /// graph vertices, strictly increasing in both coordinates; for an
    /// interval domain the first and last are `(a,a)` and `(b,b)`
    points: Vec<(Q, Q)>,
}

fn check_increasing(points: &[(Q, Q)]) -> Result<()> {
    for w in points.windows(2) {
        if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
            return Err(Error::BadPlMap(format!(
                "graph vertices not strictly increasing near x = {}",
                w[1].0
            )));
        }
    }
    Ok(())
}

/// Drop interior vertices lying on the segment of their neighbours.
fn drop_collinear(points: &mut Vec<(Q, Q)>) {
    let mut i = 1;
    while i + 1 < points.len() {
        let (x0, y0) = points[i - 1].clone();
        let (x1, y1) = points[i].clone();
        let (x2, y2) = points[i + 1].clone();
        if (&y1 - &y0) * (&x2 - &x1) == (&y2 - &y1) * (&x1 - &x0) {
            points.remove(i);
        } else {
            i += 1;
        }
    }
}

impl PLMap {
    /// A map of a compact interval fixing both endpoints. `points` are the
    /// graph vertices and must start at `(a,a)` and end at `(b,b)`.
    pub fn interval(points: Vec<(Q, Q)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::BadPlMap("an interval map needs at least two vertices".into()));
        }
        check_increasing(&points)?;
        let (a, fa) = points.first().unwrap().clone();
        let (b, fb) = points.last().unwrap().clone();
        if a != fa || b != fb {
            return Err(Error::BadPlMap("interval endpoints must be fixed".into()));
        }
        let mut points = points;
        drop_collinear(&mut points);
        Ok(PLMap { domain: Domain::Interval(a, b), points })
    }

    pub fn identity_on(a: Q, b: Q) -> Result<Self> {
        PLMap::interval(vec![(a.clone(), a), (b.clone(), b)])
    }

    /// A line map: slope-1 tails to the left of the first vertex and to the
    /// right of the last. No vertices means the identity.
    pub fn line(points: Vec<(Q, Q)>) -> Result<Self> {
        check_increasing(&points)?;
        let mut points = points;
        drop_collinear(&mut points);
        // absorb vertices collinear with a tail
        while points.len() >= 2 {
            let slope_is_one = |p: &(Q, Q), r: &(Q, Q)| &r.1 - &p.1 == &r.0 - &p.0;
            if slope_is_one(&points[0], &points[1]) {
                points.remove(0);
            } else if slope_is_one(&points[points.len() - 2], &points[points.len() - 1]) {
                points.pop();
            } else {
                break;
            }
        }
        if points.len() == 1 {
            // a single vertex is a pure translation; normalize it
            let (x, y) = points.pop().unwrap();
            let c = y - x;
            if !c.is_zero() {
                points.push((Q::zero(), c));
            }
        }
        Ok(PLMap { domain: Domain::Line, points })
    }

    pub fn identity_line() -> Self {
        PLMap { domain: Domain::Line, points: vec![] }
    }

    pub fn translation(c: Q) -> Self {
        PLMap::line(vec![(Q::zero(), c)]).expect("single vertex")
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn points(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn is_identity(&self) -> bool {
        match &self.domain {
            Domain::Interval(..) => self.points.len() == 2,
            Domain::Line => self.points.is_empty(),
        }
    }

    fn same_domain(&self, other: &PLMap) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::PlDomainMismatch(format!(
                "{:?} vs {:?}",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &Q) -> Result<Q> {
        match &self.domain {
            Domain::Interval(a, b) => {
                if x < a || x > b {
                    return Err(Error::PlDomainMismatch(format!(
                        "{x} outside [{a}, {b}]"
                    )));
                }
            }
            Domain::Line => {
                if self.points.is_empty() {
                    return Ok(x.clone());
                }
                if x <= &self.points[0].0 {
                    return Ok(x + (&self.points[0].1 - &self.points[0].0));
                }
                let last = self.points.last().unwrap();
                if x >= &last.0 {
                    return Ok(x + (&last.1 - &last.0));
                }
            }
        }
        let i = self.points.partition_point(|(px, _)| px <= x);
        let (x0, y0) = &self.points[i - 1];
        if x == x0 {
            return Ok(y0.clone());
        }
        let (x1, y1) = &self.points[i];
        Ok(y0 + (x - x0) * (y1 - y0) / (x1 - x0))
    }

    pub fn invert(&self) -> PLMap {
        let points = self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        PLMap { domain: self.domain.clone(), points }
    }

    /// `x ↦ self(other(x))`.
    pub fn compose(&self, other: &PLMap) -> Result<PLMap> {
        self.same_domain(other)?;
        let oinv = other.invert();
        let mut xs: Vec<Q> = other.points.iter().map(|(x, _)| x.clone()).collect();
        for (x, _) in &self.points {
            xs.push(oinv.eval(x)?);
        }
        xs.sort();
        xs.dedup();
        let points: Vec<(Q, Q)> = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&other.eval(&x)?)?;
                Ok((x, y))
            })
            .collect::<Result<_>>()?;
        match &self.domain {
            Domain::Interval(..) => PLMap::interval(points),
            Domain::Line => PLMap::line(points),
        }
    }

    pub fn power(&self, n: i64) -> Result<PLMap> {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut acc = match &self.domain {
            Domain::Interval(a, b) => PLMap::identity_on(a.clone(), b.clone())?,
            Domain::Line => PLMap::identity_line(),
        };
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Pieces as (breakpoint, slope, offset), the map being
    /// `x ↦ slope·x + offset` from that breakpoint up to the next one (for
    /// line maps, the last triple is the right tail).
    pub fn pieces(&self) -> Vec<(Q, Q, Q)> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            let offset = &w[0].1 - &slope * &w[0].0;
            out.push((w[0].0.clone(), slope, offset));
        }
        if self.domain == Domain::Line {
            if let Some((x, y)) = self.points.last() {
                out.push((x.clone(), Q::one(), y - x));
            }
        }
        out
    }

    /// True iff every breakpoint and offset is dyadic and every slope is an
    /// integer power of 2 (the tails of a line map count, so a non-dyadic
    /// translation part fails).
    pub fn is_dyadic(&self) -> bool {
        let left_tail_offset = match (&self.domain, self.points.first()) {
            (Domain::Line, Some((x, y))) => Some(y - x),
            _ => None,
        };
        if let Some(c) = left_tail_offset {
            if !dyadic(&c) {
                return false;
            }
        }
        self.pieces().into_iter().all(|(x, slope, offset)| {
            dyadic(&x) && power_of_two_ratio(&slope) && dyadic(&offset)
        })
    }
}

fn dyadic(x: &Q) -> bool {
    x.denom().magnitude().count_ones() == 1
}

fn power_of_two_ratio(x: &Q) -> bool {
    x.is_positive()
        && x.numer().magnitude().count_ones() == 1
        && x.denom().magnitude().count_ones() == 1
}

impl fmt::Debug for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.domain {
            Domain::Interval(a, b) => write!(f, "PL[{a},{b}]")?,
            Domain::Line => write!(f, "PL(line)")?,
        }
        write!(f, "{{")?;
        for (i, (x, y)) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}↦{y}")?;
        }
        write!(f, "}}")
    }
}

/// A maximal interval on which `f(x) − x` keeps one sign. Nonzero-sign
/// intervals are open; zero stretches may be single points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedInterval {
    pub lo: Q,
    pub hi: Q,
    pub sign: i8,
}

/// The exact sign pattern of `f(x) − x` over `[lo, hi]` as maximal runs.
pub fn crossing_profile(f: &PLMap, lo: &Q, hi: &Q) -> Result<Vec<SignedInterval>> {
    if lo >= hi {
        return Err(Error::BadPlMap(format!("empty window [{lo}, {hi}]")));
    }
    if let Domain::Interval(a, b) = &f.domain {
        if lo < a || hi > b {
            return Err(Error::PlDomainMismatch(format!(
                "window [{lo}, {hi}] outside [{a}, {b}]"
            )));
        }
    }
    // cut points: window ends, vertices inside, and exact roots of f(x) = x
    let mut cuts: Vec<Q> = vec![lo.clone(), hi.clone()];
    for (x, _) in &f.points {
        if x > lo && x < hi {
            cuts.push(x.clone());
        }
    }
    let segment_root = |x0: &Q, x1: &Q| -> Result<Option<Q>> {
        let d0 = f.eval(x0)? - x0;
        let d1 = f.eval(x1)? - x1;
        if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
            // linear on vertex-free segments, so interpolate the exact root
            let r = x0 + &d0 * (x1 - x0) / (&d0 - &d1);
            return Ok(Some(r));
        }
        Ok(None)
    };
    cuts.sort();
    cuts.dedup();
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        if let Some(r) = segment_root(&w[0], &w[1])? {
            roots.push(r);
        }
    }
    cuts.extend(roots);
    cuts.sort();
    cuts.dedup();
    // alternate point / open-interval entities with their signs
    let mut entities: Vec<(Q, Q, i8)> = Vec::new();
    for (i, x) in cuts.iter().enumerate() {
        if i > 0 {
            let mid = (&cuts[i - 1] + x) / q(2, 1);
            let d = f.eval(&mid)? - &mid;
            entities.push((cuts[i - 1].clone(), x.clone(), sign_of(&d)));
        }
        let d = f.eval(x)? - x;
        entities.push((x.clone(), x.clone(), sign_of(&d)));
    }
    // merge equal-sign neighbours into maximal runs
    let mut out: Vec<SignedInterval> = Vec::new();
    for (a, b, s) in entities {
        match out.last_mut() {
            Some(last) if last.sign == s && last.hi == a => last.hi = b,
            _ => out.push(SignedInterval { lo: a, hi: b, sign: s }),
        }
    }
    Ok(out)
}

fn sign_of(d: &Q) -> i8 {
    if d.is_positive() {
        1
    } else if d.is_negative() {
        -1
    } else {
        0
    }
}

/// A possibly unbounded open rational interval; `None` means infinite.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SupportInterval {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
}

/// The maximal open intervals where `f(x) ≠ x`.
pub fn support_components(f: &PLMap) -> Result<Vec<SupportInterval>> {
    let (lo, hi, tail_left, tail_right) = match &f.domain {
        Domain::Interval(a, b) => (a.clone(), b.clone(), 0i8, 0i8),
        Domain::Line => {
            if f.points.is_empty() {
                return Ok(vec![]);
            }
            let first = &f.points[0];
            let last = f.points.last().unwrap();
            let (lo, hi) = if f.points.len() == 1 {
                (&first.0 - Q::one(), &first.0 + Q::one())
            } else {
                (first.0.clone(), last.0.clone())
            };
            (lo, hi, sign_of(&(&first.1 - &first.0)), sign_of(&(&last.1 - &last.0)))
        }
    };
    let profile = crossing_profile(f, &lo, &hi)?;
    let mut out: Vec<SupportInterval> = Vec::new();
    let mut open: Option<Q> = None;
    let mut started_at_left_tail = false;
    for (i, seg) in profile.iter().enumerate() {
        if seg.sign != 0 {
            if open.is_none() {
                let from_tail = i == 0 && tail_left != 0;
                started_at_left_tail = from_tail;
                open = Some(seg.lo.clone());
            }
        } else if seg.lo < seg.hi || (seg.lo == seg.hi && open.is_some()) {
            if let Some(start) = open.take() {
                out.push(SupportInterval {
                    lo: if started_at_left_tail { None } else { Some(start) },
                    hi: Some(seg.lo.clone()),
                });
            }
        }
    }
    if let Some(start) = open {
        out.push(SupportInterval {
            lo: if started_at_left_tail { None } else { Some(start) },
            hi: if tail_right != 0 { None } else { Some(hi) },
        });
    }
    Ok(out)
}

/// Outcome of the disjoint-conjugate construction: either the conjugates
/// together with the exact commutation check, or the blocking pair `(x, y)`
/// with `g(x) < y`.
#[derive(Clone, Debug)]
pub struct DisjointConjugate {
    pub ok: bool,
    pub conjugates: Vec<PLMap>,
    pub commute_verified: bool,
    pub blocking: Option<(Q, Q)>,
}

/// Conjugate every `h` in `hs` off its own support: with `[x, y]` the
/// tightest interval containing all supports, `g(x) ≥ y` pushes each
/// conjugate support beyond `y`, making all commutators trivial.
pub fn disjoint_conjugate_witness(hs: &[PLMap], g: &PLMap) -> Result<DisjointConjugate> {
    if hs.is_empty() {
        return Err(Error::BadPlMap("no maps supplied".into()));
    }
    for h in hs {
        h.same_domain(g)?;
    }
    let mut left: Option<Q> = None;
    let mut right: Option<Q> = None;
    for h in hs {
        for comp in support_components(h)? {
            let (lo, hi) = match (comp.lo, comp.hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(Error::BadPlMap("unbounded support".into())),
            };
            left = Some(match left {
                Some(l) => l.min(lo),
                None => lo,
            });
            right = Some(match right {
                Some(r) => r.max(hi),
                None => hi,
            });
        }
    }
    let (x, y) = match (left, right) {
        (Some(x), Some(y)) => (x, y),
        // every map is the identity: conjugation is vacuous
        _ => {
            return Ok(DisjointConjugate {
                ok: true,
                conjugates: hs.to_vec(),
                commute_verified: true,
                blocking: None,
            })
        }
    };
    if g.eval(&x)? < y {
        return Ok(DisjointConjugate {
            ok: false,
            conjugates: vec![],
            commute_verified: false,
            blocking: Some((x, y)),
        });
    }
    let ginv = g.invert();
    let conjugates: Vec<PLMap> = hs
        .iter()
        .map(|h| g.compose(h)?.compose(&ginv))
        .collect::<Result<_>>()?;
    let mut commute = true;
    for c in &conjugates {
        for h in hs {
            if c.compose(h)? != h.compose(c)? {
                commute = false;
            }
        }
    }
    Ok(DisjointConjugate { ok: true, conjugates, commute_verified: commute, blocking: None })
}

/// Witness data for a mixed-identity instance: the word
/// `w(h) = h^{n_k} g_k ⋯ h^{n_1} g_1` with the constructed `h` moves `t₁`
/// at least to `t_k`.
#[derive(Clone, Debug)]
pub struct MixedIdentityWitness {
    pub h: PLMap,
    pub t: Vec<Q>,
    pub p: Vec<Q>,
    /// exact value of `w(h)(t₁)`
    pub value: Q,
    /// `w(h)(t₁) ≥ t_k > t₁` (for k = 1: `w(h)(t₁) ≠ t₁`)
    pub certified: bool,
}

/// Build the pinning homeomorphism of the mixed-identity argument: choose
/// `t₁ < g₁(t₁) < t₂ < … < t_k < g_k(t_k)` inside the window, fix the
/// midpoints `pᵢ`, and tilt each block so that `h^{nᵢ}(gᵢ(tᵢ)) > tᵢ₊₁`.
pub fn mixed_identity_witness(
    exponents: &[i64],
    gs: &[PLMap],
    window: (&Q, &Q),
) -> Result<MixedIdentityWitness> {
    let k = exponents.len();
    if k == 0 || gs.len() != k {
        return Err(Error::SizeMismatch { domain: exponents.len(), range: gs.len() });
    }
    if exponents.iter().any(|&n| n == 0) {
        return Err(Error::BadPlMap("exponents must be non-zero".into()));
    }
    for g in gs {
        if g.domain() != &Domain::Line {
            return Err(Error::PlDomainMismatch("mixed-identity inputs live on the line".into()));
        }
    }
    // greedy chain: each tᵢ strictly beyond the previous gᵢ₋₁(tᵢ₋₁)
    let mut t: Vec<Q> = Vec::with_capacity(k);
    let mut bound = window.0.clone();
    for (i, g) in gs.iter().enumerate() {
        let profile = crossing_profile(g, window.0, window.1)?;
        let mut found = None;
        for seg in &profile {
            if seg.sign == 1 && seg.hi > bound {
                let lo = if seg.lo > bound { seg.lo.clone() } else { bound.clone() };
                found = Some((&lo + &seg.hi) / q(2, 1));
                break;
            }
        }
        let ti = found.ok_or(Error::NoPositiveCrossing { index: i })?;
        bound = g.eval(&ti)?;
        t.push(ti);
    }
    let p: Vec<Q> = t
        .iter()
        .zip(gs)
        .map(|(ti, g)| Ok((ti + g.eval(ti)?) / q(2, 1)))
        .collect::<Result<_>>()?;
    let h = if k == 1 {
        PLMap::identity_line()
    } else {
        let mut vertices = vec![(p[0].clone(), p[0].clone())];
        for i in 0..k - 1 {
            let gi_ti = gs[i].eval(&t[i])?;
            if exponents[i] > 0 {
                // push gᵢ(tᵢ) past tᵢ₊₁, staying below pᵢ₊₁
                vertices.push((gi_ti, (&t[i + 1] + &p[i + 1]) / q(2, 1)));
            } else {
                // pull tᵢ₊₁ below gᵢ(tᵢ), staying above pᵢ
                vertices.push((t[i + 1].clone(), (&p[i] + &gi_ti) / q(2, 1)));
            }
            vertices.push((p[i + 1].clone(), p[i + 1].clone()));
        }
        PLMap::line(vertices)?
    };
    let mut value = t[0].clone();
    for (i, g) in gs.iter().enumerate() {
        value = g.eval(&value)?;
        value = h.power(exponents[i])?.eval(&value)?;
    }
    let certified = if k == 1 { value != t[0] } else { value >= t[k - 1] && t[k - 1] > t[0] };
    Ok(MixedIdentityWitness { h, t, p, value, certified })
}

/// Wire format: pieces as `[breakpoint, slope, offset]` fraction-string
/// triples; interval maps carry the right endpoint, line maps end with
/// their right tail piece.
#[derive(Serialize, Deserialize)]
pub struct PLMapJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    pub pieces: Vec<(String, String, String)>,
}

impl From<&PLMap> for PLMapJson {
    fn from(f: &PLMap) -> Self {
        let pieces = f
            .pieces()
            .into_iter()
            .map(|(x, s, o)| (x.to_string(), s.to_string(), o.to_string()))
            .collect();
        match &f.domain {
            Domain::Interval(_, b) => PLMapJson {
                kind: "interval".into(),
                b: Some(b.to_string()),
                pieces,
            },
            Domain::Line => PLMapJson { kind: "line".into(), b: None, pieces },
        }
    }
}

impl PLMapJson {
    pub fn build(&self) -> Result<PLMap> {
        let mut triples = Vec::with_capacity(self.pieces.len());
        for (i, (x, s, o)) in self.pieces.iter().enumerate() {
            let path = |field: &str| format!("pieces[{i}].{field}");
            let x = parse_q(x).map_err(|e| Error::Schema { path: path("x"), message: e.to_string() })?;
            let s = parse_q(s).map_err(|e| Error::Schema { path: path("slope"), message: e.to_string() })?;
            let o = parse_q(o).map_err(|e| Error::Schema { path: path("offset"), message: e.to_string() })?;
            triples.push((x, s, o));
        }
        let vertex = |(x, s, o): &(Q, Q, Q)| (x.clone(), s * x + o);
        match self.kind.as_str() {
            "interval" => {
                let b = parse_q(self.b.as_deref().ok_or_else(|| Error::Schema {
                    path: "b".into(),
                    message: "missing right endpoint".into(),
                })?)?;
                let mut points: Vec<(Q, Q)> = triples.iter().map(vertex).collect();
                let (last_x, last_s, last_o) = triples.last().ok_or_else(|| Error::Schema {
                    path: "pieces".into(),
                    message: "no pieces".into(),
                })?;
                if *last_x >= b {
                    return Err(Error::Schema {
                        path: "b".into(),
                        message: "right endpoint not beyond the last breakpoint".into(),
                    });
                }
                points.push((b.clone(), last_s * &b + last_o));
                PLMap::interval(points)
            }
            "line" => {
                if let Some((_, s, _)) = triples.last() {
                    if !s.is_one() {
                        return Err(Error::Schema {
                            path: "pieces".into(),
                            message: "a line map must end with a slope-1 tail".into(),
                        });
                    }
                }
                let points: Vec<(Q, Q)> = triples.iter().map(vertex).collect();
                PLMap::line(points)
            }
            other => Err(Error::Schema {
                path: "kind".into(),
                message: format!("unknown kind {other:?}"),
            }),
        }
    }
}
