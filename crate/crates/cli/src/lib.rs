//! Command-line front end: parse element and system descriptions from JSON,
//! dispatch to the library, and emit deterministic reports. JSON is the
//! wire format; the default pretty output is a derived view of the same
//! data. Exit codes: 0 success, 1 domain error, 2 usage or payload error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use cantorlab::dynamics::{
    brin_decomposition, compress, match_germs, random_element, same_orbit, transitivity_witness,
};
use cantorlab::flow::{
    build_dinfty, chart_decomposition, first_return_partition, flow_eval, leaf_itinerary,
    smallest_return_time, CylinderX, FlowElement, FlowPiece, StoneSystemJson, TwoSidedPoint,
};
use cantorlab::perm::{
    block_systems, check_displacement_config, find_confining, find_displacement_config,
    fix_bound_audit, is_confining, Perm, PermGroup,
};
use cantorlab::pl::{
    crossing_profile, mixed_identity_witness, parse_q, support_components, PLMapJson,
};
use cantorlab::prefix::ClopenSetJson;
use cantorlab::vd::PrefixMapJson;
use cantorlab::{ClopenSet, CompressTarget, Error, EvPeriodicPoint, PrefixMap};

#[derive(Parser)]
#[command(name = "cantorlab", version, disable_help_subcommand = true)]
#[command(about = "Exact computations in prefix-replacement groups, permutation audits, and PL suspension flows")]
struct Cli {
    /// emit compact JSON instead of the pretty report
    #[arg(long, global = true)]
    json: bool,
    /// seed for randomized constructions
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// prefix-replacement elements and their dynamics
    #[command(subcommand)]
    Vd(VdCmd),
    /// finite permutation groups: confining sets, blocks, displacement
    #[command(subcommand)]
    Perm(PermCmd),
    /// exact piecewise-linear maps
    #[command(subcommand)]
    Pl(PlCmd),
    /// subshifts, return times, suspension charts
    #[command(subcommand)]
    Flow(FlowCmd),
}

#[derive(Subcommand)]
enum VdCmd {
    /// canonical form of a ∘ b (apply b first)
    Compose { a: PathBuf, b: PathBuf },
    /// finite-order / hyperbolic decomposition with certificate
    Brin { a: PathBuf },
    /// minimal shift pair putting two eventually periodic points in one orbit
    Orbit {
        #[arg(long, default_value_t = 2)]
        d: u8,
        xi: String,
        eta: String,
    },
    /// element mapping each source point to its target
    Witness {
        #[arg(long, default_value_t = 2)]
        d: u8,
        /// comma-separated points, e.g. "0(0),1(10)"
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
    },
    /// element squeezing a clopen set or a point list into a neighbourhood
    Compress {
        /// target clopen set (JSON file); alternative to --points
        #[arg(long)]
        cells: Option<PathBuf>,
        /// comma-separated target points; alternative to --cells
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 2)]
        d: u8,
        /// neighbourhood clopen set (JSON file)
        u: PathBuf,
    },
    /// element with the same germs as g at the given points
    Germs {
        g: PathBuf,
        #[arg(long)]
        points: String,
    },
    /// random reduced element (deterministic under --seed)
    Random {
        #[arg(long, default_value_t = 2)]
        d: u8,
        #[arg(long, default_value_t = 8)]
        max_cells: usize,
    },
}

#[derive(Subcommand)]
enum PermCmd {
    /// smallest confining subset for H inside the full symmetric group,
    /// or check a proposed subset with --check
    Confining {
        /// subgroup file {"degree": n, "generators": ["(0 1)", …]}
        h: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        /// file {"degree": n, "elements": [...]} with the subset to check
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// minimal non-trivial block systems and primitivity
    Blocks { h: PathBuf },
    /// displacement configuration for a set of permutations
    Displacement {
        /// file {"degree": n, "elements": ["(0 1 2)", …]}
        p: PathBuf,
    },
    /// exhaustive fixed-point-bound audit over subgroup classes of S_n
    AuditFixbound {
        #[arg(long, default_value_t = 5)]
        degree: usize,
    },
}

#[derive(Subcommand)]
enum PlCmd {
    /// canonical form of f ∘ g (apply g first)
    Compose { f: PathBuf, g: PathBuf },
    /// maximal open intervals where f moves points
    Support { f: PathBuf },
    /// pinning homeomorphism refuting a candidate mixed identity
    MixedIdentity {
        /// file {"exponents": [...], "gs": [PL maps], "window": ["lo","hi"]}
        spec: PathBuf,
    },
    /// exact sign pattern of f(x) − x over a window
    Crossings {
        f: PathBuf,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
    },
}

#[derive(Subcommand)]
enum FlowCmd {
    /// smallest return time of a cylinder
    ReturnTimes {
        system: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        position: i64,
    },
    /// clopen partition of a cylinder by first-return time
    FirstReturn {
        system: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        position: i64,
        #[arg(long, default_value_t = 64)]
        bound: usize,
    },
    /// complementary charts of the closed chart over C × J
    Decompose {
        system: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        position: i64,
        /// left endpoint of J
        #[arg(long)]
        from: String,
        /// right endpoint of J
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 64)]
        bound: usize,
    },
    /// signed chart traversals of a leaf in a dihedral system
    LeafSigns { spec: PathBuf },
    /// apply a partition-form flow element to a suspension point
    Eval { spec: PathBuf },
}

enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed payload {}: {e}", path.display())))
}

/// DTO build errors are payload problems, not domain errors.
fn schema<T>(r: cantorlab::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn read_element(path: &Path) -> CliResult<PrefixMap> {
    schema(read_json::<PrefixMapJson>(path)?.build())
}

fn read_clopen(path: &Path) -> CliResult<ClopenSet> {
    schema(read_json::<ClopenSetJson>(path)?.build())
}

fn parse_points(d: u8, s: &str) -> CliResult<Vec<EvPeriodicPoint>> {
    s.split(',')
        .map(|p| schema(EvPeriodicPoint::parse(d, p.trim())))
        .collect()
}

#[derive(serde::Deserialize)]
struct GroupJson {
    degree: usize,
    generators: Vec<String>,
}

#[derive(serde::Deserialize)]
struct PermSetJson {
    degree: usize,
    elements: Vec<String>,
}

fn read_group(path: &Path) -> CliResult<PermGroup> {
    let g: GroupJson = read_json(path)?;
    let gens = g
        .generators
        .iter()
        .map(|s| schema(Perm::parse_cycles(g.degree, s)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(schema(PermGroup::new(g.degree, gens))?)
}

fn read_perm_set(path: &Path) -> CliResult<(usize, Vec<Perm>)> {
    let p: PermSetJson = read_json(path)?;
    let elems = p
        .elements
        .iter()
        .map(|s| schema(Perm::parse_cycles(p.degree, s)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok((p.degree, elems))
}

fn element_json(g: &PrefixMap) -> Value {
    serde_json::to_value(PrefixMapJson::from(g)).expect("serializable")
}

fn clopen_json(c: &ClopenSet) -> Value {
    serde_json::to_value(ClopenSetJson::from(c)).expect("serializable")
}

fn points_json(ps: &[EvPeriodicPoint]) -> Value {
    Value::Array(ps.iter().map(|p| Value::String(p.to_string())).collect())
}

fn pl_json(f: &cantorlab::pl::PLMap) -> Value {
    serde_json::to_value(PLMapJson::from(f)).expect("serializable")
}

/// `argv` holds the arguments without the program name.
pub fn run(argv: &[String]) -> i32 {
    let with_name = std::iter::once("cantorlab".to_string()).chain(argv.iter().cloned());
    let cli = match Cli::try_parse_from(with_name) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(report) => {
            let text = if json {
                serde_json::to_string(&report).expect("serializable")
            } else {
                serde_json::to_string_pretty(&report).expect("serializable")
            };
            // tolerate a closed pipe on the consumer side
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
            0
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<Value> {
    match cli.cmd {
        Cmd::Vd(c) => vd_dispatch(c, cli.seed),
        Cmd::Perm(c) => perm_dispatch(c),
        Cmd::Pl(c) => pl_dispatch(c),
        Cmd::Flow(c) => flow_dispatch(c),
    }
}

fn vd_dispatch(cmd: VdCmd, seed: u64) -> CliResult<Value> {
    match cmd {
        VdCmd::Compose { a, b } => {
            let a = read_element(&a)?;
            let b = read_element(&b)?;
            Ok(element_json(&a.compose(&b)?))
        }
        VdCmd::Brin { a } => {
            let a = read_element(&a)?;
            let dec = brin_decomposition(&a)?;
            Ok(json!({
                "y": clopen_json(&dec.y),
                "z": clopen_json(&dec.z),
                "order_on_y": dec.order_on_y,
                "att": points_json(&dec.att),
                "rep": points_json(&dec.rep),
                "certificate": dec.certificate.iter()
                    .map(|(w, u)| json!([w.to_string(), u.to_string()]))
                    .collect::<Vec<_>>(),
                "verified": true,
            }))
        }
        VdCmd::Orbit { d, xi, eta } => {
            let xi = schema(EvPeriodicPoint::parse(d, &xi))?;
            let eta = schema(EvPeriodicPoint::parse(d, &eta))?;
            let shifts = same_orbit(&xi, &eta)?;
            Ok(json!({
                "same_orbit": shifts.is_some(),
                "shifts": shifts.map(|(m, n)| json!([m, n])),
            }))
        }
        VdCmd::Witness { d, src, dst } => {
            let src = parse_points(d, &src)?;
            let dst = parse_points(d, &dst)?;
            let g = transitivity_witness(&src, &dst)?;
            Ok(element_json(&g))
        }
        VdCmd::Compress { cells, points, d, u } => {
            let u = read_clopen(&u)?;
            let target = match (cells, points) {
                (Some(path), None) => CompressTarget::Cells(read_clopen(&path)?),
                (None, Some(list)) => CompressTarget::Points(parse_points(u.d().max(d), &list)?),
                _ => {
                    return Err(CliError::Usage(
                        "exactly one of --cells and --points is required".into(),
                    ))
                }
            };
            Ok(element_json(&compress(&target, &u)?))
        }
        VdCmd::Germs { g, points } => {
            let g = read_element(&g)?;
            let pts = parse_points(g.d(), &points)?;
            let h = match_germs(&g, &pts)?;
            let mut agree = true;
            for p in &pts {
                agree &= g.germ_equal(&h, p)?;
            }
            Ok(json!({ "element": element_json(&h), "germs_match": agree }))
        }
        VdCmd::Random { d, max_cells } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_element(d, max_cells, &mut rng);
            Ok(element_json(&g))
        }
    }
}

fn perm_dispatch(cmd: PermCmd) -> CliResult<Value> {
    match cmd {
        PermCmd::Confining { h, max_size, check } => {
            let h = read_group(&h)?;
            let ambient = PermGroup::symmetric(h.degree())?;
            match check {
                Some(path) => {
                    let (deg, p) = read_perm_set(&path)?;
                    if deg != h.degree() {
                        return Err(CliError::Usage(format!(
                            "degree mismatch: subgroup {} vs subset {deg}",
                            h.degree()
                        )));
                    }
                    let r = is_confining(&p, &h, &ambient)?;
                    Ok(json!({
                        "confining": r.confining,
                        "witness": r.witness.map(|w| w.to_string()),
                    }))
                }
                None => {
                    let found = find_confining(&h, &ambient, max_size)?;
                    Ok(json!({
                        "found": found.is_some(),
                        "confining_set": found.map(|p| {
                            p.iter().map(|q| q.to_string()).collect::<Vec<_>>()
                        }),
                    }))
                }
            }
        }
        PermCmd::Blocks { h } => {
            let h = read_group(&h)?;
            let r = block_systems(&h);
            Ok(json!({
                "transitive": r.transitive,
                "primitive": r.primitive,
                "systems": r.systems.iter().map(|s| &s.blocks).collect::<Vec<_>>(),
            }))
        }
        PermCmd::Displacement { p } => {
            let (_, elems) = read_perm_set(&p)?;
            let cfg = find_displacement_config(&elems)?;
            match cfg {
                None => Ok(json!({ "found": false })),
                Some(cfg) => {
                    let report = check_displacement_config(&elems, &cfg)?;
                    Ok(json!({
                        "found": true,
                        "sets": cfg.sets,
                        "ok": report.ok,
                        "violation": report.violation,
                    }))
                }
            }
        }
        PermCmd::AuditFixbound { degree } => {
            let audit = fix_bound_audit(degree)?;
            Ok(serde_json::to_value(&audit).expect("serializable"))
        }
    }
}

fn read_pl(path: &Path) -> CliResult<cantorlab::pl::PLMap> {
    schema(read_json::<PLMapJson>(path)?.build())
}

#[derive(serde::Deserialize)]
struct MixedIdentitySpec {
    exponents: Vec<i64>,
    gs: Vec<PLMapJson>,
    window: (String, String),
}

fn pl_dispatch(cmd: PlCmd) -> CliResult<Value> {
    match cmd {
        PlCmd::Compose { f, g } => {
            let f = read_pl(&f)?;
            let g = read_pl(&g)?;
            Ok(pl_json(&f.compose(&g)?))
        }
        PlCmd::Support { f } => {
            let f = read_pl(&f)?;
            let comps = support_components(&f)?;
            Ok(json!({
                "components": comps.iter().map(|c| json!({
                    "lo": c.lo.as_ref().map(|q| q.to_string()),
                    "hi": c.hi.as_ref().map(|q| q.to_string()),
                })).collect::<Vec<_>>(),
            }))
        }
        PlCmd::MixedIdentity { spec } => {
            let spec: MixedIdentitySpec = read_json(&spec)?;
            let gs = spec
                .gs
                .iter()
                .map(|j| schema(j.build()))
                .collect::<CliResult<Vec<_>>>()?;
            let lo = schema(parse_q(&spec.window.0))?;
            let hi = schema(parse_q(&spec.window.1))?;
            let w = mixed_identity_witness(&spec.exponents, &gs, (&lo, &hi))?;
            Ok(json!({
                "certified": w.certified,
                "t": w.t.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "p": w.p.iter().map(|q| q.to_string()).collect::<Vec<_>>(),
                "value": w.value.to_string(),
                "h": pl_json(&w.h),
            }))
        }
        PlCmd::Crossings { f, lo, hi } => {
            let f = read_pl(&f)?;
            let lo = schema(parse_q(&lo))?;
            let hi = schema(parse_q(&hi))?;
            let profile = crossing_profile(&f, &lo, &hi)?;
            Ok(json!({
                "profile": profile.iter().map(|s| json!({
                    "lo": s.lo.to_string(),
                    "hi": s.hi.to_string(),
                    "sign": s.sign,
                })).collect::<Vec<_>>(),
            }))
        }
    }
}

#[derive(serde::Deserialize)]
struct LeafSignsSpec {
    system: StoneSystemJson,
    iota: BTreeMap<char, char>,
    #[serde(default = "default_depth")]
    depth: usize,
    point: TwoSidedPoint,
    window: (String, String),
    cylinder: CylinderSpec,
    interval: (String, String),
}

#[derive(serde::Deserialize)]
struct CylinderSpec {
    word: String,
    #[serde(default)]
    position: i64,
}

#[derive(serde::Deserialize)]
struct FlowEvalSpec {
    system: StoneSystemJson,
    pieces: Vec<FlowPieceSpec>,
    point: TwoSidedPoint,
    t: String,
    #[serde(default = "default_depth")]
    depth: usize,
}

#[derive(serde::Deserialize)]
struct FlowPieceSpec {
    word: String,
    #[serde(default)]
    position: i64,
    interval: (String, String),
    map: PLMapJson,
}

fn default_depth() -> usize {
    8
}

fn flow_dispatch(cmd: FlowCmd) -> CliResult<Value> {
    match cmd {
        FlowCmd::ReturnTimes { system, word, position } => {
            let sys = schema(read_json::<StoneSystemJson>(&system)?.build())?;
            let c = CylinderX::new(&sys, &word, position)?;
            let tau = smallest_return_time(&sys, &c)?;
            Ok(json!({ "word": word, "tau": tau }))
        }
        FlowCmd::FirstReturn { system, word, position, bound } => {
            let sys = schema(read_json::<StoneSystemJson>(&system)?.build())?;
            let c = CylinderX::new(&sys, &word, position)?;
            let cells = first_return_partition(&sys, &c, bound)?;
            Ok(json!({
                "cells": cells.iter().map(|(cell, t)| json!({
                    "word": cell.word,
                    "time": t,
                })).collect::<Vec<_>>(),
            }))
        }
        FlowCmd::Decompose { system, word, position, from, to, bound } => {
            let sys = schema(read_json::<StoneSystemJson>(&system)?.build())?;
            let c = CylinderX::new(&sys, &word, position)?;
            let a = schema(parse_q(&from))?;
            let b = schema(parse_q(&to))?;
            let charts = chart_decomposition(&sys, &c, (&a, &b), bound)?;
            Ok(json!({
                "charts": charts.iter().map(|ch| json!({
                    "word": ch.c.word,
                    "time": ch.time,
                    "interval": [ch.i.0.to_string(), ch.i.1.to_string()],
                })).collect::<Vec<_>>(),
            }))
        }
        FlowCmd::LeafSigns { spec } => {
            let spec: LeafSignsSpec = read_json(&spec)?;
            let base = schema(spec.system.build())?;
            let s = build_dinfty(base, &spec.iota, spec.depth)?;
            let c = CylinderX::new(&s.base, &spec.cylinder.word, spec.cylinder.position)?;
            let lo = schema(parse_q(&spec.window.0))?;
            let hi = schema(parse_q(&spec.window.1))?;
            let a = schema(parse_q(&spec.interval.0))?;
            let b = schema(parse_q(&spec.interval.1))?;
            let trs = leaf_itinerary(&s, &spec.point, (&lo, &hi), &c, (&a, &b))?;
            Ok(json!({
                "free_depth": s.free_depth(),
                "traversals": trs.iter().map(|t| json!({
                    "n": t.n,
                    "sign": t.sign,
                    "interval": [t.lo.to_string(), t.hi.to_string()],
                })).collect::<Vec<_>>(),
            }))
        }
        FlowCmd::Eval { spec } => {
            let spec: FlowEvalSpec = read_json(&spec)?;
            let sys = schema(spec.system.build())?;
            let mut pieces = Vec::new();
            for p in &spec.pieces {
                let c = CylinderX::new(&sys, &p.word, p.position)?;
                let lo = schema(parse_q(&p.interval.0))?;
                let hi = schema(parse_q(&p.interval.1))?;
                let f = schema(p.map.build())?;
                pieces.push(FlowPiece::new(c, (lo, hi), f)?);
            }
            let g = FlowElement::new(pieces)?;
            g.validate(&sys, spec.depth)?;
            let t = schema(parse_q(&spec.t))?;
            let out = flow_eval(&g, &spec.point, &t)?;
            Ok(json!({ "t": out.to_string(), "dyadic": g.is_dyadic() }))
        }
    }
}
