//! Acceptance suite. Prints one PASS/FAIL line per criterion, then runs the
//! whole suite a second time and compares the written CSV/JSON artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coarse_lab::cayley::{build_ball, Ball};
use coarse_lab::covers::{
    agglomerate, check_definition1, cover_from_assignment, cross_definition, make_brick_cover_z2,
    make_interval_cover_z, make_lamplighter_cover, make_strip_cover_z2, multiplicity, perturb, Cover, Def1Outcome,
};
use coarse_lab::ends::{ends_estimate, EndsVerdict};
use coarse_lab::geodesics::{bi_infinite_witness, extendable_prefixes};
use coarse_lab::models::{model_from_descriptor, Element, GroupModel};
use coarse_lab::presentation::Word;
use coarse_lab::refuter::{
    find_violation, involutions, paper_constants, zero_dim_refute, DeskScale, RefuteOutcome, RefuteParams,
};
use coarse_lab::vankampen::{area, build_diagram, diagram_map, SearchBounds};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const BUDGET: usize = 1 << 22;

// time limits
const LIMIT_GROWTH: Duration = Duration::from_secs(60);
const LIMIT_ENDS: Duration = Duration::from_secs(60);
const LIMIT_ZERO_DIM: Duration = Duration::from_secs(30);
const LIMIT_LAMPLIGHTER: Duration = Duration::from_secs(120);
const LIMIT_REFUTE_RUN: Duration = Duration::from_secs(60);

// counts
const ZERO_DIM_PARTITIONS: usize = 100;
const PERTURBED_COVERS: u64 = 200;
const MIN_ADVERSARIAL_COVERS: usize = 20;
const MIN_INVOLUTIONS: usize = 10;

fn model(d: &str) -> GroupModel {
    model_from_descriptor(d).unwrap()
}

fn ball(m: &GroupModel, r: u32) -> Ball {
    build_ball(m, r, BUDGET).unwrap()
}

fn xy(b: &Ball, v: usize) -> (i64, i64) {
    match b.element(v) {
        Element::Vector(c) => (c[0], c[1]),
        e => unreachable!("{e:?}"),
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// CSV/JSON artifacts of one suite run, by file name.
type Artifacts = BTreeMap<String, String>;

fn timed(limit: Option<Duration>, f: impl FnOnce(&mut Artifacts) -> Verdict, art: &mut Artifacts) -> Verdict {
    let t = Instant::now();
    let mut v = f(art);
    let spent = t.elapsed();
    if let Some(limit) = limit {
        if spent > limit {
            v.pass = false;
            let _ = write!(v.detail, "; took {spent:.1?} > {limit:?}");
            return v;
        }
    }
    let _ = write!(v.detail, "; {spent:.1?}");
    v
}

fn growth(art: &mut Artifacts) -> Verdict {
    let z2 = model("z^2");
    let b = ball(&z2, 40);
    let mut csv = String::from("r,sphere,ball\n");
    let mut total = 0u64;
    let mut ok = true;
    for (r, &s) in b.sphere_sizes().iter().enumerate() {
        total += s;
        let r = r as u64;
        ok &= total == 2 * r * r + 2 * r + 1;
        let _ = writeln!(csv, "{r},{s},{total}");
    }
    art.insert("growth_z2.csv".into(), csv);
    let f2 = model("free:2");
    let b = ball(&f2, 10);
    let spheres = b.sphere_sizes();
    let mut csv = String::from("n,sphere\n");
    for (n, &s) in spheres.iter().enumerate().skip(1) {
        ok &= s == 4 * 3u64.pow(n as u32 - 1);
        let _ = writeln!(csv, "{n},{s}");
    }
    art.insert("spheres_free2.csv".into(), csv);
    check(ok, format!("|B(e,40)| in Z^2 = {total}, free(2) |S(10)| = {}", spheres[10]))
}

fn ends(art: &mut Artifacts) -> Verdict {
    type Case<'a> = (&'a str, &'a [(u32, u32)], EndsVerdict, Option<&'a [usize]>);
    let cases: [Case; 4] = [
        ("z", &[(1, 4), (2, 8), (3, 12)], EndsVerdict::Stable(2), None),
        ("z^2", &[(1, 8), (2, 12), (3, 16)], EndsVerdict::Stable(1), None),
        ("lamplighter", &[(1, 6), (2, 8)], EndsVerdict::Stable(1), None),
        ("free:2", &[(1, 6), (2, 8), (3, 10)], EndsVerdict::Growing, Some(&[4, 12, 36])),
    ];
    let mut ok = true;
    let mut seen = Vec::new();
    for (d, schedule, want, counts) in cases {
        let e = ends_estimate(&model(d), schedule, 2, BUDGET).unwrap();
        ok &= e.verdict == want && counts.is_none_or(|c| e.counts() == c);
        seen.push(format!("{d} {}", e.verdict));
        art.insert(format!("ends_{}.json", d.replace([':', '^'], "")), serde_json::to_string(&e).unwrap());
    }
    check(ok, seen.join(", "))
}

/// A random partition into at least two nonempty pieces, all in one class.
fn random_partition(b: &Ball, rng: &mut ChaCha8Rng) -> Cover {
    loop {
        let k = rng.gen_range(2..=6usize);
        let raw: Vec<usize> = (0..b.len()).map(|_| rng.gen_range(0..k)).collect();
        let mut used: Vec<usize> = raw.clone();
        used.sort_unstable();
        used.dedup();
        if used.len() < 2 {
            continue;
        }
        let assign: Vec<usize> = raw.iter().map(|p| used.binary_search(p).unwrap()).collect();
        return cover_from_assignment(b, &assign, vec![0; used.len()], 2, 2 * u64::from(b.radius()));
    }
}

fn zero_dim(art: &mut Artifacts, seed: u64) -> Verdict {
    let z2 = model("z^2");
    let b = ball(&z2, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verified = 0;
    let mut lines = String::new();
    for _ in 0..ZERO_DIM_PARTITIONS {
        let c = random_partition(&b, &mut rng);
        if let Ok(w) = zero_dim_refute(&b, &z2, &c, 2) {
            if w.verify(&b, &z2, &c) {
                verified += 1;
            }
            lines.push_str(&serde_json::to_string(&w).unwrap());
            lines.push('\n');
        }
    }
    art.insert("zero_dim_witnesses.jsonl".into(), lines);
    check(
        verified == ZERO_DIM_PARTITIONS,
        format!("{verified}/{ZERO_DIM_PARTITIONS} verified witnesses"),
    )
}

fn geodesics(art: &mut Artifacts) -> Verdict {
    let mut ok = true;
    let mut csv = String::from("model,n,start,end,verified\n");
    for d in ["z", "z^2", "free:2", "lamplighter"] {
        let m = model(d);
        for n in 1..=25 {
            let pass = bi_infinite_witness(&m, n).is_ok_and(|w| {
                let v = w.verify(&m);
                let _ = writeln!(
                    csv,
                    "{d},{n},{},{},{v}",
                    m.canonical_key(&w.start),
                    m.canonical_key(&w.end)
                );
                v
            });
            ok &= pass;
        }
    }
    art.insert("bi_infinite.csv".into(), csv);
    // deeper extension can only discard prefixes
    let mut monotone = true;
    let mut cases = 0;
    for d in ["z", "z^2", "free:2", "lamplighter", "dihedral_inf", "cyclic:12"] {
        let m = model(d);
        for n in 1..=4 {
            let mut prev: Option<Vec<Word>> = None;
            for depth in n..=n + 4 {
                let cur = extendable_prefixes(&m, n, depth, 100_000).unwrap().paths;
                if let Some(p) = &prev {
                    monotone &= cur.iter().all(|w| p.contains(w));
                }
                prev = Some(cur);
                cases += 1;
            }
        }
    }
    check(
        ok && monotone,
        format!("witnesses n <= 25 on 4 models verified: {ok}; monotone over {cases} depths: {monotone}"),
    )
}

fn definitions(art: &mut Artifacts, seed: u64) -> Verdict {
    let z = model("z");
    let bz = ball(&z, 256);
    let mut intervals = true;
    for l in [2, 4, 8, 16, 32, 64] {
        let c = make_interval_cover_z(&bz, &z, l).unwrap();
        intervals &= check_definition1(&bz, &z, &c, l as u64, l as u64).unwrap().passed();
    }
    let z2 = model("z^2");
    let b2 = ball(&z2, 48);
    let mut bricks = true;
    let mut csv = String::from("L,d,multiplicity\n");
    for l in [8, 16] {
        let c = make_brick_cover_z2(&b2, &z2, l).unwrap();
        let k = multiplicity(&b2, &z2, &c, l as u64 / 4).unwrap().k;
        bricks &= k == 3;
        let _ = writeln!(csv, "{l},{},{k}", l / 4);
    }
    art.insert("brick_multiplicity.csv".into(), csv);

    let bz = ball(&z, 40);
    let b2 = ball(&z2, 16);
    let mut base: Vec<(&GroupModel, &Ball, Cover)> = Vec::new();
    for l in [2, 4, 8, 16] {
        base.push((&z, &bz, make_interval_cover_z(&bz, &z, l).unwrap()));
    }
    for l in [4, 8] {
        base.push((&z2, &b2, make_brick_cover_z2(&b2, &z2, l).unwrap()));
    }
    let mut all = base.clone();
    for i in 0..PERTURBED_COVERS {
        let (m, b, c) = &base[i as usize % base.len()];
        all.push((m, b, perturb(b, c, seed.wrapping_add(i), 1 + i as usize % 5)));
    }
    let (mut holds, mut vacuous) = (true, 0);
    for (m, b, c) in &all {
        match cross_definition(b, m, c, c.d, c.bound).unwrap() {
            Some(ok) => holds &= ok,
            None => vacuous += 1,
        }
    }
    check(
        intervals && bricks && holds,
        format!(
            "intervals pass: {intervals}; brick multiplicity 3: {bricks}; cross-definition on {} covers ({vacuous} fail the check, vacuous): {holds}",
            all.len()
        ),
    )
}

fn lamplighter(art: &mut Artifacts) -> Verdict {
    let m = model("lamplighter");
    let (l, d) = (4, 4);
    let limit = (3 * l + 4 * d) as u64;
    let mut ok = true;
    let mut csv = String::from("R,pieces,classes,realized_diameter\n");
    for r in [4, 6, 8, 10, 12] {
        let b = ball(&m, r);
        let c = make_lamplighter_cover(&b, &m, l, d).unwrap();
        let out = check_definition1(&b, &m, &c, d as u64, limit).unwrap();
        let diam = match out {
            Def1Outcome::Pass { realized_diameter } => realized_diameter,
            Def1Outcome::Violation(_) => u64::MAX,
        };
        ok &= c.class_count() == 2 && diam <= limit;
        let _ = writeln!(csv, "{r},{},{},{diam}", c.len(), c.class_count());
    }
    art.insert("lamplighter_cover.csv".into(), csv);
    let b = ball(&m, 10);
    let inv = involutions(&b, &m);
    let torsion = inv.len() >= MIN_INVOLUTIONS
        && inv.iter().all(|&v| {
            let g = b.element(v);
            !m.is_identity(g) && m.is_identity(&m.multiply(g, g))
        });
    let keys: Vec<&str> = inv.iter().map(|&v| b.key(v)).collect();
    art.insert("involutions.json".into(), serde_json::to_string(&keys).unwrap());
    check(
        ok && torsion,
        format!("cover passes on R <= 12 within D = {limit}: {ok}; {} involutions in B(e,10)", inv.len()),
    )
}

fn van_kampen(art: &mut Artifacts) -> Verdict {
    let z2 = model("z^2");
    let p = z2.presentation().unwrap().clone();
    let g = p.generators();
    let mut ok = true;
    let mut csv = String::from("n,area,lower_bound,exact\n");
    for n in 1..=4usize {
        let text = format!("a^{n} b^{n} a^-{n} b^-{n}");
        let w = g.parse_word(&text).unwrap();
        let r = area(&p, &z2, &w, SearchBounds::default()).unwrap();
        ok &= r.area == (n * n) as u64 && r.lower_bound == Some(r.area) && r.exact;
        let _ = writeln!(csv, "{n},{},{:?},{}", r.area, r.lower_bound, r.exact);
    }
    art.insert("areas.csv".into(), csv);
    let words = [
        ("z^2", "a b a^-1 b^-1"),
        ("z^2", "a^2 b^2 a^-2 b^-2"),
        ("z^2", "a^3 b^3 a^-3 b^-3"),
        ("z^2", "a^4 b^4 a^-4 b^-4"),
        ("z^2", "a b^-1 a^-1 b"),
        ("z^2", "a^2 b a^-1 b^-1 a^-1"),
        ("presentation:<a | a^2>", "a^4"),
        ("presentation:<a,b | a^3, b^2, abab>", "a b a b a^3"),
        ("dihedral_inf", "s t t s"),
    ];
    let (mut diagrams, mut pairs) = (0, 0);
    for (i, (d, text)) in words.iter().enumerate() {
        let m = model(d);
        let p = m.presentation().unwrap().clone();
        let w = p.generators().parse_word(text).unwrap();
        let dg = build_diagram(&p, &m, &w, SearchBounds::default()).unwrap();
        let map = diagram_map(&dg, &m, &m.identity()).unwrap();
        ok &= dg.check(&p, &w).all() && map.lipschitz.violations.is_empty();
        diagrams += 1;
        pairs += map.lipschitz.pairs_checked;
        art.insert(format!("diagram_{i}.json"), dg.to_json());
    }
    check(
        ok,
        format!("areas n^2 for n <= 4; {diagrams} diagrams pass all checks over {pairs} vertex pairs"),
    )
}

fn adversarial_covers(b: &Ball, m: &GroupModel, seed: u64) -> Vec<(String, Cover)> {
    let mut out = Vec::new();
    for w in 4..=11 {
        out.push((format!("strips w={w}"), make_strip_cover_z2(b, m, w).unwrap()));
    }
    for w in [6, 9, 12] {
        let assign: Vec<usize> = (0..b.len())
            .map(|v| {
                let (x, y) = xy(b, v);
                (x + y + 40).div_euclid(w) as usize
            })
            .collect();
        let k = assign.iter().max().unwrap() + 1;
        let classes = (0..k as u32).map(|i| i % 2).collect();
        out.push((format!("diagonal strips w={w}"), cover_from_assignment(b, &assign, classes, 12, w as u64)));
    }
    for l in [8, 16] {
        let brick = make_brick_cover_z2(b, m, l).unwrap();
        for merge in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            let classes = brick.classes.iter().map(|&c| merge[c as usize]).collect();
            out.push((format!("merged bricks L={l} {merge:?}"), brick.with_classes(classes)));
        }
    }
    for s in 0..9 {
        out.push((
            format!("agglomerated nets seed {}", seed + s),
            agglomerate(b, m, 8, seed + s).unwrap(),
        ));
    }
    out
}

fn refuter(art: &mut Artifacts, seed: u64) -> Verdict {
    let z2 = model("z^2");
    let p = z2.presentation().unwrap().clone();
    let b = ball(&z2, 40);
    let params = RefuteParams {
        d: 12,
        n_used: 24,
        x0: 0,
        search: SearchBounds::default(),
    };
    let covers = adversarial_covers(&b, &z2, seed);
    let (mut verified, mut fabricated, mut slowest) = (0, 0, Duration::ZERO);
    let mut failures = Vec::new();
    for (i, (name, c)) in covers.iter().enumerate() {
        let t = Instant::now();
        let w = if c.class_count() <= 1 {
            zero_dim_refute(&b, &z2, c, params.d).ok()
        } else {
            match find_violation(&p, &z2, &b, c, params).unwrap() {
                RefuteOutcome::Witness(w) => Some(w),
                RefuteOutcome::Inconclusive { .. } => None,
            }
        };
        let spent = t.elapsed();
        slowest = slowest.max(spent);
        match w {
            Some(w) if w.verify(&b, &z2, c) && spent <= LIMIT_REFUTE_RUN => {
                verified += 1;
                art.insert(format!("witness_{i:02}.json"), w.to_json());
            }
            Some(w) if !w.verify(&b, &z2, c) => {
                fabricated += 1;
                failures.push(name.clone());
            }
            _ => failures.push(name.clone()),
        }
    }
    let mut constants = true;
    for d in 1..=64u64 {
        let c = paper_constants(&p, d, DeskScale::default()).unwrap();
        let want = (BigUint::from(d).pow(100) * 100u32).max(BigUint::from(300 * c.m));
        constants &= c.m == 4 && c.d_threshold == 500 && c.n == want;
        if d == 64 {
            art.insert("constants_D64.json".into(), serde_json::to_string(&c).unwrap());
        }
    }
    let pass = verified == covers.len() && covers.len() >= MIN_ADVERSARIAL_COVERS && fabricated == 0 && constants;
    check(
        pass,
        format!(
            "{verified}/{} covers refuted with verified witnesses, {fabricated} fabricated, slowest run {slowest:.1?}; constants exact for D <= 64: {constants}{}",
            covers.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failures.join(", "))
            }
        ),
    )
}

fn suite(seed: u64) -> (Vec<(u8, Verdict)>, Artifacts) {
    let mut art = Artifacts::new();
    let results = vec![
        (1, timed(Some(LIMIT_GROWTH), growth, &mut art)),
        (2, timed(Some(LIMIT_ENDS), ends, &mut art)),
        (3, timed(Some(LIMIT_ZERO_DIM), |a| zero_dim(a, seed), &mut art)),
        (4, timed(None, geodesics, &mut art)),
        (5, timed(None, |a| definitions(a, seed), &mut art)),
        (6, timed(Some(LIMIT_LAMPLIGHTER), lamplighter, &mut art)),
        (7, timed(None, van_kampen, &mut art)),
        (8, timed(None, |a| refuter(a, seed), &mut art)),
    ];
    (results, art)
}

/// Writes the artifacts and reads every file back.
fn write_run(dir: &Path, art: &Artifacts) -> BTreeMap<String, Vec<u8>> {
    let _ = std::fs::remove_dir_all(dir);
    std::fs::create_dir_all(dir).unwrap();
    for (name, text) in art {
        std::fs::write(dir.join(name), text).unwrap();
    }
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
    }
    out
}

fn main() -> ExitCode {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let mut failed = 0;
    let (results, first) = suite(SEED);
    for (n, v) in &results {
        println!("criterion {n}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    let (_, second) = suite(SEED);
    let a = write_run(&root.join("run-1"), &first);
    let b = write_run(&root.join("run-2"), &second);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    let same = a.len() == b.len() && differing.is_empty();
    println!(
        "criterion 9: {} ({} CSV/JSON artifacts byte-identical across two runs{})",
        if same { "PASS" } else { "FAIL" },
        a.len(),
        if differing.is_empty() {
            String::new()
        } else {
            format!("; differing: {differing:?}")
        }
    );
    failed += usize::from(!same);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
