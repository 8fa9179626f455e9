//! The dimension lower-bound arguments run as algorithms: given a claimed
//! low-dimensional cover, produce a concrete violation or report the first
//! step whose hypothesis fails at desk scale.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cayley::{distance, Ball, PathInBall};
use crate::covers::{piece_diameter, ClosePairs, Cover};
use crate::ends::avoiding_path;
use crate::error::{Error, Result};
use crate::geodesics::bi_infinite_witness;
use crate::models::GroupModel;
use crate::presentation::{Presentation, Word};
use crate::vankampen::{build_diagram, diagram_map, Diagram, SearchBounds};

/// Exact proof constants next to the desk-scale values actually used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaperConstants {
    #[serde(rename = "M")]
    pub m: u64,
    pub d_threshold: u64,
    #[serde(rename = "D")]
    pub bound: u64,
    /// `max(100 D^100, 300 M)`, as a decimal string in JSON.
    #[serde(rename = "N", serialize_with = "big_decimal")]
    pub n: BigUint,
    pub d_used: u64,
    pub n_used: u64,
    pub r_used: u32,
    /// Whether `N` is within the ball radius `r_used`.
    pub n_fits: bool,
    pub overrides: Vec<String>,
}

fn big_decimal<S: serde::Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeskScale {
    pub d_used: u64,
    pub n_used: u64,
    pub r_used: u32,
}

impl Default for DeskScale {
    fn default() -> Self {
        DeskScale {
            d_used: 16,
            n_used: 24,
            r_used: 64,
        }
    }
}

pub fn paper_constants(p: &Presentation, bound: u64, desk: DeskScale) -> Result<PaperConstants> {
    let m = p.max_relator_length()? as u64;
    let d_threshold = 100 * m + 100;
    let n = (BigUint::from(bound).pow(100u32) * 100u32).max(BigUint::from(300 * m));
    let mut overrides = Vec::new();
    if desk.d_used != d_threshold {
        overrides.push(format!("d: {} used instead of {}", desk.d_used, d_threshold));
    }
    if BigUint::from(desk.n_used) != n {
        overrides.push(format!("N: {} used instead of {}", desk.n_used, n));
    }
    Ok(PaperConstants {
        m,
        d_threshold,
        bound,
        n_fits: n <= BigUint::from(desk.r_used),
        n,
        d_used: desk.d_used,
        n_used: desk.n_used,
        r_used: desk.r_used,
        overrides,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    MultiplicityBall,
    ProximityPair,
    TriplePoint,
    SinglePieceForced,
}

/// Vertices are ball indices; keys are stored alongside for reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// `B(center, d)` meets the three pieces, at the given member vertices.
    MultiplicityBall {
        center: usize,
        d: u64,
        pieces: [usize; 3],
        members: [usize; 3],
        keys: Vec<String>,
    },
    /// Two pieces of one class closer than `d`.
    ProximityPair {
        u: usize,
        v: usize,
        distance: u64,
        d: u64,
        pieces: [usize; 2],
        keys: Vec<String>,
    },
    /// One vertex lying in three pieces.
    TriplePoint {
        vertex: usize,
        pieces: [usize; 3],
        keys: Vec<String>,
    },
    /// The only piece has diameter at least the ball radius.
    SinglePieceForced {
        piece: usize,
        diameter: u64,
        radius: u32,
        ends: [usize; 2],
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationWitness {
    pub kind: WitnessKind,
    pub payload: Payload,
    pub trace: Vec<TraceStep>,
}

impl RefutationWitness {
    /// Rechecks the payload from raw distances and memberships.
    pub fn verify(&self, ball: &Ball, model: &GroupModel, cover: &Cover) -> bool {
        let n = ball.len();
        let inside = |v: usize, i: usize| v < n && cover.pieces.get(i).is_some_and(|p| p.binary_search(&v).is_ok());
        let dist = |u: usize, v: usize, cap: u64| distance(model, ball.element(u), ball.element(v), cap);
        let keys_match = |vs: &[usize], keys: &[String]| {
            vs.len() == keys.len() && vs.iter().zip(keys).all(|(&v, k)| v < n && ball.key(v) == k)
        };
        let distinct = |p: &[usize]| p.iter().collect::<BTreeSet<_>>().len() == p.len();
        match (&self.kind, &self.payload) {
            (
                WitnessKind::MultiplicityBall,
                Payload::MultiplicityBall { center, d, pieces, members, keys },
            ) => {
                let mut vs = vec![*center];
                vs.extend(members);
                keys_match(&vs, keys)
                    && distinct(pieces)
                    && (0..3).all(|k| inside(members[k], pieces[k]) && dist(*center, members[k], *d).is_some())
            }
            (WitnessKind::ProximityPair, Payload::ProximityPair { u, v, distance, d, pieces, keys }) => {
                keys_match(&[*u, *v], keys)
                    && pieces[0] != pieces[1]
                    && inside(*u, pieces[0])
                    && inside(*v, pieces[1])
                    && cover.classes[pieces[0]] == cover.classes[pieces[1]]
                    && distance < d
                    && dist(*u, *v, *distance) == Some(*distance)
            }
            (WitnessKind::TriplePoint, Payload::TriplePoint { vertex, pieces, keys }) => {
                keys_match(&[*vertex], keys) && distinct(pieces) && pieces.iter().all(|&p| inside(*vertex, p))
            }
            (
                WitnessKind::SinglePieceForced,
                Payload::SinglePieceForced { piece, diameter, radius, ends },
            ) => {
                cover.len() == 1
                    && *radius == ball.radius()
                    && inside(ends[0], *piece)
                    && inside(ends[1], *piece)
                    && dist(ends[0], ends[1], *diameter) == Some(*diameter)
                    && *diameter >= u64::from(*radius)
            }
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidData(format!("witness: {e}")))
    }
}

/// Refutes a single-class cover: two pieces always
/// share an edge of the connected ball, and a lone piece spans the ball.
pub fn zero_dim_refute(ball: &Ball, model: &GroupModel, partition: &Cover, d: u64) -> Result<RefutationWitness> {
    if d < 2 {
        return Err(Error::InvalidParameter("scale must be at least 2".into()));
    }
    if partition.classes.iter().collect::<BTreeSet<_>>().len() > 1 {
        return Err(Error::InvalidParameter("partition must have a single class".into()));
    }
    partition.validate(ball)?;
    let step = |passed, detail: String| TraceStep {
        step: 1,
        name: "connectedness forbids two d-separated pieces".into(),
        passed,
        detail,
    };
    if partition.len() == 1 {
        let (diameter, a, b) = piece_diameter(ball, model, &partition.pieces[0]);
        return Ok(RefutationWitness {
            kind: WitnessKind::SinglePieceForced,
            payload: Payload::SinglePieceForced {
                piece: 0,
                diameter,
                radius: ball.radius(),
                ends: [a, b],
            },
            trace: vec![step(false, format!("one piece of diameter {diameter} in a ball of radius {}", ball.radius()))],
        });
    }
    let member = partition.membership(ball.len());
    for u in 0..ball.len() {
        for &(_, v) in ball.neighbors(u) {
            if let Some((&i, &j)) = member[u].iter().zip(&member[v]).find(|(i, j)| i != j) {
                let (u, v, i, j) = if i < j { (u, v, i, j) } else { (v, u, j, i) };
                return Ok(RefutationWitness {
                    kind: WitnessKind::ProximityPair,
                    payload: Payload::ProximityPair {
                        u,
                        v,
                        distance: 1,
                        d,
                        pieces: [i, j],
                        keys: vec![ball.key(u).to_string(), ball.key(v).to_string()],
                    },
                    trace: vec![step(false, format!("edge {} - {} joins pieces {i} and {j}", ball.key(u), ball.key(v)))],
                });
            }
        }
    }
    Err(Error::InvalidData("pieces cover the ball without a crossing edge".into()))
}

/// The closed test loop: the geodesic segment `[x, y]` through `x0`
/// followed by the avoiding path `p` walked back from `y` to `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestLoop {
    pub word: Word,
    pub x: usize,
    pub y: usize,
    pub x0: usize,
    /// Ball vertices of `[x, y]`; entry `n` is `x0`.
    pub segment: Vec<usize>,
    pub path: PathInBall,
    /// `length(w) > 200 D`, when a bound was given.
    pub checkpoint: Option<bool>,
}

impl TestLoop {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

pub fn build_test_loop(
    model: &GroupModel,
    ball: &Ball,
    x0: usize,
    n: usize,
    n_used: u64,
    bound: Option<u64>,
) -> Result<TestLoop> {
    if n as u64 <= n_used {
        return Err(Error::InvalidParameter(format!("half-length {n} must exceed N = {n_used}")));
    }
    let s = bi_infinite_witness(model, n)?;
    let origin = ball.element(x0).clone();
    let mut segment = Vec::with_capacity(2 * n + 1);
    for e in s.points(model) {
        let g = model.multiply(&origin, &e);
        segment.push(ball.index_of_element(model, &g).ok_or(Error::NoPathWithinBall)?);
    }
    let (x, y) = (segment[0], segment[2 * n]);
    let path = avoiding_path(ball, model, x, y, x0, n_used)?;
    let word = s.labels.concat(&Word::new(path.labels.clone()).inverse());
    let checkpoint = bound.map(|b| word.len() as u64 > 200 * b);
    Ok(TestLoop {
        word,
        x,
        y,
        x0,
        segment,
        path,
        checkpoint,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefuteOutcome {
    Witness(RefutationWitness),
    Inconclusive {
        step: String,
        diagnostics: String,
        trace: Vec<TraceStep>,
    },
}

impl RefuteOutcome {
    pub fn trace(&self) -> &[TraceStep] {
        match self {
            RefuteOutcome::Witness(w) => &w.trace,
            RefuteOutcome::Inconclusive { trace, .. } => trace,
        }
    }

    pub fn witness(&self) -> Option<&RefutationWitness> {
        match self {
            RefuteOutcome::Witness(w) => Some(w),
            RefuteOutcome::Inconclusive { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefuteParams {
    pub d: u64,
    pub n_used: u64,
    pub x0: usize,
    pub search: SearchBounds,
}

pub const STEP_NAMES: [&str; 6] = [
    "multiplicity scan",
    "proximity scan",
    "relator containment",
    "test loop",
    "diagram filling",
    "pullback and frontier scan",
];

pub const INTERVAL_CONVENTION: &str = "singleton traces count as [a,a]; empty traces are excluded from U";

struct Trace(Vec<TraceStep>);

impl Trace {
    fn push(&mut self, step: u8, passed: bool, detail: impl Into<String>) {
        self.0.push(TraceStep {
            step,
            name: STEP_NAMES[step as usize - 1].to_string(),
            passed,
            detail: detail.into(),
        });
    }

    fn witness(mut self, step: u8, kind: WitnessKind, payload: Payload, detail: String) -> RefuteOutcome {
        self.push(step, false, detail);
        RefuteOutcome::Witness(RefutationWitness {
            kind,
            payload,
            trace: self.0,
        })
    }

    fn inconclusive(mut self, step: u8, diagnostics: impl Into<String>) -> RefuteOutcome {
        let diagnostics = diagnostics.into();
        self.push(step, false, diagnostics.clone());
        RefuteOutcome::Inconclusive {
            step: STEP_NAMES[step as usize - 1].to_string(),
            diagnostics,
            trace: self.0,
        }
    }
}

/// Runs the pipeline against a cover claimed to have multiplicity at most 2
/// at scale `d`. Returns a re-verified witness or the first failed step;
/// never a pass.
pub fn find_violation(
    p: &Presentation,
    model: &GroupModel,
    ball: &Ball,
    cover: &Cover,
    params: RefuteParams,
) -> Result<RefuteOutcome> {
    cover.validate(ball)?;
    let d = params.d;
    let mut trace = Trace(Vec::new());
    let member = cover.membership(ball.len());
    let close = ClosePairs::new(ball, model, d)?;

    // 1: some B(x, d) meets three pieces
    for x in 0..ball.len() {
        let mut found: BTreeMap<usize, usize> = BTreeMap::new();
        for &(y, _) in &close.near[x] {
            for &i in &member[y] {
                found.entry(i).or_insert(y);
            }
        }
        if found.len() >= 3 {
            let three: Vec<(usize, usize)> = found.into_iter().take(3).collect();
            let members = [three[0].1, three[1].1, three[2].1];
            let payload = Payload::MultiplicityBall {
                center: x,
                d,
                pieces: [three[0].0, three[1].0, three[2].0],
                members,
                keys: [x, members[0], members[1], members[2]].iter().map(|&v| ball.key(v).to_string()).collect(),
            };
            let detail = format!("B({}, {d}) meets pieces {:?}", ball.key(x), [three[0].0, three[1].0, three[2].0]);
            return Ok(checked(trace.witness(1, WitnessKind::MultiplicityBall, payload, detail), ball, model, cover));
        }
    }
    trace.push(1, true, format!("every B(x, {d}) meets at most 2 pieces"));

    // 2: two pieces of one class closer than d
    for u in 0..ball.len() {
        for &(v, dist) in &close.near[u] {
            if u64::from(dist) >= d {
                continue;
            }
            for &i in &member[u] {
                if let Some(&j) = member[v].iter().find(|&&j| j != i && cover.classes[j] == cover.classes[i]) {
                    let payload = Payload::ProximityPair {
                        u,
                        v,
                        distance: u64::from(dist),
                        d,
                        pieces: [i, j],
                        keys: vec![ball.key(u).to_string(), ball.key(v).to_string()],
                    };
                    let detail = format!("pieces {i} and {j} share class {} at distance {dist}", cover.classes[i]);
                    return Ok(checked(trace.witness(2, WitnessKind::ProximityPair, payload, detail), ball, model, cover));
                }
            }
        }
    }
    trace.push(2, true, "same-class pieces are d-separated");

    // 3: every relator loop inside the ball lies in one piece
    for x in 0..ball.len() {
        for (ri, r) in p.relators().iter().enumerate() {
            let mut at = Some(x);
            let mut common: Option<BTreeSet<usize>> = None;
            for &l in r.letters() {
                let Some(v) = at else { break };
                let here: BTreeSet<usize> = member[v].iter().copied().collect();
                common = Some(match common {
                    None => here,
                    Some(c) => c.intersection(&here).copied().collect(),
                });
                at = ball.step(v, l);
            }
            if at.is_some() && common.as_ref().is_some_and(|c| c.is_empty()) {
                return Ok(trace.inconclusive(
                    3,
                    format!("WLOG assumption fails: relator {ri} read from {} is split across pieces", ball.key(x)),
                ));
            }
        }
    }
    trace.push(3, true, "every relator loop in the ball lies in a single piece");

    // 4
    let n = params.n_used as usize + 1;
    let test = match build_test_loop(model, ball, params.x0, n, params.n_used, Some(cover.bound)) {
        Ok(t) => t,
        Err(e) => return Ok(trace.inconclusive(4, format!("test loop: {e}"))),
    };
    trace.push(
        4,
        true,
        format!(
            "loop of length {} from {} through {} to {}; length > 200D: {}",
            test.len(),
            ball.key(test.x),
            ball.key(test.x0),
            ball.key(test.y),
            test.checkpoint.map_or("n/a".to_string(), |c| c.to_string())
        ),
    );

    // 5
    let diagram = match build_diagram(p, model, &test.word, params.search) {
        Ok(dg) => dg,
        Err(e) => return Ok(trace.inconclusive(5, format!("diagram filling: {e}"))),
    };
    trace.push(5, true, format!("{} faces, {} vertices", diagram.face_count(), diagram.vertex_count()));

    // 6
    Ok(pullback(&diagram, model, ball, cover, &member, &test, n, trace))
}

fn checked(outcome: RefuteOutcome, ball: &Ball, model: &GroupModel, cover: &Cover) -> RefuteOutcome {
    match outcome {
        RefuteOutcome::Witness(w) if !w.verify(ball, model, cover) => RefuteOutcome::Inconclusive {
            step: "witness verification".into(),
            diagnostics: "payload failed re-verification".into(),
            trace: w.trace,
        },
        o => o,
    }
}

#[allow(clippy::too_many_arguments)]
fn pullback(
    diagram: &Diagram,
    model: &GroupModel,
    ball: &Ball,
    cover: &Cover,
    member: &[Vec<usize>],
    test: &TestLoop,
    n: usize,
    trace: Trace,
) -> RefuteOutcome {
    let images = match diagram_map(diagram, model, ball.element(test.x)) {
        Ok(m) => m.images,
        Err(e) => return trace.inconclusive(6, format!("diagram map: {e}")),
    };
    let Some(f): Option<Vec<usize>> = images.iter().map(|g| ball.index_of_element(model, g)).collect() else {
        return trace.inconclusive(6, "the diagram leaves the ball");
    };
    let faces = diagram.faces();
    // pieces containing every corner of each face
    let face_pieces: Vec<BTreeSet<usize>> = faces
        .iter()
        .map(|face| {
            let mut it = face.iter().map(|&dt| member[f[diagram.origin(dt)]].iter().copied().collect::<BTreeSet<_>>());
            let first = it.next().unwrap_or_default();
            it.fold(first, |a, b| a.intersection(&b).copied().collect())
        })
        .collect();
    let bv = diagram.boundary_vertices();
    let seg_pos: BTreeMap<usize, usize> = (0..=2 * n).map(|i| (bv[i], i)).collect();
    let path_vertices: BTreeSet<usize> = bv[2 * n..].iter().copied().collect();
    let face_of = diagram.face_of_darts();
    let corners = |fi: usize| faces[fi].iter().map(|&dt| diagram.origin(dt)).collect::<Vec<_>>();

    // components of C(B) for each piece B meeting [x, y]
    let pieces_on_segment: BTreeSet<usize> = test.segment.iter().flat_map(|&v| member[v].iter().copied()).collect();
    // (diameter, piece, component, realising pair)
    type Best = (u64, usize, Vec<usize>, (usize, usize));
    let mut best: Option<Best> = None;
    let mut in_u: BTreeMap<usize, u64> = BTreeMap::new();
    for &b in &pieces_on_segment {
        let cells: Vec<usize> = (0..faces.len()).filter(|&fi| face_pieces[fi].contains(&b)).collect();
        for comp in vertex_components(&cells, &corners) {
            let trace_pos: Vec<usize> =
                comp.iter().flat_map(|&fi| corners(fi)).filter_map(|v| seg_pos.get(&v).copied()).collect();
            let (Some(&a), Some(&z)) = (trace_pos.iter().min(), trace_pos.iter().max()) else {
                continue;
            };
            if a <= n && n <= z {
                let dk = (z - a) as u64;
                let e = in_u.entry(b).or_insert(0);
                *e = (*e).max(dk);
                if best.as_ref().is_none_or(|(bd, bb, _, _)| dk > *bd || (dk == *bd && b < *bb)) {
                    best = Some((dk, b, comp, (a, z)));
                }
            }
        }
    }
    let Some((d1, b1, _k1, (a1, _))) = best else {
        return trace.inconclusive(6, format!("U is empty ({INTERVAL_CONVENTION})"));
    };
    if a1 == 0 {
        return trace.inconclusive(6, format!("K1 reaches x, no edge beyond a1 ({INTERVAL_CONVENTION})"));
    }
    let bd = diagram.boundary_darts();
    let e = bd[a1 - 1];
    let Some(r) = face_of[e ^ 1] else {
        return trace.inconclusive(6, "edge e lies in no 2-cell");
    };
    let Some(&b2) = face_pieces[r].iter().find(|&&b| b != b1) else {
        return trace.inconclusive(6, "WLOG assumption fails: the 2-cell of e lies in no second piece");
    };
    let b2_in_u = in_u.get(&b2).copied();
    let pair = [b1, b2];
    let in_c: Vec<bool> = faces
        .iter()
        .map(|face| face.iter().all(|&dt| pair.iter().any(|&b| member[f[diagram.origin(dt)]].contains(&b))))
        .collect();
    let c_cells: Vec<usize> = (0..faces.len()).filter(|&fi| in_c[fi]).collect();
    let x0v = bv[n];
    let Some(k) = vertex_components(&c_cells, &corners).into_iter().find(|c| c.iter().any(|&fi| corners(fi).contains(&x0v)))
    else {
        return trace.inconclusive(6, "no cell of C contains x0");
    };
    let in_k: BTreeSet<usize> = k.iter().copied().collect();
    if k.iter().flat_map(|&fi| corners(fi)).any(|v| path_vertices.contains(&v)) {
        return trace.inconclusive(6, format!("K meets p (B1 = {b1}, B2 = {b2}, d(B1) = {d1})"));
    }
    // frontier darts: K-side dart whose reverse lies in an inner face outside K
    let mut frontier: Vec<(usize, usize, usize)> = Vec::new();
    for &fi in &k {
        for &dt in &faces[fi] {
            if let Some(other) = face_of[dt ^ 1] {
                if !in_k.contains(&other) {
                    frontier.push((dt, fi, other));
                }
            }
        }
    }
    if frontier.is_empty() {
        return trace.inconclusive(6, format!("frontier P is empty (B1 = {b1}, B2 = {b2})"));
    }
    let touches = |dt: usize| [diagram.origin(dt), diagram.target(dt)];
    let mut all_b2 = true;
    for &(e1, f1, c) in &frontier {
        if !face_pieces[f1].contains(&b1) {
            all_b2 &= face_pieces[f1].contains(&b2);
            continue;
        }
        for &(e2, f2, _) in &frontier {
            if e2 == e1 || !face_pieces[f2].contains(&b2) {
                continue;
            }
            let Some(v) = touches(e1).into_iter().find(|v| touches(e2).contains(v)) else {
                continue;
            };
            let Some(&b3) = face_pieces[c].iter().find(|&&b| b != b1 && b != b2) else {
                return trace.inconclusive(6, "WLOG assumption fails: off-side cell c lies in no third piece");
            };
            let vertex = f[v];
            let payload = Payload::TriplePoint {
                vertex,
                pieces: [b1, b2, b3],
                keys: vec![ball.key(vertex).to_string()],
            };
            let detail = format!(
                "B1 = {b1} (d = {d1}), B2 = {b2}, B3 = {b3} meet at {}; {INTERVAL_CONVENTION}",
                ball.key(vertex)
            );
            return checked(trace.witness(6, WitnessKind::TriplePoint, payload, detail), ball, model, cover);
        }
    }
    if all_b2 {
        return trace.inconclusive(
            6,
            format!(
                "maximality: every frontier edge lies in B2 = {b2}; B2 in U: {}; d(B1) = {d1}",
                b2_in_u.map_or("no".to_string(), |v| format!("yes, d(B2) = {v}"))
            ),
        );
    }
    trace.inconclusive(6, format!("frontier scan finds no adjacent mixed pair (B1 = {b1}, B2 = {b2})"))
}

/// Groups face indices into components sharing a corner, ordered by first face.
fn vertex_components(cells: &[usize], corners: &dyn Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut root: Vec<usize> = (0..cells.len()).collect();
    fn find(root: &mut [usize], a: usize) -> usize {
        let mut a = a;
        while root[a] != a {
            root[a] = root[root[a]];
            a = root[a];
        }
        a
    }
    let mut by_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &fi) in cells.iter().enumerate() {
        for v in corners(fi) {
            if let Some(&j) = by_vertex.get(&v) {
                let (a, b) = (find(&mut root, i), find(&mut root, j));
                root[a.max(b)] = a.min(b);
            } else {
                by_vertex.insert(v, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &fi) in cells.iter().enumerate() {
        let r = find(&mut root, i);
        groups.entry(r).or_default().push(fi);
    }
    groups.into_values().collect()
}

/// Distinct nontrivial elements of the ball squaring to the identity.
pub fn involutions(ball: &Ball, model: &GroupModel) -> Vec<usize> {
    (1..ball.len())
        .filter(|&v| {
            let g = ball.element(v);
            model.is_identity(&model.multiply(g, g))
        })
        .collect()
}
