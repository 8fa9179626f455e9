//! Finite-scale asymptotic dimension: covers of a ball, the class-wise
//! d-disconnectedness check, d-multiplicity, proximity colouring, and the
//! explicit covers for `Z`, `Z^2` and the lamplighter group.
//!
//! Every distance here is an exact group distance. Close pairs are found by
//! translating the ball `B(e, r)` to each vertex, so a pair whose geodesic
//! leaves the window is still seen.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{build_ball, Ball, PathInBall};
use crate::error::{Error, Result};
use crate::models::{Element, GroupModel};

/// Identifies the ball a cover lives on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRef {
    pub model_descriptor: String,
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub ball: BallRef,
    /// Sorted vertex indices per piece.
    pub pieces: Vec<Vec<usize>>,
    pub classes: Vec<u32>,
    pub d: u64,
    #[serde(rename = "D")]
    pub bound: u64,
}

impl Cover {
    pub fn new(ball: &Ball, mut pieces: Vec<Vec<usize>>, classes: Vec<u32>, d: u64, bound: u64) -> Self {
        for p in &mut pieces {
            p.sort_unstable();
            p.dedup();
        }
        Cover {
            ball: BallRef {
                model_descriptor: ball.descriptor().to_string(),
                radius: ball.radius(),
            },
            pieces,
            classes,
            d,
            bound,
        }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().collect::<BTreeSet<_>>().len()
    }

    /// Checks that this cover belongs to `ball`: every vertex covered, no
    /// empty piece, one class per piece.
    pub fn validate(&self, ball: &Ball) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidData(format!("cover: {m}")));
        if self.ball.model_descriptor != ball.descriptor() || self.ball.radius != ball.radius() {
            return bad("ball mismatch".into());
        }
        if self.classes.len() != self.pieces.len() {
            return bad("one class per piece required".into());
        }
        let mut covered = vec![false; ball.len()];
        for (i, p) in self.pieces.iter().enumerate() {
            if p.is_empty() {
                return bad(format!("piece {i} is empty"));
            }
            for &v in p {
                if v >= ball.len() {
                    return bad(format!("piece {i} has vertex {v} outside the ball"));
                }
                covered[v] = true;
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return bad(format!("vertex {v} is not covered"));
        }
        Ok(())
    }

    /// Pieces containing each vertex.
    pub fn membership(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n];
        for (i, p) in self.pieces.iter().enumerate() {
            for &v in p {
                out[v].push(i);
            }
        }
        out
    }

    pub fn with_classes(&self, classes: Vec<u32>) -> Cover {
        Cover {
            classes,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cover serialises")
    }

    pub fn from_json(text: &str) -> Result<Cover> {
        serde_json::from_str(text).map_err(|e| Error::InvalidData(format!("cover: {e}")))
    }
}

/// For every ball vertex `x`, the ball vertices `y` with `d(x, y) <= r`
/// together with that distance, ordered by the offset ball.
pub struct ClosePairs {
    pub radius: u64,
    pub near: Vec<Vec<(usize, u32)>>,
}

impl ClosePairs {
    pub fn new(ball: &Ball, model: &GroupModel, r: u64) -> Result<Self> {
        let offsets = build_ball(model, r as u32, usize::MAX)?;
        let offs: Vec<(Element, u32)> =
            (0..offsets.len()).map(|i| (offsets.element(i).clone(), offsets.dist(i))).collect();
        let near = (0..ball.len())
            .map(|x| {
                let ex = ball.element(x);
                offs.iter()
                    .filter_map(|(g, d)| ball.index_of_element(model, &model.multiply(ex, g)).map(|y| (y, *d)))
                    .collect()
            })
            .collect();
        Ok(ClosePairs { radius: r, near })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Diameter,
    Proximity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Def1Violation {
    pub kind: ViolationKind,
    pub u: usize,
    pub v: usize,
    pub distance: u64,
    pub pieces: (usize, usize),
}

impl Def1Violation {
    /// Recomputes the witness distance from the raw elements.
    pub fn verify(&self, ball: &Ball, model: &GroupModel, cover: &Cover, d: u64, bound: u64) -> bool {
        let (i, j) = self.pieces;
        let inside = |p: usize, v: usize| cover.pieces.get(p).is_some_and(|q| q.binary_search(&v).is_ok());
        let dist = ball.group_distance(model, self.u, self.v);
        dist == self.distance
            && inside(i, self.u)
            && inside(j, self.v)
            && match self.kind {
                ViolationKind::Diameter => i == j && dist > bound,
                ViolationKind::Proximity => i != j && cover.classes[i] == cover.classes[j] && dist < d,
            }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Def1Outcome {
    Pass { realized_diameter: u64 },
    Violation(Def1Violation),
}

impl Def1Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Def1Outcome::Pass { .. })
    }
}

/// Exact diameter of a vertex set, with the first pair realising it.
pub fn piece_diameter(ball: &Ball, model: &GroupModel, piece: &[usize]) -> (u64, usize, usize) {
    let mut best = (0, piece.first().copied().unwrap_or(0), piece.first().copied().unwrap_or(0));
    for (i, &u) in piece.iter().enumerate() {
        for &v in &piece[i + 1..] {
            let dist = ball.group_distance(model, u, v);
            if dist > best.0 {
                best = (dist, u, v);
            }
        }
    }
    best
}

/// Every piece has diameter at most `bound` and distinct pieces of one class
/// are at distance at least `d`. The violation reported is the largest
/// diameter breach, else the closest same-class pair (ties to smaller indices).
pub fn check_definition1(ball: &Ball, model: &GroupModel, cover: &Cover, d: u64, bound: u64) -> Result<Def1Outcome> {
    let mut realized = 0;
    let mut worst: Option<Def1Violation> = None;
    for (i, p) in cover.pieces.iter().enumerate() {
        let (diam, u, v) = piece_diameter(ball, model, p);
        realized = realized.max(diam);
        if diam > bound && worst.as_ref().is_none_or(|w| diam > w.distance) {
            worst = Some(Def1Violation {
                kind: ViolationKind::Diameter,
                u,
                v,
                distance: diam,
                pieces: (i, i),
            });
        }
    }
    if let Some(w) = worst {
        return Ok(Def1Outcome::Violation(w));
    }
    if d == 0 {
        return Ok(Def1Outcome::Pass { realized_diameter: realized });
    }
    let close = ClosePairs::new(ball, model, d - 1)?;
    let member = cover.membership(ball.len());
    let mut best: Option<(u64, usize, usize, usize, usize)> = None;
    for x in 0..ball.len() {
        for &(y, dist) in &close.near[x] {
            for &i in &member[x] {
                for &j in &member[y] {
                    if i != j && cover.classes[i] == cover.classes[j] {
                        let cand = (dist as u64, x, y, i, j);
                        if best.is_none_or(|b| cand < b) {
                            best = Some(cand);
                        }
                    }
                }
            }
        }
    }
    Ok(match best {
        None => Def1Outcome::Pass { realized_diameter: realized },
        Some((distance, u, v, i, j)) => Def1Outcome::Violation(Def1Violation {
            kind: ViolationKind::Proximity,
            u,
            v,
            distance,
            pieces: (i, j),
        }),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub d: u64,
    pub k: usize,
    pub argmax: usize,
    pub pieces: Vec<usize>,
}

/// Pieces meeting `B(x, d)` for one vertex.
fn pieces_near(close: &ClosePairs, member: &[Vec<usize>], x: usize) -> Vec<usize> {
    let mut out: BTreeSet<usize> = BTreeSet::new();
    for &(y, _) in &close.near[x] {
        out.extend(member[y].iter().copied());
    }
    out.into_iter().collect()
}

/// Largest number of pieces meeting a ball `B(x, d)`, smallest argmax index.
pub fn multiplicity(ball: &Ball, model: &GroupModel, cover: &Cover, d: u64) -> Result<MultiplicityReport> {
    let close = ClosePairs::new(ball, model, d)?;
    Ok(multiplicity_with(&close, cover, ball.len()))
}

pub fn multiplicity_with(close: &ClosePairs, cover: &Cover, n: usize) -> MultiplicityReport {
    let member = cover.membership(n);
    let mut best = MultiplicityReport {
        d: close.radius,
        k: 0,
        argmax: 0,
        pieces: Vec::new(),
    };
    for x in 0..n {
        let p = pieces_near(close, &member, x);
        if p.len() > best.k {
            best.k = p.len();
            best.argmax = x;
            best.pieces = p;
        }
    }
    best
}

/// One node per piece; an edge joins pieces at distance below the scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProximityGraph {
    pub nodes: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl ProximityGraph {
    pub fn build(ball: &Ball, model: &GroupModel, cover: &Cover, d: u64) -> Result<Self> {
        let mut edges = BTreeSet::new();
        if d > 0 {
            let close = ClosePairs::new(ball, model, d - 1)?;
            let member = cover.membership(ball.len());
            for x in 0..ball.len() {
                for &(y, _) in &close.near[x] {
                    for &i in &member[x] {
                        for &j in &member[y] {
                            if i < j {
                                edges.insert((i, j));
                            }
                        }
                    }
                }
            }
        }
        Ok(ProximityGraph {
            nodes: cover.len(),
            edges,
        })
    }

    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        ProximityGraph { nodes, edges }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_proper(&self, colors: &[u32]) -> bool {
        self.edges.iter().all(|&(a, b)| colors[a] != colors[b])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coloring {
    pub colors: Vec<u32>,
    pub count: usize,
    pub exact: bool,
}

/// Largest degree first, ties to the smaller node, smallest free colour.
pub fn greedy_coloring(g: &ProximityGraph) -> Vec<u32> {
    let adj = g.adjacency();
    let mut order: Vec<usize> = (0..g.nodes).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    let mut colors = vec![u32::MAX; g.nodes];
    for v in order {
        let used: BTreeSet<u32> = adj[v].iter().map(|&u| colors[u]).collect();
        colors[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    colors
}

fn color_count(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

/// DSATUR branch and bound: an optimal colouring.
pub fn exact_coloring(g: &ProximityGraph) -> Vec<u32> {
    let adj = g.adjacency();
    let mut best = greedy_coloring(g);
    let mut best_k = color_count(&best);
    let mut colors = vec![u32::MAX; g.nodes];
    fn go(adj: &[Vec<usize>], colors: &mut Vec<u32>, used: usize, best: &mut Vec<u32>, best_k: &mut usize) {
        if used >= *best_k {
            return;
        }
        // pick the uncoloured node of largest saturation, then degree
        let mut pick: Option<(usize, usize, usize)> = None;
        for v in 0..adj.len() {
            if colors[v] != u32::MAX {
                continue;
            }
            let sat = adj[v].iter().filter(|&&u| colors[u] != u32::MAX).map(|&u| colors[u]).collect::<BTreeSet<_>>().len();
            let key = (sat, adj[v].len(), usize::MAX - v);
            if pick.is_none_or(|p| key > (p.0, p.1, usize::MAX - p.2)) {
                pick = Some((sat, adj[v].len(), v));
            }
        }
        let Some((_, _, v)) = pick else {
            *best = colors.clone();
            *best_k = used;
            return;
        };
        for c in 0..=(used as u32) {
            if (c as usize) + 1 >= *best_k {
                break;
            }
            if adj[v].iter().any(|&u| colors[u] == c) {
                continue;
            }
            colors[v] = c;
            go(adj, colors, used.max(c as usize + 1), best, best_k);
            colors[v] = u32::MAX;
        }
    }
    go(&adj, &mut colors, 0, &mut best, &mut best_k);
    best
}

/// Colours the proximity graph (exactly when it has at most `exact_limit`
/// nodes) and relabels the cover with the colours as classes.
pub fn proximity_color(
    ball: &Ball,
    model: &GroupModel,
    cover: &Cover,
    d: u64,
    exact_limit: usize,
) -> Result<(Cover, Coloring)> {
    let g = ProximityGraph::build(ball, model, cover, d)?;
    let exact = g.nodes <= exact_limit;
    let colors = if exact { exact_coloring(&g) } else { greedy_coloring(&g) };
    let coloring = Coloring {
        count: color_count(&colors),
        colors: colors.clone(),
        exact,
    };
    let mut out = cover.with_classes(colors);
    out.d = d;
    Ok((out, coloring))
}

/// Voronoi cells of a greedy maximal net: a vertex joins the net when no
/// net point lies within `bound / 2`; each vertex goes to its nearest net
/// point, ties to the earlier one. Every cell has diameter at most `bound`.
pub fn net_partition(ball: &Ball, model: &GroupModel, bound: u64) -> Result<Cover> {
    if bound == 0 {
        return Err(Error::InvalidParameter("net bound must be at least 1".into()));
    }
    let r = bound / 2;
    let close = ClosePairs::new(ball, model, r.min(2 * ball.radius() as u64))?;
    let mut net_id = vec![usize::MAX; ball.len()];
    let mut covered = vec![false; ball.len()];
    let mut net = Vec::new();
    for x in 0..ball.len() {
        if covered[x] {
            continue;
        }
        net_id[x] = net.len();
        net.push(x);
        for &(y, _) in &close.near[x] {
            covered[y] = true;
        }
    }
    let mut pieces = vec![Vec::new(); net.len()];
    for x in 0..ball.len() {
        let (_, k) = close.near[x]
            .iter()
            .filter(|&&(y, _)| net_id[y] != usize::MAX)
            .map(|&(y, dist)| (dist, net_id[y]))
            .min()
            .expect("maximal net covers every vertex");
        pieces[k].push(x);
    }
    let classes = vec![0; pieces.len()];
    Ok(Cover::new(ball, pieces, classes, 0, bound))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsdimEstimate {
    pub n: usize,
    pub exact: bool,
    pub realized_diameter: u64,
    pub cover: Cover,
}

/// Upper estimate of the dimension at scale `d`: net partition with bound
/// `bound`, then proximity colouring. The returned cover passes the
/// class-wise check at `(d, realized_diameter)`.
pub fn asdim_at_scale(ball: &Ball, model: &GroupModel, d: u64, bound: u64, exact_limit: usize) -> Result<AsdimEstimate> {
    let net = net_partition(ball, model, bound)?;
    let (cover, coloring) = proximity_color(ball, model, &net, d, exact_limit)?;
    let realized = cover.pieces.iter().map(|p| piece_diameter(ball, model, p).0).max().unwrap_or(0);
    Ok(AsdimEstimate {
        n: coloring.count.saturating_sub(1),
        exact: coloring.exact,
        realized_diameter: realized,
        cover: Cover { bound: realized, ..cover },
    })
}

fn coords(ball: &Ball, v: usize) -> &[i64] {
    match ball.element(v) {
        Element::Vector(c) => c,
        _ => unreachable!("checked free abelian model"),
    }
}

fn require_rank(model: &GroupModel, k: usize) -> Result<()> {
    if model.free_abelian_rank() == Some(k) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cover needs the z^{k} model")))
    }
}

/// Groups vertices by a key; pieces come out in key order.
fn group_by<K: Ord>(ball: &Ball, key: impl Fn(usize) -> K) -> Vec<(K, Vec<usize>)> {
    let mut map: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for v in 0..ball.len() {
        map.entry(key(v)).or_default().push(v);
    }
    map.into_iter().collect()
}

/// Intervals `[kL, (k+1)L)` of `Z`, class `k mod 2`; declared `d = D = L`.
pub fn make_interval_cover_z(ball: &Ball, model: &GroupModel, len: i64) -> Result<Cover> {
    require_rank(model, 1)?;
    if len < 1 {
        return Err(Error::InvalidParameter("interval length must be positive".into()));
    }
    let groups = group_by(ball, |v| coords(ball, v)[0].div_euclid(len));
    let classes = groups.iter().map(|(k, _)| k.rem_euclid(2) as u32).collect();
    let pieces = groups.into_iter().map(|(_, p)| p).collect();
    Ok(Cover::new(ball, pieces, classes, len as u64, len as u64))
}

/// `L x L` bricks of `Z^2`, odd rows shifted by `L/2`, three classes such
/// that touching bricks differ. Declared `d = L/2`, `D = 2(L-1)`.
pub fn make_brick_cover_z2(ball: &Ball, model: &GroupModel, len: i64) -> Result<Cover> {
    require_rank(model, 2)?;
    if len < 2 || len % 2 != 0 {
        return Err(Error::InvalidParameter("brick length must be even and at least 2".into()));
    }
    let brick = |v: usize| {
        let c = coords(ball, v);
        let j = c[1].div_euclid(len);
        let off = j.rem_euclid(2) * (len / 2);
        let i = (c[0] - off).div_euclid(len);
        (j, i)
    };
    let groups = group_by(ball, brick);
    let classes = groups
        .iter()
        .map(|&((j, i), _)| {
            // left edge at h half-bricks; h - j is even
            let h = 2 * i + j.rem_euclid(2);
            let u = (h - j) / 2;
            (u - j).rem_euclid(3) as u32
        })
        .collect();
    let pieces = groups.into_iter().map(|(_, p)| p).collect();
    Ok(Cover::new(ball, pieces, classes, (len / 2) as u64, 2 * (len as u64 - 1)))
}

/// Vertical strips `kW <= x < (k+1)W` of `Z^2`, class `k mod 2`. Pieces are
/// unbounded in the plane; declared `d = W`, `D = 2R + W - 1` on a ball of
/// radius `R`.
pub fn make_strip_cover_z2(ball: &Ball, model: &GroupModel, width: i64) -> Result<Cover> {
    require_rank(model, 2)?;
    if width < 1 {
        return Err(Error::InvalidParameter("strip width must be positive".into()));
    }
    let groups = group_by(ball, |v| coords(ball, v)[0].div_euclid(width));
    let classes = groups.iter().map(|&(k, _)| k.rem_euclid(2) as u32).collect();
    let pieces = groups.into_iter().map(|(_, p)| p).collect();
    let bound = 2 * u64::from(ball.radius()) + width as u64 - 1;
    Ok(Cover::new(ball, pieces, classes, width as u64, bound))
}

/// Pieces `P(k, s)`: cursor in `[kL, (k+1)L)` and lamp pattern `s` outside
/// the window `[kL - d, (k+1)L - 1 + d]`; class `k mod 2`. Declared bound
/// `D = 3L + 4d`.
pub fn make_lamplighter_cover(ball: &Ball, model: &GroupModel, len: i64, d: i64) -> Result<Cover> {
    if !model.is_lamplighter() {
        return Err(Error::InvalidParameter("cover needs the lamplighter model".into()));
    }
    if d < 1 || len < d {
        return Err(Error::InvalidParameter("need L >= d >= 1".into()));
    }
    let key = |v: usize| {
        let Element::Lamp(x) = ball.element(v) else {
            unreachable!("checked lamplighter model")
        };
        let k = x.cursor().div_euclid(len);
        let (lo, hi) = (k * len - d, (k + 1) * len - 1 + d);
        let outside: Vec<i64> = x.lamps().iter().copied().filter(|&p| p < lo || p > hi).collect();
        (k, outside)
    };
    let groups = group_by(ball, key);
    let classes = groups.iter().map(|((k, _), _)| k.rem_euclid(2) as u32).collect();
    let pieces = groups.into_iter().map(|(_, p)| p).collect();
    Ok(Cover::new(ball, pieces, classes, d as u64, (3 * len + 4 * d) as u64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathPieces {
    pub pieces: Vec<usize>,
    /// `ceil((len + 1) / (D + 1))` for geodesic paths.
    pub lower_bound: Option<u64>,
}

pub fn pieces_meeting_path(cover: &Cover, path: &PathInBall, n: usize) -> PathPieces {
    let member = cover.membership(n);
    let pieces: BTreeSet<usize> = path.vertices.iter().flat_map(|&v| member[v].iter().copied()).collect();
    let lower_bound = path.geodesic.then(|| (path.len() as u64 + 1).div_ceil(cover.bound + 1));
    PathPieces {
        pieces: pieces.into_iter().collect(),
        lower_bound,
    }
}

/// If the cover passes the class-wise check at `(d, D)`, whether every ball
/// of radius `d' < d/2` meets at most as many pieces as there are classes.
/// `None` when the check itself fails.
pub fn cross_definition(ball: &Ball, model: &GroupModel, cover: &Cover, d: u64, bound: u64) -> Result<Option<bool>> {
    if !check_definition1(ball, model, cover, d, bound)?.passed() {
        return Ok(None);
    }
    let classes = cover.class_count();
    for dp in 0..d.div_ceil(2) {
        if multiplicity(ball, model, cover, dp)?.k > classes {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Random local edits of a cover: vertices moved to a neighbouring piece,
/// or pieces relabelled. Empty pieces are dropped.
pub fn perturb(ball: &Ball, cover: &Cover, seed: u64, moves: usize) -> Cover {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut owner: Vec<usize> = vec![0; ball.len()];
    for (i, p) in cover.pieces.iter().enumerate() {
        for &v in p {
            owner[v] = i;
        }
    }
    let mut classes = cover.classes.clone();
    let top = classes.iter().copied().max().unwrap_or(0);
    for _ in 0..moves {
        if rng.gen_bool(0.2) {
            let i = rng.gen_range(0..classes.len());
            classes[i] = rng.gen_range(0..=top);
        } else {
            let v = rng.gen_range(0..ball.len());
            if let Some(&(_, w)) = ball.neighbors(v).choose(&mut rng) {
                owner[v] = owner[w];
            }
        }
    }
    let mut pieces = vec![Vec::new(); cover.len()];
    for (v, &o) in owner.iter().enumerate() {
        pieces[o].push(v);
    }
    let (pieces, classes): (Vec<_>, Vec<_>) =
        pieces.into_iter().zip(classes).filter(|(p, _)| !p.is_empty()).unzip();
    Cover::new(ball, pieces, classes, cover.d, cover.bound)
}

/// Random 2-class cover: net pieces of bound `bound` merged with random
/// touching neighbours, then labelled at random.
pub fn agglomerate(ball: &Ball, model: &GroupModel, bound: u64, seed: u64) -> Result<Cover> {
    let net = net_partition(ball, model, bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let member = net.membership(ball.len());
    let mut touching: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); net.len()];
    for x in 0..ball.len() {
        for &(_, y) in ball.neighbors(x) {
            let (a, b) = (member[x][0], member[y][0]);
            if a != b {
                touching[a].insert(b);
            }
        }
    }
    let mut root: Vec<usize> = (0..net.len()).collect();
    fn find(root: &mut [usize], a: usize) -> usize {
        let mut a = a;
        while root[a] != a {
            root[a] = root[root[a]];
            a = root[a];
        }
        a
    }
    for (a, near) in touching.iter().enumerate() {
        if rng.gen_bool(0.5) {
            let nb: Vec<usize> = near.iter().copied().collect();
            if let Some(&b) = nb.choose(&mut rng) {
                let (ra, rb) = (find(&mut root, a), find(&mut root, b));
                root[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in net.pieces.iter().enumerate() {
        groups.entry(find(&mut root, i)).or_default().extend(p);
    }
    let pieces: Vec<Vec<usize>> = groups.into_values().collect();
    let classes = pieces.iter().map(|_| rng.gen_range(0..2)).collect();
    Ok(Cover::new(ball, pieces, classes, 0, bound))
}

/// A partition cover from a piece index per vertex.
pub fn cover_from_assignment(ball: &Ball, assignment: &[usize], classes: Vec<u32>, d: u64, bound: u64) -> Cover {
    let mut by: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &p) in assignment.iter().enumerate() {
        by.entry(p).or_default().push(v);
    }
    let pieces = (0..classes.len()).map(|p| by.remove(&p).unwrap_or_default()).collect();
    Cover::new(ball, pieces, classes, d, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_from_descriptor;

    fn setup(d: &str, r: u32) -> (GroupModel, Ball) {
        let m = model_from_descriptor(d).unwrap();
        let b = build_ball(&m, r, 1 << 22).unwrap();
        (m, b)
    }

    #[test]
    fn interval_cover_checks() {
        let (m, b) = setup("z", 40);
        let c = make_interval_cover_z(&b, &m, 8).unwrap();
        c.validate(&b).unwrap();
        assert_eq!(check_definition1(&b, &m, &c, 8, 8).unwrap(), Def1Outcome::Pass { realized_diameter: 7 });
        match check_definition1(&b, &m, &c, 10, 8).unwrap() {
            Def1Outcome::Violation(v) => {
                assert_eq!((v.kind, v.distance), (ViolationKind::Proximity, 9));
                assert!(v.verify(&b, &m, &c, 10, 8));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(multiplicity(&b, &m, &c, 3).unwrap().k, 2);
        assert_eq!(multiplicity(&b, &m, &c, 0).unwrap().k, 1);
    }

    #[test]
    fn single_piece_passes() {
        let (m, b) = setup("z^2", 5);
        let c = Cover::new(&b, vec![(0..b.len()).collect()], vec![0], 3, 10);
        assert!(check_definition1(&b, &m, &c, 3, 10).unwrap().passed());
    }

    #[test]
    fn brick_multiplicity() {
        let (m, b) = setup("z^2", 48);
        let c = make_brick_cover_z2(&b, &m, 16).unwrap();
        assert_eq!(multiplicity(&b, &m, &c, 3).unwrap().k, 3);
        assert_eq!(c.class_count(), 3);
    }

    #[test]
    fn strips() {
        let (m, b) = setup("z^2", 12);
        let c = make_strip_cover_z2(&b, &m, 4).unwrap();
        // x in [-12, 12] meets strips k = -3..=3
        assert_eq!((c.len(), c.class_count()), (7, 2));
        assert!(check_definition1(&b, &m, &c, 1, c.bound).unwrap().passed());
        assert_eq!(multiplicity(&b, &m, &c, 4).unwrap().k, 3);
    }

    #[test]
    fn colorings() {
        let (m, b) = setup("z", 40);
        let c = make_interval_cover_z(&b, &m, 8).unwrap();
        let (_, col) = proximity_color(&b, &m, &c, 8, 64).unwrap();
        assert_eq!((col.count, col.exact), (2, true));
        // adjacent intervals are at distance 1, so scale 1 needs one colour
        let (_, col) = proximity_color(&b, &m, &c, 1, 64).unwrap();
        assert_eq!(col.count, 1);
        // squares touching at corners need four colours
        let (m, b) = setup("z^2", 12);
        let squares = group_by(&b, |v| {
            let c = coords(&b, v);
            (c[0].div_euclid(4), c[1].div_euclid(4))
        });
        let n = squares.len();
        let c = Cover::new(&b, squares.into_iter().map(|(_, p)| p).collect(), vec![0; n], 0, 6);
        let (_, col) = proximity_color(&b, &m, &c, 3, 64).unwrap();
        assert_eq!(col.count, 4);
    }

    #[test]
    fn exact_matches_brute_force() {
        let cycle5 = ProximityGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        assert_eq!(color_count(&exact_coloring(&cycle5)), 3);
        let k4 = ProximityGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(color_count(&exact_coloring(&k4)), 4);
        let empty = ProximityGraph::from_edges(3, []);
        assert_eq!(color_count(&exact_coloring(&empty)), 1);
    }

    #[test]
    fn nets() {
        let (m, b) = setup("z", 10);
        let c = net_partition(&b, &m, 2).unwrap();
        c.validate(&b).unwrap();
        for p in &c.pieces {
            assert!(p.len() <= 3);
            assert!(piece_diameter(&b, &m, p).0 <= 2);
        }
        assert_eq!(net_partition(&b, &m, 20).unwrap().len(), 1);
    }

    #[test]
    fn asdim_estimates() {
        let (m, b) = setup("z", 40);
        assert_eq!(asdim_at_scale(&b, &m, 8, 16, 64).unwrap().n, 1);
        let (m, b) = setup("cyclic:12", 6);
        assert_eq!(asdim_at_scale(&b, &m, 4, 12, 64).unwrap().n, 0);
    }

    #[test]
    fn path_pieces() {
        let (m, b) = setup("z", 40);
        let c = make_interval_cover_z(&b, &m, 8).unwrap();
        let p = b.geodesic_between(&m, 0, b.index_of("(24)").unwrap()).unwrap();
        let r = pieces_meeting_path(&c, &p, b.len());
        assert_eq!(r.pieces.len(), 4);
        assert_eq!(r.lower_bound, Some(3));
    }

    #[test]
    fn lamplighter_cover() {
        let (m, b) = setup("lamplighter", 10);
        let c = make_lamplighter_cover(&b, &m, 4, 4).unwrap();
        c.validate(&b).unwrap();
        assert_eq!(c.class_count(), 2);
        match check_definition1(&b, &m, &c, 4, 28).unwrap() {
            Def1Outcome::Pass { realized_diameter } => assert!(realized_diameter <= 28),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cover_json_round_trip() {
        let (m, b) = setup("z", 5);
        let c = make_interval_cover_z(&b, &m, 2).unwrap();
        let text = c.to_json();
        assert!(text.contains("\"D\":2"));
        assert_eq!(Cover::from_json(&text).unwrap(), c);
    }
}
