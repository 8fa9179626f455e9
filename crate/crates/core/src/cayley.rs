//! Finite balls of Cayley graphs with exact distances from the identity.
//!
//! Vertex indices follow BFS discovery order with generator order as the
//! tie-break, so everything downstream (covers, caches, reports) is
//! reproducible from `(model descriptor, radius)` alone.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Element, GroupModel};
use crate::presentation::{Letter, Word};

pub const BALL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Ball {
    descriptor: String,
    radius: u32,
    keys: Vec<String>,
    elements: Vec<Element>,
    adjacency: Vec<Vec<(Letter, usize)>>,
    dist: Vec<u32>,
    index: HashMap<String, usize>,
}

/// A path of ball vertices; `labels[i]` takes `vertices[i]` to `vertices[i + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathInBall {
    pub vertices: Vec<usize>,
    pub labels: Vec<Letter>,
    pub geodesic: bool,
}

impl PathInBall {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn word(&self) -> Word {
        Word::new(self.labels.clone())
    }
}

/// Builds `B(e, radius)`. Fails with [`Error::BudgetExceeded`] as soon as
/// more than `max_vertices` vertices would be needed.
pub fn build_ball(model: &GroupModel, radius: u32, max_vertices: usize) -> Result<Ball> {
    let id = model.identity();
    let mut ball = Ball {
        descriptor: model.descriptor().to_string(),
        radius,
        keys: vec![model.canonical_key(&id)],
        elements: vec![id],
        adjacency: vec![Vec::new()],
        dist: vec![0],
        index: HashMap::new(),
    };
    ball.index.insert(ball.keys[0].clone(), 0);
    let letters: Vec<Letter> = model.generators().letters().collect();
    let mut sphere_sizes = vec![1u64];
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let du = ball.dist[u];
        for &l in &letters {
            let y = model.apply(&ball.elements[u], l);
            let key = model.canonical_key(&y);
            let v = match ball.index.get(&key) {
                Some(&v) => v,
                None if du < radius => {
                    if ball.keys.len() >= max_vertices {
                        return Err(Error::BudgetExceeded {
                            estimated_size: estimate(&sphere_sizes, du + 1, radius),
                        });
                    }
                    let v = ball.keys.len();
                    ball.index.insert(key.clone(), v);
                    ball.keys.push(key);
                    ball.elements.push(y);
                    ball.adjacency.push(Vec::new());
                    ball.dist.push(du + 1);
                    if sphere_sizes.len() <= (du + 1) as usize {
                        sphere_sizes.push(0);
                    }
                    sphere_sizes[(du + 1) as usize] += 1;
                    queue.push_back(v);
                    v
                }
                None => continue,
            };
            ball.adjacency[u].push((l, v));
        }
    }
    Ok(ball)
}

/// Extrapolates the ball size from the growth ratio of the last complete shells.
fn estimate(sizes: &[u64], current: u32, radius: u32) -> u64 {
    let total: u64 = sizes.iter().sum();
    let last = *sizes.last().unwrap_or(&1) as f64;
    let prev = if sizes.len() >= 2 {
        sizes[sizes.len() - 2].max(1) as f64
    } else {
        1.0
    };
    let ratio = (last / prev).max(1.0);
    let mut shell = last;
    let mut est = total as f64;
    for _ in current..=radius {
        shell *= ratio;
        est += shell;
    }
    if est.is_finite() && est < u64::MAX as f64 {
        est as u64
    } else {
        u64::MAX
    }
}

/// Exact `d(u, v) = |u^-1 v|` when it is at most `cap`, `None` otherwise.
pub fn distance(model: &GroupModel, u: &Element, v: &Element, cap: u64) -> Option<u64> {
    model.length_capped(&model.difference(u, v), cap)
}

/// Word lengths up to a fixed bound: closed forms where the model has them,
/// otherwise lookups in a precomputed ball.
#[derive(Clone, Debug)]
pub struct LengthOracle<'a> {
    model: &'a GroupModel,
    bound: u64,
    table: Option<Ball>,
}

impl<'a> LengthOracle<'a> {
    pub fn new(model: &'a GroupModel, bound: u32, max_vertices: usize) -> Result<Self> {
        let table = if model.has_closed_form_length() {
            None
        } else {
            Some(build_ball(model, bound, max_vertices)?)
        };
        Ok(LengthOracle {
            model,
            bound: bound as u64,
            table,
        })
    }

    pub fn model(&self) -> &'a GroupModel {
        self.model
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// `|x|` when it is at most the bound.
    pub fn length(&self, x: &Element) -> Option<u64> {
        match &self.table {
            None => self.model.length_capped(x, self.bound),
            Some(b) => b.index_of_element(self.model, x).map(|v| b.dist(v) as u64),
        }
    }

    pub fn distance(&self, u: &Element, v: &Element) -> Option<u64> {
        self.length(&self.model.difference(u, v))
    }
}

impl Ball {
    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, v: usize) -> &str {
        &self.keys[v]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn element(&self, v: usize) -> &Element {
        &self.elements[v]
    }

    pub fn dist(&self, v: usize) -> u32 {
        self.dist[v]
    }

    pub fn dists(&self) -> &[u32] {
        &self.dist
    }

    pub fn neighbors(&self, v: usize) -> &[(Letter, usize)] {
        &self.adjacency[v]
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn index_of_element(&self, model: &GroupModel, x: &Element) -> Option<usize> {
        self.index_of(&model.canonical_key(x))
    }

    /// The neighbour `v * l`, when it lies in the ball.
    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.adjacency[v].iter().find(|(m, _)| *m == l).map(|&(_, w)| w)
    }

    pub fn sphere(&self, n: u32) -> Result<Vec<usize>> {
        if n > self.radius {
            return Err(Error::RadiusOutOfRange {
                requested: n,
                radius: self.radius,
            });
        }
        Ok((0..self.len()).filter(|&v| self.dist[v] == n).collect())
    }

    /// The sub-ball of radius `r`. Identical to a fresh build because BFS
    /// order lists the smaller ball first.
    pub fn restrict(&self, r: u32) -> Result<Ball> {
        if r > self.radius {
            return Err(Error::RadiusOutOfRange {
                requested: r,
                radius: self.radius,
            });
        }
        let n = self.dist.partition_point(|&d| d <= r);
        Ok(Ball {
            descriptor: self.descriptor.clone(),
            radius: r,
            keys: self.keys[..n].to_vec(),
            elements: self.elements[..n].to_vec(),
            adjacency: self.adjacency[..n]
                .iter()
                .map(|a| a.iter().copied().filter(|&(_, v)| v < n).collect())
                .collect(),
            dist: self.dist[..n].to_vec(),
            index: self.keys[..n].iter().cloned().zip(0..n).collect(),
        })
    }

    /// `|S(n)|` for `n = 0..=radius`.
    pub fn sphere_sizes(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.radius as usize + 1];
        for &d in &self.dist {
            out[d as usize] += 1;
        }
        out
    }

    /// Exact group distance between two ball vertices.
    pub fn group_distance(&self, model: &GroupModel, u: usize, v: usize) -> u64 {
        let cap = (self.dist[u] + self.dist[v]) as u64;
        distance(model, &self.elements[u], &self.elements[v], cap)
            .expect("distance is bounded by the path through the identity")
    }

    /// BFS inside the ball from `from`, skipping vertices rejected by `allowed`.
    /// Returns the parent table (vertex, label into it).
    pub(crate) fn bfs_parents(
        &self,
        from: usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Vec<Option<(usize, Letter)>> {
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; self.len()];
        let mut seen = vec![false; self.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &(l, v) in &self.adjacency[u] {
                if !seen[v] && allowed(v) {
                    seen[v] = true;
                    parent[v] = Some((u, l));
                    queue.push_back(v);
                }
            }
        }
        parent
    }

    pub(crate) fn trace_path(
        parent: &[Option<(usize, Letter)>],
        from: usize,
        to: usize,
    ) -> Option<(Vec<usize>, Vec<Letter>)> {
        let mut vertices = vec![to];
        let mut labels = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, l) = parent[cur]?;
            vertices.push(p);
            labels.push(l);
            cur = p;
        }
        vertices.reverse();
        labels.reverse();
        Some((vertices, labels))
    }

    /// Shortest path inside the ball; flagged geodesic only when its length
    /// equals the exact group distance.
    pub fn geodesic_between(&self, model: &GroupModel, u: usize, v: usize) -> Result<PathInBall> {
        if u >= self.len() || v >= self.len() {
            return Err(Error::NoPathWithinBall);
        }
        let parent = self.bfs_parents(u, |_| true);
        let (vertices, labels) =
            Self::trace_path(&parent, u, v).ok_or(Error::NoPathWithinBall)?;
        let geodesic = labels.len() as u64 == self.group_distance(model, u, v);
        Ok(PathInBall {
            vertices,
            labels,
            geodesic,
        })
    }

    pub fn to_json(&self) -> String {
        let file = BallFile {
            format_version: BALL_FORMAT_VERSION,
            model_descriptor: self.descriptor.clone(),
            radius: self.radius,
            vertices: self.keys.clone(),
            adjacency: self
                .adjacency
                .iter()
                .map(|a| a.iter().map(|&(l, v)| (l.signed(), v)).collect())
                .collect(),
            dist: self.dist.clone(),
        };
        serde_json::to_string(&file).expect("ball serialises")
    }

    /// Loads a cached ball, re-deriving every element from the stored edges
    /// and checking every invariant of a fresh build.
    pub fn from_json(model: &GroupModel, text: &str) -> Result<Ball> {
        let bad = |m: String| Error::InvalidData(format!("ball cache: {m}"));
        let file: BallFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if file.format_version != BALL_FORMAT_VERSION {
            return Err(bad(format!("format version {}", file.format_version)));
        }
        if file.model_descriptor != model.descriptor() {
            return Err(bad(format!("model {:?}", file.model_descriptor)));
        }
        let n = file.vertices.len();
        if n == 0 || file.adjacency.len() != n || file.dist.len() != n {
            return Err(bad("length mismatch".into()));
        }
        let mut adjacency = Vec::with_capacity(n);
        for row in &file.adjacency {
            let mut out = Vec::with_capacity(row.len());
            for &(s, v) in row {
                let l = Letter::from_signed(s).ok_or_else(|| bad(format!("letter {s}")))?;
                if l.generator() >= model.generators().len() || v >= n {
                    return Err(bad(format!("edge ({s}, {v})")));
                }
                out.push((l, v));
            }
            adjacency.push(out);
        }
        let id = model.identity();
        if file.dist[0] != 0 || file.vertices[0] != model.canonical_key(&id) {
            return Err(bad("vertex 0 is not the identity".into()));
        }
        let mut elements = vec![id];
        for (v, row) in adjacency.iter().enumerate().skip(1) {
            if file.dist[v] < file.dist[v - 1] || file.dist[v] > file.radius {
                return Err(bad(format!("distance order at {v}")));
            }
            let (l, u) = *row
                .iter()
                .find(|&&(_, u)| u < v && file.dist[u] + 1 == file.dist[v])
                .ok_or_else(|| bad(format!("vertex {v} has no parent")))?;
            elements.push(model.apply(&elements[u], l.inverse()));
        }
        let mut index = HashMap::with_capacity(n);
        for (v, e) in elements.iter().enumerate() {
            if model.canonical_key(e) != file.vertices[v] {
                return Err(bad(format!("key mismatch at {v}")));
            }
            if index.insert(file.vertices[v].clone(), v).is_some() {
                return Err(bad(format!("duplicate key at {v}")));
            }
        }
        let full = model.generators().len() * 2;
        for v in 0..n {
            for &(l, u) in &adjacency[v] {
                if model.canonical_key(&model.apply(&elements[v], l)) != file.vertices[u]
                    || !adjacency[u].contains(&(l.inverse(), v))
                    || file.dist[u].abs_diff(file.dist[v]) > 1
                {
                    return Err(bad(format!("edge {v} -{}-> {u}", l.signed())));
                }
            }
            if file.dist[v] < file.radius && adjacency[v].len() != full {
                return Err(bad(format!("vertex {v} is missing neighbours")));
            }
        }
        Ok(Ball {
            descriptor: file.model_descriptor,
            radius: file.radius,
            keys: file.vertices,
            elements,
            adjacency,
            dist: file.dist,
            index,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BallFile {
    format_version: u32,
    model_descriptor: String,
    radius: u32,
    vertices: Vec<String>,
    adjacency: Vec<Vec<(i32, usize)>>,
    dist: Vec<u32>,
}
