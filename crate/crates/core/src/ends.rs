//! Ends at finite scale: complement components of annuli, uniform
//! one-endedness probes, and paths that avoid a ball.
//!
//! A component counts as unbounded when it reaches the outer sphere of the
//! window. That is an estimate; stabilisation over a schedule of windows is
//! reported separately and never promoted to a proof.

use std::collections::VecDeque;

use serde::Serialize;

use crate::cayley::{build_ball, Ball, PathInBall};
use crate::error::{Error, Result};
use crate::models::GroupModel;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub size: usize,
    pub touches_outer: bool,
    /// Smallest vertex index in the component.
    pub representative: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndsReport {
    pub inner: u32,
    pub outer: u32,
    pub components: Vec<Component>,
    pub end_count_estimate: usize,
}

/// Labels the connected components of the vertices kept by `keep`, numbered
/// by smallest vertex index.
pub(crate) fn label_components(ball: &Ball, keep: impl Fn(usize) -> bool) -> (Vec<Option<usize>>, usize) {
    let mut label = vec![None; ball.len()];
    let mut count = 0;
    for s in 0..ball.len() {
        if label[s].is_some() || !keep(s) {
            continue;
        }
        label[s] = Some(count);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &(_, v) in ball.neighbors(u) {
                if label[v].is_none() && keep(v) {
                    label[v] = Some(count);
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Components of `B(e, R)` minus the open ball `{|g| < r}`: the kept
/// vertices are those with `r <= |g| <= R`.
pub fn complement_components(ball: &Ball, r: u32) -> Result<EndsReport> {
    let outer = ball.radius();
    if r >= outer {
        return Err(Error::RadiusOutOfRange {
            requested: r,
            radius: outer,
        });
    }
    let (label, count) = label_components(ball, |v| ball.dist(v) >= r);
    let mut components: Vec<Component> = (0..count)
        .map(|_| Component {
            size: 0,
            touches_outer: false,
            representative: usize::MAX,
        })
        .collect();
    for (v, l) in label.iter().enumerate() {
        if let Some(c) = *l {
            let comp = &mut components[c];
            comp.size += 1;
            comp.touches_outer |= ball.dist(v) == outer;
            comp.representative = comp.representative.min(v);
        }
    }
    let end_count_estimate = components.iter().filter(|c| c.touches_outer).count();
    Ok(EndsReport {
        inner: r,
        outer,
        components,
        end_count_estimate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "ends", rename_all = "snake_case")]
pub enum EndsVerdict {
    Stable(usize),
    Growing,
    Inconclusive,
}

impl std::fmt::Display for EndsVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EndsVerdict::Stable(k) => write!(f, "stable({k})"),
            EndsVerdict::Growing => f.write_str("growing"),
            EndsVerdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndsEstimate {
    pub reports: Vec<EndsReport>,
    pub verdict: EndsVerdict,
}

impl EndsEstimate {
    pub fn counts(&self) -> Vec<usize> {
        self.reports.iter().map(|r| r.end_count_estimate).collect()
    }
}

pub fn verdict(counts: &[usize]) -> EndsVerdict {
    match counts.first() {
        None => EndsVerdict::Inconclusive,
        Some(&k) if counts.iter().all(|&c| c == k) => EndsVerdict::Stable(k),
        _ if counts.windows(2).all(|w| w[0] < w[1]) => EndsVerdict::Growing,
        _ => EndsVerdict::Inconclusive,
    }
}

/// End counts over a schedule of `(r, R)` windows, each with `R >= margin * r`.
/// One ball of the largest radius is built and restricted per window.
pub fn ends_estimate(
    model: &GroupModel,
    schedule: &[(u32, u32)],
    margin: u32,
    max_vertices: usize,
) -> Result<EndsEstimate> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    for &(r, big) in schedule {
        if big < margin.saturating_mul(r) || big <= r {
            return Err(Error::InvalidParameter(format!(
                "window ({r},{big}) violates R >= {margin}r"
            )));
        }
    }
    let top = schedule.iter().map(|&(_, big)| big).max().unwrap();
    let ball = build_ball(model, top, max_vertices)?;
    let mut reports = Vec::with_capacity(schedule.len());
    for &(r, big) in schedule {
        reports.push(complement_components(&ball.restrict(big)?, r)?);
    }
    let counts: Vec<usize> = reports.iter().map(|r| r.end_count_estimate).collect();
    Ok(EndsEstimate {
        reports,
        verdict: verdict(&counts),
    })
}

/// Most obstacle centres probed by [`uniform_scale`].
pub const MAX_CENTERS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum UniformScale {
    /// Every probed obstacle leaves exactly one component of diameter above `m`.
    Bounded { m: u64, centers: usize },
    /// This obstacle leaves two components of diameter `second` or more,
    /// which no `m` separates from the largest.
    Inconclusive { center: usize, second: u64 },
}

/// Deterministic stratified sample: every vertex when affordable, else
/// evenly spaced indices (BFS order keeps shells contiguous).
fn sample_centers(ball: &Ball, max_dist: u32) -> Vec<usize> {
    let eligible = ball.dists().partition_point(|&d| d <= max_dist);
    if eligible <= MAX_CENTERS {
        return (0..eligible).collect();
    }
    (0..MAX_CENTERS).map(|i| i * eligible / MAX_CENTERS).collect()
}

fn exact_diameter(ball: &Ball, model: &GroupModel, members: &[usize]) -> u64 {
    let mut best = 0;
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            best = best.max(ball.group_distance(model, u, v));
        }
    }
    best
}

/// Probes uniform one-endedness at obstacle diameter `n` inside `ball`
/// (radius `R > n`): obstacles are `B(c, n/2)` for sampled centres `c` with
/// `|c| <= R - n`, and `m` is the least value leaving exactly one component
/// of diameter above it for every obstacle.
pub fn uniform_scale(ball: &Ball, model: &GroupModel, n: u32) -> Result<UniformScale> {
    let big = ball.radius();
    if n >= big {
        return Err(Error::InvalidParameter(format!("obstacle {n} not below radius {big}")));
    }
    let centers = sample_centers(ball, big - n);
    let half = n / 2;
    let mut m = 0u64;
    let mut principal_floor = u64::MAX;
    for &c in &centers {
        let mut blocked = vec![false; ball.len()];
        if n > 0 {
            // Geodesics from c of length <= n/2 stay inside the ball, so the
            // in-ball BFS depth is the group distance here.
            let mut depth = vec![u32::MAX; ball.len()];
            depth[c] = 0;
            blocked[c] = true;
            let mut queue = VecDeque::from([c]);
            while let Some(u) = queue.pop_front() {
                if depth[u] == half {
                    continue;
                }
                for &(_, v) in ball.neighbors(u) {
                    if depth[v] == u32::MAX {
                        depth[v] = depth[u] + 1;
                        blocked[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        let (label, count) = label_components(ball, |v| !blocked[v]);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (v, l) in label.iter().enumerate() {
            if let Some(k) = l {
                members[*k].push(v);
            }
        }
        // principal = largest by size, ties to the smaller index
        let principal = (0..count).max_by_key(|&k| (members[k].len(), std::cmp::Reverse(k)));
        let Some(principal) = principal else { continue };
        let mut second = 0u64;
        for (k, mem) in members.iter().enumerate() {
            if k != principal {
                second = second.max(exact_diameter(ball, model, mem));
            }
        }
        let mem = &members[principal];
        let rep = mem[0];
        let ecc = mem.iter().map(|&v| ball.group_distance(model, rep, v)).max().unwrap_or(0);
        let first = if ecc > second {
            ecc
        } else {
            exact_diameter(ball, model, mem)
        };
        if first <= second {
            return Ok(UniformScale::Inconclusive { center: c, second });
        }
        m = m.max(second);
        principal_floor = principal_floor.min(first);
    }
    if m >= principal_floor {
        return Ok(UniformScale::Inconclusive {
            center: centers[0],
            second: m,
        });
    }
    Ok(UniformScale::Bounded {
        m,
        centers: centers.len(),
    })
}

/// BFS path from `x` to `y` avoiding the closed ball `B(x0, radius)`, with
/// the forbidden set measured by exact group distance.
pub fn avoiding_path(
    ball: &Ball,
    model: &GroupModel,
    x: usize,
    y: usize,
    x0: usize,
    radius: u64,
) -> Result<PathInBall> {
    let forbidden: Vec<bool> = (0..ball.len())
        .map(|v| ball.group_distance(model, x0, v) <= radius)
        .collect();
    if forbidden[x] || forbidden[y] {
        return Err(Error::InvalidParameter(
            "path endpoints lie inside the forbidden ball".into(),
        ));
    }
    let parent = ball.bfs_parents(x, |v| !forbidden[v]);
    let (vertices, labels) = Ball::trace_path(&parent, x, y).ok_or(Error::NoAvoidingPath)?;
    let geodesic = labels.len() as u64 == ball.group_distance(model, x, y);
    Ok(PathInBall {
        vertices,
        labels,
        geodesic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::model_from_descriptor;

    fn setup(d: &str, r: u32) -> (GroupModel, Ball) {
        let m = model_from_descriptor(d).unwrap();
        let b = build_ball(&m, r, 1 << 20).unwrap();
        (m, b)
    }

    #[test]
    fn annulus_components() {
        let (_, b) = setup("z", 10);
        let rep = complement_components(&b, 2).unwrap();
        assert_eq!(rep.components.len(), 2);
        assert_eq!(rep.end_count_estimate, 2);
        let (_, b) = setup("z^2", 12);
        assert_eq!(complement_components(&b, 2).unwrap().end_count_estimate, 1);
        let (_, b) = setup("free:2", 6);
        let rep = complement_components(&b, 1).unwrap();
        assert_eq!(rep.end_count_estimate, 4);
        let total: usize = rep.components.iter().map(|c| c.size).sum();
        assert_eq!(total, b.len() - 1);
        assert!(complement_components(&b, 6).is_err());
    }

    #[test]
    fn estimates() {
        let z = model_from_descriptor("z").unwrap();
        let e = ends_estimate(&z, &[(1, 4), (2, 8), (3, 12)], 2, 1 << 20).unwrap();
        assert_eq!(e.verdict, EndsVerdict::Stable(2));
        let f = model_from_descriptor("free:2").unwrap();
        let e = ends_estimate(&f, &[(1, 6), (2, 8), (3, 10)], 2, 1 << 20).unwrap();
        assert_eq!((e.counts(), e.verdict), (vec![4, 12, 36], EndsVerdict::Growing));
        let l = model_from_descriptor("lamplighter").unwrap();
        let e = ends_estimate(&l, &[(1, 6), (2, 8)], 2, 1 << 20).unwrap();
        assert_eq!(e.verdict, EndsVerdict::Stable(1), "{:?}", e.counts());
        let z2 = model_from_descriptor("z^2").unwrap();
        let e = ends_estimate(&z2, &[(1, 8), (2, 12), (3, 16)], 2, 1 << 20).unwrap();
        assert_eq!(e.verdict, EndsVerdict::Stable(1));
        let c = model_from_descriptor("cyclic:6").unwrap();
        let e = ends_estimate(&c, &[(3, 6)], 2, 1 << 20).unwrap();
        assert_eq!(e.verdict, EndsVerdict::Stable(0));
        assert!(ends_estimate(&z, &[(3, 5)], 2, 1 << 20).is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(verdict(&[1, 1]), EndsVerdict::Stable(1));
        assert_eq!(verdict(&[1, 2, 3]), EndsVerdict::Growing);
        assert_eq!(verdict(&[2, 1]), EndsVerdict::Inconclusive);
    }

    #[test]
    fn uniform_probe() {
        let (m, b) = setup("z^2", 20);
        assert!(matches!(uniform_scale(&b, &m, 4).unwrap(), UniformScale::Bounded { .. }));
        assert!(matches!(
            uniform_scale(&b, &m, 0).unwrap(),
            UniformScale::Bounded { m: 0, .. }
        ));
        let (m, b) = setup("z", 20);
        assert!(matches!(
            uniform_scale(&b, &m, 2).unwrap(),
            UniformScale::Inconclusive { .. }
        ));
    }

    #[test]
    fn avoiding() {
        let (m, b) = setup("z^2", 8);
        let (x, y) = (b.index_of("(6,0)").unwrap(), b.index_of("(-6,0)").unwrap());
        let p = avoiding_path(&b, &m, x, y, 0, 4).unwrap();
        assert!(p.len() >= 12);
        assert!(p.vertices.iter().all(|&v| b.group_distance(&m, 0, v) > 4));
        let p = avoiding_path(&b, &m, x, y, 0, 0).unwrap();
        assert!(!p.vertices.contains(&0));
        let (m, b) = setup("z", 8);
        let (x, y) = (b.index_of("(6)").unwrap(), b.index_of("(-6)").unwrap());
        assert_eq!(avoiding_path(&b, &m, x, y, 0, 4), Err(Error::NoAvoidingPath));
    }
}
