//! Van Kampen diagrams as combinatorial maps.
//!
//! A diagram is a set of darts (directed edge halves). Dart `d` and its
//! reverse `d ^ 1` form one edge, `sigma` gives the next dart anticlockwise
//! around the origin vertex, and faces are the orbits of
//! `phi(d) = sigma(d ^ 1)`. With this convention a face lies to the left
//! of its darts: inner faces read clockwise and the outer face reads the
//! boundary anticlockwise. Planarity is checked with Euler's formula, never
//! assumed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Element, GroupModel};
use crate::presentation::{Letter, Presentation, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    origin: Vec<usize>,
    label: Vec<Letter>,
    sigma: Vec<usize>,
    vertices: usize,
    base: Option<usize>,
    base_vertex: usize,
    coords: Option<Vec<(f64, f64)>>,
}

/// Mutable map with tombstones, compacted into a [`Diagram`] when done.
#[derive(Clone, Debug)]
struct Map {
    origin: Vec<usize>,
    label: Vec<Letter>,
    sigma: Vec<usize>,
    dart_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    base: Option<usize>,
    base_vertex: usize,
}

impl Map {
    fn new() -> Self {
        Map {
            origin: Vec::new(),
            label: Vec::new(),
            sigma: Vec::new(),
            dart_alive: Vec::new(),
            vertex_alive: vec![true],
            base: None,
            base_vertex: 0,
        }
    }

    fn from_diagram(d: &Diagram) -> Self {
        Map {
            origin: d.origin.clone(),
            label: d.label.clone(),
            sigma: d.sigma.clone(),
            dart_alive: vec![true; d.origin.len()],
            vertex_alive: vec![true; d.vertices],
            base: d.base,
            base_vertex: d.base_vertex,
        }
    }

    fn new_vertex(&mut self) -> usize {
        self.vertex_alive.push(true);
        self.vertex_alive.len() - 1
    }

    /// New edge; returns the dart `from -> to`. Rotations start as fixed points.
    fn new_edge(&mut self, from: usize, to: usize, l: Letter) -> usize {
        let d = self.origin.len();
        self.origin.extend([from, to]);
        self.label.extend([l, l.inverse()]);
        self.sigma.extend([d, d + 1]);
        self.dart_alive.extend([true, true]);
        d
    }

    fn phi(&self, d: usize) -> usize {
        self.sigma[d ^ 1]
    }

    fn sigma_inv(&self, d: usize) -> usize {
        let mut x = d;
        loop {
            let n = self.sigma[x];
            if n == d {
                return x;
            }
            x = n;
        }
    }

    fn orbit(&self, d: usize) -> Vec<usize> {
        let mut out = vec![d];
        let mut x = self.phi(d);
        while x != d {
            out.push(x);
            x = self.phi(x);
        }
        out
    }

    fn target(&self, d: usize) -> usize {
        self.origin[d ^ 1]
    }

    fn boundary(&self) -> Vec<usize> {
        self.base.map(|b| self.orbit(b)).unwrap_or_default()
    }

    fn unlink(&mut self, d: usize) {
        let p = self.sigma_inv(d);
        if p != d {
            self.sigma[p] = self.sigma[d];
        }
        self.sigma[d] = d;
    }

    fn delete_edge(&mut self, d: usize) {
        self.unlink(d);
        self.unlink(d ^ 1);
        self.dart_alive[d] = false;
        self.dart_alive[d ^ 1] = false;
    }

    fn rotation_cycle(&self, d: usize) -> Vec<usize> {
        let mut out = vec![d];
        let mut x = self.sigma[d];
        while x != d {
            out.push(x);
            x = self.sigma[x];
        }
        out
    }

    /// Kills every dart and vertex not connected to `keep`.
    fn prune_to_component(&mut self, keep: usize) {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for d in 0..self.origin.len() {
            if self.dart_alive[d] {
                adj.entry(self.origin[d]).or_default().push(self.target(d));
            }
        }
        let mut seen = HashSet::from([keep]);
        let mut queue = VecDeque::from([keep]);
        while let Some(u) = queue.pop_front() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        for v in 0..self.vertex_alive.len() {
            if !seen.contains(&v) {
                self.vertex_alive[v] = false;
            }
        }
        for d in 0..self.origin.len() {
            if self.dart_alive[d] && !seen.contains(&self.origin[d]) {
                self.dart_alive[d] = false;
            }
        }
    }

    fn collapse_to(&mut self, v: usize) {
        self.dart_alive.iter_mut().for_each(|a| *a = false);
        for (i, a) in self.vertex_alive.iter_mut().enumerate() {
            *a = i == v;
        }
        self.base = None;
        self.base_vertex = v;
    }

    /// After folding `a` with `b`: `a` stands in for `b ^ 1`, and a base at
    /// the start of the cancelled pair moves past it to `next`.
    fn rebase_fold(&mut self, a: usize, b: usize, next: usize) {
        if self.base == Some(b ^ 1) {
            self.base = Some(a);
            self.base_vertex = self.origin[a];
        } else {
            self.rebase(&[a, b], next);
        }
    }

    fn rebase(&mut self, from: &[usize], to: usize) {
        if self.base.is_some_and(|b| from.contains(&b)) {
            self.base = Some(to);
        }
        if let Some(b) = self.base {
            self.base_vertex = self.origin[b];
        }
    }

    /// Folds the consecutive face darts `a`, `phi(a)`, whose labels cancel.
    /// `outer` says whether they lie on the outer face.
    fn fold(&mut self, a: usize, outer: bool) {
        let b = self.phi(a);
        debug_assert_eq!(self.label[b], self.label[a].inverse());
        let (p, q, r) = (self.origin[a], self.origin[b], self.target(b));
        if b == a ^ 1 {
            // spike into the leaf q
            let next = self.phi(b);
            self.delete_edge(a);
            self.vertex_alive[q] = false;
            if next == a || next == b {
                self.collapse_to(p);
            } else {
                self.rebase(&[a, b], next);
            }
            return;
        }
        let c = self.phi(b);
        if c == a {
            if outer {
                self.collapse_to(p);
            } else {
                self.delete_edge(b);
                self.rebase_fold(a, b, a);
            }
            return;
        }
        if c == b ^ 1 {
            // b runs into the leaf r
            self.delete_edge(b);
            self.vertex_alive[r] = false;
            self.rebase_fold(a, b, a);
            return;
        }
        let pp = self.sigma_inv(a);
        let y = self.sigma_inv(b ^ 1);
        self.unlink(b);
        self.sigma[pp] = c;
        self.sigma[y] = a;
        self.sigma[b ^ 1] = b ^ 1;
        self.dart_alive[b] = false;
        self.dart_alive[b ^ 1] = false;
        if r != p {
            for d in 0..self.origin.len() {
                if self.dart_alive[d] && self.origin[d] == r {
                    self.origin[d] = p;
                }
            }
            self.vertex_alive[r] = false;
            self.rebase_fold(a, b, c);
            return;
        }
        let cyc = self.rotation_cycle(a);
        if !cyc.contains(&c) {
            let p2 = self.new_vertex();
            for &d in &cyc {
                self.origin[d] = p2;
            }
        }
        self.rebase_fold(a, b, c);
        let keep = match self.base {
            Some(bd) => self.origin[bd],
            None => self.origin[c],
        };
        self.prune_to_component(keep);
    }

    /// Inserts the spike `l l^-1` before boundary position `pos`.
    fn add_spike(&mut self, pos: usize, l: Letter) {
        let bd = self.boundary();
        let v = if bd.is_empty() { self.base_vertex } else { self.origin[bd[pos % bd.len()]] };
        let u = self.new_vertex();
        let e = self.new_edge(v, u, l);
        if !bd.is_empty() {
            let incoming = bd[(pos + bd.len() - 1) % bd.len()];
            let next = bd[pos % bd.len()];
            self.sigma[incoming ^ 1] = e;
            self.sigma[e] = next;
        }
        if bd.is_empty() || pos == 0 {
            self.base = Some(e);
            self.base_vertex = v;
        }
    }

    fn compact(&self, coords: Option<&[(f64, f64)]>) -> Diagram {
        let mut vmap = vec![usize::MAX; self.vertex_alive.len()];
        let mut nv = 0;
        for (v, &a) in self.vertex_alive.iter().enumerate() {
            if a {
                vmap[v] = nv;
                nv += 1;
            }
        }
        let mut dmap = vec![usize::MAX; self.origin.len()];
        let mut nd = 0;
        for e in 0..self.origin.len() / 2 {
            if self.dart_alive[2 * e] {
                dmap[2 * e] = nd;
                dmap[2 * e + 1] = nd + 1;
                nd += 2;
            }
        }
        let mut origin = vec![0; nd];
        let mut label = vec![Letter::new(0, false); nd];
        let mut sigma = vec![0; nd];
        for d in 0..self.origin.len() {
            if self.dart_alive[d] {
                origin[dmap[d]] = vmap[self.origin[d]];
                label[dmap[d]] = self.label[d];
                sigma[dmap[d]] = dmap[self.sigma[d]];
            }
        }
        let coords = coords.map(|c| {
            self.vertex_alive
                .iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .map(|(v, _)| c[v])
                .collect()
        });
        Diagram {
            origin,
            label,
            sigma,
            vertices: nv,
            base: self.base.map(|b| dmap[b]),
            base_vertex: vmap[self.base_vertex],
            coords,
        }
    }
}

/// One factor `u r^sign u^-1` of a product of relator conjugates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub conjugator: Word,
    pub relator: usize,
    pub inverse: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_factors: usize,
    pub max_nodes: usize,
    /// Longest word handed to the generic search.
    pub max_word_len: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_factors: 8,
            max_nodes: 2_000_000,
            max_word_len: 16,
        }
    }
}

fn relator_power(p: &Presentation, f: &Factor) -> Word {
    let r = &p.relators()[f.relator];
    if f.inverse {
        r.inverse()
    } else {
        r.clone()
    }
}

/// Free product of the factors, freely reduced.
pub fn product(p: &Presentation, factors: &[Factor]) -> Word {
    let mut out = Word::empty();
    for f in factors {
        out = out
            .concat(&f.conjugator)
            .concat(&relator_power(p, f))
            .concat(&f.conjugator.inverse())
            .free_reduce();
    }
    out
}

/// Writes `w` as a product of relator conjugates in the free group with
/// the fewest factors found by iterative deepening: a step splits the
/// current word as `x y` and replaces it by `x rho^-1 y` for a cyclic
/// conjugate `rho` of a relator or its inverse.
pub fn conjugate_decomposition(
    p: &Presentation,
    model: &GroupModel,
    w: &Word,
    bounds: SearchBounds,
) -> Result<Vec<Factor>> {
    if !model.is_identity(&model.evaluate_word(w)?) {
        return Err(Error::NotIdentity);
    }
    let target = w.free_reduce();
    if target.is_empty() {
        return Ok(Vec::new());
    }
    let m = p.max_relator_length()?;
    // (rotation rho, relator index, inverse, rotation prefix t with r^e = t s, rho = s t)
    let mut moves: Vec<(Word, usize, bool, Word)> = Vec::new();
    for (i, r) in p.relators().iter().enumerate() {
        for inverse in [false, true] {
            let re = if inverse { r.inverse() } else { r.clone() };
            let mut seen = BTreeSet::new();
            for k in 0..re.len() {
                let rho = re.rotate(k);
                if seen.insert(rho.clone()) {
                    moves.push((rho, i, inverse, re.prefix(k)));
                }
            }
        }
    }
    let mut nodes = 0usize;
    for depth in 1..=bounds.max_factors {
        let mut stack = Vec::new();
        match search(&target, depth, m, &moves, &mut stack, &mut nodes, bounds.max_nodes) {
            Some(()) => return Ok(stack),
            None if nodes >= bounds.max_nodes => break,
            None => {}
        }
    }
    Err(Error::NotFound)
}

fn search(
    c: &Word,
    depth: usize,
    m: usize,
    moves: &[(Word, usize, bool, Word)],
    stack: &mut Vec<Factor>,
    nodes: &mut usize,
    max_nodes: usize,
) -> Option<()> {
    if c.is_empty() {
        return Some(());
    }
    if depth == 0 || c.len() > depth * m || *nodes >= max_nodes {
        return None;
    }
    let letters = c.letters();
    for i in 0..=letters.len() {
        let x = Word::new(letters[..i].to_vec());
        let y = Word::new(letters[i..].to_vec());
        for (rho, rel, inverse, t) in moves {
            *nodes += 1;
            let next = x.concat(&rho.inverse()).concat(&y).free_reduce();
            if next.len() > (depth - 1) * m {
                continue;
            }
            stack.push(Factor {
                conjugator: x.concat(&t.inverse()).free_reduce(),
                relator: *rel,
                inverse: *inverse,
            });
            if search(&next, depth - 1, m, moves, stack, nodes, max_nodes).is_some() {
                return Some(());
            }
            stack.pop();
        }
    }
    None
}

/// Diagram for a product of conjugates: lollipops wedged at the base in
/// factor order, then folded along the boundary until it reads the
/// reduced product, then spiked out to read `w` letter for letter.
pub fn build_from_decomposition(p: &Presentation, factors: &[Factor], w: &Word) -> Result<Diagram> {
    if product(p, factors) != w.free_reduce() {
        return Err(Error::InvalidParameter("decomposition does not multiply to the word".into()));
    }
    let mut map = Map::new();
    let b = 0;
    let mut base_cycle: Vec<usize> = Vec::new();
    for f in factors {
        let rho = relator_power(p, f);
        let stem = f.conjugator.letters();
        let mut at = b;
        let mut stem_darts = Vec::new();
        for &l in stem {
            let v = map.new_vertex();
            stem_darts.push(map.new_edge(at, v, l));
            at = v;
        }
        let t = at;
        let mut cyc = Vec::new();
        let mut cur = t;
        for (j, &l) in rho.letters().iter().enumerate() {
            let next = if j + 1 == rho.len() { t } else { map.new_vertex() };
            cyc.push(map.new_edge(cur, next, l));
            cur = next;
        }
        for j in 1..stem_darts.len() {
            // interior stem vertex: back and forward
            let back = stem_darts[j - 1] ^ 1;
            map.sigma[back] = stem_darts[j];
            map.sigma[stem_darts[j]] = back;
        }
        for j in 1..cyc.len() {
            let back = cyc[j - 1] ^ 1;
            map.sigma[back] = cyc[j];
            map.sigma[cyc[j]] = back;
        }
        let (c1, cm) = (cyc[0], *cyc.last().unwrap() ^ 1);
        if let Some(&last) = stem_darts.last() {
            let back = last ^ 1;
            map.sigma[back] = c1;
            map.sigma[c1] = cm;
            map.sigma[cm] = back;
            base_cycle.push(stem_darts[0]);
        } else {
            base_cycle.push(c1);
            base_cycle.push(cm);
        }
    }
    for (i, &d) in base_cycle.iter().enumerate() {
        map.sigma[d] = base_cycle[(i + 1) % base_cycle.len()];
    }
    map.base = base_cycle.first().copied();
    loop {
        let bd = map.boundary();
        let Some(i) = (0..bd.len().saturating_sub(1))
            .find(|&i| map.label[bd[i + 1]] == map.label[bd[i]].inverse())
        else {
            break;
        };
        map.fold(bd[i], true);
    }
    respike(&mut map, w);
    let d = map.compact(None);
    d.verify_against(p, w)?;
    Ok(d)
}

/// Adds spikes so the boundary (currently reading the reduced word) reads `w`.
fn respike(map: &mut Map, w: &Word) {
    let letters = w.letters();
    if let Some(i) = (0..letters.len().saturating_sub(1)).find(|&i| letters[i + 1] == letters[i].inverse()) {
        let mut rest = letters[..i].to_vec();
        rest.extend_from_slice(&letters[i + 2..]);
        respike(map, &Word::new(rest));
        map.add_spike(i, letters[i]);
    }
}

/// Whether `p` is the commutator presentation of `Z^2` on two generators.
fn is_z2_presentation(p: &Presentation) -> bool {
    if p.generators().len() != 2 || p.relators().len() != 1 {
        return false;
    }
    let (a, b) = (Letter::new(0, false), Letter::new(1, false));
    let comm = Word::new(vec![a, b, a.inverse(), b.inverse()]);
    let conj = comm.cyclic_conjugates().unwrap_or_default();
    conj.contains(&p.relators()[0]) || conj.contains(&p.relators()[0].inverse())
}

/// Winding numbers of the unit cells enclosed by the closed lattice path
/// spelled by `w` (`a` = x, `b` = y), keyed by the cell's lower-left corner.
pub fn winding_numbers(w: &Word) -> BTreeMap<(i64, i64), i64> {
    let mut columns: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
    let (mut x, mut y) = (0i64, 0i64);
    for &l in w.letters() {
        let s = if l.is_inverse() { -1 } else { 1 };
        if l.generator() == 0 {
            let col = if s > 0 { x } else { x - 1 };
            // an eastward edge above a cell turns clockwise around it
            columns.entry(col).or_default().push((y, -s));
            x += s;
        } else {
            y += s;
        }
    }
    let mut out = BTreeMap::new();
    for (col, mut edges) in columns {
        edges.sort();
        // sweep downward: the winding of cell (col, j) sums the edges above it
        let mut acc = 0;
        let mut i = edges.len();
        let top = edges.last().map_or(0, |e| e.0);
        let bottom = edges.first().map_or(0, |e| e.0);
        for j in (bottom..top).rev() {
            while i > 0 && edges[i - 1].0 > j {
                acc += edges[i - 1].1;
                i -= 1;
            }
            if acc != 0 {
                out.insert((col, j), acc);
            }
        }
    }
    out
}

/// Sum of `|winding|` over cells: a lower bound for the area in `Z^2`.
pub fn winding_lower_bound(w: &Word) -> u64 {
    winding_numbers(w).values().map(|v| v.unsigned_abs()).sum()
}

/// Grid filler for `Z^2`: one square per cell of nonzero winding number.
/// Windings must all be `0` or one common sign; the anticlockwise rotation
/// is mirrored for clockwise loops.
pub fn grid_fill(p: &Presentation, w: &Word) -> Result<Diagram> {
    if !is_z2_presentation(p) {
        return Err(Error::InvalidParameter("grid filler needs the Z^2 presentation".into()));
    }
    let mut pos = (0i64, 0i64);
    for &l in w.letters() {
        if l.generator() > 1 {
            return Err(Error::UnknownGenerator(l.generator()));
        }
        let s = if l.is_inverse() { -1 } else { 1 };
        if l.generator() == 0 {
            pos.0 += s;
        } else {
            pos.1 += s;
        }
    }
    if pos != (0, 0) {
        return Err(Error::NotIdentity);
    }
    let cells = winding_numbers(w);
    let signs: BTreeSet<i64> = cells.values().copied().collect();
    if signs.iter().any(|v| v.abs() > 1) || signs.len() > 1 {
        return Err(Error::NonPlanarAssembly(format!("winding numbers {signs:?} need overlapping sheets")));
    }
    let mirrored = signs.contains(&-1);
    // vertices in order of first appearance on the path, then cell corners
    let mut vid: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut coords: Vec<(i64, i64)> = Vec::new();
    let mut vertex = |pt: (i64, i64), coords: &mut Vec<(i64, i64)>| -> usize {
        *vid.entry(pt).or_insert_with(|| {
            coords.push(pt);
            coords.len() - 1
        })
    };
    let mut edges: Vec<((i64, i64), (i64, i64))> = Vec::new();
    let mut edge_set: HashSet<((i64, i64), (i64, i64))> = HashSet::new();
    let mut add_edge = |u: (i64, i64), v: (i64, i64), edges: &mut Vec<_>| {
        let key = if u < v { (u, v) } else { (v, u) };
        if edge_set.insert(key) {
            edges.push(key);
        }
    };
    let mut cur = (0i64, 0i64);
    vertex(cur, &mut coords);
    for &l in w.letters() {
        let s = if l.is_inverse() { -1 } else { 1 };
        let next = if l.generator() == 0 { (cur.0 + s, cur.1) } else { (cur.0, cur.1 + s) };
        vertex(next, &mut coords);
        add_edge(cur, next, &mut edges);
        cur = next;
    }
    for &(cx, cy) in cells.keys() {
        let corners = [(cx, cy), (cx + 1, cy), (cx + 1, cy + 1), (cx, cy + 1)];
        for c in corners {
            vertex(c, &mut coords);
        }
        for k in 0..4 {
            add_edge(corners[k], corners[(k + 1) % 4], &mut edges);
        }
    }
    let mut map = Map::new();
    for _ in 1..coords.len() {
        map.new_vertex();
    }
    // darts stored from the lower endpoint; label a along +x, b along +y
    for &(u, v) in &edges {
        let l = Letter::new(if u.1 == v.1 { 0 } else { 1 }, false);
        map.new_edge(vid[&u], vid[&v], l);
    }
    let mut at: Vec<Vec<(u8, usize)>> = vec![Vec::new(); coords.len()];
    for d in 0..map.origin.len() {
        let (o, t) = (coords[map.origin[d]], coords[map.target(d)]);
        let dir = match (t.0 - o.0, t.1 - o.1) {
            (1, 0) => 0,
            (0, 1) => 1,
            (-1, 0) => 2,
            _ => 3,
        };
        // anticlockwise order E, N, W, S; mirrored loops use E, S, W, N
        let rank = if mirrored { (4 - dir) % 4 } else { dir };
        at[map.origin[d]].push((rank, d));
    }
    for list in &mut at {
        list.sort();
        for k in 0..list.len() {
            map.sigma[list[k].1] = list[(k + 1) % list.len()].1;
        }
    }
    // the outer face is the orbit that reads w from the base
    if !w.is_empty() {
        let start = (0..map.origin.len())
            .filter(|&d| map.origin[d] == 0)
            .find(|&d| {
                let o = map.orbit(d);
                o.len() == w.len() && o.iter().zip(w.letters()).all(|(&x, l)| map.label[x] == *l)
            })
            .ok_or_else(|| Error::NonPlanarAssembly("no face reads the word from the base".into()))?;
        map.base = Some(start);
    }
    let fcoords: Vec<(f64, f64)> = coords
        .iter()
        .map(|&(x, y)| (x as f64, if mirrored { -y as f64 } else { y as f64 }))
        .collect();
    let d = map.compact(Some(&fcoords));
    d.verify_against(p, w)?;
    Ok(d)
}

/// Builds a diagram for `w`: the grid filler for the `Z^2` presentation,
/// otherwise the folded lollipop wedge of a conjugate decomposition.
pub fn build_diagram(p: &Presentation, model: &GroupModel, w: &Word, bounds: SearchBounds) -> Result<Diagram> {
    if !model.is_identity(&model.evaluate_word(w)?) {
        return Err(Error::NotIdentity);
    }
    if is_z2_presentation(p) {
        if let Ok(d) = grid_fill(p, w) {
            return Ok(d);
        }
    }
    if w.len() > bounds.max_word_len {
        return Err(Error::NotFound);
    }
    let f = conjugate_decomposition(p, model, w, bounds)?;
    build_from_decomposition(p, &f, w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramCheck {
    pub euler: bool,
    pub connected: bool,
    pub face_labels: bool,
    pub boundary: bool,
}

impl DiagramCheck {
    pub fn all(&self) -> bool {
        self.euler && self.connected && self.face_labels && self.boundary
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LipschitzReport {
    pub pairs_checked: usize,
    pub exhaustive: bool,
    /// Pairs `(x, y)` with diagram distance below group distance.
    pub violations: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramMap {
    pub images: Vec<Element>,
    pub lipschitz: LipschitzReport,
}

/// Largest number of pairs checked exhaustively by [`diagram_map`].
pub const LIPSCHITZ_PAIRS: usize = 1000;

impl Diagram {
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn dart_count(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self, d: usize) -> usize {
        self.origin[d]
    }

    pub fn target(&self, d: usize) -> usize {
        self.origin[d ^ 1]
    }

    pub fn label(&self, d: usize) -> Letter {
        self.label[d]
    }

    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d]
    }

    pub fn phi(&self, d: usize) -> usize {
        self.sigma[d ^ 1]
    }

    pub fn base_dart(&self) -> Option<usize> {
        self.base
    }

    pub fn base_vertex(&self) -> usize {
        self.base_vertex
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    fn orbit(&self, d: usize) -> Vec<usize> {
        let mut out = vec![d];
        let mut x = self.phi(d);
        while x != d {
            out.push(x);
            x = self.phi(x);
        }
        out
    }

    /// Outer boundary darts, anticlockwise from the base.
    pub fn boundary_darts(&self) -> Vec<usize> {
        self.base.map(|b| self.orbit(b)).unwrap_or_default()
    }

    /// Boundary vertices from the base; entry `i` is where letter `i` starts.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let bd = self.boundary_darts();
        if bd.is_empty() {
            return vec![self.base_vertex];
        }
        let mut out: Vec<usize> = bd.iter().map(|&d| self.origin[d]).collect();
        out.push(self.base_vertex);
        out
    }

    pub fn boundary_word(&self) -> Word {
        Word::new(self.boundary_darts().iter().map(|&d| self.label[d]).collect())
    }

    /// All face orbits (outer included), each starting at its smallest dart,
    /// in order of that dart.
    fn all_faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.origin.len()];
        let mut out = Vec::new();
        for d in 0..self.origin.len() {
            if !seen[d] {
                let o = self.orbit(d);
                for &x in &o {
                    seen[x] = true;
                }
                out.push(o);
            }
        }
        out
    }

    /// Inner faces as dart cycles (clockwise), ordered by smallest dart.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let outer: HashSet<usize> = self.boundary_darts().into_iter().collect();
        self.all_faces()
            .into_iter()
            .filter(|f| !f.iter().any(|d| outer.contains(d)))
            .collect()
    }

    pub fn face_count(&self) -> usize {
        self.faces().len()
    }

    /// Face index (into [`Diagram::faces`]) of every dart; `None` on the outer face.
    pub fn face_of_darts(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.origin.len()];
        for (i, f) in self.faces().iter().enumerate() {
            for &d in f {
                out[d] = Some(i);
            }
        }
        out
    }

    pub fn face_word(&self, face: &[usize]) -> Word {
        Word::new(face.iter().map(|&d| self.label[d]).collect())
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertices];
        for d in 0..self.origin.len() {
            adj[self.origin[d]].push(self.target(d));
        }
        let mut seen = vec![false; self.vertices];
        seen[self.base_vertex] = true;
        let mut queue = VecDeque::from([self.base_vertex]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Euler, connectivity, inner face labels, and boundary reading `w`.
    pub fn check(&self, p: &Presentation, w: &Word) -> DiagramCheck {
        let faces = if self.origin.is_empty() { 1 } else { self.all_faces().len() };
        let euler = self.vertices as i64 - self.edge_count() as i64 + faces as i64 == 2;
        let mut allowed: HashSet<Word> = HashSet::new();
        for r in p.relators() {
            for x in [r.clone(), r.inverse()] {
                allowed.extend(x.cyclic_conjugates().unwrap_or_default());
            }
        }
        let face_labels = self.faces().iter().all(|f| allowed.contains(&self.face_word(f)));
        DiagramCheck {
            euler,
            connected: self.is_connected(),
            face_labels,
            boundary: self.boundary_word() == *w,
        }
    }

    fn verify_against(&self, p: &Presentation, w: &Word) -> Result<()> {
        let c = self.check(p, w);
        if c.all() {
            Ok(())
        } else {
            Err(Error::NonPlanarAssembly(format!("{c:?}")))
        }
    }

    fn skeleton(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for d in 0..self.origin.len() {
            adj[self.origin[d]].push(self.target(d));
        }
        adj
    }

    /// Edge-count distances from `s` in the 1-skeleton.
    pub fn distances_from(&self, s: usize) -> Vec<u64> {
        let adj = self.skeleton();
        let mut dist = vec![u64::MAX; self.vertices];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == u64::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Pairs checked by the Lipschitz report: all pairs when there are at
    /// most [`LIPSCHITZ_PAIRS`], otherwise a fixed pseudo-random sample.
    fn lipschitz_pairs(&self) -> (Vec<(usize, usize)>, bool) {
        let n = self.vertices;
        let total = n * n.saturating_sub(1) / 2;
        if total <= LIPSCHITZ_PAIRS {
            let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            return (pairs, true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut set = BTreeSet::new();
        while set.len() < LIPSCHITZ_PAIRS {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i != j {
                set.insert((i.min(j), i.max(j)));
            }
        }
        (set.into_iter().collect(), false)
    }

    pub fn to_json(&self) -> String {
        let file = DiagramFile {
            vertices: self.vertices,
            darts: (0..self.origin.len())
                .map(|d| DartRecord {
                    label: self.label[d].signed(),
                    from: self.origin[d],
                    inverse: d ^ 1,
                })
                .collect(),
            rotation: self.sigma.clone(),
            base: self.base,
            base_vertex: self.base_vertex,
            coords: self.coords.clone(),
        };
        serde_json::to_string(&file).expect("diagram serialises")
    }

    pub fn from_json(text: &str) -> Result<Diagram> {
        let bad = |m: String| Error::InvalidData(format!("diagram: {m}"));
        let f: DiagramFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let n = f.darts.len();
        if !n.is_multiple_of(2) || f.rotation.len() != n || f.base_vertex >= f.vertices.max(1) {
            return Err(bad("shape".into()));
        }
        let mut label = Vec::with_capacity(n);
        for (d, r) in f.darts.iter().enumerate() {
            let l = Letter::from_signed(r.label).ok_or_else(|| bad(format!("label at {d}")))?;
            if r.inverse != d ^ 1 || r.from >= f.vertices || f.rotation[d] >= n {
                return Err(bad(format!("dart {d}")));
            }
            label.push(l);
        }
        for d in 0..n {
            if label[d ^ 1] != label[d].inverse() || f.darts[f.rotation[d]].from != f.darts[d].from {
                return Err(bad(format!("dart {d}")));
            }
        }
        let mut hit = vec![false; n];
        for &s in &f.rotation {
            if std::mem::replace(&mut hit[s], true) {
                return Err(bad("rotation is not a permutation".into()));
            }
        }
        if f.base.is_some_and(|b| b >= n || f.darts[b].from != f.base_vertex) {
            return Err(bad("base".into()));
        }
        Ok(Diagram {
            origin: f.darts.iter().map(|r| r.from).collect(),
            label,
            sigma: f.rotation,
            vertices: f.vertices,
            base: f.base,
            base_vertex: f.base_vertex,
            coords: f.coords,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DartRecord {
    label: i32,
    from: usize,
    inverse: usize,
}

#[derive(Serialize, Deserialize)]
struct DiagramFile {
    vertices: usize,
    darts: Vec<DartRecord>,
    rotation: Vec<usize>,
    base: Option<usize>,
    base_vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(f64, f64)>>,
}

/// The label-respecting map with the base vertex sent to `v`, plus the
/// check that it never increases distances.
pub fn diagram_map(d: &Diagram, model: &GroupModel, v: &Element) -> Result<DiagramMap> {
    let mut images: Vec<Option<Element>> = vec![None; d.vertices];
    images[d.base_vertex] = Some(v.clone());
    let mut queue = VecDeque::from([d.base_vertex]);
    let mut out_darts = vec![Vec::new(); d.vertices];
    for x in 0..d.origin.len() {
        out_darts[d.origin[x]].push(x);
    }
    while let Some(u) = queue.pop_front() {
        let eu = images[u].clone().unwrap();
        for &x in &out_darts[u] {
            let t = d.target(x);
            let et = model.apply(&eu, d.label[x]);
            match &images[t] {
                None => {
                    images[t] = Some(et);
                    queue.push_back(t);
                }
                Some(e) if *e != et => return Err(Error::InconsistentLabels(x)),
                Some(_) => {}
            }
        }
    }
    let images: Vec<Element> = images
        .into_iter()
        .map(|e| e.ok_or_else(|| Error::InvalidData("diagram is disconnected".into())))
        .collect::<Result<_>>()?;
    let (pairs, exhaustive) = d.lipschitz_pairs();
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in &pairs {
        by_source.entry(i).or_default().push(j);
    }
    let mut violations = Vec::new();
    for (i, js) in by_source {
        let dd = d.distances_from(i);
        for j in js {
            let g = crate::cayley::distance(model, &images[i], &images[j], dd[j]);
            if g.is_none() {
                violations.push((i, j));
            }
        }
    }
    Ok(DiagramMap {
        images,
        lipschitz: LipschitzReport {
            pairs_checked: pairs.len(),
            exhaustive,
            violations,
        },
    })
}

/// Faces on both sides of the edge of `e` that are mirror images across it.
fn mirror_pair(map: &Map, e: usize, outer: &HashSet<usize>) -> bool {
    let f1 = map.orbit(e);
    let f2 = map.orbit(e ^ 1);
    if f1.len() != f2.len() || f1.contains(&(e ^ 1)) {
        return false;
    }
    if f1.iter().chain(&f2).any(|d| outer.contains(d)) {
        return false;
    }
    let k = f1.len();
    (0..k).all(|j| map.label[f2[j]] == map.label[f1[(k - j) % k]].inverse())
}

/// Removes mirror-image face pairs: the shared edge is deleted and the
/// merged face is zipped shut. Each removal is verified (Euler, labels,
/// boundary); one that fails verification is undone and skipped.
pub fn reduce_diagram(d: &Diagram, p: &Presentation) -> Diagram {
    let w = d.boundary_word();
    let mut map = Map::from_diagram(d);
    let mut skipped: HashSet<usize> = HashSet::new();
    'outer: loop {
        let outer: HashSet<usize> = map.boundary().into_iter().collect();
        for e in (0..map.origin.len()).step_by(2) {
            if !map.dart_alive[e] || skipped.contains(&e) || !mirror_pair(&map, e, &outer) {
                continue;
            }
            let saved = map.clone();
            let rest = map.phi(e);
            let had_rest = rest != e;
            map.delete_edge(e);
            if had_rest {
                zip_face(&mut map, rest);
            }
            let candidate = map.compact(None);
            if candidate.check(p, &w).all() && candidate.face_count() + 2 <= d_face_count(&saved) {
                continue 'outer;
            }
            map = saved;
            skipped.insert(e);
        }
        break;
    }
    let mut out = map.compact(None);
    if d.coords.is_some() && out.vertices == d.vertices {
        out.coords = d.coords.clone();
    }
    out
}

fn d_face_count(map: &Map) -> usize {
    map.compact(None).face_count()
}

/// Folds cancelling neighbours in the face of `start` until it closes up.
fn zip_face(map: &mut Map, start: usize) {
    let mut cur = start;
    loop {
        if !map.dart_alive[cur] {
            return;
        }
        let face = map.orbit(cur);
        let Some(i) = (0..face.len()).find(|&i| {
            let (a, b) = (face[i], face[(i + 1) % face.len()]);
            map.label[b] == map.label[a].inverse()
        }) else {
            return;
        };
        let a = face[i];
        let len = face.len();
        let after = face[(i + 2) % len];
        map.fold(a, false);
        if len <= 2 {
            return;
        }
        cur = if map.dart_alive[after] { after } else { return };
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AreaReport {
    pub area: u64,
    /// Winding-number bound, for the `Z^2` presentation only.
    pub lower_bound: Option<u64>,
    pub exact: bool,
}

/// Fewest inner faces among the fillings found, with the winding-number
/// lower bound for `Z^2`.
pub fn area(p: &Presentation, model: &GroupModel, w: &Word, bounds: SearchBounds) -> Result<AreaReport> {
    if !model.is_identity(&model.evaluate_word(w)?) {
        return Err(Error::NotIdentity);
    }
    let mut best: Option<u64> = None;
    let lower_bound = is_z2_presentation(p).then(|| winding_lower_bound(w));
    if is_z2_presentation(p) {
        if let Ok(d) = grid_fill(p, w) {
            best = Some(d.face_count() as u64);
        }
    }
    if best.is_none() || w.len() <= bounds.max_word_len && best != lower_bound {
        if let Ok(f) = conjugate_decomposition(p, model, w, bounds) {
            if let Ok(d) = build_from_decomposition(p, &f, w) {
                let n = reduce_diagram(&d, p).face_count() as u64;
                best = Some(best.map_or(n, |b| b.min(n)));
            }
        }
    }
    let area = best.ok_or(Error::NotFound)?;
    Ok(AreaReport {
        area,
        lower_bound,
        exact: lower_bound == Some(area),
    })
}

/// Boundary vertices on a circle, the rest placed by repeated neighbour
/// averaging; stored coordinates are used when present.
fn layout(d: &Diagram) -> Vec<(f64, f64)> {
    if let Some(c) = &d.coords {
        return c.clone();
    }
    let n = d.vertices;
    let mut pos = vec![(0.0f64, 0.0f64); n];
    let mut fixed = vec![false; n];
    let bv = d.boundary_vertices();
    let ring: Vec<usize> = {
        let mut seen = HashSet::new();
        bv.iter().copied().filter(|v| seen.insert(*v)).collect()
    };
    for (i, &v) in ring.iter().enumerate() {
        let t = std::f64::consts::TAU * i as f64 / ring.len().max(1) as f64;
        pos[v] = (t.cos() * 10.0, t.sin() * 10.0);
        fixed[v] = true;
    }
    let adj = d.skeleton();
    for _ in 0..200 {
        for v in 0..n {
            if fixed[v] || adj[v].is_empty() {
                continue;
            }
            let k = adj[v].len() as f64;
            let (sx, sy) = adj[v].iter().fold((0.0, 0.0), |(x, y), &u| (x + pos[u].0, y + pos[u].1));
            pos[v] = (sx / k, sy / k);
        }
    }
    pos
}

/// SVG of the embedding: shaded faces, labelled edges, base point marked.
pub fn render_svg(d: &Diagram, p: &Presentation, stamp: &str) -> String {
    let pos = layout(d);
    let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
    for &(x, y) in &pos {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    if pos.is_empty() {
        lo = (0.0, 0.0);
        hi = (0.0, 0.0);
    }
    let scale = 40.0;
    let pad = 30.0;
    let tx = |x: f64| (x - lo.0) * scale + pad;
    let ty = |y: f64| (hi.1 - y) * scale + pad;
    let (w, h) = ((hi.0 - lo.0) * scale + 2.0 * pad, (hi.1 - lo.1) * scale + 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\">");
    let _ = writeln!(s, "<!-- config {stamp} -->");
    for f in d.faces() {
        let pts: Vec<String> = f
            .iter()
            .map(|&x| format!("{:.2},{:.2}", tx(pos[d.origin[x]].0), ty(pos[d.origin[x]].1)))
            .collect();
        let _ = writeln!(s, "<polygon points=\"{}\" fill=\"#dde6f0\" stroke=\"none\"/>", pts.join(" "));
    }
    for e in (0..d.origin.len()).step_by(2) {
        let (a, b) = (pos[d.origin[e]], pos[d.target(e)]);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>",
            tx(a.0),
            ty(a.1),
            tx(b.0),
            ty(b.1)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{}</text>",
            (tx(a.0) + tx(b.0)) / 2.0,
            (ty(a.1) + ty(b.1)) / 2.0,
            p.generators().render_letter(d.label[e])
        );
    }
    if let Some(&(x, y)) = pos.get(d.base_vertex) {
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#c00\"/>", tx(x), ty(y));
    }
    s.push_str("</svg>\n");
    s
}
