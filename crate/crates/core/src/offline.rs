// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Offline edge colorers.
//!
//! * [`color_bipartite_exact`]: max-degree colors on bipartite graphs, by
//!   alternating-path recoloring.
//! * [`color_general`]: at most max-degree + 1 colors (Misra-Gries).
//! * [`color_greedy`]: lowest color free at both endpoints, at most
//!   2 * max-degree - 1 colors.
//!
//! All three return one color per edge, in input order, and are deterministic
//! functions of the edge order.

use std::collections::VecDeque;

use thiserror::Error;

use crate::harness::meter::SpaceMeter;
use crate::palette::ColorAllocator;
use crate::stream::ColorAssignment;
use crate::{Color, VertexId};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OfflineError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) does not cross the bipartition")]
    NotBipartite(VertexId, VertexId),
}

/// A finite simple graph over arbitrary vertex ids, with an optional
/// bipartition witness.
#[derive(Clone, Debug)]
pub struct OfflineGraph {
    edges: Vec<(VertexId, VertexId)>,
    // endpoints relabelled to 0..n_local
    local: Vec<(u32, u32)>,
    n_local: usize,
    max_degree: u32,
    // per local vertex: true on the left side
    left: Option<Vec<bool>>,
}

impl OfflineGraph {
    pub fn new(edges: Vec<(VertexId, VertexId)>) -> Result<Self, OfflineError> {
        let mut ids: Vec<VertexId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let local: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(a, b)| {
                (
                    ids.binary_search(&a).unwrap() as u32,
                    ids.binary_search(&b).unwrap() as u32,
                )
            })
            .collect();
        let mut keys: Vec<(u32, u32, usize)> = Vec::with_capacity(local.len());
        for (i, &(a, b)) in local.iter().enumerate() {
            if a == b {
                return Err(OfflineError::SelfLoop(edges[i].0));
            }
            keys.push((a.min(b), a.max(b), i));
        }
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            let (a, b) = edges[w[1].2];
            return Err(OfflineError::DuplicateEdge(a, b));
        }
        let mut deg = vec![0u32; ids.len()];
        for &(a, b) in &local {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let max_degree = deg.iter().copied().max().unwrap_or(0);
        Ok(OfflineGraph {
            edges,
            local,
            n_local: ids.len(),
            max_degree,
            left: None,
        })
    }

    /// A graph whose bipartition is given by `is_left`.
    pub fn with_sides(
        edges: Vec<(VertexId, VertexId)>,
        is_left: impl Fn(VertexId) -> bool,
    ) -> Result<Self, OfflineError> {
        let mut g = Self::new(edges)?;
        let mut left = vec![false; g.n_local];
        for (&(a, b), &(la, lb)) in g.edges.iter().zip(&g.local) {
            if is_left(a) == is_left(b) {
                return Err(OfflineError::NotBipartite(a, b));
            }
            left[la as usize] = is_left(a);
            left[lb as usize] = is_left(b);
        }
        g.left = Some(left);
        Ok(g)
    }

    /// A graph whose edges all point from the left side to the right side.
    pub fn oriented(edges: Vec<(VertexId, VertexId)>) -> Result<Self, OfflineError> {
        let mut g = Self::new(edges)?;
        let mut side: Vec<u8> = vec![2; g.n_local];
        for (&(a, b), &(la, lb)) in g.edges.iter().zip(&g.local) {
            for (v, s) in [(la, 0u8), (lb, 1u8)] {
                if side[v as usize] == 2 {
                    side[v as usize] = s;
                } else if side[v as usize] != s {
                    return Err(OfflineError::NotBipartite(a, b));
                }
            }
        }
        g.left = Some(side.into_iter().map(|s| s == 0).collect());
        Ok(g)
    }

    /// Finds a bipartition by breadth-first 2-coloring. Returns false, and
    /// leaves the graph without a witness, if there is an odd cycle.
    pub fn detect_sides(&mut self) -> bool {
        if self.left.is_some() {
            return true;
        }
        let adj = self.adjacency();
        let mut side: Vec<u8> = vec![2; self.n_local];
        let mut queue = VecDeque::new();
        for start in 0..self.n_local {
            if side[start] != 2 {
                continue;
            }
            side[start] = 0;
            queue.push_back(start);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    let y = y as usize;
                    if side[y] == 2 {
                        side[y] = 1 - side[x];
                        queue.push_back(y);
                    } else if side[y] == side[x] {
                        return false;
                    }
                }
            }
        }
        self.left = Some(side.into_iter().map(|s| s == 0).collect());
        true
    }

    fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_local];
        for &(a, b) in &self.local {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn has_sides(&self) -> bool {
        self.left.is_some()
    }
}

/// Per-vertex color slots: `at[v * width + c]` is the edge colored `c` at `v`.
struct ColorTable {
    width: usize,
    at: Vec<u32>,
    color: Vec<u32>,
}

impl ColorTable {
    fn new(n: usize, m: usize, width: usize) -> Self {
        ColorTable {
            width,
            at: vec![NONE; n * width],
            color: vec![NONE; m],
        }
    }

    fn slot(&self, v: u32, c: u32) -> u32 {
        self.at[v as usize * self.width + c as usize]
    }

    fn is_free(&self, v: u32, c: u32) -> bool {
        self.slot(v, c) == NONE
    }

    fn lowest_free(&self, v: u32) -> u32 {
        let row = &self.at[v as usize * self.width..(v as usize + 1) * self.width];
        row.iter().position(|&e| e == NONE).expect("a free color exists") as u32
    }

    fn set(&mut self, e: usize, (a, b): (u32, u32), c: u32) {
        self.color[e] = c;
        self.at[a as usize * self.width + c as usize] = e as u32;
        self.at[b as usize * self.width + c as usize] = e as u32;
    }

    fn clear(&mut self, e: usize, (a, b): (u32, u32)) {
        let c = self.color[e];
        self.at[a as usize * self.width + c as usize] = NONE;
        self.at[b as usize * self.width + c as usize] = NONE;
        self.color[e] = NONE;
    }
}

fn other(edge: (u32, u32), v: u32) -> u32 {
    if edge.0 == v {
        edge.1
    } else {
        edge.0
    }
}

/// Collects the maximal path from `start` whose edges alternate colors
/// `first, second, first, ...`.
fn alternating_path(t: &ColorTable, local: &[(u32, u32)], start: u32, first: u32, second: u32) -> Vec<usize> {
    let mut path = Vec::new();
    let (mut cur, mut col) = (start, first);
    loop {
        let e = t.slot(cur, col);
        if e == NONE {
            break;
        }
        path.push(e as usize);
        cur = other(local[e as usize], cur);
        col = if col == first { second } else { first };
    }
    path
}

fn swap_path(t: &mut ColorTable, local: &[(u32, u32)], path: &[usize], c: u32, d: u32) {
    let old: Vec<u32> = path.iter().map(|&e| t.color[e]).collect();
    for &e in path {
        t.clear(e, local[e]);
    }
    for (&e, &col) in path.iter().zip(&old) {
        t.set(e, local[e], if col == c { d } else { c });
    }
}

/// Colors a bipartite graph with exactly max-degree colors.
///
/// Edges are inserted in order. Each takes the lowest color free at both
/// ends if there is one; otherwise, with `a` free at the first endpoint and
/// `b` free at the second, the `a`/`b` alternating path from the second
/// endpoint is swapped, which frees `a` there.
pub fn color_bipartite_exact(g: &OfflineGraph) -> Result<Vec<Color>, OfflineError> {
    if g.left.is_none() {
        let mut probe = g.clone();
        if !probe.detect_sides() {
            let (a, b) = g.edges.first().copied().unwrap_or((0, 0));
            return Err(OfflineError::NotBipartite(a, b));
        }
    }
    let width = g.max_degree as usize;
    let mut t = ColorTable::new(g.n_local, g.local.len(), width);
    for (e, &(x, y)) in g.local.iter().enumerate() {
        let a = t.lowest_free(x);
        let b = t.lowest_free(y);
        let c = if t.is_free(y, a) {
            a
        } else if t.is_free(x, b) {
            b
        } else {
            let path = alternating_path(&t, &g.local, y, a, b);
            swap_path(&mut t, &g.local, &path, a, b);
            debug_assert!(t.is_free(y, a));
            a
        };
        t.set(e, (x, y), c);
    }
    Ok(t.color)
}

/// Colors any simple graph with at most max-degree + 1 colors.
pub fn color_general(g: &OfflineGraph) -> Vec<Color> {
    let width = g.max_degree as usize + 1;
    let mut t = ColorTable::new(g.n_local, g.local.len(), width);
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); g.n_local];
    for (e, &(a, b)) in g.local.iter().enumerate() {
        adj[a as usize].push((b, e as u32));
        adj[b as usize].push((a, e as u32));
    }
    let mut in_fan = vec![false; g.n_local];
    for (e, &(u, v)) in g.local.iter().enumerate() {
        // maximal fan at u starting with v: (fan vertex, edge to u)
        let mut fan: Vec<(u32, usize)> = vec![(v, e)];
        in_fan[v as usize] = true;
        loop {
            let last = fan.last().unwrap().0;
            let next = adj[u as usize].iter().copied().find(|&(x, ex)| {
                let c = t.color[ex as usize];
                !in_fan[x as usize] && c != NONE && t.is_free(last, c)
            });
            match next {
                Some((x, ex)) => {
                    in_fan[x as usize] = true;
                    fan.push((x, ex as usize));
                }
                None => break,
            }
        }
        for &(x, _) in &fan {
            in_fan[x as usize] = false;
        }
        let c = t.lowest_free(u);
        let d = t.lowest_free(fan.last().unwrap().0);
        let path = alternating_path(&t, &g.local, u, d, c);
        swap_path(&mut t, &g.local, &path, c, d);
        let w = fan
            .iter()
            .position(|&(x, _)| t.is_free(x, d))
            .expect("some fan vertex has d free");
        // rotate the fan prefix down by one and close it with d
        let mut recolor: Vec<(usize, u32)> = (0..w).map(|i| (fan[i].1, t.color[fan[i + 1].1])).collect();
        recolor.push((fan[w].1, d));
        for &(_, ei) in &fan[1..=w] {
            t.clear(ei, g.local[ei]);
        }
        for (ei, col) in recolor {
            t.set(ei, g.local[ei], col);
        }
    }
    t.color
}

/// Lowest color unused at both endpoints, edge by edge.
pub fn color_greedy(g: &OfflineGraph) -> Vec<Color> {
    let width = (2 * g.max_degree as usize).saturating_sub(1).max(1);
    let mut t = ColorTable::new(g.n_local, g.local.len(), width);
    for (e, &(x, y)) in g.local.iter().enumerate() {
        let c = (0..width as u32)
            .find(|&c| t.is_free(x, c) && t.is_free(y, c))
            .expect("2d-1 colors suffice");
        t.set(e, (x, y), c);
    }
    t.color
}

const TRANSIENT: &str = "offline.transient";

fn emit_block(
    edges: &[(VertexId, VertexId)],
    colors: &[Color],
    width: u32,
    alloc: &ColorAllocator,
    out: &mut Vec<ColorAssignment>,
) -> u32 {
    let base = alloc.alloc(width);
    out.extend(
        edges
            .iter()
            .zip(colors)
            .map(|(&(a, b), &c)| ColorAssignment::new(a, b, base + c)),
    );
    width
}

/// Colors edges oriented left to right with a fresh block of max-degree
/// colors and appends the assignments. Returns the block width.
///
/// # Panics
///
/// Panics if the edges are not simple or not consistently oriented.
pub fn emit_bipartite_block(
    edges: &[(VertexId, VertexId)],
    alloc: &ColorAllocator,
    meter: &SpaceMeter,
    out: &mut Vec<ColorAssignment>,
) -> u32 {
    if edges.is_empty() {
        return 0;
    }
    meter.charge(TRANSIENT, edges.len() as u64);
    let g = OfflineGraph::oriented(edges.to_vec()).expect("stored edges are simple and oriented");
    let colors = color_bipartite_exact(&g).expect("oriented graphs are bipartite");
    meter.release(TRANSIENT, edges.len() as u64);
    emit_block(edges, &colors, g.max_degree(), alloc, out)
}

/// Colors arbitrary edges with a fresh block: max-degree colors if the graph
/// is bipartite, max-degree + 1 otherwise. Returns the block width.
///
/// # Panics
///
/// Panics if the edges are not simple.
pub fn emit_general_block(
    edges: &[(VertexId, VertexId)],
    alloc: &ColorAllocator,
    meter: &SpaceMeter,
    out: &mut Vec<ColorAssignment>,
) -> u32 {
    if edges.is_empty() {
        return 0;
    }
    meter.charge(TRANSIENT, edges.len() as u64);
    let mut g = OfflineGraph::new(edges.to_vec()).expect("stored edges are simple");
    let (colors, width) = if g.detect_sides() {
        (color_bipartite_exact(&g).expect("sides were detected"), g.max_degree())
    } else {
        (color_general(&g), g.max_degree() + 1)
    };
    meter.release(TRANSIENT, edges.len() as u64);
    emit_block(edges, &colors, width, alloc, out)
}

/// Number of distinct colors in a coloring.
pub fn count_colors(colors: &[Color]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Pairs of edge indices that share an endpoint and a color.
pub fn conflicts(edges: &[(VertexId, VertexId)], colors: &[Color]) -> Vec<(usize, usize)> {
    use std::collections::HashMap;
    let mut seen: HashMap<(VertexId, Color), usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, (&(a, b), &c)) in edges.iter().zip(colors).enumerate() {
        for v in [a, b] {
            if let Some(&j) = seen.get(&(v, c)) {
                out.push((j, i));
            } else {
                seen.insert((v, c), i);
            }
        }
    }
    out
}
