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

//! Color graph of one arrival and perfect matching on it.
//!
//! Each edge of an arriving online vertex is a left slot. A slot is adjacent
//! to the base colors its offline endpoint currently proposes, one per band.
//! A perfect matching picks a distinct base color per slot, and the slot is
//! then colored with the band-offset version of that base color.

use rand::Rng;
use thiserror::Error;

use crate::palette::{OfflineState, PaletteParams};

const NONE: u32 = u32::MAX;

/// Largest instance [`brute_force_match`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("{slots} slots exceed the limit of {limit}")]
    TooManySlots { slots: usize, limit: usize },
    #[error("brute force is limited to {BRUTE_FORCE_LIMIT} slots, got {0}")]
    InstanceTooLarge(usize),
    #[error("slot {slot} has an invalid neighbour set")]
    InvalidSlot { slot: usize },
}

/// Slot-to-color adjacency in compressed rows.
///
/// Each slot's neighbours are kept in ascending color order together with
/// the band each one came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorGraph {
    offsets: Vec<u32>,
    colors: Vec<u32>,
    bands: Vec<u8>,
}

/// Chosen color for one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub color: u32,
    pub band: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchResult {
    Perfect(Vec<Choice>),
    NoPerfectMatching,
}

impl MatchResult {
    pub fn is_perfect(&self) -> bool {
        matches!(self, MatchResult::Perfect(_))
    }
}

impl ColorGraph {
    /// Builds a graph from explicit neighbour lists; the band of a neighbour
    /// is its position in the list.
    pub fn from_neighbors<S: AsRef<[u32]>>(slots: &[S]) -> Result<Self, MatchError> {
        let mut g = ColorGraph::with_capacity(slots.len(), 3);
        for (slot, nbrs) in slots.iter().enumerate() {
            let nbrs = nbrs.as_ref();
            if nbrs.len() > u8::MAX as usize {
                return Err(MatchError::InvalidSlot { slot });
            }
            let mut row: Vec<(u32, u8)> = nbrs.iter().enumerate().map(|(b, &c)| (c, b as u8)).collect();
            row.sort_unstable();
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(MatchError::InvalidSlot { slot });
            }
            g.push_row(&row);
        }
        Ok(g)
    }

    fn with_capacity(slots: usize, per_slot: usize) -> Self {
        let mut offsets = Vec::with_capacity(slots + 1);
        offsets.push(0);
        ColorGraph {
            offsets,
            colors: Vec::with_capacity(slots * per_slot),
            bands: Vec::with_capacity(slots * per_slot),
        }
    }

    fn push_row(&mut self, row: &[(u32, u8)]) {
        for &(c, b) in row {
            self.colors.push(c);
            self.bands.push(b);
        }
        self.offsets.push(self.colors.len() as u32);
    }

    pub fn num_slots(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn num_edges(&self) -> usize {
        self.colors.len()
    }

    /// Neighbour colors of a slot, ascending.
    pub fn neighbors(&self, slot: usize) -> &[u32] {
        &self.colors[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }

    fn band_of(&self, slot: usize, color: u32) -> u8 {
        let lo = self.offsets[slot] as usize;
        let idx = self
            .neighbors(slot)
            .binary_search(&color)
            .expect("color is a neighbour");
        self.bands[lo + idx]
    }

    /// Words a matching call holds: edges, left and right matches, layers.
    pub fn transient_words(&self) -> u64 {
        let d = self.num_slots() as u64;
        let mut right: Vec<u32> = self.colors.clone();
        right.sort_unstable();
        right.dedup();
        self.num_edges() as u64 + 2 * d + right.len() as u64
    }

    /// True if `choices` is a system of distinct representatives.
    pub fn is_valid_matching(&self, choices: &[Choice]) -> bool {
        if choices.len() != self.num_slots() {
            return false;
        }
        let mut seen: Vec<u32> = choices.iter().map(|c| c.color).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        choices
            .iter()
            .enumerate()
            .all(|(s, c)| self.neighbors(s).binary_search(&c.color).is_ok() && self.band_of(s, c.color) == c.band)
    }
}

/// Color graph of an arrival whose edges go to the given offline states.
///
/// Fails if there are more slots than the declared degree.
pub fn build_color_graph(states: &[OfflineState], params: &PaletteParams) -> Result<ColorGraph, MatchError> {
    build_color_graph_limited(states, params, params.delta() as usize)
}

/// Like [`build_color_graph`] with an explicit slot limit.
pub fn build_color_graph_limited(
    states: &[OfflineState],
    params: &PaletteParams,
    limit: usize,
) -> Result<ColorGraph, MatchError> {
    if states.len() > limit {
        return Err(MatchError::TooManySlots {
            slots: states.len(),
            limit,
        });
    }
    let mut g = ColorGraph::with_capacity(states.len(), 3);
    for s in states {
        let base = s.base_colors(params.period());
        let mut row = [(base[0], 0u8), (base[1], 1), (base[2], 2)];
        row.sort_unstable();
        g.push_row(&row);
    }
    Ok(g)
}

struct HopcroftKarp<'a> {
    g: &'a ColorGraph,
    // right side compressed to the colors that occur
    right_of_edge: Vec<u32>,
    match_l: Vec<u32>,
    match_r: Vec<u32>,
    dist: Vec<u32>,
}

impl<'a> HopcroftKarp<'a> {
    fn new(g: &'a ColorGraph) -> Self {
        let mut right: Vec<u32> = g.colors.clone();
        right.sort_unstable();
        right.dedup();
        let right_of_edge = g
            .colors
            .iter()
            .map(|c| right.binary_search(c).unwrap() as u32)
            .collect();
        HopcroftKarp {
            g,
            right_of_edge,
            match_l: vec![NONE; g.num_slots()],
            match_r: vec![NONE; right.len()],
            dist: vec![NONE; g.num_slots()],
        }
    }

    fn edges(&self, u: usize) -> std::ops::Range<usize> {
        self.g.offsets[u] as usize..self.g.offsets[u + 1] as usize
    }

    fn bfs(&mut self) -> bool {
        let mut queue = Vec::with_capacity(self.match_l.len());
        for u in 0..self.match_l.len() {
            if self.match_l[u] == NONE {
                self.dist[u] = 0;
                queue.push(u as u32);
            } else {
                self.dist[u] = NONE;
            }
        }
        let mut found = false;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            for e in self.edges(u) {
                let w = self.match_r[self.right_of_edge[e] as usize];
                if w == NONE {
                    found = true;
                } else if self.dist[w as usize] == NONE {
                    self.dist[w as usize] = self.dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        found
    }

    fn dfs(&mut self, u: usize) -> bool {
        for e in self.edges(u) {
            let r = self.right_of_edge[e] as usize;
            let w = self.match_r[r];
            let ok = w == NONE || (self.dist[w as usize] == self.dist[u] + 1 && self.dfs(w as usize));
            if ok {
                self.match_l[u] = e as u32;
                self.match_r[r] = u as u32;
                return true;
            }
        }
        self.dist[u] = NONE;
        false
    }

    fn run(mut self) -> Vec<u32> {
        let n = self.match_l.len();
        let mut size = 0;
        while size < n && self.bfs() {
            for u in 0..n {
                if self.match_l[u] == NONE && self.dfs(u) {
                    size += 1;
                }
            }
        }
        self.match_l
    }
}

/// Maximum matching by Hopcroft-Karp; perfect if it saturates every slot.
///
/// Slots are scanned in id order and neighbours in ascending color order, so
/// the result is a deterministic function of the graph.
pub fn perfect_match(g: &ColorGraph) -> MatchResult {
    let matched = HopcroftKarp::new(g).run();
    if matched.contains(&NONE) {
        return MatchResult::NoPerfectMatching;
    }
    let choices: Vec<Choice> = matched
        .iter()
        .map(|&e| Choice {
            color: g.colors[e as usize],
            band: g.bands[e as usize],
        })
        .collect();
    debug_assert!(g.is_valid_matching(&choices));
    MatchResult::Perfect(choices)
}

/// Exhaustive search for a perfect matching, slots in order and colors
/// ascending.
pub fn brute_force_match(g: &ColorGraph) -> Result<MatchResult, MatchError> {
    let n = g.num_slots();
    if n > BRUTE_FORCE_LIMIT {
        return Err(MatchError::InstanceTooLarge(n));
    }
    fn go(g: &ColorGraph, slot: usize, picked: &mut Vec<u32>) -> bool {
        if slot == g.num_slots() {
            return true;
        }
        for &c in g.neighbors(slot) {
            if !picked.contains(&c) {
                picked.push(c);
                if go(g, slot + 1, picked) {
                    return true;
                }
                picked.pop();
            }
        }
        false
    }
    let mut picked = Vec::with_capacity(n);
    if !go(g, 0, &mut picked) {
        return Ok(MatchResult::NoPerfectMatching);
    }
    Ok(MatchResult::Perfect(
        picked
            .iter()
            .enumerate()
            .map(|(s, &c)| Choice {
                color: c,
                band: g.band_of(s, c),
            })
            .collect(),
    ))
}

/// Uniform `k`-subset of `0..u_size` by a partial Fisher-Yates shuffle that
/// only records displaced positions.
pub fn sample_k_subset<R: Rng + ?Sized>(u_size: u32, k: u32, rng: &mut R) -> Vec<u32> {
    assert!(k <= u_size, "cannot draw {k} distinct values from {u_size}");
    let mut swapped: Vec<(u32, u32)> = Vec::with_capacity(k as usize);
    let lookup = |sw: &[(u32, u32)], i: u32| sw.iter().rev().find(|(p, _)| *p == i).map_or(i, |(_, v)| *v);
    let mut out = Vec::with_capacity(k as usize);
    for i in 0..k {
        let j = rng.random_range(i..u_size);
        let vi = lookup(&swapped, i);
        let vj = lookup(&swapped, j);
        swapped.push((j, vi));
        out.push(vj);
    }
    out
}

/// One random `k`-out trial: `n` left vertices each pick `k` distinct right
/// vertices out of `u_size`. Returns whether a perfect matching exists.
///
/// # Panics
///
/// Panics unless `u_size >= k >= 1`.
pub fn kout_trial<R: Rng + ?Sized>(n: u32, u_size: u32, k: u32, rng: &mut R) -> bool {
    assert!(k >= 1 && u_size >= k, "k-out trial needs u_size >= k >= 1");
    let slots: Vec<Vec<u32>> = (0..n).map(|_| sample_k_subset(u_size, k, rng)).collect();
    let g = ColorGraph::from_neighbors(&slots).expect("sampled subsets are distinct");
    perfect_match(&g).is_perfect()
}
