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

//! Reductions to the one-sided bipartite case.
//!
//! [`SideSplit`] handles bipartite graphs where vertices of both sides
//! arrive: a vertex is online in the instance of its own side, and the two
//! instances use disjoint color blocks.
//!
//! General graphs are split into bipartite levels by random bits. Every
//! vertex draws one random bit per level; an edge belongs to the first level
//! at which its endpoints' bits differ and is oriented from the bit-1
//! endpoint (online) to the bit-0 endpoint (offline). Edges whose endpoints
//! agree on every level are kept and colored offline at the end. Level `l`
//! (0-based) expects degree about `delta / 2^(l+1)` and is declared with
//! `min(delta, ceil(1.5 * ceil(delta / 2^l)))`; levels stop once that falls
//! below a logarithmic threshold.

use rand::Rng;

use crate::dispatch::{EdgeColorer, OfflineStore};
use crate::error::AlgError;
use crate::harness::meter::SpaceMeter;
use crate::one_sided::{AlgStats, ArrivalMode, InstanceConfig, OneSidedInstance};
use crate::palette::ColorAllocator;
use crate::seed::{rng_from, split_seed, AlgRng};
use crate::stream::ColorAssignment;
use crate::{BoundPolicy, VertexId};

const BITS: &str = "reductions.bits";

/// Side of a vertex in a declared bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Ids `0..n_online`.
    Left,
    /// Ids `n_online..n_online + n_offline`.
    Right,
}

/// Side of `v` when the left side is `0..n_left` and all ids are below `n`.
pub fn side_of(v: VertexId, n_left: u32, n: u32) -> Result<Side, AlgError> {
    if v < n_left {
        Ok(Side::Left)
    } else if v < n {
        Ok(Side::Right)
    } else {
        Err(AlgError::UnknownSide(v))
    }
}

/// Instance that handles arrivals of vertices on `side`.
pub fn route_two_sided(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// Two vertex-mode instances, one per arriving side.
pub struct SideSplit {
    instances: [OneSidedInstance; 2],
}

impl SideSplit {
    pub fn new(
        delta: u32,
        id_space: u32,
        policy: BoundPolicy,
        alloc: ColorAllocator,
        meter: SpaceMeter,
        seed: u64,
    ) -> Result<Self, AlgError> {
        let cfg = InstanceConfig {
            delta,
            mode: ArrivalMode::Vertex,
            policy,
            id_space,
        };
        let make = |i: u64| OneSidedInstance::new(cfg, alloc.clone(), meter.clone(), rng_from(seed, i));
        Ok(SideSplit {
            instances: [make(0)?, make(1)?],
        })
    }

    pub fn on_vertex(
        &mut self,
        side: Side,
        u: VertexId,
        nbrs: &[VertexId],
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        self.instances[route_two_sided(side)].on_online_vertex(u, nbrs, out)
    }

    pub fn instance(&self, side: Side) -> &OneSidedInstance {
        &self.instances[route_two_sided(side)]
    }

    pub fn finalize(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        for inst in &mut self.instances {
            inst.finalize(out)?;
        }
        Ok(())
    }

    pub fn stats(&self) -> AlgStats {
        let mut s = self.instances[0].stats();
        s.absorb(self.instances[1].stats());
        s
    }
}

/// Where an edge goes in the bipartization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Level(u32),
    Base,
}

/// First level below `levels` where the bit words differ.
pub fn route_bipartization(bits_u: u64, bits_v: u64, levels: u32) -> Route {
    let mask = if levels >= 64 { u64::MAX } else { (1u64 << levels) - 1 };
    let diff = (bits_u ^ bits_v) & mask;
    if diff == 0 {
        Route::Base
    } else {
        Route::Level(diff.trailing_zeros())
    }
}

pub fn ceil_log2(x: u32) -> u32 {
    if x <= 1 {
        0
    } else {
        32 - (x - 1).leading_zeros()
    }
}

/// Smallest declared level degree that still gets a streaming level.
pub fn level_threshold(n: u32, force_stream: bool) -> u32 {
    if force_stream || n <= 1 {
        return 16;
    }
    ((10.0 * (n as f64).log2()).ceil() as u32).max(16)
}

/// Declared degree of each streaming level, in level order.
pub fn level_plan(delta: u32, n: u32, force_stream: bool) -> Vec<u32> {
    let threshold = level_threshold(n, force_stream);
    let mut plan = Vec::new();
    for level in 0..ceil_log2(delta) {
        let expected = delta.div_ceil(1 << level);
        let declared = delta.min((3 * expected).div_ceil(2));
        if declared < threshold {
            break;
        }
        plan.push(declared);
    }
    plan
}

/// One random word per vertex, drawn at first sight.
pub struct LevelBits {
    words: Vec<u64>,
    drawn: Vec<bool>,
    rng: AlgRng,
    meter: SpaceMeter,
}

impl LevelBits {
    pub fn new(id_space: u32, rng: AlgRng, meter: SpaceMeter) -> Self {
        LevelBits {
            words: vec![0; id_space as usize],
            drawn: vec![false; id_space as usize],
            rng,
            meter,
        }
    }

    pub fn get(&mut self, v: VertexId) -> u64 {
        let i = v as usize;
        if !self.drawn[i] {
            self.drawn[i] = true;
            self.words[i] = self.rng.random();
            self.meter.charge(BITS, 1);
        }
        self.words[i]
    }
}

fn bit(word: u64, level: u32) -> u64 {
    (word >> level) & 1
}

/// Edge arrivals of a general graph, split over bipartite levels.
pub struct EdgeBipartization {
    bits: LevelBits,
    levels: Vec<Box<dyn EdgeColorer>>,
    base: OfflineStore,
    level_edges: Vec<u64>,
}

impl EdgeBipartization {
    /// `levels[l]` colors the edges of level `l`.
    pub fn new(
        levels: Vec<Box<dyn EdgeColorer>>,
        id_space: u32,
        alloc: ColorAllocator,
        meter: SpaceMeter,
        seed: u64,
    ) -> Self {
        let n = levels.len();
        EdgeBipartization {
            bits: LevelBits::new(id_space, rng_from(seed, 0), meter.clone()),
            levels,
            base: OfflineStore::new(false, alloc, meter),
            level_edges: vec![0; n],
        }
    }

    /// Edges routed to each level so far.
    pub fn level_edges(&self) -> &[u64] {
        &self.level_edges
    }

    pub fn base_edges(&self) -> usize {
        self.base.len()
    }
}

impl EdgeColorer for EdgeBipartization {
    fn feed_edge(&mut self, u: VertexId, v: VertexId, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let (bu, bv) = (self.bits.get(u), self.bits.get(v));
        match route_bipartization(bu, bv, self.levels.len() as u32) {
            Route::Level(l) => {
                self.level_edges[l as usize] += 1;
                let (online, offline) = if bit(bu, l) == 1 { (u, v) } else { (v, u) };
                self.levels[l as usize].feed_edge(online, offline, out)
            }
            Route::Base => self.base.feed_edge(u, v, out),
        }
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        for level in &mut self.levels {
            level.finish(out)?;
        }
        self.base.finish(out)
    }

    fn stats(&self) -> AlgStats {
        let mut s = AlgStats::default();
        for level in &self.levels {
            s.absorb(level.stats());
        }
        s
    }
}

/// Vertex arrivals of a general graph, split over bipartite levels.
///
/// An arriving vertex's edges are grouped by level; at each level the vertex
/// is online in the instance of its own bit and its neighbours there all
/// carry the other bit.
pub struct VertexBipartization {
    bits: LevelBits,
    levels: Vec<SideSplit>,
    base: OfflineStore,
    scratch: Vec<Vec<VertexId>>,
}

impl VertexBipartization {
    pub fn new(
        plan: &[u32],
        id_space: u32,
        policy: BoundPolicy,
        alloc: ColorAllocator,
        meter: SpaceMeter,
        seed: u64,
    ) -> Result<Self, AlgError> {
        let levels = plan
            .iter()
            .enumerate()
            .map(|(l, &d)| {
                SideSplit::new(
                    d,
                    id_space,
                    policy,
                    alloc.clone(),
                    meter.clone(),
                    split_seed(seed, 1 + l as u64),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VertexBipartization {
            bits: LevelBits::new(id_space, rng_from(seed, 0), meter.clone()),
            scratch: vec![Vec::new(); levels.len()],
            levels,
            base: OfflineStore::new(false, alloc, meter),
        })
    }

    pub fn on_vertex(
        &mut self,
        w: VertexId,
        nbrs: &[VertexId],
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        let bw = self.bits.get(w);
        let n_levels = self.levels.len() as u32;
        for list in &mut self.scratch {
            list.clear();
        }
        for &v in nbrs {
            let bv = self.bits.get(v);
            match route_bipartization(bw, bv, n_levels) {
                Route::Level(l) => self.scratch[l as usize].push(v),
                Route::Base => self.base.feed_edge(w, v, out)?,
            }
        }
        for l in 0..n_levels {
            let list = std::mem::take(&mut self.scratch[l as usize]);
            if !list.is_empty() {
                let side = if bit(bw, l) == 1 { Side::Right } else { Side::Left };
                self.levels[l as usize]
                    .on_vertex(side, w, &list, out)
                    .map_err(AlgError::nested)?;
            }
            self.scratch[l as usize] = list;
        }
        Ok(())
    }

    pub fn finalize(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        for level in &mut self.levels {
            level.finalize(out)?;
        }
        self.base.finish(out)
    }

    pub fn stats(&self) -> AlgStats {
        let mut s = AlgStats::default();
        for level in &self.levels {
            s.absorb(level.stats());
        }
        s
    }
}
