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

//! Edge arrivals: buffering edges into batches and spreading the batches
//! over sub-instances.
//!
//! Edges are buffered per online endpoint. As soon as a vertex has `k`
//! buffered edges (`k = ceil(sqrt(delta))`) its `k` oldest edges form its next
//! batch. A per-vertex random shift decides which sub-instance receives the
//! batch, which spreads every offline vertex's edges evenly over the
//! sub-instances.
//!
//! * [`SqrtDispatcher`] keeps up to `n * k` edges and runs `k` vertex-mode
//!   instances of degree `2k`.
//! * [`GroupDispatcher`] keeps at most `n * s` edges. When the buffer is full
//!   and no vertex has a full batch, the whole buffer is colored offline with
//!   a fresh block. Batches are grouped `ceil(k / s)` at a time and routed to
//!   `s` batch-mode instances of degree `ceil(2 * delta / s)`.
//! * [`OfflineStore`] keeps everything and colors it at the end.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;

use crate::error::AlgError;
use crate::harness::meter::SpaceMeter;
use crate::offline::{emit_bipartite_block, emit_general_block};
use crate::one_sided::{AlgStats, ArrivalMode, InstanceConfig, OneSidedInstance};
use crate::palette::{period_for, ColorAllocator};
use crate::seed::{rng_from, AlgRng};
use crate::stream::ColorAssignment;
use crate::{BoundPolicy, VertexId};

const BUFFER: &str = "dispatch.buffer";
const SHIFTS: &str = "dispatch.shifts";
const STORE: &str = "dispatch.store";

const UNSET: u32 = u32::MAX;

/// Consumer of oriented edge arrivals.
pub trait EdgeColorer {
    /// Feeds one edge; `online` is the endpoint batches are keyed by.
    fn feed_edge(
        &mut self,
        online: VertexId,
        offline: VertexId,
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError>;

    /// Colors everything still held. Call once, after the last edge.
    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError>;

    fn stats(&self) -> AlgStats;
}

pub fn ceil_sqrt(x: u32) -> u32 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

/// Sub-instance of a vertex's `i_u`-th batch (1-based) with shift `b_u`.
pub fn batch_instance(i_u: u32, b_u: u32, k: u32) -> u32 {
    ((i_u as u64 + b_u as u64) % k as u64) as u32
}

/// Group number of a vertex's `i_u`-th batch (1-based) with groups of
/// `group_width` batches.
pub fn group_number(i_u: u32, group_width: u32) -> u32 {
    i_u.div_ceil(group_width)
}

/// Sub-instance of a vertex's `i_u`-th batch under group routing.
pub fn group_instance(i_u: u32, group_width: u32, g_u: u32, s: u32) -> u32 {
    ((group_number(i_u, group_width) as u64 + g_u as u64) % s as u64) as u32
}

/// Edges waiting to form batches, keyed by online endpoint, oldest first.
pub struct Buffer {
    queues: Vec<VecDeque<VertexId>>,
    size: usize,
    k: u32,
    ready: BTreeSet<VertexId>,
    meter: SpaceMeter,
}

impl Buffer {
    pub fn new(id_space: u32, k: u32, meter: SpaceMeter) -> Self {
        Buffer {
            queues: (0..id_space).map(|_| VecDeque::new()).collect(),
            size: 0,
            k,
            ready: BTreeSet::new(),
            meter,
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.queues[u as usize].len()
    }

    /// Adds an edge; returns true if `u` now has a full batch.
    pub fn push(&mut self, u: VertexId, v: VertexId) -> bool {
        let q = &mut self.queues[u as usize];
        q.push_back(v);
        self.size += 1;
        self.meter.charge(BUFFER, 2);
        let full = q.len() >= self.k as usize;
        if full {
            self.ready.insert(u);
        }
        full
    }

    /// Lowest vertex id with a full batch.
    pub fn first_ready(&self) -> Option<VertexId> {
        self.ready.first().copied()
    }

    /// Removes the `k` oldest edges of `u`.
    pub fn take_batch(&mut self, u: VertexId) -> Vec<VertexId> {
        let q = &mut self.queues[u as usize];
        debug_assert!(q.len() >= self.k as usize);
        let batch: Vec<VertexId> = q.drain(..self.k as usize).collect();
        if q.len() < self.k as usize {
            self.ready.remove(&u);
        }
        self.size -= batch.len();
        self.meter.release(BUFFER, 2 * batch.len() as u64);
        batch
    }

    /// Removes every buffered edge, as `(online, offline)` pairs in vertex order.
    pub fn drain_all(&mut self) -> Vec<(VertexId, VertexId)> {
        let mut edges = Vec::with_capacity(self.size);
        for (u, q) in self.queues.iter_mut().enumerate() {
            edges.extend(q.drain(..).map(|v| (u as VertexId, v)));
        }
        self.meter.release(BUFFER, 2 * self.size as u64);
        self.size = 0;
        self.ready.clear();
        edges
    }
}

/// Per online vertex: a random shift and a batch counter, drawn and charged
/// at first use.
struct Shifts {
    shift: Vec<u32>,
    count: Vec<u32>,
    range: u32,
    rng: AlgRng,
    meter: SpaceMeter,
}

impl Shifts {
    fn new(id_space: u32, range: u32, rng: AlgRng, meter: SpaceMeter) -> Self {
        Shifts {
            shift: vec![UNSET; id_space as usize],
            count: vec![0; id_space as usize],
            range,
            rng,
            meter,
        }
    }

    /// Counts the next batch of `u`; returns `(batch number, shift)`.
    fn next_batch(&mut self, u: VertexId) -> (u32, u32) {
        let i = u as usize;
        if self.shift[i] == UNSET {
            self.shift[i] = self.rng.random_range(0..self.range);
            self.meter.charge(SHIFTS, 2);
        }
        self.count[i] += 1;
        (self.count[i], self.shift[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DispatchConfig {
    pub delta: u32,
    pub id_space: u32,
    pub policy: BoundPolicy,
}

/// `k` vertex-mode instances fed by batches of `k = ceil(sqrt(delta))` edges.
pub struct SqrtDispatcher {
    k: u32,
    buffer: Buffer,
    shifts: Shifts,
    instances: Vec<OneSidedInstance>,
    alloc: ColorAllocator,
    meter: SpaceMeter,
    leftover: u64,
}

impl SqrtDispatcher {
    pub fn new(cfg: DispatchConfig, alloc: ColorAllocator, meter: SpaceMeter, seed: u64) -> Result<Self, AlgError> {
        let k = ceil_sqrt(cfg.delta);
        let sub = InstanceConfig {
            delta: Self::sub_delta(cfg.delta),
            mode: ArrivalMode::Vertex,
            policy: cfg.policy,
            id_space: cfg.id_space,
        };
        let instances = (0..k)
            .map(|i| OneSidedInstance::new(sub, alloc.clone(), meter.clone(), rng_from(seed, 1 + i as u64)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SqrtDispatcher {
            k,
            buffer: Buffer::new(cfg.id_space, k, meter.clone()),
            shifts: Shifts::new(cfg.id_space, k, rng_from(seed, 0), meter.clone()),
            instances,
            alloc,
            meter,
            leftover: 0,
        })
    }

    /// Declared degree of each sub-instance: `2k`, capped by `delta`.
    pub fn sub_delta(delta: u32) -> u32 {
        delta.min(2 * ceil_sqrt(delta))
    }

    /// Colors a run can use at most.
    pub fn budget(delta: u32) -> u64 {
        let k = ceil_sqrt(delta) as u64;
        let d = Self::sub_delta(delta);
        k * (3 * period_for(d) as u64 + d as u64) + delta as u64
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn buffer(&self) -> &Buffer {
        &self.buffer
    }

    /// Number of edges colored from the leftover block.
    pub fn leftover_edges(&self) -> u64 {
        self.leftover
    }

    fn route(&mut self, u: VertexId, batch: Vec<VertexId>, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let (i_u, b_u) = self.shifts.next_batch(u);
        if i_u > self.k {
            return Err(AlgError::BoundViolation(format!(
                "vertex {u} forms more than {} batches",
                self.k
            )));
        }
        let x = batch_instance(i_u, b_u, self.k) as usize;
        self.instances[x]
            .on_online_vertex(u, &batch, out)
            .map_err(AlgError::nested)
    }
}

impl EdgeColorer for SqrtDispatcher {
    fn feed_edge(
        &mut self,
        online: VertexId,
        offline: VertexId,
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        if self.buffer.push(online, offline) {
            let batch = self.buffer.take_batch(online);
            self.route(online, batch, out)?;
        }
        Ok(())
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let rest = self.buffer.drain_all();
        self.leftover += rest.len() as u64;
        self.meter.charge(BUFFER, 2 * rest.len() as u64);
        emit_bipartite_block(&rest, &self.alloc, &self.meter, out);
        self.meter.release(BUFFER, 2 * rest.len() as u64);
        for inst in &mut self.instances {
            inst.finalize(out)?;
        }
        Ok(())
    }

    fn stats(&self) -> AlgStats {
        let mut s = AlgStats::default();
        for inst in &self.instances {
            s.absorb(inst.stats());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupConfig {
    pub delta: u32,
    pub id_space: u32,
    pub policy: BoundPolicy,
    /// Requested trade-off parameter; clamped to `1..=ceil(sqrt(delta))`.
    pub s: u32,
    /// Upper bound on the number of edges, for the flush sanity check.
    pub max_edges: u64,
}

/// `s` batch-mode instances fed by groups of `ceil(k / s)` batches.
pub struct GroupDispatcher {
    k: u32,
    s: u32,
    group_width: u32,
    cap: usize,
    buffer: Buffer,
    shifts: Shifts,
    instances: Vec<OneSidedInstance>,
    alloc: ColorAllocator,
    meter: SpaceMeter,
    flushes: u64,
    max_flushes: u64,
}

impl GroupDispatcher {
    pub fn new(cfg: GroupConfig, alloc: ColorAllocator, meter: SpaceMeter, seed: u64) -> Result<Self, AlgError> {
        let k = ceil_sqrt(cfg.delta);
        let s = Self::effective_s(cfg.delta, cfg.s);
        if s != cfg.s {
            log::warn!("s = {} clamped to {s} for delta = {}", cfg.s, cfg.delta);
        }
        let group_width = k.div_ceil(s);
        let sub = InstanceConfig {
            delta: Self::sub_delta(cfg.delta, s),
            mode: ArrivalMode::Batch {
                batch_size: k,
                max_batches: group_width,
            },
            policy: cfg.policy,
            id_space: cfg.id_space,
        };
        let instances = (0..s)
            .map(|i| OneSidedInstance::new(sub, alloc.clone(), meter.clone(), rng_from(seed, 1 + i as u64)))
            .collect::<Result<Vec<_>, _>>()?;
        let cap = cfg.id_space as u64 * s as u64;
        Ok(GroupDispatcher {
            k,
            s,
            group_width,
            cap: cap as usize,
            buffer: Buffer::new(cfg.id_space, k, meter.clone()),
            shifts: Shifts::new(cfg.id_space, s, rng_from(seed, 0), meter.clone()),
            instances,
            alloc,
            meter,
            flushes: 0,
            max_flushes: cfg.max_edges.div_ceil(cap.max(1)) + 1,
        })
    }

    pub fn effective_s(delta: u32, s: u32) -> u32 {
        s.clamp(1, ceil_sqrt(delta))
    }

    /// Declared degree of each group instance: `ceil(2 * delta / s)`, capped
    /// by `delta`.
    pub fn sub_delta(delta: u32, s: u32) -> u32 {
        delta.min((2 * delta).div_ceil(s))
    }

    /// Colors a run can use at most, given the flush allowance.
    pub fn budget(delta: u32, s: u32, id_space: u32, max_edges: u64) -> u64 {
        let s = Self::effective_s(delta, s);
        let k = ceil_sqrt(delta);
        let gw = k.div_ceil(s) as u64;
        let d = Self::sub_delta(delta, s);
        let cap = (id_space as u64 * s as u64).max(1);
        let flushes = max_edges.div_ceil(cap) + 1;
        s as u64 * (gw * 3 * period_for(d) as u64 + d as u64) + flushes * delta as u64 + delta as u64
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn group_width(&self) -> u32 {
        self.group_width
    }

    pub fn buffer(&self) -> &Buffer {
        &self.buffer
    }

    fn route(&mut self, u: VertexId, batch: Vec<VertexId>, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let (i_u, g_u) = self.shifts.next_batch(u);
        if group_number(i_u, self.group_width) > self.s {
            return Err(AlgError::BoundViolation(format!(
                "vertex {u} forms more than {} groups",
                self.s
            )));
        }
        let x = group_instance(i_u, self.group_width, g_u, self.s) as usize;
        self.instances[x].on_batch(u, &batch, out).map_err(AlgError::nested)
    }

    fn flush(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        self.flushes += 1;
        if self.flushes > self.max_flushes {
            return Err(AlgError::FlushBudgetExceeded {
                flushes: self.flushes,
                budget: self.max_flushes,
            });
        }
        let edges = self.buffer.drain_all();
        self.meter.charge(BUFFER, 2 * edges.len() as u64);
        emit_bipartite_block(&edges, &self.alloc, &self.meter, out);
        self.meter.release(BUFFER, 2 * edges.len() as u64);
        Ok(())
    }
}

impl EdgeColorer for GroupDispatcher {
    fn feed_edge(
        &mut self,
        online: VertexId,
        offline: VertexId,
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        self.buffer.push(online, offline);
        if self.buffer.len() < self.cap {
            return Ok(());
        }
        while let Some(u) = self.buffer.first_ready() {
            let batch = self.buffer.take_batch(u);
            self.route(u, batch, out)?;
        }
        if self.buffer.len() >= self.cap {
            self.flush(out)?;
        }
        Ok(())
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let rest = self.buffer.drain_all();
        self.meter.charge(BUFFER, 2 * rest.len() as u64);
        emit_bipartite_block(&rest, &self.alloc, &self.meter, out);
        self.meter.release(BUFFER, 2 * rest.len() as u64);
        for inst in &mut self.instances {
            inst.finalize(out)?;
        }
        Ok(())
    }

    fn stats(&self) -> AlgStats {
        let mut s = AlgStats {
            flushes: self.flushes,
            ..AlgStats::default()
        };
        for inst in &self.instances {
            s.absorb(inst.stats());
        }
        s
    }
}

/// Stores every edge and colors the whole graph offline at the end.
pub struct OfflineStore {
    edges: Vec<(VertexId, VertexId)>,
    oriented: bool,
    alloc: ColorAllocator,
    meter: SpaceMeter,
}

impl OfflineStore {
    /// With `oriented`, edges are known to go from one side to the other and
    /// get max-degree colors; otherwise bipartiteness is detected at the end.
    pub fn new(oriented: bool, alloc: ColorAllocator, meter: SpaceMeter) -> Self {
        OfflineStore {
            edges: Vec::new(),
            oriented,
            alloc,
            meter,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl EdgeColorer for OfflineStore {
    fn feed_edge(
        &mut self,
        online: VertexId,
        offline: VertexId,
        _out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        self.edges.push((online, offline));
        self.meter.charge(STORE, 2);
        Ok(())
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        if self.oriented {
            emit_bipartite_block(&self.edges, &self.alloc, &self.meter, out);
        } else {
            emit_general_block(&self.edges, &self.alloc, &self.meter, out);
        }
        self.meter.release(STORE, 2 * self.edges.len() as u64);
        self.edges = Vec::new();
        Ok(())
    }

    fn stats(&self) -> AlgStats {
        AlgStats::default()
    }
}
