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

//! Coloring bipartite graphs whose online vertices arrive with their edges.
//!
//! Offline vertices hold an [`OfflineState`]. When an online vertex arrives,
//! its edges are matched to distinct base colors in the color graph; a
//! matched edge takes the band-offset color of its base color. If no perfect
//! matching exists the edges are stored in a spill set and colored offline
//! with a fresh block when the stream ends.
//!
//! In batch mode an online vertex arrives in several batches of `k` edges
//! each; batch `i` of a vertex uses its own copy of the streaming palette.

use crate::error::AlgError;
use crate::harness::meter::SpaceMeter;
use crate::matching::{build_color_graph_limited, perfect_match, MatchResult};
use crate::offline::emit_bipartite_block;
use crate::palette::{draw_offline_state, ColorAllocator, FlatPalette, OfflineState, PaletteParams};
use crate::seed::AlgRng;
use crate::stream::ColorAssignment;
use crate::{BoundPolicy, Color, VertexId};

const STATE: &str = "alg.offline_state";
const BATCH: &str = "alg.batch_counter";
const SPILL: &str = "alg.spill";
const MATCH: &str = "alg.matching";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrivalMode {
    Vertex,
    Batch { batch_size: u32, max_batches: u32 },
}

impl ArrivalMode {
    /// Batch mode with `ceil(delta / k)` batches per vertex.
    pub fn batches_for(delta: u32, batch_size: u32) -> Self {
        ArrivalMode::Batch {
            batch_size,
            max_batches: delta.div_ceil(batch_size),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceConfig {
    /// Declared maximum degree.
    pub delta: u32,
    pub mode: ArrivalMode,
    pub policy: BoundPolicy,
    /// Vertex ids are below this bound.
    pub id_space: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpillReport {
    pub spilled_vertices: u64,
    pub spilled_edges: u64,
}

/// Counters reported by every algorithm layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AlgStats {
    pub spilled_vertices: u64,
    pub spilled_edges: u64,
    /// Vertices that went over the degree a sub-instance was declared with.
    pub degree_breaches: u64,
    pub flushes: u64,
}

impl AlgStats {
    pub fn absorb(&mut self, other: AlgStats) {
        self.spilled_vertices += other.spilled_vertices;
        self.spilled_edges += other.spilled_edges;
        self.degree_breaches += other.degree_breaches;
        self.flushes += other.flushes;
    }
}

pub struct OneSidedInstance {
    params: PaletteParams,
    mode: ArrivalMode,
    policy: BoundPolicy,
    flat: FlatPalette,
    base: Color,
    states: Vec<Option<OfflineState>>,
    batch_counters: Vec<u32>,
    spill: Vec<(VertexId, VertexId)>,
    report: SpillReport,
    breaches: u64,
    alloc: ColorAllocator,
    meter: SpaceMeter,
    rng: AlgRng,
    scratch: Vec<OfflineState>,
}

impl OneSidedInstance {
    /// Creates an instance and reserves its streaming color block.
    pub fn new(cfg: InstanceConfig, alloc: ColorAllocator, meter: SpaceMeter, rng: AlgRng) -> Result<Self, AlgError> {
        let params = PaletteParams::new(cfg.delta)?;
        let band = params.streaming_width();
        let flat = match cfg.mode {
            ArrivalMode::Vertex => FlatPalette::new([("base", band)])?,
            ArrivalMode::Batch {
                batch_size,
                max_batches,
            } => {
                if batch_size == 0 || max_batches == 0 {
                    return Err(AlgError::BatchSizeMismatch {
                        expected: batch_size,
                        got: 0,
                    });
                }
                FlatPalette::new([("batch", max_batches), ("base", band)])?
            }
        };
        let base = alloc.alloc(flat.total() as u32);
        let n = cfg.id_space as usize;
        Ok(OneSidedInstance {
            params,
            mode: cfg.mode,
            policy: cfg.policy,
            flat,
            base,
            states: vec![None; n],
            batch_counters: match cfg.mode {
                ArrivalMode::Vertex => Vec::new(),
                ArrivalMode::Batch { .. } => vec![0; n],
            },
            spill: Vec::new(),
            report: SpillReport::default(),
            breaches: 0,
            alloc,
            meter,
            rng,
            scratch: Vec::new(),
        })
    }

    pub fn params(&self) -> &PaletteParams {
        &self.params
    }

    /// First color of the streaming block.
    pub fn palette_base(&self) -> Color {
        self.base
    }

    /// Size of the streaming block.
    pub fn streaming_width(&self) -> u64 {
        self.flat.total()
    }

    pub fn spill_report(&self) -> SpillReport {
        self.report
    }

    pub fn stats(&self) -> AlgStats {
        AlgStats {
            spilled_vertices: self.report.spilled_vertices,
            spilled_edges: self.report.spilled_edges,
            degree_breaches: self.breaches,
            flushes: 0,
        }
    }

    pub fn offline_state(&self, v: VertexId) -> Option<&OfflineState> {
        self.states.get(v as usize).and_then(|s| s.as_ref())
    }

    /// Replaces the random state of offline vertex `v`.
    pub fn set_offline_state(&mut self, v: VertexId, state: OfflineState) {
        let slot = &mut self.states[v as usize];
        if slot.is_none() {
            self.meter.charge(STATE, 4);
        }
        *slot = Some(state);
    }

    /// Handles an online vertex with all of its edges.
    pub fn on_online_vertex(
        &mut self,
        u: VertexId,
        nbrs: &[VertexId],
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        if self.mode != ArrivalMode::Vertex {
            return Err(AlgError::ModeMismatch(
                "vertex arrival sent to a batch-mode instance".into(),
            ));
        }
        self.color_group(u, nbrs, 0, out)
    }

    /// Handles the next batch of an online vertex.
    pub fn on_batch(&mut self, u: VertexId, nbrs: &[VertexId], out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let ArrivalMode::Batch {
            batch_size,
            max_batches,
        } = self.mode
        else {
            return Err(AlgError::ModeMismatch("batch sent to a vertex-mode instance".into()));
        };
        if nbrs.len() != batch_size as usize {
            return Err(AlgError::BatchSizeMismatch {
                expected: batch_size,
                got: nbrs.len(),
            });
        }
        let seen = self.batch_counters[u as usize];
        if seen >= max_batches {
            return Err(AlgError::TooManyBatches {
                vertex: u,
                max: max_batches,
            });
        }
        if seen == 0 {
            self.meter.charge(BATCH, 1);
        }
        self.batch_counters[u as usize] = seen + 1;
        self.color_group(u, nbrs, seen, out)
    }

    fn check_degree(&mut self, vertex: VertexId, degree: usize) -> Result<(), AlgError> {
        let bound = self.params.delta();
        if degree <= bound as usize {
            return Ok(());
        }
        match self.policy {
            BoundPolicy::Strict => Err(AlgError::DegreeExceeded { vertex, bound }),
            BoundPolicy::Tolerant if degree > self.params.period() as usize => Err(AlgError::BoundViolation(format!(
                "vertex {vertex} reaches degree {degree}, beyond the proposal period {}",
                self.params.period()
            ))),
            BoundPolicy::Tolerant => {
                if degree == bound as usize + 1 {
                    self.breaches += 1;
                }
                Ok(())
            }
        }
    }

    fn color_group(
        &mut self,
        u: VertexId,
        nbrs: &[VertexId],
        batch: u32,
        out: &mut Vec<ColorAssignment>,
    ) -> Result<(), AlgError> {
        if nbrs.is_empty() {
            return Ok(());
        }
        if self.params.delta() == 1 {
            // every vertex has one edge: a single color is proper
            let c = self.base + self.flat.flatten(&self.tuple(batch, 0))?;
            out.extend(nbrs.iter().map(|&v| ColorAssignment::new(u, v, c)));
            return Ok(());
        }
        if let ArrivalMode::Vertex = self.mode {
            self.check_degree(u, nbrs.len())?;
        }
        for &v in nbrs {
            let deg = self.states[v as usize].map_or(0, |s| s.deg) as usize;
            self.check_degree(v, deg + 1)?;
        }
        self.scratch.clear();
        for &v in nbrs {
            let state = match self.states[v as usize] {
                Some(s) => s,
                None => {
                    let s = draw_offline_state(&mut self.rng, &self.params)?;
                    self.meter.charge(STATE, 4);
                    self.states[v as usize] = Some(s);
                    s
                }
            };
            self.scratch.push(state);
        }
        let graph = build_color_graph_limited(&self.scratch, &self.params, self.params.period() as usize)
            .map_err(|e| AlgError::BoundViolation(e.to_string()))?;
        let transient = graph.transient_words();
        self.meter.charge(MATCH, transient);
        let result = perfect_match(&graph);
        self.meter.release(MATCH, transient);
        match result {
            MatchResult::Perfect(choices) => {
                let p = self.params.period();
                for (&v, choice) in nbrs.iter().zip(&choices) {
                    let x = choice.band as u32 * p + choice.color;
                    let c = self.base + self.flat.flatten(&self.tuple(batch, x))?;
                    out.push(ColorAssignment::new(u, v, c));
                }
            }
            MatchResult::NoPerfectMatching => {
                self.spill.extend(nbrs.iter().map(|&v| (u, v)));
                self.meter.charge(SPILL, 2 * nbrs.len() as u64);
                self.report.spilled_vertices += 1;
                self.report.spilled_edges += nbrs.len() as u64;
            }
        }
        for &v in nbrs {
            if let Some(s) = self.states[v as usize].as_mut() {
                s.deg += 1;
            }
        }
        Ok(())
    }

    fn tuple(&self, batch: u32, x: u32) -> Vec<u32> {
        match self.mode {
            ArrivalMode::Vertex => vec![x],
            ArrivalMode::Batch { .. } => vec![batch, x],
        }
    }

    /// Colors the spill set with a fresh block and empties it.
    pub fn finalize(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        if self.spill.is_empty() {
            return Ok(());
        }
        emit_bipartite_block(&self.spill, &self.alloc, &self.meter, out);
        self.meter.release(SPILL, 2 * self.spill.len() as u64);
        self.spill = Vec::new();
        Ok(())
    }

    /// Edges currently in the spill set.
    pub fn spill(&self) -> &[(VertexId, VertexId)] {
        &self.spill
    }
}
