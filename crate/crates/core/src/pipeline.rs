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

//! Named end-to-end algorithms over a stream.
//!
//! | preset           | input                                    |
//! |------------------|------------------------------------------|
//! | `one-sided`      | bipartite, `vertex-one-sided`            |
//! | `batch-naive`    | bipartite, `batch`                       |
//! | `vertex-general` | `vertex-one-sided` or `vertex-two-sided` |
//! | `edge-sqrt`      | `edge`                                   |
//! | `edge-general`   | `edge`, with trade-off parameter `s`     |
//! | `offline-exact`  | any                                      |
//! | `offline-greedy` | any                                      |
//!
//! Bipartite inputs are those whose header declares offline vertices; the
//! general-graph variants go through the random bipartization.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::dispatch::{
    ceil_sqrt, DispatchConfig, EdgeColorer, GroupConfig, GroupDispatcher, OfflineStore, SqrtDispatcher,
};
use crate::error::AlgError;
use crate::harness::meter::SpaceMeter;
use crate::offline::{color_greedy, emit_general_block, OfflineGraph};
use crate::one_sided::{AlgStats, ArrivalMode, InstanceConfig, OneSidedInstance};
use crate::palette::{period_for, ColorAllocator};
use crate::reductions::{level_plan, side_of, EdgeBipartization, Side, SideSplit, VertexBipartization};
use crate::seed::{rng_from, split_seed, STREAM_ALG};
use crate::stream::{
    AssignmentWriter, ColorAssignment, EmitError, Mode, StreamError, StreamEvent, StreamHeader, StreamReader,
};
use crate::{BoundPolicy, VertexId};

const OFFLINE: &str = "offline.store";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    OneSided,
    BatchNaive,
    VertexGeneral,
    EdgeSqrt,
    EdgeGeneral,
    OfflineExact,
    OfflineGreedy,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::OneSided,
        Preset::BatchNaive,
        Preset::VertexGeneral,
        Preset::EdgeSqrt,
        Preset::EdgeGeneral,
        Preset::OfflineExact,
        Preset::OfflineGreedy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::OneSided => "one-sided",
            Preset::BatchNaive => "batch-naive",
            Preset::VertexGeneral => "vertex-general",
            Preset::EdgeSqrt => "edge-sqrt",
            Preset::EdgeGeneral => "edge-general",
            Preset::OfflineExact => "offline-exact",
            Preset::OfflineGreedy => "offline-greedy",
        }
    }

    /// Whether the preset runs on a stream with this mode and bipartiteness.
    pub fn accepts(&self, mode: Mode, bipartite: bool) -> bool {
        match self {
            Preset::OneSided => mode == Mode::VertexOneSided && bipartite,
            Preset::BatchNaive => mode == Mode::Batch && bipartite,
            Preset::VertexGeneral => mode == Mode::VertexTwoSided || (mode == Mode::VertexOneSided && bipartite),
            Preset::EdgeSqrt | Preset::EdgeGeneral => mode == Mode::Edge,
            Preset::OfflineExact | Preset::OfflineGreedy => true,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub preset: Preset,
    /// Trade-off parameter of `edge-general`.
    pub s: u32,
    /// Skip the small-degree offline fallbacks and use the lower
    /// bipartization threshold.
    pub force_stream: bool,
    /// Reaction of sub-instances to degree overflow.
    pub policy: BoundPolicy,
    /// Overrides the header seed.
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(preset: Preset) -> Self {
        RunOptions {
            preset,
            s: 1,
            force_stream: false,
            policy: BoundPolicy::Tolerant,
            seed: None,
        }
    }
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub preset: Preset,
    pub edges: u64,
    /// Distinct colors in the output.
    pub colors_used: u64,
    /// Colors reserved by all blocks of the run.
    pub palette: u64,
    /// A priori bound announced before the run.
    pub declared_budget: u64,
    pub peak_words: u64,
    pub spilled_vertices: u64,
    pub spilled_edges: u64,
    pub degree_breaches: u64,
    pub flushes: u64,
    /// Effective trade-off parameter (0 for presets without one).
    pub s: u32,
    /// False when the preset fell back to storing the whole graph.
    pub streaming: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error("output: {0}")]
    Emit(#[from] EmitError),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Stream(StreamError::Io(_)) | RunError::Emit(_) => 1,
            RunError::Stream(StreamError::Invalid { .. }) => 3,
            RunError::Alg(e) if e.is_input_error() => 3,
            RunError::Alg(_) => 4,
        }
    }
}

trait Runner {
    fn on_event(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError>;
    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError>;
    fn stats(&self) -> AlgStats;
}

fn mode_error(preset: Preset, ev: &StreamEvent) -> AlgError {
    AlgError::ModeMismatch(format!("{} event reached the {preset} preset", ev.kind()))
}

fn check_crossing(h: &StreamHeader, u: VertexId, nbrs: &[VertexId]) -> Result<Side, AlgError> {
    let n = h.n_total();
    let side = side_of(u, h.n_online, n)?;
    for &v in nbrs {
        if side_of(v, h.n_online, n)? == side {
            return Err(AlgError::WrongSide(u, v));
        }
    }
    Ok(side)
}

struct OneSidedRunner {
    header: StreamHeader,
    inst: OneSidedInstance,
}

impl Runner for OneSidedRunner {
    fn on_event(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        match ev {
            StreamEvent::Vertex(u, nbrs) if self.header.mode == Mode::VertexOneSided => {
                if check_crossing(&self.header, *u, nbrs)? != Side::Left {
                    return Err(AlgError::WrongSide(*u, nbrs.first().copied().unwrap_or(*u)));
                }
                self.inst.on_online_vertex(*u, nbrs, out)
            }
            StreamEvent::Batch(u, nbrs) if self.header.mode == Mode::Batch => {
                if check_crossing(&self.header, *u, nbrs)? != Side::Left {
                    return Err(AlgError::WrongSide(*u, nbrs[0]));
                }
                self.inst.on_batch(*u, nbrs, out)
            }
            other => Err(mode_error(Preset::OneSided, other)),
        }
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        self.inst.finalize(out)
    }

    fn stats(&self) -> AlgStats {
        self.inst.stats()
    }
}

struct SplitRunner {
    header: StreamHeader,
    split: SideSplit,
}

impl Runner for SplitRunner {
    fn on_event(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let StreamEvent::Vertex(u, nbrs) = ev else {
            return Err(mode_error(Preset::VertexGeneral, ev));
        };
        let side = check_crossing(&self.header, *u, nbrs)?;
        self.split.on_vertex(side, *u, nbrs, out)
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        self.split.finalize(out)
    }

    fn stats(&self) -> AlgStats {
        self.split.stats()
    }
}

struct VertexGeneralRunner {
    bip: VertexBipartization,
}

impl Runner for VertexGeneralRunner {
    fn on_event(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let StreamEvent::Vertex(u, nbrs) = ev else {
            return Err(mode_error(Preset::VertexGeneral, ev));
        };
        self.bip.on_vertex(*u, nbrs, out)
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        self.bip.finalize(out)
    }

    fn stats(&self) -> AlgStats {
        self.bip.stats()
    }
}

struct EdgeRunner {
    header: StreamHeader,
    preset: Preset,
    colorer: Box<dyn EdgeColorer>,
}

impl Runner for EdgeRunner {
    fn on_event(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let StreamEvent::Edge(u, v) = ev else {
            return Err(mode_error(self.preset, ev));
        };
        if !self.header.is_bipartite() {
            return self.colorer.feed_edge(*u, *v, out);
        }
        match check_crossing(&self.header, *u, std::slice::from_ref(v))? {
            Side::Left => self.colorer.feed_edge(*u, *v, out),
            Side::Right => self.colorer.feed_edge(*v, *u, out),
        }
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        self.colorer.finish(out)
    }

    fn stats(&self) -> AlgStats {
        self.colorer.stats()
    }
}

struct OfflineRunner {
    greedy: bool,
    edges: Vec<(VertexId, VertexId)>,
    alloc: ColorAllocator,
    meter: SpaceMeter,
}

impl Runner for OfflineRunner {
    fn on_event(&mut self, ev: &StreamEvent, _out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let before = self.edges.len();
        ev.for_each_edge(|u, v| self.edges.push((u, v)));
        self.meter.charge(OFFLINE, 2 * (self.edges.len() - before) as u64);
        Ok(())
    }

    fn finish(&mut self, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        if self.greedy && !self.edges.is_empty() {
            self.meter.charge("offline.transient", self.edges.len() as u64);
            let g = OfflineGraph::new(self.edges.clone()).expect("validated streams are simple");
            let colors = color_greedy(&g);
            self.meter.release("offline.transient", self.edges.len() as u64);
            let base = self.alloc.alloc((2 * g.max_degree()).saturating_sub(1));
            out.extend(
                self.edges
                    .iter()
                    .zip(&colors)
                    .map(|(&(u, v), &c)| ColorAssignment::new(u, v, base + c)),
            );
        } else {
            emit_general_block(&self.edges, &self.alloc, &self.meter, out);
        }
        self.meter.release(OFFLINE, 2 * self.edges.len() as u64);
        self.edges = Vec::new();
        Ok(())
    }

    fn stats(&self) -> AlgStats {
        AlgStats::default()
    }
}

/// True when a dispatcher would take its small-degree offline fallback.
pub fn uses_fallback(preset: Preset, delta: u32, n: u32, force_stream: bool) -> bool {
    if force_stream {
        return false;
    }
    let factor = match preset {
        Preset::EdgeSqrt => 300.0,
        Preset::EdgeGeneral => 900.0,
        _ => return false,
    };
    let log_n = (n.max(1) as f64).log2();
    delta as f64 <= factor * log_n * log_n
}

fn edge_budget(preset: Preset, delta: u32, n: u32, s: u32, max_edges: u64, force: bool) -> u64 {
    if uses_fallback(preset, delta, n, force) {
        return delta as u64 + 1;
    }
    match preset {
        Preset::EdgeSqrt => SqrtDispatcher::budget(delta),
        _ => GroupDispatcher::budget(delta, s, n, max_edges),
    }
}

fn one_sided_budget(delta: u32) -> u64 {
    if delta == 1 {
        return 1;
    }
    3 * period_for(delta) as u64 + delta as u64
}

fn max_edges(h: &StreamHeader, delta: u32) -> u64 {
    if h.is_bipartite() {
        h.n_online.min(h.n_offline) as u64 * delta as u64
    } else {
        (h.n_total() as u64 * delta as u64).div_ceil(2)
    }
}

/// Colors the preset may use on streams with this header.
pub fn declared_budget(h: &StreamHeader, opts: &RunOptions) -> u64 {
    let d = h.delta;
    let n = h.n_total();
    let base = d as u64 + 1;
    let plan = || level_plan(d, n, opts.force_stream);
    match opts.preset {
        Preset::OneSided => one_sided_budget(d),
        Preset::BatchNaive => {
            let k = h.batch_size.max(1);
            d.div_ceil(k) as u64 * 3 * period_for(d) as u64 + d as u64
        }
        Preset::VertexGeneral if h.is_bipartite() => 2 * one_sided_budget(d),
        Preset::VertexGeneral => plan().iter().map(|&l| 2 * one_sided_budget(l)).sum::<u64>() + base,
        Preset::EdgeSqrt | Preset::EdgeGeneral if h.is_bipartite() => {
            edge_budget(opts.preset, d, n, opts.s, max_edges(h, d), opts.force_stream)
        }
        Preset::EdgeSqrt | Preset::EdgeGeneral => {
            plan()
                .iter()
                .map(|&l| edge_budget(opts.preset, l, n, opts.s, max_edges(h, l), opts.force_stream))
                .sum::<u64>()
                + base
        }
        Preset::OfflineExact => {
            if h.is_bipartite() {
                d as u64
            } else {
                base
            }
        }
        Preset::OfflineGreedy => (2 * d as u64).saturating_sub(1),
    }
}

/// Effective trade-off parameter reported for a run.
pub fn effective_s(h: &StreamHeader, opts: &RunOptions) -> u32 {
    match opts.preset {
        Preset::EdgeGeneral => GroupDispatcher::effective_s(h.delta, opts.s),
        Preset::EdgeSqrt => ceil_sqrt(h.delta),
        _ => 0,
    }
}

fn edge_colorer(
    preset: Preset,
    delta: u32,
    h: &StreamHeader,
    opts: &RunOptions,
    alloc: &ColorAllocator,
    meter: &SpaceMeter,
    seed: u64,
) -> Result<Box<dyn EdgeColorer>, AlgError> {
    let n = h.n_total();
    if uses_fallback(preset, delta, n, opts.force_stream) {
        return Ok(Box::new(OfflineStore::new(true, alloc.clone(), meter.clone())));
    }
    Ok(match preset {
        Preset::EdgeSqrt => {
            let cfg = DispatchConfig {
                delta,
                id_space: n,
                policy: opts.policy,
            };
            Box::new(SqrtDispatcher::new(cfg, alloc.clone(), meter.clone(), seed)?)
        }
        _ => {
            let cfg = GroupConfig {
                delta,
                id_space: n,
                policy: opts.policy,
                s: opts.s,
                max_edges: max_edges(h, delta),
            };
            Box::new(GroupDispatcher::new(cfg, alloc.clone(), meter.clone(), seed)?)
        }
    })
}

/// One run of a preset over a stream, fed event by event.
pub struct Run {
    header: StreamHeader,
    opts: RunOptions,
    runner: Box<dyn Runner>,
    alloc: ColorAllocator,
    meter: SpaceMeter,
    used: Vec<u64>,
    colors_used: u64,
    edges: u64,
    declared_budget: u64,
    streaming: bool,
}

impl Run {
    pub fn new(header: &StreamHeader, opts: &RunOptions) -> Result<Run, AlgError> {
        let h = header.clone();
        if !opts.preset.accepts(h.mode, h.is_bipartite()) {
            let shape = if h.is_bipartite() { "bipartite" } else { "general" };
            return Err(AlgError::ModeMismatch(format!(
                "preset {} does not accept {shape} {} streams",
                opts.preset, h.mode
            )));
        }
        let seed = split_seed(opts.seed.unwrap_or(h.seed), STREAM_ALG);
        let alloc = ColorAllocator::new();
        let meter = SpaceMeter::new();
        let n = h.n_total();
        let d = h.delta;
        let mut streaming = true;
        let runner: Box<dyn Runner> = match opts.preset {
            Preset::OneSided | Preset::BatchNaive => {
                let mode = if h.mode == Mode::Batch {
                    ArrivalMode::batches_for(d, h.batch_size)
                } else {
                    ArrivalMode::Vertex
                };
                let cfg = InstanceConfig {
                    delta: d,
                    mode,
                    policy: BoundPolicy::Strict,
                    id_space: n,
                };
                let inst = OneSidedInstance::new(cfg, alloc.clone(), meter.clone(), rng_from(seed, 0))?;
                Box::new(OneSidedRunner {
                    header: h.clone(),
                    inst,
                })
            }
            Preset::VertexGeneral if h.is_bipartite() => {
                let split = SideSplit::new(d, n, BoundPolicy::Strict, alloc.clone(), meter.clone(), seed)?;
                Box::new(SplitRunner {
                    header: h.clone(),
                    split,
                })
            }
            Preset::VertexGeneral => {
                let plan = level_plan(d, n, opts.force_stream);
                streaming = !plan.is_empty();
                let bip = VertexBipartization::new(&plan, n, opts.policy, alloc.clone(), meter.clone(), seed)?;
                Box::new(VertexGeneralRunner { bip })
            }
            Preset::EdgeSqrt | Preset::EdgeGeneral => {
                let colorer: Box<dyn EdgeColorer> = if h.is_bipartite() {
                    streaming = !uses_fallback(opts.preset, d, n, opts.force_stream);
                    edge_colorer(opts.preset, d, &h, opts, &alloc, &meter, seed)?
                } else {
                    let plan = level_plan(d, n, opts.force_stream);
                    streaming = plan
                        .iter()
                        .any(|&l| !uses_fallback(opts.preset, l, n, opts.force_stream));
                    let levels = plan
                        .iter()
                        .enumerate()
                        .map(|(i, &l)| {
                            edge_colorer(opts.preset, l, &h, opts, &alloc, &meter, split_seed(seed, 1 + i as u64))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Box::new(EdgeBipartization::new(levels, n, alloc.clone(), meter.clone(), seed))
                };
                Box::new(EdgeRunner {
                    header: h.clone(),
                    preset: opts.preset,
                    colorer,
                })
            }
            Preset::OfflineExact | Preset::OfflineGreedy => {
                streaming = false;
                Box::new(OfflineRunner {
                    greedy: opts.preset == Preset::OfflineGreedy,
                    edges: Vec::new(),
                    alloc: alloc.clone(),
                    meter: meter.clone(),
                })
            }
        };
        Ok(Run {
            declared_budget: declared_budget(&h, opts),
            header: h,
            opts: *opts,
            runner,
            alloc,
            meter,
            used: Vec::new(),
            colors_used: 0,
            edges: 0,
            streaming,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn declared_budget(&self) -> u64 {
        self.declared_budget
    }

    pub fn meter(&self) -> &SpaceMeter {
        &self.meter
    }

    fn record(&mut self, new: &[ColorAssignment]) {
        for a in new {
            let (word, bit) = (a.color as usize / 64, a.color % 64);
            if word >= self.used.len() {
                self.used.resize(word + 1, 0);
            }
            if self.used[word] & (1 << bit) == 0 {
                self.used[word] |= 1 << bit;
                self.colors_used += 1;
            }
        }
    }

    /// Processes one event; new assignments are appended to `out`.
    pub fn feed(&mut self, ev: &StreamEvent, out: &mut Vec<ColorAssignment>) -> Result<(), AlgError> {
        let start = out.len();
        self.edges += ev.edge_count() as u64;
        self.runner.on_event(ev, out)?;
        debug_assert!(self.meter.is_consistent());
        let fresh = out[start..].to_vec();
        self.record(&fresh);
        Ok(())
    }

    /// Colors everything still held and reports the run.
    pub fn finish(mut self, out: &mut Vec<ColorAssignment>) -> Result<RunSummary, AlgError> {
        let start = out.len();
        self.runner.finish(out)?;
        let fresh = out[start..].to_vec();
        self.record(&fresh);
        let stats = self.runner.stats();
        Ok(RunSummary {
            preset: self.opts.preset,
            edges: self.edges,
            colors_used: self.colors_used,
            palette: self.alloc.allocated(),
            declared_budget: self.declared_budget,
            peak_words: self.meter.peak_words(),
            spilled_vertices: stats.spilled_vertices,
            spilled_edges: stats.spilled_edges,
            degree_breaches: stats.degree_breaches,
            flushes: stats.flushes,
            s: effective_s(&self.header, &self.opts),
            streaming: self.streaming,
        })
    }
}

/// Reads a stream, writes `c` lines as they are decided and a trailer.
///
/// `on_start` is called with the header and the declared budget before the
/// first event is processed.
pub fn run_stream_with<R: BufRead, W: Write>(
    input: R,
    output: W,
    opts: &RunOptions,
    on_start: impl FnOnce(&StreamHeader, u64),
) -> Result<RunSummary, RunError> {
    let reader = StreamReader::new(input)?;
    let mut run = Run::new(reader.header(), opts)?;
    on_start(run.header(), run.declared_budget());
    let mut writer = AssignmentWriter::new(output);
    let mut buf = Vec::new();
    for ev in reader {
        let ev = ev?;
        run.feed(&ev, &mut buf)?;
        writer.emit_all(&buf)?;
        buf.clear();
    }
    let summary = run.finish(&mut buf)?;
    writer.emit_all(&buf)?;
    writer.trailer(summary.colors_used, summary.peak_words)?;
    writer.close()?;
    Ok(summary)
}

pub fn run_stream<R: BufRead, W: Write>(input: R, output: W, opts: &RunOptions) -> Result<RunSummary, RunError> {
    run_stream_with(input, output, opts, |_, _| {})
}

/// Runs over already validated events and returns the assignments.
pub fn run_events(
    header: &StreamHeader,
    events: &[StreamEvent],
    opts: &RunOptions,
) -> Result<(Vec<ColorAssignment>, RunSummary), AlgError> {
    let mut run = Run::new(header, opts)?;
    let mut out = Vec::new();
    for ev in events {
        run.feed(ev, &mut out)?;
    }
    let summary = run.finish(&mut out)?;
    Ok((out, summary))
}
