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

//! Single-pass edge coloring of graph streams.
//!
//! The crate colors the edges of a graph that arrives as a stream (whole
//! vertices, fixed-size batches of one vertex's edges, or single edges) while
//! keeping only a small amount of state per vertex. Colors are written out as
//! soon as they are decided, so the output itself is a stream.
//!
//! Layout:
//!
//! * [`stream`]: the text formats for input streams and color output.
//! * [`palette`]: shifted color proposals and flat color namespaces.
//! * [`matching`]: the per-arrival color graph and bipartite matching.
//! * [`one_sided`]: the vertex/batch arrival colorer for bipartite graphs.
//! * [`dispatch`]: buffering edge arrivals into batches.
//! * [`reductions`]: two-sided and general-graph reductions.
//! * [`offline`]: exact and greedy offline edge colorers.
//! * [`pipeline`]: named end-to-end presets.
//! * [`harness`]: generators, verifier, space meter and experiments.

pub mod dispatch;
pub mod error;
pub mod harness;
pub mod matching;
pub mod offline;
pub mod one_sided;
pub mod palette;
pub mod pipeline;
pub mod reductions;
pub mod seed;
pub mod stream;

pub use error::AlgError;
pub use harness::meter::SpaceMeter;
pub use pipeline::{run_stream, Preset, RunError, RunOptions, RunSummary};
pub use stream::{ColorAssignment, Mode, StreamEvent, StreamHeader};

/// Dense vertex identifier.
pub type VertexId = u32;

/// Flat color identifier.
pub type Color = u32;

/// How an instance reacts when a vertex exceeds the degree bound it was
/// declared with.
///
/// `Strict` rejects the event. `Tolerant` counts the breach and keeps going
/// for as long as the coloring stays provably proper, i.e. while every
/// offline degree stays within the proposal period.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundPolicy {
    #[default]
    Tolerant,
    Strict,
}
