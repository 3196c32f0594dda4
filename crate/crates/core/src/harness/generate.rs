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

//! Seeded stream generators.
//!
//! Bipartite families put `n` online vertices at ids `0..n` and `n` offline
//! vertices at `n..2n`. `regular-general` produces a general graph on `n`
//! vertices.
//!
//! * `regular-bipartite`: union of `delta` disjoint perfect matchings, each a
//!   cyclic shift under random relabelings of both sides.
//! * `random-bipartite`: online degrees uniform in `[ceil(delta/2), delta]`,
//!   neighbours uniform among offline vertices with spare capacity.
//! * `regular-general`: circulant graph with offsets `1..=delta/2` (plus the
//!   antipodal offset for odd `delta`) under a random relabeling.
//! * `adversarial-frontload`: `regular-bipartite` edges ordered so that each
//!   offline vertex's edges are consecutive and offline vertices come in id
//!   order.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::dispatch::ceil_sqrt;
use crate::seed::{rng_from, AlgRng, STREAM_GEN};
use crate::stream::{stream_to_string, Mode, StreamEvent, StreamHeader};
use crate::VertexId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    RegularBipartite,
    RandomBipartite,
    RegularGeneral,
    AdversarialFrontload,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::RegularBipartite,
        Family::RandomBipartite,
        Family::RegularGeneral,
        Family::AdversarialFrontload,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::RegularBipartite => "regular-bipartite",
            Family::RandomBipartite => "random-bipartite",
            Family::RegularGeneral => "regular-general",
            Family::AdversarialFrontload => "adversarial-frontload",
        }
    }

    pub fn is_bipartite(&self) -> bool {
        *self != Family::RegularGeneral
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub family: Family,
    pub n: u32,
    pub delta: u32,
    pub mode: Mode,
    pub seed: u64,
    /// Batch size for `batch` mode; defaults to [`default_batch_size`].
    pub batch_size: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),
}

fn infeasible<T>(msg: impl Into<String>) -> Result<T, GenError> {
    Err(GenError::InfeasibleSpec(msg.into()))
}

/// Largest divisor of `delta` that is at most `ceil(sqrt(delta))`.
pub fn default_batch_size(delta: u32) -> u32 {
    (1..=ceil_sqrt(delta).max(1))
        .rev()
        .find(|&k| delta.is_multiple_of(k))
        .unwrap_or(1)
}

fn permutation(len: u32, rng: &mut AlgRng) -> Vec<u32> {
    let mut p: Vec<u32> = (0..len).collect();
    p.shuffle(rng);
    p
}

/// Edges `(online, offline)` of a regular bipartite graph.
fn regular_bipartite(n: u32, delta: u32, rng: &mut AlgRng) -> Vec<(VertexId, VertexId)> {
    let left = permutation(n, rng);
    let right = permutation(n, rng);
    let mut edges = Vec::with_capacity(n as usize * delta as usize);
    for i in 0..n {
        for j in 0..delta {
            edges.push((left[i as usize], n + right[((i + j) % n) as usize]));
        }
    }
    edges
}

/// Per online vertex, its offline neighbours.
fn random_bipartite(n: u32, delta: u32, multiple: u32, rng: &mut AlgRng) -> Vec<Vec<VertexId>> {
    let mut capacity = vec![delta; n as usize];
    let mut avail: Vec<u32> = (0..n).collect();
    let mut adj = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let want = rng.random_range(delta.div_ceil(2)..=delta);
        let want = (want / multiple * multiple).min(avail.len() as u32 / multiple * multiple) as usize;
        let mut nbrs = Vec::with_capacity(want);
        for i in 0..want {
            let j = rng.random_range(i..avail.len());
            avail.swap(i, j);
            nbrs.push(avail[i]);
        }
        for &v in &nbrs {
            capacity[v as usize] -= 1;
        }
        avail.retain(|&v| capacity[v as usize] > 0);
        adj.push(nbrs.into_iter().map(|v| n + v).collect());
    }
    adj
}

fn regular_general(n: u32, delta: u32, rng: &mut AlgRng) -> Vec<(VertexId, VertexId)> {
    let p = permutation(n, rng);
    let mut edges = Vec::with_capacity((n as usize * delta as usize).div_ceil(2));
    for i in 0..n {
        for j in 1..=delta / 2 {
            edges.push((p[i as usize], p[((i + j) % n) as usize]));
        }
    }
    if delta % 2 == 1 {
        for i in 0..n / 2 {
            edges.push((p[i as usize], p[(i + n / 2) as usize]));
        }
    }
    edges
}

fn adjacency(n_total: u32, edges: &[(VertexId, VertexId)]) -> Vec<Vec<VertexId>> {
    let mut adj = vec![Vec::new(); n_total as usize];
    for &(u, v) in edges {
        adj[u as usize].push(v);
    }
    adj
}

/// Every vertex arrives once, in `order`, listing its earlier neighbours.
fn two_sided_events(n_total: u32, edges: &[(VertexId, VertexId)], order: &[VertexId]) -> Vec<StreamEvent> {
    let mut pos = vec![0usize; n_total as usize];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i;
    }
    let mut earlier = vec![Vec::new(); n_total as usize];
    for &(u, v) in edges {
        let (first, later) = if pos[u as usize] < pos[v as usize] {
            (u, v)
        } else {
            (v, u)
        };
        earlier[later as usize].push(first);
    }
    order
        .iter()
        .map(|&v| StreamEvent::Vertex(v, std::mem::take(&mut earlier[v as usize])))
        .collect()
}

fn batch_events(adj: &[Vec<VertexId>], k: u32, rng: &mut AlgRng) -> Vec<StreamEvent> {
    let mut batches: Vec<StreamEvent> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nb)| {
            nb.chunks(k as usize)
                .map(move |c| StreamEvent::Batch(u as VertexId, c.to_vec()))
        })
        .collect();
    batches.shuffle(rng);
    batches
}

fn validate(spec: &GenSpec, k: u32) -> Result<(), GenError> {
    if spec.delta == 0 {
        return infeasible("delta must be at least 1");
    }
    if spec.n == 0 {
        return infeasible("n must be at least 1");
    }
    let bip = spec.family.is_bipartite();
    if !bip && matches!(spec.mode, Mode::VertexOneSided | Mode::Batch) {
        return infeasible(format!("{} needs a bipartite family", spec.mode));
    }
    match spec.family {
        Family::RegularGeneral => {
            if spec.delta >= spec.n {
                return infeasible("regular-general needs delta < n");
            }
            if spec.delta % 2 == 1 && spec.n % 2 == 1 {
                return infeasible("regular-general with odd delta needs even n");
            }
        }
        _ if spec.delta > spec.n => return infeasible("bipartite families need delta <= n"),
        _ => {}
    }
    if spec.mode == Mode::Batch {
        if k == 0 || k > spec.delta {
            return infeasible("batch size must be in 1..=delta");
        }
        if spec.family != Family::RandomBipartite && !spec.delta.is_multiple_of(k) {
            return infeasible("regular families need the batch size to divide delta");
        }
    }
    Ok(())
}

/// Builds the stream described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<(StreamHeader, Vec<StreamEvent>), GenError> {
    let k = if spec.mode == Mode::Batch {
        spec.batch_size.unwrap_or_else(|| default_batch_size(spec.delta))
    } else {
        0
    };
    validate(spec, k)?;
    let mut rng = rng_from(spec.seed, STREAM_GEN);
    let (n, d) = (spec.n, spec.delta);
    let bip = spec.family.is_bipartite();
    let header = StreamHeader {
        n_online: n,
        n_offline: if bip { n } else { 0 },
        delta: d,
        mode: spec.mode,
        batch_size: k,
        seed: spec.seed,
    };
    let n_total = header.n_total();

    let events = match spec.family {
        Family::AdversarialFrontload => {
            let mut edges = regular_bipartite(n, d, &mut rng);
            edges.sort_unstable_by_key(|&(u, v)| (v, u));
            match spec.mode {
                Mode::Edge => edges.iter().map(|&(u, v)| StreamEvent::Edge(u, v)).collect(),
                Mode::VertexOneSided => {
                    let adj = adjacency(n_total, &edges);
                    let mut seen = vec![false; n as usize];
                    let mut events = Vec::with_capacity(n as usize);
                    for &(u, _) in &edges {
                        if !std::mem::replace(&mut seen[u as usize], true) {
                            events.push(StreamEvent::Vertex(u, adj[u as usize].clone()));
                        }
                    }
                    events
                }
                Mode::VertexTwoSided => {
                    let order: Vec<VertexId> = (0..n_total).collect();
                    two_sided_events(n_total, &edges, &order)
                }
                Mode::Batch => {
                    let adj = adjacency(n_total, &edges);
                    let mut batches: Vec<(VertexId, Vec<VertexId>)> = adj
                        .iter()
                        .enumerate()
                        .flat_map(|(u, nb)| nb.chunks(k as usize).map(move |c| (u as VertexId, c.to_vec())))
                        .collect();
                    batches.sort_by_key(|(u, c)| (c.iter().copied().min(), *u));
                    batches.into_iter().map(|(u, c)| StreamEvent::Batch(u, c)).collect()
                }
            }
        }
        family => {
            let edges = match family {
                Family::RegularBipartite => regular_bipartite(n, d, &mut rng),
                Family::RandomBipartite => {
                    let multiple = if spec.mode == Mode::Batch { k } else { 1 };
                    let adj = random_bipartite(n, d, multiple, &mut rng);
                    adj.iter()
                        .enumerate()
                        .flat_map(|(u, nb)| nb.iter().map(move |&v| (u as VertexId, v)))
                        .collect()
                }
                _ => regular_general(n, d, &mut rng),
            };
            match spec.mode {
                Mode::Edge => {
                    let mut edges = edges;
                    edges.shuffle(&mut rng);
                    edges.into_iter().map(|(u, v)| StreamEvent::Edge(u, v)).collect()
                }
                Mode::VertexOneSided => {
                    let mut adj = adjacency(n_total, &edges);
                    permutation(n, &mut rng)
                        .into_iter()
                        .map(|u| StreamEvent::Vertex(u, std::mem::take(&mut adj[u as usize])))
                        .collect()
                }
                Mode::VertexTwoSided => {
                    let order = permutation(n_total, &mut rng);
                    two_sided_events(n_total, &edges, &order)
                }
                Mode::Batch => {
                    let adj = adjacency(n_total, &edges);
                    batch_events(&adj[..n as usize], k, &mut rng)
                }
            }
        }
    };
    Ok((header, events))
}

/// The stream of `spec` in file format.
pub fn generate_text(spec: &GenSpec) -> Result<String, GenError> {
    let (header, events) = generate(spec)?;
    Ok(stream_to_string(&header, &events))
}
