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

//! Output checker.
//!
//! Checks that every stream edge is colored exactly once, that no two edges
//! sharing an endpoint share a color, and optionally that all colors fit in a
//! declared budget. Memory use is unbounded; this is an oracle, not part of
//! any algorithm.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::stream::{parse_output, read_stream, ColorAssignment, OutputParseError, StreamError, StreamEvent, Trailer};
use crate::{Color, VertexId};

type Edge = (VertexId, VertexId);

fn key(u: VertexId, v: VertexId) -> Edge {
    (u.min(v), u.max(v))
}

/// Two edges at `vertex` with the same color.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub vertex: VertexId,
    pub color: Color,
    pub first: Edge,
    pub second: Edge,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// No two edges sharing an endpoint share a color.
    pub proper: bool,
    /// Every stream edge is colored exactly once and nothing else is.
    pub complete: bool,
    pub edges: usize,
    pub colors_used: usize,
    pub max_color: Option<Color>,
    pub missing: Vec<Edge>,
    pub duplicates: Vec<Edge>,
    /// Colored pairs that are not stream edges.
    pub unknown: Vec<Edge>,
    pub conflicts: Vec<Conflict>,
    pub budget: Option<u64>,
    pub within_budget: bool,
    pub trailer: Option<Trailer>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.proper && self.complete && self.within_budget
    }

    /// Whether the trailer, if any, reports the observed number of colors.
    pub fn trailer_consistent(&self) -> bool {
        self.trailer.is_none_or(|t| t.colors_used == self.colors_used as u64)
    }
}

const SHOWN: usize = 20;

fn list_edges(f: &mut fmt::Formatter<'_>, label: &str, edges: &[Edge]) -> fmt::Result {
    if edges.is_empty() {
        return Ok(());
    }
    write!(f, "{label} ({}):", edges.len())?;
    for (u, v) in edges.iter().take(SHOWN) {
        write!(f, " ({u},{v})")?;
    }
    if edges.len() > SHOWN {
        write!(f, " ...")?;
    }
    writeln!(f)
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "proper: {}", self.proper)?;
        writeln!(f, "complete: {}", self.complete)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "colors_used: {}", self.colors_used)?;
        match self.max_color {
            Some(c) => writeln!(f, "max_color: {c}")?,
            None => writeln!(f, "max_color: none")?,
        }
        if let Some(b) = self.budget {
            writeln!(
                f,
                "budget: {b} ({})",
                if self.within_budget { "ok" } else { "exceeded" }
            )?;
        }
        if let Some(t) = self.trailer {
            writeln!(f, "trailer: colors_used={} peak_words={}", t.colors_used, t.peak_words)?;
        }
        list_edges(f, "missing", &self.missing)?;
        list_edges(f, "duplicate", &self.duplicates)?;
        list_edges(f, "unknown", &self.unknown)?;
        if !self.conflicts.is_empty() {
            writeln!(f, "conflicts ({}):", self.conflicts.len())?;
            for c in self.conflicts.iter().take(SHOWN) {
                writeln!(
                    f,
                    "  vertex {} color {}: ({},{}) and ({},{})",
                    c.vertex, c.color, c.first.0, c.first.1, c.second.0, c.second.1
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("stream: {0}")]
    Stream(#[from] StreamError),
    #[error("output: {0}")]
    Output(#[from] OutputParseError),
}

/// Checks assignments against a list of edges.
pub fn verify_assignments(
    edges: impl IntoIterator<Item = Edge>,
    assignments: &[ColorAssignment],
    budget: Option<u64>,
) -> VerifyReport {
    let mut count: HashMap<Edge, u32> = HashMap::new();
    let mut order = Vec::new();
    for (u, v) in edges {
        let k = key(u, v);
        count.insert(k, 0);
        order.push(k);
    }
    let mut report = VerifyReport {
        edges: order.len(),
        budget,
        ..VerifyReport::default()
    };
    let mut at: HashMap<(VertexId, Color), Edge> = HashMap::new();
    let mut colors: Vec<Color> = Vec::with_capacity(assignments.len());
    for a in assignments {
        let k = key(a.u, a.v);
        match count.get_mut(&k) {
            Some(c) => {
                *c += 1;
                if *c == 2 {
                    report.duplicates.push(k);
                }
            }
            None => report.unknown.push(k),
        }
        for x in [a.u, a.v] {
            match at.get(&(x, a.color)) {
                Some(&prev) if prev != k => report.conflicts.push(Conflict {
                    vertex: x,
                    color: a.color,
                    first: prev,
                    second: k,
                }),
                Some(_) => {}
                None => {
                    at.insert((x, a.color), k);
                }
            }
        }
        colors.push(a.color);
    }
    report.missing = order.into_iter().filter(|k| count[k] == 0).collect();
    colors.sort_unstable();
    colors.dedup();
    report.colors_used = colors.len();
    report.max_color = colors.last().copied();
    report.proper = report.conflicts.is_empty();
    report.complete = report.missing.is_empty() && report.duplicates.is_empty() && report.unknown.is_empty();
    report.within_budget = match (budget, report.max_color) {
        (Some(b), Some(m)) => (m as u64) < b,
        _ => true,
    };
    report
}

/// Edges of a list of events.
pub fn event_edges(events: &[StreamEvent]) -> Vec<Edge> {
    let mut out = Vec::new();
    for ev in events {
        ev.for_each_edge(|u, v| out.push((u, v)));
    }
    out
}

/// Parses a stream file and an output file and checks one against the other.
pub fn verify<S: BufRead, O: BufRead>(stream: S, output: O, budget: Option<u64>) -> Result<VerifyReport, VerifyError> {
    let (_, events) = read_stream(stream)?;
    let parsed = parse_output(output)?;
    let mut report = verify_assignments(event_edges(&events), &parsed.assignments, budget);
    report.trailer = parsed.trailer;
    Ok(report)
}
