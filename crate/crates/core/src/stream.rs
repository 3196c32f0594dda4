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

//! Text formats for graph streams and color output.
//!
//! A stream file starts with one header line
//!
//! ```text
//! H <n_online> <n_offline> <delta> <mode> <batch_size> <seed>
//! ```
//!
//! followed by events, one per line: `e u v` (edge), `V u v1 .. vd` (vertex
//! with all its listed neighbours) or `B u v1 .. vk` (batch of exactly `k`
//! edges of `u`). Blank lines and lines starting with `#` are ignored.
//!
//! Output files hold `c u v color` lines followed by `T <colors_used> <peak_words>`.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, LineWriter, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::{Color, VertexId};

/// Arrival model of a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Edge,
    VertexOneSided,
    VertexTwoSided,
    Batch,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Edge => "edge",
            Mode::VertexOneSided => "vertex-one-sided",
            Mode::VertexTwoSided => "vertex-two-sided",
            Mode::Batch => "batch",
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self, Mode::VertexOneSided | Mode::VertexTwoSided)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(Mode::Edge),
            "vertex-one-sided" => Ok(Mode::VertexOneSided),
            "vertex-two-sided" => Ok(Mode::VertexTwoSided),
            "batch" => Ok(Mode::Batch),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Declared stream parameters.
///
/// Online ids are `0..n_online` and offline ids are
/// `n_online..n_online + n_offline`. General graphs use `n_offline = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub n_online: u32,
    pub n_offline: u32,
    pub delta: u32,
    pub mode: Mode,
    pub batch_size: u32,
    pub seed: u64,
}

impl StreamHeader {
    pub fn n_total(&self) -> u32 {
        self.n_online + self.n_offline
    }

    /// True if the header declares a bipartition.
    pub fn is_bipartite(&self) -> bool {
        self.n_offline > 0
    }

    pub fn is_online(&self, v: VertexId) -> bool {
        v < self.n_online
    }

    pub fn validate(&self) -> Result<(), StreamErrorKind> {
        let bad = |msg: &str| Err(StreamErrorKind::InvalidHeader(msg.to_string()));
        if self.delta == 0 {
            return bad("delta must be at least 1");
        }
        if self.n_online.checked_add(self.n_offline).is_none() {
            return bad("vertex count overflows");
        }
        match self.mode {
            Mode::Batch => {
                if self.batch_size == 0 {
                    return bad("batch mode needs batch_size >= 1");
                }
                if self.batch_size > self.delta {
                    return bad("batch_size must not exceed delta");
                }
            }
            _ => {
                if self.batch_size != 0 {
                    return bad("batch_size must be 0 outside batch mode");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for StreamHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H {} {} {} {} {} {}",
            self.n_online, self.n_offline, self.delta, self.mode, self.batch_size, self.seed
        )
    }
}

/// One arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamEvent {
    Edge(VertexId, VertexId),
    Vertex(VertexId, Vec<VertexId>),
    Batch(VertexId, Vec<VertexId>),
}

impl StreamEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            StreamEvent::Edge(..) => "edge",
            StreamEvent::Vertex(..) => "vertex",
            StreamEvent::Batch(..) => "batch",
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            StreamEvent::Edge(..) => 1,
            StreamEvent::Vertex(_, n) | StreamEvent::Batch(_, n) => n.len(),
        }
    }

    /// Calls `f` once per edge of the event, as `(arriving, neighbour)`.
    pub fn for_each_edge(&self, mut f: impl FnMut(VertexId, VertexId)) {
        match self {
            StreamEvent::Edge(u, v) => f(*u, *v),
            StreamEvent::Vertex(u, n) | StreamEvent::Batch(u, n) => {
                for &v in n {
                    f(*u, v)
                }
            }
        }
    }
}

impl fmt::Display for StreamEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, u, nbrs) = match self {
            StreamEvent::Edge(u, v) => return write!(f, "e {u} {v}"),
            StreamEvent::Vertex(u, n) => ('V', u, n),
            StreamEvent::Batch(u, n) => ('B', u, n),
        };
        write!(f, "{tag} {u}")?;
        for v in nbrs {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// One colored edge in the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ColorAssignment {
    pub u: VertexId,
    pub v: VertexId,
    pub color: Color,
}

impl ColorAssignment {
    pub fn new(u: VertexId, v: VertexId, color: Color) -> Self {
        ColorAssignment { u, v, color }
    }
}

impl fmt::Display for ColorAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c {} {} {}", self.u, self.v, self.color)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StreamErrorKind {
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("missing header line")]
    MissingHeader,
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("{event} event is not allowed in {mode} mode")]
    ModeMismatch { mode: Mode, event: &'static str },
    #[error("vertex {vertex} exceeds declared degree {delta}")]
    DegreeExceeded { vertex: VertexId, delta: u32 },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: VertexId, n: u32 },
    #[error("batch of {got} edges, expected {expected}")]
    BatchSizeMismatch { expected: u32, got: usize },
    #[error("vertex {0} arrives twice")]
    DuplicateArrival(VertexId),
    #[error("vertex {vertex} lists {neighbor}, which has not arrived in the allowed order")]
    ArrivalOrder { vertex: VertexId, neighbor: VertexId },
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {kind}")]
    Invalid { line: usize, kind: StreamErrorKind },
}

impl StreamError {
    pub fn kind(&self) -> Option<&StreamErrorKind> {
        match self {
            StreamError::Io(_) => None,
            StreamError::Invalid { kind, .. } => Some(kind),
        }
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: &str) -> Result<T, StreamErrorKind> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| StreamErrorKind::MalformedLine(line.to_string()))
}

/// Parses a header line.
pub fn parse_header(line: &str) -> Result<StreamHeader, StreamErrorKind> {
    let mut toks = line.split_whitespace();
    if toks.next() != Some("H") {
        return Err(StreamErrorKind::MissingHeader);
    }
    let n_online = parse_num(toks.next(), line)?;
    let n_offline = parse_num(toks.next(), line)?;
    let delta = parse_num(toks.next(), line)?;
    let mode = toks
        .next()
        .ok_or_else(|| StreamErrorKind::MalformedLine(line.to_string()))?
        .parse::<Mode>()
        .map_err(StreamErrorKind::InvalidHeader)?;
    let batch_size = parse_num(toks.next(), line)?;
    let seed = parse_num(toks.next(), line)?;
    if toks.next().is_some() {
        return Err(StreamErrorKind::MalformedLine(line.to_string()));
    }
    let header = StreamHeader {
        n_online,
        n_offline,
        delta,
        mode,
        batch_size,
        seed,
    };
    header.validate()?;
    Ok(header)
}

/// Parses one event line without any stream-level checks.
pub fn parse_event(line: &str) -> Result<StreamEvent, StreamErrorKind> {
    let malformed = || StreamErrorKind::MalformedLine(line.to_string());
    let mut toks = line.split_whitespace();
    let tag = toks.next().ok_or_else(malformed)?;
    let u: VertexId = parse_num(toks.next(), line)?;
    let rest = toks
        .map(|t| t.parse::<VertexId>().map_err(|_| malformed()))
        .collect::<Result<Vec<_>, _>>()?;
    match tag {
        "e" => match rest.as_slice() {
            [v] => Ok(StreamEvent::Edge(u, *v)),
            _ => Err(malformed()),
        },
        "V" => Ok(StreamEvent::Vertex(u, rest)),
        "B" => Ok(StreamEvent::Batch(u, rest)),
        _ => Err(malformed()),
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

/// Single-pass validating reader.
///
/// The header is read by [`StreamReader::new`]; events are then yielded lazily
/// through the `Iterator` impl. Every structural rule (mode, ranges, loops,
/// duplicates, degree bound) is checked at the event that breaks it.
pub struct StreamReader<R> {
    input: R,
    header: StreamHeader,
    line_no: usize,
    buf: String,
    degree: Vec<u32>,
    arrived: Vec<bool>,
    edges: HashSet<(VertexId, VertexId)>,
    failed: bool,
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(mut input: R) -> Result<Self, StreamError> {
        let mut buf = String::new();
        let mut line_no = 0;
        let header = loop {
            buf.clear();
            if input.read_line(&mut buf)? == 0 {
                return Err(StreamError::Invalid {
                    line: line_no,
                    kind: StreamErrorKind::MissingHeader,
                });
            }
            line_no += 1;
            if is_skippable(&buf) {
                continue;
            }
            break parse_header(&buf).map_err(|kind| StreamError::Invalid { line: line_no, kind })?;
        };
        let n = header.n_total() as usize;
        let arrived = if header.mode.is_vertex() {
            vec![false; n]
        } else {
            Vec::new()
        };
        Ok(StreamReader {
            input,
            degree: vec![0; n],
            arrived,
            header,
            line_no,
            buf,
            edges: HashSet::new(),
            failed: false,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn line(&self) -> usize {
        self.line_no
    }

    fn check(&mut self, ev: &StreamEvent) -> Result<(), StreamErrorKind> {
        let h = &self.header;
        let legal = matches!(
            (h.mode, ev),
            (Mode::Edge, StreamEvent::Edge(..))
                | (Mode::VertexOneSided | Mode::VertexTwoSided, StreamEvent::Vertex(..))
                | (Mode::Batch, StreamEvent::Batch(..))
        );
        if !legal {
            return Err(StreamErrorKind::ModeMismatch {
                mode: h.mode,
                event: ev.kind(),
            });
        }
        let n = h.n_total();
        let in_range = |v: VertexId| {
            if v < n {
                Ok(())
            } else {
                Err(StreamErrorKind::VertexOutOfRange { vertex: v, n })
            }
        };
        let (u, nbrs): (VertexId, &[VertexId]) = match ev {
            StreamEvent::Edge(u, v) => (*u, std::slice::from_ref(v)),
            StreamEvent::Vertex(u, nb) | StreamEvent::Batch(u, nb) => (*u, nb.as_slice()),
        };
        in_range(u)?;
        for &v in nbrs {
            in_range(v)?;
            if v == u {
                return Err(StreamErrorKind::SelfLoop(u));
            }
        }
        if let StreamEvent::Batch(_, nb) = ev {
            if nb.len() != h.batch_size as usize {
                return Err(StreamErrorKind::BatchSizeMismatch {
                    expected: h.batch_size,
                    got: nb.len(),
                });
            }
        }
        let delta = h.delta;
        match h.mode {
            Mode::Edge | Mode::Batch => {
                let mut fresh = Vec::with_capacity(nbrs.len());
                for &v in nbrs {
                    let key = (u.min(v), u.max(v));
                    if self.edges.contains(&key) || fresh.contains(&key) {
                        return Err(StreamErrorKind::DuplicateEdge(u, v));
                    }
                    fresh.push(key);
                }
                self.bump_degrees(u, nbrs, delta)?;
                self.edges.extend(fresh);
            }
            Mode::VertexOneSided | Mode::VertexTwoSided => {
                if self.arrived[u as usize] {
                    return Err(StreamErrorKind::DuplicateArrival(u));
                }
                let two_sided = h.mode == Mode::VertexTwoSided;
                if !two_sided && self.degree[u as usize] > 0 {
                    // already named as someone's neighbour: cannot also be online
                    return Err(StreamErrorKind::ArrivalOrder { vertex: u, neighbor: u });
                }
                let mut sorted = nbrs.to_vec();
                sorted.sort_unstable();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(StreamErrorKind::DuplicateEdge(u, w[0]));
                }
                for &v in nbrs {
                    if self.arrived[v as usize] != two_sided {
                        return Err(StreamErrorKind::ArrivalOrder { vertex: u, neighbor: v });
                    }
                }
                self.bump_degrees(u, nbrs, delta)?;
                self.arrived[u as usize] = true;
            }
        }
        Ok(())
    }

    fn bump_degrees(&mut self, u: VertexId, nbrs: &[VertexId], delta: u32) -> Result<(), StreamErrorKind> {
        let du = self.degree[u as usize] as usize + nbrs.len();
        if du > delta as usize {
            return Err(StreamErrorKind::DegreeExceeded { vertex: u, delta });
        }
        if let Some(&v) = nbrs.iter().find(|&&v| self.degree[v as usize] >= delta) {
            return Err(StreamErrorKind::DegreeExceeded { vertex: v, delta });
        }
        self.degree[u as usize] = du as u32;
        for &v in nbrs {
            self.degree[v as usize] += 1;
        }
        Ok(())
    }

    fn next_event(&mut self) -> Option<Result<StreamEvent, StreamError>> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            if is_skippable(&self.buf) {
                continue;
            }
            let line = self.line_no;
            let res = parse_event(&self.buf).and_then(|ev| self.check(&ev).map(|_| ev));
            return Some(res.map_err(|kind| StreamError::Invalid { line, kind }));
        }
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<StreamEvent, StreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = self.next_event();
        if matches!(item, Some(Err(_))) {
            self.failed = true;
        }
        item
    }
}

/// Reads a whole stream into memory.
pub fn read_stream<R: BufRead>(input: R) -> Result<(StreamHeader, Vec<StreamEvent>), StreamError> {
    let reader = StreamReader::new(input)?;
    let header = reader.header().clone();
    let events = reader.collect::<Result<Vec<_>, _>>()?;
    Ok((header, events))
}

pub fn write_stream<W: Write>(mut out: W, header: &StreamHeader, events: &[StreamEvent]) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for ev in events {
        writeln!(out, "{ev}")?;
    }
    out.flush()
}

pub fn stream_to_string(header: &StreamHeader, events: &[StreamEvent]) -> String {
    let mut buf = Vec::new();
    write_stream(&mut buf, header, events).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("stream text is ASCII")
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("output sink is closed")]
    Closed,
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Line-buffered writer for `c u v color` lines and the trailer.
pub struct AssignmentWriter<W: Write> {
    inner: Option<LineWriter<W>>,
}

impl<W: Write> AssignmentWriter<W> {
    pub fn new(sink: W) -> Self {
        AssignmentWriter {
            inner: Some(LineWriter::new(sink)),
        }
    }

    fn sink(&mut self) -> Result<&mut LineWriter<W>, EmitError> {
        self.inner.as_mut().ok_or(EmitError::Closed)
    }

    pub fn emit(&mut self, a: &ColorAssignment) -> Result<(), EmitError> {
        writeln!(self.sink()?, "{a}")?;
        Ok(())
    }

    pub fn emit_all(&mut self, items: &[ColorAssignment]) -> Result<(), EmitError> {
        items.iter().try_for_each(|a| self.emit(a))
    }

    pub fn trailer(&mut self, colors_used: u64, peak_words: u64) -> Result<(), EmitError> {
        writeln!(self.sink()?, "T {colors_used} {peak_words}")?;
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.inner.is_none()
    }

    /// Flushes and closes the sink. Later emits fail with [`EmitError::Closed`].
    pub fn close(&mut self) -> Result<Option<W>, EmitError> {
        match self.inner.take() {
            None => Ok(None),
            Some(lw) => lw.into_inner().map(Some).map_err(|e| EmitError::Io(e.into_error())),
        }
    }
}

/// Trailer values from an output file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trailer {
    pub colors_used: u64,
    pub peak_words: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedOutput {
    pub assignments: Vec<ColorAssignment>,
    pub trailer: Option<Trailer>,
}

#[derive(Debug, Error)]
pub enum OutputParseError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed output line `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: content after trailer")]
    AfterTrailer { line: usize },
}

pub fn parse_output<R: BufRead>(input: R) -> Result<ParsedOutput, OutputParseError> {
    let mut out = ParsedOutput::default();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if is_skippable(&line) {
            continue;
        }
        if out.trailer.is_some() {
            return Err(OutputParseError::AfterTrailer { line: line_no });
        }
        let bad = || OutputParseError::Malformed {
            line: line_no,
            text: line.clone(),
        };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["c", u, v, c] => {
                let (u, v, c) = (
                    u.parse().map_err(|_| bad())?,
                    v.parse().map_err(|_| bad())?,
                    c.parse().map_err(|_| bad())?,
                );
                out.assignments.push(ColorAssignment::new(u, v, c));
            }
            ["T", a, b] => {
                out.trailer = Some(Trailer {
                    colors_used: a.parse().map_err(|_| bad())?,
                    peak_words: b.parse().map_err(|_| bad())?,
                });
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}
