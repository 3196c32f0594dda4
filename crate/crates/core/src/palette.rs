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

//! Shifted color proposals and flat color namespaces.
//!
//! Every offline vertex keeps three distinct random shifts in `[0, P)` and a
//! degree counter, where `P = ceil(2.72 * delta)`. Its `d`-th edge may use one
//! of three proposed colors, one per band:
//!
//! ```text
//! band j (0-based):  ((shift[j] + d) mod P) + j * P
//! ```
//!
//! Two edges of one offline vertex have different `d` values that differ by
//! less than `P`, so they never receive the same proposal inside a band.

use std::cell::Cell;
use std::rc::Rc;

use rand::Rng;
use thiserror::Error;

use crate::Color;

/// Numerator and denominator of the period factor 2.72.
pub const PERIOD_NUM: u64 = 272;
pub const PERIOD_DEN: u64 = 100;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PaletteError {
    #[error("period {0} is too small to draw three distinct shifts")]
    PeriodTooSmall(u32),
    #[error("delta must be at least 1")]
    ZeroDelta,
    #[error("component {index} = {value} is outside width {width}")]
    ComponentOutOfRange { index: usize, value: u64, width: u32 },
    #[error("expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("flat id {id} is outside the palette of {total} colors")]
    IdOutOfRange { id: u64, total: u64 },
    #[error("palette of {0} colors does not fit in 32-bit color ids")]
    TooLarge(u64),
}

/// `ceil(2.72 * delta)` in integer arithmetic.
pub fn period_for(delta: u32) -> u32 {
    (PERIOD_NUM * delta as u64).div_ceil(PERIOD_DEN) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PaletteParams {
    delta: u32,
    period: u32,
}

impl PaletteParams {
    pub fn new(delta: u32) -> Result<Self, PaletteError> {
        if delta == 0 {
            return Err(PaletteError::ZeroDelta);
        }
        Ok(PaletteParams {
            delta,
            period: period_for(delta),
        })
    }

    /// Parameters with an explicit period, for experiments and tests.
    pub fn with_period(delta: u32, period: u32) -> Result<Self, PaletteError> {
        if delta == 0 {
            return Err(PaletteError::ZeroDelta);
        }
        Ok(PaletteParams { delta, period })
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// Number of colors proposals can take: three bands of `P`.
    pub fn streaming_width(&self) -> u32 {
        3 * self.period
    }
}

/// Per offline vertex: three distinct shifts and the edges seen so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OfflineState {
    pub shifts: [u32; 3],
    pub deg: u32,
}

impl OfflineState {
    /// Base colors (band offset removed) for the next edge.
    pub fn base_colors(&self, period: u32) -> [u32; 3] {
        let d = self.deg % period;
        self.shifts.map(|r| (r + d) % period)
    }
}

/// Draws three distinct shifts uniformly, in draw order, with `deg = 0`.
pub fn draw_offline_state<R: Rng + ?Sized>(rng: &mut R, params: &PaletteParams) -> Result<OfflineState, PaletteError> {
    let p = params.period;
    if p < 3 {
        return Err(PaletteError::PeriodTooSmall(p));
    }
    let a = rng.random_range(0..p);
    let b = loop {
        let x = rng.random_range(0..p);
        if x != a {
            break x;
        }
    };
    let c = loop {
        let x = rng.random_range(0..p);
        if x != a && x != b {
            break x;
        }
    };
    Ok(OfflineState {
        shifts: [a, b, c],
        deg: 0,
    })
}

/// The three band-offset proposals for the next edge. Does not touch `deg`.
pub fn propose_colors(state: &OfflineState, params: &PaletteParams) -> [u32; 3] {
    let p = params.period;
    let base = state.base_colors(p);
    [base[0], base[1] + p, base[2] + 2 * p]
}

/// Mixed-radix encoding of tuple colors into `[0, total)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatPalette {
    layout: Vec<(String, u32)>,
    total: u64,
}

impl FlatPalette {
    pub fn new<S: Into<String>>(layout: impl IntoIterator<Item = (S, u32)>) -> Result<Self, PaletteError> {
        let layout: Vec<(String, u32)> = layout.into_iter().map(|(l, w)| (l.into(), w)).collect();
        let total = layout.iter().map(|(_, w)| *w as u64).product::<u64>();
        if total > u32::MAX as u64 + 1 {
            return Err(PaletteError::TooLarge(total));
        }
        Ok(FlatPalette { layout, total })
    }

    pub fn layout(&self) -> &[(String, u32)] {
        &self.layout
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn flatten(&self, tuple: &[u32]) -> Result<Color, PaletteError> {
        if tuple.len() != self.layout.len() {
            return Err(PaletteError::ArityMismatch {
                expected: self.layout.len(),
                got: tuple.len(),
            });
        }
        let mut id = 0u64;
        for (index, (&value, (_, width))) in tuple.iter().zip(&self.layout).enumerate() {
            if value >= *width {
                return Err(PaletteError::ComponentOutOfRange {
                    index,
                    value: value as u64,
                    width: *width,
                });
            }
            id = id * *width as u64 + value as u64;
        }
        Ok(id as Color)
    }

    pub fn unflatten(&self, id: Color) -> Result<Vec<u32>, PaletteError> {
        let mut rest = id as u64;
        if rest >= self.total {
            return Err(PaletteError::IdOutOfRange {
                id: rest,
                total: self.total,
            });
        }
        let mut out = vec![0; self.layout.len()];
        for (slot, (_, width)) in out.iter_mut().zip(&self.layout).rev() {
            *slot = (rest % *width as u64) as u32;
            rest /= *width as u64;
        }
        Ok(out)
    }
}

/// Shared bump allocator for disjoint color blocks.
///
/// Blocks are handed out in request order, so a block requested later always
/// sits above every earlier one.
#[derive(Clone, Debug, Default)]
pub struct ColorAllocator {
    next: Rc<Cell<u64>>,
}

impl ColorAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves `width` colors and returns the first one.
    pub fn alloc(&self, width: u32) -> Color {
        let base = self.next.get();
        let end = base + width as u64;
        assert!(end <= u32::MAX as u64 + 1, "color space exhausted");
        self.next.set(end);
        base as Color
    }

    /// Total colors reserved so far.
    pub fn allocated(&self) -> u64 {
        self.next.get()
    }
}
