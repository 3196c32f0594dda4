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

//! Errors raised by the coloring algorithms.

use thiserror::Error;

use crate::palette::PaletteError;
use crate::VertexId;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlgError {
    #[error("vertex {vertex} exceeds declared degree {bound}")]
    DegreeExceeded { vertex: VertexId, bound: u32 },
    #[error("batch of {got} edges, expected {expected}")]
    BatchSizeMismatch { expected: u32, got: usize },
    #[error("vertex {vertex} sends more than {max} batches")]
    TooManyBatches { vertex: VertexId, max: u32 },
    #[error("probabilistic bound violated: {0}")]
    BoundViolation(String),
    #[error("flush budget exceeded: {flushes} flushes, budget {budget}")]
    FlushBudgetExceeded { flushes: u64, budget: u64 },
    #[error("edge ({0}, {1}) does not respect the declared sides")]
    WrongSide(VertexId, VertexId),
    #[error("vertex {0} belongs to no side")]
    UnknownSide(VertexId),
    #[error("{0}")]
    ModeMismatch(String),
    #[error(transparent)]
    Palette(#[from] PaletteError),
}

impl AlgError {
    /// Reinterprets a degree error from a sub-instance: the input itself was
    /// valid, so the overflow is a failed probabilistic bound.
    pub fn nested(self) -> AlgError {
        match self {
            AlgError::DegreeExceeded { vertex, bound } => {
                AlgError::BoundViolation(format!("vertex {vertex} exceeds sub-instance degree {bound}"))
            }
            AlgError::TooManyBatches { vertex, max } => {
                AlgError::BoundViolation(format!("vertex {vertex} exceeds {max} batches in a sub-instance"))
            }
            other => other,
        }
    }

    /// True for errors caused by the input stream rather than by a failed
    /// probabilistic bound.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, AlgError::BoundViolation(_) | AlgError::FlushBudgetExceeded { .. })
    }
}
