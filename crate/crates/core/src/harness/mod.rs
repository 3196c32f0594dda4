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

//! Harness side of the toolkit: the word-count meter, stream generators, the
//! output verifier and experiment runners.

pub mod experiment;
pub mod generate;
pub mod meter;
pub mod verify;

pub use experiment::{run_experiment_suite, run_kout_experiment, KoutReport, SuiteConfig, SuiteRow};
pub use generate::{generate, Family, GenError, GenSpec};
pub use meter::SpaceMeter;
pub use verify::{verify, VerifyReport};
