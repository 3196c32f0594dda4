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

//! Word-count ledger for algorithm state.
//!
//! A word is one stored integer: a shift, a counter, one endpoint of a
//! buffered or spilled edge, a random bit word. Algorithm modules charge words
//! when they start holding them and release them when they drop them. Harness
//! memory (parser, verifier, output sets) is never charged.
//!
//! A [`SpaceMeter`] is a cheap handle; clones share one ledger, so every
//! component of a run reports into the same totals.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

#[derive(Debug, Default)]
struct Ledger {
    current: u64,
    peak: u64,
    by_module: BTreeMap<&'static str, u64>,
}

#[derive(Clone, Debug, Default)]
pub struct SpaceMeter {
    inner: Rc<RefCell<Ledger>>,
}

impl SpaceMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&self, module: &'static str, words: u64) {
        if words == 0 {
            return;
        }
        let mut l = self.inner.borrow_mut();
        *l.by_module.entry(module).or_insert(0) += words;
        l.current += words;
        l.peak = l.peak.max(l.current);
    }

    /// Releases words previously charged to `module`.
    ///
    /// # Panics
    ///
    /// Panics if more words are released than the module holds.
    pub fn release(&self, module: &'static str, words: u64) {
        if words == 0 {
            return;
        }
        let mut l = self.inner.borrow_mut();
        let held = l.by_module.get_mut(module).map(|w| {
            assert!(*w >= words, "module {module} releases {words} words but holds {w}");
            *w -= words;
        });
        assert!(held.is_some(), "module {module} releases words it never charged");
        l.current -= words;
    }

    pub fn current_words(&self) -> u64 {
        self.inner.borrow().current
    }

    pub fn peak_words(&self) -> u64 {
        self.inner.borrow().peak
    }

    /// Words currently held by one module.
    pub fn module_words(&self, module: &str) -> u64 {
        self.inner.borrow().by_module.get(module).copied().unwrap_or(0)
    }

    pub fn breakdown(&self) -> Vec<(&'static str, u64)> {
        self.inner.borrow().by_module.iter().map(|(k, v)| (*k, *v)).collect()
    }

    /// Ledger entries sum to the current total and the peak dominates it.
    pub fn is_consistent(&self) -> bool {
        let l = self.inner.borrow();
        l.by_module.values().sum::<u64>() == l.current && l.peak >= l.current
    }
}
