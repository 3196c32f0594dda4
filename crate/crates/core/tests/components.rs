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

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use streamcolor::dispatch::{DispatchConfig, EdgeColorer, GroupConfig, GroupDispatcher, OfflineStore, SqrtDispatcher};
use streamcolor::harness::verify::verify_assignments;
use streamcolor::one_sided::{ArrivalMode, InstanceConfig, OneSidedInstance};
use streamcolor::palette::{ColorAllocator, OfflineState};
use streamcolor::reductions::{route_bipartization, EdgeBipartization, LevelBits, Route};
use streamcolor::{BoundPolicy, ColorAssignment, SpaceMeter};

fn instance(delta: u32, id_space: u32) -> (OneSidedInstance, ColorAllocator, SpaceMeter) {
    let alloc = ColorAllocator::new();
    let meter = SpaceMeter::new();
    let cfg = InstanceConfig {
        delta,
        mode: ArrivalMode::Vertex,
        policy: BoundPolicy::Tolerant,
        id_space,
    };
    let inst = OneSidedInstance::new(cfg, alloc.clone(), meter.clone(), ChaCha8Rng::seed_from_u64(3)).unwrap();
    (inst, alloc, meter)
}

fn distinct(out: &[ColorAssignment]) -> usize {
    let mut c: Vec<u32> = out.iter().map(|a| a.color).collect();
    c.sort_unstable();
    c.dedup();
    c.len()
}

#[test]
fn three_slots_on_three_residues_match() {
    let (mut inst, _, _) = instance(10, 8);
    for v in 4..7 {
        inst.set_offline_state(
            v,
            OfflineState {
                shifts: [3, 7, 9],
                deg: 0,
            },
        );
    }
    let mut out = Vec::new();
    inst.on_online_vertex(0, &[4, 5, 6], &mut out).unwrap();
    assert_eq!(out.len(), 3);
    let mut residues: Vec<u32> = out.iter().map(|a| (a.color - inst.palette_base()) % 28).collect();
    residues.sort_unstable();
    assert_eq!(residues, vec![3, 7, 9]);
    assert_eq!(inst.spill_report().spilled_vertices, 0);
}

#[test]
fn four_slots_on_three_residues_spill() {
    let (mut inst, alloc, meter) = instance(10, 8);
    for v in 4..8 {
        inst.set_offline_state(
            v,
            OfflineState {
                shifts: [3, 7, 9],
                deg: 0,
            },
        );
    }
    let mut out = Vec::new();
    inst.on_online_vertex(0, &[4, 5, 6, 7], &mut out).unwrap();
    assert!(out.is_empty());
    let report = inst.spill_report();
    assert_eq!((report.spilled_vertices, report.spilled_edges), (1, 4));
    for v in 4..8 {
        assert_eq!(inst.offline_state(v).unwrap().deg, 1);
    }
    assert_eq!(meter.module_words("alg.spill"), 8);
    let before = alloc.allocated();
    inst.finalize(&mut out).unwrap();
    assert_eq!(out.len(), 4);
    assert_eq!(alloc.allocated() - before, 4);
    assert!(out.iter().all(|a| a.color as u64 >= before));
    assert!(inst.spill().is_empty());
    assert!(meter.is_consistent());
}

#[test]
fn star_leftover_uses_its_degree() {
    // k = 4; three edges of one online vertex never form a batch
    let alloc = ColorAllocator::new();
    let meter = SpaceMeter::new();
    let cfg = DispatchConfig {
        delta: 16,
        id_space: 10,
        policy: BoundPolicy::Tolerant,
    };
    let mut d = SqrtDispatcher::new(cfg, alloc, meter.clone(), 5).unwrap();
    let mut out = Vec::new();
    for v in 1..4 {
        d.feed_edge(0, v, &mut out).unwrap();
    }
    assert!(out.is_empty());
    assert_eq!(d.buffer().len(), 3);
    d.finish(&mut out).unwrap();
    assert_eq!(out.len(), 3);
    assert_eq!(distinct(&out), 3);
    assert_eq!(d.leftover_edges(), 3);
    assert_eq!(meter.module_words("dispatch.buffer"), 0);
}

#[test]
fn full_buffer_without_batches_is_flushed() {
    // k = 4, s = 1, six vertices: the cap of 6 is reached with degree 2
    let alloc = ColorAllocator::new();
    let meter = SpaceMeter::new();
    let cfg = GroupConfig {
        delta: 16,
        id_space: 6,
        policy: BoundPolicy::Tolerant,
        s: 1,
        max_edges: 6,
    };
    let mut d = GroupDispatcher::new(cfg, alloc, meter, 9).unwrap();
    let edges = [(0, 3), (0, 4), (1, 4), (1, 5), (2, 5), (2, 3)];
    let mut out = Vec::new();
    for (u, v) in edges {
        d.feed_edge(u, v, &mut out).unwrap();
    }
    assert_eq!(d.stats().flushes, 1);
    assert_eq!(out.len(), 6);
    assert!(distinct(&out) <= 4);
    let report = verify_assignments(edges, &out, None);
    assert!(report.ok(), "{report}");
}

#[test]
fn flush_budget_is_enforced() {
    let alloc = ColorAllocator::new();
    // cap 40 and one allowed edge: the budget is two flushes
    let cfg = GroupConfig {
        delta: 16,
        id_space: 40,
        policy: BoundPolicy::Tolerant,
        s: 1,
        max_edges: 1,
    };
    let mut d = GroupDispatcher::new(cfg, alloc, SpaceMeter::new(), 1).unwrap();
    let mut out = Vec::new();
    let mut result = Ok(());
    for r in 0..3 {
        for u in 0..20 {
            for j in 0..2 {
                result = result.and_then(|_| d.feed_edge(u, 20 + (u + 2 * r + j) % 20, &mut out));
            }
        }
    }
    assert!(matches!(result, Err(streamcolor::AlgError::FlushBudgetExceeded { .. })));
}

#[test]
fn base_triangle_gets_three_colors() {
    let alloc = ColorAllocator::new();
    let meter = SpaceMeter::new();
    let mut b = EdgeBipartization::new(Vec::new(), 3, alloc, meter, 1);
    let mut out = Vec::new();
    for (u, v) in [(0, 1), (1, 2), (2, 0)] {
        b.feed_edge(u, v, &mut out).unwrap();
    }
    assert_eq!(b.base_edges(), 3);
    b.finish(&mut out).unwrap();
    assert_eq!(distinct(&out), 3);
}

#[test]
fn half_of_all_edges_split_at_level_zero() {
    let n = 100_000u32;
    let mut bits = LevelBits::new(2 * n, ChaCha8Rng::seed_from_u64(17), SpaceMeter::new());
    let mut level0 = 0u32;
    for i in 0..n {
        let (a, b) = (bits.get(2 * i), bits.get(2 * i + 1));
        if route_bipartization(a, b, 8) == Route::Level(0) {
            level0 += 1;
        }
    }
    let f = level0 as f64 / n as f64;
    let sigma = (0.25 / n as f64).sqrt();
    assert!((f - 0.5).abs() <= 3.0 * sigma, "fraction {f}");
}

#[test]
fn offline_store_colors_bipartite_with_degree_colors() {
    let alloc = ColorAllocator::new();
    let mut s = OfflineStore::new(true, alloc, SpaceMeter::new());
    let mut out = Vec::new();
    for (u, v) in [(0, 5), (0, 6), (1, 5), (1, 6), (2, 5)] {
        s.feed_edge(u, v, &mut out).unwrap();
    }
    s.finish(&mut out).unwrap();
    assert_eq!(distinct(&out), 3);
}
