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

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use streamcolor::palette::{draw_offline_state, period_for, propose_colors, FlatPalette, OfflineState, PaletteParams};

#[test]
fn flatten_is_a_bijection_on_the_batch_layout() {
    let flat = FlatPalette::new([("batch", 4), ("base", 84)]).unwrap();
    let mut seen = vec![false; 336];
    for batch in 0..4 {
        for base in 0..84 {
            let id = flat.flatten(&[batch, base]).unwrap();
            assert!(!seen[id as usize]);
            seen[id as usize] = true;
            assert_eq!(flat.unflatten(id).unwrap(), vec![batch, base]);
        }
    }
    assert!(seen.iter().all(|&s| s));
    assert_eq!(flat.flatten(&[2, 8]).unwrap(), 176);
    assert!(flat.unflatten(336).is_err());
    assert!(flat.flatten(&[4, 0]).is_err());
}

#[test]
fn second_batch_offset() {
    let p = period_for(16);
    assert_eq!(p, 44);
    let flat = FlatPalette::new([("batch", 4), ("base", 3 * p)]).unwrap();
    assert_eq!(flat.flatten(&[1, 8]).unwrap(), 140);
}

#[test]
fn first_shift_is_uniform() {
    let params = PaletteParams::with_period(2, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51);
    let draws = 100_000u32;
    let mut counts = [[0u32; 6]; 3];
    for _ in 0..draws {
        let s = draw_offline_state(&mut rng, &params).unwrap();
        for (j, &r) in s.shifts.iter().enumerate() {
            counts[j][r as usize] += 1;
        }
    }
    let p = 1.0 / 6.0;
    let sigma = (p * (1.0 - p) / draws as f64).sqrt();
    for band in counts {
        for c in band {
            let f = c as f64 / draws as f64;
            assert!((f - p).abs() <= 3.0 * sigma, "frequency {f}");
        }
    }
}

#[test]
fn tiny_period_is_rejected() {
    let params = PaletteParams::with_period(1, 2).unwrap();
    assert!(draw_offline_state(&mut ChaCha8Rng::seed_from_u64(0), &params).is_err());
}

fn layout() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..40, 1..4)
}

proptest! {
    #[test]
    fn flatten_round_trips(widths in layout(), pick in any::<u64>()) {
        let flat = FlatPalette::new(widths.iter().enumerate().map(|(i, &w)| (format!("c{i}"), w))).unwrap();
        let id = (pick % flat.total()) as u32;
        let tuple = flat.unflatten(id).unwrap();
        prop_assert_eq!(flat.flatten(&tuple).unwrap(), id);
        for (t, w) in tuple.iter().zip(&widths) {
            prop_assert!(t < w);
        }
    }

    #[test]
    fn proposals_are_distinct_and_banded(delta in 2u32..=64, seed in any::<u64>(), deg_pick in any::<u32>()) {
        let params = PaletteParams::new(delta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = draw_offline_state(&mut rng, &params).unwrap();
        state.deg = deg_pick % delta;
        let p = params.period();
        let c = propose_colors(&state, &params);
        for (j, &x) in c.iter().enumerate() {
            prop_assert_eq!(x / p, j as u32);
        }
        let base = state.base_colors(p);
        prop_assert!(base[0] != base[1] && base[1] != base[2] && base[0] != base[2]);
    }

    #[test]
    fn one_vertex_never_repeats_a_proposal(delta in 2u32..=64, seed in any::<u64>()) {
        let params = PaletteParams::new(delta).unwrap();
        let mut state: OfflineState = draw_offline_state(&mut ChaCha8Rng::seed_from_u64(seed), &params).unwrap();
        let mut seen = std::collections::HashSet::new();
        for d in 0..delta {
            state.deg = d;
            for x in propose_colors(&state, &params) {
                prop_assert!(seen.insert(x));
            }
        }
    }
}
