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
use streamcolor::harness::generate::{generate, Family, GenSpec};
use streamcolor::stream::{parse_output, read_stream, stream_to_string, AssignmentWriter};
use streamcolor::{ColorAssignment, Mode};

fn spec() -> impl Strategy<Value = GenSpec> {
    let family = prop::sample::select(Family::ALL.to_vec());
    let mode = prop::sample::select(vec![
        Mode::Edge,
        Mode::VertexOneSided,
        Mode::VertexTwoSided,
        Mode::Batch,
    ]);
    (family, mode, 4u32..40, 1u32..8, any::<u64>()).prop_map(|(family, mode, n, delta, seed)| GenSpec {
        family,
        n,
        delta: delta.min(n - 1),
        mode,
        seed,
        batch_size: None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn streams_round_trip(spec in spec()) {
        let Ok((header, events)) = generate(&spec) else { return Ok(()) };
        let text = stream_to_string(&header, &events);
        let (h2, e2) = read_stream(text.as_bytes()).unwrap();
        prop_assert_eq!(h2, header);
        prop_assert_eq!(e2, events);
    }

    #[test]
    fn outputs_round_trip(items in prop::collection::vec((0u32..1000, 0u32..1000, 0u32..5000), 0..50), used in any::<u32>(), peak in any::<u32>()) {
        let items: Vec<ColorAssignment> = items.into_iter().map(|(u, v, c)| ColorAssignment::new(u, v, c)).collect();
        let mut w = AssignmentWriter::new(Vec::new());
        w.emit_all(&items).unwrap();
        w.trailer(used as u64, peak as u64).unwrap();
        let bytes = w.close().unwrap().unwrap();
        let parsed = parse_output(bytes.as_slice()).unwrap();
        prop_assert_eq!(parsed.assignments, items);
        let t = parsed.trailer.unwrap();
        prop_assert_eq!((t.colors_used, t.peak_words), (used as u64, peak as u64));
    }
}
