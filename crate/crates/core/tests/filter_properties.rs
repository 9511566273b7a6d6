use proptest::prelude::*;

use sandcast_core::acceptance::window_oracle;
use sandcast_core::ingest::VolumeGeometry;
use sandcast_core::volume::{filter_volume, moving_average_filter, Grid2, SandFractionVolume};

fn grids() -> impl Strategy<Value = Grid2> {
    (1usize..9, 1usize..9).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop_oneof![1 => Just(f64::NAN), 4 => -5.0..5.0f64], r * c)
            .prop_map(move |data| Grid2::new(r, c, data).unwrap())
    })
}

proptest! {
    #[test]
    fn output_stays_within_input_range(g in grids(), w in prop::sample::select(vec![1usize, 3, 5, 7])) {
        let out = moving_average_filter(&g, w).unwrap();
        let finite: Vec<f64> = g.data.iter().copied().filter(|v| !v.is_nan()).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in out.data.iter().filter(|v| !v.is_nan()) {
            prop_assert!(*v >= lo && *v <= hi);
        }
    }

    #[test]
    fn matches_window_oracle(g in grids(), w in prop::sample::select(vec![1usize, 3, 5])) {
        let out = moving_average_filter(&g, w).unwrap();
        let want = window_oracle(&g, w);
        prop_assert!(out.data.iter().zip(&want).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn identity_window_keeps_values(g in grids()) {
        let out = moving_average_filter(&g, 1).unwrap();
        for (a, b) in g.data.iter().zip(&out.data) {
            prop_assert!(a.to_bits() == b.to_bits());
        }
    }
}

#[test]
fn permuting_inlines_permutes_output() {
    let geometry = VolumeGeometry::new(vec![1, 2, 3], vec![1, 2, 3, 4], 0.0, 2.0, 5).unwrap();
    let block = 4 * 5;
    let values: Vec<f64> = (0..3 * block)
        .map(|i| if i % 7 == 0 { f64::NAN } else { ((i * 37) % 11) as f64 / 10.0 })
        .collect();
    let vol = SandFractionVolume::new(geometry.clone(), values.clone()).unwrap();
    let order = [2usize, 0, 1];
    let permuted: Vec<f64> = order
        .iter()
        .flat_map(|&b| values[b * block..(b + 1) * block].to_vec())
        .collect();
    let pvol = SandFractionVolume::new(geometry, permuted).unwrap();
    let out = filter_volume(&vol, 3).unwrap();
    let pout = filter_volume(&pvol, 3).unwrap();
    for (i, &b) in order.iter().enumerate() {
        let a = &out.values[b * block..(b + 1) * block];
        let p = &pout.values[i * block..(i + 1) * block];
        assert!(a.iter().zip(p).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
