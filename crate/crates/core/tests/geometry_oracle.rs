mod support;

use proptest::prelude::*;
use support::oracles::raster_iou;
use vcount_core::geometry::iou;
use vcount_core::BoundingBox;

fn int_box() -> impl Strategy<Value = [i64; 4]> {
    (0i64..40, 0i64..40, 1i64..25, 1i64..25).prop_map(|(x, y, w, h)| [x, y, x + w, y + h])
}

fn to_box(b: [i64; 4]) -> BoundingBox {
    BoundingBox::new(b[0] as f64, b[1] as f64, b[2] as f64, b[3] as f64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn iou_matches_rasterization(a in int_box(), b in int_box()) {
        let expected = raster_iou(a, b);
        prop_assert!((iou(&to_box(a), &to_box(b)) - expected).abs() <= 1e-9);
    }
}
