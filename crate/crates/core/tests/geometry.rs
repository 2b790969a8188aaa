use phoenixmap::geometry::index::RingIndex;
use phoenixmap::geometry::{
    close_notches, concave_hull, convex_hull, fill_dents, is_simple, offset_outline,
    round_reflex_corners, GeometryError, Outline, Point2, PointSet,
};
use proptest::prelude::*;

fn point_sets() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 4..120)
        .prop_map(|v| v.into_iter().map(|(x, y)| Point2::new(x, y)).collect())
}

fn covers(outline: &Outline, points: &[Point2]) -> bool {
    let ring = RingIndex::new(outline.vertices());
    points.iter().all(|p| ring.locate(*p).is_covered())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concave_hull_is_simple_ccw_and_contains_everything(pts in point_sets(), k in 3usize..8) {
        let set = PointSet::new(pts.clone());
        match concave_hull(&set, k) {
            Ok(hull) => {
                prop_assert!(is_simple(hull.vertices()));
                prop_assert!(hull.signed_area() > 0.0);
                prop_assert!(covers(&hull, &pts));
            }
            Err(GeometryError::CollinearInput) | Err(GeometryError::TooFewPoints(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn concave_hull_never_exceeds_convex_hull(pts in point_sets()) {
        let set = PointSet::new(pts);
        if let (Ok(c), Ok(h)) = (convex_hull(&set), concave_hull(&set, 3)) {
            prop_assert!(h.signed_area() <= c.signed_area() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn offset_grows_with_distance(pts in point_sets(), b in 0.5..4.0f64) {
        let set = PointSet::new(pts);
        let Ok(hull) = convex_hull(&set) else { return Ok(()) };
        if let (Ok(small), Ok(big)) = (offset_outline(&hull, b), offset_outline(&hull, 2.0 * b)) {
            prop_assert!(covers(&small, hull.vertices()));
            prop_assert!(covers(&big, small.vertices()));
            prop_assert!(big.signed_area() > small.signed_area());
        }
    }

    #[test]
    fn outline_cleanup_only_adds_area(pts in point_sets(), w in 1.0..20.0f64) {
        let set = PointSet::new(pts.clone());
        let Ok(hull) = concave_hull(&set, 3) else { return Ok(()) };
        let cleaned = fill_dents(&close_notches(&hull, w), w / 2.0);
        prop_assert!(is_simple(cleaned.vertices()));
        prop_assert!(cleaned.signed_area() >= hull.signed_area() - 1e-9);
        prop_assert!(covers(&cleaned, &pts));
        let rounded = round_reflex_corners(&cleaned, 2);
        prop_assert!(is_simple(rounded.vertices()));
        prop_assert!(covers(&rounded, &pts));
    }
}

#[test]
fn clockwise_input_becomes_counter_clockwise() {
    let cw = Outline::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(1.0, 1.0),
        Point2::new(1.0, 0.0),
    ])
    .unwrap();
    assert!(cw.signed_area() > 0.0);
}

#[test]
fn self_intersecting_outline_is_rejected() {
    let bowtie = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
    ];
    assert_eq!(
        Outline::new(bowtie),
        Err(GeometryError::SelfIntersectingOutline)
    );
}

#[test]
fn concave_hull_follows_an_l_shape() {
    let mut pts = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            if i < 5 || j < 5 {
                pts.push(Point2::new(i as f64, j as f64));
            }
        }
    }
    let set = PointSet::new(pts.clone());
    let hull = concave_hull(&set, 3).unwrap();
    let convex = convex_hull(&set).unwrap();
    assert!(hull.signed_area() < 0.6 * convex.signed_area());
    assert!(covers(&hull, &pts));
}
