//! Planar primitives: hulls, outline offsetting, containment and areas.

mod hull;
pub mod index;
mod offset;
mod point;
mod polygon;
mod simplify;

pub use hull::{concave_hull, concave_hull_k, concave_hull_with_k, convex_hull};
pub use offset::{offset_outline, MITER_LIMIT};
pub use point::{BBox, Point2, PointSet};
pub use polygon::{
    is_simple, locate_in_ring, orient, point_in_polygon, point_segment_distance, polygon_area,
    segments_cross, segments_intersect, signed_area, Location, Outline, BOUNDARY_EPS,
};
pub use simplify::{close_notches, fill_dents, round_reflex_corners};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("need at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("all points lie on one line")]
    CollinearInput,
    #[error("outline needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("outline is self-intersecting")]
    SelfIntersectingOutline,
    #[error("offset of {offset} folds the outline over itself; use a smaller offset")]
    OffsetSelfIntersection { offset: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
