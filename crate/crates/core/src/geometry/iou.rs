//! Overlap kernels: aligned-cuboid scale IOU, rotated bird's-eye-view IOU via
//! convex polygon clipping, and yaw-only 3D IOU.

use crate::model::BoxRecord;

/// Intersection areas below this are treated as empty, square meters.
pub const AREA_EPSILON: f64 = 1e-12;

/// IOU of two cuboids after aligning their centers and orientations.
pub fn scale_iou(a: [f64; 3], b: [f64; 3]) -> f64 {
    let inter: f64 = a.iter().zip(&b).map(|(x, y)| x.min(*y)).product();
    let va: f64 = a.iter().product();
    let vb: f64 = b.iter().product();
    inter / (va + vb - inter)
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let p = poly[i];
            let q = poly[(i + 1) % n];
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    twice.abs() / 2.0
}

/// Sutherland-Hodgman clip of `subject` against the convex counter-clockwise
/// polygon `clip`.
fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let cur_in = cross(a, b, cur) >= 0.0;
            let prev_in = cross(a, b, prev) >= 0.0;
            if cur_in != prev_in {
                let dp = cross(a, b, prev);
                let dc = cross(a, b, cur);
                let t = dp / (dp - dc);
                output.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
            if cur_in {
                output.push(cur);
            }
        }
    }
    output
}

/// Area of the intersection of two ground-plane footprints.
pub fn bev_intersection_area(a: &BoxRecord, b: &BoxRecord) -> f64 {
    let area = polygon_area(&clip_convex(&a.footprint(), &b.footprint()));
    if area < AREA_EPSILON {
        0.0
    } else {
        area
    }
}

/// IOU of the yaw-rotated ground-plane rectangles.
pub fn bev_iou(a: &BoxRecord, b: &BoxRecord) -> f64 {
    let inter = bev_intersection_area(a, b);
    if inter == 0.0 {
        return 0.0;
    }
    let union = a.size[0] * a.size[1] + b.size[0] * b.size[1] - inter;
    (inter / union).clamp(0.0, 1.0)
}

fn vertical_overlap(a: &BoxRecord, b: &BoxRecord) -> f64 {
    let (za, ha) = (a.translation[2], a.size[2] / 2.0);
    let (zb, hb) = (b.translation[2], b.size[2] / 2.0);
    ((za + ha).min(zb + hb) - (za - ha).max(zb - hb)).max(0.0)
}

/// 3D IOU of yaw-only cuboids: footprint intersection times vertical overlap.
pub fn iou_3d(a: &BoxRecord, b: &BoxRecord) -> f64 {
    let inter = bev_intersection_area(a, b) * vertical_overlap(a, b);
    if inter == 0.0 {
        return 0.0;
    }
    (inter / (a.volume() + b.volume() - inter)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use proptest::prelude::*;

    use super::*;
    use crate::model::DetectionClass;

    fn rec(x: f64, y: f64, z: f64, size: [f64; 3], yaw: f64) -> BoxRecord {
        BoxRecord::new("s", DetectionClass::Car, [x, y, z], size, yaw)
    }

    #[test]
    fn scale_iou_cases() {
        assert_eq!(scale_iou([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), 1.0);
        assert!((scale_iou([2.0; 3], [1.0; 3]) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn scale_iou_voxel_oracle() {
        // count unit-grid voxels of two co-centered cuboids at 0.05 m pitch
        let a = [2.0, 1.0, 1.5];
        let b = [1.0, 1.5, 0.5];
        let pitch = 0.05;
        let inside = |s: [f64; 3], p: [f64; 3]| (0..3).all(|k| p[k].abs() <= s[k] / 2.0);
        let (mut ia, mut ib, mut both) = (0u64, 0u64, 0u64);
        let n = (2.0 / pitch) as i64;
        for i in -n..n {
            for j in -n..n {
                for k in -n..n {
                    let p = [
                        (i as f64 + 0.5) * pitch,
                        (j as f64 + 0.5) * pitch,
                        (k as f64 + 0.5) * pitch,
                    ];
                    let (x, y) = (inside(a, p), inside(b, p));
                    ia += x as u64;
                    ib += y as u64;
                    both += (x && y) as u64;
                }
            }
        }
        let oracle = both as f64 / (ia + ib - both) as f64;
        assert!((scale_iou(a, b) - oracle).abs() < 1e-9);
    }

    #[test]
    fn bev_identity_and_disjoint() {
        let a = rec(1.0, 2.0, 0.0, [2.0, 4.0, 1.5], 0.4);
        assert!((bev_iou(&a, &a) - 1.0).abs() < 1e-12);
        let b = rec(101.0, 2.0, 0.0, [2.0, 4.0, 1.5], 0.4);
        assert_eq!(bev_iou(&a, &b), 0.0);
    }

    #[test]
    fn bev_rotated_square() {
        // unit square vs itself rotated 45 degrees: the overlap is a regular
        // octagon of area 2(sqrt2 - 1)
        let a = rec(0.0, 0.0, 0.0, [1.0, 1.0, 1.0], 0.0);
        let b = rec(0.0, 0.0, 0.0, [1.0, 1.0, 1.0], FRAC_PI_4);
        let inter = 2.0 * (2f64.sqrt() - 1.0);
        let expected = inter / (2.0 - inter);
        assert!((bev_iou(&a, &b) - expected).abs() < 1e-12);
    }

    #[test]
    fn touching_edges_give_zero() {
        let a = rec(0.0, 0.0, 0.0, [1.0, 1.0, 1.0], 0.0);
        let b = rec(1.0, 0.0, 0.0, [1.0, 1.0, 1.0], 0.0);
        assert_eq!(bev_iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_3d_cases() {
        let a = rec(0.0, 0.0, 0.0, [1.0, 1.0, 2.0], 0.0);
        assert!((iou_3d(&a, &a) - 1.0).abs() < 1e-12);
        let b = rec(0.0, 0.0, 1.0, [1.0, 1.0, 2.0], 0.0);
        assert!((iou_3d(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        let c = rec(0.0, 0.0, 2.0, [1.0, 1.0, 2.0], 0.0);
        assert_eq!(iou_3d(&a, &c), 0.0);
    }

    proptest! {
        #[test]
        fn scale_iou_symmetric(a in prop::array::uniform3(0.01f64..20.0),
                               b in prop::array::uniform3(0.01f64..20.0)) {
            let (x, y) = (scale_iou(a, b), scale_iou(b, a));
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!(x > 0.0 && x <= 1.0);
        }

        #[test]
        fn bev_symmetric_bounded(ax in -3.0f64..3.0, ay in -3.0f64..3.0, ayaw in -4.0f64..4.0,
                                 bx in -3.0f64..3.0, by in -3.0f64..3.0, byaw in -4.0f64..4.0,
                                 sa in prop::array::uniform3(0.1f64..5.0),
                                 sb in prop::array::uniform3(0.1f64..5.0)) {
            let a = rec(ax, ay, 0.0, sa, ayaw);
            let b = rec(bx, by, 0.0, sb, byaw);
            let (x, y) = (bev_iou(&a, &b), bev_iou(&b, &a));
            prop_assert!((x - y).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&x));
        }

        #[test]
        fn scale_iou_matches_aligned_iou_3d(c in prop::array::uniform3(-50.0f64..50.0),
                                            yaw in -3.0f64..3.0,
                                            sa in prop::array::uniform3(0.1f64..5.0),
                                            sb in prop::array::uniform3(0.1f64..5.0)) {
            let a = rec(c[0], c[1], c[2], sa, yaw);
            let b = rec(c[0], c[1], c[2], sb, yaw);
            prop_assert!((iou_3d(&a, &b) - scale_iou(sa, sb)).abs() < 1e-9);
        }
    }
}
