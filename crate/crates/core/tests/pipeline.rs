use groundscale::classiccv::{detect_classic, ClassicParams};
use groundscale::eval::iou;
use groundscale::synth::{render, Cylinder, LineSegment, SceneSpec};
use groundscale::{CameraIntrinsics, CameraPose, CameraRig, GroundPoint, RgbImage};

fn rig() -> CameraRig {
    CameraRig::new(
        CameraIntrinsics::pinhole(700.0, 640, 480),
        CameraPose::new(0.6, -45f64.to_radians(), 0.0, 0.0),
    )
    .unwrap()
}

fn lines_scene() -> SceneSpec {
    let mut spec = SceneSpec::empty(rig());
    let p = GroundPoint::new;
    spec.lines.push(LineSegment::new(p(0.2, 0.3), p(1.5, 0.3), 0.05));
    spec.lines.push(LineSegment::new(p(0.35, -0.6), p(0.35, 0.15), 0.05));
    spec.lines.push(LineSegment::new(p(0.7, -0.7), p(1.4, -0.45), 0.05));
    spec
}

#[test]
fn lines_only_field_has_no_obstacles() {
    let r = render(&lines_scene()).unwrap();
    let out = detect_classic(&r.image, &rig(), &ClassicParams::default()).unwrap();
    assert!(out.mask.count_ones() > 10_000);
    assert_eq!(out.core.count_ones(), 0);
    assert!(out.boxes.is_empty());
}

#[test]
fn one_blob_gives_one_box() {
    let mut spec = lines_scene();
    spec.obstacles.push(Cylinder::new(GroundPoint::new(0.95, -0.05), 0.3, 0.4));
    let r = render(&spec).unwrap();
    let out = detect_classic(&r.image, &rig(), &ClassicParams::default()).unwrap();
    assert_eq!(out.boxes.len(), 1);
    assert_eq!(r.boxes.len(), 1);
    let v = iou(&out.boxes[0], &r.boxes[0]);
    assert!(v >= 0.5, "IoU {v}");
}

#[test]
fn wide_blob_has_core_and_stripe_does_not() {
    let rig = rig();
    let mut stripe = SceneSpec::empty(rig);
    stripe.lines.push(LineSegment::new(GroundPoint::new(0.2, 0.0), GroundPoint::new(1.5, 0.0), 0.05));
    let out = detect_classic(&render(&stripe).unwrap().image, &rig, &ClassicParams::default()).unwrap();
    assert_eq!(out.core.count_ones(), 0);

    let mut blob = SceneSpec::empty(rig);
    blob.lines.push(LineSegment::new(GroundPoint::new(0.6, 0.0), GroundPoint::new(0.9, 0.0), 0.3));
    let out = detect_classic(&render(&blob).unwrap().image, &rig, &ClassicParams::default()).unwrap();
    assert!(out.core.count_ones() > 0);
}

#[test]
fn kept_points_reach_the_near_edge() {
    let center = GroundPoint::new(1.0, 0.0);
    let mut spec = SceneSpec::empty(rig());
    spec.obstacles.push(Cylinder::new(center, 0.3, 0.4));
    let r = render(&spec).unwrap();
    let params = ClassicParams { max_range_m: 10.0, ..ClassicParams::default() };
    let out = detect_classic(&r.image, &rig(), &params).unwrap();
    assert!(!out.obstacles.is_empty());
    let nearest = out.obstacles.iter().map(|o| o.range_m).fold(f64::INFINITY, f64::min);
    let near_edge = center.distance_to(&GroundPoint::default()) - 0.3;
    assert!((nearest - near_edge).abs() <= 0.05, "nearest {nearest} vs {near_edge}");
}

#[test]
fn padding_with_green_changes_nothing() {
    let mut spec = lines_scene();
    spec.obstacles.push(Cylinder::new(GroundPoint::new(0.95, -0.05), 0.3, 0.4));
    let img = render(&spec).unwrap().image;
    let base = detect_classic(&img, &rig(), &ClassicParams::default()).unwrap();

    let (pad_x, pad_y) = (7u32, 5u32);
    let (w, h) = (img.width() + 2 * pad_x, img.height() + 2 * pad_y);
    let mut padded = RgbImage::filled(w, h, spec.field_color);
    for y in 0..img.height() {
        for x in 0..img.width() {
            padded.put(x + pad_x, y + pad_y, img.get(x, y));
        }
    }
    let big_rig = rig().padded(pad_x, pad_y, w, h).unwrap();
    let out = detect_classic(&padded, &big_rig, &ClassicParams::default()).unwrap();
    for y in 0..img.height() {
        for x in 0..img.width() {
            assert_eq!(out.core.get(x + pad_x, y + pad_y), base.core.get(x, y));
        }
    }
    assert_eq!(out.core.count_ones(), base.core.count_ones());
}
