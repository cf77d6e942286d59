//! Acceptance checks; prints one PASS/FAIL line per criterion and exits non-zero on failure.

use std::collections::BTreeMap;
use std::time::Instant;

use groundscale::augment::{apply_color, apply_geometric, augment, warp_plane, AugmentationParams, AugmentationRanges, FILL};
use groundscale::classiccv::{detect_classic, distance_transform, BinaryMask, ClassicParams};
use groundscale::eval::{average_precision, evaluate, iou, MatchResult, PredictionFlag};
use groundscale::frames::{fuse, split, Frame4, S_PLANE};
use groundscale::io;
use groundscale::synth::{render, Cylinder, LineSegment, SceneSpec};
use groundscale::{build_scale_map, CameraIntrinsics, CameraPose, CameraRig, DetectionBox, GrayImage, GroundPoint, Pixel, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rig(rng: &mut ChaCha8Rng, width: u32, height: u32) -> CameraRig {
    let f = rng.gen_range(500.0..900.0);
    let pose = CameraPose::new(
        rng.gen_range(0.4..0.8),
        rng.gen_range(-60f64..-20.0).to_radians(),
        0.0,
        0.0,
    );
    CameraRig::new(CameraIntrinsics::pinhole(f, width, height), pose).unwrap()
}

fn stride_fidelity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..5 {
        let rig = random_rig(&mut rng, 1440, 1088);
        let map = build_scale_map(&rig, 32).map_err(|e| e.to_string())?;
        for y in 0..1088 {
            for x in 0..1440 {
                let px = Pixel::new(x as f64, y as f64);
                if rig.horizon_margin_px(px) < 40.0 {
                    continue;
                }
                let exact = rig.scale_at_pixel(px).map_err(|e| e.to_string())?;
                let approx = map.sample(px).map_err(|e| e.to_string())?.ok_or("missing sample below horizon")?;
                worst = worst.max((approx - exact).abs() / exact);
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 0.02, || format!("max relative error {:.3}%", 100.0 * worst))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("5 rigs, {checked} pixels, max relative error {:.4}%, {secs:.1} s", 100.0 * worst))
}

fn build_performance() -> Outcome {
    let rig = CameraRig::new(
        CameraIntrinsics::pinhole(700.0, 1440, 1088),
        CameraPose::new(0.6, -35f64.to_radians(), 0.0, 0.0),
    )
    .unwrap();
    let mut times = Vec::new();
    for _ in 0..21 {
        let t = Instant::now();
        let map = build_scale_map(&rig, 32).map_err(|e| e.to_string())?;
        times.push(t.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(map);
    }
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    ensure(median < 15.0, || format!("median build {median:.3} ms exceeds the 10 ms budget by more than 50%"))?;
    Ok(format!("median build {median:.3} ms (budget 10 ms)"))
}

fn edt_exactness() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = rng.gen_range(0.05..0.95);
        let bits: Vec<bool> = (0..32 * 32).map(|_| rng.gen_bool(p)).collect();
        let mask = BinaryMask::from_bits(32, 32, bits).unwrap();
        let d = distance_transform(&mask);
        let zeros: Vec<(i64, i64)> = (0..32)
            .flat_map(|y| (0..32).map(move |x| (x, y)))
            .filter(|&(x, y)| !mask.get(x as u32, y as u32))
            .collect();
        for y in 0..32i64 {
            for x in 0..32i64 {
                let brute = zeros
                    .iter()
                    .map(|&(zx, zy)| ((x - zx).pow(2) + (y - zy).pow(2)) as u64)
                    .min()
                    .unwrap_or(u64::MAX);
                if d.squared_at(x as u32, y as u32) != brute {
                    mismatches += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!("100 masks of 32x32, 0 mismatches, {secs:.2} s"))
}

fn geometry_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = [0.0f64; 2];
    for _ in 0..5 {
        let base = random_rig(&mut rng, 1440, 1088);
        let distorted = CameraRig::new(base.intrinsics().with_distortion(-0.1, 0.0), *base.pose()).unwrap();
        for (k, rig) in [base, distorted].iter().enumerate() {
            let mut n = 0;
            while n < 1000 {
                let px = Pixel::new(rng.gen_range(0.0..1439.0), rng.gen_range(0.0..1087.0));
                let Ok(g) = rig.pixel_to_ground(px) else { continue };
                let back = rig.ground_to_pixel(g).map_err(|e| e.to_string())?;
                worst[k] = worst[k].max((back - px).norm());
                n += 1;
            }
        }
    }
    ensure(worst[0] < 1e-6, || format!("undistorted error {:.3e} px", worst[0]))?;
    ensure(worst[1] < 1e-3, || format!("distorted error {:.3e} px", worst[1]))?;
    Ok(format!("5 rigs x 1000 pixels, max error {:.2e} px undistorted, {:.2e} px with k1=-0.1", worst[0], worst[1]))
}

fn nadir_case() -> Outcome {
    let mut worst = 0.0f64;
    for (h, f) in [(0.6, 700.0), (0.4, 500.0), (0.8, 900.0), (1.2, 640.0)] {
        let rig = CameraRig::new(CameraIntrinsics::pinhole(f, 1440, 1088), CameraPose::nadir(h)).unwrap();
        let k = rig.intrinsics();
        let s = rig.scale_at_pixel(Pixel::new(k.cx, k.cy)).map_err(|e| e.to_string())?;
        worst = worst.max((s - h / f).abs() / (h / f));
    }
    ensure(worst <= 1e-9, || format!("relative error {worst:.3e}"))?;
    Ok(format!("S = h/f at the principal point, max relative error {worst:.1e}"))
}

fn line_filter() -> Outcome {
    let rig = CameraRig::new(
        CameraIntrinsics::pinhole(700.0, 640, 480),
        CameraPose::new(0.6, -45f64.to_radians(), 0.0, 0.0),
    )
    .unwrap();
    let params = ClassicParams::default();
    let p = GroundPoint::new;
    let mut spec = SceneSpec::empty(rig);
    for (a, b) in [(p(0.2, 0.3), p(1.5, 0.3)), (p(0.35, -0.6), p(0.35, 0.15)), (p(0.7, -0.7), p(1.4, -0.45))] {
        spec.lines.push(LineSegment::new(a, b, params.line_width_m));
    }
    spec.obstacles.push(Cylinder::new(p(0.95, -0.05), 0.3, 0.4));
    let r = render(&spec).map_err(|e| e.to_string())?;
    let out = detect_classic(&r.image, &rig, &params).map_err(|e| e.to_string())?;
    let gt = r.boxes.first().ok_or("obstacle not visible")?;
    let line_boxes = out.boxes.iter().filter(|b| iou(b, gt) == 0.0).count();
    let obstacle_boxes: Vec<_> = out.boxes.iter().filter(|b| iou(b, gt) > 0.0).collect();
    ensure(line_boxes == 0, || format!("{line_boxes} line-derived boxes"))?;
    ensure(obstacle_boxes.len() == 1, || format!("{} obstacle boxes", obstacle_boxes.len()))?;
    let v = iou(obstacle_boxes[0], gt);
    ensure(v >= 0.5, || format!("IoU {v:.3}"))?;
    Ok(format!("0 line boxes, 1 obstacle box with IoU {v:.3}"))
}

fn jitter(b: &DetectionBox, rng: &mut ChaCha8Rng) -> DetectionBox {
    let sx = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let sy = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (cx, cy) = (b.cx + sx * 0.05 * b.w, b.cy + sy * 0.05 * b.h);
    let (x0, x1) = ((cx - b.w / 2.0).max(0.0), (cx + b.w / 2.0).min(1.0));
    let (y0, y1) = ((cy - b.h / 2.0).max(0.0), (cy + b.h / 2.0).min(1.0));
    DetectionBox::from_corners(b.class_id, x0, y0, x1, y1, rng.gen_range(0.05..1.0)).unwrap()
}

fn evaluator() -> Outcome {
    let flags = [true, false, true]
        .iter()
        .enumerate()
        .map(|(i, &tp)| PredictionFlag { class_id: 0, confidence: 0.9 - 0.1 * i as f64, true_positive: tp })
        .collect();
    let fixture = MatchResult { flags, gt_counts: BTreeMap::from([(0, 2)]) };
    let ap = average_precision(&fixture, 0).map_err(|e| e.to_string())?;
    ensure((ap - 5.0 / 6.0).abs() <= 1e-9, || format!("fixture AP {ap}"))?;

    let rig = CameraRig::new(
        CameraIntrinsics::pinhole(350.0, 320, 240),
        CameraPose::new(0.6, -35f64.to_radians(), 0.0, 0.0),
    )
    .unwrap();
    let mut gts = Vec::new();
    for seed in 0..50u64 {
        let mut spec = SceneSpec::standard_field(rig, GroundPoint::new(2.0, 0.0));
        spec.scatter_obstacles(1 + (seed % 3) as usize, 0.15, 0.4, seed);
        let r = render(&spec).map_err(|e| e.to_string())?;
        gts.push(r.boxes);
    }
    let n_gt: usize = gts.iter().map(Vec::len).sum();
    let perfect = evaluate(&gts, &gts).map_err(|e| e.to_string())?;
    ensure(perfect.ap.iter().flatten().chain(&perfect.map).all(|&v| v == 1.0), || "perfect predictor below 1.0".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let preds: Vec<Vec<DetectionBox>> = gts.iter().map(|g| g.iter().map(|b| jitter(b, &mut rng)).collect()).collect();
    let table = evaluate(&preds, &gts).map_err(|e| e.to_string())?;
    let m05 = table.map_at(0.5).unwrap();
    let m09 = table.map_at(0.9).unwrap();
    ensure(m05 == 1.0, || format!("jitter mAP@0.5 = {m05}"))?;
    ensure(m09 < 1.0, || format!("jitter mAP@0.9 = {m09}"))?;
    ensure(table.is_monotone(), || format!("table not monotone: {:?}", table.map))?;
    let rows: Vec<String> = table.map.iter().map(|v| format!("{v:.3}")).collect();
    Ok(format!("fixture AP = 5/6, perfect = 1.0, jitter on 50 images ({n_gt} boxes) mAP@0.5..0.9 = [{}]", rows.join(", ")))
}

fn random_frame(rng: &mut ChaCha8Rng, w: u32, h: u32) -> Frame4 {
    Frame4::from_planes(w, h, std::array::from_fn(|_| (0..w * h).map(|_| rng.gen()).collect())).unwrap()
}

fn augmentation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let frame = random_frame(&mut rng, 96, 72);
    let boxes = vec![DetectionBox::ground_truth(0, 0.5, 0.5, 0.3, 0.2).unwrap()];
    let ranges = AugmentationRanges::default();
    for seed in 0..20 {
        let a = augment(&frame, &boxes, &ranges, seed);
        let b = augment(&frame, &boxes, &ranges, seed);
        ensure(a == b, || format!("seed {seed} not deterministic"))?;
    }

    let rot = AugmentationParams { angle: 5f64.to_radians(), ..AugmentationParams::identity() };
    let whole = apply_geometric(&frame, &rot);
    let forward = rot.affine(96, 72);
    for (i, &fill) in FILL.iter().enumerate() {
        let single = warp_plane(frame.plane(i), 96, 72, &forward, fill);
        ensure(whole.plane(i) == single.as_slice(), || format!("plane {i} differs under rotation"))?;
    }

    for seed in 0..20 {
        let mut p = AugmentationParams::identity();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        p.sat_mult = r.gen_range(0.5..1.5);
        p.val_mult = r.gen_range(0.5..1.5);
        let jittered = apply_color(&frame, &p);
        ensure(jittered.plane(S_PLANE) == frame.plane(S_PLANE), || "color jitter touched the S plane".into())?;
    }

    let flip = AugmentationParams { hflip: true, ..AugmentationParams::identity() };
    let twice = apply_geometric(&apply_geometric(&frame, &flip), &flip);
    ensure(twice == frame, || "double flip is not the identity".into())?;
    Ok("seeded determinism, rotation plane-equivariance, S untouched by color, double flip identity".into())
}

fn io_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let (w, h) = (rng.gen_range(1..64), rng.gen_range(1..64));
        let rgb = RgbImage::from_raw(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap();
        let s = GrayImage::from_raw(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap();
        let ppm = io::encode_ppm(&rgb);
        ensure(io::encode_ppm(&io::decode_ppm(&ppm).map_err(|e| e.to_string())?) == ppm, || "PPM differs".into())?;
        let pgm = io::encode_pgm(&s);
        ensure(io::encode_pgm(&io::decode_pgm(&pgm).map_err(|e| e.to_string())?) == pgm, || "PGM differs".into())?;
        let frame = fuse(&rgb, &s).map_err(|e| e.to_string())?;
        let frm = io::encode_frame(&frame);
        let back = io::decode_frame(&frm).map_err(|e| e.to_string())?;
        ensure(io::encode_frame(&back) == frm && split(&back) == (rgb, s), || "FRM1 differs".into())?;

        let boxes: Vec<DetectionBox> = (0..rng.gen_range(0..20))
            .map(|_| {
                let (bw, bh) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
                let cx = rng.gen_range(bw / 2.0..=1.0 - bw / 2.0);
                let cy = rng.gen_range(bh / 2.0..=1.0 - bh / 2.0);
                DetectionBox::new(rng.gen_range(0..10), cx, cy, bw, bh, rng.gen()).unwrap()
            })
            .collect();
        let parsed = io::parse_labels(&io::format_labels(&boxes, true)).map_err(|e| e.to_string())?;
        let close = parsed.len() == boxes.len()
            && boxes.iter().zip(&parsed).all(|(a, b)| {
                a.class_id == b.class_id
                    && [(a.cx, b.cx), (a.cy, b.cy), (a.w, b.w), (a.h, b.h), (a.confidence, b.confidence)]
                        .iter()
                        .all(|(x, y)| (x - y).abs() <= 5e-7)
            });
        ensure(close, || "labels differ beyond 6 decimals".into())?;
    }

    let seeds: Vec<Vec<u8>> = vec![
        io::encode_ppm(&RgbImage::new(4, 3)),
        io::encode_pgm(&GrayImage::new(4, 3)),
        io::encode_frame(&random_frame(&mut rng, 3, 2)),
        io::encode_float_dump(2, 1, &[Some(0.5), None]),
        b"0 0.5 0.5 0.2 0.2\n1 0.25 0.25 0.1 0.1 0.8\n".to_vec(),
        b"fx = 700\nfy = 700\ncx = 1\ncy = 1\nwidth = 4\nheight = 4\nk1 = 0\nk2 = 0\ncam_height_m = 1\npitch_deg = -90\nroll_deg = 0\nyaw_deg = 0\n".to_vec(),
    ];
    let cases = 10_000;
    let result = std::panic::catch_unwind(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..cases {
            let bytes: Vec<u8> = if rng.gen_bool(0.5) {
                (0..rng.gen_range(0..128)).map(|_| rng.gen()).collect()
            } else {
                let mut b = seeds[rng.gen_range(0..seeds.len())].clone();
                for _ in 0..rng.gen_range(1..6) {
                    if b.is_empty() {
                        break;
                    }
                    let i = rng.gen_range(0..b.len());
                    match rng.gen_range(0..4) {
                        0 => b[i] = rng.gen(),
                        1 => b.truncate(i),
                        2 => b.insert(i, rng.gen()),
                        _ => b[i] ^= 1 << rng.gen_range(0..8),
                    }
                }
                b
            };
            let _ = io::decode_ppm(&bytes);
            let _ = io::decode_pgm(&bytes);
            let _ = io::decode_frame(&bytes);
            let _ = io::decode_float_dump(&bytes);
            if let Ok(text) = std::str::from_utf8(&bytes) {
                let _ = io::parse_labels(text);
                let _ = io::parse_config(text);
                let _ = io::parse_scene(text);
            }
        }
    });
    ensure(result.is_ok(), || "a parser panicked during fuzzing".into())?;
    Ok(format!("100 random fixtures bit-exact (PPM, PGM, FRM1) and 6-decimal (labels); {cases} fuzz cases without a crash"))
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 9] = [
        ("stride-32 scale-map fidelity", stride_fidelity),
        ("scale-map build time", build_performance),
        ("distance transform exactness", edt_exactness),
        ("geometry round trip", geometry_round_trip),
        ("nadir analytic scale", nadir_case),
        ("line filter on synthetic field", line_filter),
        ("evaluator oracles", evaluator),
        ("augmentation determinism and equivariance", augmentation),
        ("I/O round trips and fuzzing", io_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
