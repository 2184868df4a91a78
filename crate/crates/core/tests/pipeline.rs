use fractal_curvatures::estimators::lre::lre_objective;
use fractal_curvatures::estimators::{box_count_dimension, estimate, lre_fit, EstimateOptions, Method};
use fractal_curvatures::ifs::{rasterize, IfsSystem, RasterOptions};
use fractal_curvatures::image::{decode_pbm, encode_pbm, PbmFormat, DEFAULT_MAX_SIDE};
use fractal_curvatures::minkowski::perimeter_edgecount;
use fractal_curvatures::series::{
    build_schedule, measure_series, to_regression, validate_signs, ScheduleKind, SignRule, SignStatus,
};
use fractal_curvatures::BinaryImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gasket(side: usize) -> BinaryImage {
    rasterize(&IfsSystem::preset("gasket").unwrap(), &RasterOptions::new(side)).unwrap()
}

#[test]
fn gasket_pixel_count_scales_by_three() {
    let ratio = gasket(256).count_black() as f64 / gasket(128).count_black() as f64;
    assert!((2.7..=3.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn large_raster_round_trips() {
    let img = gasket(3000);
    for format in [PbmFormat::Raw, PbmFormat::Plain] {
        let back = decode_pbm(&encode_pbm(&img, format), DEFAULT_MAX_SIDE).unwrap();
        assert_eq!(back.count_black(), img.count_black());
        assert_eq!(back, img);
    }
}

#[test]
fn all_black_series() {
    let img = BinaryImage::filled(40, 30);
    let sched = build_schedule(ScheduleKind::Explicit(vec![9.0, 5.0, 2.5]), 2.0).unwrap();
    let series = measure_series(&img, &sched).unwrap();
    for e in &series.entries {
        assert_eq!(e.c0, 1);
        assert_eq!(e.c2, 1200.0);
        // 4-direction Crofton weights on axis-parallel edges
        let crofton = std::f64::consts::PI / 16.0 * (2.0 * 70.0 + 4.0 * 69.0 / 2f64.sqrt());
        assert!((e.c1 - crofton).abs() < 1e-9, "{}", e.c1);
        assert_eq!(e.y(2).unwrap(), (e.eps.powi(-2) * 1200.0).ln());
    }
}

#[test]
fn all_black_edge_count_is_the_half_perimeter() {
    let img = BinaryImage::filled(40, 30);
    assert_eq!(perimeter_edgecount(&img), 2 * 70);
}

#[test]
fn single_point_lattice_disks() {
    let mut img = BinaryImage::new(101, 101);
    img.set(50, 50, true);
    let sched = build_schedule(ScheduleKind::Explicit(vec![40.0, 20.0, 10.0]), 2.0).unwrap();
    let series = measure_series(&img, &sched).unwrap();
    let c2: Vec<f64> = series.entries.iter().map(|e| e.c2).collect();
    assert_eq!(c2, vec![5025.0, 1257.0, 317.0]);
    assert!(series.entries.iter().all(|e| e.c0 == 1));
}

#[test]
fn small_gasket_pipeline() {
    let img = gasket(512);
    let sched = build_schedule(ScheduleKind::default_preset(), 2.0)
        .unwrap()
        .truncated(2.5, 20.0)
        .unwrap();
    let series = validate_signs(&measure_series(&img, &sched).unwrap(), SignRule::Strict);
    assert_eq!(series.signs, [SignStatus::Negative, SignStatus::Positive, SignStatus::Positive]);
    let data = to_regression(&series, None).unwrap();
    let s = 3f64.ln() / 2f64.ln();
    for method in [Method::Lre, Method::Nre, Method::Auto] {
        let r = estimate(&data, &EstimateOptions { method, ..Default::default() }).unwrap();
        assert!((r.estimate.s_hat() - s).abs() < 0.06, "{method:?}: {}", r.estimate.s_hat());
        assert!(r.estimate.curvature_of(0).unwrap() < 0.0);
    }
    let boxes = box_count_dimension(&img, &[2, 4, 8, 16, 32, 64]).unwrap();
    assert!((boxes - s).abs() < 0.05, "box count {boxes}");
}

#[test]
fn lre_is_a_local_minimum_of_the_objective() {
    let img = gasket(400);
    let sched = build_schedule(ScheduleKind::log_range(-2.8, -1.0, 0.02), 2.0).unwrap();
    let series = validate_signs(&measure_series(&img, &sched).unwrap(), SignRule::Strict);
    let data = to_regression(&series, None).unwrap();
    let fit = lre_fit(&data).unwrap();
    let beta: Vec<f64> = fit.beta.iter().map(|b| b.1).collect();
    let best = lre_objective(&data, fit.s_hat, &beta);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let ds = rng.gen_range(-1e-3..1e-3);
        let db: Vec<f64> = beta.iter().map(|b| b + rng.gen_range(-1e-3..1e-3)).collect();
        assert!(lre_objective(&data, fit.s_hat + ds, &db) >= best);
    }
}
