use std::sync::Arc;

use kummer::kummer::RadialHypersurface;
use kummer::raytrace::*;
use kummer::shapes::{AxialProfile, AxialRadial, ConicOfRevolution};
use kummer::sphere::{Dimension, ScalarField, SphereGrid};

fn reflector(grid: &Arc<SphereGrid>, c1: f64) -> RadialHypersurface {
    let f = AxialRadial::new(grid.dimension(), [0.6, 0.0, 0.8], AxialProfile::Affine { c0: 1.0, c1 }).unwrap();
    RadialHypersurface::from_function(grid, Arc::new(f)).unwrap()
}

#[test]
fn batches_do_not_depend_on_the_thread_pool() {
    let grid = Arc::new(SphereGrid::sphere(8).unwrap());
    let r = reflector(&grid, 0.1);
    let a = trace_batch(&r, &SourceDensity::Uniform, 5000, 42).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| trace_batch(&r, &SourceDensity::Uniform, 5000, 42).unwrap());
    assert_eq!(a, b);
    let c = trace_batch(&r, &SourceDensity::Uniform, 5000, 43).unwrap();
    assert_ne!(a, c);
    let bins = EqualAreaBins::sphere_default();
    let ha = histogram_csv(&farfield_density(&a, &bins).unwrap()).unwrap();
    let hb = histogram_csv(&farfield_density(&b, &bins).unwrap()).unwrap();
    assert_eq!(ha, hb);
}

#[test]
fn histogram_conserves_energy() {
    let grid = Arc::new(SphereGrid::circle(64).unwrap());
    let r = reflector(&grid, 0.2);
    let batch = trace_batch(&r, &SourceDensity::Uniform, 20_000, 1).unwrap();
    let bins = EqualAreaBins::circle(24).unwrap();
    let h = farfield_density(&batch, &bins).unwrap();
    assert_eq!(h.counts.iter().sum::<u64>(), 20_000);
    assert!((h.integrated_density() - 1.0).abs() < 1e-12);
    let expected = pushforward_probabilities(&r, &SourceDensity::Uniform, &bins, 6).unwrap();
    assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let cmp = compare_bins(&h, &expected).unwrap();
    assert!(cmp.p_value > 1e-3, "{cmp:?}");
}

#[test]
fn nonuniform_source_matches_its_pushforward() {
    let grid = Arc::new(SphereGrid::sphere(12).unwrap());
    let r = reflector(&grid, 0.1);
    let g = ScalarField::from_fn(&grid, |m| 1.0 + 0.5 * m.x[2]);
    let density = SourceDensity::Field(g);
    let batch = trace_batch(&r, &density, 200_000, 3).unwrap();
    let bins = EqualAreaBins::sphere(6, 8).unwrap();
    let h = farfield_density(&batch, &bins).unwrap();
    let expected = pushforward_probabilities(&r, &density, &bins, 4).unwrap();
    assert!((expected.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    let cmp = compare_bins(&h, &expected).unwrap();
    assert!(cmp.p_value > 1e-3 && cmp.all_within(4.0), "{cmp:?}");
    let flat = compare_bins(&h, &uniform_probabilities(&bins)).unwrap();
    assert!(flat.p_value < 1e-6);
}

#[test]
fn circle_ellipse_focuses() {
    let grid = Arc::new(SphereGrid::circle(64).unwrap());
    let c = ConicOfRevolution::new(Dimension::Circle, 1.0, 0.6, [1.0, 0.0, 0.0]).unwrap();
    let r = RadialHypersurface::from_function(&grid, Arc::new(c)).unwrap();
    let batch = trace_batch(&r, &SourceDensity::Uniform, 10_000, 9).unwrap();
    assert!(focal_concentration(&c, &batch).unwrap() < 1e-12);
    assert!(jacobian_consistency(&r) < 1e-12);
}

#[test]
fn errors() {
    let grid = Arc::new(SphereGrid::sphere(6).unwrap());
    let r = reflector(&grid, 0.1);
    assert!(matches!(trace_batch(&r, &SourceDensity::Uniform, 0, 1), Err(kummer::Error::EmptyBatch)));
    let zero = SourceDensity::function(|_| 0.0, 0.0);
    assert!(matches!(trace_batch(&r, &zero, 10, 1), Err(kummer::Error::ZeroDensity)));
    let liar = SourceDensity::function(|x| 2.0 + x[0], 1.0);
    assert!(matches!(trace_batch(&r, &liar, 10, 1), Err(kummer::Error::DensityBound { .. })));
    assert!(EqualAreaBins::sphere(0, 4).is_err());
    assert!(EqualAreaBins::circle(0).is_err());
    let batch = trace_batch(&r, &SourceDensity::Uniform, 10, 1).unwrap();
    assert!(farfield_density(&batch, &EqualAreaBins::circle(8).unwrap()).is_err());
    let para = ConicOfRevolution::new(Dimension::Sphere, 1.0, 1.0, [0.0, 0.0, 1.0]).unwrap();
    assert!(focal_concentration(&para, &batch).is_err());
}
