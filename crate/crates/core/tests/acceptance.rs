//! End-to-end acceptance criteria. Each test prints one `criterion N: PASS|FAIL ...` line.

use bergman_lab::bundle::{line_bundle, log_pole_metric, reference_metric, LineBundle, MetricDescriptor, MetricWeight};
use bergman_lab::distance::{multilinear_expansion_residual, rule_for};
use bergman_lab::experiments::{run_and_emit, run_study, BundleConfig, ExperimentConfig, SpaceCache, StudyKind, StudyReport, Verdict};
use bergman_lab::fubini_study::identity_residual;
use bergman_lab::manifold::{build_manifold, ManifoldKind, Point};
use bergman_lab::poly::PolySpec;
use bergman_lab::sections::{build_space, gram_rule};
use bergman_lab::testforms::test_form_dictionary;
use bergman_lab::zeros::{common_zeros, empirical_general_position, sample_tuple, SeedRecord, ZeroSet};
use rand::{Rng, SeedableRng};
use std::sync::Arc;

fn report(n: u32, ok: bool, detail: impl AsRef<str>) {
    println!("criterion {n}: {} {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    assert!(ok, "criterion {n} failed: {}", detail.as_ref());
}

fn flags(r: &StudyReport) -> String {
    r.flags.iter().map(|(k, f)| format!("[{k}: {:?} {}]", f.verdict, f.detail)).collect::<Vec<_>>().join(" ")
}

fn pole(e: &[u16]) -> MetricDescriptor {
    MetricDescriptor::LogPole { q: PolySpec::monomial(e), t: 0.5 }
}

fn bundle_cfg(degree: &[i64], h: MetricDescriptor) -> BundleConfig {
    BundleConfig { degree: degree.to_vec(), h, g: None }
}

fn bundle(kind: ManifoldKind, degree: &[i64]) -> LineBundle {
    line_bundle(&build_manifold(kind), degree).unwrap()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn criterion_01_dimension_law() {
    let mut details = Vec::new();
    let mut ok = true;
    for (kind, deg) in [(ManifoldKind::P1, vec![1]), (ManifoldKind::P2, vec![1]), (ManifoldKind::P1xP1, vec![1, 1])] {
        for adjoint in [false, true] {
            let mut c = ExperimentConfig::new(StudyKind::Dimension, kind, vec![bundle_cfg(&deg, MetricDescriptor::FubiniStudy)], (1..=20).collect());
            c.adjoint = Some(adjoint);
            // The adjoint line has d_p = p - 2, whose ratio is 1/3 at p = 3.
            if kind == ManifoldKind::P1 && !adjoint {
                c.tolerances.ratio_bound = Some(2.0);
            }
            let r = run_study(&c, &SpaceCache::default()).unwrap();
            for row in &r.table.rows {
                let p: i64 = row[0].parse().unwrap();
                let k = if adjoint { p - if kind == ManifoldKind::P2 { 3 } else { 2 } } else { p };
                let want = match kind {
                    ManifoldKind::P1 => (k + 1).max(0) as u64,
                    ManifoldKind::P2 if k >= 0 => binomial(k as u64 + 2, 2),
                    ManifoldKind::P1xP1 if k >= 0 => ((k + 1) * (k + 1)) as u64,
                    _ => 0,
                };
                ok &= row[1] == want.to_string();
            }
            ok &= r.passed();
            details.push(format!("{kind} adjoint={adjoint} c={:.3}", r.summary["ratio_bound"]));
        }
    }
    report(1, ok, details.join("; "));
}

#[test]
fn criterion_02_constant_kernel() {
    let b = bundle(ManifoldKind::P1, &[1]);
    let h = Arc::new(reference_metric(&b));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let grid: Vec<Point> = (0..200)
        .map(|_| {
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            let r = (u / (1.0 - u)).sqrt();
            let a = 2.0 * std::f64::consts::PI * v;
            Point::new(ManifoldKind::P1, &[num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::from_polar(r, a)]).unwrap()
        })
        .collect();
    let mut ok = true;
    let mut details = Vec::new();
    for p in [8, 16, 32] {
        let s = build_space(&b, &h, p, true, 2048).unwrap();
        let vals: Vec<f64> = grid.iter().map(|x| s.bergman_kernel(x).unwrap()).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        let spread = (hi - lo) / hi;
        let integral = s.bergman_integral(&gram_rule(&h, p, 2048).unwrap()).unwrap();
        let gap = (integral - (s.d_p() + 1) as f64).abs();
        ok &= spread <= 1e-6 && gap <= 1e-6;
        details.push(format!("p={p} spread={spread:.2e} |∫P-(d+1)|={gap:.2e}"));
    }
    report(2, ok, details.join("; "));
}

#[test]
fn criterion_03_current_identity() {
    let mut ok = true;
    let mut details = Vec::new();
    let cases: Vec<(ManifoldKind, Vec<i64>, MetricDescriptor, f64, usize)> = vec![
        (ManifoldKind::P1, vec![1], MetricDescriptor::FubiniStudy, 1e-6, 128),
        (ManifoldKind::P1, vec![1], pole(&[1, 0]), 1e-3, 128),
        (ManifoldKind::P2, vec![1], MetricDescriptor::FubiniStudy, 1e-6, 32),
        (ManifoldKind::P2, vec![1], pole(&[1, 0, 0]), 1e-3, 32),
    ];
    for (kind, deg, desc, tol, res) in cases {
        let m = build_manifold(kind);
        let b = line_bundle(&m, &deg).unwrap();
        let h = Arc::new(desc.build(&b).unwrap());
        let rule = rule_for(kind, res, &[&h]).unwrap();
        for p in [8, 16] {
            let s = build_space(&b, &h, p, true, res).unwrap();
            let worst = test_form_dictionary(&m, 1).unwrap().iter().map(|f| identity_residual(&s, f, &m, &rule).unwrap()).fold(0.0, f64::max);
            ok &= worst <= tol;
            details.push(format!("{kind} {} p={p} max={worst:.2e}", desc.label()));
        }
    }
    report(3, ok, details.join("; "));
}

fn library_p1() -> Vec<MetricDescriptor> {
    let z = [PolySpec::monomial(&[1, 0]), PolySpec::monomial(&[0, 1])];
    vec![
        MetricDescriptor::FubiniStudy,
        pole(&[1, 0]),
        MetricDescriptor::MaxOfLogPoles { poles: z.to_vec(), t: 0.5 },
        MetricDescriptor::SmoothedMax { polys: z.to_vec(), t: 0.5, sharpness: 2 },
        MetricDescriptor::Interpolated { h: Box::new(pole(&[1, 0])), g: Box::new(MetricDescriptor::FubiniStudy), eps: 0.5 },
    ]
}

#[test]
fn criterion_04_bergman_log_asymptotics() {
    let mut ok = true;
    let mut details = Vec::new();
    for h in library_p1() {
        let mut c = ExperimentConfig::new(StudyKind::Bergman, ManifoldKind::P1, vec![bundle_cfg(&[1], h.clone())], vec![8, 16, 32, 64]);
        c.resolution = 64;
        let r = run_study(&c, &SpaceCache::default()).unwrap();
        ok &= r.passed();
        details.push(format!("{} R²={:.3}", h.label(), r.fits["fit:0"].r2));
        if !r.passed() {
            details.push(flags(&r));
        }
    }
    report(4, ok, details.join("; "));
}

#[test]
fn criterion_05_expected_zero_current() {
    let mut c = ExperimentConfig::new(StudyKind::ExpectedZero, ManifoldKind::P1, vec![bundle_cfg(&[1], pole(&[1, 0]))], vec![8, 16]);
    c.samples = 2000;
    c.seed = 5;
    c.resolution = 64;
    let r = run_study(&c, &SpaceCache::default()).unwrap();
    report(5, r.passed(), format!("coverage {:.3} {}", r.summary["coverage"], flags(&r)));
}

fn equidistribution_config(h: MetricDescriptor) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(StudyKind::Equidistribution, ManifoldKind::P1, vec![bundle_cfg(&[1], h)], vec![8, 12, 16, 24, 32, 48, 64]);
    c.samples = 50;
    c.seed = 6;
    c
}

#[test]
fn criterion_06_equidistribution_rate() {
    let mut ok = true;
    let mut details = Vec::new();
    for h in [MetricDescriptor::FubiniStudy, pole(&[1, 0])] {
        let r = run_study(&equidistribution_config(h.clone()), &SpaceCache::default()).unwrap();
        ok &= r.passed();
        details.push(format!("{} {}", h.label(), flags(&r)));
    }
    report(6, ok, details.join("; "));
}

#[test]
fn criterion_07_fs_wedge_convergence() {
    let mut c = ExperimentConfig::new(
        StudyKind::FsConvergence,
        ManifoldKind::P2,
        vec![bundle_cfg(&[1], pole(&[1, 0, 0])), bundle_cfg(&[1], pole(&[0, 1, 0]))],
        vec![6, 9, 12],
    );
    c.resolution = 32;
    let r = run_study(&c, &SpaceCache::default()).unwrap();
    report(7, r.passed(), flags(&r));
}

#[test]
fn criterion_08_empirical_bertini() {
    let m = build_manifold(ManifoldKind::P2);
    let b = line_bundle(&m, &[1]).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    let metrics: Vec<(Arc<MetricWeight>, Arc<MetricWeight>)> = vec![
        (Arc::new(reference_metric(&b)), Arc::new(reference_metric(&b))),
        // At p = 6 a weight of 0.5 would leave only z0³; 0.2 keeps a fixed line plus quadrics.
        (Arc::new(log_pole_metric(&b, &PolySpec::monomial(&[1, 0, 0]), 0.2).unwrap()), Arc::new(log_pole_metric(&b, &PolySpec::monomial(&[0, 1, 0]), 0.2).unwrap())),
    ];
    for (h1, h2) in metrics {
        let spaces = [Arc::new(build_space(&b, &h1, 6, true, 24).unwrap()), Arc::new(build_space(&b, &h2, 6, true, 24).unwrap())];
        let (mut generic, mut exact) = (0, 0);
        for i in 0..500 {
            let mut t = sample_tuple(&spaces, SeedRecord::new(8, i)).unwrap();
            if empirical_general_position(&mut t).unwrap() {
                generic += 1;
            }
            if let Ok(ZeroSet::Points { points, bezout, .. }) = common_zeros(&t) {
                exact += (points.iter().map(|p| p.1).sum::<usize>() == bezout) as usize;
            }
        }
        ok &= generic == 500 && exact == 500;
        details.push(format!("{}/{}: general position {generic}/500, Bézout counts {exact}/500", h1.descriptor.label(), h2.descriptor.label()));
    }
    report(8, ok, details.join("; "));
}

#[test]
fn criterion_09_multilinear_expansion() {
    let mut worst = 0.0f64;
    let eps = [0.1, 0.3, 1.0];
    let p1 = build_manifold(ManifoldKind::P1);
    let b1 = line_bundle(&p1, &[1]).unwrap();
    let fs1 = reference_metric(&b1);
    let dict1 = test_form_dictionary(&p1, 1).unwrap();
    for h in library_p1().into_iter().skip(1) {
        let h = h.build(&b1).unwrap();
        let rule = rule_for(ManifoldKind::P1, 64, &[&h]).unwrap();
        for e in eps {
            for chi in [&dict1[0], &dict1[5], &dict1[8]] {
                worst = worst.max(multilinear_expansion_residual(&[&h], &[&fs1], e, chi, &p1, &rule).unwrap());
            }
        }
    }
    let p2 = build_manifold(ManifoldKind::P2);
    let b2 = line_bundle(&p2, &[1]).unwrap();
    let fs2 = reference_metric(&b2);
    let dict2 = test_form_dictionary(&p2, 2).unwrap();
    let (a, c, z) = (pole(&[1, 0, 0]).build(&b2).unwrap(), pole(&[0, 1, 0]).build(&b2).unwrap(), pole(&[0, 0, 1]).build(&b2).unwrap());
    let pairs: [([&MetricWeight; 2], [&MetricWeight; 2]); 3] = [([&a, &c], [&fs2, &fs2]), ([&fs2, &fs2], [&a, &c]), ([&a, &fs2], [&fs2, &z])];
    for (hs, gs) in pairs {
        let rule = rule_for(ManifoldKind::P2, 16, &[hs[0], hs[1], gs[0], gs[1]]).unwrap();
        for e in eps {
            for chi in [&dict2[0], &dict2[5], &dict2[8]] {
                worst = worst.max(multilinear_expansion_residual(&hs, &gs, e, chi, &p2, &rule).unwrap());
            }
        }
    }
    report(9, worst <= 1e-8, format!("max residual {worst:.2e}"));
}

#[test]
fn criterion_10_approximation_pipeline() {
    let mut ok = true;
    let mut details = Vec::new();
    let with_g = |mut b: BundleConfig| {
        b.g = Some(MetricDescriptor::FubiniStudy);
        b
    };
    let mut line = ExperimentConfig::new(StudyKind::Approximation, ManifoldKind::P1, vec![with_g(bundle_cfg(&[1], pole(&[1, 0])))], vec![4, 8, 16, 32, 48]);
    line.samples = 1;
    line.seed = 10;
    line.resolution = 64;
    let mut plane = ExperimentConfig::new(
        StudyKind::Approximation,
        ManifoldKind::P2,
        vec![with_g(bundle_cfg(&[1], pole(&[1, 0, 0]))), with_g(bundle_cfg(&[1], pole(&[0, 1, 0])))],
        vec![6, 12, 18, 24, 30],
    );
    plane.adjoint = Some(true);
    plane.seed = 10;
    plane.resolution = 24;
    for c in [line, plane] {
        let r = run_study(&c, &SpaceCache::default()).unwrap();
        ok &= r.flags["diagonal"].verdict == Verdict::Pass && r.flags["mass"].verdict == Verdict::Pass;
        details.push(format!("{} {}", c.manifold, flags(&r)));
    }
    report(10, ok, details.join("; "));
}

#[test]
fn criterion_11_determinism() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = dirs
        .iter()
        .map(|d| {
            let mut c = equidistribution_config(pole(&[1, 0]));
            c.serial = true;
            c.out = d.path().to_path_buf();
            let (_, files) = run_and_emit(&c).unwrap();
            (std::fs::read(files.csv).unwrap(), std::fs::read(files.json).unwrap())
        })
        .collect();
    let same = outputs[0] == outputs[1];
    report(11, same, format!("csv {} bytes, json {} bytes, identical: {same}", outputs[0].0.len(), outputs[0].1.len()));
}
