use confspace::gibbs::{PairPotential, PotentialModel};
use confspace::space::{l2_inner, sigma_pairing, Breaks, IntensityModel, Point, SmoothTestFunction, Window};
use confspace::verify::{oracle_expectation, BoundedFn, OracleConfig, OracleFunctional, PointCount};

fn phi() -> SmoothTestFunction {
    SmoothTestFunction::bump(0.5, 0.3, 1.0).unwrap()
}

fn q1_squared(phi: &SmoothTestFunction, s: f64) -> impl OracleFunctional + '_ {
    let sup = phi.sup_abs();
    let mut b = Breaks::new(1);
    phi.breakpoints(&mut b);
    BoundedFn::new(
        move |pts: &[Point]| {
            let q = pts.iter().map(|x| phi.value(x)).sum::<f64>() - s;
            q * q
        },
        move |k| (k as f64 * sup + s.abs()).powi(2),
    )
    .with_breaks(b)
}

#[test]
fn q1_second_moment_matches_norm() {
    let rho = IntensityModel::constant(0.4).unwrap();
    let w = Window::unit(1);
    let phi = phi();
    let s = sigma_pairing(&phi, &rho, &w).unwrap();
    let norm = l2_inner(&phi, &phi, &rho, &w).unwrap();
    let t = std::time::Instant::now();
    let r = oracle_expectation(
        &q1_squared(&phi, s),
        &rho,
        None,
        &w,
        &OracleConfig::default().with_n_max(8),
    )
    .unwrap();
    eprintln!(
        "value {} norm {} diff {:e} tail {:e} in {:?}",
        r.value,
        norm,
        r.value - norm,
        r.tail_bound,
        t.elapsed()
    );
    assert!((r.value - norm).abs() < 1e-7);
    assert!(r.tail_bound < 1e-7);
}

#[test]
fn hard_core_count_is_stable_under_refinement() {
    let rho = IntensityModel::constant(0.4).unwrap();
    let w = Window::unit(1);
    let m = PotentialModel::new(PairPotential::hard_core(0.3).unwrap());
    let cfg = OracleConfig::default();
    let a = oracle_expectation(&PointCount, &rho, Some(&m), &w, &cfg).unwrap();
    let b = oracle_expectation(&PointCount, &rho, Some(&m), &w, &cfg.refined()).unwrap();
    eprintln!("{} {} tail {:e}", a.value, b.value, a.tail_bound);
    assert!((a.value - b.value).abs() < 1e-10);
    assert!(a.tail_bound < 1e-6);
    assert!(!a.inconclusive);
}

/// Ordered hard-core configurations of `k` points on `[0, 1]` occupy a simplex
/// of volume `(1 - (k-1) r0)^k / k!`.
fn hard_core_mean_count(z: f64, r0: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    let mut fact = 1.0;
    for k in 0..20 {
        if k > 0 {
            fact *= k as f64;
        }
        let free = 1.0 - (k as f64 - 1.0).max(0.0) * r0;
        if free <= 0.0 {
            break;
        }
        let t = z.powi(k) * free.powi(k) / fact;
        num += k as f64 * t;
        den += t;
    }
    num / den
}

#[test]
fn hard_core_count_matches_simplex_volumes() {
    let rho = IntensityModel::constant(0.4).unwrap();
    let w = Window::unit(1);
    let m = PotentialModel::new(PairPotential::hard_core(0.3).unwrap());
    let r = oracle_expectation(&PointCount, &rho, Some(&m), &w, &OracleConfig::default()).unwrap();
    assert!((r.value - hard_core_mean_count(0.4, 0.3)).abs() < 1e-12);
}

#[test]
fn one_more_term_stays_within_tail_bound() {
    let rho = IntensityModel::constant(0.4).unwrap();
    let w = Window::unit(1);
    let soft = PotentialModel::new(PairPotential::soft_core(0.8, 0.2).unwrap());
    for pot in [None, Some(&soft)] {
        for n in 3..7 {
            let a = oracle_expectation(&PointCount, &rho, pot, &w, &OracleConfig::default().with_n_max(n))
                .unwrap();
            let b = oracle_expectation(
                &PointCount,
                &rho,
                pot,
                &w,
                &OracleConfig::default().with_n_max(n + 1),
            )
            .unwrap();
            assert!(
                (a.value - b.value).abs() <= a.tail_bound,
                "n_max {n}: {} vs {} (tail {})",
                a.value,
                b.value,
                a.tail_bound
            );
        }
    }
}

#[test]
fn soft_core_refines() {
    let rho = IntensityModel::constant(0.5).unwrap();
    let w = Window::unit(1);
    let soft = PotentialModel::new(PairPotential::soft_core(1.0, 0.25).unwrap());
    let cfg = OracleConfig::default();
    let a = oracle_expectation(&PointCount, &rho, Some(&soft), &w, &cfg).unwrap();
    let b = oracle_expectation(&PointCount, &rho, Some(&soft), &w, &cfg.refined()).unwrap();
    assert!((a.value - b.value).abs() < 1e-5, "{} {}", a.value, b.value);
    assert!(a.value < 0.5);
}

#[test]
fn laplace_functional_in_two_dimensions() {
    // E exp(-<gamma, psi>) = exp(int (e^{-psi} - 1) d sigma)
    let rho = IntensityModel::constant(0.3).unwrap();
    let w = Window::unit(2);
    let psi = SmoothTestFunction::bump(Point::new(&[0.5, 0.5]).unwrap(), 0.4, 1.0).unwrap();
    let mut b = Breaks::new(2);
    psi.breakpoints(&mut b);
    let f = BoundedFn::new(
        |pts: &[Point]| (-pts.iter().map(|x| psi.value(x)).sum::<f64>()).exp(),
        |_| 1.0,
    )
    .with_breaks(b.clone());
    let cfg = OracleConfig {
        n_max: 5,
        orders: vec![12, 6, 3, 2, 1],
        ..Default::default()
    };
    let r = oracle_expectation(&f, &rho, None, &w, &cfg).unwrap();
    let exponent = confspace::space::Integrator::default()
        .integrate(&w, &b, |x| ((-psi.value(x)).exp() - 1.0) * 0.3)
        .unwrap()
        .value;
    assert!(
        (r.value - exponent.exp()).abs() < 1e-4 + r.tail_bound,
        "{} vs {}",
        r.value,
        exponent.exp()
    );
}
