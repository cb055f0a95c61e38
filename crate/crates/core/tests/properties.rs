use confspace::calculus::{
    carre, charlier, directional_derivative, intrinsic_gradient, poisson_gradient, CylinderFunction,
    OuterFunction, TangentVector,
};
use confspace::config::Configuration;
use confspace::gibbs::{EnergyValue, PairPotential, PotentialModel};
use confspace::space::{
    intensity_mass, l2_inner, IntensityModel, Point, SmoothTestFunction, SmoothVectorField, Window,
};
use proptest::prelude::*;

fn config_1d(max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(0.0f64..1.0, 0..max)
        .prop_filter_map("distinct points", |xs| Configuration::from_coords(&xs).ok())
}

fn config_2d(max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..max).prop_filter_map("distinct points", |xs| {
        Configuration::new(2, xs.into_iter().map(|(a, b)| Point::from([a, b])).collect()).ok()
    })
}

fn potential() -> impl Strategy<Value = PotentialModel> {
    prop_oneof![
        Just(PotentialModel::zero()),
        (0.01f64..0.2).prop_map(|r| PotentialModel::new(PairPotential::hard_core(r).unwrap())),
        (-1.0f64..2.0, 0.05f64..0.4)
            .prop_map(|(a, r)| PotentialModel::new(PairPotential::soft_core(a, r).unwrap())),
    ]
}

fn bump_1d() -> impl Strategy<Value = SmoothTestFunction> {
    (0.3f64..0.7, 0.05f64..0.3, -2.0f64..2.0).prop_map(|(c, r, s)| SmoothTestFunction::bump(c, r, s).unwrap())
}

fn model_1d() -> impl Strategy<Value = IntensityModel> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|z| IntensityModel::constant(z).unwrap()),
        (0.1f64..3.0, 0.0f64..1.0, 0.0f64..2.0)
            .prop_map(|(z, c, a)| IntensityModel::exp_quadratic(z, c, a).unwrap()),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// `e_k` of the values, by the usual one-pass recursion.
fn elementary_symmetric(vals: &[f64], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for v in vals {
        for k in (1..=n).rev() {
            e[k] += e[k - 1] * v;
        }
    }
    e
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn add_then_remove_is_identity(gamma in config_2d(12), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let p = Point::from([x, y]);
        prop_assume!(!gamma.contains(&p));
        let plus = gamma.add_point(p).unwrap();
        prop_assert_eq!(plus.len(), gamma.len() + 1);
        prop_assert!(plus.contains(&p));
        prop_assert_eq!(plus.remove_point(&p).unwrap(), gamma.clone());
        prop_assert!(plus.add_point(p).is_err());
    }

    #[test]
    fn counts_are_additive(gamma in config_1d(20), cut in 0.05f64..0.95) {
        prop_assume!(!gamma.iter().any(|x| x[0] == cut));
        let (a, b) = Window::unit(1).split(0, cut).unwrap();
        prop_assert_eq!(gamma.count(&a) + gamma.count(&b), gamma.count(&Window::unit(1)));
        prop_assert_eq!(gamma.restrict(&a).union(&gamma.restrict(&b)).unwrap(), gamma);
    }

    #[test]
    fn pairing_is_linear(gamma in config_1d(15), f in bump_1d(), g in bump_1d(), a in -3.0f64..3.0) {
        let sum = SmoothTestFunction::sum(vec![f.scaled(a), g.clone()]).unwrap();
        prop_assert!(close(gamma.pair(&sum), a * gamma.pair(&f) + gamma.pair(&g), 1e-12));
    }

    #[test]
    fn pair_potential_is_symmetric(pot in potential(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let (p, q) = (Point::from(x), Point::from(y));
        prop_assert_eq!(pot.pair.between(&p, &q), pot.pair.between(&q, &p));
        if (x - y).abs() >= pot.range() {
            prop_assert_eq!(pot.pair.between(&p, &q), EnergyValue::ZERO);
        }
    }

    #[test]
    fn hard_core_is_infinite_inside(r0 in 0.01f64..0.3, t in 0.0f64..1.0) {
        let pot = PairPotential::hard_core(r0).unwrap();
        let e = pot.between(&Point::from(0.5), &Point::from(0.5 + t * r0 * 0.999));
        prop_assert!(e.is_infinite());
        prop_assert_eq!(e.boltzmann(), 0.0);
    }

    #[test]
    fn energy_splits_over_a_window(pot in potential(), gamma in config_1d(12), cut in 0.1f64..0.9) {
        let (lam, rest) = Window::unit(1).split(0, cut).unwrap();
        prop_assume!(!gamma.iter().any(|x| x[0] == cut));
        let total = pot.total_energy(&gamma);
        let split = pot.conditional_energy(&gamma, &lam) + pot.total_energy(&gamma.restrict(&rest));
        match (total, split) {
            (EnergyValue::Finite(a), EnergyValue::Finite(b)) => prop_assert!(close(a, b, 1e-12)),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn local_energy_is_an_energy_difference(pot in potential(), gamma in config_1d(10), x in 0.0f64..1.0) {
        let p = Point::from(x);
        prop_assume!(!gamma.contains(&p));
        let local = pot.local_energy(&gamma, &p).unwrap();
        let before = pot.total_energy(&gamma);
        let after = pot.total_energy(&gamma.add_point(p).unwrap());
        if let (EnergyValue::Finite(b), EnergyValue::Finite(a)) = (before, after) {
            prop_assert!(close(local.to_f64(), a - b, 1e-12));
        } else if before.finite().is_some() {
            prop_assert!(local.is_infinite());
        }
    }

    #[test]
    fn l2_inner_is_symmetric_and_bilinear(m in model_1d(), f in bump_1d(), g in bump_1d(), h in bump_1d(), a in -2.0f64..2.0) {
        let w = Window::unit(1);
        let fg = l2_inner(&f, &g, &m, &w).unwrap();
        prop_assert!(close(fg, l2_inner(&g, &f, &m, &w).unwrap(), 1e-12));
        let comb = SmoothTestFunction::sum(vec![f.scaled(a), h.clone()]).unwrap();
        let lhs = l2_inner(&comb, &g, &m, &w).unwrap();
        let rhs = a * fg + l2_inner(&h, &g, &m, &w).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9));
        prop_assert!(l2_inner(&f, &f, &m, &w).unwrap() >= 0.0);
    }

    #[test]
    fn mass_is_additive(m in model_1d(), cut in 0.05f64..0.95) {
        let w = Window::unit(1);
        let (a, b) = w.split(0, cut).unwrap();
        let whole = intensity_mass(&m, &w).unwrap().value;
        let parts = intensity_mass(&m, &a).unwrap().value + intensity_mass(&m, &b).unwrap().value;
        prop_assert!(close(whole, parts, 1e-10));
    }

    #[test]
    fn carre_satisfies_cauchy_schwarz(gamma in config_1d(15), f in bump_1d(), g in bump_1d(), c in -1.0f64..1.0) {
        let ff = CylinderFunction::new(vec![f.clone()], OuterFunction::Tanh { coeffs: vec![1.0], offset: c }).unwrap();
        let gg = CylinderFunction::new(vec![f, g], OuterFunction::Product { arity: 2 }).unwrap();
        let fg = carre(&ff, &gg, &gamma);
        prop_assert!(fg * fg <= carre(&ff, &ff, &gamma) * carre(&gg, &gg, &gamma) * (1.0 + 1e-12) + 1e-300);
        prop_assert!(close(fg, carre(&gg, &ff, &gamma), 1e-12));
    }

    #[test]
    fn directional_derivative_is_gradient_against_field(gamma in config_1d(15), f in bump_1d(), g in bump_1d(), v in bump_1d()) {
        let cyl = CylinderFunction::new(vec![f, g], OuterFunction::Polynomial { arity: 2, terms: vec![(1.0, vec![2, 1]), (-0.5, vec![0, 1])] }).unwrap();
        let field = SmoothVectorField::along(v, 0).unwrap();
        let grad = intrinsic_gradient(&cyl, &gamma);
        let along = grad.inner(&TangentVector::from_field(&field, &gamma)).unwrap();
        prop_assert!(close(directional_derivative(&cyl, &field, &gamma), along, 1e-12));
    }

    #[test]
    fn poisson_gradient_product_rule(gamma in config_1d(12), f in bump_1d(), g in bump_1d(), x in 0.0f64..1.0) {
        let p = Point::from(x);
        prop_assume!(!gamma.contains(&p));
        let ff = CylinderFunction::new(vec![f], OuterFunction::Tanh { coeffs: vec![1.0], offset: 0.1 }).unwrap();
        let gg = CylinderFunction::new(vec![g], OuterFunction::ExpLinear { coeffs: vec![-1.0], offset: 0.0 }).unwrap();
        let prod = |c: &Configuration| ff.eval(c) * gg.eval(c);
        let df = poisson_gradient(&ff, &gamma, &p).unwrap();
        let dg = poisson_gradient(&gg, &gamma, &p).unwrap();
        let lhs = poisson_gradient(&prod, &gamma, &p).unwrap();
        let rhs = df * gg.eval(&gamma) + ff.eval(&gamma) * dg + df * dg;
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn charlier_matches_combinatorial_expansion(gamma in config_1d(10), f in bump_1d(), m in model_1d(), n in 0usize..5) {
        // Q_n = sum_k C(n,k) (-<sigma,phi>)^{n-k} k! e_k(phi(x_1), ..., phi(x_N))
        let w = Window::unit(1);
        let s = confspace::space::sigma_pairing(&f, &m, &w).unwrap();
        let vals: Vec<f64> = gamma.iter().map(|x| f.value(x)).collect();
        let e = elementary_symmetric(&vals, n);
        let expected: f64 = (0..=n).map(|k| binom(n, k) * (-s).powi((n - k) as i32) * factorial(k) * e[k]).sum();
        let got = charlier(n, &f, &m, &w, &gamma).unwrap();
        prop_assert!(close(got, expected, 1e-10), "Q_{} = {} vs {}", n, got, expected);
    }
}
