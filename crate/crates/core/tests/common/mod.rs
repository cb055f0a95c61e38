//! Finite-difference helpers and the catalog of shipped objects, shared by
//! `tests/derivatives.rs` and the acceptance target.

#![allow(dead_code)]

use confspace::calculus::OuterFunction;
use confspace::space::{
    Bump, IntensityModel, Point, Polynomial, SmoothTestFunction, SmoothVectorField, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_POINTS: usize = 100;
pub const FD_TOLERANCE: f64 = 1e-5;

/// Five-point central difference of `f` along `e` at `x`.
pub fn diff(f: impl Fn(&Point) -> f64, x: &Point, e: &Point, h: f64) -> f64 {
    let at = |t: f64| f(&(*x + *e * t));
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

fn diff_scalar(f: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (-f(s + 2.0 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2.0 * h)) / (12.0 * h)
}

/// Error of `approx` against `exact`, relative to `max(|exact|, scale)`.
pub fn rel(approx: f64, exact: f64, scale: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(scale)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A point drawn uniformly from the ball of radius `r` around `c`.
pub fn in_ball(rng: &mut ChaCha8Rng, c: &Point, r: f64) -> Point {
    let d = c.dim();
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = Point::from_slice(&u);
        if p.norm_sq() < 1.0 {
            return *c + p * r;
        }
    }
}

pub fn in_box(rng: &mut ChaCha8Rng, w: &Window) -> Point {
    let u: Vec<f64> = (0..w.dim()).map(|_| rng.random::<f64>()).collect();
    w.from_unit(&u)
}

pub struct Named<T> {
    pub name: String,
    pub object: T,
    /// Points are drawn from here.
    pub domain: Domain,
}

pub enum Domain {
    Ball(Point, f64),
    Box(Window),
}

impl Domain {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Point {
        match self {
            Domain::Ball(c, r) => in_ball(rng, c, *r),
            Domain::Box(w) => in_box(rng, w),
        }
    }

    fn length(&self) -> f64 {
        match self {
            Domain::Ball(_, r) => *r,
            Domain::Box(w) => (0..w.dim()).map(|i| w.side(i)).fold(f64::INFINITY, f64::min),
        }
    }
}

fn named<T>(name: &str, object: T, domain: Domain) -> Named<T> {
    Named {
        name: name.into(),
        object,
        domain,
    }
}

fn p(c: &[f64]) -> Point {
    Point::from_slice(c)
}

/// Every test-function family the crate ships, in dimensions 1 to 3.
pub fn shipped_functions() -> Vec<Named<SmoothTestFunction>> {
    let mut out = Vec::new();
    for (d, c) in [(1, vec![0.5]), (2, vec![0.5, 0.4]), (3, vec![0.5, 0.5, 0.6])] {
        let c = p(&c);
        let r = 0.3;
        let bump = SmoothTestFunction::bump(c, r, 1.5).unwrap();
        out.push(named(
            &format!("bump d={d}"),
            bump.clone(),
            Domain::Ball(c, 0.97 * r),
        ));
        let mut terms = vec![(1.0, vec![0; d]), (-2.0, vec![1; d])];
        terms.push((0.5, (0..d).map(|i| if i == 0 { 2 } else { 0 }).collect()));
        let poly = Polynomial::new(d, &terms).unwrap();
        let pb = SmoothTestFunction::poly_bump(poly.clone(), Bump::new(c, r, 1.0).unwrap()).unwrap();
        out.push(named(
            &format!("polybump d={d}"),
            pb.clone(),
            Domain::Ball(c, 0.97 * r),
        ));
        let support = Window::cube(&c, 0.25).unwrap();
        let wp = SmoothTestFunction::window_polynomial(poly, support).unwrap();
        let inner = support.shrink(0.01).unwrap();
        out.push(named(&format!("window polynomial d={d}"), wp, Domain::Box(inner)));
        let other = SmoothTestFunction::bump(c + Point::unit(d, 0) * 0.1, 0.2, -0.7).unwrap();
        let sum = SmoothTestFunction::sum(vec![bump, pb, other]).unwrap();
        out.push(named(&format!("sum d={d}"), sum, Domain::Ball(c, 0.97 * r)));
    }
    out
}

pub fn shipped_fields() -> Vec<Named<SmoothVectorField>> {
    let mut out = Vec::new();
    for f in shipped_functions() {
        let d = f.object.dim();
        if !f.object.is_smooth() {
            continue;
        }
        let along = SmoothVectorField::along(f.object.clone(), d - 1).unwrap();
        out.push(named(
            &format!("along {}", f.name),
            along,
            clone_domain(&f.domain),
        ));
        let parts = (0..d).map(|i| f.object.scaled(1.0 + i as f64)).collect();
        let comps = SmoothVectorField::components(parts).unwrap();
        out.push(named(
            &format!("components {}", f.name),
            comps,
            clone_domain(&f.domain),
        ));
        if d == 2 {
            let rot = SmoothVectorField::rotational(f.object.clone()).unwrap();
            out.push(named(
                &format!("rotational {}", f.name),
                rot,
                clone_domain(&f.domain),
            ));
        }
    }
    out
}

fn clone_domain(d: &Domain) -> Domain {
    match d {
        Domain::Ball(c, r) => Domain::Ball(*c, *r),
        Domain::Box(w) => Domain::Box(*w),
    }
}

pub fn shipped_outer() -> Vec<(String, OuterFunction)> {
    vec![
        ("constant".into(), OuterFunction::Constant(2.5)),
        (
            "linear".into(),
            OuterFunction::Linear {
                coeffs: vec![1.0, -2.0, 0.5],
                offset: 0.3,
            },
        ),
        ("product".into(), OuterFunction::Product { arity: 3 }),
        (
            "polynomial".into(),
            OuterFunction::Polynomial {
                arity: 3,
                terms: vec![(1.0, vec![2, 0, 1]), (-0.5, vec![1, 1, 0]), (0.25, vec![0, 0, 3])],
            },
        ),
        (
            "tanh".into(),
            OuterFunction::Tanh {
                coeffs: vec![1.0, -0.5, 0.3],
                offset: 0.2,
            },
        ),
        (
            "explinear".into(),
            OuterFunction::ExpLinear {
                coeffs: vec![-0.5, -1.0, 0.2],
                offset: 0.1,
            },
        ),
    ]
}

pub fn shipped_intensities() -> Vec<Named<IntensityModel>> {
    let w = |d: usize| Window::unit(d);
    let mut out = Vec::new();
    for d in 1..=3 {
        let c: Vec<f64> = (0..d).map(|i| 0.4 + 0.1 * i as f64).collect();
        out.push(named(
            &format!("constant d={d}"),
            IntensityModel::constant(1.5).unwrap(),
            Domain::Box(w(d)),
        ));
        out.push(named(
            &format!("expquad d={d}"),
            IntensityModel::exp_quadratic(1.5, p(&c), 1.0).unwrap(),
            Domain::Box(w(d)),
        ));
        let bump = Bump::new(p(&c), 0.3, 1.0).unwrap();
        out.push(named(
            &format!("bump modulated d={d}"),
            IntensityModel::bump_modulated(1.0, 2.0, bump).unwrap(),
            Domain::Ball(p(&c), 0.97 * 0.3),
        ));
    }
    let poly = Polynomial::univariate(&[0.5, 1.0, 2.0]).unwrap();
    out.push(named(
        "polynomial d=1",
        IntensityModel::window_polynomial(poly, w(1)).unwrap(),
        Domain::Box(w(1).shrink(0.01).unwrap()),
    ));
    out
}

/// Worst relative error of one derivative contract over `FD_POINTS` points.
#[derive(Debug, Clone)]
pub struct Contract {
    pub object: String,
    pub what: &'static str,
    pub max_rel: f64,
}

impl Contract {
    pub fn holds(&self) -> bool {
        self.max_rel <= FD_TOLERANCE
    }
}

fn worst(object: &str, what: &'static str, errs: impl Iterator<Item = f64>) -> Contract {
    Contract {
        object: object.into(),
        what,
        max_rel: errs.fold(0.0, f64::max),
    }
}

/// Gradient against differences of the value, Laplacian against
/// differences of the gradient.
///
/// Errors are relative to `max(|exact|, 1e-3 * sup|f| / r^k)` for a `k`-th
/// derivative, `r` being the size of the sampling domain.
pub fn function_contracts(f: &Named<SmoothTestFunction>, seed: u64) -> Vec<Contract> {
    let mut rng = rng(seed);
    let d = f.object.dim();
    let r = f.domain.length();
    let h = 2.5e-4 * r;
    let sup = f.object.sup_abs().max(1e-300);
    let (mut g, mut l) = (Vec::new(), Vec::new());
    for _ in 0..FD_POINTS {
        let x = f.domain.draw(&mut rng);
        let jet = f.object.jet(&x);
        let mut lap = 0.0;
        for i in 0..d {
            let e = Point::unit(d, i);
            let fd = diff(|y| f.object.value(y), &x, &e, h);
            g.push(rel(fd, jet.gradient[i], 1e-3 * sup / r));
            lap += diff(|y| f.object.gradient(y)[i], &x, &e, h);
        }
        l.push(rel(lap, jet.laplacian, 1e-3 * sup / (r * r)));
    }
    vec![
        worst(&f.name, "gradient", g.into_iter()),
        worst(&f.name, "laplacian", l.into_iter()),
    ]
}

pub fn field_contracts(v: &Named<SmoothVectorField>, seed: u64) -> Vec<Contract> {
    let mut rng = rng(seed);
    let d = v.object.dim();
    let r = v.domain.length();
    let h = 2.5e-4 * r;
    let mut errs = Vec::new();
    let mut scale = 0.0f64;
    let pts: Vec<Point> = (0..FD_POINTS).map(|_| v.domain.draw(&mut rng)).collect();
    for x in &pts {
        scale = scale.max(v.object.value(x).norm());
    }
    for x in &pts {
        let fd: f64 = (0..d)
            .map(|i| diff(|y| v.object.value(y)[i], x, &Point::unit(d, i), h))
            .sum();
        errs.push(rel(fd, v.object.divergence(x), 1e-3 * scale / r));
    }
    vec![worst(&v.name, "divergence", errs.into_iter())]
}

/// Gradient and Hessian of an outer function against differences, at
/// arguments drawn from `[-1.5, 1.5]^3`.
pub fn outer_contracts(name: &str, g: &OuterFunction, seed: u64) -> Vec<Contract> {
    let mut rng = rng(seed);
    let n = g.arity().unwrap_or(3);
    let h = 1e-3;
    let (mut ge, mut he) = (Vec::new(), Vec::new());
    for _ in 0..FD_POINTS {
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let j = g.jet(&s);
        let scale = 1e-3 * (1.0 + j.value.abs());
        for i in 0..n {
            let along = |t: f64| {
                let mut u = s.clone();
                u[i] = t;
                u
            };
            let fd = diff_scalar(|t| g.value(&along(t)), s[i], h);
            ge.push(rel(fd, j.grad[i], scale));
            for l in 0..n {
                let fd = diff_scalar(|t| g.jet(&along(t)).grad[l], s[i], h);
                he.push(rel(fd, j.hess[i][l], scale));
            }
        }
    }
    vec![
        worst(name, "gradient", ge.into_iter()),
        worst(name, "hessian", he.into_iter()),
    ]
}

pub fn intensity_contracts(m: &Named<IntensityModel>, seed: u64) -> Vec<Contract> {
    let mut rng = rng(seed);
    let d = match &m.domain {
        Domain::Ball(c, _) => c.dim(),
        Domain::Box(w) => w.dim(),
    };
    let r = m.domain.length();
    let h = 2.5e-4 * r;
    let (mut ge, mut be) = (Vec::new(), Vec::new());
    for _ in 0..FD_POINTS {
        let x = m.domain.draw(&mut rng);
        let rho = m.object.density(&x);
        let grad = m.object.gradient(&x);
        let beta = m.object.log_derivative(&x);
        for i in 0..d {
            let e = Point::unit(d, i);
            let fd = diff(|y| m.object.density(y), &x, &e, h);
            ge.push(rel(fd, grad[i], 1e-3 * rho / r));
            let fd = diff(|y| m.object.density(y).ln(), &x, &e, h);
            be.push(rel(fd, beta[i], 1e-3 / r));
        }
    }
    vec![
        worst(&m.name, "gradient", ge.into_iter()),
        worst(&m.name, "log derivative", be.into_iter()),
    ]
}

/// Every derivative contract of every shipped object.
pub fn all_contracts() -> Vec<Contract> {
    let mut out = Vec::new();
    for (i, f) in shipped_functions().iter().enumerate() {
        out.extend(function_contracts(f, 100 + i as u64));
    }
    for (i, v) in shipped_fields().iter().enumerate() {
        out.extend(field_contracts(v, 200 + i as u64));
    }
    for (i, (name, g)) in shipped_outer().iter().enumerate() {
        out.extend(outer_contracts(name, g, 300 + i as u64));
    }
    for (i, m) in shipped_intensities().iter().enumerate() {
        out.extend(intensity_contracts(m, 400 + i as u64));
    }
    out
}
