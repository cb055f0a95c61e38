//! Family-tag strings such as `bump c=0.5 r=0.3 scale=1` or `softcore a=0.5 r=0.1`.

use std::collections::BTreeMap;

use crate::calculus::{CylinderFunction, OuterFunction};
use crate::error::{Error, Result};
use crate::gibbs::{PairPotential, PotentialModel};
use crate::space::{Bump, IntensityModel, Point, Polynomial, SmoothTestFunction, SmoothVectorField, Window};

/// A parsed tag: family name, bare words and `key=value` pairs.
#[derive(Debug)]
pub struct Tag<'a> {
    key: &'a str,
    pub family: String,
    pub words: Vec<String>,
    params: BTreeMap<String, String>,
}

impl<'a> Tag<'a> {
    /// `key` names the config entry in error messages.
    pub fn parse(key: &'a str, text: &str) -> Result<Tag<'a>> {
        let mut it = text.split_whitespace();
        let Some(family) = it.next() else {
            return Err(err(key, "empty family tag"));
        };
        let mut words = Vec::new();
        let mut params = BTreeMap::new();
        for tok in it {
            match tok.split_once('=') {
                Some((k, v)) => {
                    if params.insert(k.to_string(), v.to_string()).is_some() {
                        return Err(err(key, format!("parameter `{k}` given twice")));
                    }
                }
                None => words.push(tok.to_string()),
            }
        }
        Ok(Tag {
            key,
            family: family.to_string(),
            words,
            params,
        })
    }

    fn fail(&self, msg: impl std::fmt::Display) -> Error {
        err(self.key, msg)
    }

    fn unknown_family(&self, what: &str) -> Error {
        self.fail(format!("unknown {what} family `{}`", self.family))
    }

    /// Rejects parameters outside `allowed`.
    fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(self.fail(format!("unknown parameter `{k}` for family `{}`", self.family)));
            }
        }
        Ok(())
    }

    fn raw(&self, name: &str) -> Result<&str> {
        self.params
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| self.fail(format!("family `{}` needs `{name}=`", self.family)))
    }

    fn num(&self, name: &str) -> Result<f64> {
        let v = self.raw(name)?;
        v.parse()
            .map_err(|_| self.fail(format!("`{name}={v}` is not a number")))
    }

    fn num_or(&self, name: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(name) {
            self.num(name)
        } else {
            Ok(default)
        }
    }

    fn list(&self, name: &str) -> Result<Vec<f64>> {
        let v = self.raw(name)?;
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| self.fail(format!("`{name}={v}` is not a comma-separated list of numbers")))
            })
            .collect()
    }

    fn point(&self, name: &str, dim: usize) -> Result<Point> {
        let xs = self.list(name)?;
        if xs.len() != dim {
            return Err(self.fail(format!("`{name}` needs {dim} coordinates, got {}", xs.len())));
        }
        Point::new(&xs).map_err(|e| self.fail(e))
    }

    fn usize(&self, name: &str, default: usize) -> Result<usize> {
        match self.params.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| self.fail(format!("`{name}={v}` is not a nonnegative integer"))),
        }
    }

    /// `lo=` / `hi=` box.
    fn window(&self, dim: usize) -> Result<Window> {
        let lo = self.point("lo", dim)?;
        let hi = self.point("hi", dim)?;
        Window::new(&lo, &hi).map_err(|e| self.fail(e))
    }

    /// `coeffs=a0,a1,..` (one dimension) or `terms=c@e1,e2;..`.
    fn polynomial(&self, dim: usize) -> Result<Polynomial> {
        if self.params.contains_key("coeffs") {
            if dim != 1 {
                return Err(self
                    .fail("`coeffs=` describes a univariate polynomial; use `terms=` in higher dimensions"));
            }
            return Polynomial::univariate(&self.list("coeffs")?).map_err(|e| self.fail(e));
        }
        let text = self.raw("terms")?;
        let mut terms = Vec::new();
        for t in text.split(';') {
            let (c, e) = t
                .split_once('@')
                .ok_or_else(|| self.fail(format!("monomial `{t}` should read `coefficient@e1,..,ed`")))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| self.fail(format!("bad coefficient in `{t}`")))?;
            let e: Vec<u32> = e
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| self.fail(format!("bad exponents in `{t}`")))?;
            terms.push((c, e));
        }
        Polynomial::new(dim, &terms).map_err(|e| self.fail(e))
    }
}

fn err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

pub fn parse_intensity(key: &str, text: &str, dim: usize) -> Result<IntensityModel> {
    let t = Tag::parse(key, text)?;
    let model = match t.family.as_str() {
        "constant" => {
            t.only(&["z"])?;
            IntensityModel::constant(t.num("z")?)
        }
        "expquad" => {
            t.only(&["z", "c", "alpha"])?;
            IntensityModel::exp_quadratic(t.num("z")?, t.point("c", dim)?, t.num("alpha")?)
        }
        "polynomial" => {
            t.only(&["lo", "hi", "coeffs", "terms"])?;
            IntensityModel::window_polynomial(t.polynomial(dim)?, t.window(dim)?)
        }
        "bump" => {
            t.only(&["base", "amplitude", "c", "r"])?;
            let bump = Bump::unit(t.point("c", dim)?, t.num("r")?).map_err(|e| t.fail(e))?;
            IntensityModel::bump_modulated(t.num("base")?, t.num("amplitude")?, bump)
        }
        _ => return Err(t.unknown_family("intensity")),
    };
    model.map_err(|e| t.fail(e))
}

pub fn parse_potential(key: &str, text: &str) -> Result<PotentialModel> {
    let t = Tag::parse(key, text)?;
    let pair = match t.family.as_str() {
        "zero" => {
            t.only(&[])?;
            Ok(PairPotential::Zero)
        }
        "hardcore" => {
            t.only(&["r0"])?;
            PairPotential::hard_core(t.num("r0")?)
        }
        "softcore" => {
            t.only(&["a", "r"])?;
            PairPotential::soft_core(t.num("a")?, t.num("r")?)
        }
        _ => return Err(t.unknown_family("potential")),
    };
    Ok(PotentialModel::new(pair.map_err(|e| t.fail(e))?))
}

/// Test functions may refer to functions defined earlier in `known` (for `sum`).
pub fn parse_function(
    key: &str,
    text: &str,
    dim: usize,
    known: &BTreeMap<String, SmoothTestFunction>,
) -> Result<SmoothTestFunction> {
    let t = Tag::parse(key, text)?;
    let f = match t.family.as_str() {
        "bump" => {
            t.only(&["c", "r", "scale"])?;
            SmoothTestFunction::bump(t.point("c", dim)?, t.num("r")?, t.num_or("scale", 1.0)?)
        }
        "polybump" => {
            t.only(&["c", "r", "scale", "coeffs", "terms"])?;
            let bump =
                Bump::new(t.point("c", dim)?, t.num("r")?, t.num_or("scale", 1.0)?).map_err(|e| t.fail(e))?;
            SmoothTestFunction::poly_bump(t.polynomial(dim)?, bump)
        }
        "polynomial" => {
            t.only(&["lo", "hi", "coeffs", "terms"])?;
            SmoothTestFunction::window_polynomial(t.polynomial(dim)?, t.window(dim)?)
        }
        "indicator" => {
            t.only(&["lo", "hi"])?;
            Ok(SmoothTestFunction::indicator(t.window(dim)?))
        }
        "sum" => {
            t.only(&[])?;
            let parts = refs(&t, known, "function")?;
            SmoothTestFunction::sum(parts)
        }
        _ => return Err(t.unknown_family("test function")),
    };
    let f = f.map_err(|e| t.fail(e))?;
    if f.dim() != dim {
        return Err(t.fail(format!(
            "function lives in dimension {}, the window in {dim}",
            f.dim()
        )));
    }
    Ok(f)
}

fn refs<T: Clone>(t: &Tag, known: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    if t.words.is_empty() {
        return Err(t.fail(format!("family `{}` needs at least one {what} name", t.family)));
    }
    t.words
        .iter()
        .map(|w| {
            known
                .get(w)
                .cloned()
                .ok_or_else(|| t.fail(format!("unknown {what} `{w}`")))
        })
        .collect()
}

pub fn parse_field(
    key: &str,
    text: &str,
    dim: usize,
    functions: &BTreeMap<String, SmoothTestFunction>,
) -> Result<SmoothVectorField> {
    let t = Tag::parse(key, text)?;
    let v = match t.family.as_str() {
        "zero" => {
            t.only(&[])?;
            Ok(SmoothVectorField::Zero { dim })
        }
        "along" => {
            t.only(&["axis"])?;
            let [phi] = one(&t, functions)?;
            SmoothVectorField::along(phi, t.usize("axis", 0)?)
        }
        "components" => {
            t.only(&[])?;
            SmoothVectorField::components(refs(&t, functions, "function")?)
        }
        "rotational" => {
            t.only(&[])?;
            let [phi] = one(&t, functions)?;
            SmoothVectorField::rotational(phi)
        }
        _ => return Err(t.unknown_family("vector field")),
    };
    let v = v.map_err(|e| t.fail(e))?;
    if v.dim() != dim {
        return Err(t.fail(format!(
            "field lives in dimension {}, the window in {dim}",
            v.dim()
        )));
    }
    Ok(v)
}

fn one(t: &Tag, functions: &BTreeMap<String, SmoothTestFunction>) -> Result<[SmoothTestFunction; 1]> {
    let v = refs(t, functions, "function")?;
    if v.len() != 1 {
        return Err(t.fail(format!("family `{}` takes exactly one function", t.family)));
    }
    Ok([v[0].clone()])
}

pub fn parse_cylinder(
    key: &str,
    text: &str,
    functions: &BTreeMap<String, SmoothTestFunction>,
) -> Result<CylinderFunction> {
    let t = Tag::parse(key, text)?;
    let inner = refs(&t, functions, "function")?;
    let n = inner.len();
    let coeffs = |t: &Tag| -> Result<Vec<f64>> {
        if t.params.contains_key("coeffs") {
            let c = t.list("coeffs")?;
            if c.len() != n {
                return Err(t.fail(format!("`coeffs` needs {n} entries")));
            }
            Ok(c)
        } else {
            Ok(vec![1.0; n])
        }
    };
    let outer = match t.family.as_str() {
        "constant" => {
            t.only(&["c"])?;
            OuterFunction::Constant(t.num("c")?)
        }
        "linear" => {
            t.only(&["coeffs", "offset"])?;
            OuterFunction::Linear {
                coeffs: coeffs(&t)?,
                offset: t.num_or("offset", 0.0)?,
            }
        }
        "product" => {
            t.only(&[])?;
            OuterFunction::Product { arity: n }
        }
        "polynomial" => {
            t.only(&["terms"])?;
            let text = t.raw("terms")?;
            let mut terms = Vec::new();
            for m in text.split(';') {
                let (c, e) = m
                    .split_once('@')
                    .ok_or_else(|| t.fail(format!("monomial `{m}` should read `coefficient@e1,..,en`")))?;
                let c: f64 = c
                    .trim()
                    .parse()
                    .map_err(|_| t.fail(format!("bad coefficient in `{m}`")))?;
                let e: Vec<u32> = e
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| t.fail(format!("bad exponents in `{m}`")))?;
                terms.push((c, e));
            }
            OuterFunction::Polynomial { arity: n, terms }
        }
        "tanh" => {
            t.only(&["coeffs", "offset"])?;
            OuterFunction::Tanh {
                coeffs: coeffs(&t)?,
                offset: t.num_or("offset", 0.0)?,
            }
        }
        "explinear" => {
            t.only(&["coeffs", "offset"])?;
            OuterFunction::ExpLinear {
                coeffs: coeffs(&t)?,
                offset: t.num_or("offset", 0.0)?,
            }
        }
        _ => return Err(t.unknown_family("cylinder function")),
    };
    CylinderFunction::new(inner, outer).map_err(|e| t.fail(e))
}
