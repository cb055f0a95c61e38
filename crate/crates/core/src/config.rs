//! Finite configurations and their elementary functionals.

use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use crate::error::{precondition, Error, Result};
use crate::space::{Point, SmoothTestFunction, Window};

/// A finite set of distinct points of `R^d`, kept in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    points: Vec<Point>,
}

impl Eq for Configuration {}

impl Hash for Configuration {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dim.hash(state);
        for p in &self.points {
            for c in p.iter() {
                c.to_bits().hash(state);
            }
        }
    }
}

impl Configuration {
    pub fn empty(dim: usize) -> Configuration {
        Configuration {
            dim,
            points: Vec::new(),
        }
    }

    /// Sorts the points; rejects duplicates, non-finite coordinates and mixed dimensions.
    pub fn new(dim: usize, mut points: Vec<Point>) -> Result<Configuration> {
        for p in &points {
            if p.dim() != dim {
                return precondition(format!(
                    "point {p:?} has dimension {}, configuration has {dim}",
                    p.dim()
                ));
            }
            if !p.is_finite() {
                return precondition(format!("non-finite point {p:?}"));
            }
        }
        points.sort_by(|a, b| a.lex_cmp(b));
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return precondition(format!("duplicate point {:?}", w[0]));
        }
        Ok(Configuration { dim, points })
    }

    /// One-dimensional configuration from coordinates.
    pub fn from_coords(xs: &[f64]) -> Result<Configuration> {
        Configuration::new(1, xs.iter().map(|&x| Point::from(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    fn locate(&self, x: &Point) -> std::result::Result<usize, usize> {
        self.points.binary_search_by(|p| p.lex_cmp(x))
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.locate(x).is_ok()
    }

    /// `<gamma, phi> = sum of phi over the points`.
    pub fn pair(&self, phi: &SmoothTestFunction) -> f64 {
        self.points.iter().map(|x| phi.value(x)).sum()
    }

    /// `N_B(gamma)`.
    pub fn count(&self, b: &Window) -> usize {
        self.points.iter().filter(|x| b.contains(x)).count()
    }

    /// `gamma + eps_x`.
    pub fn add_point(&self, x: Point) -> Result<Configuration> {
        let mut out = self.clone();
        out.insert(x)?;
        Ok(out)
    }

    /// `gamma - eps_x`.
    pub fn remove_point(&self, x: &Point) -> Result<Configuration> {
        let mut out = self.clone();
        out.remove(x)?;
        Ok(out)
    }

    /// In-place `gamma + eps_x`.
    pub fn insert(&mut self, x: Point) -> Result<()> {
        if x.dim() != self.dim {
            return precondition("point dimension differs from configuration dimension");
        }
        if !x.is_finite() {
            return precondition(format!("non-finite point {x:?}"));
        }
        match self.locate(&x) {
            Ok(_) => precondition(format!("point {x:?} already in the configuration")),
            Err(i) => {
                self.points.insert(i, x);
                Ok(())
            }
        }
    }

    /// In-place `gamma - eps_x`.
    pub fn remove(&mut self, x: &Point) -> Result<()> {
        match self.locate(x) {
            Ok(i) => {
                self.points.remove(i);
                Ok(())
            }
            Err(_) => precondition(format!("point {x:?} not in the configuration")),
        }
    }

    /// Removes the `i`-th point in canonical order.
    pub fn remove_index(&mut self, i: usize) -> Point {
        self.points.remove(i)
    }

    /// Configuration without its `i`-th point.
    pub fn without(&self, i: usize) -> Configuration {
        let mut out = self.clone();
        out.points.remove(i);
        out
    }

    /// Points restricted to `b`.
    pub fn restrict(&self, b: &Window) -> Configuration {
        Configuration {
            dim: self.dim,
            points: self.points.iter().filter(|x| b.contains(x)).copied().collect(),
        }
    }

    /// Union with a disjoint configuration.
    pub fn union(&self, other: &Configuration) -> Result<Configuration> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Configuration::new(self.dim, pts)
    }

    /// CSV rows `x1,...,xd`, one per point, in canonical order.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            for (i, c) in p.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{c:?}").expect("writing to a string");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(dim: usize, text: &str) -> Result<Configuration> {
        let mut pts = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let coords: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let coords = coords.map_err(|e| Error::Config(format!("line {}: {e}", line_no + 1)))?;
            pts.push(Point::new(&coords)?);
        }
        Configuration::new(dim, pts)
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Polynomial;

    fn identity_on_unit() -> SmoothTestFunction {
        SmoothTestFunction::window_polynomial(Polynomial::univariate(&[0.0, 1.0]).unwrap(), Window::unit(1))
            .unwrap()
    }

    #[test]
    fn pair_and_count() {
        let g = Configuration::from_coords(&[0.2, 0.5]).unwrap();
        assert_eq!(g.pair(&identity_on_unit()), 0.7);
        assert_eq!(Configuration::empty(1).pair(&identity_on_unit()), 0.0);
        let h = Configuration::from_coords(&[0.1, 0.9]).unwrap();
        assert_eq!(h.count(&Window::interval(0.0, 0.5).unwrap()), 1);
        assert_eq!(h.count(&Window::unit(1)), 2);
    }

    #[test]
    fn add_remove() {
        let g = Configuration::from_coords(&[0.3, 0.1]).unwrap();
        let x = Point::from(0.2);
        let h = g.add_point(x).unwrap();
        assert_eq!(h.points()[1], x);
        assert_eq!(h.remove_point(&x).unwrap(), g);
        assert!(g.add_point(Point::from(0.1)).is_err());
        assert!(g.remove_point(&x).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        assert!(Configuration::from_coords(&[0.5, 0.5]).is_err());
        assert!(Configuration::from_coords(&[f64::NAN]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Configuration::new(2, vec![Point::from([0.5, 0.25]), Point::from([0.1, 1.0 / 3.0])]).unwrap();
        let text = g.to_csv();
        assert!(text.starts_with("0.1,"));
        assert_eq!(Configuration::from_csv(2, &text).unwrap(), g);
    }
}
