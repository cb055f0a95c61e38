use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use crate::error::{precondition, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point (or tangent vector) of `R^d` with `1 <= d <= 3`.
///
/// Stored inline so that points are `Copy` and never allocate. Unused
/// trailing coordinates are kept at zero, which makes the derived
/// equality agree with coordinate-wise equality.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

/// Tangent vectors share the representation of points.
pub type Vector = Point;

impl Point {
    pub fn new(coords: &[f64]) -> Result<Point> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return precondition(format!(
                "point dimension must be 1..={MAX_DIM}, got {}",
                coords.len()
            ));
        }
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            coords: c,
            dim: coords.len() as u8,
        })
    }

    /// Panics on a bad dimension; for literals in tests and examples.
    pub fn from_slice(coords: &[f64]) -> Point {
        Point::new(coords).expect("point dimension must be 1..=3")
    }

    pub fn zero(dim: usize) -> Point {
        assert!((1..=MAX_DIM).contains(&dim), "bad dimension {dim}");
        Point {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Point {
        let mut p = Point::zero(dim);
        p.coords[axis] = 1.0;
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.coords[0] * other.coords[0] + self.coords[1] * other.coords[1] + self.coords[2] * other.coords[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point) -> f64 {
        (*self - *other).norm_sq()
    }

    /// Copy with coordinate `axis` replaced.
    #[inline]
    pub fn with_coord(mut self, axis: usize, value: f64) -> Point {
        self.coords[axis] = value;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }

    /// Lexicographic total order on coordinates.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.iter().zip(other.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.dim.cmp(&other.dim)
    }
}

impl Deref for Point {
    type Target = [f64];

    #[inline]
    fn deref(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Point {
        Point::from_slice(&[x])
    }
}

impl From<[f64; 2]> for Point {
    fn from(x: [f64; 2]) -> Point {
        Point::from_slice(&x)
    }
}

impl From<[f64; 3]> for Point {
    fn from(x: [f64; 3]) -> Point {
        Point::from_slice(&x)
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        for i in 0..MAX_DIM {
            self.coords[i] += rhs.coords[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        for i in 0..MAX_DIM {
            self.coords[i] -= rhs.coords[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, rhs: f64) -> Point {
        for c in self.coords.iter_mut() {
            *c *= rhs;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        self * -1.0
    }
}

/// A closed axis-aligned box `[lower, upper]` in `R^d`.
///
/// Used both as the observation window and as the support box of
/// test functions.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Window {
    lower: Point,
    upper: Point,
}

impl Window {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Window> {
        if lower.len() != upper.len() {
            return precondition("window corners have different dimensions");
        }
        let lo = Point::new(lower)?;
        let hi = Point::new(upper)?;
        for (a, b) in lo.iter().zip(hi.iter()) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return precondition(format!("degenerate window interval [{a}, {b}]"));
            }
        }
        Ok(Window { lower: lo, upper: hi })
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(dim: usize) -> Window {
        let lo = vec![0.0; dim];
        let hi = vec![1.0; dim];
        Window::new(&lo, &hi).expect("unit cube")
    }

    /// `[a, b]` in one dimension.
    pub fn interval(a: f64, b: f64) -> Result<Window> {
        Window::new(&[a], &[b])
    }

    /// Cube of half-width `r` around `c` (no validation of `r > 0` beyond the constructor's).
    pub fn cube(center: &Point, r: f64) -> Result<Window> {
        let lo: Vec<f64> = center.iter().map(|c| c - r).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + r).collect();
        Window::new(&lo, &hi)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn center(&self) -> Point {
        (self.lower + self.upper) * 0.5
    }

    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        debug_assert_eq!(x.dim(), self.dim());
        x.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(c, (lo, hi))| *lo <= *c && *c <= *hi)
    }

    pub fn contains_box(&self, other: &Window) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Intersection, or `None` when it has empty interior.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        if self.dim() != other.dim() {
            return None;
        }
        let lo: Vec<f64> = (0..self.dim())
            .map(|i| self.lower[i].max(other.lower[i]))
            .collect();
        let hi: Vec<f64> = (0..self.dim())
            .map(|i| self.upper[i].min(other.upper[i]))
            .collect();
        Window::new(&lo, &hi).ok()
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Window) -> Window {
        let lo: Vec<f64> = (0..self.dim())
            .map(|i| self.lower[i].min(other.lower[i]))
            .collect();
        let hi: Vec<f64> = (0..self.dim())
            .map(|i| self.upper[i].max(other.upper[i]))
            .collect();
        Window::new(&lo, &hi).expect("hull of valid boxes")
    }

    /// Box shrunk by `margin` on every side, or `None` if nothing is left.
    pub fn shrink(&self, margin: f64) -> Option<Window> {
        let lo: Vec<f64> = self.lower.iter().map(|c| c + margin).collect();
        let hi: Vec<f64> = self.upper.iter().map(|c| c - margin).collect();
        Window::new(&lo, &hi).ok()
    }

    /// Split into two boxes at `cut` along `axis`.
    pub fn split(&self, axis: usize, cut: f64) -> Result<(Window, Window)> {
        if !(self.lower[axis] < cut && cut < self.upper[axis]) {
            return precondition("split point outside the window interior");
        }
        let left = Window {
            lower: self.lower,
            upper: self.upper.with_coord(axis, cut),
        };
        let right = Window {
            lower: self.lower.with_coord(axis, cut),
            upper: self.upper,
        };
        Ok((left, right))
    }

    /// Affine image of `u in [0,1]^d`.
    pub fn from_unit(&self, u: &[f64]) -> Point {
        let mut p = self.lower;
        for (i, ui) in u.iter().enumerate().take(self.dim()) {
            p = p.with_coord(i, self.lower[i] + ui * self.side(i));
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_rejects_degenerate_intervals() {
        assert!(Window::new(&[0.0], &[0.0]).is_err());
        assert!(Window::new(&[1.0, 0.0], &[0.0, 1.0]).is_err());
        assert!(Window::new(&[0.0], &[f64::INFINITY]).is_err());
        assert!(Window::new(&[0.0, 0.0, 0.0, 0.0], &[1.0; 4]).is_err());
    }

    #[test]
    fn volume_and_split() {
        let w = Window::new(&[0.0, -1.0], &[2.0, 1.0]).unwrap();
        assert_eq!(w.volume(), 4.0);
        let (a, b) = w.split(1, 0.5).unwrap();
        assert_eq!(a.volume() + b.volume(), 4.0);
        assert!(w.split(0, 2.0).is_err());
    }

    #[test]
    fn intersect_and_shrink() {
        let a = Window::interval(0.0, 1.0).unwrap();
        let b = Window::interval(0.5, 2.0).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), Window::interval(0.5, 1.0).unwrap());
        assert!(a.intersect(&Window::interval(1.0, 2.0).unwrap()).is_none());
        assert!(a.shrink(0.5).is_none());
        assert_eq!(a.shrink(0.25).unwrap(), Window::interval(0.25, 0.75).unwrap());
    }

    #[test]
    fn lex_order() {
        let a = Point::from([0.1, 0.9]);
        let b = Point::from([0.2, 0.0]);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(b.lex_cmp(&b), Ordering::Equal);
    }
}
