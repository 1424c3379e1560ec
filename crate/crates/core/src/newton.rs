//! Convex polygon utilities shared by valuation computations and the
//! representation-data module.

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

/// A convex piecewise-linear polygon given by its vertices `(k, y_k)`.
///
/// Built as the lower convex hull of a point set; `y_0 = 0` for the
/// polygons derived from valuation or weight data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon {
    pub vertices: Vec<(i64, Rational)>,
}

impl Polygon {
    /// Lower convex hull of the prefix-sum points of `slopes`, with the
    /// slopes sorted increasingly first. `y_0 = 0`.
    pub fn from_slopes(slopes: &[Rational]) -> Polygon {
        let mut sorted = slopes.to_vec();
        sorted.sort();
        let mut vertices = vec![(0i64, Rational::from_integer(0))];
        let mut acc = Rational::from_integer(0);
        for (i, s) in sorted.iter().enumerate() {
            acc += *s;
            vertices.push((i as i64 + 1, acc));
        }
        Polygon { vertices }
    }

    /// Lower convex hull of arbitrary points (x strictly increasing).
    pub fn lower_hull(points: &[(i64, Rational)]) -> Polygon {
        let mut pts = points.to_vec();
        pts.sort_by_key(|&(x, _)| x);
        let mut hull: Vec<(i64, Rational)> = Vec::new();
        for &p in &pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // pop b if it lies on or above segment a-p
                let lhs = (b.1 - a.1) * Rational::from_integer(p.0 - a.0);
                let rhs = (p.1 - a.1) * Rational::from_integer(b.0 - a.0);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        Polygon { vertices: hull }
    }

    /// Value of the polygon at integer abscissa `x` (linear interpolation).
    pub fn value_at(&self, x: i64) -> Option<Rational> {
        for w in self.vertices.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x0 <= x && x <= x1 {
                if x0 == x1 {
                    return Some(y0);
                }
                let t = Rational::new(x - x0, x1 - x0);
                return Some(y0 + (y1 - y0) * t);
            }
        }
        self.vertices
            .iter()
            .find(|&&(vx, _)| vx == x)
            .map(|&(_, y)| y)
    }

    pub fn x_max(&self) -> i64 {
        self.vertices.last().map(|&(x, _)| x).unwrap_or(0)
    }

    /// Checks convexity (slopes non-decreasing) and `y_0 = 0`.
    pub fn is_valid(&self) -> bool {
        if self.vertices.first().map(|&(x, y)| (x, y)) != Some((0, Rational::from_integer(0))) {
            return false;
        }
        let mut prev_slope: Option<Rational> = None;
        for w in self.vertices.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x1 <= x0 {
                return false;
            }
            let s = (y1 - y0) / Rational::from_integer(x1 - x0);
            if let Some(ps) = prev_slope {
                if s < ps {
                    return false;
                }
            }
            prev_slope = Some(s);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn slopes_sorted_and_summed() {
        let poly = Polygon::from_slopes(&[r(3, 1), r(0, 1), r(1, 2)]);
        assert_eq!(poly.vertices[0], (0, r(0, 1)));
        assert_eq!(poly.vertices[1], (1, r(0, 1)));
        assert_eq!(poly.vertices[2], (2, r(1, 2)));
        assert_eq!(poly.vertices[3], (3, r(7, 2)));
        assert!(poly.is_valid());
    }

    #[test]
    fn hull_discards_interior_points() {
        let poly = Polygon::lower_hull(&[(0, r(0, 1)), (1, r(5, 1)), (2, r(1, 1))]);
        assert_eq!(poly.vertices, vec![(0, r(0, 1)), (2, r(1, 1))]);
    }

    #[test]
    fn value_interpolates() {
        let poly = Polygon::from_slopes(&[r(0, 1), r(2, 1)]);
        assert_eq!(poly.value_at(1), Some(r(0, 1)));
        assert_eq!(poly.value_at(2), Some(r(2, 1)));
    }
}
