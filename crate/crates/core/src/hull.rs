//! Upper-right boundary of the convex hull of a down-closed set of rate pairs.
//!
//! Rate regions here are closed under lowering either rate and under time
//! sharing, so a finite set of achievable (or bounding) points describes the
//! region through this boundary alone.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateHull {
    /// Sorted by `r1` ascending with `r2` nonincreasing; the first vertex lies
    /// on the `r2` axis and the last on the `r1` axis.
    pub vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl RateHull {
    /// Hull of the down-closure of `points`. Also returns, per vertex, the
    /// index of the input point it comes from (axis vertices point at the
    /// extreme point they project). Non-finite points are ignored and
    /// negative coordinates are raised to 0.
    pub fn from_points(points: &[[f64; 2]]) -> (Self, Vec<Option<usize>>) {
        let mut pts: Vec<([f64; 2], usize)> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| p[0].is_finite() && p[1].is_finite())
            .map(|(i, p)| ([p[0].max(0.0), p[1].max(0.0)], i))
            .collect();
        if pts.is_empty() {
            return (Self { vertices: vec![[0.0, 0.0]] }, vec![None]);
        }
        let top = *pts.iter().max_by(|a, b| a.0[1].total_cmp(&b.0[1]).then(a.0[0].total_cmp(&b.0[0]))).unwrap();
        let right = *pts.iter().max_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1]))).unwrap();
        pts.push(([0.0, top.0[1]], top.1));

        // per abscissa only the highest point can be on the boundary
        pts.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(b.0[1].total_cmp(&a.0[1])).then(a.1.cmp(&b.1)));
        pts.dedup_by(|later, kept| later.0[0] == kept.0[0]);

        let mut chain: Vec<([f64; 2], usize)> = Vec::with_capacity(pts.len());
        for p in pts {
            while chain.len() >= 2 && cross(chain[chain.len() - 2].0, chain[chain.len() - 1].0, p.0) >= 0.0 {
                chain.pop();
            }
            chain.push(p);
        }
        if chain.last().unwrap().0[1] > 0.0 {
            chain.push(([right.0[0], 0.0], right.1));
        }
        let sources = chain.iter().map(|c| Some(c.1)).collect();
        (Self { vertices: chain.into_iter().map(|c| c.0).collect() }, sources)
    }

    pub fn max_r1(&self) -> f64 {
        self.vertices.last().map_or(0.0, |v| v[0])
    }

    pub fn max_r2(&self) -> f64 {
        self.vertices.first().map_or(0.0, |v| v[1])
    }

    pub fn max_sum(&self) -> f64 {
        self.vertices.iter().map(|v| v[0] + v[1]).fold(0.0, f64::max)
    }

    /// Largest `R` with `(R, R)` in the region.
    pub fn symmetric_rate(&self) -> f64 {
        let f = |v: &[f64; 2]| v[1] - v[0];
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (f(&a), f(&b));
            if fa >= 0.0 && fb <= 0.0 {
                let lambda = if fa == fb { 0.0 } else { fa / (fa - fb) };
                return a[0] + lambda * (b[0] - a[0]);
            }
        }
        self.vertices.first().map_or(0.0, |v| v[0].min(v[1]))
    }

    /// Boundary height above `r1`, or `-inf` beyond the region.
    pub fn height_at(&self, r1: f64) -> f64 {
        if r1 > self.max_r1() {
            return f64::NEG_INFINITY;
        }
        if r1 <= 0.0 {
            return self.max_r2();
        }
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if r1 <= b[0] && b[0] > a[0] {
                return a[1] + (r1 - a[0]) / (b[0] - a[0]) * (b[1] - a[1]);
            }
        }
        self.vertices.last().map_or(0.0, |v| v[1])
    }

    /// Whether some boundary point dominates `p` componentwise up to `tol`,
    /// i.e. whether `p - (tol, tol)` lies in the region.
    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        let q = [p[0] - tol, p[1] - tol];
        let slack = 1e-12 * self.max_r1().max(self.max_r2()).max(1.0);
        if q[0] > self.max_r1() + slack {
            return false;
        }
        q[1] <= self.height_at(q[0].min(self.max_r1())) + slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_point_becomes_rectangle() {
        let (h, src) = RateHull::from_points(&[[1.0, 2.0]]);
        assert_eq!(h.vertices, vec![[0.0, 2.0], [1.0, 2.0], [1.0, 0.0]]);
        assert_eq!(src, vec![Some(0), Some(0), Some(0)]);
        assert_eq!(h.symmetric_rate(), 1.0);
        assert_eq!(h.max_sum(), 3.0);
    }

    #[test]
    fn origin_only() {
        let (h, _) = RateHull::from_points(&[[0.0, 0.0]]);
        assert_eq!(h.vertices, vec![[0.0, 0.0]]);
        assert_eq!(h.symmetric_rate(), 0.0);
        let (h, src) = RateHull::from_points(&[]);
        assert_eq!((h.vertices, src), (vec![[0.0, 0.0]], vec![None]));
    }

    #[test]
    fn pentagon_and_interior_points() {
        let pts = [[2.0, 1.0], [1.0, 2.0], [1.0, 1.0], [0.5, 0.2], [1.5, 1.5]];
        let (h, _) = RateHull::from_points(&pts);
        assert_eq!(h.vertices, vec![[0.0, 2.0], [1.0, 2.0], [2.0, 1.0], [2.0, 0.0]]);
        assert_eq!(h.symmetric_rate(), 1.5);
        assert!(h.contains([1.5, 1.5], 0.0));
        assert!(!h.contains([1.6, 1.5], 0.0));
        assert!(h.contains([1.6, 1.5], 1e-1));
        assert!(!h.contains([2.1, 0.0], 1e-3));
    }

    #[test]
    fn time_sharing_fills_the_gap() {
        let (h, _) = RateHull::from_points(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(h.vertices, vec![[0.0, 1.0], [1.0, 0.0]]);
        assert!(h.contains([0.5, 0.5], 0.0));
        assert_eq!(h.symmetric_rate(), 0.5);
    }

    proptest! {
        #[test]
        fn hull_is_monotone_convex_and_contains_inputs(
            pts in proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..40)
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let (h, _) = RateHull::from_points(&pts);
            let v = &h.vertices;
            prop_assert_eq!(v[0][0], 0.0);
            prop_assert_eq!(v[v.len() - 1][1], 0.0);
            for w in v.windows(2) {
                prop_assert!(w[1][0] >= w[0][0] && w[1][1] <= w[0][1]);
            }
            for w in v.windows(3) {
                prop_assert!(cross(w[0], w[1], w[2]) < 0.0);
            }
            for p in &pts {
                prop_assert!(h.contains(*p, 1e-9));
            }
        }
    }
}
