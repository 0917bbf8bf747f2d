//! Piecewise-linear paths and loops in the punctured plane: the
//! homotopy-class carrier for monodromy. Curved loops are approximated by
//! polygons with at least 16 vertices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{BigComplex, DEFAULT_PRECISION};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathPolyline {
    vertices: Vec<BigComplex>,
    closed: bool,
}

impl PathPolyline {
    pub fn open(vertices: Vec<BigComplex>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two vertices".into()));
        }
        Ok(PathPolyline { vertices, closed: false })
    }

    /// A closed loop; the last vertex must equal the first (it is appended
    /// when missing).
    pub fn closed(mut vertices: Vec<BigComplex>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a loop needs at least two vertices".into()));
        }
        let first = vertices[0].clone();
        if !vertices.last().unwrap().equals(&first) {
            vertices.push(first);
        }
        Ok(PathPolyline { vertices, closed: true })
    }

    pub fn vertices(&self) -> &[BigComplex] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed && self.vertices.last().unwrap().equals(&self.vertices[0])
    }

    pub fn start(&self) -> &BigComplex {
        &self.vertices[0]
    }

    pub fn end(&self) -> &BigComplex {
        self.vertices.last().unwrap()
    }

    pub fn reversed(&self) -> PathPolyline {
        PathPolyline {
            vertices: self.vertices.iter().rev().cloned().collect(),
            closed: self.closed,
        }
    }

    /// Concatenation; the other path must start where this one ends.
    pub fn concat(&self, other: &PathPolyline) -> Result<PathPolyline> {
        if !self.end().equals(other.start()) {
            return Err(Error::InvalidInput("paths do not share an endpoint".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().skip(1).cloned());
        let closed = vertices.last().unwrap().equals(&vertices[0]);
        Ok(PathPolyline { vertices, closed })
    }

    /// Positively oriented n-gon around `center` passing through `base`
    /// (the loop basepoint sits on the circle).
    pub fn circle_through(base: &BigComplex, center: &BigComplex, n: usize) -> Result<Self> {
        let p = base.precision();
        let r0 = base.sub(center);
        if r0.is_zero() {
            return Err(Error::InvalidInput("basepoint coincides with the center".into()));
        }
        let n = n.max(16);
        let mut vertices = Vec::with_capacity(n + 1);
        for k in 0..n {
            let rot = rotation(k as i64, n as i64, p);
            vertices.push(center.add(&r0.mul(&rot)));
        }
        // exact closure: first vertex is base itself
        vertices[0] = base.clone();
        PathPolyline::closed(vertices)
    }

    /// Positively oriented n-gon of the given radius around `center`,
    /// reached from `base` by a straight stem (out, around, back). The stem
    /// makes loops of different radii share a basepoint, which keeps their
    /// monodromy matrices directly comparable.
    pub fn circle_through_radius(
        base: &BigComplex,
        center: &BigComplex,
        radius: f64,
        n: usize,
    ) -> Result<Self> {
        let p = base.precision();
        let dir = base.sub(center);
        let d = dir.abs_f64();
        if d == 0.0 {
            return Err(Error::InvalidInput("basepoint coincides with the center".into()));
        }
        let scale = astro_float::BigFloat::from_f64(radius / d, p);
        let entry = center.add(&dir.mul_real(&scale));
        let n = n.max(16);
        let mut vertices = vec![base.clone(), entry.clone()];
        let r0 = entry.sub(center);
        for k in 1..n {
            let rot = rotation(k as i64, n as i64, p);
            vertices.push(center.add(&r0.mul(&rot)));
        }
        vertices.push(entry);
        vertices.push(base.clone());
        PathPolyline::closed(vertices)
    }

    /// Polyline length at f64 scale.
    pub fn length(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| w[1].sub(&w[0]).abs_f64())
            .sum()
    }

    /// Smallest distance from any segment to any of the given points.
    pub fn clearance(&self, points: &[BigComplex]) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.vertices.windows(2) {
            let (ax, ay) = w[0].to_f64s();
            let (bx, by) = w[1].to_f64s();
            for s in points {
                let (px, py) = s.to_f64s();
                best = best.min(segment_distance(ax, ay, bx, by, px, py));
            }
        }
        best
    }

    pub fn check_clearance(&self, points: &[BigComplex], threshold: f64) -> Result<()> {
        let c = self.clearance(points);
        if c < threshold {
            return Err(Error::PathTooCloseToSingularity { margin: c, threshold });
        }
        Ok(())
    }

    /// Winding number around a point (exact for polylines: each segment
    /// subtends less than pi).
    pub fn winding_number(&self, around: &BigComplex) -> i64 {
        let (px, py) = around.to_f64s();
        let mut total = 0.0f64;
        let mut prev: Option<(f64, f64)> = None;
        for v in &self.vertices {
            let (x, y) = v.to_f64s();
            let w = (x - px, y - py);
            if let Some(pw) = prev {
                // arg of w / pw
                let cross = pw.0 * w.1 - pw.1 * w.0;
                let dot = pw.0 * w.0 + pw.1 * w.1;
                total += cross.atan2(dot);
            }
            prev = Some(w);
        }
        (total / (2.0 * std::f64::consts::PI)).round() as i64
    }
}

/// e^{2 pi i k / n} at precision p.
fn rotation(k: i64, n: i64, p: usize) -> BigComplex {
    use crate::numerics::real;
    let two_pi_k = {
        let mut t = real::pi(p);
        t.set_exponent(t.exponent().unwrap() + 1);
        t.mul(&astro_float::BigFloat::from_i64(k, p), p, real::RM)
    };
    let angle = two_pi_k.div(&astro_float::BigFloat::from_i64(n, p), p, real::RM);
    BigComplex::new(real::cos(&angle, p), real::sin(&angle, p), p)
}

fn segment_distance(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let cx = ax + t * dx;
    let cy = ay + t * dy;
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

/// Default-precision convenience for JSON path files.
pub fn path_from_f64s(vertices: &[(f64, f64)], closed: bool) -> Result<PathPolyline> {
    let vs: Vec<BigComplex> = vertices
        .iter()
        .map(|&(re, im)| BigComplex::from_f64s(re, im, DEFAULT_PRECISION))
        .collect();
    if closed {
        PathPolyline::closed(vs)
    } else {
        PathPolyline::open(vs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 192;

    #[test]
    fn winding_numbers() {
        let base = BigComplex::one(P);
        let lp = PathPolyline::circle_through(&base, &BigComplex::zero(P), 16).unwrap();
        assert_eq!(lp.winding_number(&BigComplex::zero(P)), 1);
        assert_eq!(lp.winding_number(&BigComplex::from_i64s(3, 0, P)), 0);
        let rev = lp.reversed();
        assert_eq!(rev.winding_number(&BigComplex::zero(P)), -1);
    }

    #[test]
    fn closure_and_concat() {
        let base = BigComplex::one(P);
        let lp = PathPolyline::circle_through(&base, &BigComplex::zero(P), 16).unwrap();
        assert!(lp.is_closed());
        let cat = lp.concat(&lp).unwrap();
        assert!(cat.is_closed());
        assert_eq!(cat.winding_number(&BigComplex::zero(P)), 2);
    }

    #[test]
    fn stem_loop_clearance() {
        let base = BigComplex::one(P);
        let lp =
            PathPolyline::circle_through_radius(&base, &BigComplex::zero(P), 0.3, 16).unwrap();
        assert!(lp.is_closed());
        let c = lp.clearance(&[BigComplex::zero(P)]);
        assert!((c - 0.3 * (std::f64::consts::PI / 16.0).cos()).abs() < 0.01);
        assert_eq!(lp.winding_number(&BigComplex::zero(P)), 1);
    }
}
