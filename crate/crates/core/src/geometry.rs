//! Convex quadric domains: disk and ellipse in the plane, ball in space.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, finite, Error, Result};
use crate::quad::Rule;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Ball { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Launches with |v.n| below this at a boundary start point exit immediately.
pub const TANGENT_TOL: f64 = 1e-12;
const INSIDE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Domain {
    shape: Shape,
    semi: [f64; 3],
    dim: usize,
    perimeter: f64,
    arc: Option<ArcTable>,
}

/// Cumulative arc length over the angular parameter of a planar boundary.
#[derive(Debug, Clone)]
struct ArcTable {
    a: f64,
    b: f64,
    cum: Vec<f64>,
    dt: f64,
    rule: Rule,
}

impl ArcTable {
    const CELLS: usize = 1024;

    fn new(a: f64, b: f64) -> Self {
        let dt = 2.0 * PI / Self::CELLS as f64;
        let rule = Rule::gauss(0.0, 1.0, 12);
        let mut cum = Vec::with_capacity(Self::CELLS + 1);
        cum.push(0.0);
        let mut s = 0.0;
        for k in 0..Self::CELLS {
            let t0 = k as f64 * dt;
            s += rule.integrate(|u| speed2(a, b, t0 + u * dt)) * dt;
            cum.push(s);
        }
        Self { a, b, cum, dt, rule }
    }

    fn total(&self) -> f64 {
        self.cum[Self::CELLS]
    }

    /// Arc length from t = 0 to `t` (t in [0, 2pi]).
    fn length_at(&self, t: f64) -> f64 {
        let k = ((t / self.dt).floor() as usize).min(Self::CELLS - 1);
        let t0 = k as f64 * self.dt;
        let h = t - t0;
        self.cum[k] + self.rule.integrate(|u| speed2(self.a, self.b, t0 + u * h)) * h
    }

    fn param_at(&self, s: f64) -> f64 {
        let s = s.rem_euclid(self.total());
        let k = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(Self::CELLS - 1),
            Err(i) => i.saturating_sub(1).min(Self::CELLS - 1),
        };
        let mut t = k as f64 * self.dt + (s - self.cum[k]) / speed2(self.a, self.b, k as f64 * self.dt);
        for _ in 0..8 {
            let r = self.length_at(t.clamp(0.0, 2.0 * PI)) - s;
            t -= r / speed2(self.a, self.b, t);
            if r.abs() < 1e-14 * self.total() {
                break;
            }
        }
        t.rem_euclid(2.0 * PI)
    }
}

fn speed2(a: f64, b: f64, t: f64) -> f64 {
    (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt()
}

/// Boundary quadrature nodes approximating the surface measure.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub points: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// Arc-length coordinate for planar grids (uniformly spaced), empty in 3-D.
    pub arc: Vec<f64>,
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let (semi, dim) = match shape {
            Shape::Disk { radius } => ([radius, radius, f64::INFINITY], 2),
            Shape::Ellipse { a, b } => ([a, b, f64::INFINITY], 2),
            Shape::Ball { radius } => ([radius; 3], 3),
        };
        let axes = &semi[..dim];
        if axes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return domain(format!("shape parameters must be positive and finite: {shape:?}"));
        }
        let (perimeter, arc) = match shape {
            Shape::Disk { radius } => (2.0 * PI * radius, None),
            Shape::Ellipse { a, b } => {
                let t = ArcTable::new(a, b);
                (t.total(), Some(t))
            }
            Shape::Ball { radius } => (4.0 * PI * radius * radius, None),
        };
        Ok(Self { shape, semi, dim, perimeter, arc })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b })
    }

    pub fn ball(radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { radius })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.semi[..self.dim].iter().cloned().fold(0.0, f64::max)
    }

    /// Arc length (d = 2) or surface area (d = 3) of the boundary.
    pub fn boundary_measure(&self) -> f64 {
        self.perimeter
    }

    pub fn volume(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius } => PI * radius * radius,
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Ball { radius } => 4.0 / 3.0 * PI * radius.powi(3),
        }
    }

    /// Quadric level function, negative inside and zero on the boundary.
    pub fn level(&self, p: Vec3) -> f64 {
        let mut s = (p.x / self.semi[0]).powi(2) + (p.y / self.semi[1]).powi(2);
        if self.dim == 3 {
            s += (p.z / self.semi[2]).powi(2);
        }
        s - 1.0
    }

    fn grad_dir(&self, p: Vec3) -> Vec3 {
        let z = if self.dim == 3 { p.z / (self.semi[2] * self.semi[2]) } else { 0.0 };
        Vec3::new(p.x / (self.semi[0] * self.semi[0]), p.y / (self.semi[1] * self.semi[1]), z)
    }

    /// Outward unit normal at (or radially projected from) `p`.
    pub fn normal(&self, p: Vec3) -> Vec3 {
        self.grad_dir(p).normalized()
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.level(p) <= INSIDE_TOL
    }

    /// Radial projection onto the boundary.
    pub fn project(&self, p: Vec3) -> Vec3 {
        p / (self.level(p) + 1.0).sqrt()
    }

    /// Ray exit time `t_+` (forward) or `t_-` (backward) from a point of the closed domain.
    pub fn exit_time(&self, x: Vec3, v: Vec3, dir: Direction) -> Result<f64> {
        let v = match dir {
            Direction::Forward => v,
            Direction::Backward => -v,
        };
        if !(v.norm2() > 0.0) || !v.norm2().is_finite() {
            return domain("exit time needs a nonzero finite velocity");
        }
        let c = self.level(x);
        if c > INSIDE_TOL || !c.is_finite() {
            return domain(format!("point {x:?} lies outside the domain"));
        }
        let g = self.grad_dir(x);
        let a = self.quad_form(v, v);
        let b = self.quad_form(x, v);
        if c.abs() <= INSIDE_TOL {
            // boundary start: tangential or outgoing launch leaves at once
            let cosn = v.dot(g) / (g.norm() * v.norm());
            if cosn > -TANGENT_TOL {
                return Ok(0.0);
            }
            return Ok((-2.0 * b / a).max(0.0));
        }
        let disc = (b * b - a * c).max(0.0).sqrt();
        let mut t = if b <= 0.0 { (disc - b) / a } else { -c / (b + disc) };
        if matches!(self.shape, Shape::Ellipse { .. }) {
            // one guarded Newton polish on the implicit boundary equation
            let r = self.level(x + t * v);
            let dr = 2.0 * (b + a * t);
            if dr.abs() > 0.0 {
                let t2 = t - r / dr;
                if self.level(x + t2 * v).abs() < r.abs() {
                    t = t2;
                }
            }
        }
        finite(t.max(0.0), "exit time")
    }

    fn quad_form(&self, p: Vec3, q: Vec3) -> f64 {
        let mut s = p.x * q.x / (self.semi[0] * self.semi[0]) + p.y * q.y / (self.semi[1] * self.semi[1]);
        if self.dim == 3 {
            s += p.z * q.z / (self.semi[2] * self.semi[2]);
        }
        s
    }

    /// Change-of-variables Jacobian between two distinct boundary points.
    pub fn jacobian(&self, x: Vec3, y: Vec3) -> Result<f64> {
        let d = x - y;
        let r = d.norm();
        if r < 1e-12 * self.diameter() {
            return Err(Error::Singular(format!("coincident boundary points {x:?}, {y:?}")));
        }
        let a = d.dot(self.normal(x));
        let b = -d.dot(self.normal(y));
        if a <= 0.0 || b <= 0.0 {
            return Ok(0.0);
        }
        Ok(a * b / r.powi(self.dim as i32 + 1))
    }

    /// Boundary point at angular parameter `t` (planar shapes).
    pub fn point_at(&self, t: f64) -> Vec3 {
        Vec3::xy(self.semi[0] * t.cos(), self.semi[1] * t.sin())
    }

    /// Angular parameter of a planar boundary point.
    pub fn param_of(&self, p: Vec3) -> f64 {
        (p.y / self.semi[1]).atan2(p.x / self.semi[0]).rem_euclid(2.0 * PI)
    }

    /// Arc-length coordinate in [0, |boundary|) of a planar boundary point.
    pub fn arc_of(&self, p: Vec3) -> f64 {
        let t = self.param_of(p);
        match &self.arc {
            Some(tab) => tab.length_at(t),
            None => self.semi[0] * t,
        }
    }

    /// Planar boundary point at arc-length coordinate `s`.
    pub fn point_at_arc(&self, s: f64) -> Vec3 {
        match &self.arc {
            Some(tab) => self.point_at(tab.param_at(s)),
            None => self.point_at(s / self.semi[0]),
        }
    }

    fn param_speed(&self, t: f64) -> f64 {
        speed2(self.semi[0], self.semi[1], t)
    }

    /// Quadrature grid on the boundary with roughly `n` nodes.
    ///
    /// Planar: uniform in arc length. Ball: Gauss in the polar cosine times a
    /// uniform azimuth with twice as many azimuthal nodes.
    pub fn boundary_grid(&self, n: usize) -> Result<BoundaryGrid> {
        if n < 4 {
            return domain("boundary grid needs at least 4 nodes");
        }
        let mut g = BoundaryGrid { points: vec![], normals: vec![], weights: vec![], arc: vec![] };
        if self.dim == 2 {
            let h = self.perimeter / n as f64;
            for i in 0..n {
                let s = i as f64 * h;
                let p = self.point_at_arc(s);
                g.points.push(p);
                g.normals.push(self.normal(p));
                g.weights.push(h);
                g.arc.push(s);
            }
        } else {
            let nt = ((n as f64 / 2.0).sqrt().round() as usize).max(2);
            let np = 2 * nt;
            let rule = Rule::gauss(-1.0, 1.0, nt);
            let r = self.semi[0];
            for (&mu, &wmu) in rule.nodes.iter().zip(&rule.weights) {
                let st = (1.0 - mu * mu).sqrt();
                for k in 0..np {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / np as f64;
                    let u = Vec3::new(st * phi.cos(), st * phi.sin(), mu);
                    g.points.push(u * r);
                    g.normals.push(u);
                    g.weights.push(r * r * wmu * 2.0 * PI / np as f64);
                }
            }
        }
        Ok(g)
    }

    /// Integral of `f(y)` over the boundary with nodes clustered at `x`,
    /// where the integrands of interest are kinked or weakly singular.
    pub fn centered_integral(&self, x: Vec3, order: usize, f: impl Fn(Vec3) -> f64) -> f64 {
        if self.dim == 2 {
            let t0 = self.param_of(x);
            let rule = Rule::graded(0.0, 2.0 * PI, 24, order);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&u, &w)| w * self.param_speed(t0 + u) * f(self.point_at(t0 + u)))
                .sum()
        } else {
            let r = self.semi[0];
            let pole = x.normalized();
            let (e1, e2) = pole.frame();
            let psi = Rule::graded(0.0, PI, 24, order);
            let nphi = 4 * order;
            let mut s = 0.0;
            for (&a, &wa) in psi.nodes.iter().zip(&psi.weights) {
                let (sa, ca) = a.sin_cos();
                let mut inner = 0.0;
                for k in 0..nphi {
                    let phi = 2.0 * PI * k as f64 / nphi as f64;
                    let u = pole * ca + (e1 * phi.cos() + e2 * phi.sin()) * sa;
                    inner += f(u * r);
                }
                s += wa * r * r * sa * inner * 2.0 * PI / nphi as f64;
            }
            s
        }
    }

    /// Integral of `f(y)` over boundary points with |x - y| < eps.
    pub fn near_integral(&self, x: Vec3, eps: f64, order: usize, f: impl Fn(Vec3) -> f64) -> f64 {
        if self.dim == 3 {
            let r = self.semi[0];
            let psi_max = if eps >= 2.0 * r { PI } else { 2.0 * (eps / (2.0 * r)).asin() };
            let pole = x.normalized();
            let (e1, e2) = pole.frame();
            let psi = Rule::graded(0.0, psi_max, 20, order);
            let nphi = 4 * order;
            let mut s = 0.0;
            for (&a, &wa) in psi.nodes.iter().zip(&psi.weights) {
                let (sa, ca) = a.sin_cos();
                let mut inner = 0.0;
                for k in 0..nphi {
                    let phi = 2.0 * PI * k as f64 / nphi as f64;
                    inner += f((pole * ca + (e1 * phi.cos() + e2 * phi.sin()) * sa) * r);
                }
                s += wa * r * r * sa * inner * 2.0 * PI / nphi as f64;
            }
            return s;
        }
        // locate the arcs where the chord is shorter than eps
        let t0 = self.param_of(x);
        let m = 2048;
        let h = 2.0 * PI / m as f64;
        let inside = |u: f64| (self.point_at(t0 + u) - x).norm() < eps;
        let mut cuts = vec![0.0];
        for k in 0..m {
            let (u0, u1) = (k as f64 * h, (k + 1) as f64 * h);
            let (a0, a1) = (inside(u0), inside(u1));
            if a0 != a1 {
                let (mut lo, mut hi) = (u0, u1);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) == a0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
        }
        cuts.push(2.0 * PI);
        let mut s = 0.0;
        for w in cuts.windows(2) {
            if !inside(0.5 * (w[0] + w[1])) {
                continue;
            }
            let rule = Rule::graded(w[0], w[1], 20, order);
            s += rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&u, &wt)| wt * self.param_speed(t0 + u) * f(self.point_at(t0 + u)))
                .sum::<f64>();
        }
        s
    }

    /// Both sides of the change-of-variables identity at boundary point `x`:
    /// the cosine-weighted sphere integral of `g` and the boundary integral of
    /// `g((x-y)/|x-y|) J(x,y)`.
    pub fn change_of_variables_check(&self, x: Vec3, g: impl Fn(Vec3) -> f64) -> Result<(f64, f64)> {
        let n = self.normal(x);
        let lhs = if self.dim == 2 {
            let t = n.perp();
            Rule::composite(-PI / 2.0, PI / 2.0, 16, 16).integrate(|th| {
                let s = n * th.cos() + t * th.sin();
                g(s) * th.cos()
            })
        } else {
            let (e1, e2) = n.frame();
            let mu = Rule::composite(0.0, 1.0, 8, 16);
            let nphi = 128;
            let mut acc = 0.0;
            for (&c, &w) in mu.nodes.iter().zip(&mu.weights) {
                let s = (1.0 - c * c).sqrt();
                let mut inner = 0.0;
                for k in 0..nphi {
                    let phi = 2.0 * PI * k as f64 / nphi as f64;
                    inner += g(n * c + (e1 * phi.cos() + e2 * phi.sin()) * s);
                }
                acc += w * c * inner * 2.0 * PI / nphi as f64;
            }
            acc
        };
        let rhs = self.centered_integral(x, 16, |y| {
            let d = x - y;
            let r = d.norm();
            if r < 1e-14 {
                return 0.0;
            }
            g(d / r) * self.jacobian(x, y).unwrap_or(0.0)
        });
        Ok((finite(lhs, "sphere-side integral")?, finite(rhs, "boundary-side integral")?))
    }

    /// Largest sampled value of |(x-y).n(x)| / |x-y|^(1+alpha) over boundary pairs.
    pub fn flatness_constant(&self, samples: usize, alpha: f64) -> Result<(f64, f64)> {
        let grid = self.boundary_grid(samples.max(4))?;
        let mut c: f64 = 0.0;
        for (i, (&x, &nx)) in grid.points.iter().zip(&grid.normals).enumerate() {
            for (j, &y) in grid.points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = x - y;
                let r = d.norm();
                if r < 1e-12 {
                    continue;
                }
                c = c.max(d.dot(nx).abs() / r.powf(1.0 + alpha));
            }
        }
        Ok((alpha, finite(c, "flatness constant")?))
    }

    /// Uniform point in the domain by rejection from the bounding box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        loop {
            let mut p = Vec3::new(
                self.semi[0] * (2.0 * rng.random::<f64>() - 1.0),
                self.semi[1] * (2.0 * rng.random::<f64>() - 1.0),
                0.0,
            );
            if self.dim == 3 {
                p.z = self.semi[2] * (2.0 * rng.random::<f64>() - 1.0);
            }
            if self.level(p) < 0.0 {
                return p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_exit(dom: &Domain, x: Vec3, v: Vec3) -> f64 {
        let (mut lo, mut hi) = (0.0, 10.0 * dom.diameter() / v.norm());
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if dom.level(x + m * v) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn disk_exit_times() {
        let d = Domain::disk(1.0).unwrap();
        let f = |x, v| d.exit_time(x, v, Direction::Forward).unwrap();
        assert!((f(Vec3::ZERO, Vec3::xy(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((f(Vec3::xy(0.5, 0.0), Vec3::xy(1.0, 0.0)) - 0.5).abs() < 1e-15);
        let b = d.exit_time(Vec3::xy(0.5, 0.0), Vec3::xy(1.0, 0.0), Direction::Backward).unwrap();
        assert!((b - 1.5).abs() < 1e-15);
        let t = f(Vec3::xy(0.5, 0.0), Vec3::xy(0.0, 2.0));
        let oracle = bisect_exit(&d, Vec3::xy(0.5, 0.0), Vec3::xy(0.0, 2.0));
        assert!((t - oracle).abs() < 1e-12);
        assert!((t - 0.4330127).abs() < 1e-7);
    }

    #[test]
    fn exit_time_errors() {
        let d = Domain::disk(1.0).unwrap();
        assert!(matches!(d.exit_time(Vec3::ZERO, Vec3::ZERO, Direction::Forward), Err(Error::Domain(_))));
        assert!(matches!(d.exit_time(Vec3::xy(2.0, 0.0), Vec3::xy(1.0, 0.0), Direction::Forward), Err(Error::Domain(_))));
    }

    #[test]
    fn tangential_and_outgoing_boundary_launch() {
        let d = Domain::disk(1.0).unwrap();
        let x = Vec3::xy(1.0, 0.0);
        assert_eq!(d.exit_time(x, Vec3::xy(0.0, 1.0), Direction::Forward).unwrap(), 0.0);
        assert_eq!(d.exit_time(x, Vec3::xy(1.0, 0.3), Direction::Forward).unwrap(), 0.0);
        assert!((d.exit_time(x, Vec3::xy(-1.0, 0.0), Direction::Forward).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ellipse_exit_matches_bisection() {
        let d = Domain::ellipse(2.0, 1.0).unwrap();
        let x = Vec3::xy(0.3, -0.2);
        for k in 0..16 {
            let a = k as f64 * 0.4;
            let v = Vec3::xy(a.cos(), a.sin()) * 1.7;
            let t = d.exit_time(x, v, Direction::Forward).unwrap();
            assert!((t - bisect_exit(&d, x, v)).abs() < 1e-12);
            assert!(d.level(x + t * v).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_on_circle() {
        let d = Domain::disk(1.0).unwrap();
        let j = d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(-1.0, 0.0)).unwrap();
        assert!((j - 0.5).abs() < 1e-15);
        let j = d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(0.0, 1.0)).unwrap();
        assert!((j - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(matches!(d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(1.0, 0.0)), Err(Error::Singular(_))));
        let near = d.jacobian(Vec3::xy(1.0, 0.0), d.point_at(1e-6)).unwrap();
        assert!(near < 1e-6);
    }

    #[test]
    fn jacobian_on_sphere_is_constant() {
        let d = Domain::ball(2.0).unwrap();
        let g = d.boundary_grid(50).unwrap();
        for i in 1..g.len() {
            let j = d.jacobian(g.points[0], g.points[i]).unwrap();
            assert!((j - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_weights_sum_to_boundary_measure() {
        for dom in [Domain::disk(1.5).unwrap(), Domain::ellipse(2.0, 1.0).unwrap(), Domain::ball(1.0).unwrap()] {
            let g = dom.boundary_grid(200).unwrap();
            assert!((g.total_weight() - dom.boundary_measure()).abs() < 1e-10 * dom.boundary_measure());
            for (p, n) in g.points.iter().zip(&g.normals) {
                assert!(dom.level(*p).abs() < 1e-13);
                assert!((n.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ellipse_perimeter() {
        // Ramanujan's second approximation is accurate to ~1e-10 here
        let (a, b) = (2.0f64, 1.0f64);
        let h = ((a - b) / (a + b)).powi(2);
        let p = PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
        let d = Domain::ellipse(a, b).unwrap();
        assert!((d.boundary_measure() - p).abs() < 1e-4);
        let s = 3.3;
        assert!((d.arc_of(d.point_at_arc(s)) - s).abs() < 1e-12);
    }

    #[test]
    fn change_of_variables_unit_disk_and_ball() {
        let d = Domain::disk(1.0).unwrap();
        let x = d.point_at(0.7);
        let (l, r) = d.change_of_variables_check(x, |_| 1.0).unwrap();
        assert!((l - 2.0).abs() < 1e-10 && (r - 2.0).abs() < 1e-10, "{l} {r}");
        let n = d.normal(x);
        let (l, r) = d.change_of_variables_check(x, |s| s.dot(n)).unwrap();
        assert!((l - PI / 2.0).abs() < 1e-10 && (r - PI / 2.0).abs() < 1e-8, "{l} {r}");
        let b = Domain::ball(1.0).unwrap();
        let (l, r) = b.change_of_variables_check(Vec3::new(0.0, 0.6, 0.8), |_| 1.0).unwrap();
        assert!((l - PI).abs() < 1e-10 && (r - PI).abs() < 1e-8, "{l} {r}");
    }

    #[test]
    fn flatness_on_circles() {
        let (_, c) = Domain::disk(1.0).unwrap().flatness_constant(64, 1.0).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        let (_, c) = Domain::disk(2.0).unwrap().flatness_constant(64, 1.0).unwrap();
        assert!((c - 0.25).abs() < 1e-12);
    }
}
