//! Hyperbolic geometry on the unit disc and the upper half-plane.
//!
//! Distances come from the density `2|dz|/(1-|z|^2)` on the disc; the
//! half-plane is handled through the Cayley transform `z ↦ (z-i)/(z+i)`,
//! which is an isometry between the two models.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Points within this distance of the boundary are rejected at construction.
/// artanh overflows there and every argument we care about lives on compact
/// subsets anyway.
pub const BOUNDARY_GUARD: f64 = 1e-14;

/// A point strictly inside the unit disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscPoint(Complex64);

impl DiscPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= 1.0 - BOUNDARY_GUARD {
            return Err(Error::BoundaryGuard {
                model: "disc",
                re: z.re,
                im: z.im,
            });
        }
        Ok(DiscPoint(z))
    }

    pub fn origin() -> Self {
        DiscPoint(Complex64::new(0.0, 0.0))
    }

    pub fn get(self) -> Complex64 {
        self.0
    }
}

/// A point in the open upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlanePoint(Complex64);

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() || z.im <= BOUNDARY_GUARD {
            return Err(Error::BoundaryGuard {
                model: "half-plane",
                re: z.re,
                im: z.im,
            });
        }
        Ok(HalfPlanePoint(z))
    }

    pub fn get(self) -> Complex64 {
        self.0
    }
}

/// Hyperbolic distance on the disc.
///
/// Computed as `2·artanh(|z-w| / |1-z̄w|)` in the log form
/// `ln((den+num)/(den-num))`, which stays accurate as the quotient
/// approaches 1.
pub fn hyp_dist_disc(z: DiscPoint, w: DiscPoint) -> f64 {
    hyp_dist_disc_raw(z.get(), w.get())
}

pub(crate) fn hyp_dist_disc_raw(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
    // den² - num² = (1-|z|²)(1-|w|²) exactly, which sidesteps the
    // catastrophic cancellation in den - num when the quotient nears 1.
    let gap = (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr());
    if gap > 0.0 {
        ((den + num) * (den + num) / gap).ln()
    } else {
        ((den + num) / (den - num)).ln()
    }
}

/// Hyperbolic distance on the upper half-plane, `2·artanh(|z-w|/|z-w̄|)`.
pub fn hyp_dist_halfplane(z: HalfPlanePoint, w: HalfPlanePoint) -> f64 {
    hyp_dist_halfplane_raw(z.get(), w.get())
}

pub(crate) fn hyp_dist_halfplane_raw(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (z - w.conj()).norm();
    // den² - num² = 4·Im z·Im w exactly; see hyp_dist_disc_raw.
    let gap = 4.0 * z.im * w.im;
    if gap > 0.0 {
        ((den + num) * (den + num) / gap).ln()
    } else {
        ((den + num) / (den - num)).ln()
    }
}

/// Cayley transform `z ↦ (z-i)/(z+i)` mapping the half-plane onto the disc.
pub fn cayley_to_disc(z: HalfPlanePoint) -> Result<DiscPoint> {
    let i = Complex64::new(0.0, 1.0);
    let z = z.get();
    DiscPoint::from_complex((z - i) / (z + i))
}

/// Inverse Cayley transform `w ↦ i(1+w)/(1-w)` mapping the disc onto the
/// half-plane.
pub fn cayley_to_halfplane(w: DiscPoint) -> Result<HalfPlanePoint> {
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let w = w.get();
    HalfPlanePoint::from_complex(i * (one + w) / (one - w))
}

/// A hyperbolic disc `D(c, r)` with centre in the unit disc and radius in
/// hyperbolic units.
#[derive(Clone, Copy, Debug)]
pub struct HyperbolicDisc {
    center: DiscPoint,
    radius: f64,
}

impl HyperbolicDisc {
    pub fn new(center: DiscPoint, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "hyperbolic radius must be a nonnegative real, got {radius}"
            )));
        }
        let d = HyperbolicDisc { center, radius };
        let (c, r) = d.to_euclidean();
        if c.norm() + r >= 1.0 - BOUNDARY_GUARD {
            return Err(Error::BoundaryGuard {
                model: "disc",
                re: c.re,
                im: c.im,
            });
        }
        Ok(d)
    }

    pub fn center(&self) -> DiscPoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The Euclidean disc with the same point set.
    ///
    /// With `t = tanh(r/2)` the centre and radius are
    /// `c(1-t²)/(1-t²|c|²)` and `t(1-|c|²)/(1-t²|c|²)`.
    pub fn to_euclidean(&self) -> (Complex64, f64) {
        let c = self.center.get();
        let t = (self.radius / 2.0).tanh();
        let c2 = c.norm_sqr();
        let den = 1.0 - t * t * c2;
        (c * ((1.0 - t * t) / den), t * (1.0 - c2) / den)
    }

    pub fn contains(&self, p: DiscPoint) -> bool {
        hyp_dist_disc(self.center, p) <= self.radius
    }
}

/// Möbius translation moving the origin to `c`, applied to `p`.
fn translate_from_origin(c: Complex64, p: Complex64) -> Complex64 {
    (p + c) / (Complex64::new(1.0, 0.0) + c.conj() * p)
}

/// Deterministic sample of a hyperbolic disc: the centre, a grid of
/// concentric hyperbolic circles, and seeded points uniform in hyperbolic
/// area. Grids catch uniform behaviour, random points catch grid-aligned
/// bugs.
pub fn sample_hyp_disc(d: &HyperbolicDisc, n: usize, seed: u64) -> Vec<DiscPoint> {
    assert!(n >= 1, "sample count must be at least 1");
    let c = d.center().get();
    let r = d.radius();
    let mut out = Vec::with_capacity(n);
    out.push(d.center());

    // Concentric circles take roughly half the budget.
    let grid_budget = (n - 1) / 2;
    if grid_budget > 0 && r > 0.0 {
        let rings = ((grid_budget as f64).sqrt().ceil() as usize).max(1);
        let per_ring = grid_budget.div_ceil(rings);
        'grid: for j in 1..=rings {
            let rad = r * j as f64 / rings as f64;
            let t = (rad / 2.0).tanh();
            for m in 0..per_ring {
                if out.len() >= 1 + grid_budget {
                    break 'grid;
                }
                let phi = 2.0 * std::f64::consts::PI * (m as f64 + 0.5 * (j % 2) as f64)
                    / per_ring as f64;
                let p0 = Complex64::from_polar(t, phi);
                if let Ok(p) = DiscPoint::from_complex(translate_from_origin(c, p0)) {
                    out.push(p);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        if r == 0.0 {
            out.push(d.center());
            continue;
        }
        // Uniform in hyperbolic area: density proportional to sinh(s).
        let u: f64 = rng.gen();
        let s = 2.0 * (u.sqrt() * (r / 2.0).sinh()).asinh();
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let p0 = Complex64::from_polar((s / 2.0).tanh(), phi);
        if let Ok(p) = DiscPoint::from_complex(translate_from_origin(c, p0)) {
            out.push(p);
        }
    }
    out
}

/// Distance between points given in hyperbolic polar coordinates about the
/// origin, via the hyperbolic law of cosines. Stays usable for radii far
/// beyond what Euclidean coordinates can represent.
pub fn dist_polar(r1: f64, phi1: f64, r2: f64, phi2: f64) -> f64 {
    let c = (phi1 - phi2).cos();
    let ch = r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * c;
    if ch <= 1.0 {
        0.0
    } else {
        ch.acosh()
    }
}

/// Hyperbolic displacement of a point at hyperbolic radius `radius` under a
/// rotation about the origin by `angle`: `2·asinh(sin(angle/2)·sinh(radius))`.
/// Exact (law of cosines) and free of cancellation for tiny angles at large
/// radii.
pub fn rotation_displacement(radius: f64, angle: f64) -> f64 {
    2.0 * ((angle / 2.0).sin().abs() * radius.sinh()).asinh()
}
