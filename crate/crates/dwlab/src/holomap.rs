//! Holomorphic self-maps of the unit disc and the upper half-plane.
//!
//! Maps are immutable values; every constructor validates that the result is
//! a self-map of its model. Möbius maps carry a 2×2 matrix normalized to
//! determinant 1, so long composition chains can be fused by matrix products
//! without overflow.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hypgeom::{
    hyp_dist_disc_raw, sample_hyp_disc, DiscPoint, HalfPlanePoint, HyperbolicDisc, BOUNDARY_GUARD,
};
use crate::{Error, Result};

/// Which domain a map acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Disc,
    HalfPlane,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Model::Disc => write!(f, "disc"),
            Model::HalfPlane => write!(f, "half-plane"),
        }
    }
}

/// A 2×2 complex matrix acting as `z ↦ (az+b)/(cz+d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Rescale so the determinant is 1. Skipped when the determinant is
    /// already 1 to the last bit, which keeps parse/print round trips exact.
    /// Also skipped when the determinant is numerically untrustworthy
    /// (entries so large that `ad - bc` is pure cancellation): the Möbius
    /// action is scale-invariant, so leaving the matrix alone is safe.
    pub fn normalized(&self) -> Mat2 {
        let det = self.det();
        if (det - Complex64::new(1.0, 0.0)).norm() <= 4.0 * f64::EPSILON {
            return *self;
        }
        let magnitude = self.max_entry_norm();
        if !det.is_finite() || det.norm() < 1e-12 * magnitude * magnitude {
            return *self;
        }
        let s = det.sqrt();
        Mat2 {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
    }

    fn max_entry_norm(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Divide by the largest entry magnitude. Unlike [`Mat2::normalized`]
    /// this involves no cancellation, so it is the right way to keep long
    /// fused products from overflowing; the determinant is not preserved.
    pub fn rescaled(&self) -> Mat2 {
        let s = self.max_entry_norm();
        if !(s.is_finite() && s > 0.0) || (0.5..=2.0).contains(&s) {
            return *self;
        }
        Mat2 {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            d: self.d / s,
        }
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Inverse assuming determinant 1.
    pub fn inv(&self) -> Mat2 {
        Mat2 {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative at `z`: `det / (cz + d)²`, invariant under rescaling.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        self.det() / (den * den)
    }
}

/// Variant record of self-map representations.
#[derive(Clone, Debug)]
pub enum HoloMap {
    Identity,
    /// `z ↦ (az+b)/(cz+d)` with determinant normalized to 1.
    Mobius { mat: Mat2, model: Model },
    /// `z ↦ az + b` on the disc, admitted when `|a| + |b| ≤ 1`.
    Affine { a: Complex64, b: Complex64 },
    /// Finite Blaschke product `rot · Π ((z - z_i)/(1 - z̄_i z))^{k_i}`.
    Blaschke {
        factors: Vec<(DiscPoint, u32)>,
        rotation: Complex64,
    },
    /// `z ↦ offset + e^{i·frequency·z}` on the half-plane.
    HalfPlaneExp { offset: HalfPlanePoint, frequency: f64 },
    /// Composition chain in outer-to-inner order.
    Composite(Vec<HoloMap>),
}

/// Outcome of `is_self_map_check`.
#[derive(Clone, Debug)]
pub struct SelfMapReport {
    pub pass: bool,
    /// First escaping input and its image, when the check fails.
    pub escaping: Option<(Complex64, Complex64)>,
}

impl HoloMap {
    pub fn identity() -> HoloMap {
        HoloMap::Identity
    }

    pub fn mobius(a: Complex64, b: Complex64, c: Complex64, d: Complex64, model: Model) -> Result<HoloMap> {
        let mat = Mat2 { a, b, c, d };
        if mat.det().norm() < 1e-30 {
            return Err(Error::DegenerateMap(
                "Möbius coefficients have vanishing determinant".into(),
            ));
        }
        let m = HoloMap::Mobius {
            mat: mat.normalized(),
            model,
        };
        m.require_self_map()?;
        Ok(m)
    }

    /// Rotation of the disc by `theta` radians, as a Möbius map.
    pub fn rotation(theta: f64) -> HoloMap {
        let h = Complex64::from_polar(1.0, theta / 2.0);
        HoloMap::Mobius {
            mat: Mat2 {
                a: h,
                b: Complex64::new(0.0, 0.0),
                c: Complex64::new(0.0, 0.0),
                d: h.conj(),
            },
            model: Model::Disc,
        }
    }

    /// Disc automorphism `z ↦ (z + c)/(1 + c̄ z)` moving the origin to `c`.
    pub fn disc_translation(c: DiscPoint) -> HoloMap {
        let c = c.get();
        HoloMap::Mobius {
            mat: Mat2 {
                a: Complex64::new(1.0, 0.0),
                b: c,
                c: c.conj(),
                d: Complex64::new(1.0, 0.0),
            }
            .normalized(),
            model: Model::Disc,
        }
    }

    pub fn affine(a: Complex64, b: Complex64) -> Result<HoloMap> {
        if a.norm() + b.norm() > 1.0 + 1e-12 {
            return Err(Error::DegenerateMap(format!(
                "affine map needs |a| + |b| <= 1, got {}",
                a.norm() + b.norm()
            )));
        }
        let m = HoloMap::Affine { a, b };
        m.require_self_map()?;
        Ok(m)
    }

    pub fn blaschke(factors: Vec<(DiscPoint, u32)>, rotation: Complex64) -> Result<HoloMap> {
        if factors.is_empty() {
            return Err(Error::DegenerateMap("Blaschke product needs at least one factor".into()));
        }
        if factors.iter().any(|(_, k)| *k == 0) {
            return Err(Error::DegenerateMap("Blaschke exponents must be positive".into()));
        }
        let n2 = rotation.norm_sqr();
        if !(0.5..2.0).contains(&n2) {
            return Err(Error::DegenerateMap("Blaschke rotation must be unit modulus".into()));
        }
        let rotation = if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON {
            rotation
        } else {
            rotation / n2.sqrt()
        };
        let m = HoloMap::Blaschke { factors, rotation };
        m.require_self_map()?;
        Ok(m)
    }

    pub fn half_plane_exp(offset: HalfPlanePoint, frequency: f64) -> Result<HoloMap> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::DegenerateMap("hpexp frequency must be positive".into()));
        }
        // inf Im(offset + e^{ifz}) = Im(offset) - 1 as Im z -> 0, so
        // Im(offset) >= 1 is necessary and sufficient for a self-map.
        if offset.get().im < 1.0 {
            return Err(Error::NotSelfMap {
                input_re: 0.0,
                input_im: BOUNDARY_GUARD * 2.0,
                image_re: offset.get().re,
                image_im: offset.get().im - 1.0,
            });
        }
        let m = HoloMap::HalfPlaneExp { offset, frequency };
        m.require_self_map()?;
        Ok(m)
    }

    pub fn composite(chain: Vec<HoloMap>) -> Result<HoloMap> {
        let mut model = None;
        for m in &chain {
            match (model, m.model()) {
                (None, other) => model = other,
                (Some(_), None) => {}
                (Some(a), Some(b)) if a == b => {}
                _ => return Err(Error::ModelMismatch),
            }
        }
        let m = HoloMap::Composite(chain);
        m.require_self_map()?;
        Ok(m)
    }

    /// The model a map acts on; `None` for maps valid in either model
    /// (the identity, or an empty chain).
    pub fn model(&self) -> Option<Model> {
        match self {
            HoloMap::Identity => None,
            HoloMap::Mobius { model, .. } => Some(*model),
            HoloMap::Affine { .. } | HoloMap::Blaschke { .. } => Some(Model::Disc),
            HoloMap::HalfPlaneExp { .. } => Some(Model::HalfPlane),
            HoloMap::Composite(chain) => chain.iter().find_map(|m| m.model()),
        }
    }

    /// Evaluate without domain checks. Callers doing long iterations use this
    /// together with their own escape checks.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match self {
            HoloMap::Identity => z,
            HoloMap::Mobius { mat, .. } => mat.apply(z),
            HoloMap::Affine { a, b } => a * z + b,
            HoloMap::Blaschke { factors, rotation } => {
                let mut out = *rotation;
                for (zero, k) in factors {
                    let zero = zero.get();
                    let factor = (z - zero) / (Complex64::new(1.0, 0.0) - zero.conj() * z);
                    out *= factor.powu(*k);
                }
                out
            }
            HoloMap::HalfPlaneExp { offset, frequency } => {
                offset.get() + (Complex64::new(0.0, *frequency) * z).exp()
            }
            HoloMap::Composite(chain) => {
                // Right-to-left: the last map in the chain is applied first.
                chain.iter().rev().fold(z, |w, m| m.eval_unchecked(w))
            }
        }
    }

    /// Evaluate with domain checks on input and image; errors carry the
    /// offending input when the image escapes beyond the boundary guard.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let model = self.model().unwrap_or(Model::Disc);
        if !in_model(model, z) {
            return Err(Error::BoundaryGuard {
                model: match model {
                    Model::Disc => "disc",
                    Model::HalfPlane => "half-plane",
                },
                re: z.re,
                im: z.im,
            });
        }
        let w = self.eval_unchecked(z);
        if !in_model(model, w) {
            return Err(Error::NotSelfMap {
                input_re: z.re,
                input_im: z.im,
                image_re: w.re,
                image_im: w.im,
            });
        }
        Ok(w)
    }

    /// Convert to a Möbius matrix when the map is Möbius in disguise:
    /// the identity, an affine map, a degree-one Blaschke product, or a
    /// composite of such.
    pub fn to_mobius(&self) -> Option<Mat2> {
        match self {
            HoloMap::Identity => Some(Mat2::IDENTITY),
            HoloMap::Mobius { mat, .. } => Some(*mat),
            HoloMap::Affine { a, b } => {
                if a.norm() < 1e-30 {
                    return None; // constant map, not Möbius
                }
                Some(
                    Mat2 {
                        a: *a,
                        b: *b,
                        c: Complex64::new(0.0, 0.0),
                        d: Complex64::new(1.0, 0.0),
                    }
                    .normalized(),
                )
            }
            HoloMap::Blaschke { factors, rotation } => {
                if factors.len() == 1 && factors[0].1 == 1 {
                    let zero = factors[0].0.get();
                    Some(
                        Mat2 {
                            a: *rotation,
                            b: -rotation * zero,
                            c: -zero.conj(),
                            d: Complex64::new(1.0, 0.0),
                        }
                        .normalized(),
                    )
                } else {
                    None
                }
            }
            HoloMap::HalfPlaneExp { .. } => None,
            HoloMap::Composite(chain) => {
                let mut acc = Mat2::IDENTITY;
                for m in chain {
                    acc = acc.mul(&m.to_mobius()?).normalized().rescaled();
                }
                Some(acc)
            }
        }
    }

    /// Whether the map is a conformal automorphism of its model.
    pub fn is_automorphism(&self) -> bool {
        match self {
            HoloMap::Identity => true,
            HoloMap::Mobius { mat, model } => mobius_is_automorphism(mat, *model),
            HoloMap::Affine { a, b } => (a.norm() - 1.0).abs() < 1e-12 && b.norm() < 1e-12,
            HoloMap::Blaschke { factors, .. } => {
                factors.iter().map(|(_, k)| *k as u64).sum::<u64>() == 1
            }
            HoloMap::HalfPlaneExp { .. } => false,
            HoloMap::Composite(chain) => chain.iter().all(|m| m.is_automorphism()),
        }
    }

    fn require_self_map(&self) -> Result<()> {
        let report = is_self_map_check(self, 64);
        if report.pass {
            Ok(())
        } else {
            let (input, image) = report.escaping.unwrap();
            Err(Error::NotSelfMap {
                input_re: input.re,
                input_im: input.im,
                image_re: image.re,
                image_im: image.im,
            })
        }
    }
}

fn in_model(model: Model, z: Complex64) -> bool {
    z.re.is_finite()
        && z.im.is_finite()
        && match model {
            Model::Disc => z.norm() < 1.0 - BOUNDARY_GUARD,
            Model::HalfPlane => z.im > BOUNDARY_GUARD,
        }
}

fn mobius_is_automorphism(mat: &Mat2, model: Model) -> bool {
    match model {
        Model::Disc => {
            // Maps the unit circle to itself: |az+b| = |cz+d| on |z|=1.
            (0..8).all(|j| {
                let z = Complex64::from_polar(1.0, 0.3 + j as f64 * 0.785);
                let num = (mat.a * z + mat.b).norm();
                let den = (mat.c * z + mat.d).norm();
                (num - den).abs() <= 1e-9 * (num + den).max(1.0)
            })
        }
        Model::HalfPlane => {
            // Real coefficients up to a common phase with positive
            // determinant: real inputs map to real outputs and i stays above
            // the axis.
            let reals = [-2.0, -0.7, 0.4, 1.9];
            let ok_axis = reals.iter().all(|&x| {
                let w = mat.apply(Complex64::new(x, 0.0));
                w.is_finite() && w.im.abs() <= 1e-9 * (1.0 + w.norm())
            });
            ok_axis && mat.apply(Complex64::new(0.0, 1.0)).im > 0.0
        }
    }
}

/// Sample-based verification that a map sends its model into itself.
/// Failures are data, not errors: the report carries the first escaping
/// point.
pub fn is_self_map_check(m: &HoloMap, samples: usize) -> SelfMapReport {
    let model = m.model().unwrap_or(Model::Disc);
    let samples = samples.max(8);
    let mut inputs = Vec::with_capacity(samples);
    match model {
        Model::Disc => {
            // Boundary-adjacent rings plus interior rings.
            let radii = [0.999_999, 0.999, 0.99, 0.9, 0.5, 0.1];
            let per_ring = samples.div_ceil(radii.len());
            'outer: for (j, r) in radii.iter().enumerate() {
                for k in 0..per_ring {
                    if inputs.len() >= samples {
                        break 'outer;
                    }
                    let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.37 * j as f64)
                        / per_ring as f64;
                    inputs.push(Complex64::from_polar(*r, phi));
                }
            }
        }
        Model::HalfPlane => {
            let heights = [1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3];
            let per_row = samples.div_ceil(heights.len());
            'outer: for h in heights {
                for k in 0..per_row {
                    if inputs.len() >= samples {
                        break 'outer;
                    }
                    let x = -5.0 + 10.0 * (k as f64 + 0.5) / per_row as f64;
                    inputs.push(Complex64::new(x, h));
                }
            }
        }
    }
    for z in inputs {
        let w = m.eval_unchecked(z);
        if !in_model(model, w) {
            return SelfMapReport {
                pass: false,
                escaping: Some((z, w)),
            };
        }
    }
    SelfMapReport {
        pass: true,
        escaping: None,
    }
}

/// Composition `outer ∘ inner`. Möbius pairs in the same model fuse by
/// matrix product with determinant renormalization; everything else becomes
/// a flattened composite chain.
pub fn compose(outer: &HoloMap, inner: &HoloMap) -> Result<HoloMap> {
    match (outer.model(), inner.model()) {
        (Some(a), Some(b)) if a != b => return Err(Error::ModelMismatch),
        _ => {}
    }
    match (outer, inner) {
        (HoloMap::Identity, m) | (m, HoloMap::Identity) => Ok(m.clone()),
        (HoloMap::Mobius { mat: m1, model }, HoloMap::Mobius { mat: m2, .. }) => Ok(HoloMap::Mobius {
            mat: m1.mul(m2).normalized().rescaled(),
            model: *model,
        }),
        _ => {
            let mut chain = Vec::new();
            let mut push = |m: &HoloMap| match m {
                HoloMap::Composite(inner_chain) => chain_extend(&mut chain, inner_chain),
                other => chain.push(other.clone()),
            };
            push(outer);
            push(inner);
            Ok(HoloMap::Composite(chain))
        }
    }
}

fn chain_extend(chain: &mut Vec<HoloMap>, extra: &[HoloMap]) {
    for m in extra {
        chain.push(m.clone());
    }
}

/// Inverse of a Möbius automorphism (or the identity). Anything else is not
/// invertible as a self-map and is rejected.
pub fn invert(m: &HoloMap) -> Result<HoloMap> {
    if let HoloMap::Identity = m {
        return Ok(HoloMap::Identity);
    }
    let model = m.model().unwrap_or(Model::Disc);
    let mat = m
        .to_mobius()
        .ok_or_else(|| Error::NotAutomorphism("map is not a Möbius transformation".into()))?;
    if !m.is_automorphism() {
        return Err(Error::NotAutomorphism(
            "map does not preserve its model domain bijectively".into(),
        ));
    }
    Ok(HoloMap::Mobius {
        mat: mat.inv(),
        model,
    })
}

/// Classification outcome per the trichotomy: identity, elliptic (finite or
/// infinite order), or a Denjoy–Wolff point inside or on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum MapClass {
    Identity,
    EllipticFiniteOrder { order: u32 },
    EllipticInfiniteOrder,
    InteriorDW { point: DiscPoint },
    BoundaryDW { point: Complex64 },
}

/// Where a Denjoy–Wolff point sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DwLocation {
    Interior,
    Boundary,
}

/// Fixed points of a Möbius-convertible disc map that lie in the closed
/// disc (within a small tolerance).
pub fn fixed_points(m: &HoloMap) -> Result<Vec<Complex64>> {
    let mat = m
        .to_mobius()
        .ok_or_else(|| Error::NotAutomorphism("fixed-point analysis needs a Möbius map".into()))?;
    Ok(mobius_fixed_points(&mat)
        .into_iter()
        .filter(|z| z.norm() <= 1.0 + 1e-9)
        .collect())
}

/// Roots of `cz² + (d-a)z - b = 0`; infinity is dropped.
fn mobius_fixed_points(mat: &Mat2) -> Vec<Complex64> {
    let c = mat.c;
    let lin = mat.d - mat.a;
    let b = mat.b;
    if c.norm() < 1e-14 {
        if lin.norm() < 1e-14 {
            return Vec::new(); // identity-like: every point fixed
        }
        return vec![b / lin];
    }
    let disc = (lin * lin + 4.0 * b * c).sqrt();
    // Stable quadratic: pick the larger-magnitude numerator first.
    let q = if (-lin + disc).norm() >= (-lin - disc).norm() {
        (-lin + disc) / 2.0
    } else {
        (-lin - disc) / 2.0
    };
    if q.norm() < 1e-300 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    vec![q / c, -b / q]
}

/// Rational-angle detection: does `theta/2π` sit within `tol` of a fraction
/// with denominator at most `qmax`? Returns the reduced denominator, i.e.
/// the rotation order. Continued-fraction convergents; flagged heuristic —
/// floating point cannot distinguish finite from infinite order exactly.
pub fn rational_angle_order(theta: f64, qmax: u64, tol: f64) -> Option<u64> {
    let tau = 2.0 * std::f64::consts::PI;
    let mut x = (theta / tau).rem_euclid(1.0);
    if x < tol || 1.0 - x < tol {
        return Some(1);
    }
    // Convergents of x via the Euclidean algorithm on floats.
    let target = x;
    let (mut p0, mut q0, mut p1, mut q1): (u64, u64, u64, u64) = (0, 1, 1, 0);
    for _ in 0..64 {
        let a = x.floor();
        if !a.is_finite() || a < 0.0 || a > 1e18 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0))?;
        let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0))?;
        if q2 > qmax {
            break;
        }
        let err = (target - p2 as f64 / q2 as f64).abs();
        // A convergent of an irrational typically misses by ~1/q²; only an
        // error far below that scale marks a genuinely rational angle.
        if err < tol && err * (q2 as f64) * (q2 as f64) < 1e-6 {
            return Some(q2);
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a as f64;
        if frac < 1e-18 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

/// Classify a self-map of the disc.
///
/// Möbius-convertible maps get fixed-point analysis of the normalized
/// matrix; other maps are classified by iteration from spread seeds and can
/// only be interior or boundary Denjoy–Wolff cases.
pub fn classify(m: &HoloMap, tol: f64, max_iter: usize) -> Result<MapClass> {
    if m.model() == Some(Model::HalfPlane) {
        return Err(Error::ModelMismatch);
    }
    // Identity test on spread samples.
    let probes = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.4, 0.0),
        Complex64::new(-0.3, 0.5),
        Complex64::new(0.1, -0.7),
        Complex64::new(-0.6, -0.2),
    ];
    if probes
        .iter()
        .all(|&z| (m.eval_unchecked(z) - z).norm() < tol)
    {
        return Ok(MapClass::Identity);
    }

    if let Some(mat) = m.to_mobius() {
        let fps = mobius_fixed_points(&mat);
        let auto = mobius_is_automorphism(&mat, Model::Disc);
        if auto {
            if let Some(p) = fps.iter().find(|z| z.norm() < 1.0 - 1e-9) {
                // Elliptic: rotation about p; order from the multiplier's angle.
                let lambda = mat.derivative(*p);
                let theta = lambda.arg();
                return Ok(match rational_angle_order(theta, 1_000_000, 1e-9) {
                    Some(q) => MapClass::EllipticFiniteOrder { order: q as u32 },
                    None => MapClass::EllipticInfiniteOrder,
                });
            }
            // Hyperbolic or parabolic automorphism: boundary fixed points.
            let attracting = fps
                .iter()
                .filter(|z| z.norm().is_finite())
                .min_by(|x, y| {
                    let dx = mat.derivative(**x).norm();
                    let dy = mat.derivative(**y).norm();
                    dx.partial_cmp(&dy).unwrap()
                })
                .copied();
            if let Some(zeta) = attracting {
                return Ok(MapClass::BoundaryDW {
                    point: zeta / zeta.norm(),
                });
            }
            return Err(Error::Inconclusive(
                "automorphism with no usable fixed point".into(),
            ));
        }
        // Non-automorphism Möbius self-map: the Denjoy–Wolff point is the
        // fixed point in the closed disc with |derivative| <= 1.
        let candidate = fps
            .iter()
            .filter(|z| z.norm() <= 1.0 + 1e-9 && mat.derivative(**z).norm() <= 1.0 + 1e-9)
            .min_by(|x, y| {
                let dx = mat.derivative(**x).norm();
                let dy = mat.derivative(**y).norm();
                dx.partial_cmp(&dy).unwrap()
            })
            .copied();
        if let Some(zeta) = candidate {
            if zeta.norm() < 1.0 - 1e-9 {
                let point = DiscPoint::from_complex(zeta)?;
                let residual = hyp_dist_disc_raw(m.eval_unchecked(zeta), zeta);
                if residual < tol.max(1e-9) {
                    return Ok(MapClass::InteriorDW { point });
                }
                return Err(Error::Inconclusive(format!(
                    "fixed-point residual {residual} exceeds tolerance"
                )));
            }
            return Ok(MapClass::BoundaryDW {
                point: zeta / zeta.norm(),
            });
        }
        // Fall through to iteration when fixed-point analysis is ambiguous.
    }

    match denjoy_wolff(m, tol, max_iter)? {
        (zeta, DwLocation::Interior) => Ok(MapClass::InteriorDW {
            point: DiscPoint::from_complex(zeta)?,
        }),
        (zeta, DwLocation::Boundary) => Ok(MapClass::BoundaryDW { point: zeta }),
    }
}

/// Iteration-based Denjoy–Wolff point detection from five spread seeds.
/// Interior verdict: all orbits contract to a common point. Boundary
/// verdict: all orbits escape past modulus `1 - 10·guard` with stabilizing
/// arguments. Deliberately independent of the fixed-point analysis in
/// [`classify`], so the two can cross-check each other.
pub fn denjoy_wolff(m: &HoloMap, tol: f64, max_iter: usize) -> Result<(Complex64, DwLocation)> {
    if m.model() == Some(Model::HalfPlane) {
        return Err(Error::ModelMismatch);
    }
    let escape_mod = 1.0 - 10.0 * BOUNDARY_GUARD;
    let mut orbits: Vec<Complex64> = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.45, 0.0),
        Complex64::new(-0.45, 0.0),
        Complex64::new(0.0, 0.45),
        Complex64::new(0.0, -0.45),
    ];
    let mut boundary_args: Vec<Vec<f64>> = vec![Vec::new(); orbits.len()];
    for step in 1..=max_iter {
        let mut all_escaped = true;
        for (i, z) in orbits.iter_mut().enumerate() {
            *z = m.eval_unchecked(*z);
            if !z.re.is_finite() || !z.im.is_finite() || z.norm() > 1.0 + 1e-9 {
                return Err(Error::Escape {
                    step,
                    detail: format!("orbit {i} left the closed disc: {z}"),
                });
            }
            if z.norm() > escape_mod {
                boundary_args[i].push(z.arg());
            } else {
                boundary_args[i].clear();
                all_escaped = false;
            }
        }
        // Interior: all orbits within tol of a common point, which the map
        // moves by less than tol *in the hyperbolic metric*. The hyperbolic
        // residual is essential: orbits marching to a boundary fixed point
        // also cluster and have vanishing Euclidean residuals, but their
        // hyperbolic residual stays near the translation length.
        let diam = orbit_diameter(&orbits);
        if diam < tol && orbits[0].norm() < escape_mod {
            let zeta = orbits.iter().sum::<Complex64>() / orbits.len() as f64;
            let image = m.eval_unchecked(zeta);
            if zeta.norm() < 1.0 && image.norm() < 1.0 {
                let residual = hyp_dist_disc_raw(image, zeta);
                if residual < tol {
                    return Ok((zeta, DwLocation::Interior));
                }
            }
        }
        // Boundary: escape plus an argument-Cauchy window of 20 iterates.
        if all_escaped && boundary_args.iter().all(|args| args.len() >= 20) {
            let mut refs = Vec::new();
            for args in &boundary_args {
                let tail = &args[args.len() - 20..];
                let spread = arg_spread(tail);
                if spread > tol.max(1e-9) {
                    refs.clear();
                    break;
                }
                refs.push(circular_mean(tail));
            }
            if refs.len() == orbits.len() && arg_spread(&refs) < tol.max(1e-9) {
                let zeta = Complex64::from_polar(1.0, circular_mean(&refs));
                return Ok((zeta, DwLocation::Boundary));
            }
        }
    }
    Err(Error::Inconclusive(format!(
        "orbits neither contracted nor escaped within {max_iter} iterations"
    )))
}

fn orbit_diameter(points: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

fn circular_mean(args: &[f64]) -> f64 {
    let sum: Complex64 = args.iter().map(|&a| Complex64::from_polar(1.0, a)).sum();
    sum.arg()
}

fn arg_spread(args: &[f64]) -> f64 {
    let mean = circular_mean(args);
    args.iter()
        .map(|&a| {
            let mut d = (a - mean).rem_euclid(2.0 * std::f64::consts::PI);
            if d > std::f64::consts::PI {
                d = 2.0 * std::f64::consts::PI - d;
            }
            d
        })
        .fold(0.0f64, f64::max)
}

/// Sampled lower estimate of the Schwarz–Pick contraction constant of a
/// non-automorphism on a compact hyperbolic disc: the max over sampled
/// pairs of `ρ(m(z), m(w)) / ρ(z, w)`, clamped to [0, 1].
///
/// Automorphisms are rejected — there the constant is exactly 1 and the
/// estimate is meaningless.
pub fn contraction_constant(
    m: &HoloMap,
    region: &HyperbolicDisc,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidConfig("need at least 2 samples".into()));
    }
    if m.is_automorphism() {
        return Err(Error::NotAutomorphism(
            "contraction constant undefined for automorphisms (Schwarz-Pick equality)".into(),
        ));
    }
    let pts = sample_hyp_disc(region, samples, seed);
    let images: Vec<Complex64> = pts.iter().map(|p| m.eval_unchecked(p.get())).collect();
    let mut k = 0.0f64;
    let all_pairs = samples <= 256;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let consider = |i: usize, j: usize, k: &mut f64| {
        let dz = hyp_dist_disc_raw(pts[i].get(), pts[j].get());
        if dz > 1e-9 {
            let dw = hyp_dist_disc_raw(images[i], images[j]);
            *k = k.max(dw / dz);
        }
    };
    if all_pairs {
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                consider(i, j, &mut k);
            }
        }
    } else {
        for _ in 0..samples * 64 {
            let i = rng.gen_range(0..pts.len());
            let j = rng.gen_range(0..pts.len());
            if i != j {
                consider(i, j, &mut k);
            }
        }
    }
    Ok(k.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeom::hyp_dist_disc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn halving() -> HoloMap {
        HoloMap::affine(c(0.5, 0.0), c(0.0, 0.0)).unwrap()
    }

    fn hyperbolic_auto() -> HoloMap {
        // (3z+1)/(z+3)
        HoloMap::mobius(c(3.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0), Model::Disc).unwrap()
    }

    pub(crate) fn rand_disc(rng: &mut ChaCha8Rng, max_mod: f64) -> Complex64 {
        loop {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if z.norm() <= max_mod {
                return z;
            }
        }
    }

    /// Random disc automorphism rot(θ)·T_α with |α| ≤ 0.9.
    pub(crate) fn rand_automorphism(rng: &mut ChaCha8Rng) -> HoloMap {
        let theta = rng.gen_range(0.0..6.283);
        let alpha = rand_disc(rng, 0.9);
        let t = HoloMap::disc_translation(DiscPoint::from_complex(alpha).unwrap());
        compose(&HoloMap::rotation(theta), &t).unwrap()
    }

    #[test]
    fn eval_basics() {
        let m = halving();
        assert_eq!(m.eval(c(0.4, 0.2)).unwrap(), c(0.2, 0.1));
        assert_eq!(HoloMap::Identity.eval(c(0.3, -0.1)).unwrap(), c(0.3, -0.1));
    }

    #[test]
    fn hpexp_periodicity() {
        let h = HoloMap::half_plane_exp(
            HalfPlanePoint::new(0.0, 1.0).unwrap(),
            2.0 * std::f64::consts::PI,
        )
        .unwrap();
        let z = c(0.37, 1.4);
        let diff = (h.eval_unchecked(z + 1.0) - h.eval_unchecked(z)).norm();
        assert!(diff < 1e-12, "diff {diff}");
        // h(i) = i + e^{-2π}
        let hi = h.eval_unchecked(c(0.0, 1.0));
        assert!((hi - c((-2.0 * std::f64::consts::PI).exp(), 1.0)).norm() < 1e-15);
    }

    #[test]
    fn hpexp_rejects_low_offset() {
        assert!(HoloMap::half_plane_exp(HalfPlanePoint::new(0.0, 0.5).unwrap(), 1.0).is_err());
    }

    #[test]
    fn compose_rotations_fuse() {
        let r1 = HoloMap::rotation(0.7);
        let r2 = HoloMap::rotation(1.1);
        let r = compose(&r1, &r2).unwrap();
        assert!(matches!(r, HoloMap::Mobius { .. }));
        let z = c(0.3, 0.4);
        let expect = z * Complex64::from_polar(1.0, 1.8);
        assert!((r.eval_unchecked(z) - expect).norm() < 1e-14);
    }

    #[test]
    fn compose_identity_neutral() {
        let m = hyperbolic_auto();
        let left = compose(&HoloMap::Identity, &m).unwrap();
        let z = c(0.2, -0.5);
        assert_eq!(left.eval_unchecked(z), m.eval_unchecked(z));
    }

    #[test]
    fn compose_model_mismatch() {
        let g = HoloMap::mobius(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), Model::HalfPlane)
            .unwrap();
        assert!(matches!(
            compose(&g, &halving()),
            Err(Error::ModelMismatch)
        ));
    }

    #[test]
    fn fused_chain_matches_chained_eval() {
        // Oracle: direct chained evaluation.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let maps: Vec<HoloMap> = (0..1000).map(|_| rand_automorphism(&mut rng)).collect();
        let mut fused = HoloMap::Identity;
        for m in &maps {
            fused = compose(m, &fused).unwrap();
        }
        for _ in 0..20 {
            let z = rand_disc(&mut rng, 0.8);
            let mut w = z;
            for m in &maps {
                w = m.eval_unchecked(w);
            }
            assert!((fused.eval_unchecked(z) - w).norm() < 1e-9);
        }
    }

    #[test]
    fn invert_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let m = rand_automorphism(&mut rng);
            let inv = invert(&m).unwrap();
            let z = rand_disc(&mut rng, 0.9);
            let back = inv.eval_unchecked(m.eval_unchecked(z));
            assert!((back - z).norm() < 1e-12);
        }
        // rotation inverse is the opposite rotation
        let inv = invert(&HoloMap::rotation(0.9)).unwrap();
        let z = c(0.5, 0.1);
        assert!((inv.eval_unchecked(z) - HoloMap::rotation(-0.9).eval_unchecked(z)).norm() < 1e-14);
    }

    #[test]
    fn invert_rejects_non_automorphisms() {
        assert!(matches!(
            invert(&halving()),
            Err(Error::NotAutomorphism(_))
        ));
        let b = HoloMap::blaschke(vec![(DiscPoint::new(0.3, 0.0).unwrap(), 2)], c(1.0, 0.0)).unwrap();
        assert!(invert(&b).is_err());
    }

    #[test]
    fn classify_halving_and_boundary() {
        match classify(&halving(), 1e-9, 10_000).unwrap() {
            MapClass::InteriorDW { point } => assert!(point.get().norm() < 1e-12),
            other => panic!("expected interior DW, got {other:?}"),
        }
        match classify(&hyperbolic_auto(), 1e-9, 10_000).unwrap() {
            MapClass::BoundaryDW { point } => assert!((point - c(1.0, 0.0)).norm() < 1e-9),
            other => panic!("expected boundary DW, got {other:?}"),
        }
    }

    #[test]
    fn classify_elliptic_orders() {
        // Rational angle: order 7 rotation.
        let r = HoloMap::rotation(2.0 * std::f64::consts::PI / 7.0);
        assert_eq!(
            classify(&r, 1e-9, 1000).unwrap(),
            MapClass::EllipticFiniteOrder { order: 7 }
        );
        // 1/7 radians is an irrational multiple of 2π.
        let r = HoloMap::rotation(1.0 / 7.0);
        assert_eq!(classify(&r, 1e-9, 1000).unwrap(), MapClass::EllipticInfiniteOrder);
        assert_eq!(
            classify(&HoloMap::Identity, 1e-9, 1000).unwrap(),
            MapClass::Identity
        );
    }

    #[test]
    fn finite_order_composition_returns_to_identity() {
        let order = 12u32;
        let r = HoloMap::rotation(2.0 * std::f64::consts::PI * 5.0 / order as f64);
        let mut acc = HoloMap::Identity;
        for _ in 0..order {
            acc = compose(&r, &acc).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let z = rand_disc(&mut rng, 0.9);
            assert!((acc.eval_unchecked(z) - z).norm() < 1e-9);
        }
    }

    #[test]
    fn denjoy_wolff_iteration() {
        let (zeta, loc) = denjoy_wolff(&halving(), 1e-9, 10_000).unwrap();
        assert_eq!(loc, DwLocation::Interior);
        assert!(zeta.norm() < 1e-8);

        let (zeta, loc) = denjoy_wolff(&hyperbolic_auto(), 1e-6, 10_000).unwrap();
        assert_eq!(loc, DwLocation::Boundary);
        assert!((zeta - c(1.0, 0.0)).norm() < 1e-6);

        // (z+1/2)/(1+z/2): hyperbolic automorphism with DW point 1.
        let m = HoloMap::mobius(c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0), Model::Disc)
            .unwrap();
        let (zeta, loc) = denjoy_wolff(&m, 1e-6, 10_000).unwrap();
        assert_eq!(loc, DwLocation::Boundary);
        assert!((zeta - c(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn contraction_constant_cases() {
        let region = HyperbolicDisc::new(DiscPoint::origin(), 2.0 * 0.5f64.atanh()).unwrap();
        // Constant map contracts everything to a point.
        let constant = HoloMap::affine(c(0.0, 0.0), c(0.3, 0.0)).unwrap();
        assert_eq!(contraction_constant(&constant, &region, 50, 1).unwrap(), 0.0);
        // z/2 contracts strictly; estimate stable under densification.
        let k = contraction_constant(&halving(), &region, 120, 1).unwrap();
        assert!(k > 0.0 && k < 1.0, "k = {k}");
        let k_dense = contraction_constant(&halving(), &region, 250, 2).unwrap();
        assert!((k - k_dense).abs() < 0.02, "{k} vs {k_dense}");
        // Automorphisms are rejected.
        assert!(contraction_constant(&hyperbolic_auto(), &region, 50, 1).is_err());
    }

    #[test]
    fn self_map_check_cases() {
        // 0.5*0.9 + 0.6 > 1 escapes.
        assert!(HoloMap::affine(c(0.5, 0.0), c(0.6, 0.0)).is_err());
        let report = is_self_map_check(
            &HoloMap::Affine {
                a: c(0.5, 0.0),
                b: c(0.6, 0.0),
            },
            64,
        );
        assert!(!report.pass);
        assert!(report.escaping.is_some());
        assert!(is_self_map_check(&HoloMap::Identity, 64).pass);
        let b = HoloMap::blaschke(vec![(DiscPoint::new(0.4, 0.3).unwrap(), 1)], c(1.0, 0.0)).unwrap();
        assert!(is_self_map_check(&b, 64).pass);
    }

    #[test]
    fn schwarz_pick_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let region_maps: Vec<HoloMap> = vec![
            halving(),
            HoloMap::blaschke(vec![(DiscPoint::new(0.2, -0.3).unwrap(), 2)], c(1.0, 0.0)).unwrap(),
            HoloMap::affine(c(0.3, 0.2), c(0.1, -0.2)).unwrap(),
        ];
        for m in &region_maps {
            for _ in 0..300 {
                let z = rand_disc(&mut rng, 0.95);
                let w = rand_disc(&mut rng, 0.95);
                let before = hyp_dist_disc_raw(z, w);
                let after = hyp_dist_disc_raw(m.eval_unchecked(z), m.eval_unchecked(w));
                assert!(after <= before + 1e-10);
            }
        }
        for _ in 0..50 {
            let a = rand_automorphism(&mut rng);
            let z = rand_disc(&mut rng, 0.95);
            let w = rand_disc(&mut rng, 0.95);
            let before = hyp_dist_disc_raw(z, w);
            let after = hyp_dist_disc_raw(a.eval_unchecked(z), a.eval_unchecked(w));
            assert!((after - before).abs() <= 1e-10 * (1.0 + before));
        }
    }

    #[test]
    fn euclidean_region_constant() {
        // sanity for the hyp disc of Euclidean radius 1/2 used in docs
        let r = 2.0 * 0.5f64.atanh();
        let d = HyperbolicDisc::new(DiscPoint::origin(), r).unwrap();
        let (_, er) = d.to_euclidean();
        assert!((er - 0.5).abs() < 1e-12);
        let far = DiscPoint::new(0.49, 0.0).unwrap();
        assert!(hyp_dist_disc(DiscPoint::origin(), far) < r);
    }
}
