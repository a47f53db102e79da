//! Seedable benchmark-function suite over the box `[-100, 100]^D`.
//!
//! [`make_suite`] builds a deterministic list of shifted/rotated test
//! functions from a seed: three unimodal bases, seven simple multimodal
//! bases, two hybrids that partition the dimensions across bases, and two
//! compositions formed as distance-weighted sums of shifted bases. Every
//! suite member has its optimum value pinned to 0 so that reported errors
//! are directly `f(x)`.
//!
//! Functions are immutable after construction and safe to evaluate from
//! many threads at once.

use std::f64::consts::{E, PI};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower bound shared by every dimension of every suite member.
pub const DOMAIN_LOWER: f64 = -100.0;
/// Upper bound shared by every dimension of every suite member.
pub const DOMAIN_UPPER: f64 = 100.0;

/// Shift vectors are drawn in `[-SHIFT_RANGE, SHIFT_RANGE]^D` so optima stay
/// interior to the search box.
const SHIFT_RANGE: f64 = 80.0;

const SCHWEFEL_OFFSET: f64 = 4.209687462275036e2;
const SCHWEFEL_BIAS: f64 = 4.189828872724338e2;

/// Landscape group of a suite member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Unimodal,
    Multimodal,
    Hybrid,
    Composition,
}

/// Base landscapes. Each has its global minimum value 0 at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseFunction {
    Sphere,
    BentCigar,
    Discus,
    Ellipsoid,
    Rosenbrock,
    Ackley,
    Rastrigin,
    Schwefel,
    Griewank,
    Katsuura,
    Weierstrass,
}

impl BaseFunction {
    /// Evaluate the base landscape at `z`.
    pub fn evaluate(self, z: &[f64]) -> f64 {
        let d = z.len();
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::BentCigar => {
                z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            BaseFunction::Discus => {
                1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            BaseFunction::Ellipsoid => z
                .iter()
                .enumerate()
                .map(|(i, v)| 1e6f64.powf(i as f64 / (d - 1) as f64) * v * v)
                .sum(),
            BaseFunction::Rosenbrock => {
                // Internal +1 offset places the minimum at z = 0.
                let mut f = 0.0;
                for i in 0..d - 1 {
                    let a = z[i] + 1.0;
                    let b = z[i + 1] + 1.0;
                    f += 100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0);
                }
                f
            }
            BaseFunction::Ackley => {
                let rms = (z.iter().map(|v| v * v).sum::<f64>() / d as f64).sqrt();
                let mean_cos = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d as f64;
                // Grouped so that both halves cancel exactly at z = 0.
                (20.0 - 20.0 * (-0.2 * rms).exp()) + (E - mean_cos.exp())
            }
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BaseFunction::Schwefel => {
                // The deceptive basin structure lives on a +-500 domain;
                // the inner scale maps the +-100 search box onto it.
                let mut f = SCHWEFEL_BIAS * d as f64;
                for &zi in z {
                    let w = 10.0 * zi + SCHWEFEL_OFFSET;
                    if w > 500.0 {
                        let m = 500.0 - w % 500.0;
                        f -= m * m.abs().sqrt().sin();
                        let t = (w - 500.0) / 100.0;
                        f += t * t / d as f64;
                    } else if w < -500.0 {
                        let m = w.abs() % 500.0 - 500.0;
                        f -= m * m.abs().sqrt().sin();
                        let t = (w + 500.0) / 100.0;
                        f += t * t / d as f64;
                    } else {
                        f -= w * w.abs().sqrt().sin();
                    }
                }
                f
            }
            BaseFunction::Griewank => {
                let s: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                1.0 + s - p
            }
            BaseFunction::Katsuura => {
                let exp = 10.0 / (d as f64).powf(1.2);
                let scale = 10.0 / (d as f64 * d as f64);
                let mut prod = 1.0;
                for (i, &zi) in z.iter().enumerate() {
                    let mut t = 0.0;
                    for j in 1..=32u32 {
                        let p = f64::from(2u32).powi(j as i32);
                        let v = p * zi;
                        t += (v - (v + 0.5).floor()).abs() / p;
                    }
                    prod *= (1.0 + (i + 1) as f64 * t).powf(exp);
                }
                scale * prod - scale
            }
            BaseFunction::Weierstrass => {
                let (a, b, kmax) = (0.5f64, 3.0f64, 20u32);
                let mut f = 0.0;
                for &zi in z {
                    let mut s = 0.0;
                    for k in 0..=kmax {
                        s += a.powi(k as i32) * (2.0 * PI * b.powi(k as i32) * (zi + 0.5)).cos();
                    }
                    f += s;
                }
                let mut s0 = 0.0;
                for k in 0..=kmax {
                    s0 += a.powi(k as i32) * (2.0 * PI * b.powi(k as i32) * 0.5).cos();
                }
                f - d as f64 * s0
            }
        }
    }

    fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::BentCigar => "bent_cigar",
            BaseFunction::Discus => "discus",
            BaseFunction::Ellipsoid => "ellipsoid",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Schwefel => "schwefel",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Katsuura => "katsuura",
            BaseFunction::Weierstrass => "weierstrass",
        }
    }
}

/// One component of a composition function.
#[derive(Debug, Clone)]
struct Component {
    base: BaseFunction,
    shift: Vec<f64>,
    sigma: f64,
    lambda: f64,
    bias: f64,
}

#[derive(Debug, Clone)]
enum FunctionKind {
    Base(BaseFunction),
    /// Dimensions are permuted, split into contiguous segments, and each
    /// segment is fed to its own base landscape.
    Hybrid {
        segments: Vec<(BaseFunction, usize)>,
        permutation: Vec<usize>,
    },
    /// Distance-weighted sum of shifted base landscapes. The first
    /// component carries bias 0, so the global minimum value is 0 at its
    /// shift.
    Composition { components: Vec<Component> },
}

/// An immutable, thread-safe objective function.
#[derive(Debug, Clone)]
pub struct ObjectiveFunction {
    id: String,
    category: Category,
    dimension: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    optimum_value: f64,
    shift: Vec<f64>,
    /// Row-major `D x D` orthogonal matrix; `None` means identity.
    rotation: Option<Vec<f64>>,
    kind: FunctionKind,
}

impl ObjectiveFunction {
    /// Build a standalone shifted/rotated base function on `[-100, 100]^D`.
    pub fn shifted_rotated(
        id: impl Into<String>,
        base: BaseFunction,
        category: Category,
        shift: Vec<f64>,
        rotation: Option<Vec<f64>>,
    ) -> Result<Self> {
        let dimension = shift.len();
        if dimension < 2 {
            return Err(Error::InvalidConfig(format!(
                "dimension must be at least 2, got {dimension}"
            )));
        }
        if let Some(rot) = &rotation {
            if rot.len() != dimension * dimension {
                return Err(Error::InvalidConfig(
                    "rotation matrix size does not match dimension".into(),
                ));
            }
        }
        Ok(Self {
            id: id.into(),
            category,
            dimension,
            lower: vec![DOMAIN_LOWER; dimension],
            upper: vec![DOMAIN_UPPER; dimension],
            optimum_value: 0.0,
            shift,
            rotation,
            kind: FunctionKind::Base(base),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    /// Shift vector `o`; the optimizer location for non-composition members.
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// Row-major rotation matrix, if any.
    pub fn rotation(&self) -> Option<&[f64]> {
        self.rotation.as_deref()
    }

    /// Evaluate the function at `x`. Pure: repeated calls with the same
    /// argument are bit-identical, and out-of-bounds points are still
    /// defined.
    ///
    /// Panics if `x.len()` differs from the function's dimension.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.dimension,
            "dimension mismatch: function {} expects {} variables, got {}",
            self.id,
            self.dimension,
            x.len()
        );
        match &self.kind {
            FunctionKind::Base(base) => {
                let z = self.transformed(x);
                base.evaluate(&z) + self.optimum_value
            }
            FunctionKind::Hybrid {
                segments,
                permutation,
            } => {
                let z = self.transformed(x);
                let y: Vec<f64> = permutation.iter().map(|&j| z[j]).collect();
                let mut f = 0.0;
                let mut start = 0;
                for &(base, len) in segments {
                    f += base.evaluate(&y[start..start + len]);
                    start += len;
                }
                f + self.optimum_value
            }
            FunctionKind::Composition { components } => {
                self.evaluate_composition(components, x) + self.optimum_value
            }
        }
    }

    /// `z = M (x - o)`.
    fn transformed(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dimension;
        let mut delta = vec![0.0; d];
        for j in 0..d {
            delta[j] = x[j] - self.shift[j];
        }
        match &self.rotation {
            None => delta,
            Some(m) => {
                let mut z = vec![0.0; d];
                for i in 0..d {
                    let row = &m[i * d..(i + 1) * d];
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += row[j] * delta[j];
                    }
                    z[i] = acc;
                }
                z
            }
        }
    }

    fn evaluate_composition(&self, components: &[Component], x: &[f64]) -> f64 {
        let d = self.dimension as f64;
        let mut weights = Vec::with_capacity(components.len());
        for c in components {
            let dist_sq: f64 = x
                .iter()
                .zip(&c.shift)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if dist_sq == 0.0 {
                // Exact hit on a component optimum: that component wins outright.
                let z: Vec<f64> = x.iter().zip(&c.shift).map(|(a, b)| a - b).collect();
                return c.lambda * c.base.evaluate(&z) + c.bias;
            }
            let w = (1.0 / dist_sq.sqrt()) * (-dist_sq / (2.0 * d * c.sigma * c.sigma)).exp();
            weights.push(w);
        }
        let total: f64 = weights.iter().sum();
        let mut f = 0.0;
        for (c, w) in components.iter().zip(&weights) {
            let omega = if total > 0.0 {
                w / total
            } else {
                1.0 / components.len() as f64
            };
            let z: Vec<f64> = x.iter().zip(&c.shift).map(|(a, b)| a - b).collect();
            f += omega * (c.lambda * c.base.evaluate(&z) + c.bias);
        }
        f
    }
}

/// One row of the exportable suite manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub category: Category,
    pub seed: u64,
    pub dim: usize,
    pub optimum_value: f64,
}

/// Manifest of a suite built with `seed`, suitable for JSON export.
pub fn manifest(seed: u64, suite: &[ObjectiveFunction]) -> Vec<ManifestEntry> {
    suite
        .iter()
        .map(|f| ManifestEntry {
            id: f.id.clone(),
            category: f.category,
            seed,
            dim: f.dimension,
            optimum_value: f.optimum_value,
        })
        .collect()
}

/// Draw a random orthogonal matrix (row-major) as the sign-corrected Q
/// factor of a Gaussian matrix.
pub fn random_rotation(dimension: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gauss = DMatrix::from_fn(dimension, dimension, |_, _| {
        rng.sample::<f64, _>(StandardNormal)
    });
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dimension {
        if r[(j, j)] < 0.0 {
            for i in 0..dimension {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let mut flat = Vec::with_capacity(dimension * dimension);
    for i in 0..dimension {
        for j in 0..dimension {
            flat.push(q[(i, j)]);
        }
    }
    flat
}

fn draw_shift(dimension: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dimension)
        .map(|_| rng.random_range(-SHIFT_RANGE..=SHIFT_RANGE))
        .collect()
}

/// Split `dimension` across `len(weights)` segments, proportionally, with
/// every segment at least one dimension wide.
fn segment_sizes(dimension: usize, weights: &[f64]) -> Vec<usize> {
    let k = weights.len().min(dimension);
    let total: f64 = weights[..k].iter().sum();
    let mut sizes = Vec::with_capacity(k);
    let mut used = 0;
    for (i, w) in weights[..k].iter().enumerate() {
        let left = k - i - 1;
        let size = if i == k - 1 {
            dimension - used
        } else {
            let raw = ((w / total) * dimension as f64).floor() as usize;
            raw.max(1).min(dimension - used - left)
        };
        sizes.push(size);
        used += size;
    }
    sizes
}

/// Build the deterministic 14-function suite for `(seed, dimension)`.
///
/// The same `(seed, dimension)` pair always yields bit-identical shift
/// vectors, rotations, permutations, and composition centers.
pub fn make_suite(seed: u64, dimension: usize) -> Result<Vec<ObjectiveFunction>> {
    if dimension < 2 {
        return Err(Error::InvalidConfig(format!(
            "suite dimension must be at least 2, got {dimension}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = Vec::new();

    let bases = [
        (BaseFunction::BentCigar, Category::Unimodal),
        (BaseFunction::Discus, Category::Unimodal),
        (BaseFunction::Ellipsoid, Category::Unimodal),
        (BaseFunction::Rosenbrock, Category::Multimodal),
        (BaseFunction::Ackley, Category::Multimodal),
        (BaseFunction::Rastrigin, Category::Multimodal),
        (BaseFunction::Schwefel, Category::Multimodal),
        (BaseFunction::Griewank, Category::Multimodal),
        (BaseFunction::Katsuura, Category::Multimodal),
        (BaseFunction::Weierstrass, Category::Multimodal),
    ];
    for (base, category) in bases {
        let shift = draw_shift(dimension, &mut rng);
        let rotation = random_rotation(dimension, &mut rng);
        suite.push(ObjectiveFunction::shifted_rotated(
            base.name(),
            base,
            category,
            shift,
            Some(rotation),
        )?);
    }

    let hybrids: [(&str, &[BaseFunction], &[f64]); 2] = [
        (
            "hybrid_a",
            &[
                BaseFunction::Schwefel,
                BaseFunction::Rastrigin,
                BaseFunction::Ellipsoid,
            ],
            &[0.3, 0.3, 0.4],
        ),
        (
            "hybrid_b",
            &[
                BaseFunction::Griewank,
                BaseFunction::Weierstrass,
                BaseFunction::Rosenbrock,
            ],
            &[0.3, 0.3, 0.4],
        ),
    ];
    for (id, parts, weights) in hybrids {
        let shift = draw_shift(dimension, &mut rng);
        let rotation = random_rotation(dimension, &mut rng);
        let mut permutation: Vec<usize> = (0..dimension).collect();
        permutation.shuffle(&mut rng);
        let sizes = segment_sizes(dimension, weights);
        let segments = parts
            .iter()
            .copied()
            .zip(sizes.iter().copied())
            .collect::<Vec<_>>();
        suite.push(ObjectiveFunction {
            id: id.to_string(),
            category: Category::Hybrid,
            dimension,
            lower: vec![DOMAIN_LOWER; dimension],
            upper: vec![DOMAIN_UPPER; dimension],
            optimum_value: 0.0,
            shift,
            rotation: Some(rotation),
            kind: FunctionKind::Hybrid {
                segments,
                permutation,
            },
        });
    }

    // (base, sigma, lambda, bias) per component.
    type ComponentSpec = (BaseFunction, f64, f64, f64);
    let compositions: [(&str, &[ComponentSpec]); 2] = [
        (
            "composition_a",
            &[
                (BaseFunction::Rosenbrock, 10.0, 1.0, 0.0),
                (BaseFunction::Ellipsoid, 20.0, 1e-6, 100.0),
                (BaseFunction::Rastrigin, 30.0, 1.0, 200.0),
            ],
        ),
        (
            "composition_b",
            &[
                (BaseFunction::Schwefel, 10.0, 0.25, 0.0),
                (BaseFunction::Griewank, 30.0, 10.0, 100.0),
                (BaseFunction::Ackley, 50.0, 10.0, 200.0),
            ],
        ),
    ];
    for (id, spec) in compositions {
        let components: Vec<Component> = spec
            .iter()
            .map(|&(base, sigma, lambda, bias)| Component {
                base,
                shift: draw_shift(dimension, &mut rng),
                sigma,
                lambda,
                bias,
            })
            .collect();
        let shift = components[0].shift.clone();
        suite.push(ObjectiveFunction {
            id: id.to_string(),
            category: Category::Composition,
            dimension,
            lower: vec![DOMAIN_LOWER; dimension],
            upper: vec![DOMAIN_UPPER; dimension],
            optimum_value: 0.0,
            shift,
            rotation: None,
            kind: FunctionKind::Composition { components },
        });
    }

    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &[f64]) -> f64 {
        m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn suite_rejects_dimension_below_two() {
        assert!(make_suite(1, 1).is_err());
        assert!(make_suite(1, 0).is_err());
    }

    #[test]
    fn suite_is_deterministic() {
        let a = make_suite(1, 10).unwrap();
        let b = make_suite(1, 10).unwrap();
        assert_eq!(a.len(), b.len());
        let probe: Vec<f64> = (0..10).map(|i| (i as f64) * 7.3 - 40.0).collect();
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.shift(), fb.shift());
            assert_eq!(fa.rotation(), fb.rotation());
            assert_eq!(fa.evaluate(&probe).to_bits(), fb.evaluate(&probe).to_bits());
        }
    }

    #[test]
    fn suite_spans_all_categories() {
        let suite = make_suite(3, 10).unwrap();
        assert!(suite.len() >= 12);
        for cat in [
            Category::Unimodal,
            Category::Multimodal,
            Category::Hybrid,
            Category::Composition,
        ] {
            assert!(suite.iter().any(|f| f.category() == cat), "{cat:?} missing");
        }
    }

    #[test]
    fn rotations_are_orthogonal() {
        let suite = make_suite(7, 12).unwrap();
        for f in &suite {
            let Some(m) = f.rotation() else { continue };
            let d = f.dimension();
            // ||M^T M - I||_inf
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += m[k * d + i] * m[k * d + j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((acc - expect).abs());
                }
            }
            assert!(worst < 1e-9, "{}: orthogonality defect {worst}", f.id());
        }
    }

    #[test]
    fn optimum_maps_to_optimum_value() {
        let suite = make_suite(11, 10).unwrap();
        for f in &suite {
            if f.category() == Category::Composition {
                continue;
            }
            let v = f.evaluate(f.shift());
            assert!(
                (v - f.optimum_value()).abs() < 1e-10,
                "{}: f(o) = {v}",
                f.id()
            );
        }
    }

    #[test]
    fn composition_value_at_first_center_is_zero() {
        let suite = make_suite(11, 10).unwrap();
        for f in suite.iter().filter(|f| f.category() == Category::Composition) {
            assert_eq!(f.evaluate(f.shift()), 0.0, "{}", f.id());
        }
    }

    #[test]
    fn bent_cigar_identity_zero_shift_at_origin() {
        let f = ObjectiveFunction::shifted_rotated(
            "cigar",
            BaseFunction::BentCigar,
            Category::Unimodal,
            vec![0.0; 4],
            None,
        )
        .unwrap();
        assert_eq!(f.evaluate(&[0.0; 4]), 0.0);
    }

    #[test]
    fn ackley_is_exact_at_its_optimum() {
        let shift = vec![3.0, -7.0, 12.5];
        let f = ObjectiveFunction::shifted_rotated(
            "ackley",
            BaseFunction::Ackley,
            Category::Multimodal,
            shift.clone(),
            None,
        )
        .unwrap();
        assert_eq!(f.evaluate(&shift), 0.0);
    }

    #[test]
    fn rastrigin_unit_step_from_optimum() {
        // Hand evaluation: 1 + 10(1 - cos 2π) = 1 on the moved axis.
        let shift = vec![5.0, -2.0];
        let f = ObjectiveFunction::shifted_rotated(
            "rastrigin",
            BaseFunction::Rastrigin,
            Category::Multimodal,
            shift.clone(),
            None,
        )
        .unwrap();
        assert!(f.evaluate(&shift).abs() < 1e-12);
        let x = [shift[0] + 1.0, shift[1]];
        assert!((f.evaluate(&x) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evaluation_is_pure() {
        let suite = make_suite(5, 6).unwrap();
        let x = [4.0, -3.0, 99.0, -99.5, 0.25, 17.0];
        for f in &suite {
            assert_eq!(f.evaluate(&x).to_bits(), f.evaluate(&x).to_bits());
        }
    }

    #[test]
    fn shift_covariance_without_rotation() {
        let shift = vec![12.0, -44.0, 3.5, 9.0];
        for base in [
            BaseFunction::BentCigar,
            BaseFunction::Rastrigin,
            BaseFunction::Schwefel,
            BaseFunction::Katsuura,
        ] {
            let shifted = ObjectiveFunction::shifted_rotated(
                "s",
                base,
                Category::Multimodal,
                shift.clone(),
                None,
            )
            .unwrap();
            let centered = ObjectiveFunction::shifted_rotated(
                "c",
                base,
                Category::Multimodal,
                vec![0.0; 4],
                None,
            )
            .unwrap();
            let x = [1.5, -2.0, 30.0, -8.0];
            let moved: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let lhs = shifted.evaluate(&moved);
            let rhs = centered.evaluate(&x);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0),
                "{base:?}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn evaluate_panics_on_wrong_dimension() {
        let suite = make_suite(1, 4).unwrap();
        suite[0].evaluate(&[0.0; 3]);
    }

    #[test]
    fn manifest_round_trips_as_json() {
        let suite = make_suite(9, 5).unwrap();
        let entries = manifest(9, &suite);
        assert_eq!(entries.len(), suite.len());
        let text = serde_json::to_string(&entries).unwrap();
        let back: Vec<ManifestEntry> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.len(), entries.len());
        assert!(entries.iter().all(|e| e.seed == 9 && e.dim == 5));
    }

    #[test]
    fn schwefel_penalized_branches_stay_above_optimum() {
        let f = ObjectiveFunction::shifted_rotated(
            "schwefel",
            BaseFunction::Schwefel,
            Category::Multimodal,
            vec![0.0; 3],
            None,
        )
        .unwrap();
        // Points that push the inner variable beyond +-500.
        for x in [[90.0, 90.0, 90.0], [-100.0, -100.0, -100.0], [100.0, -100.0, 0.0]] {
            assert!(f.evaluate(&x) > 0.0);
        }
    }

    #[test]
    fn segment_sizes_cover_dimension() {
        for d in 2..40 {
            let sizes = segment_sizes(d, &[0.3, 0.3, 0.4]);
            assert_eq!(sizes.iter().sum::<usize>(), d);
            assert!(sizes.iter().all(|&s| s >= 1));
        }
    }

    #[test]
    fn rotation_probe_is_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let m = random_rotation(8, &mut rng);
        assert_eq!(m.len(), 64);
        assert!(max_abs(&m) <= 1.0 + 1e-12);
    }
}
