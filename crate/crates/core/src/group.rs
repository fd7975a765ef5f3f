//! Groups of Heisenberg type in logarithmic coordinates.
//!
//! A point is `g = (z, σ)` with `z ∈ ℝ^m` horizontal and `σ ∈ ℝ^k` vertical.
//! The step-two Baker–Campbell–Hausdorff law reads
//!
//! ```text
//! (z, σ) ∘ (z', σ') = (z + z', σ + σ' + ½ [z, z']),   [z, z']_a = ⟨J_a z, z'⟩
//! ```
//!
//! and the Koranyi gauge is `|(z, σ)| = (|z|⁴ + 16 |σ|²)^{1/4}`. With `k = 0`
//! everything degenerates to Euclidean `ℝ^m` with vector addition and the
//! Euclidean norm.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::report::{CheckRecord, CheckSet, Provenance};

pub type Coords = SmallVec<[f64; 4]>;

/// Tolerance for the H-type structure relations.
pub const HTYPE_TOL: f64 = 1e-12;

/// A point `(z, σ)` in logarithmic coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub z: Coords,
    pub sigma: Coords,
}

impl GroupPoint {
    pub fn new(z: &[f64], sigma: &[f64]) -> Self {
        GroupPoint {
            z: Coords::from_slice(z),
            sigma: Coords::from_slice(sigma),
        }
    }

    pub fn identity(m: usize, k: usize) -> Self {
        GroupPoint {
            z: SmallVec::from_elem(0.0, m),
            sigma: SmallVec::from_elem(0.0, k),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.z.iter().chain(self.sigma.iter()).all(|&x| x == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.z.iter().chain(self.sigma.iter()).all(|x| x.is_finite())
    }

    pub fn z_norm_sq(&self) -> f64 {
        self.z.iter().map(|x| x * x).sum()
    }

    pub fn sigma_norm_sq(&self) -> f64 {
        self.sigma.iter().map(|x| x * x).sum()
    }

    /// Coordinates flattened as `(z, σ)`.
    pub fn coords(&self) -> Vec<f64> {
        self.z.iter().chain(self.sigma.iter()).copied().collect()
    }

    /// Euclidean distance between coordinate vectors.
    pub fn coord_distance(&self, other: &GroupPoint) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .chain(self.sigma.iter().zip(&other.sigma))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(z={:?}, σ={:?})", self.z.as_slice(), self.sigma.as_slice())
    }
}

/// Non-negative value of the homogeneous gauge.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GaugeValue(pub f64);

impl GaugeValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which named family a [`GroupSpec`] was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Euclidean,
    Heisenberg,
    Quaternionic,
    Custom,
}

/// A homogeneous group of Heisenberg type (or Euclidean space when `k = 0`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    m: usize,
    k: usize,
    /// Row-major `m × m` structure maps `J_1, …, J_k`.
    j: Vec<Vec<f64>>,
    kind: GroupKind,
    id: String,
    #[serde(skip)]
    ball_volume: OnceLock<crate::measure::BallVolume>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.k == other.k && self.j == other.j
    }
}

impl GroupSpec {
    /// Euclidean `ℝ^n` with vector addition.
    pub fn euclidean(n: usize) -> Self {
        assert!(n >= 1, "euclidean dimension must be positive");
        GroupSpec {
            m: n,
            k: 0,
            j: Vec::new(),
            kind: GroupKind::Euclidean,
            id: format!("euclidean:{n}"),
            ball_volume: OnceLock::new(),
        }
    }

    /// Heisenberg group `ℍⁿ`: `m = 2n`, `k = 1`, `J = [[0, I], [−I, 0]]`.
    pub fn heisenberg(n: usize) -> Self {
        assert!(n >= 1, "heisenberg index must be positive");
        let m = 2 * n;
        let mut j = vec![0.0; m * m];
        for i in 0..n {
            j[i * m + (n + i)] = 1.0;
            j[(n + i) * m + i] = -1.0;
        }
        GroupSpec {
            m,
            k: 1,
            j: vec![j],
            kind: GroupKind::Heisenberg,
            id: format!("heisenberg:{n}"),
            ball_volume: OnceLock::new(),
        }
    }

    /// Quaternionic Heisenberg group with `m = 4`, `k = 3`; the structure maps
    /// are left multiplication by `i`, `j`, `k` on `ℍ ≅ ℝ⁴` in the basis
    /// `(1, i, j, k)`.
    pub fn quaternionic(n: usize) -> Result<Self> {
        if n != 1 {
            return Err(Error::Unsupported(format!(
                "quaternionic:{n} (only n = 1 ships)"
            )));
        }
        // Columns are the images of the basis vectors.
        let li = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        let lj = [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ];
        let lk = [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ];
        let flat = |a: [[f64; 4]; 4]| a.iter().flatten().copied().collect::<Vec<_>>();
        Ok(GroupSpec {
            m: 4,
            k: 3,
            j: vec![flat(li), flat(lj), flat(lk)],
            kind: GroupKind::Quaternionic,
            id: "quaternionic:1".to_string(),
            ball_volume: OnceLock::new(),
        })
    }

    /// A custom H-type group. The structure maps must pass [`validate_htype`].
    pub fn custom(m: usize, j: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("horizontal dimension must be positive".into()));
        }
        for (a, ja) in j.iter().enumerate() {
            if ja.len() != m * m {
                return Err(Error::InvalidInput(format!(
                    "J_{} has {} entries, expected {}",
                    a + 1,
                    ja.len(),
                    m * m
                )));
            }
        }
        let spec = GroupSpec {
            m,
            k: j.len(),
            j,
            kind: GroupKind::Custom,
            id: format!("custom:{m}x{}", 0),
            ball_volume: OnceLock::new(),
        };
        let report = validate_htype(&spec);
        if !report.all_pass() {
            let first = report
                .records
                .iter()
                .find(|r| r.status.is_fail())
                .map(|r| r.detail.clone())
                .unwrap_or_default();
            return Err(Error::InvalidInput(format!("structure maps are not H-type: {first}")));
        }
        let id = format!("custom:{}x{}", spec.m, spec.k);
        Ok(GroupSpec { id, ..spec })
    }

    /// Unchecked constructor used to exercise the validator.
    #[doc(hidden)]
    pub fn custom_unchecked(m: usize, j: Vec<Vec<f64>>) -> Self {
        GroupSpec {
            m,
            k: j.len(),
            j,
            kind: GroupKind::Custom,
            id: "custom:unchecked".into(),
            ball_volume: OnceLock::new(),
        }
    }

    /// Parse a preset id such as `euclidean:3`, `heisenberg:1`, `quaternionic:1`.
    pub fn parse(id: &str) -> Result<Self> {
        let (name, n) = id
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("group id `{id}` must look like name:n")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad dimension in group id `{id}`")))?;
        if n == 0 {
            return Err(Error::InvalidInput(format!("dimension must be positive in `{id}`")));
        }
        match name.trim() {
            "euclidean" => Ok(Self::euclidean(n)),
            "heisenberg" => Ok(Self::heisenberg(n)),
            "quaternionic" => Self::quaternionic(n),
            other => Err(Error::InvalidInput(format!("unknown group family `{other}`"))),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Homogeneous dimension `Q = m + 2k`.
    pub fn q(&self) -> usize {
        self.m + 2 * self.k
    }

    pub fn qf(&self) -> f64 {
        self.q() as f64
    }

    /// Topological dimension `m + k`.
    pub fn dim(&self) -> usize {
        self.m + self.k
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_euclidean(&self) -> bool {
        self.k == 0
    }

    pub fn structure_maps(&self) -> &[Vec<f64>] {
        &self.j
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.m, self.k)
    }

    pub(crate) fn ball_volume_cell(&self) -> &OnceLock<crate::measure::BallVolume> {
        &self.ball_volume
    }

    pub fn check_point(&self, p: &GroupPoint) -> Result<()> {
        if p.z.len() != self.m {
            return Err(Error::DimensionMismatch {
                what: "horizontal coordinates",
                expected: self.m,
                got: p.z.len(),
            });
        }
        if p.sigma.len() != self.k {
            return Err(Error::DimensionMismatch {
                what: "vertical coordinates",
                expected: self.k,
                got: p.sigma.len(),
            });
        }
        Ok(())
    }

    /// `[z, z']_a = ⟨J_a z, z'⟩`.
    fn bracket_into(&self, z: &[f64], zp: &[f64], out: &mut [f64]) {
        let m = self.m;
        for (a, ja) in self.j.iter().enumerate() {
            let mut acc = 0.0;
            for r in 0..m {
                let row = &ja[r * m..(r + 1) * m];
                let jz: f64 = row.iter().zip(z).map(|(x, y)| x * y).sum();
                acc += jz * zp[r];
            }
            out[a] = acc;
        }
    }

    /// Group product without dimension checks; callers own the invariant.
    pub(crate) fn mul_unchecked(&self, p: &GroupPoint, q: &GroupPoint) -> GroupPoint {
        let z: Coords = p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect();
        let mut sigma: Coords = p.sigma.iter().zip(&q.sigma).map(|(a, b)| a + b).collect();
        if self.k > 0 {
            let mut br = [0.0; 8];
            let br = if self.k <= 8 {
                &mut br[..self.k]
            } else {
                unreachable!("vertical dimension above 8 is not constructible")
            };
            self.bracket_into(&p.z, &q.z, br);
            for (s, b) in sigma.iter_mut().zip(br.iter()) {
                *s += 0.5 * b;
            }
        }
        GroupPoint { z, sigma }
    }

    pub fn multiply(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.mul_unchecked(p, q))
    }

    pub fn inverse(&self, p: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(p)?;
        Ok(inverse_unchecked(p))
    }

    /// `δ_λ(z, σ) = (λ z, λ² σ)`.
    pub fn dilate(&self, lambda: f64, p: &GroupPoint) -> Result<GroupPoint> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "dilation factor must be positive and finite, got {lambda}"
            )));
        }
        self.check_point(p)?;
        Ok(dilate_unchecked(lambda, p))
    }

    pub fn gauge(&self, p: &GroupPoint) -> Result<GaugeValue> {
        self.check_point(p)?;
        Ok(GaugeValue(self.gauge_unchecked(p)))
    }

    pub(crate) fn gauge_unchecked(&self, p: &GroupPoint) -> f64 {
        let z2 = p.z_norm_sq();
        if self.k == 0 {
            z2.sqrt()
        } else {
            (z2 * z2 + 16.0 * p.sigma_norm_sq()).sqrt().sqrt()
        }
    }

    /// Gauge distance `|p⁻¹ ∘ q|`.
    pub(crate) fn distance(&self, p: &GroupPoint, q: &GroupPoint) -> f64 {
        self.gauge_unchecked(&self.mul_unchecked(&inverse_unchecked(p), q))
    }

    /// Unit horizontal vector `e_j` as a group element `(e_j, 0)`.
    pub(crate) fn horizontal_unit(&self, j: usize, t: f64) -> GroupPoint {
        let mut p = self.identity();
        p.z[j] = t;
        p
    }
}

pub(crate) fn inverse_unchecked(p: &GroupPoint) -> GroupPoint {
    GroupPoint {
        z: p.z.iter().map(|x| -x).collect(),
        sigma: p.sigma.iter().map(|x| -x).collect(),
    }
}

pub(crate) fn dilate_unchecked(lambda: f64, p: &GroupPoint) -> GroupPoint {
    let l2 = lambda * lambda;
    GroupPoint {
        z: p.z.iter().map(|x| lambda * x).collect(),
        sigma: p.sigma.iter().map(|x| l2 * x).collect(),
    }
}

/// Check skewness `J_aᵀ = −J_a` and `J_a J_b + J_b J_a = −2 δ_ab I`.
pub fn validate_htype(spec: &GroupSpec) -> CheckSet {
    let m = spec.m;
    let mut set = CheckSet::default();
    let jm = spec.structure_maps();
    let mut shape_ok = true;
    for (a, ja) in jm.iter().enumerate() {
        if ja.len() != m * m {
            shape_ok = false;
            set.push(CheckRecord::fail(
                format!("htype.shape.J{}", a + 1),
                "structure maps are m×m",
                Provenance::Algebraic,
                format!("J_{} has {} entries, expected {}", a + 1, ja.len(), m * m),
            ));
        }
    }
    if !shape_ok {
        return set;
    }
    for (a, ja) in jm.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut at = (0, 0);
        for r in 0..m {
            for c in 0..m {
                let v = (ja[r * m + c] + ja[c * m + r]).abs();
                if v > worst {
                    worst = v;
                    at = (r, c);
                }
            }
        }
        let id = format!("htype.skew.J{}", a + 1);
        let rec = if worst <= HTYPE_TOL {
            CheckRecord::pass(id, "structure maps are skew-symmetric", Provenance::Algebraic)
        } else {
            CheckRecord::fail(
                id,
                "structure maps are skew-symmetric",
                Provenance::Algebraic,
                format!(
                    "skewness violation in J_{} at entry ({}, {}): |J + Jᵀ| = {worst:.3e}",
                    a + 1,
                    at.0,
                    at.1
                ),
            )
        };
        set.push(rec.with_value(worst).with_tolerance(HTYPE_TOL));
    }
    for a in 0..jm.len() {
        for b in a..jm.len() {
            let mut worst = 0.0f64;
            for r in 0..m {
                for c in 0..m {
                    let mut acc = 0.0;
                    for t in 0..m {
                        acc += jm[a][r * m + t] * jm[b][t * m + c] + jm[b][r * m + t] * jm[a][t * m + c];
                    }
                    let target = if a == b && r == c { -2.0 } else { 0.0 };
                    worst = worst.max((acc - target).abs());
                }
            }
            let id = format!("htype.anticommute.J{}J{}", a + 1, b + 1);
            let anchor = "J_a J_b + J_b J_a = -2 δ_ab I";
            let rec = if worst <= HTYPE_TOL {
                CheckRecord::pass(id, anchor, Provenance::Algebraic)
            } else {
                CheckRecord::fail(
                    id,
                    anchor,
                    Provenance::Algebraic,
                    format!("anticommutation violated for pair ({}, {}): residual {worst:.3e}", a + 1, b + 1),
                )
            };
            set.push(rec.with_value(worst).with_tolerance(HTYPE_TOL));
        }
    }
    set
}

/// `‖a − b‖_∞ / max(‖a‖_∞, ‖b‖_∞)`, zero when both vanish.
fn rel_gap(a: &GroupPoint, b: &GroupPoint) -> f64 {
    let ca = a.coords();
    let cb = b.coords();
    let diff = ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = ca.iter().chain(&cb).map(|x| x.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn random_point(spec: &GroupSpec, rng: &mut impl rand::Rng) -> GroupPoint {
    // Log-uniform magnitudes over four decades exercise cancellation in
    // the bracket term.
    let coord = |rng: &mut dyn rand::RngCore| {
        let mag = 10f64.powf(rand::Rng::gen_range(rng, -2.0..2.0));
        if rand::Rng::gen_bool(rng, 0.5) {
            mag
        } else {
            -mag
        }
    };
    let z: Vec<f64> = (0..spec.m).map(|_| coord(rng)).collect();
    let sigma: Vec<f64> = (0..spec.k).map(|_| coord(rng)).collect();
    GroupPoint::new(&z, &sigma)
}

/// Associativity, identity, inverse, the anti-automorphism `(pq)⁻¹ =
/// q⁻¹p⁻¹`, dilations as automorphisms and gauge homogeneity on `cases`
/// random triples, and the gauge triangle inequality on `100 · cases`
/// random pairs. Each record carries the worst relative gap.
pub fn algebra_checks(spec: &GroupSpec, cases: usize, seed: u64, tol: f64) -> CheckSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, f64::NEG_INFINITY];
    let e = spec.identity();
    for _ in 0..cases {
        let p = random_point(spec, &mut rng);
        let q = random_point(spec, &mut rng);
        let r = random_point(spec, &mut rng);
        let lambda = 10f64.powf(rng.gen_range(-1.0..1.0));
        let gaps = [
            rel_gap(&spec.mul_unchecked(&spec.mul_unchecked(&p, &q), &r), &spec.mul_unchecked(&p, &spec.mul_unchecked(&q, &r))),
            rel_gap(&spec.mul_unchecked(&p, &e), &p).max(rel_gap(&spec.mul_unchecked(&e, &p), &p)),
            {
                let pi = inverse_unchecked(&p);
                let left = spec.mul_unchecked(&p, &pi);
                let right = spec.mul_unchecked(&pi, &p);
                let scale = p.coords().iter().fold(0.0f64, |a, x| a.max(x.abs()));
                left.coords().iter().chain(right.coords().iter()).fold(0.0f64, |a, x| a.max(x.abs())) / scale
            },
            rel_gap(
                &inverse_unchecked(&spec.mul_unchecked(&p, &q)),
                &spec.mul_unchecked(&inverse_unchecked(&q), &inverse_unchecked(&p)),
            ),
            rel_gap(
                &dilate_unchecked(lambda, &spec.mul_unchecked(&p, &q)),
                &spec.mul_unchecked(&dilate_unchecked(lambda, &p), &dilate_unchecked(lambda, &q)),
            ),
            {
                let a = spec.gauge_unchecked(&dilate_unchecked(lambda, &p));
                let b = lambda * spec.gauge_unchecked(&p);
                (a - b).abs() / b
            },
        ];
        for (w, g) in worst.iter_mut().zip(gaps) {
            *w = w.max(g);
        }
    }
    // Excess of |pq| over |p| + |q|; zero unless the inequality fails.
    for _ in 0..100 * cases {
        let p = random_point(spec, &mut rng);
        let q = random_point(spec, &mut rng);
        let pq = spec.gauge_unchecked(&spec.mul_unchecked(&p, &q));
        let sum = spec.gauge_unchecked(&p) + spec.gauge_unchecked(&q);
        worst[6] = worst[6].max((pq - sum) / sum);
    }
    let names = [
        ("associativity", "(pq)r = p(qr)"),
        ("identity", "pe = ep = p"),
        ("inverse", "pp⁻¹ = p⁻¹p = e"),
        ("inverse_antimorphism", "(pq)⁻¹ = q⁻¹p⁻¹"),
        ("dilation_automorphism", "δ_λ(pq) = δ_λ(p) δ_λ(q)"),
        ("homogeneity", "|δ_λ p| = λ|p|"),
        ("triangle", "|pq| ≤ |p| + |q|"),
    ];
    let mut set = CheckSet::default();
    for ((name, anchor), w) in names.iter().zip(worst) {
        set.push(
            CheckRecord::verdict(format!("group.algebra.{}.{name}", spec.id()), *anchor, Provenance::Algebraic, w <= tol)
                .with_value(w)
                .with_tolerance(tol)
                .with_input("cases", if *name == "triangle" { 100 * cases } else { cases }),
        );
    }
    set
}
