//! Copula-based scenario generators for power studies.
//!
//! Both scenarios draw independent rows from a piecewise-stationary copula
//! model: segment boundaries split [0, n) and each segment has its own
//! copula law. Scenario 1 keeps a Student-t(3) copula throughout and
//! switches the correlation matrix between the identity and an
//! equicorrelation matrix; Scenario 2 keeps one fixed random correlation
//! matrix and switches the copula family between Student-t(3) and Gaussian
//! (an extremal-dependence change invisible to the correlation itself).
//!
//! Uniform-scale draws can be emitted as-is or pushed through Pareto(2) or
//! standard normal margins.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::ContinuousCDF;

use crate::{MopedError, Result};

/// Degrees of freedom of the Student-t copula; the closed-form CDF below is
/// specific to this value.
pub const T_COPULA_DF: f64 = 3.0;

/// Keep uniforms strictly inside (0, 1) so margin transforms stay finite.
const UNIFORM_CLAMP: f64 = 1e-15;

/// Output scale of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Margin {
    /// Copula uniforms in (0, 1).
    Uniform,
    /// Pareto(2) margins, x = (1 - u)^{-1/2}, the detector's native scale.
    Pareto2,
    /// Standard normal margins.
    Gaussian,
}

/// Which of the two simulation scenarios to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    /// Student-t(3) copula everywhere; correlation switches between
    /// identity and equicorrelation(rho).
    CorrelationSwitch,
    /// Fixed random correlation; copula family switches between
    /// Student-t(3) and Gaussian.
    FamilySwitch,
}

/// Copula family of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
}

/// The sampling law of one stationary segment.
#[derive(Debug, Clone)]
pub struct SegmentLaw {
    family: CopulaFamily,
    omega: Array2<f64>,
}

impl SegmentLaw {
    /// Validates the correlation matrix (symmetric, unit diagonal, positive
    /// definite) and builds the law.
    pub fn new(family: CopulaFamily, omega: Array2<f64>) -> Result<Self> {
        let d = omega.nrows();
        if d < 2 || omega.ncols() != d {
            return Err(MopedError::InvalidSpec(
                "correlation matrix must be square with d >= 2".into(),
            ));
        }
        for i in 0..d {
            if omega[(i, i)] != 1.0 {
                return Err(MopedError::InvalidSpec(
                    "correlation matrix must have unit diagonal".into(),
                ));
            }
            for j in 0..i {
                if omega[(i, j)] != omega[(j, i)] {
                    return Err(MopedError::InvalidSpec(
                        "correlation matrix must be symmetric".into(),
                    ));
                }
            }
        }
        cholesky_lower(&omega)?;
        Ok(Self { family, omega })
    }

    /// The copula family.
    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    /// The correlation matrix.
    pub fn omega(&self) -> &Array2<f64> {
        &self.omega
    }
}

/// Specification of one simulated dataset.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    /// Which change mechanism to simulate.
    pub scenario: Scenario,
    /// Series length.
    pub n: usize,
    /// Dimension.
    pub d: usize,
    /// Number of equally spaced change points (0, 1, or 2). Ignored when
    /// `change_points` is supplied.
    pub q: usize,
    /// Pairwise correlation of the equicorrelation segments (scenario
    /// `CorrelationSwitch` only).
    pub rho: f64,
    /// Seed for the random correlation matrix (scenario `FamilySwitch`
    /// only).
    pub omega_seed: u64,
    /// Output scale.
    pub margin: Margin,
    /// Explicit change locations overriding equal spacing.
    pub change_points: Option<Vec<usize>>,
}

impl ScenarioSpec {
    /// The effective change locations: explicit ones when given, otherwise
    /// floor(l * n / (q + 1)) for l = 1..=q.
    pub fn effective_change_points(&self) -> Vec<usize> {
        match &self.change_points {
            Some(cps) => cps.clone(),
            None => (1..=self.q)
                .map(|l| l * self.n / (self.q + 1))
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(MopedError::InvalidSpec("dimension d must be at least 2".into()));
        }
        if self.change_points.is_none() && self.q > 2 {
            return Err(MopedError::InvalidSpec(
                "equally spaced change points support q in {0, 1, 2}".into(),
            ));
        }
        if self.scenario == Scenario::CorrelationSwitch {
            let lower = -1.0 / (self.d as f64 - 1.0);
            if !(self.rho > lower && self.rho < 1.0) {
                return Err(MopedError::InvalidSpec(format!(
                    "rho must lie in ({lower}, 1) for d = {}",
                    self.d
                )));
            }
        }
        let cps = self.effective_change_points();
        let mut previous = 0usize;
        for &c in &cps {
            if c <= previous && previous > 0 || c == 0 || c >= self.n {
                return Err(MopedError::InvalidSpec(
                    "change points must be strictly increasing within (0, n)".into(),
                ));
            }
            if c < previous + 2 {
                return Err(MopedError::InvalidSpec(
                    "every segment needs at least two observations".into(),
                ));
            }
            previous = c;
        }
        if self.n < previous + 2 {
            return Err(MopedError::InvalidSpec(
                "every segment needs at least two observations".into(),
            ));
        }
        Ok(())
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
fn cholesky_lower(omega: &Array2<f64>) -> Result<Array2<f64>> {
    let d = omega.nrows();
    let m = nalgebra::DMatrix::from_fn(d, d, |i, j| omega[(i, j)]);
    let chol = m.cholesky().ok_or(MopedError::NotPositiveDefinite)?;
    let l = chol.l();
    Ok(Array2::from_shape_fn((d, d), |(i, j)| l[(i, j)]))
}

/// The d x d identity as a correlation matrix.
pub fn identity_correlation(d: usize) -> Array2<f64> {
    Array2::eye(d)
}

/// Equicorrelation matrix: unit diagonal, `rho` everywhere else.
///
/// Positive definite iff rho in (-1/(d-1), 1).
pub fn equicorrelation(d: usize, rho: f64) -> Result<Array2<f64>> {
    let lower = -1.0 / (d as f64 - 1.0);
    if !(rho > lower && rho < 1.0) {
        return Err(MopedError::InvalidSpec(format!(
            "rho must lie in ({lower}, 1) for d = {d}"
        )));
    }
    Ok(Array2::from_shape_fn(
        (d, d),
        |(i, j)| if i == j { 1.0 } else { rho },
    ))
}

/// A random correlation matrix: the Gram matrix of a d x (d+2) standard
/// normal draw, rescaled to unit diagonal. Deterministic in `seed`.
pub fn random_correlation(d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = Array2::from_shape_fn((d, d + 2), |_| rng.sample::<f64, _>(StandardNormal));
        let gram = a.dot(&a.t());
        let scale: Vec<f64> = (0..d).map(|i| gram[(i, i)].sqrt()).collect();
        let mut omega = Array2::from_shape_fn((d, d), |(i, j)| {
            gram[(i, j)] / (scale[i] * scale[j])
        });
        for i in 0..d {
            omega[(i, i)] = 1.0;
        }
        // enforce exact symmetry against floating-point division noise
        for i in 0..d {
            for j in 0..i {
                let v = omega[(i, j)];
                omega[(j, i)] = v;
            }
        }
        if cholesky_lower(&omega).is_ok() {
            return omega;
        }
        // numerically degenerate draw: try again with fresh randomness
    }
}

fn clamp_uniform(u: f64) -> f64 {
    u.clamp(UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP)
}

/// CDF of the Student-t distribution with 3 degrees of freedom:
/// F(x) = 1/2 + (1/pi) * [ x / (sqrt(3) (1 + x^2/3)) + arctan(x / sqrt(3)) ].
pub fn student_t3_cdf(x: f64) -> f64 {
    let s = x / 3f64.sqrt();
    0.5 + (s / (1.0 + x * x / 3.0) + s.atan()) / std::f64::consts::PI
}

/// Draws `m` rows from the Gaussian copula with correlation `omega`:
/// Z ~ N(0, omega) mapped through the standard normal CDF componentwise.
pub fn sample_gaussian_copula(
    m: usize,
    omega: &Array2<f64>,
    rng: &mut impl Rng,
) -> Result<Array2<f64>> {
    sample_copula(CopulaFamily::Gaussian, m, omega, rng)
}

/// Draws `m` rows from the Student-t(3) copula with correlation `omega`:
/// T = Z / sqrt(W / 3) with Z ~ N(0, omega) and W ~ chi-square(3), mapped
/// through the t(3) CDF componentwise.
pub fn sample_t_copula(m: usize, omega: &Array2<f64>, rng: &mut impl Rng) -> Result<Array2<f64>> {
    sample_copula(CopulaFamily::StudentT, m, omega, rng)
}

fn sample_copula(
    family: CopulaFamily,
    m: usize,
    omega: &Array2<f64>,
    rng: &mut impl Rng,
) -> Result<Array2<f64>> {
    let d = omega.nrows();
    let l = cholesky_lower(omega)?;
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal");
    let chi2 = ChiSquared::new(T_COPULA_DF).expect("chi-square(3)");

    let mut out = Array2::zeros((m, d));
    let mut z = vec![0.0; d];
    for t in 0..m {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let scale = match family {
            CopulaFamily::Gaussian => 1.0,
            CopulaFamily::StudentT => {
                let w: f64 = chi2.sample(rng);
                (T_COPULA_DF / w).sqrt()
            }
        };
        for i in 0..d {
            let mut x = 0.0;
            for j in 0..=i {
                x += l[(i, j)] * z[j];
            }
            let u = match family {
                CopulaFamily::Gaussian => normal.cdf(x),
                CopulaFamily::StudentT => student_t3_cdf(x * scale),
            };
            out[(t, i)] = clamp_uniform(u);
        }
    }
    Ok(out)
}

/// The per-segment laws a spec induces (q + 1 laws for q change points).
///
/// Scenario `CorrelationSwitch`: Student-t(3) copula in every segment,
/// correlation alternating identity, equicorrelation(rho), identity, ...;
/// with q = 0 the single segment uses equicorrelation(rho). Scenario
/// `FamilySwitch`: one random correlation matrix shared by all segments,
/// family alternating Student-t, Gaussian, Student-t, ...
pub fn segment_laws(spec: &ScenarioSpec) -> Result<Vec<SegmentLaw>> {
    spec.validate()?;
    let segments = spec.effective_change_points().len() + 1;
    match spec.scenario {
        Scenario::CorrelationSwitch => {
            let correlated = equicorrelation(spec.d, spec.rho)?;
            if segments == 1 {
                return Ok(vec![SegmentLaw::new(CopulaFamily::StudentT, correlated)?]);
            }
            (0..segments)
                .map(|l| {
                    let omega = if l % 2 == 0 {
                        identity_correlation(spec.d)
                    } else {
                        correlated.clone()
                    };
                    SegmentLaw::new(CopulaFamily::StudentT, omega)
                })
                .collect()
        }
        Scenario::FamilySwitch => {
            let omega = random_correlation(spec.d, spec.omega_seed);
            (0..segments)
                .map(|l| {
                    let family = if l % 2 == 0 {
                        CopulaFamily::StudentT
                    } else {
                        CopulaFamily::Gaussian
                    };
                    SegmentLaw::new(family, omega.clone())
                })
                .collect()
        }
    }
}

/// Applies the requested margin transform to copula uniforms, in place.
fn transform_margins(uniforms: &mut Array2<f64>, margin: Margin) {
    match margin {
        Margin::Uniform => {}
        Margin::Pareto2 => {
            uniforms.mapv_inplace(|u| (1.0 - u).recip().sqrt());
        }
        Margin::Gaussian => {
            let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal");
            uniforms.mapv_inplace(|u| normal.inverse_cdf(u));
        }
    }
}

/// Generates one dataset from `spec`, returning the panel on the requested
/// scale together with the true change locations.
///
/// Rows are independent across time; segment l covers the half-open index
/// range between consecutive boundaries and is drawn from `segment_laws`'s
/// l-th law.
pub fn generate_scenario(
    spec: &ScenarioSpec,
    rng: &mut impl Rng,
) -> Result<(Array2<f64>, Vec<usize>)> {
    let laws = segment_laws(spec)?;
    let change_points = spec.effective_change_points();

    let mut boundaries = Vec::with_capacity(change_points.len() + 2);
    boundaries.push(0);
    boundaries.extend_from_slice(&change_points);
    boundaries.push(spec.n);

    let mut values = Array2::zeros((spec.n, spec.d));
    for (law, pair) in laws.iter().zip(boundaries.windows(2)) {
        let (start, end) = (pair[0], pair[1]);
        let block = sample_copula(law.family(), end - start, law.omega(), rng)?;
        values
            .slice_mut(ndarray::s![start..end, ..])
            .assign(&block);
    }
    transform_margins(&mut values, spec.margin);
    Ok((values, change_points))
}
