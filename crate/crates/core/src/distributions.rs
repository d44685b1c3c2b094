//! Seedable random streams and the samplers the model draws from.
//!
//! Every sampler consumes uniforms from a [`RandomSource`], a ChaCha8 stream
//! keyed by a 64-bit seed. Child streams share the key and differ in the
//! 64-bit stream id, so replicates derived from one parent never overlap.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal};
use thiserror::Error;

/// Name of the generator, echoed into run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream-split children";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("empty truncation interval [{lower}, {upper}]")]
    EmptyTruncation { lower: f64, upper: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::Domain {
            name,
            requirement: "strictly positive and finite",
            value,
        })
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::Domain {
            name,
            requirement: "finite",
            value,
        })
    }
}

fn probability(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ParamError::Domain {
            name,
            requirement: "within [0, 1]",
            value,
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A single-owner deterministic random stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives the `index`-th child stream. The result depends only on the
    /// parent's (seed, stream) identity, not on how far the parent has been
    /// advanced.
    pub fn child(&self, index: u64) -> RandomSource {
        let stream = splitmix64(self.stream ^ splitmix64(index.wrapping_add(1)));
        Self::with_stream(self.seed, stream)
    }

    /// Uniform draw on [0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (ziggurat).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform index in `0..bound`.
    pub fn index(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.rng.next_u64() as u128 * bound as u128) >> 64) as usize
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Lomax (Pareto type II) with scale `scale` and shape `shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lomax {
    scale: f64,
    shape: f64,
}

impl Lomax {
    pub fn new(scale: f64, shape: f64) -> Result<Self, ParamError> {
        Ok(Self {
            scale: positive("lomax scale", scale)?,
            shape: positive("lomax shape", shape)?,
        })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.scale * ((1.0 - u).powf(-1.0 / self.shape) - 1.0)
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.quantile(rng.uniform())
    }
}

/// Pareto type I with minimum `x_min` and tail index `shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pareto {
    x_min: f64,
    shape: f64,
}

impl Pareto {
    pub fn new(x_min: f64, shape: f64) -> Result<Self, ParamError> {
        Ok(Self {
            x_min: positive("pareto x_min", x_min)?,
            shape: positive("pareto shape", shape)?,
        })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.x_min * (1.0 - u).powf(-1.0 / self.shape)
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.quantile(rng.uniform())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self, ParamError> {
        Ok(Self {
            rate: positive("exponential rate", rate)?,
        })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        -(1.0 - u).ln() / self.rate
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.quantile(rng.uniform())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self, ParamError> {
        Ok(Self {
            mean: finite("normal mean", mean)?,
            sd: positive("normal sd", sd)?,
        })
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        self.mean + self.sd * rng.standard_normal()
    }
}

/// Acceptance probability below which truncated-normal sampling switches
/// from rejection to inverse-CDF.
pub const TRUNC_NORMAL_REJECTION_FLOOR: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
enum TruncMethod {
    Rejection,
    InverseCdf {
        lo_cdf: f64,
        hi_cdf: f64,
        upper_tail: bool,
    },
}

/// Normal(mean, sd) conditioned on `[lower, upper]`; `upper` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncNormal {
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
    method: TruncMethod,
}

fn std_normal() -> StatrsNormal {
    StatrsNormal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

impl TruncNormal {
    pub fn new(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self, ParamError> {
        let mean = finite("truncated normal mean", mean)?;
        let sd = positive("truncated normal sd", sd)?;
        let lower = finite("truncation lower bound", lower)?;
        if upper.is_nan() || !(lower < upper) {
            return Err(ParamError::EmptyTruncation { lower, upper });
        }
        let phi = std_normal();
        let a = (lower - mean) / sd;
        let b = (upper - mean) / sd;
        let mass = phi.cdf(b) - phi.cdf(a);
        let method = if mass >= TRUNC_NORMAL_REJECTION_FLOOR {
            TruncMethod::Rejection
        } else if a > 0.0 {
            // Work in the upper tail through the survival function so a
            // window far to the right keeps its precision.
            TruncMethod::InverseCdf {
                lo_cdf: phi.sf(a),
                hi_cdf: phi.sf(b),
                upper_tail: true,
            }
        } else {
            TruncMethod::InverseCdf {
                lo_cdf: phi.cdf(a),
                hi_cdf: phi.cdf(b),
                upper_tail: false,
            }
        };
        Ok(Self {
            mean,
            sd,
            lower,
            upper,
            method,
        })
    }

    pub fn uses_rejection(&self) -> bool {
        matches!(self.method, TruncMethod::Rejection)
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self.method {
            TruncMethod::Rejection => loop {
                let x = self.mean + self.sd * rng.standard_normal();
                if x >= self.lower && x <= self.upper {
                    return x;
                }
            },
            TruncMethod::InverseCdf {
                lo_cdf,
                hi_cdf,
                upper_tail,
            } => {
                let u = rng.uniform();
                let phi = std_normal();
                let z = if upper_tail {
                    let p = lo_cdf - u * (lo_cdf - hi_cdf);
                    -phi.inverse_cdf(p)
                } else {
                    phi.inverse_cdf(lo_cdf + u * (hi_cdf - lo_cdf))
                };
                (self.mean + self.sd * z).clamp(self.lower, self.upper)
            }
        }
    }
}

/// Asymmetric Laplace in the (kappa, location, scale) parameterization:
/// left branch `m - kappa*s*E` with probability `kappa^2 / (1 + kappa^2)`,
/// otherwise right branch `m + (s/kappa)*E`, `E ~ Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymLaplace {
    pub kappa: f64,
    pub location: f64,
    pub scale: f64,
}

impl AsymLaplace {
    pub fn new(kappa: f64, location: f64, scale: f64) -> Result<Self, ParamError> {
        Ok(Self {
            kappa: positive("asymmetric laplace kappa", kappa)?,
            location: finite("asymmetric laplace location", location)?,
            scale: positive("asymmetric laplace scale", scale)?,
        })
    }

    pub fn left_probability(&self) -> f64 {
        let k2 = self.kappa * self.kappa;
        k2 / (1.0 + k2)
    }

    pub fn mean(&self) -> f64 {
        self.location + self.scale * (1.0 / self.kappa - self.kappa)
    }

    pub fn variance(&self) -> f64 {
        let k2 = self.kappa * self.kappa;
        self.scale * self.scale * (1.0 + k2 * k2) / k2
    }

    /// `E[max(X, 0)]`, the mean of a draw with negative values floored at 0.
    pub fn mean_positive_part(&self) -> f64 {
        let p_left = self.left_probability();
        let left_scale = self.kappa * self.scale;
        let right_scale = self.scale / self.kappa;
        if self.location >= 0.0 {
            self.mean() + p_left * left_scale * (-self.location / left_scale).exp()
        } else {
            (1.0 - p_left) * right_scale * (self.location / right_scale).exp()
        }
    }

    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let branch = rng.uniform();
        let e = -(1.0 - rng.uniform()).ln();
        if branch < self.left_probability() {
            self.location - self.kappa * self.scale * e
        } else {
            self.location + self.scale / self.kappa * e
        }
    }
}

/// Picks the (location, scale) order for a fitted asymmetric Laplace whose
/// two unnamed parameters were published as `(first, second)`.
///
/// The literal order is kept when the expected per-day floored count lies
/// in `target`; otherwise the swapped order is tried. Returns `None` when
/// neither order lands in `target`.
pub fn resolve_alap_mapping(
    kappa: f64,
    first: f64,
    second: f64,
    target: (f64, f64),
) -> Result<Option<AsymLaplace>, ParamError> {
    for (location, scale) in [(first, second), (second, first)] {
        let candidate = AsymLaplace::new(kappa, location, scale)?;
        let m = candidate.mean_positive_part();
        if m >= target.0 && m <= target.1 {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(p: f64) -> Result<Self, ParamError> {
        Ok(Self {
            p: probability("bernoulli p", p)?,
        })
    }

    pub fn sample(&self, rng: &mut RandomSource) -> bool {
        rng.uniform() < self.p
    }
}

pub fn sample_lomax(rng: &mut RandomSource, scale: f64, shape: f64) -> Result<f64, ParamError> {
    Ok(Lomax::new(scale, shape)?.sample(rng))
}

pub fn sample_pareto(rng: &mut RandomSource, x_min: f64, shape: f64) -> Result<f64, ParamError> {
    Ok(Pareto::new(x_min, shape)?.sample(rng))
}

pub fn sample_exponential(rng: &mut RandomSource, rate: f64) -> Result<f64, ParamError> {
    Ok(Exponential::new(rate)?.sample(rng))
}

pub fn sample_trunc_normal(
    rng: &mut RandomSource,
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
) -> Result<f64, ParamError> {
    Ok(TruncNormal::new(mean, sd, lower, upper)?.sample(rng))
}

pub fn sample_asym_laplace(
    rng: &mut RandomSource,
    kappa: f64,
    location: f64,
    scale: f64,
) -> Result<f64, ParamError> {
    Ok(AsymLaplace::new(kappa, location, scale)?.sample(rng))
}

pub fn sample_normal(rng: &mut RandomSource, mean: f64, sd: f64) -> Result<f64, ParamError> {
    Ok(Normal::new(mean, sd)?.sample(rng))
}

pub fn sample_bernoulli(rng: &mut RandomSource, p: f64) -> Result<bool, ParamError> {
    Ok(Bernoulli::new(p)?.sample(rng))
}

/// Serializable description of any distribution used by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Lomax {
        scale: f64,
        shape: f64,
    },
    ParetoType1 {
        x_min: f64,
        shape: f64,
    },
    Exponential {
        rate: f64,
    },
    /// `upper: None` means an unbounded right tail.
    TruncNormal {
        mean: f64,
        sd: f64,
        lower: f64,
        upper: Option<f64>,
    },
    AsymLaplace {
        kappa: f64,
        location: f64,
        scale: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    Bernoulli {
        p: f64,
    },
    Uniform01,
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.sampler().map(|_| ())
    }

    fn sampler(&self) -> Result<Sampler, ParamError> {
        Ok(match *self {
            DistributionSpec::Lomax { scale, shape } => Sampler::Lomax(Lomax::new(scale, shape)?),
            DistributionSpec::ParetoType1 { x_min, shape } => {
                Sampler::Pareto(Pareto::new(x_min, shape)?)
            }
            DistributionSpec::Exponential { rate } => Sampler::Exp(Exponential::new(rate)?),
            DistributionSpec::TruncNormal {
                mean,
                sd,
                lower,
                upper,
            } => Sampler::TruncNormal(TruncNormal::new(
                mean,
                sd,
                lower,
                upper.unwrap_or(f64::INFINITY),
            )?),
            DistributionSpec::AsymLaplace {
                kappa,
                location,
                scale,
            } => Sampler::AsymLaplace(AsymLaplace::new(kappa, location, scale)?),
            DistributionSpec::Normal { mean, sd } => Sampler::Normal(Normal::new(mean, sd)?),
            DistributionSpec::Bernoulli { p } => Sampler::Bernoulli(Bernoulli::new(p)?),
            DistributionSpec::Uniform01 => Sampler::Uniform,
        })
    }

    /// Draws one value; Bernoulli outcomes are reported as 0.0 / 1.0.
    pub fn sample(&self, rng: &mut RandomSource) -> Result<f64, ParamError> {
        Ok(self.sampler()?.sample(rng))
    }

    /// Draws `n` values, validating the parameters once.
    pub fn sample_n(&self, rng: &mut RandomSource, n: usize) -> Result<Vec<f64>, ParamError> {
        let sampler = self.sampler()?;
        Ok((0..n).map(|_| sampler.sample(rng)).collect())
    }
}

enum Sampler {
    Lomax(Lomax),
    Pareto(Pareto),
    Exp(Exponential),
    TruncNormal(TruncNormal),
    AsymLaplace(AsymLaplace),
    Normal(Normal),
    Bernoulli(Bernoulli),
    Uniform,
}

impl Sampler {
    fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self {
            Sampler::Lomax(d) => d.sample(rng),
            Sampler::Pareto(d) => d.sample(rng),
            Sampler::Exp(d) => d.sample(rng),
            Sampler::TruncNormal(d) => d.sample(rng),
            Sampler::AsymLaplace(d) => d.sample(rng),
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Bernoulli(d) => {
                if d.sample(rng) {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Uniform => rng.uniform(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lomax_inverse_cdf_values() {
        let d = Lomax::new(0.4, 0.5).unwrap();
        assert_eq!(d.quantile(0.0), 0.0);
        assert!((d.quantile(0.75) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_inverse_cdf_values() {
        let d = Pareto::new(400_000.0, 2.1).unwrap();
        assert_eq!(d.quantile(0.0), 400_000.0);
        // 400000 * 2^(1/2.1)
        assert!((d.quantile(0.5) - 556_426.247_698).abs() < 1.0);
    }

    #[test]
    fn exponential_inverse_cdf_values() {
        let d = Exponential::new(1.0 / 40_000.0).unwrap();
        assert_eq!(d.quantile(0.0), 0.0);
        assert!((d.quantile(0.5) - 40_000.0 * 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Lomax::new(0.0, 0.5).is_err());
        assert!(Lomax::new(0.4, -1.0).is_err());
        assert!(Pareto::new(-1.0, 2.1).is_err());
        assert!(Exponential::new(0.0).is_err());
        assert!(Normal::new(0.0, 0.0).is_err());
        assert!(AsymLaplace::new(0.0, 1.0, 1.0).is_err());
        assert!(AsymLaplace::new(1.0, 1.0, -2.0).is_err());
        assert!(Bernoulli::new(1.5).is_err());
        assert!(Bernoulli::new(-0.1).is_err());
        assert!(matches!(
            TruncNormal::new(0.0, 1.0, 2.0, 2.0),
            Err(ParamError::EmptyTruncation { .. })
        ));
        assert!(DistributionSpec::Exponential { rate: -1.0 }
            .validate()
            .is_err());
    }

    #[test]
    fn bernoulli_extremes() {
        let mut rng = RandomSource::new(3);
        let never = Bernoulli::new(0.0).unwrap();
        let always = Bernoulli::new(1.0).unwrap();
        for _ in 0..10_000 {
            assert!(!never.sample(&mut rng));
            assert!(always.sample(&mut rng));
        }
    }

    #[test]
    fn child_streams_ignore_parent_position() {
        let parent = RandomSource::new(11);
        let mut advanced = parent.clone();
        for _ in 0..100 {
            advanced.uniform();
        }
        let mut a = parent.child(4);
        let mut b = advanced.child(4);
        assert_eq!(a.next_u64(), b.next_u64());
        let mut c = parent.child(5);
        assert_ne!(parent.child(4).next_u64(), c.next_u64());
    }

    #[test]
    fn narrow_truncation_uses_inverse_cdf_and_stays_inside() {
        let d = TruncNormal::new(0.0, 1.0, 5.0, 5.0 + 1e-6).unwrap();
        assert!(!d.uses_rejection());
        let mut rng = RandomSource::new(9);
        for _ in 0..1000 {
            let x = d.sample(&mut rng);
            assert!((5.0..=5.0 + 1e-6).contains(&x));
        }
        let wide = TruncNormal::new(0.103, 0.192, 0.0, f64::INFINITY).unwrap();
        assert!(wide.uses_rejection());
    }

    #[test]
    fn alap_positive_part_matches_mean_when_far_from_zero() {
        let d = AsymLaplace::new(1.0, 1000.0, 1.0).unwrap();
        assert!((d.mean_positive_part() - d.mean()).abs() < 1e-9);
    }

    #[test]
    fn alap_literal_mapping_kept() {
        let d = resolve_alap_mapping(0.71, 58.0, 76.0, (114.0, 119.0))
            .unwrap()
            .unwrap();
        assert_eq!((d.location, d.scale), (58.0, 76.0));
    }

    #[test]
    fn alap_mapping_swaps_when_literal_misses() {
        // Literal (76, 58) gives ~118.7; a target excluding it forces no swap
        // to succeed either way only when both miss.
        let d = resolve_alap_mapping(0.71, 76.0, 58.0, (117.0, 117.5))
            .unwrap()
            .unwrap();
        assert_eq!((d.location, d.scale), (58.0, 76.0));
        assert!(resolve_alap_mapping(0.71, 58.0, 76.0, (0.0, 1.0))
            .unwrap()
            .is_none());
    }
}
