//! The three iterative schemes: inexact subgradient, stochastic subgradient,
//! and the momentum method. Each is exposed both as a collecting run (full
//! trajectory record) and as a streaming stepper so long Monte Carlo checks
//! can run without storing iterates.
//!
//! All records obey the sign convention `x_{k+1} = x_k - alpha_k v_k + e_k`:
//! the stochastic method stores `e_k = -alpha_k eps_k`, the momentum method
//! stores the carried momentum term `e_k = kappa (x_k - x_{k-1})`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{uniform_in_ball, PiecewiseSmoothFunction, SelectionRule};
use crate::rng::{streams, RngHandle};
use crate::schedule::StepSchedule;
use crate::trajectory::{MethodMeta, Trajectory, TrajectoryMeta};
use crate::vecops;

/// Iterates with norm beyond this are reported as blow-ups rather than
/// analyzed further.
pub const BLOWUP_NORM: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    None,
    /// Uniform random direction with magnitude `alpha_k^tau`.
    AdversarialBounded,
}

impl NoiseMode {
    fn label(&self) -> &'static str {
        match self {
            NoiseMode::None => "none",
            NoiseMode::AdversarialBounded => "adversarial-bounded",
        }
    }
}

/// Configuration of the inexact scheme
/// `x_{k+1} = x_k - alpha_k u_k + e_k`, `u_k` drawn from the Goldstein
/// enlargement of radius `c_b alpha_k^xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InexactConfig {
    pub c_b: f64,
    pub xi: f64,
    pub tau: f64,
    pub noise: NoiseMode,
    /// Ball samples per Goldstein draw; `None` means `2 n + 2`.
    #[serde(default)]
    pub samples: Option<usize>,
}

impl InexactConfig {
    pub fn exact_subgradient() -> Self {
        Self {
            c_b: 0.0,
            xi: 1.0,
            tau: 1.0,
            noise: NoiseMode::None,
            samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_b < 0.0 {
            return Err(Error::InvalidParameter("c_b must be >= 0".into()));
        }
        if !(self.xi > 0.0) || !(self.tau > 0.0) {
            return Err(Error::InvalidParameter("xi and tau must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    Gaussian,
    RademacherScaled,
    UniformBall,
}

impl NoiseDistribution {
    fn label(&self) -> &'static str {
        match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::RademacherScaled => "rademacher-scaled",
            NoiseDistribution::UniformBall => "uniform-ball",
        }
    }
}

/// Zero-mean noise with conditional second moment at most `sigma^2`,
/// enforced by construction for each distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticNoise {
    pub sigma: f64,
    pub distribution: NoiseDistribution,
}

impl StochasticNoise {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            sigma,
            distribution: NoiseDistribution::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma < 0.0 {
            return Err(Error::InvalidParameter("sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// One draw of `eps_k` in dimension `n`.
    pub fn draw(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        if self.sigma == 0.0 {
            return vecops::zeros(n);
        }
        match self.distribution {
            // Coordinates N(0, sigma^2 / n): E|eps|^2 = sigma^2.
            NoiseDistribution::Gaussian => {
                let s = self.sigma / (n as f64).sqrt();
                (0..n)
                    .map(|_| s * StandardNormal.sample::<f64, _>(rng))
                    .collect()
            }
            // Coordinates ±sigma/sqrt(n): |eps|^2 = sigma^2 exactly.
            NoiseDistribution::RademacherScaled => {
                let s = self.sigma / (n as f64).sqrt();
                (0..n)
                    .map(|_| if rng.gen::<bool>() { s } else { -s })
                    .collect()
            }
            // Uniform in B(0, sigma): E|eps|^2 = sigma^2 n/(n+2) < sigma^2.
            NoiseDistribution::UniformBall => {
                uniform_in_ball(&vecops::zeros(n), self.sigma, rng)
            }
        }
    }
}

/// Momentum parameters: `kappa` strictly inside (0, 1); `iota_m` is the
/// extrapolation coefficient for the query point. `x_prev = None` starts at
/// rest (`x_{-1} = x_0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumConfig {
    pub kappa: f64,
    pub iota_m: f64,
    #[serde(default)]
    pub x_prev: Option<Vec<f64>>,
}

impl MomentumConfig {
    pub fn new(kappa: f64, iota_m: f64) -> Self {
        Self {
            kappa,
            iota_m,
            x_prev: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must lie strictly inside (0, 1), got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// One recorded step, yielded by the streaming steppers.
#[derive(Debug, Clone)]
pub struct Step {
    pub k: usize,
    pub alpha: f64,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub x_next: Vec<f64>,
}

fn guard(step: usize, x: &[f64]) -> Result<()> {
    let norm = vecops::norm(x);
    if !norm.is_finite() || norm > BLOWUP_NORM {
        return Err(Error::BlowUp { step, norm });
    }
    Ok(())
}

/// Streaming stepper for the inexact scheme.
pub struct InexactStepper<'f> {
    f: &'f PiecewiseSmoothFunction,
    schedule: StepSchedule,
    cfg: InexactConfig,
    samples: usize,
    x: Vec<f64>,
    k: usize,
    gold_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
}

impl<'f> InexactStepper<'f> {
    pub fn new(
        f: &'f PiecewiseSmoothFunction,
        x0: Vec<f64>,
        schedule: StepSchedule,
        cfg: InexactConfig,
        rng: RngHandle,
    ) -> Result<Self> {
        cfg.validate()?;
        f.check_dim(&x0)?;
        let samples = cfg.samples.unwrap_or_else(|| f.default_samples());
        Ok(Self {
            f,
            schedule,
            cfg,
            samples,
            x: x0,
            k: 0,
            gold_rng: rng.stream(streams::GOLDSTEIN).rng(),
            noise_rng: rng.stream(streams::NOISE).rng(),
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn advance(&mut self) -> Result<Step> {
        let k = self.k;
        let alpha = self.schedule.value(k);
        let radius = self.cfg.c_b * alpha.powf(self.cfg.xi);
        let v = self
            .f
            .goldstein_sample(&self.x, radius, self.samples, &mut self.gold_rng)?;
        let e = match self.cfg.noise {
            NoiseMode::None => vecops::zeros(self.x.len()),
            NoiseMode::AdversarialBounded => {
                let mut dir: Vec<f64> = (0..self.x.len())
                    .map(|_| StandardNormal.sample::<f64, _>(&mut self.noise_rng))
                    .collect();
                let len = vecops::norm(&dir);
                let mag = alpha.powf(self.cfg.tau);
                if len > 0.0 {
                    for d in dir.iter_mut() {
                        *d *= mag / len;
                    }
                }
                dir
            }
        };
        let mut x_next = self.x.clone();
        vecops::axpy(&mut x_next, -alpha, &v);
        for (xi, ei) in x_next.iter_mut().zip(&e) {
            *xi += ei;
        }
        guard(k + 1, &x_next)?;
        self.x = x_next.clone();
        self.k += 1;
        Ok(Step {
            k,
            alpha,
            v,
            e,
            x_next,
        })
    }
}

/// Streaming stepper for the stochastic scheme.
pub struct StochasticStepper<'f> {
    f: &'f PiecewiseSmoothFunction,
    schedule: StepSchedule,
    noise: StochasticNoise,
    rule: SelectionRule,
    x: Vec<f64>,
    k: usize,
    noise_rng: ChaCha8Rng,
    tie_rng: ChaCha8Rng,
}

impl<'f> StochasticStepper<'f> {
    pub fn new(
        f: &'f PiecewiseSmoothFunction,
        x0: Vec<f64>,
        schedule: StepSchedule,
        noise: StochasticNoise,
        rule: SelectionRule,
        rng: RngHandle,
    ) -> Result<Self> {
        noise.validate()?;
        f.check_dim(&x0)?;
        Ok(Self {
            f,
            schedule,
            noise,
            rule,
            x: x0,
            k: 0,
            noise_rng: rng.stream(streams::NOISE).rng(),
            tie_rng: rng.stream(streams::GOLDSTEIN).rng(),
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// The recorded noise is `e_k = -alpha_k eps_k`.
    pub fn advance(&mut self) -> Result<Step> {
        let k = self.k;
        let alpha = self.schedule.value(k);
        let fx = self.f.evaluate(&self.x)?;
        let set = self
            .f
            .clarke_generators(&self.x, self.f.activity_tol(fx))?;
        let v = self.rule.pick(&set, &mut self.tie_rng);
        let eps = self.noise.draw(self.x.len(), &mut self.noise_rng);
        let e = vecops::scale(&eps, -alpha);
        let mut x_next = self.x.clone();
        vecops::axpy(&mut x_next, -alpha, &v);
        for (xi, ei) in x_next.iter_mut().zip(&e) {
            *xi += ei;
        }
        guard(k + 1, &x_next)?;
        self.x = x_next.clone();
        self.k += 1;
        Ok(Step {
            k,
            alpha,
            v,
            e,
            x_next,
        })
    }
}

/// Streaming stepper for the momentum scheme.
pub struct MomentumStepper<'f> {
    f: &'f PiecewiseSmoothFunction,
    schedule: StepSchedule,
    cfg: MomentumConfig,
    rule: SelectionRule,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    k: usize,
    tie_rng: ChaCha8Rng,
}

impl<'f> MomentumStepper<'f> {
    pub fn new(
        f: &'f PiecewiseSmoothFunction,
        x0: Vec<f64>,
        schedule: StepSchedule,
        cfg: MomentumConfig,
        rule: SelectionRule,
        rng: RngHandle,
    ) -> Result<Self> {
        cfg.validate()?;
        f.check_dim(&x0)?;
        let x_prev = match &cfg.x_prev {
            Some(p) => {
                f.check_dim(p)?;
                p.clone()
            }
            None => x0.clone(),
        };
        Ok(Self {
            f,
            schedule,
            cfg,
            rule,
            x: x0,
            x_prev,
            k: 0,
            tie_rng: rng.stream(streams::GOLDSTEIN).rng(),
        })
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// The recorded error term is the carried momentum
    /// `e_k = kappa (x_k - x_{k-1})`, so the record satisfies the common
    /// sign convention.
    pub fn advance(&mut self) -> Result<Step> {
        let k = self.k;
        let alpha = self.schedule.value(k);
        let drift = vecops::sub(&self.x, &self.x_prev);
        let e = vecops::scale(&drift, self.cfg.kappa);
        // Query point theta_k = x_k + iota_m (x_k - x_{k-1}).
        let mut query = self.x.clone();
        vecops::axpy(&mut query, self.cfg.iota_m, &drift);
        let fq = self.f.evaluate(&query)?;
        let set = self
            .f
            .clarke_generators(&query, self.f.activity_tol(fq))?;
        let v = self.rule.pick(&set, &mut self.tie_rng);
        // x_{k+1} = xi_k - alpha_k v_k with xi_k = x_k + kappa (x_k - x_{k-1}).
        let mut x_next = self.x.clone();
        for (xi, ei) in x_next.iter_mut().zip(&e) {
            *xi += ei;
        }
        vecops::axpy(&mut x_next, -alpha, &v);
        guard(k + 1, &x_next)?;
        self.x_prev = std::mem::replace(&mut self.x, x_next.clone());
        self.k += 1;
        Ok(Step {
            k,
            alpha,
            v,
            e,
            x_next,
        })
    }
}

fn collect_run<S, F>(
    x0: Vec<f64>,
    k_steps: usize,
    meta: TrajectoryMeta,
    mut stepper: S,
    mut advance: F,
) -> Result<Trajectory>
where
    F: FnMut(&mut S) -> Result<Step>,
{
    assert!(k_steps >= 1, "need at least one step");
    let mut x = Vec::with_capacity(k_steps + 1);
    let mut alpha = Vec::with_capacity(k_steps);
    let mut e = Vec::with_capacity(k_steps);
    let mut v = Vec::with_capacity(k_steps);
    x.push(x0);
    for _ in 0..k_steps {
        let step = advance(&mut stepper)?;
        alpha.push(step.alpha);
        e.push(step.e);
        v.push(step.v);
        x.push(step.x_next);
    }
    Ok(Trajectory {
        x,
        alpha,
        e,
        v,
        meta,
    })
}

/// Runs the inexact scheme for `k_steps` steps.
pub fn inexact_run(
    f: &PiecewiseSmoothFunction,
    x0: &[f64],
    schedule: StepSchedule,
    cfg: InexactConfig,
    k_steps: usize,
    rng: RngHandle,
) -> Result<Trajectory> {
    let stepper = InexactStepper::new(f, x0.to_vec(), schedule, cfg, rng)?;
    let samples = cfg.samples.unwrap_or_else(|| f.default_samples());
    let meta = TrajectoryMeta {
        method: MethodMeta::Inexact {
            c_b: cfg.c_b,
            xi: cfg.xi,
            tau: cfg.tau,
            noise: cfg.noise.label().into(),
            samples,
        },
        function: f.name.into(),
        schedule: Some(schedule),
        seed: rng.seed,
        dim: f.dim,
        k_steps,
    };
    collect_run(x0.to_vec(), k_steps, meta, stepper, InexactStepper::advance)
}

/// Runs the stochastic scheme for `k_steps` steps.
pub fn stochastic_run(
    f: &PiecewiseSmoothFunction,
    x0: &[f64],
    schedule: StepSchedule,
    noise: StochasticNoise,
    k_steps: usize,
    rng: RngHandle,
) -> Result<Trajectory> {
    stochastic_run_with_rule(f, x0, schedule, noise, SelectionRule::FirstActive, k_steps, rng)
}

pub fn stochastic_run_with_rule(
    f: &PiecewiseSmoothFunction,
    x0: &[f64],
    schedule: StepSchedule,
    noise: StochasticNoise,
    rule: SelectionRule,
    k_steps: usize,
    rng: RngHandle,
) -> Result<Trajectory> {
    let stepper = StochasticStepper::new(f, x0.to_vec(), schedule, noise, rule, rng)?;
    let meta = TrajectoryMeta {
        method: MethodMeta::Stochastic {
            sigma: noise.sigma,
            distribution: noise.distribution.label().into(),
        },
        function: f.name.into(),
        schedule: Some(schedule),
        seed: rng.seed,
        dim: f.dim,
        k_steps,
    };
    collect_run(
        x0.to_vec(),
        k_steps,
        meta,
        stepper,
        StochasticStepper::advance,
    )
}

/// Runs the momentum scheme for `k_steps` steps.
pub fn momentum_run(
    f: &PiecewiseSmoothFunction,
    x0: &[f64],
    schedule: StepSchedule,
    cfg: MomentumConfig,
    k_steps: usize,
    rng: RngHandle,
) -> Result<Trajectory> {
    let meta = TrajectoryMeta {
        method: MethodMeta::Momentum {
            kappa: cfg.kappa,
            iota_m: cfg.iota_m,
        },
        function: f.name.into(),
        schedule: Some(schedule),
        seed: rng.seed,
        dim: f.dim,
        k_steps,
    };
    let stepper = MomentumStepper::new(
        f,
        x0.to_vec(),
        schedule,
        cfg,
        SelectionRule::FirstActive,
        rng,
    )?;
    collect_run(x0.to_vec(), k_steps, meta, stepper, MomentumStepper::advance)
}
