use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{GameError, GameOracle, JointPoint};
use crate::diff::{self, Tape, Var};

/// Loss descended by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorLoss {
    /// `mean softplus(−D(G(z)))`
    #[default]
    NonSaturating,
    /// `g = −f`
    ZeroSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpGanConfig {
    pub seed: u64,
    pub hidden: usize,
    pub modes: Vec<[f64; 2]>,
    pub batch_size: usize,
    pub mode_std: f64,
    pub generator_loss: GeneratorLoss,
}

impl Default for MlpGanConfig {
    fn default() -> Self {
        MlpGanConfig {
            seed: 0,
            hidden: 16,
            modes: vec![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]],
            batch_size: 32,
            mode_std: 0.1,
            generator_loss: GeneratorLoss::NonSaturating,
        }
    }
}

/// Small GAN on a 2-D Gaussian mixture.
///
/// Player `x` is the discriminator (`2 → hidden → 1`, tanh) and descends
/// the binary cross-entropy-with-logits objective `f`; player `y` is the
/// generator (`2 → hidden → 2`, tanh). The real and latent minibatches
/// are drawn once from the seed, so the losses are pure functions of the
/// parameters. All derivatives come from the reverse-mode tape.
#[derive(Debug, Clone)]
pub struct MlpGan {
    config: MlpGanConfig,
    real: Vec<[f64; 2]>,
    latent: Vec<[f64; 2]>,
}

pub fn mlp_gan_game(seed: u64, hidden: usize, modes: Vec<[f64; 2]>) -> Result<MlpGan, GameError> {
    MlpGan::new(MlpGanConfig {
        seed,
        hidden,
        modes,
        ..MlpGanConfig::default()
    })
}

#[derive(Clone, Copy)]
enum Loss {
    F,
    G,
}

impl MlpGan {
    pub fn new(config: MlpGanConfig) -> Result<Self, GameError> {
        if config.hidden < 2 {
            return Err(GameError::HiddenTooSmall(config.hidden));
        }
        if config.modes.is_empty() {
            return Err(GameError::NoModes);
        }
        if config.batch_size == 0 {
            return Err(GameError::EmptyBatch);
        }
        if config.modes.iter().flatten().any(|v| !v.is_finite()) || !config.mode_std.is_finite() {
            return Err(GameError::NonFinite("data modes"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let mut real = Vec::with_capacity(config.batch_size);
        let mut latent = Vec::with_capacity(config.batch_size);
        for i in 0..config.batch_size {
            let mode = config.modes[i % config.modes.len()];
            real.push([
                mode[0] + config.mode_std * normal(),
                mode[1] + config.mode_std * normal(),
            ]);
        }
        for _ in 0..config.batch_size {
            latent.push([normal(), normal()]);
        }
        Ok(MlpGan {
            config,
            real,
            latent,
        })
    }

    pub fn config(&self) -> &MlpGanConfig {
        &self.config
    }

    fn hidden(&self) -> usize {
        self.config.hidden
    }

    /// Discriminator parameter count: `W1 (h×2), c1 (h), w2 (h), c2 (1)`.
    pub fn discriminator_size(&self) -> usize {
        4 * self.hidden() + 1
    }

    /// Generator parameter count: `G1 (h×2), b1 (h), G2 (2×h), b2 (2)`.
    pub fn generator_size(&self) -> usize {
        5 * self.hidden() + 2
    }

    fn discriminator(&self, t: &mut Tape, d: &[Var], input: &[Var]) -> Var {
        let h = self.hidden();
        let (w1, rest) = d.split_at(2 * h);
        let (c1, rest) = rest.split_at(h);
        let (w2, c2) = rest.split_at(h);
        let pre = t.affine(w1, input, c1);
        let act: Vec<Var> = pre.into_iter().map(|v| t.tanh(v)).collect();
        t.affine(w2, &act, c2)[0]
    }

    fn generator(&self, t: &mut Tape, g: &[Var], z: &[Var]) -> Vec<Var> {
        let h = self.hidden();
        let (g1, rest) = g.split_at(2 * h);
        let (b1, rest) = rest.split_at(h);
        let (g2, b2) = rest.split_at(2 * h);
        let pre = t.affine(g1, z, b1);
        let act: Vec<Var> = pre.into_iter().map(|v| t.tanh(v)).collect();
        t.affine(g2, &act, b2)
    }

    fn fake_logits(&self, t: &mut Tape, d: &[Var], g: &[Var]) -> Vec<Var> {
        self.latent
            .iter()
            .map(|z| {
                let z = [t.constant(z[0]), t.constant(z[1])];
                let sample = self.generator(t, g, &z);
                self.discriminator(t, d, &sample)
            })
            .collect()
    }

    fn mean(t: &mut Tape, xs: &[Var]) -> Var {
        let s = t.sum(xs);
        t.scale(s, 1.0 / xs.len() as f64)
    }

    fn discriminator_loss(&self, t: &mut Tape, d: &[Var], fake: &[Var]) -> Var {
        let real_terms: Vec<Var> = self
            .real
            .iter()
            .map(|r| {
                let r = [t.constant(r[0]), t.constant(r[1])];
                let logit = self.discriminator(t, d, &r);
                let neg = t.neg(logit);
                t.softplus(neg)
            })
            .collect();
        let fake_terms: Vec<Var> = fake.iter().map(|&l| t.softplus(l)).collect();
        let real_mean = Self::mean(t, &real_terms);
        let fake_mean = Self::mean(t, &fake_terms);
        t.add(real_mean, fake_mean)
    }

    fn build(&self, t: &mut Tape, vars: &[Var], which: Loss) -> Var {
        let (d, g) = vars.split_at(self.discriminator_size());
        let fake = self.fake_logits(t, d, g);
        match (which, self.config.generator_loss) {
            (Loss::F, _) => self.discriminator_loss(t, d, &fake),
            (Loss::G, GeneratorLoss::NonSaturating) => {
                let terms: Vec<Var> = fake
                    .iter()
                    .map(|&l| {
                        let n = t.neg(l);
                        t.softplus(n)
                    })
                    .collect();
                Self::mean(t, &terms)
            }
            (Loss::G, GeneratorLoss::ZeroSum) => {
                let f = self.discriminator_loss(t, d, &fake);
                t.neg(f)
            }
        }
    }

    fn value(&self, p: &JointPoint, which: Loss) -> f64 {
        let mut t = Tape::new();
        let vars = t.inputs(&p.to_flat());
        let out = self.build(&mut t, &vars, which);
        t.value(out)
    }

    fn full_gradient(&self, p: &JointPoint, which: Loss) -> Vec<f64> {
        diff::gradient(|t, v| self.build(t, v, which), &p.to_flat())
    }

    fn full_hvp(&self, p: &JointPoint, which: Loss, dx: Option<&[f64]>, dy: Option<&[f64]>) -> Vec<f64> {
        let (m, n) = self.dims();
        let mut dir = Vec::with_capacity(m + n);
        match dx {
            Some(u) => dir.extend_from_slice(u),
            None => dir.resize(m, 0.0),
        }
        match dy {
            Some(v) => dir.extend_from_slice(v),
            None => dir.resize(m + n, 0.0),
        }
        diff::hessian_vector_product(|t, v| self.build(t, v, which), &p.to_flat(), &dir)
    }

    /// Parameters drawn from a scaled normal (`1/√fan_in`), biases zero.
    pub fn init_point(&self, seed: u64) -> JointPoint {
        let h = self.hidden();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |fan_in: usize, count: usize, out: &mut Vec<f64>| {
            let scale = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..count {
                let z: f64 = rng.sample(StandardNormal);
                out.push(scale * z);
            }
        };
        let mut x = Vec::with_capacity(self.discriminator_size());
        draw(2, 2 * h, &mut x);
        x.extend(std::iter::repeat_n(0.0, h));
        draw(h, h, &mut x);
        x.push(0.0);
        let mut y = Vec::with_capacity(self.generator_size());
        draw(2, 2 * h, &mut y);
        y.extend(std::iter::repeat_n(0.0, h));
        draw(h, 2 * h, &mut y);
        y.extend([0.0, 0.0]);
        JointPoint { x, y }
    }
}

impl GameOracle for MlpGan {
    fn name(&self) -> &'static str {
        "mlp"
    }

    fn dims(&self) -> (usize, usize) {
        (self.discriminator_size(), self.generator_size())
    }

    fn is_zero_sum(&self) -> bool {
        self.config.generator_loss == GeneratorLoss::ZeroSum
    }

    fn loss_x(&self, p: &JointPoint) -> f64 {
        self.value(p, Loss::F)
    }

    fn loss_y(&self, p: &JointPoint) -> f64 {
        self.value(p, Loss::G)
    }

    fn grad_x(&self, p: &JointPoint) -> Vec<f64> {
        let mut g = self.full_gradient(p, Loss::F);
        g.truncate(self.discriminator_size());
        g
    }

    fn grad_y(&self, p: &JointPoint) -> Vec<f64> {
        self.full_gradient(p, Loss::G).split_off(self.discriminator_size())
    }

    fn grad_y_of_f(&self, p: &JointPoint) -> Vec<f64> {
        self.full_gradient(p, Loss::F).split_off(self.discriminator_size())
    }

    fn grad_x_of_g(&self, p: &JointPoint) -> Vec<f64> {
        let mut g = self.full_gradient(p, Loss::G);
        g.truncate(self.discriminator_size());
        g
    }

    fn hvp_xx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        let mut h = self.full_hvp(p, Loss::F, Some(u), None);
        h.truncate(self.discriminator_size());
        h
    }

    fn hvp_yy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        self.full_hvp(p, Loss::G, None, Some(v))
            .split_off(self.discriminator_size())
    }

    fn hvp_xy(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        let mut h = self.full_hvp(p, Loss::F, None, Some(v));
        h.truncate(self.discriminator_size());
        h
    }

    fn hvp_yx(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.full_hvp(p, Loss::F, Some(u), None)
            .split_off(self.discriminator_size())
    }

    fn hvp_xy_g(&self, p: &JointPoint, v: &[f64]) -> Vec<f64> {
        let mut h = self.full_hvp(p, Loss::G, None, Some(v));
        h.truncate(self.discriminator_size());
        h
    }

    fn hvp_yx_g(&self, p: &JointPoint, u: &[f64]) -> Vec<f64> {
        self.full_hvp(p, Loss::G, Some(u), None)
            .split_off(self.discriminator_size())
    }

    fn default_point(&self) -> JointPoint {
        self.init_point(self.config.seed.wrapping_add(1))
    }
}
