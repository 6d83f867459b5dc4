//! The multi-frequency network: parallel branch networks feeding a trunk
//! classifier, plus the single-path and all-ReLU ablation variants and the
//! parameter/FLOPs/memory complexity counter.
//!
//! A branch is `Conv → act → AvgPool → Conv` on the main path with a
//! pooled convolution shortcut added residually, then `ReLU → AvgPool`.
//! All convolutions use stride 1 and symmetric same-padding so the residual
//! join is well-typed; pooling provides all down-sampling. The trunk
//! concatenates branch outputs along channels and runs
//! `Conv → act → AvgPool → Flatten → Dense → ReLU → Dense` to logits.
//! `act` is the trainable EAS activation, or ReLU in the `ReluM` variant.

use crate::error::{Error, Result};
use crate::layers::{
    add, concat_channels, flatten, relu, relu_backward, split_channels, unflatten, ActLayer,
    Conv1dLayer, DenseLayer, EasLayer,
};
use crate::scalar::Scalar;
use crate::tensor::{avgpool1d, avgpool1d_backward, Padding, Shape3, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which model to build; variants substitute layers but never change shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    /// Full branch/trunk model with EAS activations.
    Mfnn,
    /// Single-path backbone with a parameter count matched to `Mfnn`.
    OneTrunk,
    /// Same architecture as `Mfnn` with every EAS replaced by ReLU.
    ReluM,
}

impl ModelVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelVariant::Mfnn => "mfnn",
            ModelVariant::OneTrunk => "one-trunk",
            ModelVariant::ReluM => "relu-m",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mfnn" => Ok(ModelVariant::Mfnn),
            "one-trunk" | "one_trunk" => Ok(ModelVariant::OneTrunk),
            "relu-m" | "relu_m" => Ok(ModelVariant::ReluM),
            other => Err(Error::invalid(
                "ModelVariant",
                format!("unknown variant `{other}` (expected mfnn, one-trunk, relu-m)"),
            )),
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Number of parallel branch networks (p).
    pub num_branches: usize,
    /// Filters in each branch convolution.
    pub branch_filters: usize,
    /// Kernel size of every convolution.
    pub kernel: usize,
    /// Average-pooling window (and stride).
    pub pool: usize,
    /// Filters in the trunk convolution.
    pub trunk_filters: usize,
    /// Width of the first fully connected layer.
    pub fc_width: usize,
    /// Output classes (K).
    pub num_classes: usize,
    /// Input channels (1 = current only).
    pub in_channels: usize,
    /// Samples per input window (L).
    pub input_length: usize,
    pub variant: ModelVariant,
    /// Seed for parameter initialization.
    pub seed: u64,
}

impl ModelConfig {
    /// The published configuration: three branches of six 5-tap filters,
    /// pool 2, eight trunk filters, a 256-wide hidden layer, sixteen classes.
    pub fn paper_defaults(input_length: usize) -> Self {
        ModelConfig {
            num_branches: 3,
            branch_filters: 6,
            kernel: 5,
            pool: 2,
            trunk_filters: 8,
            fc_width: 256,
            num_classes: 16,
            in_channels: 1,
            input_length,
            variant: ModelVariant::Mfnn,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_branches", self.num_branches),
            ("branch_filters", self.branch_filters),
            ("kernel", self.kernel),
            ("pool", self.pool),
            ("trunk_filters", self.trunk_filters),
            ("fc_width", self.fc_width),
            ("in_channels", self.in_channels),
            ("input_length", self.input_length),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::invalid("ModelConfig", format!("{name} must be >= 1")));
            }
        }
        if self.num_classes < 2 {
            return Err(Error::invalid("ModelConfig", "num_classes must be >= 2"));
        }
        // three pooling stages must leave at least one sample
        let l1 = self.input_length / self.pool;
        let l2 = l1 / self.pool;
        let l3 = l2 / self.pool;
        if l3 == 0 {
            return Err(Error::invalid(
                "ModelConfig",
                format!(
                    "input_length {} collapses to zero after three pool-{} stages",
                    self.input_length, self.pool
                ),
            ));
        }
        Ok(())
    }

    /// Length of a branch output: two pooling stages.
    pub fn branch_out_len(&self) -> usize {
        (self.input_length / self.pool) / self.pool
    }

    /// Flattened feature count entering the first dense layer: the trunk
    /// filters times the length after the third pooling stage.
    pub fn flatten_len(&self) -> usize {
        self.trunk_filters * (self.branch_out_len() / self.pool)
    }
}

// ── Branch network ─────────────────────────────────────────────────

/// One branch: local feature extractor with a pooled residual shortcut.
#[derive(Debug, Clone)]
pub struct BranchNet<T> {
    pub conv1: Conv1dLayer<T>,
    pub act1: ActLayer<T>,
    pub conv2: Conv1dLayer<T>,
    pub shortcut: Conv1dLayer<T>,
    pool: usize,
}

/// Intermediates a branch backward pass needs.
pub struct BranchCache<T> {
    c1: Tensor<T>,
    p1: Tensor<T>,
    sum: Tensor<T>,
}

impl<T: Scalar> BranchNet<T> {
    fn init(cfg: &ModelConfig, use_eas: bool, rng: &mut ChaCha8Rng) -> Self {
        let conv1 = Conv1dLayer::init(
            cfg.in_channels,
            cfg.branch_filters,
            cfg.kernel,
            1,
            Padding::Same,
            rng,
        );
        let act1 = if use_eas {
            ActLayer::Eas(EasLayer::init(cfg.branch_filters, rng))
        } else {
            ActLayer::Relu
        };
        let conv2 = Conv1dLayer::init(
            cfg.branch_filters,
            cfg.branch_filters,
            cfg.kernel,
            1,
            Padding::Same,
            rng,
        );
        // shortcut: a convolution with the same hyperparameters as conv1
        let shortcut = Conv1dLayer::init(
            cfg.in_channels,
            cfg.branch_filters,
            cfg.kernel,
            1,
            Padding::Same,
            rng,
        );
        BranchNet {
            conv1,
            act1,
            conv2,
            shortcut,
            pool: cfg.pool,
        }
    }

    /// `[B, Cin, L] → [B, filters, (L/pool)/pool]`.
    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, BranchCache<T>)> {
        let c1 = self.conv1.forward(x)?;
        let a1 = self.act1.forward(&c1)?;
        let p1 = avgpool1d(&a1, self.pool)?;
        let main = self.conv2.forward(&p1)?;
        let sc = self.shortcut.forward(x)?;
        let scp = avgpool1d(&sc, self.pool)?;
        let sum = add(&main, &scp)?;
        let r = relu(&sum);
        let out = avgpool1d(&r, self.pool)?;
        Ok((out, BranchCache { c1, p1, sum }))
    }

    /// Accumulates parameter gradients; returns the gradient w.r.t. `x`.
    pub fn backward(
        &mut self,
        x: &Tensor<T>,
        cache: &BranchCache<T>,
        upstream: &Tensor<T>,
    ) -> Result<Tensor<T>> {
        let sum_shape = cache.sum.shape3()?;
        let g_r = avgpool1d_backward(sum_shape, self.pool, upstream)?;
        let g_sum = relu_backward(&cache.sum, &g_r)?;
        // residual join: the same upstream flows to both summands
        let g_p1 = self.conv2.backward(&cache.p1, &g_sum)?;
        let c1_shape = cache.c1.shape3()?;
        let g_a1 = avgpool1d_backward(c1_shape, self.pool, &g_p1)?;
        let g_c1 = self.act1.backward(&cache.c1, &g_a1)?;
        let g_x_main = self.conv1.backward(x, &g_c1)?;
        let g_sc = avgpool1d_backward(c1_shape, self.pool, &g_sum)?;
        let g_x_short = self.shortcut.backward(x, &g_sc)?;
        add(&g_x_main, &g_x_short)
    }

    fn zero_grad(&mut self) {
        self.conv1.zero_grad();
        self.act1.zero_grad();
        self.conv2.zero_grad();
        self.shortcut.zero_grad();
    }
}

// ── Single-path backbone (parameter-parity ablation) ───────────────

/// Ablation backbone: the branch pipeline without the residual shortcut,
/// widened so the total model parameter count matches the branched model.
#[derive(Debug, Clone)]
pub struct SinglePath<T> {
    pub conv1: Conv1dLayer<T>,
    pub act1: ActLayer<T>,
    pub conv2: Conv1dLayer<T>,
    pool: usize,
}

pub struct SinglePathCache<T> {
    c1: Tensor<T>,
    p1: Tensor<T>,
    c2: Tensor<T>,
}

impl<T: Scalar> SinglePath<T> {
    fn init(cfg: &ModelConfig, width: usize, rng: &mut ChaCha8Rng) -> Self {
        let conv1 = Conv1dLayer::init(cfg.in_channels, width, cfg.kernel, 1, Padding::Same, rng);
        let act1 = ActLayer::Eas(EasLayer::init(width, rng));
        let conv2 = Conv1dLayer::init(width, width, cfg.kernel, 1, Padding::Same, rng);
        SinglePath {
            conv1,
            act1,
            conv2,
            pool: cfg.pool,
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, SinglePathCache<T>)> {
        let c1 = self.conv1.forward(x)?;
        let a1 = self.act1.forward(&c1)?;
        let p1 = avgpool1d(&a1, self.pool)?;
        let c2 = self.conv2.forward(&p1)?;
        let r = relu(&c2);
        let out = avgpool1d(&r, self.pool)?;
        Ok((out, SinglePathCache { c1, p1, c2 }))
    }

    pub fn backward(
        &mut self,
        x: &Tensor<T>,
        cache: &SinglePathCache<T>,
        upstream: &Tensor<T>,
    ) -> Result<Tensor<T>> {
        let g_r = avgpool1d_backward(cache.c2.shape3()?, self.pool, upstream)?;
        let g_c2 = relu_backward(&cache.c2, &g_r)?;
        let g_p1 = self.conv2.backward(&cache.p1, &g_c2)?;
        let g_a1 = avgpool1d_backward(cache.c1.shape3()?, self.pool, &g_p1)?;
        let g_c1 = self.act1.backward(&cache.c1, &g_a1)?;
        self.conv1.backward(x, &g_c1)
    }

    fn zero_grad(&mut self) {
        self.conv1.zero_grad();
        self.act1.zero_grad();
        self.conv2.zero_grad();
    }
}

// ── Trunk network ──────────────────────────────────────────────────

/// Shared classifier head over the aggregated features.
#[derive(Debug, Clone)]
pub struct TrunkNet<T> {
    pub conv: Conv1dLayer<T>,
    pub act: ActLayer<T>,
    pub fc1: DenseLayer<T>,
    pub fc2: DenseLayer<T>,
    pool: usize,
}

pub struct TrunkCache<T> {
    agg: Tensor<T>,
    tc: Tensor<T>,
    tp_shape: Shape3,
    fl: Tensor<T>,
    f1: Tensor<T>,
    fr: Tensor<T>,
}

impl<T: Scalar> TrunkNet<T> {
    fn init(cfg: &ModelConfig, in_channels: usize, use_eas: bool, rng: &mut ChaCha8Rng) -> Self {
        let conv = Conv1dLayer::init(
            in_channels,
            cfg.trunk_filters,
            cfg.kernel,
            1,
            Padding::Same,
            rng,
        );
        let act = if use_eas {
            ActLayer::Eas(EasLayer::init(cfg.trunk_filters, rng))
        } else {
            ActLayer::Relu
        };
        let fc1 = DenseLayer::init(cfg.flatten_len(), cfg.fc_width, rng);
        let fc2 = DenseLayer::init(cfg.fc_width, cfg.num_classes, rng);
        TrunkNet {
            conv,
            act,
            fc1,
            fc2,
            pool: cfg.pool,
        }
    }

    pub fn forward(&self, agg: Tensor<T>) -> Result<(Tensor<T>, TrunkCache<T>)> {
        let tc = self.conv.forward(&agg)?;
        let ta = self.act.forward(&tc)?;
        let tp = avgpool1d(&ta, self.pool)?;
        let tp_shape = tp.shape3()?;
        let fl = flatten(&tp)?;
        let f1 = self.fc1.forward(&fl)?;
        let fr = relu(&f1);
        let logits = self.fc2.forward(&fr)?;
        Ok((
            logits,
            TrunkCache {
                agg,
                tc,
                tp_shape,
                fl,
                f1,
                fr,
            },
        ))
    }

    pub fn backward(&mut self, cache: &TrunkCache<T>, upstream: &Tensor<T>) -> Result<Tensor<T>> {
        let g_fr = self.fc2.backward(&cache.fr, upstream)?;
        let g_f1 = relu_backward(&cache.f1, &g_fr)?;
        let g_fl = self.fc1.backward(&cache.fl, &g_f1)?;
        let g_tp = unflatten(&g_fl, cache.tp_shape)?;
        let g_ta = avgpool1d_backward(cache.tc.shape3()?, self.pool, &g_tp)?;
        let g_tc = self.act.backward(&cache.tc, &g_ta)?;
        self.conv.backward(&cache.agg, &g_tc)
    }

    fn zero_grad(&mut self) {
        self.conv.zero_grad();
        self.act.zero_grad();
        self.fc1.zero_grad();
        self.fc2.zero_grad();
    }
}

// ── Full model ─────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub enum Backbone<T> {
    Branched(Vec<BranchNet<T>>),
    Single(SinglePath<T>),
}

pub enum BackboneCache<T> {
    Branched(Vec<BranchCache<T>>),
    Single(SinglePathCache<T>),
}

/// Everything the model backward pass needs from a forward pass.
pub struct ModelCache<T> {
    input: Tensor<T>,
    backbone: BackboneCache<T>,
    trunk: TrunkCache<T>,
}

/// The assembled network.
#[derive(Debug, Clone)]
pub struct MfnnModel<T> {
    pub backbone: Backbone<T>,
    pub trunk: TrunkNet<T>,
    pub config: ModelConfig,
}

impl<T: Scalar> MfnnModel<T> {
    /// Build a model with seeded, declaration-ordered initialization; two
    /// constructions from the same config are bitwise identical.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let use_eas = config.variant != ModelVariant::ReluM;
        let (backbone, trunk_in) = match config.variant {
            ModelVariant::Mfnn | ModelVariant::ReluM => {
                let branches = (0..config.num_branches)
                    .map(|_| BranchNet::init(&config, use_eas, &mut rng))
                    .collect();
                (
                    Backbone::Branched(branches),
                    config.num_branches * config.branch_filters,
                )
            }
            ModelVariant::OneTrunk => {
                let width = one_trunk_width(&config)?;
                (
                    Backbone::Single(SinglePath::init(&config, width, &mut rng)),
                    width,
                )
            }
        };
        let trunk = TrunkNet::init(&config, trunk_in, use_eas, &mut rng);
        Ok(MfnnModel {
            backbone,
            trunk,
            config,
        })
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<Shape3> {
        let s = x.shape3().map_err(|_| {
            Error::shape(
                "MfnnModel::forward",
                format!(
                    "[B, {}, {}]",
                    self.config.in_channels, self.config.input_length
                ),
                format!("{:?}", x.shape()),
            )
        })?;
        if s.channels != self.config.in_channels || s.length != self.config.input_length {
            return Err(Error::shape(
                "MfnnModel::forward",
                format!(
                    "[B, {}, {}]",
                    self.config.in_channels, self.config.input_length
                ),
                format!("{s}"),
            ));
        }
        Ok(s)
    }

    /// Forward pass to logits `[B, K]`, returning the cache for backward.
    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ModelCache<T>)> {
        self.check_input(x)?;
        let (agg, backbone_cache) = match &self.backbone {
            Backbone::Branched(branches) => {
                let mut outs = Vec::with_capacity(branches.len());
                let mut caches = Vec::with_capacity(branches.len());
                for branch in branches {
                    let (out, cache) = branch.forward(x)?;
                    outs.push(out);
                    caches.push(cache);
                }
                let refs: Vec<&Tensor<T>> = outs.iter().collect();
                (concat_channels(&refs)?, BackboneCache::Branched(caches))
            }
            Backbone::Single(path) => {
                let (out, cache) = path.forward(x)?;
                (out, BackboneCache::Single(cache))
            }
        };
        let (logits, trunk_cache) = self.trunk.forward(agg)?;
        Ok((
            logits,
            ModelCache {
                input: x.clone(),
                backbone: backbone_cache,
                trunk: trunk_cache,
            },
        ))
    }

    /// Forward pass for inference; discards the cache.
    pub fn infer(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward(x)?.0)
    }

    /// Backpropagate from `grad_logits`, accumulating parameter gradients.
    /// Returns the gradient with respect to the model input.
    pub fn backward(&mut self, cache: &ModelCache<T>, grad_logits: &Tensor<T>) -> Result<Tensor<T>> {
        let g_agg = self.trunk.backward(&cache.trunk, grad_logits)?;
        match (&mut self.backbone, &cache.backbone) {
            (Backbone::Branched(branches), BackboneCache::Branched(caches)) => {
                let counts: Vec<usize> = vec![self.config.branch_filters; branches.len()];
                let parts = split_channels(&g_agg, &counts)?;
                let mut g_x: Option<Tensor<T>> = None;
                for ((branch, bcache), part) in branches.iter_mut().zip(caches).zip(&parts) {
                    let g = branch.backward(&cache.input, bcache, part)?;
                    g_x = Some(match g_x {
                        None => g,
                        Some(acc) => add(&acc, &g)?,
                    });
                }
                Ok(g_x.expect("at least one branch"))
            }
            (Backbone::Single(path), BackboneCache::Single(scache)) => {
                path.backward(&cache.input, scache, &g_agg)
            }
            _ => Err(Error::invalid(
                "MfnnModel::backward",
                "cache does not match model variant",
            )),
        }
    }

    pub fn zero_grad(&mut self) {
        match &mut self.backbone {
            Backbone::Branched(branches) => branches.iter_mut().for_each(BranchNet::zero_grad),
            Backbone::Single(path) => path.zero_grad(),
        }
        self.trunk.zero_grad();
    }

    /// Re-apply the EAS parameter-domain constraints after an optimizer step.
    pub fn project_constraints(&mut self) {
        let project = |act: &mut ActLayer<T>| {
            if let ActLayer::Eas(layer) = act {
                layer.params.project();
            }
        };
        match &mut self.backbone {
            Backbone::Branched(branches) => {
                for b in branches {
                    project(&mut b.act1);
                }
            }
            Backbone::Single(path) => project(&mut path.act1),
        }
        project(&mut self.trunk.act);
    }

    /// Visit every parameter tensor in declaration order (read-only).
    pub fn visit_params(&self, f: &mut impl FnMut(&str, &[usize], &[T])) {
        let visit_conv = |name: &str, c: &Conv1dLayer<T>, f: &mut dyn FnMut(&str, &[usize], &[T])| {
            f(&format!("{name}.weight"), c.weight.shape(), c.weight.data());
            f(&format!("{name}.bias"), c.bias.shape(), c.bias.data());
        };
        let visit_act = |name: &str, a: &ActLayer<T>, f: &mut dyn FnMut(&str, &[usize], &[T])| {
            if let ActLayer::Eas(layer) = a {
                let c = layer.params.channels();
                f(&format!("{name}.omega"), &[c], &layer.params.omega);
                f(&format!("{name}.phi"), &[c], &layer.params.phi);
            }
        };
        match &self.backbone {
            Backbone::Branched(branches) => {
                for (i, b) in branches.iter().enumerate() {
                    visit_conv(&format!("branch{i}.conv1"), &b.conv1, f);
                    visit_act(&format!("branch{i}.act1"), &b.act1, f);
                    visit_conv(&format!("branch{i}.conv2"), &b.conv2, f);
                    visit_conv(&format!("branch{i}.shortcut"), &b.shortcut, f);
                }
            }
            Backbone::Single(path) => {
                visit_conv("path.conv1", &path.conv1, f);
                visit_act("path.act1", &path.act1, f);
                visit_conv("path.conv2", &path.conv2, f);
            }
        }
        visit_conv("trunk.conv", &self.trunk.conv, f);
        visit_act("trunk.act", &self.trunk.act, f);
        f("trunk.fc1.weight", self.trunk.fc1.weight.shape(), self.trunk.fc1.weight.data());
        f("trunk.fc1.bias", self.trunk.fc1.bias.shape(), self.trunk.fc1.bias.data());
        f("trunk.fc2.weight", self.trunk.fc2.weight.shape(), self.trunk.fc2.weight.data());
        f("trunk.fc2.bias", self.trunk.fc2.bias.shape(), self.trunk.fc2.bias.data());
    }

    /// Visit every `(parameter, gradient)` slice pair in declaration order.
    pub fn visit_params_mut(&mut self, f: &mut impl FnMut(&str, &mut [T], &mut [T])) {
        fn conv<T: Scalar>(
            name: &str,
            c: &mut Conv1dLayer<T>,
            f: &mut dyn FnMut(&str, &mut [T], &mut [T]),
        ) {
            f(&format!("{name}.weight"), c.weight.data_mut(), c.grad_weight.data_mut());
            f(&format!("{name}.bias"), c.bias.data_mut(), c.grad_bias.data_mut());
        }
        fn act<T: Scalar>(
            name: &str,
            a: &mut ActLayer<T>,
            f: &mut dyn FnMut(&str, &mut [T], &mut [T]),
        ) {
            if let ActLayer::Eas(layer) = a {
                f(&format!("{name}.omega"), &mut layer.params.omega, &mut layer.grad_omega);
                f(&format!("{name}.phi"), &mut layer.params.phi, &mut layer.grad_phi);
            }
        }
        match &mut self.backbone {
            Backbone::Branched(branches) => {
                for (i, b) in branches.iter_mut().enumerate() {
                    conv(&format!("branch{i}.conv1"), &mut b.conv1, f);
                    act(&format!("branch{i}.act1"), &mut b.act1, f);
                    conv(&format!("branch{i}.conv2"), &mut b.conv2, f);
                    conv(&format!("branch{i}.shortcut"), &mut b.shortcut, f);
                }
            }
            Backbone::Single(path) => {
                conv("path.conv1", &mut path.conv1, f);
                act("path.act1", &mut path.act1, f);
                conv("path.conv2", &mut path.conv2, f);
            }
        }
        conv("trunk.conv", &mut self.trunk.conv, f);
        act("trunk.act", &mut self.trunk.act, f);
        f(
            "trunk.fc1.weight",
            self.trunk.fc1.weight.data_mut(),
            self.trunk.fc1.grad_weight.data_mut(),
        );
        f(
            "trunk.fc1.bias",
            self.trunk.fc1.bias.data_mut(),
            self.trunk.fc1.grad_bias.data_mut(),
        );
        f(
            "trunk.fc2.weight",
            self.trunk.fc2.weight.data_mut(),
            self.trunk.fc2.grad_weight.data_mut(),
        );
        f(
            "trunk.fc2.bias",
            self.trunk.fc2.bias.data_mut(),
            self.trunk.fc2.grad_bias.data_mut(),
        );
    }

    /// Total number of trainable parameters, by direct enumeration.
    pub fn param_count(&self) -> u64 {
        let mut n = 0u64;
        self.visit_params(&mut |_, _, data| n += data.len() as u64);
        n
    }
}

// ── Complexity accounting ──────────────────────────────────────────

/// Parameter, FLOP, and peak-memory totals for one configuration.
///
/// Conventions: convolutions and dense layers count two FLOPs per
/// multiply-accumulate plus one per bias add; EAS counts four FLOPs per
/// element, ReLU one, average pooling `k` per output, the residual add one
/// per element. Peak memory is the maximum over the forward execution order
/// of live activation bytes plus all parameter bytes, at 32-bit width and
/// batch size 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityReport {
    pub params: u64,
    pub flops: u64,
    pub peak_mac_bytes: u64,
}

#[derive(Debug, Clone, Copy)]
enum PlanOp {
    Conv {
        cin: usize,
        cout: usize,
        kernel: usize,
        len_out: usize,
    },
    Eas {
        elems: usize,
    },
    Relu {
        elems: usize,
    },
    Pool {
        k: usize,
        out_elems: usize,
    },
    Add {
        elems: usize,
    },
    Concat,
    Flatten,
    Dense {
        fin: usize,
        fout: usize,
    },
}

impl PlanOp {
    fn params(&self) -> u64 {
        match *self {
            PlanOp::Conv { cin, cout, kernel, .. } => ((cin * kernel + 1) * cout) as u64,
            PlanOp::Dense { fin, fout } => ((fin + 1) * fout) as u64,
            PlanOp::Eas { .. } => 0, // counted separately per channel
            _ => 0,
        }
    }

    fn flops(&self, eas_channels: usize) -> u64 {
        let _ = eas_channels;
        match *self {
            PlanOp::Conv { cin, cout, kernel, len_out } => {
                (2 * cin * kernel * cout * len_out + cout * len_out) as u64
            }
            PlanOp::Dense { fin, fout } => (2 * fin * fout + fout) as u64,
            PlanOp::Eas { elems } => (4 * elems) as u64,
            PlanOp::Relu { elems } => elems as u64,
            PlanOp::Pool { k, out_elems } => (k * out_elems) as u64,
            PlanOp::Add { elems } => elems as u64,
            PlanOp::Concat | PlanOp::Flatten => 0,
        }
    }
}

/// One step of the forward schedule: the op, the ids of the activation
/// tensors it reads, and the element count of the activation it produces.
struct PlanStep {
    op: PlanOp,
    reads: Vec<usize>,
    out_elems: usize,
}

struct Plan {
    steps: Vec<PlanStep>,
    input_elems: usize,
    eas_param_count: u64,
}

enum BackboneDesc {
    Branched { branches: usize, filters: usize },
    Single { width: usize },
}

fn build_plan(cfg: &ModelConfig, backbone: &BackboneDesc, use_eas: bool) -> Plan {
    let l = cfg.input_length;
    let l1 = l / cfg.pool;
    let l2 = l1 / cfg.pool;
    let l3 = l2 / cfg.pool;
    let mut steps: Vec<PlanStep> = Vec::new();
    let mut eas_params = 0u64;
    // tensor ids: 0 = model input; each step's output gets id steps.len()+1
    let input_id = 0usize;
    let push = |steps: &mut Vec<PlanStep>, op: PlanOp, reads: Vec<usize>, out_elems: usize| -> usize {
        steps.push(PlanStep { op, reads, out_elems });
        steps.len() // output id of this step
    };

    let mut backbone_outs: Vec<usize> = Vec::new();
    let trunk_cin;
    match *backbone {
        BackboneDesc::Branched { branches, filters } => {
            for _ in 0..branches {
                let c1 = push(
                    &mut steps,
                    PlanOp::Conv { cin: cfg.in_channels, cout: filters, kernel: cfg.kernel, len_out: l },
                    vec![input_id],
                    filters * l,
                );
                let a1 = if use_eas {
                    eas_params += 2 * filters as u64;
                    push(&mut steps, PlanOp::Eas { elems: filters * l }, vec![c1], filters * l)
                } else {
                    push(&mut steps, PlanOp::Relu { elems: filters * l }, vec![c1], filters * l)
                };
                let p1 = push(
                    &mut steps,
                    PlanOp::Pool { k: cfg.pool, out_elems: filters * l1 },
                    vec![a1],
                    filters * l1,
                );
                let main = push(
                    &mut steps,
                    PlanOp::Conv { cin: filters, cout: filters, kernel: cfg.kernel, len_out: l1 },
                    vec![p1],
                    filters * l1,
                );
                let sc = push(
                    &mut steps,
                    PlanOp::Conv { cin: cfg.in_channels, cout: filters, kernel: cfg.kernel, len_out: l },
                    vec![input_id],
                    filters * l,
                );
                let scp = push(
                    &mut steps,
                    PlanOp::Pool { k: cfg.pool, out_elems: filters * l1 },
                    vec![sc],
                    filters * l1,
                );
                let sum = push(
                    &mut steps,
                    PlanOp::Add { elems: filters * l1 },
                    vec![main, scp],
                    filters * l1,
                );
                let r = push(&mut steps, PlanOp::Relu { elems: filters * l1 }, vec![sum], filters * l1);
                let out = push(
                    &mut steps,
                    PlanOp::Pool { k: cfg.pool, out_elems: filters * l2 },
                    vec![r],
                    filters * l2,
                );
                backbone_outs.push(out);
            }
            let agg = push(
                &mut steps,
                PlanOp::Concat,
                backbone_outs.clone(),
                branches * filters * l2,
            );
            backbone_outs = vec![agg];
            trunk_cin = branches * filters;
        }
        BackboneDesc::Single { width } => {
            let c1 = push(
                &mut steps,
                PlanOp::Conv { cin: cfg.in_channels, cout: width, kernel: cfg.kernel, len_out: l },
                vec![input_id],
                width * l,
            );
            eas_params += 2 * width as u64;
            let a1 = push(&mut steps, PlanOp::Eas { elems: width * l }, vec![c1], width * l);
            let p1 = push(
                &mut steps,
                PlanOp::Pool { k: cfg.pool, out_elems: width * l1 },
                vec![a1],
                width * l1,
            );
            let c2 = push(
                &mut steps,
                PlanOp::Conv { cin: width, cout: width, kernel: cfg.kernel, len_out: l1 },
                vec![p1],
                width * l1,
            );
            let r = push(&mut steps, PlanOp::Relu { elems: width * l1 }, vec![c2], width * l1);
            let out = push(
                &mut steps,
                PlanOp::Pool { k: cfg.pool, out_elems: width * l2 },
                vec![r],
                width * l2,
            );
            backbone_outs = vec![out];
            trunk_cin = width;
        }
    }

    let agg = backbone_outs[0];
    let tc = push(
        &mut steps,
        PlanOp::Conv { cin: trunk_cin, cout: cfg.trunk_filters, kernel: cfg.kernel, len_out: l2 },
        vec![agg],
        cfg.trunk_filters * l2,
    );
    let ta = if use_eas {
        eas_params += 2 * cfg.trunk_filters as u64;
        push(&mut steps, PlanOp::Eas { elems: cfg.trunk_filters * l2 }, vec![tc], cfg.trunk_filters * l2)
    } else {
        push(&mut steps, PlanOp::Relu { elems: cfg.trunk_filters * l2 }, vec![tc], cfg.trunk_filters * l2)
    };
    let tp = push(
        &mut steps,
        PlanOp::Pool { k: cfg.pool, out_elems: cfg.trunk_filters * l3 },
        vec![ta],
        cfg.trunk_filters * l3,
    );
    let flat_len = cfg.trunk_filters * l3;
    let fl = push(&mut steps, PlanOp::Flatten, vec![tp], flat_len);
    let f1 = push(
        &mut steps,
        PlanOp::Dense { fin: flat_len, fout: cfg.fc_width },
        vec![fl],
        cfg.fc_width,
    );
    let fr = push(&mut steps, PlanOp::Relu { elems: cfg.fc_width }, vec![f1], cfg.fc_width);
    let _logits = push(
        &mut steps,
        PlanOp::Dense { fin: cfg.fc_width, fout: cfg.num_classes },
        vec![fr],
        cfg.num_classes,
    );

    Plan {
        steps,
        input_elems: cfg.in_channels * l,
        eas_param_count: eas_params,
    }
}

fn backbone_desc(cfg: &ModelConfig) -> Result<(BackboneDesc, bool)> {
    Ok(match cfg.variant {
        ModelVariant::Mfnn => (
            BackboneDesc::Branched { branches: cfg.num_branches, filters: cfg.branch_filters },
            true,
        ),
        ModelVariant::ReluM => (
            BackboneDesc::Branched { branches: cfg.num_branches, filters: cfg.branch_filters },
            false,
        ),
        ModelVariant::OneTrunk => (
            BackboneDesc::Single { width: one_trunk_width(cfg)? },
            true,
        ),
    })
}

fn plan_params(plan: &Plan) -> u64 {
    plan.steps.iter().map(|s| s.op.params()).sum::<u64>() + plan.eas_param_count
}

/// Closed-form parameter count for a configuration (no tensors allocated).
pub fn count_params(cfg: &ModelConfig) -> Result<u64> {
    cfg.validate()?;
    let (desc, use_eas) = backbone_desc(cfg)?;
    Ok(plan_params(&build_plan(cfg, &desc, use_eas)))
}

/// Search the single-path filter width whose total parameter count is
/// closest to the branched model's; errors if no width lands within ±10%.
pub fn one_trunk_width(cfg: &ModelConfig) -> Result<usize> {
    let mfnn_cfg = ModelConfig { variant: ModelVariant::Mfnn, ..cfg.clone() };
    let target = plan_params(&build_plan(
        &mfnn_cfg,
        &BackboneDesc::Branched { branches: cfg.num_branches, filters: cfg.branch_filters },
        true,
    ));
    let mut best: Option<(usize, u64)> = None;
    for width in 1..=4096usize {
        let p = plan_params(&build_plan(cfg, &BackboneDesc::Single { width }, true));
        let diff = p.abs_diff(target);
        match best {
            Some((_, d)) if d <= diff => {
                // parameter count grows monotonically in width; once past the
                // target the distance only increases
                if p > target {
                    break;
                }
            }
            _ => best = Some((width, diff)),
        }
    }
    let (width, diff) = best.expect("non-empty search range");
    if (diff as f64) / (target as f64) > 0.10 {
        return Err(Error::invalid(
            "one_trunk_width",
            format!(
                "no single-path width matches {target} parameters within 10% (nearest: width {width}, {diff} away)"
            ),
        ));
    }
    Ok(width)
}

/// Parameter count, forward FLOPs, and peak memory for a configuration.
pub fn count_complexity(cfg: &ModelConfig) -> Result<ComplexityReport> {
    cfg.validate()?;
    let (desc, use_eas) = backbone_desc(cfg)?;
    let plan = build_plan(cfg, &desc, use_eas);
    let params = plan_params(&plan);
    let flops = plan.steps.iter().map(|s| s.op.flops(0)).sum::<u64>();

    // liveness: last step reading each tensor id (0 = input)
    let n_ids = plan.steps.len() + 1;
    let mut last_use = vec![0usize; n_ids];
    for (j, step) in plan.steps.iter().enumerate() {
        for &r in &step.reads {
            last_use[r] = j;
        }
    }
    last_use[plan.steps.len()] = plan.steps.len(); // logits live at the end
    let mut elems = vec![0usize; n_ids];
    elems[0] = plan.input_elems;
    let param_bytes = params * 4;
    let mut live: Vec<usize> = vec![0]; // tensor ids currently alive
    let mut peak = param_bytes + (plan.input_elems as u64) * 4;
    for (j, step) in plan.steps.iter().enumerate() {
        let out_id = j + 1;
        elems[out_id] = step.out_elems;
        live.push(out_id);
        let live_bytes: u64 = live.iter().map(|&id| (elems[id] as u64) * 4).sum();
        peak = peak.max(param_bytes + live_bytes);
        live.retain(|&id| last_use[id] > j);
    }

    Ok(ComplexityReport {
        params,
        flops,
        peak_mac_bytes: peak,
    })
}
