"""GAN-finder networks, losses and checkpoints.

The generator is a U-Net over one-hot class channels that outputs per-pixel
class logits. The default critic sees only the path channel (softmax PATH
probability for generated samples, the binary path mask for ground truth) and
is trained as a Wasserstein critic with gradient penalty. The
``pix2pix-baseline`` preset switches back to an L1 intensity loss, a vanilla
GAN objective and a critic conditioned on the input image.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

from .grid import NUM_CLASSES, PATH

CHECKPOINT_FORMAT = "ganfinder-checkpoint"
CHECKPOINT_VERSION = 1

# class intensities on [0, 1], indexed by class label
_INTENSITY = torch.tensor([255.0, 128.0, 0.0]) / 255.0


class AdvMode(str, Enum):
    WGAN_GP = "wgan_gp"
    VANILLA = "vanilla"


class SupMode(str, Enum):
    CROSS_ENTROPY = "cross_entropy"
    L1 = "l1"


def default_depth(height: int, width: int) -> int:
    return max(2, int(math.log2(min(height, width))) - 1)


@dataclass(frozen=True)
class GeneratorSpec:
    height: int = 64
    width: int = 64
    in_channels: int = NUM_CLASSES
    out_channels: int = NUM_CLASSES
    depth: int | None = None
    base_features: int = 64
    max_features: int = 512
    norm: str = "batch"
    activation: str = "leaky_relu"
    dropout: float = 0.5
    dropout_layers: int = 1

    def __post_init__(self) -> None:
        if self.depth is None:
            object.__setattr__(self, "depth", default_depth(self.height, self.width))
        if self.depth < 2:
            raise ValueError("generator depth must be at least 2")
        k = 2 ** self.depth
        if self.height % k or self.width % k:
            raise ValueError(f"{self.height}x{self.width} is not divisible by 2**depth = {k}")

    def features(self, level: int) -> int:
        return min(self.base_features * 2 ** level, self.max_features)


@dataclass(frozen=True)
class DiscriminatorSpec:
    height: int = 64
    width: int = 64
    conditional_full_image: bool = False
    base_features: int = 64
    max_features: int = 256
    depth: int | None = None
    norm: str = "none"

    def __post_init__(self) -> None:
        if self.depth is None:
            object.__setattr__(self, "depth", default_depth(self.height, self.width))

    @property
    def in_channels(self) -> int:
        # conditional: input-image intensity + candidate-image intensity
        return 2 if self.conditional_full_image else 1


@dataclass(frozen=True)
class LossConfig:
    lambda_ce: float = 100.0
    lambda_gp: float = 10.0
    adv_mode: AdvMode = AdvMode.WGAN_GP
    sup_mode: SupMode = SupMode.CROSS_ENTROPY
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self) -> None:
        object.__setattr__(self, "adv_mode", AdvMode(self.adv_mode))
        object.__setattr__(self, "sup_mode", SupMode(self.sup_mode))
        if self.lambda_ce < 0 or self.lambda_gp < 0:
            raise ValueError("loss weights must be non-negative")


PRESETS = ("ganfinder", "pix2pix-baseline", "pix2pix-ce")


def preset(name: str, height: int, width: int, **gen_overrides) -> tuple[GeneratorSpec, DiscriminatorSpec, LossConfig]:
    """Architecture and loss settings for a named configuration.

    ``ganfinder``: cross-entropy + WGAN-GP, unconditional path-only critic.
    ``pix2pix-baseline``: L1 + vanilla GAN, critic conditioned on the input.
    ``pix2pix-ce``: cross-entropy + vanilla GAN, conditioned critic.
    """
    gen = GeneratorSpec(height=height, width=width, **gen_overrides)
    if name == "ganfinder":
        return gen, DiscriminatorSpec(height, width), LossConfig()
    if name == "pix2pix-baseline":
        return (
            gen,
            DiscriminatorSpec(height, width, conditional_full_image=True, norm="batch"),
            LossConfig(adv_mode=AdvMode.VANILLA, sup_mode=SupMode.L1),
        )
    if name == "pix2pix-ce":
        return (
            gen,
            DiscriminatorSpec(height, width, conditional_full_image=True, norm="batch"),
            LossConfig(adv_mode=AdvMode.VANILLA, sup_mode=SupMode.CROSS_ENTROPY),
        )
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


# -- networks -------------------------------------------------------------------

def _norm(kind: str, ch: int) -> nn.Module:
    if kind == "batch":
        return nn.BatchNorm2d(ch)
    if kind == "instance":
        return nn.InstanceNorm2d(ch, affine=True)
    if kind == "none":
        return nn.Identity()
    raise ValueError(f"unknown norm {kind!r}")


def _act(kind: str) -> nn.Module:
    if kind == "leaky_relu":
        return nn.LeakyReLU(0.2)
    if kind == "relu":
        return nn.ReLU()
    raise ValueError(f"unknown activation {kind!r}")


class UNetGenerator(nn.Module):
    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        d = spec.depth
        self.down = nn.ModuleList()
        cin = spec.in_channels
        for i in range(d):
            cout = spec.features(i)
            self.down.append(nn.Sequential(
                nn.Conv2d(cin, cout, 4, 2, 1, bias=spec.norm == "none" or i == 0),
                nn.Identity() if i == 0 else _norm(spec.norm, cout),
                _act(spec.activation),
            ))
            cin = cout
        self.up = nn.ModuleList()
        for i in range(d - 1, 0, -1):
            cin = spec.features(i) if i == d - 1 else 2 * spec.features(i)
            cout = spec.features(i - 1)
            inner = d - 1 - i
            self.up.append(nn.Sequential(
                nn.ConvTranspose2d(cin, cout, 4, 2, 1, bias=spec.norm == "none"),
                _norm(spec.norm, cout),
                nn.Dropout(spec.dropout) if inner < spec.dropout_layers and spec.dropout > 0 else nn.Identity(),
                nn.ReLU(),
            ))
        self.head = nn.ConvTranspose2d(2 * spec.features(0), spec.out_channels, 4, 2, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for layer in self.down:
            x = layer(x)
            skips.append(x)
        skips.pop()
        for layer in self.up:
            x = torch.cat([layer(x), skips.pop()], dim=1)
        return self.head(x)


class Critic(nn.Module):
    """Strided conv stack to one unbounded score per sample."""

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        layers: list[nn.Module] = []
        cin = spec.in_channels
        for i in range(spec.depth):
            cout = min(spec.base_features * 2 ** i, spec.max_features)
            layers += [
                nn.Conv2d(cin, cout, 4, 2, 1),
                nn.Identity() if i == 0 else _norm(spec.norm, cout),
                nn.LeakyReLU(0.2),
            ]
            cin = cout
        self.features = nn.Sequential(*layers)
        k = 2 ** spec.depth
        self.score = nn.Linear(cin * (spec.height // k) * (spec.width // k), 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != self.spec.in_channels:
            raise ValueError(
                f"critic expects {self.spec.in_channels} input channel(s), got shape {tuple(x.shape)}"
            )
        return self.score(self.features(x).flatten(1)).squeeze(1)


def generator_forward(gen: UNetGenerator, x: torch.Tensor) -> torch.Tensor:
    k = 2 ** gen.spec.depth
    if x.shape[-1] % k or x.shape[-2] % k:
        raise ValueError(f"spatial dims {tuple(x.shape[-2:])} must be divisible by {k}")
    return gen(x)


# -- critic inputs ----------------------------------------------------------------

def expected_intensity(logits: torch.Tensor) -> torch.Tensor:
    """Softmax-weighted palette intensity in [0, 1], shape (N, H, W)."""
    probs = torch.softmax(logits, dim=1)
    return torch.einsum("nchw,c->nhw", probs, _INTENSITY.to(logits))


def class_intensity(raster: torch.Tensor) -> torch.Tensor:
    return _INTENSITY.to(raster.device)[raster.long()]


def real_critic_input(spec: DiscriminatorSpec, inputs: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Critic input for ground truth. ``inputs``/``target`` are class rasters (N, H, W)."""
    if spec.conditional_full_image:
        return torch.stack([class_intensity(inputs), class_intensity(target)], dim=1)
    return (target == PATH).float().unsqueeze(1)


def fake_critic_input(spec: DiscriminatorSpec, inputs: torch.Tensor, logits: torch.Tensor) -> torch.Tensor:
    """Critic input for generated logits (N, 3, H, W); differentiable in ``logits``."""
    if spec.conditional_full_image:
        return torch.stack([class_intensity(inputs).to(logits), expected_intensity(logits)], dim=1)
    return torch.softmax(logits, dim=1)[:, PATH:PATH + 1]


# -- losses ---------------------------------------------------------------------

def supervised_loss(logits: torch.Tensor, target: torch.Tensor, cfg: LossConfig) -> torch.Tensor:
    if logits.shape[-2:] != target.shape[-2:]:
        raise ValueError("logits and target spatial dims differ")
    if cfg.sup_mode is SupMode.CROSS_ENTROPY:
        return F.cross_entropy(logits, target.long())
    return (expected_intensity(logits) - class_intensity(target).to(logits)).abs().mean()


def adversarial_generator_loss(fake_score: torch.Tensor, cfg: LossConfig) -> torch.Tensor:
    if cfg.adv_mode is AdvMode.WGAN_GP:
        return -fake_score.mean()
    # non-saturating: -log sigmoid(D(fake))
    return F.softplus(-fake_score).mean()


def discriminator_loss(real_score: torch.Tensor, fake_score: torch.Tensor, gp, cfg: LossConfig) -> torch.Tensor:
    if cfg.adv_mode is AdvMode.WGAN_GP:
        return fake_score.mean() - real_score.mean() + cfg.lambda_gp * gp
    return F.softplus(-real_score).mean() + F.softplus(fake_score).mean()


def gradient_penalty(critic, real: torch.Tensor, fake: torch.Tensor, eps: torch.Tensor | None = None) -> torch.Tensor:
    """Mean of ``(||grad critic(x_hat)||_2 - 1)**2`` with ``x_hat`` between real and fake.

    ``eps`` (one value per sample) defaults to uniform draws from the torch RNG.
    """
    if real.shape != fake.shape:
        raise ValueError("real and fake batches must have the same shape")
    n = real.shape[0]
    if eps is None:
        eps = torch.rand(n, device=real.device, dtype=real.dtype)
    eps = eps.reshape(n, *([1] * (real.dim() - 1)))
    x_hat = (eps * real + (1 - eps) * fake).detach().requires_grad_(True)
    out = critic(x_hat)
    grad = None
    if out.requires_grad:
        (grad,) = torch.autograd.grad(out.sum(), x_hat, create_graph=True, allow_unused=True)
    if grad is None:  # critic ignores its input
        grad = torch.zeros_like(x_hat)
    norm = grad.flatten(1).norm(2, dim=1)
    return ((norm - 1) ** 2).mean()


def total_generator_loss(logits, target, fake_score, cfg: LossConfig) -> torch.Tensor:
    return cfg.lambda_ce * supervised_loss(logits, target, cfg) + adversarial_generator_loss(fake_score, cfg)


# -- bundles and checkpoints --------------------------------------------------------

def _spec_dict(obj) -> dict:
    return {k: (v.value if isinstance(v, Enum) else v) for k, v in asdict(obj).items()}


@dataclass
class ModelBundle:
    gen_spec: GeneratorSpec
    disc_spec: DiscriminatorSpec
    loss_cfg: LossConfig
    generator: UNetGenerator = field(init=False)
    discriminator: Critic = field(init=False)
    preset: str = "custom"

    def __post_init__(self) -> None:
        self.generator = UNetGenerator(self.gen_spec)
        self.discriminator = Critic(self.disc_spec)

    @classmethod
    def from_preset(cls, name: str, height: int, width: int, **gen_overrides) -> ModelBundle:
        g, d, l = preset(name, height, width, **gen_overrides)
        return cls(g, d, l, preset=name)

    def with_loss(self, **changes) -> ModelBundle:
        b = ModelBundle(self.gen_spec, self.disc_spec, replace(self.loss_cfg, **changes), preset=self.preset)
        b.generator.load_state_dict(self.generator.state_dict())
        b.discriminator.load_state_dict(self.discriminator.state_dict())
        return b

    def describe(self) -> dict:
        return {
            "preset": self.preset,
            "generator_spec": _spec_dict(self.gen_spec),
            "discriminator_spec": _spec_dict(self.disc_spec),
            "loss_config": _spec_dict(self.loss_cfg),
        }


def save_checkpoint(bundle: ModelBundle, path: str | Path, extra: dict | None = None) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        **bundle.describe(),
        "generator_state": bundle.generator.state_dict(),
        "discriminator_state": bundle.discriminator.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, Path(path))


def load_checkpoint(path: str | Path) -> tuple[ModelBundle, dict]:
    """Restore a bundle; returns it with the ``extra`` training state."""
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')!r}")
    bundle = ModelBundle(
        GeneratorSpec(**payload["generator_spec"]),
        DiscriminatorSpec(**payload["discriminator_spec"]),
        LossConfig(**payload["loss_config"]),
        preset=payload.get("preset", "custom"),
    )
    bundle.generator.load_state_dict(payload["generator_state"])
    bundle.discriminator.load_state_dict(payload["discriminator_state"])
    return bundle, payload.get("extra", {})
