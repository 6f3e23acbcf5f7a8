"""Training loop, loss logging, checkpointing and inference."""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import torch

from . import codec
from .mapgen import DatasetManifest, load_instance
from .model import (
    AdvMode,
    ModelBundle,
    adversarial_generator_loss,
    discriminator_loss,
    fake_critic_input,
    generator_forward,
    gradient_penalty,
    load_checkpoint,
    real_critic_input,
    save_checkpoint,
    supervised_loss,
)

log = logging.getLogger(__name__)

LOG_COLUMNS = ("step", "epoch", "g_total", "g_sup", "g_adv", "d_loss", "gp", "seconds")
EPOCH_COLUMNS = ("epoch", "train_sup", "val_sup", "seconds")


class TrainingDiverged(RuntimeError):
    """A loss became non-finite; a diagnostic checkpoint was written."""


@dataclass
class TrainConfig:
    data: str
    out: str
    preset: str = "ganfinder"
    epochs: int = 10
    batch_size: int = 16
    seed: int = 0
    max_steps: int | None = None
    checkpoint_every: int = 5  # epochs
    augment: bool = True
    base_features: int = 64
    dropout: float = 0.5
    lambda_ce: float | None = None
    lambda_gp: float | None = None
    lr: float | None = None
    device: str = "cpu"
    resume: str | None = None
    train_limit: int | None = None
    validate: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> TrainConfig:
        """Read ``key = value`` lines (``#`` comments allowed); ``overrides`` win."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {raw!r}; expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _coerce(val, types[key])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _coerce(val: str, typ) -> object:
    typ = str(typ)
    if val.lower() in ("none", "null", ""):
        return None
    if typ.startswith("int"):
        return int(val)
    if typ.startswith("float"):
        return float(val)
    if typ.startswith("bool"):
        return val.lower() in ("1", "true", "yes", "on")
    return val


@dataclass
class SplitArrays:
    """Class rasters of one split, stacked: ``inputs``/``targets`` are (N, H, W) uint8."""

    ids: list[str]
    inputs: np.ndarray
    targets: np.ndarray
    blocked: np.ndarray
    starts: list
    goals: list

    def __len__(self) -> int:
        return len(self.ids)


def load_split(data_dir: str | Path, split: str, manifest: DatasetManifest | None = None, limit: int | None = None) -> SplitArrays:
    manifest = manifest or DatasetManifest.read(Path(data_dir))
    recs = manifest.split(split)[:limit]
    inputs, targets, blocked = [], [], []
    for rec in recs:
        grid, gt = load_instance(data_dir, rec)
        inputs.append(codec.grid_raster(grid))
        targets.append(gt)
        blocked.append(grid.blocked)
    h, w = manifest.config.height, manifest.config.width
    empty = np.zeros((0, h, w), np.uint8)
    return SplitArrays(
        [r.id for r in recs],
        np.stack(inputs) if inputs else empty,
        np.stack(targets) if targets else empty,
        np.stack(blocked) if blocked else empty.astype(bool),
        [tuple(r.start) for r in recs],
        [tuple(r.goal) for r in recs],
    )


def onehot(raster: np.ndarray | torch.Tensor, device="cpu") -> torch.Tensor:
    t = torch.as_tensor(np.asarray(raster), device=device).long()
    return torch.nn.functional.one_hot(t, 3).permute(0, 3, 1, 2).float()


def build_bundle(cfg: TrainConfig, height: int, width: int) -> ModelBundle:
    bundle = ModelBundle.from_preset(cfg.preset, height, width, base_features=cfg.base_features, dropout=cfg.dropout)
    changes = {k: getattr(cfg, k) for k in ("lambda_ce", "lambda_gp", "lr") if getattr(cfg, k) is not None}
    return bundle.with_loss(**changes) if changes else bundle


def _optimizers(bundle: ModelBundle):
    lc = bundle.loss_cfg
    betas = (lc.beta1, lc.beta2)
    return (
        torch.optim.Adam(bundle.generator.parameters(), lr=lc.lr, betas=betas),
        torch.optim.Adam(bundle.discriminator.parameters(), lr=lc.lr, betas=betas),
    )


def dihedral(t: torch.Tensor, k: int) -> torch.Tensor:
    """Apply one of the 8 square symmetries to the last two axes."""
    if k >= 4:
        t = t.transpose(-2, -1)
    return torch.rot90(t, k % 4, dims=(-2, -1))


def train_step(bundle: ModelBundle, opt_g, opt_d, x_raster: torch.Tensor, y: torch.Tensor) -> dict[str, float]:
    """One critic update followed by one generator update on a batch."""
    gen, disc = bundle.generator, bundle.discriminator
    lc, ds = bundle.loss_cfg, bundle.disc_spec
    x = onehot(x_raster, x_raster.device)
    logits = generator_forward(gen, x)

    real_in = real_critic_input(ds, x_raster, y)
    fake_in = fake_critic_input(ds, x_raster, logits.detach())
    real_s, fake_s = disc(real_in), disc(fake_in)
    if lc.adv_mode is AdvMode.WGAN_GP:
        gp = gradient_penalty(disc, real_in, fake_in)
    else:
        gp = torch.zeros((), device=logits.device)
    d_loss = discriminator_loss(real_s, fake_s, gp, lc)
    opt_d.zero_grad(set_to_none=True)
    d_loss.backward()
    opt_d.step()

    g_sup = supervised_loss(logits, y, lc)
    g_adv = adversarial_generator_loss(disc(fake_critic_input(ds, x_raster, logits)), lc)
    g_total = lc.lambda_ce * g_sup + g_adv
    opt_g.zero_grad(set_to_none=True)
    g_total.backward()
    opt_g.step()
    return {
        "g_total": g_total.item(),
        "g_sup": g_sup.item(),
        "g_adv": g_adv.item(),
        "d_loss": d_loss.item(),
        "gp": float(gp.item()),
    }


@torch.no_grad()
def mean_supervised_loss(bundle: ModelBundle, data: SplitArrays, batch_size: int = 256) -> float:
    gen = bundle.generator
    was_training = gen.training
    gen.eval()
    total = 0.0
    for i in range(0, len(data), batch_size):
        xr = torch.as_tensor(data.inputs[i:i + batch_size])
        y = torch.as_tensor(data.targets[i:i + batch_size]).long()
        total += supervised_loss(gen(onehot(xr)), y, bundle.loss_cfg).item() * len(xr)
    gen.train(was_training)
    return total / max(len(data), 1)


@dataclass
class TrainResult:
    bundle: ModelBundle
    checkpoint: Path
    log_path: Path
    rows: list[dict] = field(default_factory=list)
    epoch_rows: list[dict] = field(default_factory=list)


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow({k: row[k] for k in columns})


def read_log(path: str | Path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k in ("step", "epoch") else float(v)) for k, v in r.items()} for r in rows]


def train(cfg: TrainConfig) -> TrainResult:
    """Train a bundle on the ``train`` split of ``cfg.data``.

    Writes ``train.csv`` (per step), ``epochs.csv`` (per epoch, with the
    validation supervised loss), ``epoch_XXXX.pt`` checkpoints at the
    configured cadence and ``final.pt``. The test split is never read.
    """
    data_dir, out = Path(cfg.data), Path(cfg.out)
    manifest = DatasetManifest.read(data_dir)
    out.mkdir(parents=True, exist_ok=True)
    train_data = load_split(data_dir, "train", manifest, cfg.train_limit)
    if len(train_data) == 0:
        raise ValueError(f"{data_dir} has an empty train split")
    val_data = load_split(data_dir, "validation", manifest) if cfg.validate else None
    h, w = manifest.config.height, manifest.config.width
    device = torch.device(cfg.device)

    torch.manual_seed(cfg.seed)
    bundle = build_bundle(cfg, h, w)
    bundle.generator.to(device).train()
    bundle.discriminator.to(device).train()
    opt_g, opt_d = _optimizers(bundle)
    rows: list[dict] = []
    epoch_rows: list[dict] = []
    start_epoch, step, elapsed = 0, 0, 0.0

    if cfg.resume:
        state = torch.load(cfg.resume, map_location=device, weights_only=False)
        bundle.generator.load_state_dict(state["generator_state"])
        bundle.discriminator.load_state_dict(state["discriminator_state"])
        extra = state["extra"]
        opt_g.load_state_dict(extra["opt_g"])
        opt_d.load_state_dict(extra["opt_d"])
        torch.set_rng_state(extra["torch_rng"])
        start_epoch, step, elapsed = extra["epoch"], extra["step"], extra["seconds"]
        rows, epoch_rows = list(extra["rows"]), list(extra["epoch_rows"])

    def state_extra(epoch: int) -> dict:
        return {
            "opt_g": opt_g.state_dict(),
            "opt_d": opt_d.state_dict(),
            "torch_rng": torch.get_rng_state(),
            "epoch": epoch,
            "step": step,
            "seconds": elapsed,
            "rows": rows,
            "epoch_rows": epoch_rows,
            "train_config": {f.name: getattr(cfg, f.name) for f in fields(cfg)},
        }

    inputs = torch.as_tensor(train_data.inputs, device=device)
    targets = torch.as_tensor(train_data.targets, device=device).long()
    n = len(train_data)
    t0 = time.perf_counter() - elapsed
    done = False
    for epoch in range(start_epoch, cfg.epochs):
        perm = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        sup_sum = 0.0
        seen = 0
        for b in range(0, n, cfg.batch_size):
            idx = torch.as_tensor(perm[b:b + cfg.batch_size], device=device)
            xb, yb = inputs[idx], targets[idx]
            if cfg.augment and h == w:
                k = int(torch.randint(8, ()))
                xb, yb = dihedral(xb, k), dihedral(yb, k)
            losses = train_step(bundle, opt_g, opt_d, xb, yb)
            step += 1
            elapsed = time.perf_counter() - t0
            rows.append({"step": step, "epoch": epoch, **losses, "seconds": round(elapsed, 3)})
            sup_sum += losses["g_sup"] * len(idx)
            seen += len(idx)
            if not all(math.isfinite(v) for v in losses.values()):
                diag = out / "diverged.pt"
                save_checkpoint(bundle, diag, state_extra(epoch))
                _write_csv(out / "train.csv", LOG_COLUMNS, rows)
                raise TrainingDiverged(f"non-finite loss at step {step}: {losses}; state saved to {diag}")
            if cfg.max_steps is not None and step >= cfg.max_steps:
                done = True
                break
        val = mean_supervised_loss(bundle, val_data) if val_data is not None and len(val_data) else float("nan")
        epoch_rows.append({"epoch": epoch, "train_sup": sup_sum / max(seen, 1), "val_sup": val, "seconds": round(elapsed, 3)})
        log.info("epoch %d step %d train_sup %.4f val_sup %.4f (%.0fs)", epoch, step, epoch_rows[-1]["train_sup"], val, elapsed)
        if not done and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
            save_checkpoint(bundle, out / f"epoch_{epoch + 1:04d}.pt", state_extra(epoch + 1))
        if done:
            break

    final = out / "final.pt"
    save_checkpoint(bundle, final, state_extra(epoch + 1))
    _write_csv(out / "train.csv", LOG_COLUMNS, rows)
    _write_csv(out / "epochs.csv", EPOCH_COLUMNS, epoch_rows)
    bundle.generator.eval()
    bundle.discriminator.eval()
    return TrainResult(bundle, final, out / "train.csv", rows, epoch_rows)


def _as_bundle(checkpoint) -> ModelBundle:
    if isinstance(checkpoint, ModelBundle):
        return checkpoint
    return load_checkpoint(checkpoint)[0]


@torch.no_grad()
def infer(checkpoint, rasters: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Class logits ``(N, 3, H, W)`` for input rasters ``(N, H, W)`` (or one ``(H, W)``)."""
    bundle = _as_bundle(checkpoint)
    rasters = np.asarray(rasters)
    single = rasters.ndim == 2
    if single:
        rasters = rasters[None]
    spec = bundle.gen_spec
    if rasters.shape[-2:] != (spec.height, spec.width):
        raise ValueError(f"input is {rasters.shape[-2:]}, checkpoint expects {(spec.height, spec.width)}")
    gen = bundle.generator
    was_training = gen.training
    gen.eval()
    device = next(gen.parameters()).device
    outs = [
        generator_forward(gen, onehot(rasters[i:i + batch_size], device)).cpu().numpy()
        for i in range(0, len(rasters), batch_size)
    ]
    gen.train(was_training)
    logits = np.concatenate(outs) if outs else np.zeros((0, 3, *rasters.shape[-2:]), np.float32)
    return logits[0] if single else logits
