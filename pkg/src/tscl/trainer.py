"""Adversarial training loop, validation, and per-epoch logging."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .autodiff import Tensor, concat_channels, no_grad
from .config import TrainConfig
from .data import Dataset, load_directory, payload_bits, synth_corpus
from .dynamics import TsclState
from .errors import NumericError
from .metrics import bce, bit_accuracy, encode_loss, ms_ssim, psnr, rmse, ssim, total_loss
from .models import (
    StegoModels,
    decoder_forward,
    encoder_forward,
    init_params,
    save_checkpoint,
    steganalyzer_forward,
)
from .optim import SGD, Adam
from .scheduler import WeightVector

log = logging.getLogger(__name__)

LOG_COLUMNS = (
    "epoch", "w_encode", "w_decode", "w_steg",
    "loss_encode", "loss_decode", "loss_steg", "loss_total",
    "val_ssim", "val_msssim", "val_psnr", "val_rmse", "val_bitacc", "val_stegscore",
)
WEIGHT_COLUMNS = LOG_COLUMNS[:4]


@dataclass
class EpochRecord:
    epoch: int
    w_encode: float
    w_decode: float
    w_steg: float
    loss_encode: float
    loss_decode: float
    loss_steg: float
    loss_total: float
    val_ssim: float
    val_msssim: float
    val_psnr: float
    val_rmse: float
    val_bitacc: float
    val_stegscore: float

    def row(self) -> List[str]:
        # repr-style formatting round-trips floats exactly, so logs can be replayed
        return [str(getattr(self, c)) for c in LOG_COLUMNS]


class Trainer:
    """Owns the models, optimizers and data for one run."""

    def __init__(self, config: TrainConfig, dataset: Optional[Dataset] = None):
        self.config = config
        self.dataset = dataset if dataset is not None else build_dataset(config)
        if self.dataset.images.shape[-1] != config.data.size:
            raise ValueError(f"dataset images are {self.dataset.images.shape[-1]} px, config says {config.data.size}")
        self.models: StegoModels = init_params(config.seed, config.depth, config.data.size)
        enc_dec = self.models.encoder.params() + self.models.decoder.params()
        o = config.optim
        self.adam = Adam(enc_dec, lr=o.adam_lr, betas=tuple(o.adam_betas), eps=o.adam_eps)
        self.sgd = SGD(self.models.steganalyzer.params(), lr=o.sgd_lr, weight_decay=o.sgd_weight_decay)
        self.rng = np.random.default_rng([config.seed, 1])
        val = self.dataset.split("val")
        self.val_payload = payload_bits(np.random.default_rng([config.seed, 2]), len(val), config.depth, config.data.size)
        self.steg_steps = 0

    # -- one epoch ------------------------------------------------------
    def train_epoch(self, weights: WeightVector) -> Tuple[float, float, float]:
        """One pass over the training split; returns raw epoch-mean (L_E, L_D, L_S)."""
        cfg = self.config
        m = self.models
        train = self.dataset.split("train")
        order = self.rng.permutation(len(train))
        sums = np.zeros(3)
        seen = 0
        steg_params = m.steganalyzer.params()
        for b, start in enumerate(range(0, len(order), cfg.batch_size), start=1):
            idx = order[start:start + cfg.batch_size]
            cover = Tensor(train[idx])
            payload = Tensor(payload_bits(self.rng, len(idx), cfg.depth, cfg.data.size))

            self.adam.zero_grad()
            for p in steg_params:  # the steganalyzer is a fixed critic during the encoder/decoder step
                p.requires_grad = False
            stego = encoder_forward(m.encoder, cover, payload, training=True)
            decoded = decoder_forward(m.decoder, stego, training=True)
            score = steganalyzer_forward(m.steganalyzer, stego, training=True, update_stats=False)
            for p in steg_params:
                p.requires_grad = True
            l_e = encode_loss(cover, stego, cfg.msssim_scales)
            l_d = bce(decoded, payload)
            l_s = bce(score, np.zeros(len(idx)))
            losses = (l_e.item(), l_d.item(), l_s.item())
            if not all(math.isfinite(v) for v in losses):
                raise NumericError(f"non-finite loss at batch {b}: encode={losses[0]} decode={losses[1]} steg={losses[2]}")
            total_loss(weights, (l_e, l_d, l_s)).backward()
            self.adam.step()

            if b % cfg.optim.steg_update_every == 0:
                self.steg_step(cover, stego.detach())

            sums += np.array(losses) * len(idx)
            seen += len(idx)
        mean = sums / seen
        return float(mean[0]), float(mean[1]), float(mean[2])

    def steg_step(self, cover: Tensor, stego: Tensor) -> float:
        """One SGD step of the steganalyzer on covers (label 0) and detached stegos (label 1)."""
        n = cover.shape[0]
        self.sgd.zero_grad()
        images = Tensor(np.concatenate([cover.data, stego.data], axis=0))
        scores = steganalyzer_forward(self.models.steganalyzer, images, training=True)
        labels = np.concatenate([np.zeros(n), np.ones(n)])
        loss = bce(scores, labels)
        loss.backward()
        self.sgd.step()
        self.sgd.zero_grad()
        self.steg_steps += 1
        return loss.item()

    # -- validation ------------------------------------------------------
    def validate(self, split: str = "val") -> Dict[str, float]:
        cfg = self.config
        m = self.models
        covers = self.dataset.split(split)
        payload = self.val_payload if split == "val" else payload_bits(
            np.random.default_rng([cfg.seed, 3]), len(covers), cfg.depth, cfg.data.size)
        stegos, decoded, scores = [], [], []
        with no_grad():
            for start in range(0, len(covers), cfg.batch_size):
                c = Tensor(covers[start:start + cfg.batch_size])
                mb = Tensor(payload[start:start + cfg.batch_size])
                s = encoder_forward(m.encoder, c, mb, training=False)
                stegos.append(s.data)
                decoded.append(decoder_forward(m.decoder, s, training=False).data)
                scores.append(steganalyzer_forward(m.steganalyzer, s, training=False).data)
            stego = np.concatenate(stegos)
            return {
                "val_ssim": ssim(covers, stego).item(),
                "val_msssim": ms_ssim(covers, stego, cfg.msssim_scales).item(),
                "val_psnr": psnr(covers, stego),
                "val_rmse": rmse(covers, stego).item(),
                "val_bitacc": bit_accuracy(payload, np.concatenate(decoded)),
                "val_stegscore": float(np.mean(np.concatenate(scores))),
            }

    def checkpoint(self, path) -> None:
        save_checkpoint(path, self.models, self.adam.state_arrays(), self.adam.step_count)


def build_dataset(config: TrainConfig) -> Dataset:
    d = config.data
    if d.source == "directory":
        return load_directory(d.root)
    return synth_corpus(d.seed, d.count, d.size)


def build_state(config: TrainConfig) -> TsclState:
    return TsclState(config.curriculum(), config.handoff(), config.dynamics.build())


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def run_experiment(config: TrainConfig, dataset: Optional[Dataset] = None, out_dir=None) -> List[EpochRecord]:
    """Train for ``config.epochs`` epochs and write the run directory.

    Files: ``log.csv`` (one row per epoch), ``weights.csv``, ``config.json``,
    ``summary.json`` and, unless disabled, ``final.ckpt`` / ``best.ckpt``
    (best by validation bit accuracy, ties broken by PSNR).
    """
    out = Path(out_dir) if out_dir is not None else config.resolved_output_dir()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")

    started = time.perf_counter()
    trainer = Trainer(config, dataset)
    state = build_state(config)
    records: List[EpochRecord] = []
    last_losses = None
    best_key = None
    for epoch in range(config.epochs):
        w = state.next_weights(epoch, last_losses)
        losses = trainer.train_epoch(w)
        metrics = trainer.validate()
        rec = EpochRecord(epoch, *w, *losses, float(total_loss(w, losses).data), **metrics)
        records.append(rec)
        last_losses = losses
        log.info("epoch %d stage=%s w=(%.3f, %.3f, %.3f) L=(%.4f, %.4f, %.4f) bitacc=%.4f psnr=%.2f",
                 epoch, state.stage(epoch), *w, *losses, rec.val_bitacc, rec.val_psnr)
        _write_csv(out / "log.csv", LOG_COLUMNS, [r.row() for r in records])
        key = (rec.val_bitacc, rec.val_psnr)
        if config.save_checkpoints and (best_key is None or key > best_key):
            trainer.checkpoint(out / "best.ckpt")
        if best_key is None or key > best_key:
            best_key = key

    _write_csv(out / "weights.csv", WEIGHT_COLUMNS, [r.row()[:4] for r in records])
    if config.save_checkpoints:
        trainer.checkpoint(out / "final.ckpt")
    final = records[-1]
    best = max(records, key=lambda r: (r.val_bitacc, r.val_psnr))
    summary = {
        "mode": config.mode,
        "seed": config.seed,
        "depth": config.depth,
        "epochs": config.epochs,
        "handoff_epoch": config.handoff(),
        "steganalyzer_steps": trainer.steg_steps,
        "elapsed_seconds": round(time.perf_counter() - started, 1),  # wall time; not part of log.csv
        "final": {c: getattr(final, c) for c in LOG_COLUMNS},
        "best": {c: getattr(best, c) for c in LOG_COLUMNS},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return records


# -- log reading and replay ---------------------------------------------------

def read_log(path) -> List[Dict[str, float]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = []
        for r in reader:
            rows.append({k: (int(v) if k == "epoch" else float(v)) for k, v in r.items()})
        return rows


def replay_weights(config: TrainConfig, log_rows: Sequence[Dict[str, float]]) -> List[int]:
    """Re-evaluate the scheduler from the logged losses; return epochs whose weights differ."""
    state = build_state(config)
    bad = []
    last = None
    for row in log_rows:
        w = state.next_weights(row["epoch"], last)
        if w != (row["w_encode"], row["w_decode"], row["w_steg"]):
            bad.append(row["epoch"])
        last = (row["loss_encode"], row["loss_decode"], row["loss_steg"])
    return bad
