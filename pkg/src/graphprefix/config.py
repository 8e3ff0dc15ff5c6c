"""Run configuration: a flat key=value file mapped onto one dataclass.

Desk-scale defaults below train in minutes on a CPU.  The full-scale
reference settings this layout mirrors are: hidden 768, encoder/decoder
4/4, graph transformer 4, heads 6, prefix 5, walk features 8, batch 32,
lr 5e-5, warmup 1 epoch, weight decay 0.1, epochs 15-20.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


@dataclass
class TrainConfig:
    # model widths and depths
    hidden_dim: int = 64
    enc_layers: int = 2
    dec_layers: int = 2
    gt_layers: int = 4
    heads: int = 4
    prefix_len: int = 5
    walk_len: int = 8
    # frozen backbone
    backbone_layers: int = 2
    backbone_dim: int = 128
    backbone_heads: int = 4
    block_size: int = 128
    # optimization
    batch_size: int = 32
    lr: float = 3e-4
    epochs: int = 10
    warmup_epochs: int = 1
    weight_decay: float = 0.1
    seed: int = 0
    pooling: str = "auto"   # auto | anchor | mean
    # backbone pretraining
    pretrain_steps: int = 1500
    pretrain_lr: float = 1e-3
    pretrain_batch: int = 8
    pretrain_target_loss: float = 0.0
    max_sequences: int = 6000
    # decoding
    max_new_tokens: int = 12

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool) and v < 0:
                raise ValueError(f"config field {f.name} must be nonnegative, got {v}")
        if self.pooling not in ("auto", "anchor", "mean"):
            raise ValueError(f"unknown pooling mode: {self.pooling}")
        if self.hidden_dim % self.heads or self.backbone_dim % self.backbone_heads:
            raise ValueError("head count must divide the corresponding width")

    def replace(self, **kwargs) -> "TrainConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def save(self, path) -> None:
        lines = ["# graphprefix run configuration"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name}={getattr(self, f.name)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TrainConfig":
        values: dict = {}
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in fields:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            kind = fields[key].type
            if kind == "int":
                values[key] = int(raw)
            elif kind == "float":
                values[key] = float(raw)
            else:
                values[key] = raw
        return cls(**values)
