"""Self-describing binary checkpoints.

Layout (documented in the README): an ASCII magic line, a little-endian
uint64 header length, a UTF-8 JSON header, then the raw little-endian
float64 payload of every tensor record in header order.  Optimizer moments
ride along as reserved "opt.m.*" / "opt.v.*" records, so a load restores
training bitwise.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .optim import AdamW
from .tensor import Parameter

MAGIC = b"GRAPHPREFIX-CKPT-1\n"


@dataclass
class Checkpoint:
    config: TrainConfig
    step: int
    tensors: dict[str, np.ndarray]
    rng_state: dict | None
    opt_t: int | None

    def optimizer_state(self) -> dict | None:
        if self.opt_t is None:
            return None
        m = {k[len("opt.m."):]: v for k, v in self.tensors.items() if k.startswith("opt.m.")}
        v = {k[len("opt.v."):]: w for k, w in self.tensors.items() if k.startswith("opt.v.")}
        return {"t": self.opt_t, "m": m, "v": v}


def save_checkpoint(path, params: list[Parameter], config: TrainConfig, step: int,
                    rng_state: dict | None = None, optimizer: AdamW | None = None) -> None:
    records: list[tuple[str, np.ndarray]] = [(p.name, p.data) for p in params]
    opt_t = None
    if optimizer is not None:
        state = optimizer.state_dict()
        opt_t = state["t"]
        records += [(f"opt.m.{k}", v) for k, v in state["m"].items()]
        records += [(f"opt.v.{k}", v) for k, v in state["v"].items()]
    header = {
        "config": config.to_dict(),
        "step": step,
        "rng": rng_state,
        "opt_t": opt_t,
        "tensors": [{"name": n, "shape": list(a.shape)} for n, a in records],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, arr in records:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise ValueError(f"{path}: not a checkpoint file")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    header = json.loads(raw[off:off + hlen].decode("utf-8"))
    off += hlen
    tensors: dict[str, np.ndarray] = {}
    for rec in header["tensors"]:
        shape = tuple(rec["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        tensors[rec["name"]] = arr.astype(np.float64)
        off += count * 8
    return Checkpoint(config=TrainConfig.from_dict(header["config"]),
                      step=int(header["step"]), tensors=tensors,
                      rng_state=header.get("rng"), opt_t=header.get("opt_t"))


def restore_parameters(params: list[Parameter], tensors: dict[str, np.ndarray]) -> None:
    for p in params:
        if p.name not in tensors:
            raise KeyError(f"checkpoint missing parameter {p.name}")
        src = tensors[p.name]
        if src.shape != p.data.shape:
            raise ValueError(f"{p.name}: checkpoint shape {src.shape} != model {p.data.shape}")
        p.tensor.data = np.array(src, dtype=np.float64)
