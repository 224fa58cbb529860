"""Named parameter collections and their versioned binary container.

A `ParamVector` is an ordered mapping from dotted names (``group.sub.name``)
to dense tensors. The flat view concatenates all tensors in name-insertion
order, so the shape metadata partitions the flat vector exactly. The binary
container (magic ``HFPM``, version, named groups, shapes, little-endian
scalars) is the checkpoint format used across the pipeline.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Callable, Dict, Iterator, Tuple

import numpy as np
import torch

__all__ = ["ParamVector", "AdamState", "ParamFormatError"]

MAGIC = b"HFPM"
VERSION = 1

_DTYPE_CODES = {torch.float32: 0, torch.float64: 1}
_CODE_DTYPES = {v: k for k, v in _DTYPE_CODES.items()}
_NP_DTYPES = {0: np.float32, 1: np.float64}


class ParamFormatError(ValueError):
    """Raised when a parameter container is malformed or version-mismatched."""


class ParamVector:
    """Ordered named tensors with flat-vector and group views."""

    def __init__(self, tensors: Dict[str, torch.Tensor]):
        self._tensors: Dict[str, torch.Tensor] = dict(tensors)

    # -- mapping surface -------------------------------------------------
    def __getitem__(self, name: str) -> torch.Tensor:
        return self._tensors[name]

    def __setitem__(self, name: str, value: torch.Tensor) -> None:
        self._tensors[name] = value

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> Tuple[str, ...]:
        return tuple(self._tensors)

    def items(self):
        return self._tensors.items()

    def tensors(self) -> Dict[str, torch.Tensor]:
        return self._tensors

    # -- structure -------------------------------------------------------
    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: tuple(v.shape) for k, v in self._tensors.items()}

    def num_scalars(self) -> int:
        return sum(v.numel() for v in self._tensors.values())

    def group(self, prefix: str) -> "ParamVector":
        """Sub-vector of names under ``prefix.`` (tensors shared, not copied)."""
        dot = prefix if prefix.endswith(".") else prefix + "."
        sub = {k: v for k, v in self._tensors.items() if k.startswith(dot) or k == prefix}
        return ParamVector(sub)

    def group_names(self) -> Tuple[str, ...]:
        seen = []
        for k in self._tensors:
            g = k.split(".", 1)[0]
            if g not in seen:
                seen.append(g)
        return tuple(seen)

    def merged_with(self, other: "ParamVector") -> "ParamVector":
        """New vector where names present in `other` override self's."""
        out = dict(self._tensors)
        out.update(other.tensors())
        return ParamVector(out)

    # -- numeric views ---------------------------------------------------
    def flat(self) -> np.ndarray:
        """Concatenation of all tensors (float64) in name order."""
        if not self._tensors:
            return np.zeros(0, dtype=np.float64)
        return np.concatenate(
            [v.detach().cpu().numpy().astype(np.float64).ravel() for v in self._tensors.values()]
        )

    def assign_flat(self, values: np.ndarray) -> "ParamVector":
        """New vector with the same shapes filled from a flat array."""
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size != self.num_scalars():
            raise ValueError(
                f"flat size {values.size} does not partition into {self.num_scalars()} scalars"
            )
        out, ofs = {}, 0
        for k, v in self._tensors.items():
            n = v.numel()
            chunk = values[ofs : ofs + n].reshape(tuple(v.shape))
            out[k] = torch.from_numpy(np.ascontiguousarray(chunk)).to(v.dtype)
            ofs += n
        return ParamVector(out)

    def all_finite(self) -> bool:
        return all(bool(torch.isfinite(v).all()) for v in self._tensors.values())

    def map(self, fn: Callable[[torch.Tensor], torch.Tensor]) -> "ParamVector":
        return ParamVector({k: fn(v) for k, v in self._tensors.items()})

    def clone(self, requires_grad: bool = False) -> "ParamVector":
        return self.map(lambda v: v.detach().clone().requires_grad_(requires_grad))

    def zeros_like(self) -> "ParamVector":
        return self.map(lambda v: torch.zeros_like(v.detach()))

    def to_dtype(self, dtype: torch.dtype) -> "ParamVector":
        return self.map(lambda v: v.detach().to(dtype))

    def allclose(self, other: "ParamVector", rtol: float = 0.0, atol: float = 0.0) -> bool:
        if self.names() != other.names():
            return False
        return all(
            torch.allclose(v, other[k], rtol=rtol, atol=atol) for k, v in self._tensors.items()
        )

    def equal(self, other: "ParamVector") -> bool:
        return self.names() == other.names() and all(
            torch.equal(v.detach(), other[k].detach()) for k, v in self._tensors.items()
        )

    def content_hash(self) -> str:
        """SHA-256 of the serialized container; used for bit-identity audits."""
        return hashlib.sha256(self.to_bytes()).hexdigest()

    # -- container -------------------------------------------------------
    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack("<II", VERSION, len(self._tensors))]
        for name, tensor in self._tensors.items():
            t = tensor.detach().cpu().contiguous()
            if t.dtype not in _DTYPE_CODES:
                raise ParamFormatError(f"unsupported dtype {t.dtype} for '{name}'")
            raw = name.encode()
            parts.append(struct.pack("<H", len(raw)))
            parts.append(raw)
            parts.append(struct.pack("<BB", _DTYPE_CODES[t.dtype], t.dim()))
            parts.append(struct.pack(f"<{t.dim()}I", *t.shape) if t.dim() else b"")
            arr = t.numpy()
            if arr.dtype.byteorder == ">":  # pragma: no cover - LE hosts
                arr = arr.astype(arr.dtype.newbyteorder("<"))
            parts.append(arr.tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ParamVector":
        view = memoryview(blob)
        if bytes(view[:4]) != MAGIC:
            raise ParamFormatError("bad magic bytes: not a parameter container")
        version, count = struct.unpack_from("<II", view, 4)
        if version != VERSION:
            raise ParamFormatError(f"container version {version}, expected {VERSION}")
        ofs = 12
        tensors: Dict[str, torch.Tensor] = {}
        try:
            for _ in range(count):
                (nlen,) = struct.unpack_from("<H", view, ofs)
                ofs += 2
                name = bytes(view[ofs : ofs + nlen]).decode()
                ofs += nlen
                code, ndim = struct.unpack_from("<BB", view, ofs)
                ofs += 2
                shape = struct.unpack_from(f"<{ndim}I", view, ofs) if ndim else ()
                ofs += 4 * ndim
                np_dtype = _NP_DTYPES[code]
                nbytes = int(np.prod(shape, dtype=np.int64)) * np.dtype(np_dtype).itemsize
                arr = np.frombuffer(view, dtype=np_dtype, count=int(np.prod(shape, dtype=np.int64)), offset=ofs)
                ofs += nbytes
                tensors[name] = torch.from_numpy(arr.reshape(shape).copy()).to(_CODE_DTYPES[code])
        except (struct.error, ValueError) as exc:
            raise ParamFormatError(f"truncated container at byte {ofs}: {exc}") from exc
        if ofs != len(blob):
            raise ParamFormatError(f"trailing bytes after offset {ofs}")
        return cls(tensors)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ParamVector":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def __repr__(self) -> str:  # pragma: no cover
        return f"ParamVector({self.num_scalars()} scalars in {len(self)} tensors)"


class AdamState:
    """First/second-moment accumulators plus a shared step counter."""

    def __init__(self, m: ParamVector, v: ParamVector, step: int = 0):
        self.m = m
        self.v = v
        self.step = int(step)

    @classmethod
    def zeros(cls, params: ParamVector) -> "AdamState":
        return cls(params.zeros_like(), params.zeros_like(), 0)

    def shape_matches(self, params: ParamVector) -> bool:
        return self.m.shapes() == params.shapes() and self.v.shapes() == params.shapes()
