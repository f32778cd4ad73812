"""Dot layouts, logical-state occupancies and charge-trap placement.

All positions are SI metres stored as ``(n, 3)`` float arrays. Dots are point
sites; the 4-dot square is labelled A, B, C, D clockwise seen from the trap
layer (A top-left), so the logical states occupy the diagonals and the
leakage states occupy the top and bottom edges.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

LOGICAL_LABELS = ("0", "1")
LEAKAGE_LABELS = ("e0", "e1")


class Encoding(str, enum.Enum):
    DIPOLE = "dipole2qd"
    QUADRUPOLE = "quadrupole4qd"

    @classmethod
    def parse(cls, value) -> "Encoding":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"2qd": cls.DIPOLE, "dipole": cls.DIPOLE, "4qd": cls.QUADRUPOLE, "quadrupole": cls.QUADRUPOLE}
        if key in aliases:
            return aliases[key]
        return cls(key)


OCCUPANCY = {
    Encoding.DIPOLE: {"0": (0,), "1": (1,)},
    Encoding.QUADRUPOLE: {"0": (0, 2), "1": (1, 3), "e0": (0, 1), "e1": (2, 3)},
}


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QubitGeometry:
    kind: Encoding
    dots: np.ndarray
    side_length: float
    occupancy: dict = field(default=None)

    def __post_init__(self):
        kind = Encoding.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        dots = _frozen(self.dots)
        expected = 2 if kind is Encoding.DIPOLE else 4
        if dots.shape != (expected, 3):
            raise ValueError(f"{kind.value} needs {expected} dots, got array of shape {dots.shape}")
        if not np.all(np.isfinite(dots)):
            raise ValueError("dot positions must be finite")
        object.__setattr__(self, "dots", dots)
        if self.occupancy is None:
            object.__setattr__(self, "occupancy", dict(OCCUPANCY[kind]))
        if not self.side_length > 0:
            raise ValueError("side_length must be positive")

    @property
    def n_dots(self) -> int:
        return self.dots.shape[0]

    @property
    def labels(self) -> tuple:
        return tuple(self.occupancy)

    def occupancy_matrix(self, labels=None) -> np.ndarray:
        """0/1 matrix of shape ``(n_dots, n_states)`` mapping dots to basis states."""
        labels = self.labels if labels is None else labels
        out = np.zeros((self.n_dots, len(labels)))
        for col, label in enumerate(labels):
            out[list(self.occupancy[label]), col] = 1.0
        return out

    def charge_centroid(self, label) -> np.ndarray:
        return self.dots[list(self.occupancy[label])].mean(axis=0)

    def __eq__(self, other):
        if not isinstance(other, QubitGeometry):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.side_length == other.side_length
            and self.occupancy == other.occupancy
            and np.array_equal(self.dots, other.dots)
        )

    __hash__ = None


def make_ideal_geometry(kind, side_length: float, depth: float) -> QubitGeometry:
    """Ideal layout centred laterally on the origin in the plane ``z = -depth``.

    The trap layer sits at ``z = 0``.
    """
    kind = Encoding.parse(kind)
    if not side_length > 0:
        raise ValueError("side_length must be positive")
    if not depth > 0:
        raise ValueError("depth must be positive")
    h = 0.5 * side_length
    z = -float(depth)
    if kind is Encoding.DIPOLE:
        dots = [(-h, 0.0, z), (h, 0.0, z)]
    else:
        dots = [(-h, h, z), (h, h, z), (h, -h, z), (-h, -h, z)]
    return QubitGeometry(kind, np.array(dots), float(side_length))


def centroid(geom: QubitGeometry) -> np.ndarray:
    return geom.dots.mean(axis=0)


def perturb_geometry(geom: QubitGeometry, sigma: float, seed) -> QubitGeometry:
    """Displace every dot by an isotropic 3D Gaussian with per-axis std ``sigma * side_length``."""
    if not sigma >= 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return geom
    rng = np.random.default_rng(seed)
    shift = rng.normal(0.0, sigma * geom.side_length, size=geom.dots.shape)
    return replace(geom, dots=geom.dots + shift)


@dataclass(frozen=True)
class TrapRegion:
    """Axis-aligned sampling rectangle in the plane ``z``."""

    width: float
    height: float
    z: float = 0.0
    center_x: float = 0.0
    center_y: float = 0.0

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise ValueError("region dimensions must be non-negative")

    @property
    def area(self) -> float:
        return self.width * self.height

    @classmethod
    def square_for_count(cls, n_traps: int, density: float, z: float = 0.0, center=(0.0, 0.0)):
        """Square window whose area holds ``n_traps`` at the given areal density."""
        if not density > 0:
            raise ValueError("density must be positive in fixed-count mode")
        side = float(np.sqrt(n_traps / density))
        return cls(side, side, z, float(center[0]), float(center[1]))

    def to_dict(self):
        return {"width": self.width, "height": self.height, "z": self.z,
                "center_x": self.center_x, "center_y": self.center_y}


@dataclass(frozen=True, eq=False)
class TrapEnsemble:
    positions: np.ndarray
    rates: np.ndarray
    region: TrapRegion | None = None
    density: float | None = None
    seed: int | None = None

    def __post_init__(self):
        pos = _frozen(np.reshape(self.positions, (-1, 3)))
        rates = _frozen(np.broadcast_to(np.asarray(self.rates, dtype=float), (pos.shape[0],)))
        if np.any(rates <= 0):
            raise ValueError("trap switching rates must be positive")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rates", rates)

    def __len__(self):
        return self.positions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TrapEnsemble):
            return NotImplemented
        return np.array_equal(self.positions, other.positions) and np.array_equal(self.rates, other.rates)

    __hash__ = None

    def subset(self, index) -> "TrapEnsemble":
        return replace(self, positions=self.positions[index], rates=self.rates[index])


def sample_traps(region: TrapRegion, density: float, rate: float, seed, *, count: int | None = None,
                 avoid=None, min_standoff: float = 1e-9) -> TrapEnsemble:
    """Uniform i.i.d. trap positions over ``region``.

    ``count`` pins the number of traps; otherwise it is ``round(density * area)``.
    Positions closer than ``min_standoff`` to any point in ``avoid`` (e.g. the
    dots) are redrawn.
    """
    if not density >= 0:
        raise ValueError("density must be non-negative")
    if not rate > 0:
        raise ValueError("rate must be positive")
    if count is None:
        if region.area == 0 and density > 0:
            raise ValueError("region has zero area but density is positive")
        count = int(round(density * region.area))
    elif count < 0:
        raise ValueError("count must be non-negative")
    elif count > 0 and region.area == 0:
        raise ValueError("region has zero area")

    rng = np.random.default_rng(seed)
    avoid = None if avoid is None else np.reshape(np.asarray(avoid, dtype=float), (-1, 3))
    pos = np.empty((count, 3))
    pos[:, 2] = region.z
    todo = np.arange(count)
    for _ in range(1000):
        if todo.size == 0:
            break
        pos[todo, 0] = region.center_x + (rng.random(todo.size) - 0.5) * region.width
        pos[todo, 1] = region.center_y + (rng.random(todo.size) - 0.5) * region.height
        if avoid is None or min_standoff <= 0:
            todo = todo[:0]
            break
        d = np.linalg.norm(pos[todo, None, :] - avoid[None, :, :], axis=-1)
        todo = todo[np.any(d < min_standoff, axis=1)]
    else:
        raise RuntimeError("could not place traps outside the standoff radius")
    return TrapEnsemble(pos, np.full(count, float(rate)), region, float(density), seed)


def fixed_count_ensemble(n_traps: int, density: float, rate: float, seed, *, z: float = 0.0,
                         avoid=None, min_standoff: float = 1e-9) -> TrapEnsemble:
    """``n_traps`` traps in a square window centred over the origin sized for ``density``."""
    region = TrapRegion.square_for_count(n_traps, density, z=z)
    return sample_traps(region, density, rate, seed, count=n_traps, avoid=avoid, min_standoff=min_standoff)
