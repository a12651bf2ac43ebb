"""Resistive-array storage model for the front-end code tables.

Every stored bit is a complementary device pair: bit 1 means the BL device
is programmed low-resistive and the BLb device high-resistive, bit 0 the
opposite. Programming draws each device from a lognormal resistance
distribution; reading compares the pair through a sense amplifier whose
input-referred noise grows as the supply drops. The per-read flip
probability of a bit is

    eps = 0.5 * erfc(margin / (sqrt(2) * sigma_n(vdd)))

with margin = |log10(r_bl) - log10(r_blb)| of that pair, so weak pairs are
persistently unreliable while strong pairs only fail at low vdd.

The shipped operating-regime presets are calibration constants chosen so the
benchmark reproduces three qualitative regimes (healthy, relaxed
programming, scaled supply). They are not measurements of any device.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .bayesfront import BayesModel

WORD_BITS = 8
# Bit 0 of the device axis is the most significant bit of the word.
_BIT_WEIGHTS = 1 << np.arange(WORD_BITS - 1, -1, -1)

VDD_RANGE = (0.5, 1.4)
VDDR_RANGE = (1.0, 3.0)


@dataclass(frozen=True)
class OperatingPoint:
    """Read supply (vdd) and programming supply (vddr), both in volts."""

    vdd: float
    vddr: float
    label: str = ""

    def __post_init__(self):
        if not VDD_RANGE[0] <= self.vdd <= VDD_RANGE[1]:
            raise ValueError(f"vdd {self.vdd} outside {VDD_RANGE}")
        if not VDDR_RANGE[0] <= self.vddr <= VDDR_RANGE[1]:
            raise ValueError(f"vddr {self.vddr} outside {VDDR_RANGE}")


def _interp(table: tuple[tuple[float, float], ...], x: float) -> float:
    xs = [p[0] for p in table]
    ys = [p[1] for p in table]
    return float(np.interp(x, xs, ys))


@dataclass(frozen=True)
class DeviceDistributions:
    """Lognormal device parameters, in log10 ohms.

    The low-resistive state depends on the programming supply (a weaker set
    pulse leaves a thinner filament, i.e. higher and wider resistance);
    the high-resistive state does not.
    """

    lrs_log10_mean_table: tuple[tuple[float, float], ...]
    lrs_log10_sigma_table: tuple[tuple[float, float], ...]
    hrs_log10_mean: float
    hrs_log10_sigma: float

    def __post_init__(self):
        if self.hrs_log10_sigma < 0:
            raise ValueError("hrs sigma must be nonnegative")
        for _, s in self.lrs_log10_sigma_table:
            if s < 0:
                raise ValueError("lrs sigma must be nonnegative")
        for v, m in self.lrs_log10_mean_table:
            if m >= self.hrs_log10_mean:
                raise ValueError(f"lrs mean {m} at vddr={v} not below hrs mean {self.hrs_log10_mean}")

    def lrs_log10_mean(self, vddr: float) -> float:
        return _interp(self.lrs_log10_mean_table, vddr)

    def lrs_log10_sigma(self, vddr: float) -> float:
        return _interp(self.lrs_log10_sigma_table, vddr)


@dataclass(frozen=True)
class ReadErrorModel:
    """Sense-amplifier noise versus supply, linearly interpolated."""

    sigma_n_table: tuple[tuple[float, float], ...]

    def __post_init__(self):
        prev = None
        for v, s in self.sigma_n_table:
            if s < 0:
                raise ValueError("sigma_n must be nonnegative")
            if prev is not None and s > prev:
                raise ValueError("sigma_n must be nonincreasing in vdd")
            prev = s

    def sigma_n(self, vdd: float) -> float:
        return _interp(self.sigma_n_table, vdd)

    def flip_probability(self, margin, vdd: float) -> np.ndarray:
        """Per-bit flip probability; the sigma -> 0 limit is a step at zero margin."""
        margin = np.asarray(margin, dtype=np.float64)
        sigma = self.sigma_n(vdd)
        if sigma == 0.0:
            return np.where(margin > 0, 0.0, 0.5)
        return 0.5 * erfc(margin / (np.sqrt(2.0) * sigma))


def code_bits(codes) -> np.ndarray:
    """Expand words into bit planes, most significant bit first."""
    codes = np.asarray(codes, dtype=np.uint8)
    return ((codes[..., None] >> np.arange(WORD_BITS - 1, -1, -1)) & 1).astype(np.uint8)


def bits_code(bits) -> np.ndarray:
    """Collapse bit planes (MSB first) back into words."""
    return (np.asarray(bits, dtype=np.int64) * _BIT_WEIGHTS).sum(axis=-1)


@dataclass
class ArrayState:
    """Programmed resistances for every stored bit, plus the intended codes."""

    r_bl: np.ndarray
    r_blb: np.ndarray
    codes: np.ndarray
    vddr: float
    seed: int


def program_arrays(model: BayesModel, dists: DeviceDistributions, vddr: float,
                   seed: int) -> ArrayState:
    """Draw device resistances for every bit of the model's code table.

    Deterministic for a seed: resistances are drawn in one fixed-shape batch
    per state (low then high), then routed to BL/BLb according to the bit.
    """
    bits = code_bits(model.codes)
    rng = np.random.default_rng(seed)
    mean_l = dists.lrs_log10_mean(vddr)
    sigma_l = dists.lrs_log10_sigma(vddr)
    log_lrs = rng.normal(mean_l, sigma_l, size=bits.shape)
    log_hrs = rng.normal(dists.hrs_log10_mean, dists.hrs_log10_sigma, size=bits.shape)
    r_bl = np.power(10.0, np.where(bits == 1, log_lrs, log_hrs))
    r_blb = np.power(10.0, np.where(bits == 1, log_hrs, log_lrs))
    return ArrayState(r_bl=r_bl, r_blb=r_blb, codes=model.codes.copy(), vddr=vddr, seed=seed)


def margins(state: ArrayState) -> np.ndarray:
    """|log10 r_bl - log10 r_blb| per stored bit."""
    return np.abs(np.log10(state.r_bl) - np.log10(state.r_blb))


def read_word(state: ArrayState, address: tuple[int, int, int], op: OperatingPoint,
              error_model: ReadErrorModel, rng: np.random.Generator) -> int:
    """One noisy read of the 8-bit word at (class, feature, level)."""
    c, f, l = address
    stored = code_bits(state.codes[c, f, l])
    margin = np.abs(np.log10(state.r_bl[c, f, l]) - np.log10(state.r_blb[c, f, l]))
    eps = error_model.flip_probability(margin, op.vdd)
    flips = rng.random(WORD_BITS) < eps
    return int(bits_code(stored ^ flips))


class MemristorReader:
    """Word reader with schedule-invariant noise.

    Each read of an address gets its own counter-based stream keyed by
    (seed, address, per-address read index), so the k-th read of a word
    sees the same noise no matter how reads of different addresses are
    interleaved.
    """

    def __init__(self, state: ArrayState, op: OperatingPoint,
                 error_model: ReadErrorModel, seed: int):
        self.state = state
        self.op = op
        self.error_model = error_model
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._read_index: dict[int, int] = {}
        n_classes, n_features, n_levels = state.codes.shape
        self._strides = (n_features * n_levels, n_levels)

    def __call__(self, class_id: int, feature: int, level: int) -> int:
        addr = class_id * self._strides[0] + feature * self._strides[1] + level
        idx = self._read_index.get(addr, 0)
        self._read_index[addr] = idx + 1
        key = np.array([self.seed, addr], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key, counter=[idx, 0, 0, 0]))
        return read_word(self.state, (class_id, feature, level), self.op,
                         self.error_model, rng)


# ---------------------------------------------------------------------------
# Operating-regime presets (synthetic calibration constants, see module
# docstring). A: healthy margins, quiet sense amp. B: programming supply
# lowered to 1.5 V, which narrows the separation between the states.
# C: same device distributions as A read at vdd = 0.8 V, where the sense
# amp noise dominates.
# ---------------------------------------------------------------------------

# Calibration constants, not measured physics. The LRS window collapses onto
# the HRS band as the programming compliance drops (window 2.0 decades at
# vddr=2.4, 0.01 at 1.5), and the sense-noise scale grows steeply below
# nominal supply. Chosen so the three shipped operating points reproduce the
# intended behavior on the synthetic benchmark: A reads clean (mean per-bit
# flip probability far below 1e-6), B and C scramble the front end badly
# enough that escalation has to carry the system.
_SHARED_DISTS = DeviceDistributions(
    lrs_log10_mean_table=((1.0, 5.995), (1.5, 5.99), (2.0, 4.80), (2.4, 4.00), (3.0, 3.80)),
    lrs_log10_sigma_table=((1.0, 0.02), (1.5, 0.02), (2.0, 0.10), (2.4, 0.15), (3.0, 0.12)),
    hrs_log10_mean=6.0,
    hrs_log10_sigma=0.06,
)

_SHARED_NOISE = ReadErrorModel(
    sigma_n_table=((0.7, 5.00), (0.8, 3.80), (0.9, 1.90), (1.0, 0.90), (1.1, 0.35), (1.2, 0.08)),
)

_REGIME_POINTS = {
    "A": OperatingPoint(vdd=1.2, vddr=2.4, label="A"),
    "B": OperatingPoint(vdd=1.2, vddr=1.5, label="B"),
    "C": OperatingPoint(vdd=0.8, vddr=2.4, label="C"),
}


def regime_preset(name: str) -> tuple[OperatingPoint, DeviceDistributions, ReadErrorModel]:
    try:
        op = _REGIME_POINTS[name]
    except KeyError:
        raise ValueError(f"unknown regime preset {name!r}; expected one of {sorted(_REGIME_POINTS)}")
    return op, _SHARED_DISTS, _SHARED_NOISE


# ---------------------------------------------------------------------------
# Persistence: a programmed array plus the operating conditions needed to
# read it back, in one npz file.
# ---------------------------------------------------------------------------

def save_array_state(path: str, state: ArrayState, op: OperatingPoint,
                     error_model: ReadErrorModel) -> None:
    meta = {
        "vddr": state.vddr,
        "seed": state.seed,
        "vdd": op.vdd,
        "label": op.label,
        "sigma_n_table": [list(p) for p in error_model.sigma_n_table],
    }
    np.savez(
        path,
        r_bl=state.r_bl,
        r_blb=state.r_blb,
        codes=state.codes,
        meta=np.array(json.dumps(meta)),
    )


def load_array_state(path: str) -> tuple[ArrayState, OperatingPoint, ReadErrorModel]:
    with np.load(path, allow_pickle=False) as npz:
        meta = json.loads(str(npz["meta"]))
        state = ArrayState(
            r_bl=npz["r_bl"],
            r_blb=npz["r_blb"],
            codes=npz["codes"].astype(np.uint8),
            vddr=float(meta["vddr"]),
            seed=int(meta["seed"]),
        )
    op = OperatingPoint(vdd=float(meta["vdd"]), vddr=float(meta["vddr"]),
                        label=str(meta.get("label", "")))
    error_model = ReadErrorModel(
        sigma_n_table=tuple((float(v), float(s)) for v, s in meta["sigma_n_table"]),
    )
    return state, op, error_model
