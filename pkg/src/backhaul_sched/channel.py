"""Directional antenna gains, received/interference power and Shannon link rates.

Powers are linear milliwatts throughout; dB appears only in parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    tx_power_mw: float = 1000.0
    path_loss_exp: float = 2.0
    mui_factor: float = 1.0
    efficiency: float = 0.5
    bandwidth_hz: float = 1200e6
    noise_dbm_per_mhz: float | None = -134.0  # None: noiseless
    wavelength_m: float = 0.005  # 60 GHz
    beamwidth_deg: float = 30.0
    k_factor: float | None = None  # defaults to (wavelength / 4 pi)^2

    def __post_init__(self):
        if min(self.tx_power_mw, self.path_loss_exp, self.bandwidth_hz,
               self.wavelength_m, self.beamwidth_deg) <= 0:
            raise ValueError("channel parameters must be positive")
        if not 0 <= self.mui_factor <= 1:
            raise ValueError("mui_factor must lie in [0, 1]")
        if not 0 < self.efficiency < 1:
            raise ValueError("efficiency must lie in (0, 1)")

    @property
    def k(self) -> float:
        if self.k_factor is not None:
            return self.k_factor
        return (self.wavelength_m / (4 * math.pi)) ** 2

    @property
    def noise_density_mw_per_hz(self) -> float:
        if self.noise_dbm_per_mhz is None:
            return 0.0
        return 10 ** (self.noise_dbm_per_mhz / 10) / 1e6

    @property
    def pattern(self) -> AntennaPattern:
        return AntennaPattern.from_beamwidth(self.beamwidth_deg)


@dataclass(frozen=True)
class AntennaPattern:
    beamwidth_deg: float
    g0_db: float
    main_lobe_deg: float
    sidelobe_db: float

    @classmethod
    def from_beamwidth(cls, theta: float) -> AntennaPattern:
        g0 = 10 * math.log10((1.6162 / math.sin(math.radians(theta / 2))) ** 2)
        return cls(theta, g0, 2.6 * theta, -0.4111 * math.log(theta) - 10.579)


def antenna_gain_db(pattern: AntennaPattern, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0) | (theta > 180)):
        raise ValueError("offset angle must lie in [0, 180] degrees")
    main = pattern.g0_db - 3.01 * (2 * theta / pattern.beamwidth_deg) ** 2
    return np.where(theta <= pattern.main_lobe_deg / 2, main, pattern.sidelobe_db)


def antenna_gain(pattern: AntennaPattern, theta: float) -> float:
    """Linear gain at ``theta`` degrees off boresight."""
    return float(10 ** (antenna_gain_db(pattern, theta) / 10))


def _offset_deg(origin, aim, toward) -> np.ndarray:
    u = aim - origin
    v = toward - origin
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = (u * v).sum(axis=-1)
    return np.degrees(np.arctan2(np.abs(cross), dot))


def _path_power(params: ChannelParams, tx, tx_aim, rx, rx_aim) -> np.ndarray:
    """k P_t G_t G_r d^-n for arrays of (..., 2) coordinates; inf where d = 0."""
    pattern = params.pattern
    delta = rx - tx
    d = np.hypot(delta[..., 0], delta[..., 1])
    gt = 10 ** (antenna_gain_db(pattern, _offset_deg(tx, tx_aim, rx)) / 10)
    gr = 10 ** (antenna_gain_db(pattern, _offset_deg(rx, rx_aim, tx)) / 10)
    with np.errstate(divide="ignore"):
        return np.where(d > 0, params.k * params.tx_power_mw * gt * gr * d ** -params.path_loss_exp,
                        np.inf)


def received_power(params: ChannelParams, topology, tx: int, tx_target: int, rx: int,
                   rx_target: int, blocked_pairs=frozenset()) -> float:
    """Power at ``rx`` from ``tx`` with both beams steered at their targets.

    Intended signal when the two nodes aim at each other, otherwise an
    interference power scaled by the MUI factor.
    """
    if tx == rx:
        raise ValueError("tx and rx must differ")
    pos = topology.positions
    if not np.any(pos[tx] != pos[rx]):
        raise ValueError(f"nodes {tx} and {rx} coincide")
    if frozenset((tx, rx)) in blocked_pairs:
        return 0.0
    p = float(_path_power(params, pos[tx], pos[tx_target], pos[rx], pos[rx_target]))
    if tx_target == rx and rx_target == tx:
        return p
    return params.mui_factor * p


def noise_power(params: ChannelParams) -> float:
    return params.noise_density_mw_per_hz * params.bandwidth_hz


def shannon_rate(params: ChannelParams, signal, interference=0.0):
    sinr = np.asarray(signal) / (noise_power(params) + np.asarray(interference))
    return params.efficiency * params.bandwidth_hz * np.log2(1 + sinr)


def aligned_rate(params: ChannelParams, dist):
    """Interference-free rate of a beam-aligned link of length ``dist``."""
    dist = np.asarray(dist, dtype=float)
    g0 = 10 ** (params.pattern.g0_db / 10)
    with np.errstate(divide="ignore"):
        sig = params.k * params.tx_power_mw * g0 * g0 * dist ** -params.path_loss_exp
    return shannon_rate(params, sig)


class Link(NamedTuple):
    tx: int
    rx: int

    def shares_node(self, other: Link) -> bool:
        return bool({self.tx, self.rx} & {other.tx, other.rx})


def slot_rate(params: ChannelParams, topology, link: Link, concurrent: Iterable[Link] = (),
              blocked_pairs=frozenset()) -> float:
    sig = received_power(params, topology, link.tx, link.rx, link.rx, link.tx, blocked_pairs)
    interference = sum(received_power(params, topology, l.tx, l.rx, link.rx, link.tx, blocked_pairs)
                       for l in concurrent)
    return float(shannon_rate(params, sig, interference))


class LinkBudget:
    """Signal and pairwise interference powers for a fixed set of directed links.

    ``cross[a, b]`` is the power that link ``a``'s transmitter puts into link
    ``b``'s receiver, both beams steered at their own peers. Pairs whose
    transmitter is the other's receiver hold ``inf``.
    """

    def __init__(self, params: ChannelParams, topology, links: Iterable[Link],
                 blocked_pairs=frozenset()):
        self.params = params
        self.links = list(dict.fromkeys(Link(*l) for l in links))
        self.index = {l: i for i, l in enumerate(self.links)}
        self.noise = noise_power(params)
        n = len(self.links)
        pos = topology.positions
        tx = np.array([l.tx for l in self.links], dtype=int)
        rx = np.array([l.rx for l in self.links], dtype=int)
        blocked = np.array([[frozenset((int(a), int(b))) in blocked_pairs for b in rx] for a in tx],
                           dtype=bool).reshape(n, n)
        if n:
            TX, RX = pos[tx][:, None, :], pos[rx][None, :, :]
            aim_tx, aim_rx = pos[rx][:, None, :], pos[tx][None, :, :]
            p = _path_power(params, np.broadcast_to(TX, (n, n, 2)), np.broadcast_to(aim_tx, (n, n, 2)),
                            np.broadcast_to(RX, (n, n, 2)), np.broadcast_to(aim_rx, (n, n, 2)))
        else:
            p = np.zeros((0, 0))
        self.signal = np.where(np.diag(blocked), 0.0, np.diag(p)).copy() if n else np.zeros(0)
        cross = np.where(blocked, 0.0, params.mui_factor * p)
        cross[tx[:, None] == rx[None, :]] = np.inf
        np.fill_diagonal(cross, 0.0)
        self.cross = cross
        self._rate_cache: dict[tuple[int, ...], np.ndarray] = {}

    def __len__(self):
        return len(self.links)

    @cached_property
    def free_rates(self) -> np.ndarray:
        return shannon_rate(self.params, self.signal)

    def free_rate(self, link: Link) -> float:
        return float(self.free_rates[self.index[link]])

    def interference(self, src: Link, dst: Link) -> float:
        return float(self.cross[self.index[src], self.index[dst]])

    def rates(self, active: Iterable[Link]) -> np.ndarray:
        """Per-link rates when exactly ``active`` transmit together."""
        key = tuple(self.index[l] for l in active)
        hit = self._rate_cache.get(key)
        if hit is None:
            idx = np.array(key, dtype=int)
            interference = self.cross[np.ix_(idx, idx)].sum(axis=0)
            hit = shannon_rate(self.params, self.signal[idx], interference)
            self._rate_cache[key] = hit
        return hit

    def rate(self, link: Link, concurrent: Iterable[Link] = ()) -> float:
        return float(self.rates([link, *concurrent])[0])


def link_budget(params: ChannelParams, topology, links: Iterable[Link],
                blocked_pairs=frozenset()) -> LinkBudget:
    return LinkBudget(params, topology, links, blocked_pairs)
