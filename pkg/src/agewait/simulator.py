"""Sample-path simulation of the age process.

A path is a sequence of stages: transmission time Y_i, wait Z_i = z(Y_i)
chosen causally, and the stage penalty accrued while the age grows from
Y_i to Y_i + Z_i + Y_{i+1}.  The empirical average penalty is the ratio
of accumulated penalty to accumulated stage time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .penalty import PenaltyFunction
from .policies import Policy
from .ttime import TransmissionModel


@dataclass(frozen=True)
class SamplePath:
    """Realized stages plus the derived timing quantities.

    ys holds n+1 transmission times; stages i = 0..n-1 pair ys[i] with
    zs[i] and the penalty qs[i].  delivery_times[i] is the i-th delivery
    instant (the first delivery anchors the clock at 0) and
    submission_times[i] is when update i+1 entered the channel.
    """

    ys: np.ndarray
    zs: np.ndarray
    qs: np.ndarray
    pf: PenaltyFunction

    @property
    def n_stages(self) -> int:
        return len(self.zs)

    @property
    def delivery_times(self) -> np.ndarray:
        # D_0 = 0, D_{i+1} = D_i + Z_i + Y_{i+1}
        return np.concatenate(([0.0], np.cumsum(self.zs + self.ys[1:])))

    @property
    def submission_times(self) -> np.ndarray:
        return self.delivery_times[:-1] + self.zs

    @property
    def total_penalty(self) -> float:
        return float(math.fsum(self.qs))

    @property
    def total_time(self) -> float:
        return float(math.fsum(self.ys[:-1] + self.zs))

    @property
    def ratio(self) -> float:
        return self.total_penalty / self.total_time

    def write_csv(self, path) -> None:
        d = self.delivery_times
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "Y", "Z", "Q", "D"])
            for i in range(self.n_stages):
                w.writerow([i, repr(float(self.ys[i])), repr(float(self.zs[i])),
                            repr(float(self.qs[i])), repr(float(d[i]))])


@dataclass(frozen=True)
class SimEstimate:
    mean_ratio: float
    stderr: float
    replications: int
    n_stages: int
    empirical_frequency: float
    ratios: tuple[float, ...]


def simulate(policy: Policy, model: TransmissionModel, pf: PenaltyFunction,
             n_stages: int, seed: int) -> SamplePath:
    """Run one seeded sample path of n_stages stages."""
    if n_stages < 1:
        raise DomainError("n_stages must be positive")
    ys = model.sample_path(n_stages + 1, seed)
    zs = np.atleast_1d(np.asarray(policy.z(ys[:-1]), dtype=float))
    if zs.shape != ys[:-1].shape:
        zs = np.full(n_stages, float(zs))
    qs = np.asarray(pf.stage_penalty(ys[:-1], zs, ys[1:]), dtype=float)
    return SamplePath(ys=ys, zs=zs, qs=qs, pf=pf)


def estimate(policy: Policy, model: TransmissionModel, pf: PenaltyFunction,
             n_stages: int, replications: int, seed: int) -> SimEstimate:
    """Average the per-path penalty ratio over independent replications.

    Each replication gets its own RNG stream spawned from the base seed,
    so results are reproducible and order-independent.
    """
    if replications < 2:
        raise DomainError("need at least two replications for a stderr")
    children = np.random.SeedSequence(seed).spawn(replications)
    ratios = []
    freqs = []
    for child in children:
        rep_seed = int(child.generate_state(1, dtype=np.uint64)[0])
        path = simulate(policy, model, pf, n_stages, rep_seed)
        ratios.append(path.ratio)
        freqs.append(path.n_stages / path.total_time)
    arr = np.asarray(ratios)
    stderr = float(arr.std(ddof=1) / math.sqrt(replications))
    return SimEstimate(mean_ratio=float(arr.mean()), stderr=stderr,
                       replications=replications, n_stages=n_stages,
                       empirical_frequency=float(np.mean(freqs)),
                       ratios=tuple(ratios))


def age_trajectory(path: SamplePath, time_step: float) -> list[tuple[float, float, float]]:
    """Sample the sawtooth age curve, including both sides of every jump.

    Returns (t, age, g(age)) triples.  Between deliveries the age grows
    linearly from the last transmission time; at each delivery it drops
    to the new transmission time.
    """
    if time_step <= 0:
        raise DomainError("time_step must be positive")
    if path.n_stages == 0:
        raise DomainError("empty path")
    d = path.delivery_times
    pf = path.pf
    points: list[tuple[float, float, float]] = []

    def emit(t: float, age: float) -> None:
        points.append((t, age, pf(age)))

    emit(0.0, float(path.ys[0]))
    for i in range(path.n_stages):
        t0, t1 = d[i], d[i + 1]
        base = float(path.ys[i])
        k0 = math.floor(t0 / time_step) + 1
        for k in range(k0, math.ceil(t1 / time_step)):
            t = k * time_step
            if t0 < t < t1:
                emit(t, base + (t - t0))
        emit(float(t1), base + float(t1 - t0))     # just before the drop
        emit(float(t1), float(path.ys[i + 1]))     # just after the drop
    return points


def trajectory_penalty_integral(path: SamplePath) -> float:
    """Quadrature of g(age(t)) over the whole path, as a consistency check.

    Integrates each linear-growth segment independently of the closed-form
    stage penalties.
    """
    d = path.delivery_times
    pf = path.pf
    total = 0.0
    for i in range(path.n_stages):
        length = float(d[i + 1] - d[i])
        if length == 0.0:
            continue
        base = float(path.ys[i])
        pts = None
        if pf.kind == "stairstep" and pf.alpha > 0:
            lo_m = math.ceil(pf.alpha * base)
            hi_m = math.floor(pf.alpha * (base + length))
            pts = [m / pf.alpha - base for m in range(lo_m, hi_m + 1)
                   if 0.0 < m / pf.alpha - base < length] or None
        elif pf.kind == "custom":
            pts = [x - base for x, _ in pf.table
                   if 0.0 < x - base < length] or None
        val, _ = quad(lambda u: pf(base + u), 0.0, length,
                      points=pts, epsabs=1e-10, limit=500)
        total += val
    return total


def write_trajectory_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "delta", "g_delta"])
        for t, delta, g in points:
            w.writerow([repr(float(t)), repr(float(delta)), repr(float(g))])
