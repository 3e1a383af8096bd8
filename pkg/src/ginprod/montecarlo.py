"""Monte Carlo sampling of products of real Ginibre matrices.

Each trial draws from its own Philox stream, keyed by the run seed with the
trial index in the counter, so a result depends only on
``(params, trials, seed)`` and not on how trials are split between workers.

Real eigenvalues are identified structurally: LAPACK's real Schur reduction
ends in 1x1 blocks (real eigenvalues, imaginary part exactly zero) and 2x2
blocks (conjugate pairs). No threshold on the imaginary part is involved.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, SolverError
from .moments import DensityCurve, EnsembleParams, Scaling

__all__ = [
    "SimulationResult",
    "trial_rng",
    "sample_product",
    "count_real_eigenvalues",
    "simulate",
    "empirical_moment",
    "empirical_density",
    "empirical_cdf_distance",
    "write_counts_csv",
    "write_samples_csv",
]

log = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1
MAX_DISCARD_FRACTION = 1e-3
DEFAULT_PAIR_TOL = 1e-10


@dataclass
class SimulationResult:
    """Per-trial real-eigenvalue counts and the pooled scaled eigenvalues.

    ``samples`` holds ``lambda * N^(-m/2)`` for every real eigenvalue, trial
    by trial in trial order; ``trial_index[i]`` is the trial that produced
    ``counts[i]``. Trials lost to solver failures are listed in
    ``discarded`` and excluded from every statistic.
    """

    params: EnsembleParams
    trials: int
    seed: int
    counts: np.ndarray
    samples: np.ndarray
    elapsed: float
    trial_index: np.ndarray = None
    discarded: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.samples = np.asarray(self.samples, dtype=float)
        if self.trial_index is None:
            self.trial_index = np.arange(self.counts.size)
        if np.any(self.counts % 2) or np.any(self.counts < 0) or np.any(self.counts > self.params.n):
            raise SolverError("real-eigenvalue counts must be even and in [0, N]")
        if self.samples.size != int(self.counts.sum()):
            raise SolverError("sample count does not match the per-trial counts")

    @property
    def kept(self):
        return int(self.counts.size)

    def owners(self):
        """Position in ``counts`` of the trial behind each sample."""
        return np.repeat(np.arange(self.kept), self.counts)

    def same_as(self, other):
        return (
            self.params == other.params
            and self.trials == other.trials
            and self.seed == other.seed
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.samples, other.samples)
            and np.array_equal(self.trial_index, other.trial_index)
            and self.discarded == other.discarded
        )


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed <= SEED_MASK:
        raise DomainError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


def trial_rng(seed, trial):
    """Generator for one trial: Philox keyed by ``seed``, counter ``(0, trial, 0, 0)``."""
    bitgen = np.random.Philox(key=_check_seed(seed), counter=[0, int(trial), 0, 0])
    return np.random.Generator(bitgen)


def sample_product(params, rng):
    """``G_1 G_2 ... G_m`` with independent standard normal entries."""
    n = params.n
    out = rng.standard_normal((n, n))
    for _ in range(params.m - 1):
        out = out @ rng.standard_normal((n, n))
    return out


def count_real_eigenvalues(matrix, pair_tol=DEFAULT_PAIR_TOL):
    """Real eigenvalues of ``matrix`` from its real Schur form.

    Parameters
    ----------
    matrix : (N, N) array_like
        Real square matrix.
    pair_tol : float
        A 2x2 block whose eigenvalue discriminant exceeds
        ``pair_tol * scale**2`` is not a genuine complex pair; the matrix is
        then re-checked with the general eigensolver.

    Returns
    -------
    count : int
    eigenvalues : ndarray
        The real eigenvalues in Schur order.

    Raises
    ------
    SolverError
        If the eigensolver fails to converge.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("count_real_eigenvalues needs a square matrix")
    try:
        t = scipy.linalg.schur(a, output="real", check_finite=True)[0]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"real Schur decomposition failed: {exc}") from exc
    n = t.shape[0]
    reals = []
    i = 0
    suspect = False
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            p, q, r, s = t[i, i], t[i, i + 1], t[i + 1, i], t[i + 1, i + 1]
            disc = 0.25 * (p - s) ** 2 + q * r
            scale = max(abs(p), abs(q), abs(r), abs(s))
            if disc >= pair_tol * scale * scale:
                suspect = True
            i += 2
        else:
            reals.append(t[i, i])
            i += 1
    if suspect:
        return _recount(a)
    ev = np.asarray(reals)
    return int(ev.size), ev


def _recount(a):
    log.warning("suspicious 2x2 Schur block; re-verifying with the general eigensolver")
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed: {exc}") from exc
    ev = ev.real[ev.imag == 0] if np.iscomplexobj(ev) else ev
    return int(ev.size), ev


def _run_chunk(params, seed, start, stop):
    n = params.n
    mats = np.empty((stop - start, n, n))
    for t in range(start, stop):
        mats[t - start] = sample_product(params, trial_rng(seed, t))
    try:
        evs = np.linalg.eigvals(mats)
        batch_ok = True
    except np.linalg.LinAlgError:
        batch_ok = False
    scale = params.scale
    records = []
    for t in range(start, stop):
        try:
            if batch_ok:
                ev = evs[t - start]
                ev = ev.real[ev.imag == 0] if np.iscomplexobj(ev) else ev
                if ev.size % 2:
                    _, ev = count_real_eigenvalues(mats[t - start])
            else:
                _, ev = count_real_eigenvalues(mats[t - start])
            if ev.size % 2:
                raise SolverError(f"odd real-eigenvalue count in trial {t}")
        except SolverError as exc:
            log.warning("trial %d discarded: %s", t, exc)
            records.append((t, None))
            continue
        records.append((t, ev / scale))
    return records


def _chunk_size(n):
    # keep one chunk's matrices around a few megabytes
    return max(1, min(4096, 400_000 // (n * n)))


def simulate(params, trials, seed, workers=1, chunk=None):
    """Run ``trials`` independent trials.

    Parameters
    ----------
    params : EnsembleParams
    trials : int
    seed : int
        64-bit run seed.
    workers : int
        Threads used to process chunks; the result does not depend on it.
    chunk : int, optional
        Trials per batched eigensolver call.

    Raises
    ------
    SolverError
        If more than 0.1% of trials had to be discarded.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    if workers < 1:
        raise DomainError("workers must be at least 1")
    seed = _check_seed(seed)
    size = chunk or _chunk_size(params.n)
    bounds = [(s, min(s + size, trials)) for s in range(0, trials, size)]
    t0 = time.perf_counter()
    if workers == 1:
        parts = [_run_chunk(params, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _run_chunk(params, seed, *ab), bounds))
    counts, samples, index, lost = [], [], [], []
    for part in parts:
        for t, ev in part:
            if ev is None:
                lost.append(t)
            else:
                index.append(t)
                counts.append(ev.size)
                samples.append(ev)
    if len(lost) > MAX_DISCARD_FRACTION * trials:
        raise SolverError(f"{len(lost)} of {trials} trials discarded (limit 0.1%)")
    return SimulationResult(
        params=params,
        trials=int(trials),
        seed=seed,
        counts=np.array(counts, dtype=np.int64),
        samples=np.concatenate(samples) if samples else np.empty(0),
        elapsed=time.perf_counter() - t0,
        trial_index=np.array(index, dtype=np.int64),
        discarded=tuple(lost),
    )


def _per_trial_sums(result, k):
    return np.bincount(result.owners(), weights=result.samples ** k, minlength=result.kept)


def empirical_moment(result, k):
    """Mean over trials of ``sum_i x_i^k``, with its standard error."""
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise DomainError("moment order must be a non-negative integer")
    if result.kept == 0:
        raise DomainError("no trials to average")
    sums = result.counts.astype(float) if k == 0 else _per_trial_sums(result, k)
    err = float(np.std(sums, ddof=1) / math.sqrt(sums.size)) if sums.size > 1 else math.inf
    return float(np.mean(sums)), err


def empirical_density(result, bins, unit_mass=False, limits=None):
    """Histogram of the scaled real eigenvalues.

    By default the histogram integrates to the mean real-eigenvalue count
    (comparable with ``density_scaled``); with ``unit_mass`` it integrates
    to one (comparable with ``density_normalized`` and the limit density).
    The grid holds bin centres.
    """
    if bins < 10:
        raise DomainError("empirical_density needs at least 10 bins")
    if result.samples.size == 0:
        raise DomainError("no real eigenvalues were sampled")
    if limits is None:
        r = float(np.max(np.abs(result.samples)))
        limits = (-r, r)
    hist, edges = np.histogram(result.samples, bins=bins, range=limits)
    width = np.diff(edges)
    if unit_mass:
        values = hist / (result.samples.size * width)
    else:
        values = hist / (result.kept * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    return DensityCurve(Scaling.NORMALIZED if unit_mass else Scaling.SCALED, centres, values)


def empirical_cdf_distance(result, cdf):
    """Kolmogorov distance between the pooled samples and ``cdf``."""
    if result.samples.size == 0:
        raise DomainError("no real eigenvalues were sampled")
    x = np.sort(result.samples)
    f = np.asarray(cdf(x), dtype=float)
    n = x.size
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(n) / n
    return float(max(hi.max(), lo.max()))


def write_counts_csv(result, path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "count"])
        for t, c in zip(result.trial_index.tolist(), result.counts.tolist()):
            w.writerow([t, c])


def write_samples_csv(result, path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "scaled_eigenvalue"])
        owners = result.trial_index[result.owners()]
        for t, x in zip(owners.tolist(), result.samples.tolist()):
            w.writerow([t, repr(x)])
