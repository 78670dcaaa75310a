"""Seeded samplers: Gaussian matrices, Haar frames via the polar factor,
row-truncation projections, and the rejection sampler for the Gaussian
law conditioned on the approximation space.

Determinism contract: the sample index space is split into fixed-size
chunks of 1024; chunk c draws from a counter-based generator seeded by
(seed, spawn_key=(c,)).  The stream therefore never depends on how many
workers consume the chunks, and sample i is bit-identical across runs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import special
from .algebra import FMatrix, field_dim
from .decomp import polar_q_batched
from .errors import DomainError, InfeasibleError, ShapeMismatchError

log = logging.getLogger(__name__)

CHUNK = 1024


@dataclass(frozen=True)
class SamplerConfig:
    field: str
    N: int
    n: int
    scaled: bool = True
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        field_dim(self.field)
        if not 1 <= self.n <= self.N:
            raise ShapeMismatchError("need 1 <= n <= N")
        if self.count < 1:
            raise DomainError("count must be >= 1")

    @property
    def radius(self):
        """Column radius sqrt(N^F - 1) of the scaled frame manifold."""
        return float(np.sqrt(self.N * field_dim(self.field) - 1.0))


def chunk_generator(seed, chunk_index, attempt=0):
    key = (chunk_index,) if attempt == 0 else (chunk_index, attempt)
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def _uniforms(gen, shape):
    """Uniforms in the open interval (0, 1) with 53-bit resolution."""
    return (gen.integers(0, 1 << 53, size=shape) + 0.5) * (2.0**-53)


def _normals(gen, shape):
    return special.norm_quantile(_uniforms(gen, shape))


def gaussian_chunk(cfg, chunk_index, attempt=0):
    """One full chunk of standard Gaussian component arrays."""
    gen = chunk_generator(cfg.seed, chunk_index, attempt)
    d = field_dim(cfg.field)
    z = _normals(gen, (CHUNK, cfg.N, cfg.n, d))
    comps = np.zeros((CHUNK, cfg.N, cfg.n, 4))
    comps[..., :d] = z
    return comps


def iter_gaussian_chunks(cfg):
    """Yield (start_index, comps) covering exactly cfg.count samples."""
    start = 0
    chunk_index = 0
    while start < cfg.count:
        comps = gaussian_chunk(cfg, chunk_index)
        take = min(CHUNK, cfg.count - start)
        yield start, comps[:take]
        start += take
        chunk_index += 1


def gaussian_comps(cfg):
    """All requested Gaussian samples as one (count, N, n, 4) array."""
    return np.concatenate([c for _, c in iter_gaussian_chunks(cfg)], axis=0)


def sample_gaussian(cfg):
    return [FMatrix(cfg.field, c) for c in gaussian_comps(cfg)]


def haar_chunk(cfg, chunk_index):
    """One chunk of (scaled) Haar frames, via the polar factor.

    The Gaussian law is invariant under left unitaries and the polar
    frame is equivariant, so the frame law inherits left invariance and
    is the Haar measure.  Rank-deficient draws (probability zero up to
    floating point) are resampled from a derived stream and logged.
    """
    comps = gaussian_chunk(cfg, chunk_index)
    q, lam_min = polar_q_batched(comps, cfg.field)
    bad = lam_min < 1e-8
    attempt = 1
    while np.any(bad):
        log.warning(
            "resampling %d rank-deficient draws in chunk %d",
            int(bad.sum()),
            chunk_index,
        )
        fresh = gaussian_chunk(cfg, chunk_index, attempt=attempt)
        qf, lf = polar_q_batched(fresh, cfg.field)
        q[bad] = qf[bad]
        lam_min[bad] = lf[bad]
        bad = lam_min < 1e-8
        attempt += 1
    if cfg.scaled:
        q = q * cfg.radius
    return q


def haar_comps(cfg):
    out = []
    start = 0
    chunk_index = 0
    while start < cfg.count:
        q = haar_chunk(cfg, chunk_index)
        take = min(CHUNK, cfg.count - start)
        out.append(q[:take])
        start += take
        chunk_index += 1
    return np.concatenate(out, axis=0)


def sample_haar_stiefel(cfg):
    return [FMatrix(cfg.field, c) for c in haar_comps(cfg)]


def project_pi(Z, l):
    """Keep the first l rows; 1-Lipschitz and Gaussian-measure preserving."""
    if isinstance(Z, FMatrix):
        if not 1 <= l <= Z.N:
            raise DomainError("row count %d outside [1, %d]" % (l, Z.N))
        return FMatrix(Z.field, Z.comps[:l])
    Z = np.asarray(Z)
    if not 1 <= l <= Z.shape[-3]:
        raise DomainError("row count out of range")
    return Z[..., :l, :, :]


@dataclass(frozen=True)
class RestrictedSample:
    comps: np.ndarray
    acceptance_rate: float
    proposed: int


def sample_restricted_gaussian(cfg, eps, theta_val=None, floor=1e-3, min_proposals=4096):
    """Gaussian law conditioned on the (eps, theta)-approximation space.

    Straight rejection sampling; the acceptance rate doubles as the
    Monte Carlo estimate of the space's Gaussian mass.  Aborts when the
    running rate drops below `floor` after `min_proposals` proposals.
    """
    from . import bounds, concentration

    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if theta_val is None:
        theta_val = bounds.theta(eps)
    if not 0.0 < theta_val < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    taken = []
    got = 0
    proposed = 0
    accepted = 0
    chunk_index = 0
    while got < cfg.count:
        comps = gaussian_chunk(cfg, chunk_index)
        mask = concentration.membership_mask(comps, cfg.field, eps, theta_val)
        proposed += CHUNK
        accepted += int(mask.sum())
        good = comps[mask]
        if good.shape[0]:
            taken.append(good[: cfg.count - got])
            got += taken[-1].shape[0]
        if proposed >= min_proposals and accepted / proposed < floor:
            raise InfeasibleError(
                "acceptance rate %.2e below floor %.2e after %d proposals; "
                "a larger eps schedule is needed" % (accepted / proposed, floor, proposed)
            )
        chunk_index += 1
    return RestrictedSample(
        comps=np.concatenate(taken, axis=0),
        acceptance_rate=accepted / proposed,
        proposed=proposed,
    )


def write_samples_csv(path, cfg, comps):
    """Dump samples: idx, field, N, n, comp_0 ... comp_{4Nn-1}.

    Component k belongs to entry (k // 4 // n, k // 4 % n), scalar slot
    k % 4; slots beyond the field dimension are left empty.  A JSON
    sidecar records the config.
    """
    from .csvio import write_csv, write_json

    d = field_dim(cfg.field)
    width = 4 * cfg.N * cfg.n
    header = ["idx", "field", "N", "n"] + ["comp_%d" % k for k in range(width)]

    def rows():
        for i, sample in enumerate(comps):
            flat = sample.reshape(-1)
            vals = [
                "" if (k % 4) >= d else "%.17g" % flat[k] for k in range(width)
            ]
            yield [i, cfg.field, cfg.N, cfg.n] + vals

    digest = write_csv(path, header, rows())
    write_json(
        str(path) + ".json",
        {
            "field": cfg.field,
            "N": cfg.N,
            "n": cfg.n,
            "scaled": cfg.scaled,
            "seed": cfg.seed,
            "count": cfg.count,
            "csv_sha256": digest,
        },
    )
    return digest


def with_count(cfg, count):
    return replace(cfg, count=count)
