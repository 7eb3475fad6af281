"""Monte-Carlo drops: scenario generation, per-scheme precoding, outputs.

Every drop draws from its own seeded streams, so a drop's users, channels
and estimation noise do not depend on how many threads run or in which
order drops finish.  All schemes of a drop see the same channels.
"""

import csv
import functools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .array import Location, ScatterRegion, generate_channel
from .codebook import (
    build_dft_codebook,
    build_polar_codebook_ula,
    build_spherical_codebook,
    build_uniform_codebook,
)
from .metrics import spectrum_efficiency
from .numerics import seeded_stream
from .precoding import (
    analog_from_codebook,
    beam_sweep_assign,
    design_digital,
    effective_channel,
    fully_digital_zf,
    infinite_codebook_analog,
)

__all__ = [
    "OUT_DIR_ENV",
    "DropError",
    "Scenario",
    "ExperimentResult",
    "generate_scenario",
    "scheme_codebook",
    "run_drop",
    "run_experiment",
    "write_result",
    "default_out_dir",
]

OUT_DIR_ENV = "LDMA_OUT_DIR"

# Stream ids under (seed, drop, ...)
_USERS, _CHANNEL, _CSI = 0, 1, 2


class DropError(RuntimeError):
    """A numerical failure inside one drop, tagged with its coordinates."""

    def __init__(self, drop, snr_db, scheme, cause):
        self.drop, self.snr_db, self.scheme, self.cause = drop, snr_db, scheme, cause
        super().__init__(
            f"drop {drop}, SNR {snr_db} dB, scheme {scheme}: {type(cause).__name__}: {cause}"
        )


@dataclass
class Scenario:
    locations: list
    channels: list

    @property
    def matrix(self):
        """Channel rows ``(K, N)``."""
        return np.stack([c.vector for c in self.channels])


def _user_locations(config, rng):
    k = config.users
    r = rng.uniform(config.r_min, config.r_max, size=k)
    if config.distribution == "linear":
        return [Location(float(x), config.theta, config.phi) for x in r]
    theta = rng.uniform(*config.theta_range, size=k)
    phi = rng.uniform(*config.phi_range, size=k)
    return [Location(float(a), float(b), float(c)) for a, b, c in zip(r, theta, phi)]


def generate_scenario(config, drop_index):
    """Users and channels of one drop, fully determined by ``(seed, drop)``."""
    locs = _user_locations(config, seeded_stream(config.seed, drop_index, _USERS))
    region = ScatterRegion((config.r_min, config.r_max), config.theta_range, config.phi_range)
    geom = config.geometry
    channels = [
        generate_channel(
            geom, loc, config.num_nlos, config.kappa,
            seeded_stream(config.seed, drop_index, _CHANNEL, k), region, config.model,
        )
        for k, loc in enumerate(locs)
    ]
    return Scenario(locs, channels)


@functools.lru_cache(maxsize=16)
def _cached_codebook(kind, geom, delta, rho_min, extra):
    if kind == "sdma":
        return build_dft_codebook(geom)
    if kind == "ldma":
        if geom.layout == "ULA":
            return build_polar_codebook_ula(geom, delta, rho_min)
        return build_spherical_codebook(geom, delta, rho_min)
    if kind == "uniform":
        n_rings, r_min, r_max = extra
        return build_uniform_codebook(geom, n_rings, r_min, r_max)
    raise ValueError(f"no codebook for access mode {kind!r}")


def scheme_codebook(config, access):
    """Codebook used by an access mode; the near-field one is built once and shared.

    The uniform-radius baseline takes as many rings as the near-field
    codebook, so both have the same size.
    """
    geom = config.geometry
    rho = config.codebook_rho_min
    if access == "uniform":
        rings = _cached_codebook("ldma", geom, config.delta, rho, None).n_rings
        return _cached_codebook(
            "uniform", geom, config.delta, rho, (max(rings, 1), config.r_min, config.r_max)
        )
    return _cached_codebook(access, geom, config.delta, rho, None)


def run_drop(config, drop_index):
    """Evaluate every scheme at every SNR on one drop.

    Returns
    -------
    list of dict
        One row per (SNR, scheme) with ``sum_rate`` and ``user_rates``.
    """
    scen = generate_scenario(config, drop_index)
    x = scen.matrix
    schemes = config.scheme_specs
    analog = {}
    for scheme in schemes:
        if scheme.access in analog or scheme.access == "fd":
            continue
        if scheme.access == "infinite":
            analog[scheme.access] = infinite_codebook_analog(config.geometry, scen.locations, config.model)
        else:
            cb = scheme_codebook(config, scheme.access)
            analog[scheme.access] = analog_from_codebook(cb, beam_sweep_assign(cb.gains(x)))
    rows = []
    for si, snr in enumerate(config.snr_db):
        power = 10.0 ** (snr / 10.0)
        for ci, scheme in enumerate(schemes):
            try:
                if scheme.access == "fd":
                    sol = fully_digital_zf(x, power)
                else:
                    f_a = analog[scheme.access]
                    rng = None
                    if config.csi_noise_variance > 0:
                        rng = seeded_stream(config.seed, drop_index, _CSI, si, ci)
                    h_est = effective_channel(x, f_a, config.csi_noise_variance, rng)
                    sol = design_digital(
                        h_est, f_a, scheme.digital, power, 1.0,
                        config.wmmse_max_iter, config.wmmse_tol, config.ill_conditioned,
                    )
                total, per_user = spectrum_efficiency(x, sol)
            except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
                raise DropError(drop_index, snr, scheme.name, exc) from exc
            rows.append(
                {"drop": drop_index, "snr_db": snr, "scheme": scheme.name,
                 "sum_rate": total, "user_rates": per_user}
            )
    return rows


@dataclass
class ExperimentResult:
    """Per-drop rows, their aggregates and the resolved configuration."""

    config: object
    rows: list
    summary: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def mean(self, scheme, snr_db=None):
        snr = self.config.snr_db[0] if snr_db is None else snr_db
        for s in self.summary:
            if s["scheme"] == scheme and s["snr_db"] == snr:
                return s["mean"]
        raise KeyError((scheme, snr))

    def per_drop(self, scheme, snr_db=None):
        snr = self.config.snr_db[0] if snr_db is None else snr_db
        return np.array([r["sum_rate"] for r in self.rows if r["scheme"] == scheme and r["snr_db"] == snr])


def _summarize(config, rows):
    out = []
    for snr in config.snr_db:
        for name in config.schemes:
            vals = np.array([r["sum_rate"] for r in rows if r["snr_db"] == snr and r["scheme"] == name])
            out.append({
                "snr_db": snr, "scheme": name, "mean": float(vals.mean()),
                "std": float(vals.std(ddof=1)) if vals.size > 1 else 0.0, "drops": int(vals.size),
            })
    return out


def run_experiment(config, threads=1):
    """Run all drops (optionally on a thread pool) and merge them in drop order."""
    config.validate()
    config.check_near_field_validity()
    schemes = config.scheme_specs
    sizes = {}
    for scheme in schemes:
        if scheme.access in ("ldma", "sdma", "uniform") and scheme.access not in sizes:
            cb = scheme_codebook(config, scheme.access)
            cb.vectors(np.arange(min(1, len(cb))))  # fill the beam cache before threading
            sizes[scheme.access] = {"codewords": len(cb), "rings": cb.n_rings, "kind": cb.kind}
    run = functools.partial(run_drop, config)
    if threads <= 1:
        per_drop = [run(d) for d in range(config.drops)]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            per_drop = list(pool.map(run, range(config.drops)))
    rows = [r for drop_rows in per_drop for r in drop_rows]
    meta = {
        "config": config.to_dict(),
        "seed": config.seed,
        "codebooks": sizes,
        "rate_units": "bit/s/Hz",
    }
    return ExperimentResult(config, rows, _summarize(config, rows), meta)


def default_out_dir():
    return os.environ.get(OUT_DIR_ENV, "results")


def _fmt(x):
    return repr(float(x))


def write_result(result, out_dir, stem="simulate"):
    """Write ``<stem>.csv`` (summary), ``<stem>_drops.csv`` and ``<stem>.json``.

    Numbers are written with ``repr`` so identical runs give identical bytes.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    p = os.path.join(out_dir, f"{stem}.csv")
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["snr_db", "scheme", "mean_sum_rate", "std_sum_rate", "drops"])
        for s in result.summary:
            w.writerow([_fmt(s["snr_db"]), s["scheme"], _fmt(s["mean"]), _fmt(s["std"]), s["drops"]])
    paths["summary"] = p
    k = result.config.users
    p = os.path.join(out_dir, f"{stem}_drops.csv")
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["drop", "snr_db", "scheme", "sum_rate"] + [f"rate_{i + 1}" for i in range(k)])
        for r in result.rows:
            w.writerow([r["drop"], _fmt(r["snr_db"]), r["scheme"], _fmt(r["sum_rate"])]
                       + [_fmt(v) for v in r["user_rates"]])
    paths["drops"] = p
    p = os.path.join(out_dir, f"{stem}.json")
    with open(p, "w") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["metadata"] = p
    return paths
