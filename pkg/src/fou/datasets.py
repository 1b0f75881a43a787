"""Bundled benchmark series and the synthetic stand-in generator.

lake_huron and series_a load the vendored public benchmark data (see
data/README.md for provenance and validation anchors). synthetic_oxygen
generates a stand-in for a dissolved-oxygen-style series that is not
publicly available: a two-rate process plus measurement noise, 304 points,
clearly flagged as synthetic in its metadata.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

__all__ = ["load_lake_huron", "load_series_a", "synthetic_oxygen"]


def _load_column(name: str) -> np.ndarray:
    path = resources.files("fou").joinpath("data", name)
    lines = path.read_text(encoding="utf-8").splitlines()
    vals = []
    for ln in lines:
        ln = ln.strip()
        if not ln:
            continue
        try:
            vals.append(float(ln))
        except ValueError:
            continue  # header
    return np.asarray(vals, dtype=float)


def load_lake_huron() -> np.ndarray:
    """Annual Lake Huron levels 1875-1972 (feet), 98 values."""
    out = _load_column("lake_huron.csv")
    if out.size != 98:
        raise RuntimeError(f"lake_huron.csv corrupted: {out.size} rows")
    return out


def load_series_a() -> np.ndarray:
    """Chemical process concentration readings (Series A), 197 values."""
    out = _load_column("series_a.csv")
    if out.size != 197:
        raise RuntimeError(f"series_a.csv corrupted: {out.size} rows")
    return out


def synthetic_oxygen(seed: int = 0) -> tuple[np.ndarray, dict]:
    """Synthetic saturation-like series, 304 points, plus metadata.

    Shaped to exercise the full evaluation protocol (slow drift + fast
    wiggle + measurement noise around ~93 percent saturation). The metadata
    says loudly that this is generated data: the original series it stands
    in for is not redistributable.
    """
    from .foucore import FouModel
    from .sampler import exact_paths, rng_for_seed

    n = 304
    model = FouModel.from_rates([1.0, 0.2], sigma=1.0, hurst=0.8)
    path = exact_paths(model, n, 20.0 / n, seed=seed, npaths=1)[0]
    noise = 0.15 * rng_for_seed(seed + 0x5EED).standard_normal(n)
    values = 93.0 + 2.5 * path / np.sqrt(path.var() + 1e-12) + noise
    meta = {
        "synthetic": True,
        "n": n,
        "nominal_spacing_seconds": 200,
        "seed": int(seed),
        "note": ("generated stand-in; the dissolved-oxygen series used in "
                 "the original study is not publicly available, so only "
                 "protocol behavior (not values) is comparable"),
    }
    return values, meta
