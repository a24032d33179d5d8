"""Shared desk-scale corpora, cached on disk under .cache/desk.

Fixtures sample through the pipeline cache, so the first session on a fresh
checkout pays the full eigensolve cost (tens of minutes, dominated by the
symplectic class and the spin chain) and every later session reuses the same
realizations byte for byte. Everything derives from DESK_SEED; tests that
need fresh independent draws should seed their own samplers instead.
"""

import os

import pytest

from levelstats.pipeline import (
    _load_levels,
    _unfold_all,
    cmd_sample,
    desk_preset,
)

CACHE_DIR = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), os.pardir, ".cache", "desk"
)
DESK_SEED = 1


def ensemble_config(ensemble):
    return desk_preset(ensemble=ensemble, out_dir=CACHE_DIR, seed=DESK_SEED)


def xxz_config():
    return desk_preset(mode="xxz", out_dir=CACHE_DIR, seed=DESK_SEED)


def _unfolded(ensemble):
    config = ensemble_config(ensemble)
    cmd_sample(config)  # no-op on a warm cache
    return _unfold_all(config, _load_levels(config))


@pytest.fixture(scope="session")
def desk_goe():
    return _unfolded("goe")


@pytest.fixture(scope="session")
def desk_gue():
    return _unfolded("gue")


@pytest.fixture(scope="session")
def desk_gse():
    return _unfolded("gse")


@pytest.fixture(scope="session")
def desk_poisson():
    return _unfolded("poisson")


@pytest.fixture(scope="session")
def desk_goe_raw():
    config = ensemble_config("goe")
    cmd_sample(config)
    return _load_levels(config)


@pytest.fixture(scope="session")
def desk_xxz_levels():
    """Raw spin-chain spectra: disorder value -> list of level arrays."""
    config = xxz_config()
    cmd_sample(config)
    return {w: _load_levels(config, disorder=w) for w in config.w_values}


@pytest.fixture(scope="session")
def desk_xxz_sweep(desk_xxz_levels):
    from levelstats.xxz import ChainSpec, disorder_sweep

    config = xxz_config()
    template = ChainSpec(
        length=config.length,
        jz=config.jz,
        disorder=config.w_values[0],
        seed=config.seed,
    )

    def provider(spec, idx):
        return desk_xxz_levels[spec.disorder][idx]

    return disorder_sweep(
        template,
        config.w_values,
        config.n_realizations,
        k_max=config.k_max,
        spectra_provider=provider,
    )
