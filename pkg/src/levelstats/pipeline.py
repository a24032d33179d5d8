"""Campaign orchestration: seeded sampling with an on-disk cache, analysis
passes that turn cached spectra into CSV reports, and run manifests.

Determinism contract: (config, master seed) fixes every output byte. Worker
count only changes who computes a realization, never the result: each
realization derives its RNG from (master_seed, realization_index), workers
write one file per realization, and aggregation always reads realizations in
index order with exact integer or fixed-format accumulation.
"""

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import __version__
from .ensembles import EnsembleSpec, sample_spectrum
from .errors import ValidationError
from .gof import sigma_gof
from .spectral_stats import (
    build_histogram,
    default_bounds,
    knn_spacings,
    moments,
    number_variance,
)
from .surmise import (
    BETA_VALUES,
    alpha_corrected,
    alpha_old,
    norm_constants,
    pdf_corrected,
    pdf_gaussian,
    pdf_nn_corrected_gue,
    pdf_old,
    pdf_poisson_knn,
    pdf_quadrature_moments,
    resolve_constants_mode,
    rmt_variance,
    skewness_of_surmise,
    variance_of_surmise,
)
from .unfolding import UnfoldedSpectrum, unfold_polynomial, unfold_semicircle
from .xxz import ChainSpec, build_basis, disorder_fields, disorder_sweep, spectrum

__all__ = [
    "CampaignConfig",
    "RunManifest",
    "desk_preset",
    "paper_preset",
    "cmd_sample",
    "cmd_analyze",
    "cmd_xxz",
    "cmd_table",
]

_FLOAT_FMT = ".12g"


def _fmt(x):
    if isinstance(x, float):
        return format(x, _FLOAT_FMT)
    return str(x)


@dataclass
class CampaignConfig:
    """Everything a campaign needs; round-trips losslessly through JSON."""

    mode: str = "ensemble"  # "ensemble" or "xxz"
    ensemble: str = "goe"
    dim: int = 1000
    n_realizations: int = 200
    # xxz settings
    length: int = 14
    jz: float = 1.0
    w_values: tuple = (1.0, 2.0, 5.0, 20.0)
    # spacing statistics
    k_min: int = 1
    k_max: int = 50
    bin_width: float = 0.05
    window_sigmas: float = 3.0
    constants_mode: str = "auto"
    # unfolding
    unfold_method: str = "auto"  # semicircle | polynomial | none | auto
    bulk_fraction: float = 0.8
    density_threshold: float = 0.9
    fit_degree: int = 3
    density_bins: int = 100
    smooth_bins: int = 9
    # number variance
    nv_l_max: float | None = None
    nv_l_step: float = 0.25
    nv_stride: float = 0.5
    # execution
    seed: int = 1
    workers: int = 1
    out_dir: str = "levelstats_runs"

    def __post_init__(self):
        if self.mode not in ("ensemble", "xxz"):
            raise ValidationError(f"mode must be ensemble or xxz, got {self.mode!r}")
        if self.n_realizations < 1:
            raise ValidationError("n_realizations must be >= 1")
        if not 1 <= self.k_min <= self.k_max:
            raise ValidationError("need 1 <= k_min <= k_max")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        self.w_values = tuple(float(w) for w in self.w_values)

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def content_hash(self):
        """Hash of the science-relevant fields: everything except execution
        details that must not change results (workers, out_dir)."""
        data = dataclasses.asdict(self)
        data.pop("workers")
        data.pop("out_dir")
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def desk_preset(mode="ensemble", **overrides):
    base = dict(mode=mode)
    if mode == "xxz":
        base.update(n_realizations=20, length=14, k_max=50)
    base.update(overrides)
    return CampaignConfig(**base)


def paper_preset(mode="ensemble", **overrides):
    base = dict(mode=mode, n_realizations=1000)
    if mode == "xxz":
        base.update(n_realizations=100, length=16, k_max=50)
    base.update(overrides)
    return CampaignConfig(**base)


@dataclass
class RunManifest:
    """Reproduction record: config, hash, seed scheme, file inventory."""

    config: dict
    config_hash: str
    version: str
    seed_scheme: str
    created: str
    outputs: dict = field(default_factory=dict)  # relpath -> sha256

    def save(self, out_dir):
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
        return path


def _new_manifest(config):
    return RunManifest(
        config=dataclasses.asdict(config),
        config_hash=config.content_hash(),
        version=__version__,
        seed_scheme="rng(realization) = default_rng(SeedSequence((master_seed, realization_index)))",
        created=time.strftime("%Y-%m-%dT%H:%M:%S"),
    )


def _file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_save_npy(path, array):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.save(fh, array)
    os.replace(tmp, path)


def _spectra_dir(config, disorder=None):
    if config.mode == "xxz":
        tag = (
            f"xxz_L{config.length}_Jz{_fmt(float(config.jz))}"
            f"_W{_fmt(float(disorder))}_seed{config.seed}"
        )
    else:
        tag = f"{config.ensemble}_N{config.dim}_seed{config.seed}"
    return os.path.join(config.out_dir, "spectra", tag)


def _realization_path(base, idx):
    return os.path.join(base, f"r{idx:05d}.npy")


def _ensemble_task(args):
    config_dict, idx = args
    config = CampaignConfig(**config_dict)
    spec = EnsembleSpec(config.ensemble, config.dim, config.seed)
    sample = sample_spectrum(spec, idx)
    base = _spectra_dir(config)
    _atomic_save_npy(_realization_path(base, idx), sample.levels)
    return idx


def _xxz_task(args):
    config_dict, disorder, idx = args
    config = CampaignConfig(**config_dict)
    spec = ChainSpec(
        length=config.length, jz=config.jz, disorder=disorder, seed=config.seed
    )
    base = _spectra_dir(config, disorder)
    h = disorder_fields(spec, idx)
    sample = spectrum(spec, idx)
    _atomic_save_npy(_realization_path(base, idx), sample.levels)
    sidecar = {
        "length": spec.length,
        "jz": spec.jz,
        "disorder": spec.disorder,
        "seed": spec.seed,
        "realization_index": idx,
        "h_values": [float(v) for v in h],
    }
    tmp = _realization_path(base, idx) + ".json.tmp"
    final = _realization_path(base, idx).replace(".npy", ".h.json")
    with open(tmp, "w") as fh:
        json.dump(sidecar, fh, sort_keys=True)
    os.replace(tmp, final)
    return idx


def _run_tasks(task_fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            task_fn(t)
        return
    try:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits
    except ImportError:  # worker-side BLAS oversubscription guard only
        limiter = None
    ctx = get_context("spawn")
    with ctx.Pool(workers, initializer=_worker_init, initargs=(limiter is not None,)) as pool:
        for _ in pool.imap_unordered(task_fn, tasks):
            pass


def _worker_init(limit_threads):
    if limit_threads:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)


def cmd_sample(config):
    """Generate and cache all missing realizations; returns the manifest.

    Idempotent: realizations whose cache file exists are not recomputed.
    """
    manifest = _new_manifest(config)
    if config.mode == "xxz":
        todo = []
        for w in config.w_values:
            base = _spectra_dir(config, w)
            os.makedirs(base, exist_ok=True)
            for idx in range(config.n_realizations):
                if not os.path.exists(_realization_path(base, idx)):
                    todo.append((dataclasses.asdict(config), w, idx))
        _run_tasks(_xxz_task, todo, config.workers)
    else:
        base = _spectra_dir(config)
        os.makedirs(base, exist_ok=True)
        todo = [
            (dataclasses.asdict(config), idx)
            for idx in range(config.n_realizations)
            if not os.path.exists(_realization_path(base, idx))
        ]
        _run_tasks(_ensemble_task, todo, config.workers)
    manifest.save(config.out_dir)
    return manifest


def _load_levels(config, disorder=None):
    base = _spectra_dir(config, disorder)
    out = []
    for idx in range(config.n_realizations):
        path = _realization_path(base, idx)
        if not os.path.exists(path):
            raise ValidationError(
                f"missing cached realization {path}; run the sample step first"
            )
        out.append(np.load(path))
    return out


def _central_trim(levels, fraction):
    n = levels.size
    keep = int(round(fraction * n))
    lo = (n - keep) // 2
    return UnfoldedSpectrum(levels=levels[lo : lo + keep], method="none", n_raw=n)


def _unfold_all(config, levels_list):
    method = config.unfold_method
    if method == "auto":
        method = "none" if config.ensemble == "poisson" else "semicircle"
    out = []
    for levels in levels_list:
        if method == "semicircle":
            out.append(unfold_semicircle(levels, bulk_fraction=config.bulk_fraction))
        elif method == "polynomial":
            out.append(
                unfold_polynomial(
                    levels,
                    density_threshold=config.density_threshold,
                    degree=config.fit_degree,
                    n_bins=config.density_bins,
                    smooth_bins=config.smooth_bins,
                )
            )
        elif method == "none":
            out.append(_central_trim(levels, config.bulk_fraction))
        else:
            raise ValidationError(f"unknown unfolding method {method!r}")
    return out


class _CsvWriter:
    """CSV with a manifest-reference comment line and fixed float format."""

    def __init__(self, out_dir, name, config_hash, columns):
        os.makedirs(out_dir, exist_ok=True)
        self.path = os.path.join(out_dir, name)
        self._fh = open(self.path + ".tmp", "w")
        self._fh.write(f"# manifest {config_hash}\n")
        self._fh.write(",".join(columns) + "\n")

    def row(self, *values):
        self._fh.write(",".join(_fmt(v) for v in values) + "\n")

    def close(self):
        self._fh.close()
        os.replace(self.path + ".tmp", self.path)
        return self.path


def _surmise_families(config, k, beta):
    mode = config.constants_mode
    fams = [
        ("old", pdf_old(k, beta, constants_mode=mode)),
        ("corrected", pdf_corrected(k, beta, constants_mode=mode)),
        ("gaussian", pdf_gaussian(k, beta)),
    ]
    return fams


def cmd_analyze(config):
    """Moments, histograms, number variance, and gof tables for one ensemble.

    Reads cached spectra (sampling them first if absent), unfolds, then for
    each k in [k_min, k_max]: pooled spacings, moments row, histogram CSV,
    and sigma-gof rows against the analytic families. Poisson campaigns are
    compared against the Poisson kNN reference instead of the matrix-class
    surmises. Returns the list of files written.
    """
    if config.mode != "ensemble":
        raise ValidationError("cmd_analyze handles ensemble campaigns; use cmd_xxz")
    cmd_sample(config)
    levels_list = _load_levels(config)
    unfolded = _unfold_all(config, levels_list)
    h = config.content_hash()
    written = []
    beta = EnsembleSpec(config.ensemble, config.dim, config.seed).beta
    mom = _CsvWriter(
        config.out_dir,
        "moments.csv",
        h,
        ["ensemble", "k", "mean", "variance", "skew", "kurt", "se_mean", "n"],
    )
    gof = _CsvWriter(
        config.out_dir,
        "gof.csv",
        h,
        ["ensemble", "k", "family", "sigma", "n_bins_used", "bin_width", "window_sigmas"],
    )
    for k in range(config.k_min, config.k_max + 1):
        spacings = knn_spacings(unfolded, k)
        summary = moments(spacings)
        mom.row(
            config.ensemble,
            k,
            summary.mean,
            summary.variance,
            summary.skewness,
            summary.excess_kurtosis,
            summary.se_mean,
            summary.n_values,
        )
        hist = build_histogram(
            spacings, bin_width=config.bin_width, bounds=default_bounds(k)
        )
        hist_csv = _CsvWriter(
            config.out_dir, f"hist_k{k}.csv", h, ["bin_center", "density"]
        )
        for center, dens in zip(hist.centers, hist.densities):
            hist_csv.row(float(center), float(dens))
        written.append(hist_csv.close())
        if beta is None:
            families = [("poisson_knn", pdf_poisson_knn(k))]
        else:
            families = _surmise_families(config, k, beta)
        for name, dist in families:
            res = sigma_gof(hist, dist, window_sigmas=config.window_sigmas)
            gof.row(
                config.ensemble,
                k,
                name,
                res.sigma,
                res.n_bins_used,
                res.bin_width,
                res.window_sigmas,
            )
    written.append(mom.close())
    written.append(gof.close())
    l_max = config.nv_l_max
    if l_max is None:
        l_max = min(config.k_max + 1, 51)
    nv = number_variance(
        unfolded, l_max=l_max, l_step=config.nv_l_step, start_stride=config.nv_stride
    )
    nv_csv = _CsvWriter(config.out_dir, "nv.csv", h, ["ensemble", "L", "sigma2"])
    for length, s2 in zip(nv.lengths, nv.sigma2):
        nv_csv.row(config.ensemble, float(length), float(s2))
    written.append(nv_csv.close())
    _finalize_manifest(config, written)
    return written


def cmd_xxz(config):
    """Disorder sweep over w_values with cached spectra; emits xxz_sweep.csv."""
    if config.mode != "xxz":
        raise ValidationError("cmd_xxz needs a config with mode='xxz'")
    cmd_sample(config)

    def provider(spec, idx):
        base = _spectra_dir(config, spec.disorder)
        return np.load(_realization_path(base, idx))

    template = ChainSpec(
        length=config.length, jz=config.jz, disorder=config.w_values[0], seed=config.seed
    )
    result = disorder_sweep(
        template,
        config.w_values,
        config.n_realizations,
        config.k_max,
        spectra_provider=provider,
    )
    h = config.content_hash()
    sweep = _CsvWriter(
        config.out_dir,
        "xxz_sweep.csv",
        h,
        [
            "L",
            "Jz",
            "W",
            "k",
            "mean",
            "variance",
            "sigma_vs_goe",
            "sigma_vs_poisson",
            "n_realizations",
        ],
    )
    for row in result.rows:
        sweep.row(
            config.length,
            float(config.jz),
            row.disorder,
            row.k,
            row.mean,
            row.variance,
            row.sigma_vs_goe,
            row.sigma_vs_poisson,
            row.n_realizations,
        )
    written = [sweep.close()]
    nv_csv = _CsvWriter(config.out_dir, "xxz_nv.csv", h, ["W", "L_window", "sigma2"])
    for w in result.w_values:
        curve = result.nv_curves[w]
        for length, s2 in zip(curve.lengths, curve.sigma2):
            nv_csv.row(w, float(length), float(s2))
    written.append(nv_csv.close())
    _finalize_manifest(config, written)
    return result, written


def cmd_table(config):
    """surmise_table.csv: exponents, constants, moments, normalization audit.

    C underflows to 0.0 in double precision for large k (the exponent wins),
    so log_c is the authoritative column; c is included for readability.
    """
    h = config.content_hash()
    table = _CsvWriter(
        config.out_dir,
        "surmise_table.csv",
        h,
        [
            "family",
            "k",
            "beta",
            "alpha",
            "a",
            "c",
            "log_c",
            "constants_mode",
            "mean",
            "variance",
            "skewness",
            "norm_error",
        ],
    )
    rows = []
    for beta in BETA_VALUES:
        for k in range(config.k_min, config.k_max + 1):
            mode = resolve_constants_mode(k, config.constants_mode)
            for family, alpha in (
                ("old", alpha_old(k, beta)),
                ("corrected", alpha_corrected(k, beta, mode=config.constants_mode)),
            ):
                nc = norm_constants(alpha, k, mode=mode)
                spec = (pdf_old if family == "old" else pdf_corrected)(
                    k, beta, constants_mode=mode
                )
                norm, _, _ = pdf_quadrature_moments(spec)
                rows.append(
                    (
                        family,
                        k,
                        beta,
                        alpha,
                        nc.a,
                        nc.c,
                        nc.log_c,
                        mode,
                        spec.mean,
                        spec.variance,
                        skewness_of_surmise(alpha),
                        abs(norm - 1.0),
                    )
                )
    nn = pdf_nn_corrected_gue()
    norm, _, _ = pdf_quadrature_moments(nn)
    rows.append(
        (
            "nn_corrected_gue",
            1,
            2,
            nn.alpha,
            nn.a_coeff,
            float(np.exp(nn.log_c)),
            nn.log_c,
            nn.constants_mode,
            nn.mean,
            nn.variance,
            skewness_of_surmise(nn.alpha),
            abs(norm - 1.0),
        )
    )
    for row in rows:
        table.row(*row)
    written = [table.close()]
    _finalize_manifest(config, written)
    return written


def _finalize_manifest(config, written):
    manifest = _new_manifest(config)
    for path in written:
        rel = os.path.relpath(path, config.out_dir)
        manifest.outputs[rel] = _file_sha256(path)
    manifest.save(config.out_dir)
    return manifest
