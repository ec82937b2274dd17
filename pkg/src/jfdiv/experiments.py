"""Parameter sweeps of JSD and JFD over the sinusoidal, gamma-like and Hermite families."""

import inspect
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .densities import (
    GAMMA_FISHER_MIN_BETA,
    make_gamma_like,
    make_rakhmanov_hermite,
    make_sinusoidal,
)
from .divergences import Path, jfd, jsd
from .quadrature import QuadConfig

# largest Hermite degree a sweep may touch
HERMITE_MAX_N = 100


@dataclass(frozen=True)
class SweepRecord:
    index: tuple
    jsd: float
    jfd: float
    jsd_err: float
    jfd_err: float
    series: str = ""


@dataclass
class SweepTable:
    index_names: tuple
    records: list
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name, series=None):
        recs = [r for r in self.records if series is None or r.series == series]
        if name in self.index_names:
            k = self.index_names.index(name)
            return np.array([r.index[k] for r in recs])
        return np.array([getattr(r, name) for r in recs])

    def series_labels(self):
        seen = []
        for r in self.records:
            if r.series not in seen:
                seen.append(r.series)
        return seen

    @classmethod
    def combine(cls, tables, metadata=None):
        """Concatenate tables, tagging each record with its table's series label."""
        tables = list(tables)
        names = tables[0].index_names
        if any(t.index_names != names for t in tables):
            raise ValueError("cannot combine sweeps with different index columns")
        records = []
        for t in tables:
            label = t.metadata.get("series", "")
            records.extend(SweepRecord(r.index, r.jsd, r.jfd, r.jsd_err, r.jfd_err, label) for r in t.records)
        meta = dict(metadata or {})
        meta.setdefault("series", [t.metadata.get("series", "") for t in tables])
        return cls(names, records, meta)


@dataclass(frozen=True)
class PairingRule:
    """Partner index ``m`` for index ``n``: a fixed reference, or ``multiple * n + offset``."""

    multiple: int = 1
    offset: int = 0
    fixed: Optional[int] = None

    def __post_init__(self):
        if self.fixed is not None and self.fixed < 0:
            raise ValueError(f"fixed reference must be non-negative, got {self.fixed}")
        if self.fixed is None and (self.multiple < 0 or self.offset < 0 or (self.multiple, self.offset) == (1, 0)):
            raise ValueError(f"rule m = {self.multiple}n + {self.offset} does not define a partner")

    @classmethod
    def fixed_reference(cls, m):
        return cls(fixed=int(m))

    @classmethod
    def offset_by(cls, k):
        return cls(1, int(k))

    @classmethod
    def times(cls, c):
        return cls(int(c), 0)

    @classmethod
    def times_plus(cls, c, k):
        return cls(int(c), int(k))

    def partner(self, n):
        return self.fixed if self.fixed is not None else self.multiple * n + self.offset

    @property
    def label(self):
        if self.fixed is not None:
            return f"(n,{self.fixed})"
        lead = "n" if self.multiple == 1 else f"{self.multiple}n"
        return f"(n,{lead}+{self.offset})" if self.offset else f"(n,{lead})"


FIG7_RULES = (
    PairingRule.offset_by(1),
    PairingRule.offset_by(10),
    PairingRule.times(2),
    PairingRule.times_plus(2, 10),
    PairingRule.times(3),
    PairingRule.times(4),
)


def _pair(rho1, rho2, config, path):
    s = jsd(rho1, rho2, config)
    f = jfd(rho1, rho2, config, path)
    if not (s.finite and f.finite):
        raise RuntimeError(f"divergent sweep record for {rho1.label} vs {rho2.label}")
    return s, f


def _run(tasks: list, evaluate: Callable, workers: int):
    # map preserves input order, so the table is identical for any worker count
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate, tasks))
    return [evaluate(t) for t in tasks]


def _table(index_names, indices, results, meta):
    records = [
        SweepRecord(tuple(idx), s.value, f.value, s.error_estimate, f.error_estimate)
        for idx, (s, f) in zip(indices, results)
    ]
    meta = dict(meta)
    meta.setdefault("created", time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    return SweepTable(tuple(index_names), records, meta)


def _config_meta(config, path):
    config = config or QuadConfig()
    return {"abs_tol": config.abs_tol, "rel_tol": config.rel_tol, "path": Path(path).value}


def sweep_sinusoidal_vs_reference(reference_n=1, n_max=50, config: QuadConfig = None, workers=1,
                                  path=Path.FUNCTIONAL) -> SweepTable:
    """JSD and JFD between sinusoidal states ``n = 1..n_max`` and a reference state."""
    if reference_n < 1:
        raise ValueError(f"reference quantum number must be >= 1, got {reference_n}")
    if n_max < reference_n:
        raise ValueError(f"n_max ({n_max}) must be at least the reference ({reference_n})")
    ref = make_sinusoidal(reference_n)
    ns = list(range(1, n_max + 1))
    results = _run(ns, lambda n: _pair(make_sinusoidal(n), ref, config, path), workers)
    meta = {"family": "sinusoidal", "reference": f"sinusoidal:n={reference_n}", **_config_meta(config, path)}
    return _table(("n",), [(n,) for n in ns], results, meta)


def gamma_grid(beta_min, beta_max, steps):
    """``steps`` values of beta, log-spaced in ``beta - 1``."""
    if steps == 1:
        return np.array([float(beta_min)])
    return 1.0 + np.logspace(math.log10(beta_min - 1.0), math.log10(beta_max - 1.0), steps)


def sweep_gamma(beta_min=1.05, beta_max=80.0, steps=100, config: QuadConfig = None, workers=1,
                path=Path.FUNCTIONAL) -> SweepTable:
    """JSD and JFD between gamma-like densities and the Gaussian (beta = 0)."""
    steps = int(steps)
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    if not beta_min >= GAMMA_FISHER_MIN_BETA:
        raise ValueError(f"beta_min must exceed 1 (Fisher information diverges at beta <= 1), got {beta_min}")
    if beta_max < beta_min:
        raise ValueError(f"beta_max ({beta_max}) below beta_min ({beta_min})")
    ref = make_gamma_like(0.0)
    betas = gamma_grid(beta_min, beta_max, steps)
    results = _run(list(betas), lambda b: _pair(make_gamma_like(b), ref, config, path), workers)
    meta = {"family": "gamma", "reference": "gamma:beta=0", **_config_meta(config, path)}
    return _table(("beta",), [(float(b),) for b in betas], results, meta)


def _check_hermite_n(n, what):
    if not 0 <= n <= HERMITE_MAX_N:
        raise ValueError(f"{what} must lie in [0, {HERMITE_MAX_N}], got {n}")


def sweep_hermite_vs_reference(reference_n=10, n_max=100, config: QuadConfig = None, workers=1,
                               path=Path.FUNCTIONAL) -> SweepTable:
    """JSD and JFD between Hermite states ``n = 0..n_max`` and a reference state."""
    _check_hermite_n(reference_n, "reference quantum number")
    _check_hermite_n(n_max, "n_max")
    ref = make_rakhmanov_hermite(reference_n)
    ns = list(range(n_max + 1))
    results = _run(ns, lambda n: _pair(make_rakhmanov_hermite(n), ref, config, path), workers)
    meta = {"family": "hermite", "reference": f"hermite:n={reference_n}", "series": f"(n,{reference_n})",
            **_config_meta(config, path)}
    return _table(("n",), [(n,) for n in ns], results, meta)


def sweep_hermite_pairs(rule: PairingRule, n_max=HERMITE_MAX_N, jfd_cap=240.0, config: QuadConfig = None,
                        workers=1, path=Path.FUNCTIONAL) -> SweepTable:
    """JSD and JFD for Hermite pairs ``(n, rule.partner(n))``, ``n = 0, 1, ...``.

    Stops before the first pair whose JFD exceeds ``jfd_cap``, at
    ``n_max``, or once the partner degree would exceed ``HERMITE_MAX_N``.
    """
    _check_hermite_n(n_max, "n_max")
    if not jfd_cap > 0:
        raise ValueError(f"jfd_cap must be positive, got {jfd_cap}")
    ns = [n for n in range(n_max + 1) if rule.partner(n) <= HERMITE_MAX_N]

    def evaluate(n):
        return _pair(make_rakhmanov_hermite(n), make_rakhmanov_hermite(rule.partner(n)), config, path)

    # evaluate in blocks so capped sweeps stop early without losing parallelism
    block = max(1, workers or 1) * 4
    indices, results = [], []
    for start in range(0, len(ns), block):
        chunk = ns[start:start + block]
        done = False
        for n, res in zip(chunk, _run(chunk, evaluate, workers)):
            if res[1].value > jfd_cap:
                done = True
                break
            indices.append((n, rule.partner(n)))
            results.append(res)
        if done:
            break
    meta = {"family": "hermite", "rule": rule.label, "series": rule.label, "jfd_cap": jfd_cap,
            **_config_meta(config, path)}
    return _table(("n", "m"), indices, results, meta)


# -- figure registry ---------------------------------------------------------------


def _refs(value):
    if isinstance(value, str):
        return tuple(int(v) for v in value.replace(";", " ").replace("/", " ").split())
    if isinstance(value, (int, np.integer)):
        return (int(value),)
    return tuple(int(v) for v in value)


def _fig_sinusoidal(reference):
    def run(reference_n=reference, n_max=50, **kw):
        return sweep_sinusoidal_vs_reference(int(reference_n), int(n_max), **kw)
    return run


def _fig_gamma(beta_min=1.05, beta_max=80.0, steps=100, **kw):
    return sweep_gamma(float(beta_min), float(beta_max), int(steps), **kw)


def _fig_hermite(reference_n=10, n_max=HERMITE_MAX_N, **kw):
    return sweep_hermite_vs_reference(int(reference_n), int(n_max), **kw)


def _fig_hermite_refs(references=(0, 10, 40), n_max=HERMITE_MAX_N, **kw):
    tables = [sweep_hermite_vs_reference(r, int(n_max), **kw) for r in _refs(references)]
    return SweepTable.combine(tables, {"family": "hermite", "references": list(_refs(references))})


def _fig_pairs(n_max=HERMITE_MAX_N, jfd_cap=240.0, **kw):
    tables = [sweep_hermite_pairs(rule, int(n_max), float(jfd_cap), **kw) for rule in FIG7_RULES]
    return SweepTable.combine(tables, {"family": "hermite", "jfd_cap": float(jfd_cap)})


FIGURES = {
    "fig1": (_fig_sinusoidal(1), "sinusoidal states against the ground state"),
    "fig2": (_fig_sinusoidal(10), "sinusoidal states against n = 10"),
    "fig3": (_fig_gamma, "gamma-like densities against the Gaussian"),
    "fig4": (_fig_gamma, "gamma-like divergence plane (same sweep as fig3)"),
    "fig5": (_fig_hermite, "Hermite states against one reference state"),
    "fig6": (_fig_hermite_refs, "Hermite states against references 0, 10 and 40"),
    "fig7": (_fig_pairs, "Hermite pairs (n,n+1) ... (n,4n) up to the JFD cap"),
}


def run_figure(name, overrides=None, config: QuadConfig = None, workers=1) -> SweepTable:
    """Run a named figure sweep, with ``overrides`` passed as sweep parameters."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    fn, _ = FIGURES[name]
    allowed = set(inspect.signature(fn).parameters) - {"kw", "config", "workers", "path"}
    unknown = set(overrides or {}) - allowed
    if unknown:
        raise ValueError(f"{name} does not accept {', '.join(sorted(unknown))}; allowed: {', '.join(sorted(allowed))}")
    table = fn(**dict(overrides or {}), config=config, workers=workers)
    table.metadata["figure"] = name
    return table
