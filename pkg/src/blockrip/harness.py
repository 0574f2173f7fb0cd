"""Experiments: recovery phase transitions, coherence Monte Carlo, exact-RIC
basis comparison and the partial-circulant demo, with CSV persistence.

Every random quantity is drawn from a named stream keyed by the master seed
and the work item (see ``_rng.stream``), so results do not depend on the
order in which cells run or on the number of worker threads.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from ._rng import stream
from .bases import (BasisLabel, BlockPartition, basis_by_label, canonical_basis, fourier_basis,
                    generic_basis, haar_orthogonal)
from .chaos import sample_sparse_unit
from .coherence import block_coherence, coherence
from .operators import (Ensemble, EnsembleKind, OperatorKind, build_dbd, build_rbd, extend_signal,
                        partial_circulant, sample_master, sample_operator, truncate_operator)
from .recovery import BpSettings, basis_pursuit, basis_pursuit_dense, relative_error
from .ric import exact_ric

__all__ = [
    "ExperimentKind",
    "ExperimentConfig",
    "PhaseGrid",
    "ConfigError",
    "PRESETS",
    "preset_config",
    "load_config",
    "run_phase_transition",
    "run_coherence_mc",
    "run_ric_compare",
    "run_circulant_demo",
    "circulant_basis_apply",
    "circulant_basis_adjoint",
    "write_results",
    "read_phase_csv",
    "export_gnuplot",
    "PHASE_HEADER",
]

PHASE_HEADER = ["S", "M", "J", "N", "operator_kind", "basis", "n_trials", "success_fraction", "master_seed"]


class ConfigError(ValueError):
    pass


class ExperimentKind(str, Enum):
    PHASE_TRANSITION = "PhaseTransition"
    COHERENCE_MC = "CoherenceMC"
    RIC_COMPARE = "RicCompare"
    CIRCULANT_DEMO = "CirculantDemo"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    partition: BlockPartition
    basis_label: BasisLabel = BasisLabel.CANONICAL
    operator_kind: OperatorKind = OperatorKind.DBD
    n_trials: int = 20
    success_threshold: float = 1e-2
    master_seed: int = 0
    S_range: tuple = ()
    M_range: tuple = ()
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ExperimentKind(self.kind))
        object.__setattr__(self, "basis_label", BasisLabel(self.basis_label))
        object.__setattr__(self, "operator_kind", OperatorKind(self.operator_kind))
        object.__setattr__(self, "S_range", tuple(int(s) for s in self.S_range))
        object.__setattr__(self, "M_range", tuple(int(m) for m in self.M_range))
        if self.n_trials < 1:
            raise ConfigError("n_trials must be at least 1")
        if not self.success_threshold > 0:
            raise ConfigError("success_threshold must be positive")
        N, n = self.partition.block_len, self.partition.n_total
        mt_max = self.partition.n_blocks * N
        for S in self.S_range:
            if not 1 <= S <= min(mt_max, n):
                raise ConfigError(f"S={S} outside [1, {min(mt_max, n)}]")
        for M in self.M_range:
            if not 1 <= M <= N:
                raise ConfigError(f"M={M} outside [1, {N}]")
        if len(set(self.S_range)) != len(self.S_range) or len(set(self.M_range)) != len(self.M_range):
            raise ConfigError("S_range and M_range must not repeat values")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "partition": {"n_blocks": self.partition.n_blocks, "block_len": self.partition.block_len},
            "basis_label": self.basis_label.value,
            "operator_kind": self.operator_kind.value,
            "n_trials": self.n_trials,
            "success_threshold": self.success_threshold,
            "master_seed": self.master_seed,
            "S_range": list(self.S_range),
            "M_range": list(self.M_range),
            "output_path": self.output_path,
        }


def _parse_range(value, name):
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra:
            raise ConfigError(f"unknown keys in {name}: {sorted(extra)}")
        try:
            start, stop = int(value["start"]), int(value["stop"])
        except KeyError as e:
            raise ConfigError(f"{name} needs 'start' and 'stop'") from e
        step = int(value.get("step", 1))
        if step < 1:
            raise ConfigError(f"{name} step must be positive")
        return tuple(range(start, stop + 1, step))
    if isinstance(value, list) and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        return tuple(value)
    raise ConfigError(f"{name} must be a list of integers or a {{start, stop, step}} object")


def _parse_partition(value):
    if not isinstance(value, dict):
        raise ConfigError("partition must be an object")
    allowed = {"n_blocks", "block_len", "meas_per_block", "n_total", "meas_total"}
    extra = set(value) - allowed
    if extra:
        raise ConfigError(f"unknown keys in partition: {sorted(extra)}")
    try:
        p = BlockPartition(value["n_blocks"], value["block_len"], value.get("meas_per_block"))
    except KeyError as e:
        raise ConfigError("partition needs n_blocks and block_len") from e
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if "n_total" in value and value["n_total"] != p.n_total:
        raise ConfigError(f"n_total={value['n_total']} != n_blocks*block_len={p.n_total}")
    if "meas_total" in value and value["meas_total"] != p.meas_total:
        raise ConfigError(f"meas_total={value['meas_total']} != n_blocks*meas_per_block={p.meas_total}")
    return p


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"kind", "partition"} - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    kw = dict(data)
    kw["partition"] = _parse_partition(data["partition"])
    for name in ("S_range", "M_range"):
        if name in kw:
            kw[name] = _parse_range(kw[name], name)
    try:
        return ExperimentConfig(**kw)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from e
    return config_from_dict(data)


# N=100, J=10 is the full-size experiment; "reduced" keeps CI runs short
PRESETS = {
    "full": dict(n_blocks=10, block_len=100, S_range=tuple(range(1, 1001)), M_range=tuple(range(1, 101))),
    "reduced": dict(n_blocks=4, block_len=32, S_range=tuple(range(2, 50, 4)), M_range=tuple(range(2, 33, 2))),
}


def preset_config(name: str, basis_label="Canonical", operator_kind="DBD", master_seed: int = 0,
                  n_trials: int = 20) -> ExperimentConfig:
    try:
        p = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ExperimentConfig(ExperimentKind.PHASE_TRANSITION, BlockPartition(p["n_blocks"], p["block_len"]),
                            basis_label, operator_kind, n_trials, 1e-2, master_seed,
                            p["S_range"], p["M_range"])


@dataclass
class PhaseGrid:
    cells: dict
    config: ExperimentConfig

    def success_mass(self) -> float:
        return float(sum(self.cells.values()))

    def rows(self):
        c = self.config
        for (S, M) in sorted(self.cells):
            yield {
                "S": S, "M": M, "J": c.partition.n_blocks, "N": c.partition.block_len,
                "operator_kind": c.operator_kind.value, "basis": c.basis_label.value,
                "n_trials": c.n_trials, "success_fraction": self.cells[(S, M)],
                "master_seed": c.master_seed,
            }


def _map(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _phase_cell(config, op_M, S, settings):
    """Success fraction for one (S, M) cell, all trials solved as one batch."""
    op, M = op_M
    part = config.partition
    n, K, seed = part.n_total, config.n_trials, config.master_seed
    Phi = op.dense()
    betas = np.stack([sample_sparse_unit(n, S, (seed, S, M, t)).coeffs for t in range(K)], axis=1)

    if config.basis_label is BasisLabel.GENERIC:
        # a fresh basis for every trial
        A = np.stack([Phi @ generic_basis(part, (seed, S, M, t)).entries for t in range(K)])
        Y = np.matmul(A, betas.T[:, :, None])[:, :, 0].T
    else:
        A = Phi @ basis_by_label(config.basis_label, part).entries
        Y = A @ betas

    est, info = basis_pursuit_dense(A, Y, settings, full_output=True)
    ok = 0
    for t in range(K):
        err = relative_error(betas[:, t], est[:, t])
        ok += bool(info["converged"][t]) and err < config.success_threshold
    return (S, M), ok / K


def run_phase_transition(config: ExperimentConfig, threads: int = 1,
                         settings: BpSettings | None = None) -> PhaseGrid:
    """Recovery success over the (S, M) grid with a single master operator.

    The master operator has square unit-variance blocks and is drawn once
    from stream ``(master_seed, "master")``; the operator for ``M`` keeps the
    first ``M`` rows of every block, rescaled by ``1/sqrt(M)``.
    """
    if config.kind is not ExperimentKind.PHASE_TRANSITION:
        raise ConfigError(f"expected a PhaseTransition config, got {config.kind.value}")
    master = sample_master(config.operator_kind, config.partition, config.master_seed)
    ops = {}
    for M in config.M_range:
        ops[M] = (truncate_operator(master, M), M)
    items = [(S, M) for M in config.M_range for S in config.S_range]
    results = _map(lambda sm: _phase_cell(config, ops[sm[1]], sm[0], settings), items, threads)
    return PhaseGrid(dict(results), config)


def run_coherence_mc(n_total: int, J: int, n_draws: int, seed, beta_mu: float = 3.5,
                     beta_gamma: float = 1.0, threads: int = 1) -> dict:
    """Coherence and block-coherence statistics of Haar-random orthobases."""
    part = BlockPartition.from_total(n_total, J)
    N = part.block_len
    if J > N:
        raise ValueError(f"the block-coherence check needs J <= N, got J={J}, N={N}")

    def draw(d):
        U = generic_basis(part, (seed, "coherence_mc", d))
        return coherence(U), block_coherence(U)

    vals = np.array(_map(draw, range(n_draws), threads))
    mu, gamma = vals[:, 0], vals[:, 1]
    mu_bound = beta_mu * math.sqrt(math.log(n_total))
    gamma_bound = 1.0 + math.sqrt(J / N) + beta_gamma
    rec = {"n_total": n_total, "J": J, "N": N, "n_draws": n_draws, "seed": seed,
           "mu_bound": mu_bound, "gamma_bound": gamma_bound}
    for name, v in (("mu", mu), ("gamma", gamma)):
        q = np.quantile(v, [0.0, 0.5, 0.99, 1.0])
        rec.update({f"{name}_min": q[0], f"{name}_median": q[1], f"{name}_q99": q[2], f"{name}_max": q[3]})
    rec["mu_exceed"] = int(np.sum(mu > mu_bound))
    rec["gamma_exceed"] = int(np.sum(gamma > gamma_bound))
    rec["mu_exceed_frac"] = rec["mu_exceed"] / n_draws
    rec["gamma_exceed_frac"] = rec["gamma_exceed"] / n_draws
    return rec


def _stderr(v) -> float:
    return float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0


def run_ric_compare(n_total: int, J: int, N: int, S: int, M: int, n_ops: int, seed,
                    orthogonal_blocks: bool = False, threads: int = 1) -> list[dict]:
    """Mean exact RIC per (operator kind, basis) over ``n_ops`` Gaussian operator draws.

    Each row also carries ``gap_vs_canonical``, the mean of
    ``delta(Canonical) - delta(basis)`` over the shared draws, and its paired
    standard error ``gap_stderr``.

    With ``orthogonal_blocks`` (requires ``M == N``) every block is replaced
    by a Haar orthogonal matrix, giving an exact isometry.
    """
    if n_total != J * N:
        raise ValueError(f"n_total={n_total} != J*N={J * N}")
    if orthogonal_blocks and M != N:
        raise ValueError("orthogonal blocks need M == N")
    part = BlockPartition(J, N, M)
    ens = Ensemble(EnsembleKind.GAUSSIAN, M, N)
    fixed = {"Canonical": canonical_basis(part), "Fourier": fourier_basis(part)}

    def one(d):
        ops = {}
        for kind in (OperatorKind.DBD, OperatorKind.RBD):
            key = (seed, "ric_compare", kind.value, d)
            if orthogonal_blocks:
                if kind is OperatorKind.DBD:
                    ops[kind] = build_dbd([haar_orthogonal(N, stream(key, j)) for j in range(J)])
                else:
                    ops[kind] = build_rbd(haar_orthogonal(N, stream(key, 0)), J)
            else:
                ops[kind] = sample_operator(kind, ens, J, key)
        bases = dict(fixed, Generic=generic_basis(part, (seed, "ric_compare_basis", d)))
        return {(k.value, b): exact_ric(op, U, S).delta for k, op in ops.items() for b, U in bases.items()}

    draws = _map(one, range(n_ops), threads)
    rows = []
    for kind in ("DBD", "RBD"):
        for b in ("Canonical", "Fourier", "Generic"):
            v = np.array([d[(kind, b)] for d in draws])
            # every basis sees the same operator draws, so the gap to the
            # canonical basis is a paired difference with its own standard error
            gap = np.array([d[(kind, "Canonical")] for d in draws]) - v
            rows.append({"operator_kind": kind, "basis": b, "n_total": n_total, "J": J, "N": N,
                         "S": S, "M": M, "n_ops": n_ops, "mean_delta": float(v.mean()),
                         "stderr": _stderr(v), "max_delta": float(v.max()),
                         "gap_vs_canonical": float(gap.mean()), "gap_stderr": _stderr(gap)})
    return rows


def _circulant_rows(P: int, J: int) -> np.ndarray:
    # row j*P + p of T is row j*P + (p + j) % P of kron(F_J, I_P)
    j = np.arange(J)[:, None]
    p = np.arange(P)[None, :]
    return (j * P + (p + j) % P).ravel()


def circulant_basis_apply(beta, P: int, J: int) -> np.ndarray:
    """``T @ beta`` for the circulant basis without forming ``T``.

    Coefficient ``k*P + p`` multiplies column ``(k, p)`` of ``kron(F_J, I_P)``;
    the DFT along the block axis is followed by an upward roll of block ``j``
    by ``j`` rows.
    """
    beta = np.asarray(beta)
    B = beta.reshape(J, P, *beta.shape[1:])
    W = np.fft.fft(B, axis=0, norm="ortho").reshape(beta.shape)
    return W[_circulant_rows(P, J)]


def circulant_basis_adjoint(x, P: int, J: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    W = np.empty_like(x)
    W[_circulant_rows(P, J)] = x
    return np.fft.ifft(W.reshape(J, P, *x.shape[1:]), axis=0, norm="ortho").reshape(x.shape)


def run_circulant_demo(P: int, J: int, S: int, seed, n_trials: int = 20, n_checks: int = 20,
                       threshold: float = 1e-2, settings: BpSettings | None = None) -> dict:
    """Check the repeated-block rewriting of a partial circulant matrix and recover through it.

    Reports the largest gaps in ``Phi_C x = Phi_R xt/sqrt(J)`` and in
    ``xt/sqrt(J) = T [x; 0]`` over random dense ``x``, then solves basis
    pursuit in the ``T`` basis for ``n_trials`` ``S``-sparse signals
    measured by one partial circulant matrix.
    """
    if not 1 <= J <= P:
        raise ValueError(f"need 1 <= J <= P, got J={J}, P={P}")
    r = stream(seed, "circulant_r").standard_normal(P)
    PC = partial_circulant(r, J)
    phiR = PC.rbd_operator()
    n = P * J

    identity_gap = rep_gap = 0.0
    for i in range(n_checks):
        g = stream(seed, "circulant_check", i)
        x = g.standard_normal(P) + 1j * g.standard_normal(P)
        xt = extend_signal(x, J) / math.sqrt(J)
        identity_gap = max(identity_gap, float(np.max(np.abs(PC @ x - phiR @ xt))))
        beta = np.zeros(n, dtype=np.complex128)
        beta[:P] = x
        rep_gap = max(rep_gap, float(np.max(np.abs(xt - circulant_basis_apply(beta, P, J)))))

    def measure(b):
        return phiR @ circulant_basis_apply(b, P, J)

    def adjoint(y):
        return circulant_basis_adjoint(phiR.adjoint(y), P, J)

    betas = np.zeros((n, n_trials), dtype=np.complex128)
    for t in range(n_trials):
        betas[:P, t] = sample_sparse_unit(P, S, (seed, "circulant_signal", t)).coeffs
    if S == 0:
        successes = n_trials
        worst = 0.0
    else:
        gram = np.eye(J) * float(r @ r)
        est, info = basis_pursuit(measure, adjoint, measure(betas), settings, gram=gram, full_output=True)
        errs = np.array([relative_error(betas[:, t], est[:, t]) for t in range(n_trials)])
        ok = (errs < threshold) & np.asarray(info["converged"])
        successes = int(ok.sum())
        worst = float(errs.max())
    return {"P": P, "J": J, "S": S, "seed": seed, "n_trials": n_trials,
            "identity_gap": identity_gap, "representation_gap": rep_gap,
            "success_fraction": successes / n_trials, "max_rel_error": worst}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    return "" if v is None else str(v)


def results_to_csv(result) -> str:
    """Render a PhaseGrid, a record dict, or a list of record dicts as CSV text."""
    if isinstance(result, PhaseGrid):
        header, rows = PHASE_HEADER, list(result.rows())
    else:
        rows = [result] if isinstance(result, dict) else list(result)
        header = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def write_results(result, path) -> Path:
    path = Path(path)
    text = results_to_csv(result)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write results to {path}: {e}") from e
    return path


def read_phase_csv(path) -> dict:
    """Read a phase-transition CSV back into ``{(S, M): success_fraction}``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != PHASE_HEADER:
                raise ValueError(f"{path} does not have the phase-transition header")
            return {(int(r["S"]), int(r["M"])): float(r["success_fraction"]) for r in reader}
    except OSError as e:
        raise OSError(f"cannot read {path}: {e}") from e


def export_gnuplot(csv_path, out_path=None) -> str:
    """Convert a phase CSV to gnuplot's ``matrix nonuniform`` layout.

    First row: cell count then the M values; each following row: an S value
    then the success fractions for every M. Missing cells are written as NaN.
    """
    cells = read_phase_csv(csv_path)
    Ss = sorted({s for s, _ in cells})
    Ms = sorted({m for _, m in cells})
    lines = [" ".join([str(len(Ms))] + [str(m) for m in Ms])]
    for s in Ss:
        vals = [_fmt(cells[(s, m)]) if (s, m) in cells else "NaN" for m in Ms]
        lines.append(" ".join([str(s)] + vals))
    text = "\n".join(lines) + "\n"
    if out_path is not None:
        Path(out_path).write_text(text)
    return text
