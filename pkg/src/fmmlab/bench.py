"""Accuracy benchmark harness: max-norm error against an exact reference.

For every (size, trial) cell two standard-normal matrices are drawn from
deterministic, documented streams; each scheme multiplies them through the
recursion module and the max-norm difference against the reference product
is recorded.  The default reference is *exact*: float entries are dyadic
rationals, so the true product can be computed in integer arithmetic and
rounded once.  A double-double reference (>= twice working precision) is
available for speed.

Reports: CSV/JSON, a gnuplot script, and a matplotlib log-log figure of
median error versus size rendered alongside the delimited output.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .catalog import resolve
from .recursion import classical_multiply, multiply, multiply_alt

__all__ = [
    "BenchConfig",
    "BenchRecord",
    "random_matrix",
    "cell_entropy",
    "reference_product",
    "run_bench",
    "median_errors",
    "write_csv",
    "write_json",
    "write_plot_script",
    "render_figure",
]

DEFAULT_SIZES = (32, 33, 45, 64, 65, 91, 128, 129, 181, 256, 257, 362, 512)
DEFAULT_SCHEMES = ("classical", "winograd", "strassen", "acc-4x4x4", "acc-4x4x4-alt")


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple = DEFAULT_SIZES
    schemes: tuple = DEFAULT_SCHEMES
    seed: int = 20250808
    trials: int = 5
    distribution: str = "normal"  # "uniform" exists but carries no claims
    reference: str = "exact"  # or "dd"

    def __post_init__(self):
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.distribution not in ("normal", "uniform"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.reference not in ("exact", "dd"):
            raise ValueError(f"unknown reference mode {self.reference!r}")

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if "sizes" in data:
            data["sizes"] = tuple(data["sizes"])
        if "schemes" in data:
            data["schemes"] = tuple(data["schemes"])
        return cls(**data)

    def to_json(self):
        data = asdict(self)
        data["sizes"] = list(self.sizes)
        data["schemes"] = list(self.schemes)
        return json.dumps(data, indent=2)


@dataclass(frozen=True)
class BenchRecord:
    scheme: str
    n: int
    seed: int
    trial: int
    max_err: float
    elapsed: float


def cell_entropy(master_seed, n, trial, role):
    """Documented split: every (size, trial, operand) cell draws from
    PCG64 seeded with SeedSequence([master, n, trial, role])."""
    return [int(master_seed), int(n), int(trial), int(role)]


def random_matrix(n, stream_seed, distribution="normal"):
    """Deterministic n x n sample; identical (seed, n) gives identical
    matrices on every platform (PCG64 + SeedSequence are specified)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(stream_seed)))
    if distribution == "normal":
        return rng.standard_normal((n, n))
    if distribution == "uniform":
        return rng.random((n, n)) * 2.0 - 1.0
    raise ValueError(f"unknown distribution {distribution!r}")


# ---------------------------------------------------------------------------
# Reference products
# ---------------------------------------------------------------------------

def _slice_width(inner_dim):
    # Slice products summed over the inner dimension must stay exact in
    # float64: 2*(w+1) + ceil(log2 K) <= 53.
    return min(20, (53 - max(1, inner_dim - 1).bit_length()) // 2 - 1)


def _bit_slices(X, width):
    """Error-free decomposition X = sum_v slice_v * 2**grid_v where each
    slice is integer-valued with |slice| <= 2**width, via Rump-style
    extraction on an absolute power-of-two grid."""
    finite = np.isfinite(X)
    if not finite.all():
        raise ValueError("reference product requires finite inputs")
    peak = float(np.max(np.abs(X))) if X.size else 0.0
    if peak == 0.0:
        return [], 0
    _, beta = math.frexp(peak)  # |X| <= peak < 2**beta
    slices = []
    residual = X.astype(np.float64, copy=True)
    v = 0
    while np.any(residual != 0.0):
        if v > 2200 // width:
            raise AssertionError("bit-slice extraction failed to terminate")
        grid = beta - (v + 1) * width
        # 1.5 * 2**(grid+52) keeps sigma + residual inside one binade, so
        # the extracted part is always a multiple of 2**grid.
        sigma = math.ldexp(1.5, grid + 52)
        high = (sigma + residual) - sigma  # multiple of 2**grid, exact
        residual = residual - high
        ints = np.ldexp(high, -grid)
        if np.any(ints != 0.0):
            slices.append((grid, ints))
        v += 1
    return slices, beta


def _int_pow2_to_float(n, e):
    if n == 0:
        return 0.0
    try:
        if e >= 0:
            return float(n << e)
        return n / (1 << -e)  # correctly rounded by int.__truediv__
    except OverflowError:
        return math.inf if n > 0 else -math.inf


_vec_round = np.frompyfunc(_int_pow2_to_float, 2, 1)


def _matmul_exact(A, B):
    """Exact A @ B for float64 inputs, rounded to nearest float64 once."""
    M, K = A.shape
    K2, N = B.shape
    if K != K2:
        raise ValueError("shape mismatch")
    width = _slice_width(K)
    slices_a, _ = _bit_slices(A, width)
    slices_b, _ = _bit_slices(B, width)
    if not slices_a or not slices_b:
        return np.zeros((M, N))
    # Exact integer matmuls per slice pair; pairs sharing a grid exponent
    # accumulate in int64 (products < 2**(2w+2), sums stay < 2**63).
    diagonals = {}
    for ga, Ia in slices_a:
        for gb, Ib in slices_b:
            prod = (Ia @ Ib).astype(np.int64)
            key = ga + gb
            if key in diagonals:
                diagonals[key] += prod
            else:
                diagonals[key] = prod
    grids = sorted(diagonals, reverse=True)
    lowest = grids[-1]
    total = np.zeros((M, N), dtype=object)
    for g in grids:
        total += diagonals[g].astype(object) << (g - lowest)
    return _vec_round(total, lowest).astype(np.float64)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLITTER = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _matmul_dd(A, B):
    """Compensated (double-double) product: >= twice working precision."""
    M, K = A.shape
    N = B.shape[1]
    hi = np.zeros((M, N))
    lo = np.zeros((M, N))
    for t in range(K):
        p, pe = _two_prod(A[:, t : t + 1], B[t : t + 1, :])
        hi, se = _two_sum(hi, p)
        lo += pe + se
    return hi + lo


def reference_product(A, B, mode="exact"):
    """High-accuracy product of float matrices; "exact" computes the true
    product in integer arithmetic and rounds each entry once, "dd" uses
    compensated arithmetic."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if mode == "exact":
        return _matmul_exact(A, B)
    if mode == "dd":
        if not (np.isfinite(A).all() and np.isfinite(B).all()):
            raise ValueError("reference product requires finite inputs")
        return _matmul_dd(A, B)
    raise ValueError(f"unknown reference mode {mode!r}")


# ---------------------------------------------------------------------------
# Runner and reports
# ---------------------------------------------------------------------------


def _scheme_runner(scheme_id, search_dirs=None):
    if scheme_id == "classical":
        return classical_multiply
    bundle = resolve(scheme_id, search_dirs)
    if bundle.alt is not None:
        return lambda A, B: multiply_alt(bundle, A, B)
    return lambda A, B: multiply(bundle, A, B)


def run_bench(cfg, search_dirs=None, on_progress=None):
    """Run every (scheme, size, trial) cell; records come back in canonical
    sorted order so the CSV is independent of execution order."""
    runners = {sid: _scheme_runner(sid, search_dirs) for sid in cfg.schemes}
    records = []
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            A = random_matrix(n, cell_entropy(cfg.seed, n, trial, 0), cfg.distribution)
            B = random_matrix(n, cell_entropy(cfg.seed, n, trial, 1), cfg.distribution)
            ref = reference_product(A, B, mode=cfg.reference)
            for sid in cfg.schemes:
                start = time.perf_counter()
                C = runners[sid](A, B)
                elapsed = time.perf_counter() - start
                max_err = float(np.max(np.abs(C - ref)))
                records.append(
                    BenchRecord(sid, n, cfg.seed, trial, max_err, elapsed)
                )
                if on_progress is not None:
                    on_progress(records[-1])
    records.sort(key=lambda rec: (rec.scheme, rec.n, rec.trial))
    return records


def median_errors(records):
    """{scheme: [(n, median max_err), ...]} sorted by n."""
    cells = {}
    for rec in records:
        cells.setdefault((rec.scheme, rec.n), []).append(rec.max_err)
    out = {}
    for (scheme, n), errs in sorted(cells.items()):
        out.setdefault(scheme, []).append((n, float(np.median(errs))))
    return out


_CSV_HEADER = "scheme,n,seed,trial,max_err,elapsed"


def format_csv(records):
    lines = [_CSV_HEADER]
    for rec in records:
        lines.append(
            f"{rec.scheme},{rec.n},{rec.seed},{rec.trial},"
            f"{rec.max_err:.16e},{rec.elapsed:.6e}"
        )
    return "\n".join(lines) + "\n"


def write_csv(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_csv(records))


def write_json(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([asdict(rec) for rec in records], fh, indent=2)
        fh.write("\n")


def write_plot_script(records, path):
    """Self-contained gnuplot script: log-log median error vs size."""
    med = median_errors(records)
    lines = [
        "set logscale xy",
        "set xlabel 'matrix dimension'",
        "set ylabel 'max-norm error'",
        "set key top left",
        "set grid",
    ]
    for idx, (scheme, pts) in enumerate(med.items()):
        lines.append(f"$scheme{idx} << EOD")
        lines.extend(f"{n} {err:.16e}" for n, err in pts)
        lines.append("EOD")
    plot_parts = [
        f"$scheme{idx} using 1:2 with linespoints title '{scheme}'"
        for idx, scheme in enumerate(med)
    ]
    lines.append("plot " + ", \\\n     ".join(plot_parts))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def render_figure(records, path, title=None):
    """Render the median error curves to an image file via matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    med = median_errors(records)
    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    markers = ["o", "s", "^", "v", "D", "x", "*", "+"]
    for idx, (scheme, pts) in enumerate(med.items()):
        ns = [n for n, _ in pts]
        errs = [e for _, e in pts]
        ax.loglog(ns, errs, marker=markers[idx % len(markers)], label=scheme)
    ax.set_xlabel("square matrix dimension")
    ax.set_ylabel("max-norm error vs exact product")
    ax.set_title(title or "numerical accuracy vs size")
    ax.grid(True, which="both", linewidth=0.3, alpha=0.6)
    ax.legend()
    sizes = sorted({n for pts in med.values() for n, _ in pts})
    ax.set_xticks(sizes)
    ax.set_xticklabels([str(n) for n in sizes], rotation=45)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
