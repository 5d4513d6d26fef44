"""Embedded scheme bundles and external bundle loading.

The big coefficient matrices ship as SMS text resources rather than code
literals so they stay reviewable and diffable; the hand-optimized linear
straight-line programs ship as .slp resources.  Everything embedded is
re-verified when first loaded (scheme validity, program-vs-matrix
equality, factorization identities), which is the firewall against
transcription errors in the data files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import slp as slp_mod
from .lrp import LrpScheme, validate_scheme
from .sms import load_sms, loads_sms

__all__ = [
    "AltBasisScheme",
    "SchemeBundle",
    "CatalogError",
    "BUILTIN_IDS",
    "builtin",
    "load_bundle_dir",
    "resolve",
    "scheme_search_dirs",
]

BUILTIN_IDS = ("classic-2x2x2", "strassen", "winograd", "acc-4x4x4", "acc-4x4x4-alt")

SCHEME_DIR_ENV = "FMM_SCHEME_DIR"


class CatalogError(ValueError):
    pass


@dataclass(eq=False)
class AltBasisScheme:
    """Sparse-core factorization L = L_alt @ L_cob, R = R_alt @ R_cob,
    P = P_cob @ P_alt with inner dimension t."""

    base: str
    t: int
    l_alt: np.ndarray  # r x t
    r_alt: np.ndarray  # r x t
    p_alt: np.ndarray  # t x r
    l_cob: np.ndarray  # t x (m*k)
    r_cob: np.ndarray  # t x (k*n)
    p_cob: np.ndarray  # (m*n) x t
    slp_cob_l: slp_mod.SlpProgram | None = None
    slp_cob_r: slp_mod.SlpProgram | None = None
    slp_cob_p: slp_mod.SlpProgram | None = None
    slp_core_l: slp_mod.SlpProgram | None = None
    slp_core_r: slp_mod.SlpProgram | None = None
    slp_core_p: slp_mod.SlpProgram | None = None


@dataclass(eq=False)
class SchemeBundle:
    id: str
    scheme: LrpScheme
    slp_l: slp_mod.SlpProgram | None = None
    slp_r: slp_mod.SlpProgram | None = None
    slp_had: slp_mod.SlpProgram | None = None
    slp_p: slp_mod.SlpProgram | None = None
    alt: AltBasisScheme | None = None

    @property
    def has_slps(self):
        return None not in (self.slp_l, self.slp_r, self.slp_had, self.slp_p)

    def slp_product(self, A, B, product=None):
        """Run the four-stage straight-line pipeline on one block level.

        A and B are matrices of scalars (floats or Dyadic); the Hadamard
        stage multiplies scalars unless `product` overrides it.
        """
        if not self.has_slps:
            raise CatalogError(f"bundle {self.id} has no straight-line programs")
        s = self.scheme
        A = np.asarray(A)
        B = np.asarray(B)
        if A.shape != (s.m, s.k) or B.shape != (s.k, s.n):
            raise ValueError("operand shapes do not match the scheme")
        a_bind = dict(zip(self.slp_l.inputs, A.reshape(-1)))
        b_bind = dict(zip(self.slp_r.inputs, B.reshape(-1)))
        l_out = slp_mod.eval_slp(self.slp_l, a_bind)
        r_out = slp_mod.eval_slp(self.slp_r, b_bind)
        kwargs = {} if product is None else {"product": product}
        p_out = slp_mod.eval_slp(self.slp_had, {**l_out, **r_out}, **kwargs)
        c_out = slp_mod.eval_slp(self.slp_p, p_out)
        flat = np.empty(s.m * s.n, dtype=object)
        for idx, name in enumerate(self.slp_p.outputs):
            flat[idx] = c_out[name]
        return flat.reshape(s.m, s.n)


# ---------------------------------------------------------------------------
# Loading and verification
# ---------------------------------------------------------------------------


def _exact_matmul(A, B):
    return np.dot(A, B)


def _matrices_equal(A, B):
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    return A.shape == B.shape and all(
        a == b for a, b in zip(A.reshape(-1), B.reshape(-1))
    )


def _verify_bundle(bundle):
    report = validate_scheme(bundle.scheme)
    if not report.valid:
        raise CatalogError(f"scheme {bundle.id} failed validation:\n{report}")
    s = bundle.scheme
    pairs = [
        (bundle.slp_l, s.L, "L"),
        (bundle.slp_r, s.R, "R"),
        (bundle.slp_p, s.P, "P"),
    ]
    for program, matrix, name in pairs:
        if program is not None and not slp_mod.verify_slp(program, matrix):
            raise CatalogError(f"bundle {bundle.id}: {name} program does not match matrix")
    if bundle.slp_had is not None:
        if not all(
            isinstance(ins, slp_mod.Product) for ins in bundle.slp_had.instructions
        ):
            raise CatalogError(f"bundle {bundle.id}: product stage is not pure products")
    alt = bundle.alt
    if alt is not None:
        checks = [
            (_exact_matmul(alt.l_alt, alt.l_cob), s.L, "L_alt @ L_cob != L"),
            (_exact_matmul(alt.r_alt, alt.r_cob), s.R, "R_alt @ R_cob != R"),
            (_exact_matmul(alt.p_cob, alt.p_alt), s.P, "P_cob @ P_alt != P"),
        ]
        for got, want, message in checks:
            if not _matrices_equal(got, want):
                raise CatalogError(f"bundle {bundle.id}: {message}")
        for program, matrix, name in [
            (alt.slp_cob_l, alt.l_cob, "cob L"),
            (alt.slp_cob_r, alt.r_cob, "cob R"),
            (alt.slp_cob_p, alt.p_cob, "cob P"),
        ]:
            if program is not None and not slp_mod.verify_slp(program, matrix):
                raise CatalogError(f"bundle {bundle.id}: {name} program does not match matrix")
    return bundle


def _dims_from_shapes(L, R, P):
    """Recover (m, k, n) from L: r x mk, R: r x kn, P: mn x r."""
    a, b, c = L.shape[1], R.shape[1], P.shape[0]
    root = round((a * b * c) ** 0.5)
    while root * root < a * b * c:
        root += 1
    if root * root != a * b * c or root % b or root % c or root % a:
        raise CatalogError(f"cannot infer operand shapes from {a}, {b}, {c}")
    return root // b, root // c, root // a


def _bundle_from_matrices(bundle_id, L, R, P, **kwargs):
    if L.shape[0] != R.shape[0] or P.shape[1] != L.shape[0]:
        raise CatalogError("L, R, P rank dimensions disagree")
    m, k, n = _dims_from_shapes(L, R, P)
    scheme = LrpScheme(id=bundle_id, m=m, k=k, n=n, r=L.shape[0], L=L, R=R, P=P)
    return SchemeBundle(id=bundle_id, scheme=scheme, **kwargs)


def _data_root():
    return resources.files(__package__) / "data"


def _read_resource(bundle_id, name):
    return (_data_root() / bundle_id / name).read_text(encoding="utf-8")


def _load_slp_resource(bundle_id, name):
    return slp_mod.parse_slp(_read_resource(bundle_id, name))


def _names(prefix, count):
    return [f"{prefix}{i}" for i in range(count)]


def _load_builtin(bundle_id):
    base_id = "acc-4x4x4" if bundle_id == "acc-4x4x4-alt" else bundle_id
    L = loads_sms(_read_resource(base_id, "L.sms"))
    R = loads_sms(_read_resource(base_id, "R.sms"))
    P = loads_sms(_read_resource(base_id, "P.sms"))
    kwargs = {}
    if base_id == "acc-4x4x4":
        kwargs = dict(
            slp_l=_load_slp_resource(base_id, "L.slp"),
            slp_r=_load_slp_resource(base_id, "R.slp"),
            slp_had=_load_slp_resource(base_id, "had.slp"),
            slp_p=_load_slp_resource(base_id, "P.slp"),
        )
    if bundle_id == "acc-4x4x4-alt":
        l_alt = loads_sms(_read_resource(bundle_id, "L_alt.sms"))
        r_alt = loads_sms(_read_resource(bundle_id, "R_alt.sms"))
        p_alt = loads_sms(_read_resource(bundle_id, "P_alt.sms"))
        l_cob = loads_sms(_read_resource(bundle_id, "L_cob.sms"))
        r_cob = loads_sms(_read_resource(bundle_id, "R_cob.sms"))
        p_cob = loads_sms(_read_resource(bundle_id, "P_cob.sms"))
        t = l_alt.shape[1]
        r = l_alt.shape[0]
        kwargs["alt"] = AltBasisScheme(
            base=base_id,
            t=t,
            l_alt=l_alt,
            r_alt=r_alt,
            p_alt=p_alt,
            l_cob=l_cob,
            r_cob=r_cob,
            p_cob=p_cob,
            slp_cob_l=_load_slp_resource(bundle_id, "cob_L.slp"),
            slp_cob_r=_load_slp_resource(bundle_id, "cob_R.slp"),
            slp_cob_p=_load_slp_resource(bundle_id, "cob_P.slp"),
            slp_core_l=slp_mod.naive_slp(l_alt, _names("t", t), _names("l", r)),
            slp_core_r=slp_mod.naive_slp(r_alt, _names("t", t), _names("r", r)),
            slp_core_p=slp_mod.naive_slp(p_alt, _names("p", r), _names("w", t)),
        )
    return _bundle_from_matrices(bundle_id, L, R, P, **kwargs)


@lru_cache(maxsize=None)
def builtin(bundle_id):
    """Load and verify one of the embedded bundles."""
    if bundle_id not in BUILTIN_IDS:
        raise CatalogError(
            f"unknown builtin scheme {bundle_id!r}; available: {', '.join(BUILTIN_IDS)}"
        )
    return _verify_bundle(_load_builtin(bundle_id))


def load_bundle_dir(path):
    """Load an external bundle from a directory of SMS/.slp files.

    Required: L.sms, R.sms, P.sms.  Optional: L.slp, R.slp, had.slp, P.slp
    and an alt/ subdirectory mirroring the builtin alternative-basis layout.
    The bundle is verified exactly like an embedded one.
    """
    path = Path(path)
    if not path.is_dir():
        raise CatalogError(f"{path} is not a directory")
    L = load_sms(path / "L.sms")
    R = load_sms(path / "R.sms")
    P = load_sms(path / "P.sms")
    kwargs = {}
    for field, name in [
        ("slp_l", "L.slp"),
        ("slp_r", "R.slp"),
        ("slp_had", "had.slp"),
        ("slp_p", "P.slp"),
    ]:
        if (path / name).exists():
            kwargs[field] = slp_mod.load_slp(path / name)
    alt_dir = path / "alt"
    if alt_dir.is_dir():
        mats = {
            name: load_sms(alt_dir / f"{name}.sms")
            for name in ("L_alt", "R_alt", "P_alt", "L_cob", "R_cob", "P_cob")
        }
        slps = {}
        for field, name in [
            ("slp_cob_l", "cob_L.slp"),
            ("slp_cob_r", "cob_R.slp"),
            ("slp_cob_p", "cob_P.slp"),
        ]:
            if (alt_dir / name).exists():
                slps[field] = slp_mod.load_slp(alt_dir / name)
        kwargs["alt"] = AltBasisScheme(
            base=path.name,
            t=mats["L_alt"].shape[1],
            l_alt=mats["L_alt"],
            r_alt=mats["R_alt"],
            p_alt=mats["P_alt"],
            l_cob=mats["L_cob"],
            r_cob=mats["R_cob"],
            p_cob=mats["P_cob"],
            **slps,
        )
    return _verify_bundle(_bundle_from_matrices(path.name, L, R, P, **kwargs))


def scheme_search_dirs(extra=None):
    dirs = list(extra) if extra else []
    env = os.environ.get(SCHEME_DIR_ENV)
    if env:
        dirs.extend(env.split(os.pathsep))
    return dirs


def resolve(bundle_id, search_dirs=None):
    """Resolve a bundle id: builtins first, then --scheme-dir directories."""
    if bundle_id in BUILTIN_IDS:
        return builtin(bundle_id)
    for root in scheme_search_dirs(search_dirs):
        candidate = Path(root) / bundle_id
        if candidate.is_dir():
            return load_bundle_dir(candidate)
    raise CatalogError(f"cannot resolve scheme {bundle_id!r}")
