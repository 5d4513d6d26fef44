import numpy as np
import pytest

from fmmlab.catalog import BUILTIN_IDS, CatalogError, builtin, load_bundle_dir, resolve
from fmmlab.dyadic import Dyadic, ZERO
from fmmlab.lrp import apply_one_level, as_dyadic_matrix, validate_scheme
from fmmlab.slp import count_ops, save_slp, verify_slp
from fmmlab.sms import save_sms
from tests.conftest import exact_equal


def test_builtin_ids_all_load():
    for bundle_id in BUILTIN_IDS:
        bundle = builtin(bundle_id)
        assert bundle.id == bundle_id
        assert validate_scheme(bundle.scheme).valid


def test_unknown_id():
    with pytest.raises(CatalogError):
        builtin("nope")
    with pytest.raises(CatalogError):
        resolve("nope")


def test_acc_shape_and_p_entries(acc_bundle):
    s = acc_bundle.scheme
    assert (s.m, s.k, s.n, s.r) == (4, 4, 4, 48)
    eighth = Dyadic(1, -3)
    for v in s.P.reshape(-1):
        assert v == ZERO or abs(v) == eighth


def test_classic_matches_displayed_matrices(classic_bundle):
    s = classic_bundle.scheme
    assert (s.m, s.k, s.n, s.r) == (2, 2, 2, 8)
    L = [[1,0,0,0],[0,1,0,0],[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1],[0,0,1,0],[0,0,0,1]]
    R = [[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1],[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1]]
    P = [[1,1,0,0,0,0,0,0],[0,0,1,1,0,0,0,0],[0,0,0,0,1,1,0,0],[0,0,0,0,0,0,1,1]]
    assert exact_equal(s.L, as_dyadic_matrix(L))
    assert exact_equal(s.R, as_dyadic_matrix(R))
    assert exact_equal(s.P, as_dyadic_matrix(P))


def test_strassen_winograd_rank_seven(strassen_bundle, winograd_bundle):
    assert strassen_bundle.scheme.r == 7
    assert winograd_bundle.scheme.r == 7


def test_embedded_slps_verify(acc_bundle):
    s = acc_bundle.scheme
    assert verify_slp(acc_bundle.slp_l, s.L)
    assert verify_slp(acc_bundle.slp_r, s.R)
    assert verify_slp(acc_bundle.slp_p, s.P)
    assert not verify_slp(acc_bundle.slp_l, s.R)


def test_alt_factorization_identities(alt_bundle):
    alt = alt_bundle.alt
    s = alt_bundle.scheme
    assert alt.t == 47
    assert exact_equal(np.dot(alt.l_alt, alt.l_cob), s.L)
    assert exact_equal(np.dot(alt.r_alt, alt.r_cob), s.R)
    assert exact_equal(np.dot(alt.p_cob, alt.p_alt), s.P)


def test_alt_cob_programs_verify(alt_bundle):
    alt = alt_bundle.alt
    assert verify_slp(alt.slp_cob_l, alt.l_cob)
    assert verify_slp(alt.slp_cob_r, alt.r_cob)
    assert verify_slp(alt.slp_cob_p, alt.p_cob)
    assert verify_slp(alt.slp_core_l, alt.l_alt)
    assert verify_slp(alt.slp_core_r, alt.r_alt)
    assert verify_slp(alt.slp_core_p, alt.p_alt)


def test_alt_core_is_seven_ops(alt_bundle):
    alt = alt_bundle.alt
    total = (
        count_ops(alt.slp_core_l)
        + count_ops(alt.slp_core_r)
        + count_ops(alt.slp_core_p)
    )
    assert total.additions + total.shifts == 7
    assert total.shifts == 1


def test_bundle_without_slps(strassen_bundle):
    assert not strassen_bundle.has_slps
    with pytest.raises(CatalogError):
        strassen_bundle.slp_product(np.eye(2), np.eye(2))


def test_slp_product_matches_one_level(acc_bundle):
    rng = np.random.default_rng(11)
    A = rng.integers(-5, 6, (4, 4)).astype(object)
    B = rng.integers(-5, 6, (4, 4)).astype(object)
    assert exact_equal(
        acc_bundle.slp_product(A, B), apply_one_level(acc_bundle.scheme, A, B)
    )


def _export_bundle(bundle, root):
    target = root / bundle.id
    target.mkdir(parents=True)
    save_sms(bundle.scheme.L, target / "L.sms")
    save_sms(bundle.scheme.R, target / "R.sms")
    save_sms(bundle.scheme.P, target / "P.sms")
    if bundle.has_slps:
        save_slp(bundle.slp_l, target / "L.slp")
        save_slp(bundle.slp_r, target / "R.slp")
        save_slp(bundle.slp_had, target / "had.slp")
        save_slp(bundle.slp_p, target / "P.slp")
    return target


def test_load_bundle_dir_round_trip(tmp_path, acc_bundle):
    target = _export_bundle(acc_bundle, tmp_path)
    loaded = load_bundle_dir(target)
    assert exact_equal(loaded.scheme.L, acc_bundle.scheme.L)
    assert loaded.has_slps
    assert (loaded.scheme.m, loaded.scheme.k, loaded.scheme.n) == (4, 4, 4)


def test_load_bundle_dir_rejects_corruption(tmp_path, strassen_bundle):
    target = _export_bundle(strassen_bundle, tmp_path)
    text = (target / "L.sms").read_text().replace("1 1 1", "1 1 -1", 1)
    (target / "L.sms").write_text(text)
    with pytest.raises(CatalogError):
        load_bundle_dir(target)


def test_resolve_searches_dirs(tmp_path, winograd_bundle, monkeypatch):
    target = _export_bundle(winograd_bundle, tmp_path)
    renamed = target.rename(tmp_path / "local-scheme")
    loaded = resolve("local-scheme", [str(tmp_path)])
    assert loaded.scheme.r == 7
    monkeypatch.setenv("FMM_SCHEME_DIR", str(tmp_path))
    assert resolve("local-scheme").scheme.r == 7
