import json
import math

import numpy as np
import pytest

from blockrip.bases import BlockPartition
from blockrip.harness import (PHASE_HEADER, ConfigError, ExperimentConfig, PhaseGrid, circulant_basis_adjoint,
                              circulant_basis_apply, config_from_dict, export_gnuplot, load_config,
                              preset_config, read_phase_csv, results_to_csv, run_circulant_demo,
                              run_coherence_mc, run_phase_transition, run_ric_compare, write_results)
from blockrip.bases import circulant_basis


def small_config(**kw):
    base = dict(kind="PhaseTransition", partition={"n_blocks": 2, "block_len": 8},
                basis_label="Fourier", operator_kind="DBD", n_trials=4, master_seed=3,
                S_range=[1, 4], M_range={"start": 2, "stop": 8, "step": 3})
    base.update(kw)
    return config_from_dict(base)


def test_config_parsing():
    c = small_config()
    assert c.M_range == (2, 5, 8)
    assert c.partition == BlockPartition(2, 8)
    assert config_from_dict(c.to_dict()) == c
    with pytest.raises(ConfigError, match="unknown"):
        small_config(colour="blue")
    with pytest.raises(ConfigError):
        small_config(partition={"n_blocks": 2, "block_len": 8, "n_total": 17})
    with pytest.raises(ConfigError):
        small_config(M_range=[9])
    with pytest.raises(ConfigError):
        small_config(n_trials=0)
    with pytest.raises(ConfigError):
        small_config(basis_label="Wavelet")
    with pytest.raises(ConfigError):
        config_from_dict({"kind": "PhaseTransition"})


def test_load_config_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    p.write_text(json.dumps(small_config().to_dict()))
    assert load_config(p) == small_config()


def test_presets():
    r = preset_config("reduced", "Generic", "RBD")
    assert (r.partition.n_blocks, r.partition.block_len, r.n_trials) == (4, 32, 20)
    full = preset_config("full")
    assert full.partition.n_total == 1000 and max(full.M_range) == 100
    with pytest.raises(ConfigError):
        preset_config("huge")


def test_phase_grid_cells_and_fractions():
    c = small_config()
    g = run_phase_transition(c)
    assert set(g.cells) == {(S, M) for S in c.S_range for M in c.M_range}
    for v in g.cells.values():
        assert 0 <= v <= 1 and v * c.n_trials == pytest.approx(round(v * c.n_trials))


def test_full_rank_single_spike_always_recovered():
    c = small_config(basis_label="Canonical", S_range=[1], M_range=[8])
    assert run_phase_transition(c).cells[(1, 8)] == 1.0


def test_grossly_underdetermined_fails():
    c = small_config(S_range=[14], M_range=[1])
    assert run_phase_transition(c).cells[(14, 1)] == 0.0


def test_determinism_across_threads(tmp_path):
    c = small_config(basis_label="Generic", operator_kind="RBD")
    a = write_results(run_phase_transition(c, threads=1), tmp_path / "a.csv").read_bytes()
    b = write_results(run_phase_transition(c, threads=3), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_csv_round_trip_and_schema(tmp_path):
    c = small_config()
    g = PhaseGrid({(1, 2): 0.25, (3, 2): 1.0}, c)
    path = write_results(g, tmp_path / "sub" / "g.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(PHASE_HEADER)
    assert lines[1] == "1,2,2,8,DBD,Fourier,4,0.25,3"
    assert len(lines) == 3
    assert read_phase_csv(path) == g.cells
    assert results_to_csv(PhaseGrid({}, c)) == ",".join(PHASE_HEADER) + "\n"


def test_float_formatting_is_lossless():
    text = results_to_csv({"x": 0.1, "y": 1 / 3})
    vals = text.splitlines()[1].split(",")
    assert float(vals[0]) == 0.1 and float(vals[1]) == 1 / 3


def test_write_error_has_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        write_results({"a": 1}, blocker / "out.csv")


def test_gnuplot_export(tmp_path):
    c = small_config()
    g = PhaseGrid({(1, 2): 0.5, (1, 5): 1.0, (4, 2): 0.0}, c)
    path = write_results(g, tmp_path / "g.csv")
    text = export_gnuplot(path, tmp_path / "g.dat")
    assert text.splitlines() == ["2 2 5", "1 0.5 1", "4 0 NaN"]
    assert (tmp_path / "g.dat").read_text() == text


def test_coherence_mc_single_block():
    rec = run_coherence_mc(16, 1, 20, seed=0)
    assert rec["gamma_max"] == pytest.approx(1.0, abs=1e-12)
    assert rec["gamma_min"] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        run_coherence_mc(16, 8, 5, seed=0)


def test_ric_compare_isometric_blocks():
    rows = run_ric_compare(8, 2, 4, 2, 4, 3, seed=0, orthogonal_blocks=True)
    assert len(rows) == 6
    for r in rows:
        assert r["max_delta"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("P,J", [(3, 2), (4, 4), (6, 1)])
def test_circulant_apply_matches_dense(P, J, rng):
    T = circulant_basis(P, J).entries
    b = rng.standard_normal((P * J, 2)) + 1j * rng.standard_normal((P * J, 2))
    np.testing.assert_allclose(circulant_basis_apply(b, P, J), T @ b, atol=1e-13)
    np.testing.assert_allclose(circulant_basis_adjoint(b, P, J), T.conj().T @ b, atol=1e-13)


def test_circulant_demo_small_and_zero():
    rec = run_circulant_demo(3, 2, 1, seed=0, n_trials=3)
    assert rec["identity_gap"] <= 1e-12 and rec["representation_gap"] <= 1e-12
    zero = run_circulant_demo(5, 3, 0, seed=1, n_trials=2)
    assert zero["success_fraction"] == 1.0 and zero["max_rel_error"] == 0.0
    with pytest.raises(ValueError):
        run_circulant_demo(2, 3, 1, seed=0)


def test_monotone_trend_in_M():
    # smoothed over M-windows of 3, success does not decrease with M
    c = small_config(basis_label="Fourier", n_trials=20, S_range=[3], M_range=list(range(1, 9)))
    g = run_phase_transition(c)
    vals = np.array([g.cells[(3, M)] for M in c.M_range])
    smooth = np.convolve(vals, np.ones(3) / 3, mode="valid")
    assert np.all(np.diff(smooth) >= -0.1)
    assert smooth[-1] >= smooth[0]
