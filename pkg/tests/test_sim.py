import io

import numpy as np
import pytest
import yaml

from coderx.codes import build_rm_code, hamming_7_4, parse_alist
from coderx.sim import (CSV_HEADER, BerRecord, CodeSpec, ConfigError, SimConfig, SweepContext, cli_main,
                        config_from_dict, config_to_dict, emit_csv, generate_frame, load_config, parse_csv,
                        run_ber_sweep)

SMALL = dict(code=CodeSpec(name="ldpc-96-48"), snr_db=(14.0, 20.0), frames=3)


def small_config(**kw):
    return SimConfig(**{**SMALL, **kw})


# ---------------------------------------------------------------- configuration

def test_defaults_validate():
    cfg = SimConfig()
    cfg.validate()
    assert cfg.num_users == 3 and cfg.contamination == (2,)


@pytest.mark.parametrize("doc, field", [
    ({"antennas": 0}, "antennas"),
    ({"gains": [1.0, -0.3, 0.7]}, "gains"),
    ({"contamination": [1]}, "contamination"),
    ({"permutation_seeds": [1, 2]}, "permutation_seeds"),
    ({"receivers": ["mmse"]}, "receivers"),
    ({"frames": 0}, "frames"),
    ({"alpha": 0}, "alpha"),
    ({"formulation": "tight"}, "formulation"),
    ({"code": {"name": "ldpc-1-1"}}, "code.name"),
    ({"code": {"family": "rm", "r": 3, "m": 3}}, "code.r"),
    ({"solver": {"tol": 1}}, "solver.tol"),
    ({"snr": [10]}, "snr"),
])
def test_invalid_configs_name_the_field(doc, field):
    with pytest.raises(ConfigError) as err:
        config_from_dict(doc)
    assert field in [k for k, _ in err.value.problems]


def test_config_round_trip_and_yaml_floats(tmp_path):
    cfg = small_config(seed=9, contamination=(2, 3))
    assert config_from_dict(config_to_dict(cfg)) == cfg
    p = tmp_path / "c.yaml"
    p.write_text("snr_db: [10]\nsolver: {eps_abs: 1e-6}\ncode: {name: ldpc-96-48}\n")
    loaded = load_config(p)
    assert loaded.eps_abs == 1e-6 and loaded.snr_db == (10.0,)


def test_context_rejects_odd_length_and_short_frames():
    with pytest.raises(ConfigError):
        SweepContext.build(SimConfig(code=CodeSpec(family="hamming")))
    with pytest.raises(ConfigError):
        SweepContext.build(small_config(covariance_snapshots=49))


# ---------------------------------------------------------------- frames and sweeps

def test_frames_share_random_numbers_across_permutation_sets():
    a = generate_frame(SweepContext.build(small_config(permutation_seeds=(568, 193, 625))), 1, 2)
    b = generate_frame(SweepContext.build(small_config(permutation_seeds=(568, 568, 568))), 1, 2)
    for x, y in zip(a.messages, b.messages):
        assert np.array_equal(x, y)
    assert np.array_equal(a.estimate.H_hat, b.estimate.H_hat)
    assert not np.array_equal(a.snapshots, b.snapshots)


def test_noiseless_single_user_dlmv_is_error_free():
    cfg = SimConfig(gains=(1.0,), contamination=(), permutation_seeds=(568,), receivers=("dlmv",),
                    snr_db=(60.0,), frames=50, estimation_noise_factor=0.0)
    (rec,) = run_ber_sweep(cfg)
    assert rec.bits == 50 * 192 and rec.bit_errors == 0 and rec.ber == 0.0


def test_sweep_is_deterministic_and_parallel_safe():
    cfg = small_config()
    serial = run_ber_sweep(cfg)
    assert serial == run_ber_sweep(cfg)
    assert serial == run_ber_sweep(cfg, workers=2)
    assert [r.receiver for r in serial] == ["dlmv", "dlmv", "qp", "qp", "joint-qp", "joint-qp"]
    assert all(r.bits == 3 * 48 for r in serial)


def test_seed_changes_results():
    a = run_ber_sweep(small_config(receivers=("dlmv",), frames=20, snr_db=(20.0,)))
    b = run_ber_sweep(small_config(receivers=("dlmv",), frames=20, snr_db=(20.0,), seed=2))
    assert a != b


def test_ber_falls_with_snr_without_contamination():
    cfg = small_config(contamination=(), receivers=("dlmv", "qp"), snr_db=(-16.0, -12.0, -8.0), frames=30)
    recs = run_ber_sweep(cfg)
    for rx in ("dlmv", "qp"):
        ber = [r.ber for r in recs if r.receiver == rx]
        assert ber[0] > 0 and all(b1 <= b0 for b0, b1 in zip(ber, ber[1:]))


# ---------------------------------------------------------------- CSV

def test_csv_single_record():
    text = emit_csv([BerRecord("dlmv", 14.0, 1000, 12, 10, 3)])
    lines = text.splitlines()
    assert lines == [",".join(CSV_HEADER), "dlmv,14,1000,12,10,3,0.012"]


def test_csv_round_trip_and_sorting(tmp_path):
    recs = [BerRecord("qp", 20.0, 960, 7, 5, 2), BerRecord("dlmv", 17.5, 960, 1, 5, 1),
            BerRecord("dlmv", 14.0, 960, 0, 5, 0)]
    text = emit_csv(recs, tmp_path / "out.csv")
    assert (tmp_path / "out.csv").read_text() == text
    back = parse_csv(text)
    assert [(r.receiver, r.snr_db) for r in back] == [("dlmv", 14.0), ("dlmv", 17.5), ("qp", 20.0)]
    assert sorted(back, key=lambda r: r.receiver) == sorted(recs, key=lambda r: (r.receiver, r.snr_db))
    buf = io.StringIO()
    emit_csv(recs, buf)
    assert buf.getvalue() == text


def test_ber_record_validation():
    with pytest.raises(ValueError):
        BerRecord("dlmv", 10.0, 10, 11, 1, 1)
    with pytest.raises(ValueError):
        emit_csv([])
    assert BerRecord("dlmv", 10.0, 10_000, 100, 10, 5).confidence_halfwidth() == pytest.approx(
        1.96 * np.sqrt(0.01 * 0.99 / 10_000))


# ---------------------------------------------------------------- command line

def write_config(tmp_path, **doc):
    base = {"code": {"name": "ldpc-96-48"}, "snr_db": [20], "frames": 2, "receivers": ["dlmv", "qp"]}
    p = tmp_path / "sweep.yaml"
    p.write_text(yaml.safe_dump({**base, **doc}))
    return p


def test_cli_sweep_writes_csv(tmp_path):
    out = tmp_path / "ber.csv"
    assert cli_main(["sweep", "--config", str(write_config(tmp_path)), "--out", str(out)]) == 0
    recs = parse_csv(out.read_text())
    assert [r.receiver for r in recs] == ["dlmv", "qp"] and recs[0].frames == 2
    assert cli_main(["sweep", "--config", str(write_config(tmp_path)), "--out", str(out), "--frames", "3"]) == 0
    assert parse_csv(out.read_text())[0].frames == 3


def test_cli_usage_errors(tmp_path, capsys):
    assert cli_main(["sweep", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "usage" in capsys.readouterr().err
    assert cli_main(["sweep", "--bogus"]) == 2
    assert cli_main([]) == 2


def test_cli_invalid_config_exits_nonzero(tmp_path, capsys):
    p = write_config(tmp_path, alpha=-1)
    assert cli_main(["sweep", "--config", str(p)]) == 1
    assert "alpha" in capsys.readouterr().err


def test_cli_gen_code_rm_matches_library(tmp_path):
    out = tmp_path / "rm.alist"
    assert cli_main(["gen-code", "--family", "rm", "--r", "1", "--n", "3", "--out", str(out)]) == 0
    H = parse_alist(out.read_text())
    assert H == build_rm_code(1, 3)[1]
    assert (H.n, H.dimension) == (8, 4)


def test_cli_decode(tmp_path, capsys):
    c = hamming_7_4().encoder.encode([1, 0, 1, 1])
    llr = tmp_path / "llr.txt"
    llr.write_text(" ".join(str(2.0 * (1 - 2 * int(b))) for b in c))
    assert cli_main(["decode", "--code", "hamming", "--llr", str(llr)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "".join(map(str, c)) and out[1].startswith("integral=True")


def test_cli_info(tmp_path, capsys):
    assert cli_main(["info"]) == 0
    assert "ldpc-256-192" in capsys.readouterr().out
    assert cli_main(["info", "--config", str(write_config(tmp_path))]) == 0
    assert "n=96 k=48" in capsys.readouterr().out
