import json
import struct

import numpy as np
import pytest

from tfsamp import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    load_config,
    read_mask,
    read_signal,
    write_mask,
    write_report,
    write_signal,
)
from tfsamp.config import SCHEMA_VERSION
from tfsamp.reports import (
    SIGNAL_MAGIC,
    SIGNAL_VERSION,
    mask_to_rle,
    rle_to_mask,
    write_grid_csv,
    write_rows_csv,
)

META = "[meta]\nschema_version = 1\n"


def _load(tmp_path, body):
    p = tmp_path / "exp.ini"
    p.write_text(META + body, encoding="utf-8")
    return load_config(str(p))


# ---------------------------------------------------------------- config


def test_full_ini_round_trip(tmp_path):
    cfg = _load(
        tmp_path,
        """
[experiment]
L = 48
gamma = 0.6
r = 77
nu = 0.25
trials = 11
master_seed = 99
cell_px = 5

[region]
kind = disk
center_m = 10
center_n = 30
radius_px = 9.5

[window]
kind = gaussian

[reconstruct]
epsilon_targets = 0.5, 0.25 0.125
distinct = off

[montecarlo]
nu_grid = 0.1, 0.2
r_grid = 10 20, 30
delta = 0.125

[witness]
epsilon = 0.4
eta = 2.25
M = 3

[tolerances]
cg_tol = 1e-10
eig_residual = 1e-6
""",
    )
    assert (cfg.L, cfg.gamma, cfg.r, cfg.nu) == (48, 0.6, 77, 0.25)
    assert (cfg.trials, cfg.master_seed, cfg.cell_px) == (11, 99, 5)
    assert cfg.region_kind == "disk"
    assert cfg.region_center == (10, 30)
    assert cfg.region_radius_px == 9.5
    assert cfg.window_kind == "gaussian" and cfg.window_path is None
    # list values split on commas and whitespace alike
    assert cfg.epsilon_targets == [0.5, 0.25, 0.125]
    assert cfg.distinct is False
    assert cfg.nu_grid == [0.1, 0.2]
    assert cfg.r_grid == [10, 20, 30]
    assert cfg.delta == 0.125
    assert (cfg.witness_epsilon, cfg.witness_eta, cfg.witness_M) == (0.4, 2.25, 3)
    assert (cfg.cg_tol, cfg.eig_residual) == (1e-10, 1e-6)


def test_minimal_ini_gets_defaults(tmp_path):
    cfg = _load(tmp_path, "")
    assert cfg.L == 480 and cfg.gamma == 0.5 and cfg.r == 300 and cfg.nu == 0.3
    assert cfg.trials == 2000 and cfg.master_seed == 20260816
    assert cfg.region_kind == "disk"
    assert cfg.region_center == (240, 240)  # resolved to L//2
    assert cfg.region_radius_px == 120.0  # resolved to L/4
    assert cfg.window_kind == "gaussian"
    assert cfg.epsilon_targets == [0.1, 0.03, 1e-4, 1e-8]
    assert cfg.distinct is True
    assert cfg.nu_grid == [0.2, 0.3, 0.5]
    assert cfg.r_grid == [250, 1000, 4000]
    assert cfg.delta == 0.05
    assert cfg.witness_epsilon == 0.2 and cfg.witness_eta == 2.0 and cfg.witness_M is None
    assert cfg.cg_tol == 1e-12 and cfg.eig_residual == 1e-8
    assert cfg.cell_px is None


def test_center_and_radius_defaults_track_L(tmp_path):
    cfg = _load(tmp_path, "[experiment]\nL = 48\n")
    assert cfg.region_center == (24, 24)
    assert cfg.region_radius_px == 12.0


def test_center_requires_both_coordinates(tmp_path):
    with pytest.raises(ConfigError, match=r"region\.center_n: missing required key"):
        _load(tmp_path, "[region]\ncenter_m = 10\n")


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="config file not found"):
        load_config(str(tmp_path / "nope.ini"))


def test_missing_meta_section(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text("[experiment]\nL = 16\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="meta.schema_version: expected 1, got None"):
        load_config(str(p))


def test_wrong_schema_version(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text("[meta]\nschema_version = 2\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="expected 1, got 2"):
        load_config(str(p))
    assert SCHEMA_VERSION == 1


def test_meta_section_without_version_key(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text("[meta]\nowner = me\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="meta.schema_version: missing required key"):
        load_config(str(p))


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("[experiment]\nL = banana\n", r"experiment\.L: must be an integer \(got 'banana'\)"),
        ("[experiment]\ngamma = much\n", r"experiment\.gamma: must be a real number"),
        ("[montecarlo]\nr_grid = 1, two\n", r"montecarlo\.r_grid"),
        ("[reconstruct]\ndistinct = maybe\n", r"reconstruct\.distinct: must be a boolean"),
        ("[witness]\nM = 2.5\n", r"witness\.M: must be an integer"),
    ],
)
def test_conversion_diagnostics_name_the_key(tmp_path, body, fragment):
    with pytest.raises(ConfigError, match=fragment):
        _load(tmp_path, body)


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("[experiment]\nL = 2\n", r"experiment\.L: must be an integer >= 4"),
        ("[experiment]\ngamma = 1.5\n", r"experiment\.gamma: must lie strictly between"),
        ("[experiment]\nr = 0\n", r"experiment\.r: must be >= 1"),
        ("[region]\nkind = triangle\n", r"region\.kind: must be 'disk' or 'mask'"),
        ("[region]\nkind = mask\n", r"region\.path: required when region\.kind = mask"),
        ("[region]\ncenter_m = 500\ncenter_n = 0\n", r"region\.center_m/center_n"),
        ("[window]\nkind = file\n", r"window\.path: required when window\.kind = file"),
        ("[reconstruct]\nepsilon_targets = 0.1, 2.0\n", r"every value must be in \(0, 1\)"),
        ("[montecarlo]\nnu_grid =\n", r"montecarlo\.nu_grid: must be non-empty"),
        ("[montecarlo]\ndelta = 1.0\n", r"montecarlo\.delta"),
        ("[witness]\nepsilon = 0.2\neta = 6.0\n", r"witness\.eta: must satisfy 1 < eta < 1/epsilon"),
        ("[tolerances]\ncg_tol = 0\n", r"tolerances\.cg_tol: must be positive"),
        ("[experiment]\ncell_px = 0\n", r"experiment\.cell_px: must be >= 1"),
    ],
)
def test_validation_diagnostics(tmp_path, body, fragment):
    with pytest.raises(ConfigError, match=fragment):
        _load(tmp_path, body)


@pytest.mark.parametrize("raw,expect", [("yes", True), ("on", True), ("1", True), ("TRUE", True),
                                        ("no", False), ("off", False), ("0", False), ("False", False)])
def test_bool_spellings(tmp_path, raw, expect):
    cfg = _load(tmp_path, f"[reconstruct]\ndistinct = {raw}\n")
    assert cfg.distinct is expect


def test_inline_comments_are_stripped(tmp_path):
    cfg = _load(tmp_path, "[region]\nkind = disk   ; disk | mask\n"
                          "[experiment]\ngamma = 0.25  # quarter\n")
    assert cfg.region_kind == "disk"
    assert cfg.gamma == 0.25


def test_malformed_ini_is_config_error(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text("schema_version = 1 but no section header\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="config parse error"):
        load_config(str(p))


def test_to_dict_round_trips_center_as_list():
    cfg = ExperimentConfig(L=16).validate()
    d = cfg.to_dict()
    assert d["region_center"] == [8, 8]
    assert d["L"] == 16
    # unresolved center stays None in the dict
    assert ExperimentConfig().to_dict()["region_center"] is None


# ---------------------------------------------------------------- signals


def test_signal_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    f = rng.standard_normal(33) + 1j * rng.standard_normal(33)
    path = str(tmp_path / "f.tfrs")
    write_signal(path, f)
    g = read_signal(path)
    assert g.dtype == np.complex128
    assert np.array_equal(f, g)  # float64 survives the byte round trip exactly


def test_signal_byte_layout(tmp_path):
    path = str(tmp_path / "f.tfrs")
    write_signal(path, np.array([1.0 + 2.0j, -0.5, 3.25 - 4.0j]))
    blob = open(path, "rb").read()
    assert blob[:4] == SIGNAL_MAGIC == b"TFRS"
    version, L = struct.unpack("<II", blob[4:12])
    assert version == SIGNAL_VERSION == 1 and L == 3
    assert len(blob) == 12 + 16 * 3
    inter = struct.unpack("<6d", blob[12:])
    assert inter == (1.0, 2.0, -0.5, 0.0, 3.25, -4.0)


@pytest.mark.parametrize(
    "mangle,fragment",
    [
        (lambda b: b"X" + b[1:], "not a TFRS signal file"),
        (lambda b: b[:4] + struct.pack("<I", 9) + b[8:], "unsupported signal format version 9"),
        (lambda b: b[:-5], "truncated signal"),
        (lambda b: b[:3], "not a TFRS signal file"),
    ],
)
def test_signal_corruption_detected(tmp_path, mangle, fragment):
    path = str(tmp_path / "f.tfrs")
    write_signal(path, np.arange(4.0) + 0j)
    blob = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(mangle(blob))
    with pytest.raises(ConfigError, match=fragment):
        read_signal(path)


def test_write_signal_rejects_bad_shapes(tmp_path):
    path = str(tmp_path / "f.tfrs")
    with pytest.raises(ConfigError):
        write_signal(path, np.array([], dtype=complex))
    with pytest.raises(ConfigError):
        write_signal(path, np.ones((2, 2), dtype=complex))


# ---------------------------------------------------------------- masks


def _random_mask(L, seed, p=0.5):
    return np.random.default_rng(seed).random((L, L)) < p


@pytest.mark.parametrize(
    "mask",
    [
        _random_mask(9, 3),
        _random_mask(16, 4, p=0.05),
        np.ones((5, 5), dtype=bool),
        np.zeros((7, 7), dtype=bool),
        np.eye(6, dtype=bool),
    ],
)
def test_rle_round_trip(mask):
    enc = mask_to_rle(mask)
    assert enc["L"] == mask.shape[0]
    assert enc["start"] in (0, 1)
    assert sum(enc["runs"]) == mask.size
    assert np.array_equal(rle_to_mask(enc), mask)


def test_rle_rejects_non_square():
    with pytest.raises(ConfigError):
        mask_to_rle(np.ones(9, dtype=bool))
    with pytest.raises(ConfigError):
        mask_to_rle(np.ones((3, 4), dtype=bool))


@pytest.mark.parametrize(
    "enc",
    [
        {"L": 2, "start": 0},  # runs missing
        {"L": 2, "start": 2, "runs": [4]},  # start not 0/1
        {"L": 2, "start": 0, "runs": [2, 0, 2]},  # zero-length run
        {"L": 2, "start": 0, "runs": [3]},  # sum != L*L
        {"L": 2, "start": 0, "runs": [2, "x"]},  # non-integer run
        {"L": 0, "start": 0, "runs": []},
    ],
)
def test_rle_malformed_encodings_raise(enc):
    with pytest.raises(ConfigError):
        rle_to_mask(enc)


def test_mask_file_round_trip(tmp_path):
    mask = _random_mask(12, 5)
    path = str(tmp_path / "region.json")
    write_mask(path, mask)
    assert np.array_equal(read_mask(path), mask)
    enc = json.loads(open(path, encoding="utf-8").read())
    assert set(enc) == {"L", "start", "runs"}


def test_read_mask_errors(tmp_path):
    with pytest.raises(ConfigError, match="mask file not found"):
        read_mask(str(tmp_path / "gone.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid JSON mask"):
        read_mask(str(bad))


# ---------------------------------------------------------------- reports


def _demo_report(timings):
    return RunReport(
        verb="spectrum",
        master_seed=20260816,
        config={"L": 48, "gamma": 0.5, "epsilon_targets": [0.1, 0.03]},
        sections={
            "eigs": {"N": 9, "measure": 9.5},
            "rows": [{"nu": 0.2, "freq": 0.0}, {"nu": 0.3, "freq": 0.001}],
        },
        artifacts=["eigenvalues.csv"],
        timings=timings,
    )


def test_report_files_and_keys(tmp_path):
    paths = write_report(_demo_report({"total": 0.5}), str(tmp_path))
    assert [p.rsplit("/", 1)[1] for p in paths] == ["report.txt", "report.json"]
    payload = json.loads(open(paths[1], encoding="utf-8").read())
    assert set(payload) == {"verb", "master_seed", "config", "sections", "artifacts", "timings"}
    assert payload["verb"] == "spectrum"
    assert payload["master_seed"] == 20260816
    assert payload["sections"]["rows"][1]["nu"] == 0.3
    txt = open(paths[0], encoding="utf-8").read()
    assert txt.startswith("run: spectrum\nmaster_seed: 20260816\n")
    assert "[config]" in txt and "[eigs]" in txt and "[artifacts]" in txt


def test_reports_identical_except_timings(tmp_path):
    # same run twice: only the wall-clock block may differ
    pa = write_report(_demo_report({"total": 0.51}), str(tmp_path / "a"))
    pb = write_report(_demo_report({"total": 83.2}), str(tmp_path / "b"))
    ja = json.loads(open(pa[1], encoding="utf-8").read())
    jb = json.loads(open(pb[1], encoding="utf-8").read())
    assert ja["timings"] != jb["timings"]
    ja.pop("timings"), jb.pop("timings")
    assert ja == jb
    ta = open(pa[0], encoding="utf-8").read()
    tb = open(pb[0], encoding="utf-8").read()
    assert ta != tb
    head_a, _, tail_a = ta.partition("[timings]")
    head_b, _, tail_b = tb.partition("[timings]")
    assert head_a == head_b and tail_a != tail_b


# ---------------------------------------------------------------- csv


def test_grid_csv_floats_round_trip_exactly(tmp_path):
    rng = np.random.default_rng(11)
    grid = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-8, 8, size=(4, 3))
    path = str(tmp_path / "g.csv")
    write_grid_csv(path, grid)
    rows = [line.split(",") for line in open(path, encoding="utf-8").read().splitlines()]
    back = np.array([[float(c) for c in row] for row in rows])
    assert np.array_equal(back, grid)  # .17g is lossless for float64


def test_grid_csv_bool_and_complex_cells(tmp_path):
    path = str(tmp_path / "g.csv")
    write_grid_csv(path, np.array([[True, False]]))
    assert open(path, encoding="utf-8").read() == "1,0\n"
    write_grid_csv(path, np.array([[1.5 - 2.25j]]))
    cell = open(path, encoding="utf-8").read().strip()
    assert complex(cell) == 1.5 - 2.25j


def test_grid_csv_rejects_non_2d(tmp_path):
    with pytest.raises(ConfigError):
        write_grid_csv(str(tmp_path / "g.csv"), np.arange(4.0))


def test_rows_csv_header_and_values(tmp_path):
    path = str(tmp_path / "rows.csv")
    write_rows_csv(path, ["name", "value", "ok"], [["a", 0.1 + 0.2, True], ["b", -3.0, False]])
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == "name,value,ok"
    cells = lines[1].split(",")
    assert cells[0] == "a" and float(cells[1]) == 0.1 + 0.2 and cells[2] == "1"
    assert lines[2].split(",") == ["b", "-3", "0"]
