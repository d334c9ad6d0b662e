import json
import subprocess
import sys
import time

import numpy as np
import pytest

from prime_ifs.cli import main, parse_int, parse_int_list, parse_ordering
from prime_ifs.raster import read_pgm


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def load(out, name):
    return json.loads((out / name).read_text())


@pytest.mark.parametrize("text, value", [("10^6", 10**6), ("1e6", 10**6), ("1_000", 1000), ("78498", 78498)])
def test_parse_int(text, value):
    assert parse_int(text) == value


def test_parse_lists():
    assert parse_int_list("7, 10^6,1e7") == [7, 10**6, 10**7]
    assert parse_ordering("1 3 9 7") == [1, 3, 9, 7]
    assert parse_ordering("1,3,9,7") == [1, 3, 9, 7]


def test_gasket_run_writes_manifest(tmp_path):
    code, out = run(tmp_path, "gasket", "--points", "20000", "--seed", "3", "--size", "64")
    assert code == 0
    m = manifest(out)
    assert m["subcommand"] == "gasket" and m["seed"] == 3 and m["rng"]
    assert sorted(m["artifacts"]) == ["census.json", "gasket.pgm", "manifest.json"]
    for name in m["artifacts"]:
        assert (out / name).exists()
    report = load(out, "census.json")
    assert report["empty_check_passed"] and report["occupied_cells"] == 27


def test_square_system_fills_all_quadrants(tmp_path):
    code, out = run(tmp_path, "gasket", "--system", "square", "--points", "1000", "--size", "32", "--depth", "1")
    assert code == 0
    entries = load(out, "census.json")["census"]["entries"]
    assert len(entries) == 4 and all(e["count"] > 0 for e in entries)


def test_zero_points_gives_blank_image(tmp_path):
    code, out = run(tmp_path, "gasket", "--points", "0", "--size", "16")
    assert code == 0
    assert (read_pgm((out / "gasket.pgm").read_bytes()) == 255).all()
    assert manifest(out)["parameters"]["points"] == 0


def test_drive_default_orderings(tmp_path):
    code, out = run(tmp_path, "drive", "--count", "5000", "--size", "32")
    assert code == 0
    pgms = sorted(p.name for p in out.glob("*.pgm"))
    assert pgms == ["drive_mod10_1-3-7-9.pgm", "drive_mod10_1-3-9-7.pgm", "drive_mod10_1-7-3-9.pgm"]
    code, out = run(tmp_path, "drive", "--count", "5000", "--size", "32", "--skip-third", name="two")
    assert len(list(out.glob("*.pgm"))) == 2


def test_drive_records_convention(tmp_path):
    code, out = run(tmp_path, "drive", "--ordering", "1 3 9 7", "--limit", "10^5", "--csv", "--size", "32")
    assert code == 0
    conv = manifest(out)["convention"]
    assert conv["mode"] == "ByValueRange" and conv["hi"] == 10**5
    table = load(out, "drive_mod10_1-3-9-7_residue_k2.json")
    assert table["convention"] == conv
    assert (out / "drive_mod10_1-3-9-7.csv").exists()


@pytest.mark.parametrize("argv", [["drive", "--mod", "7"], ["sigma-scan", "--x0-list", "7", "--mod", "7"]])
def test_bad_modulus_is_rejected(tmp_path, capsys, argv):
    code, out = run(tmp_path, *argv)
    assert code == 2
    assert "Please choose modulus 5, 8, 10, or 12" in capsys.readouterr().err


def test_bad_ordering_is_rejected(tmp_path):
    code, _ = run(tmp_path, "drive", "--ordering", "1 3 5 7", "--count", "100")
    assert code == 2


def test_rotdist_census_sizes(tmp_path):
    n = 3000
    code, out = run(tmp_path, "rotdist", "--ordering", "1 3 7 9", "--count", str(n), "--depth", "1", "--size", "16")
    assert code == 0
    assert load(out, "rotdist_mod10_1-3-7-9_distance.json")["total"] == n - 1
    # one derivation step: N primes give N - 1 distances, each a depth-1 window
    assert load(out, "rotdist_mod10_1-3-7-9_address_k1.json")["total"] == n - 1


def test_absdiff_reports_forbidden_addresses(tmp_path):
    code, out = run(tmp_path, "absdiff", "--ordering", "1 3 7 9", "--count", "20000", "--size", "16")
    assert code == 0
    forbidden = load(out, "absdiff_mod10_1-3-7-9_address_k3.json")["forbidden"]
    assert "424" in forbidden and "434" in forbidden


def test_twins_report(tmp_path):
    code, out = run(tmp_path, "twins", "--count", "20000", "--size", "16")
    assert code == 0
    doc = load(out, "twins_census.json")
    assert sorted(map(tuple, doc["forbidden"])) == [(3, 3), (7, 1), (7, 3), (7, 7), (9, 3)]
    assert doc["dropped_pairs"] == [[5, 7]]


def test_tuple_top_patterns(tmp_path):
    code, out = run(tmp_path, "tuple", "--offset", "3", "--depth", "4", "--count", "2e5", "--size", "16")
    assert code == 0
    top = {tuple(e["key"]) for e in load(out, "tuple_d3_k4.json")["top"]}
    assert top == {(0, 6, 4, 2), (2, 0, 6, 4), (4, 2, 0, 6), (6, 4, 2, 0)}


def test_tuple_offsets(tmp_path):
    code, out = run(tmp_path, "tuple", "--offset", "2", "--count", "2000", "--size", "16")
    assert code == 0
    keys = {k for e in load(out, "tuple_d2_k2.json")["entries"] for k in e["key"]}
    assert keys == {1, 3, 5, 7}
    code, _ = run(tmp_path, "tuple", "--offset", "0", "--count", "10", name="zero")
    assert code == 2


def test_sigma_scan_both_interpretations(tmp_path):
    code, out = run(tmp_path, "sigma-scan", "--x0-list", "7,10^6", "--size", "10^4", "--interpretation", "both")
    assert code == 0
    rows = load(out, "sigma_scan.json")["rows"]
    assert [(r["interpretation"], r["x0"]) for r in rows] == [
        ("WindowWidth", 7), ("WindowWidth", 10**6), ("PrimeCount", 7), ("PrimeCount", 10**6)
    ]
    assert all(r["sigma"] >= 0 for r in rows)


@pytest.mark.parametrize(
    "argv",
    [
        ["gasket", "--points", "5000", "--seed", "9", "--size", "32", "--csv"],
        ["drive", "--count", "3000", "--size", "32", "--csv", "--depth", "3"],
        ["twins", "--count", "2000", "--size", "32"],
    ],
)
def test_rerun_is_byte_identical(tmp_path, argv):
    code, first = run(tmp_path, *argv, "--workers", "1", name="first")
    assert code == 0
    for workers in ("2", "8"):
        again = tmp_path / f"again{workers}"
        assert main(["rerun", "--manifest", str(first / "manifest.json"), "--out", str(again),
                     "--workers", workers]) == 0
        for name in manifest(first)["artifacts"]:
            assert (again / name).read_bytes() == (first / name).read_bytes(), name


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "prime_ifs", "gasket", "--points", "100", "--size", "8", "--out", str(tmp_path / "m")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert np.frombuffer((tmp_path / "m" / "gasket.pgm").read_bytes()[-64:], np.uint8).size == 64


def test_sigma_scan_far_start_is_quick(tmp_path):
    t0 = time.perf_counter()
    code, out = run(tmp_path, "sigma-scan", "--x0-list", "10^12", "--size", "10^6")
    assert code == 0
    assert time.perf_counter() - t0 < 60
    (row,) = load(out, "sigma_scan.json")["rows"]
    assert row["first_prime"] > 10**12 and row["pairs"] == 10**6 - 1
