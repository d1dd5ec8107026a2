from __future__ import annotations

import csv
from pathlib import Path

import pytest

from graftflat.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_CONTRACT, EXIT_OK, main
from graftflat.deflate import import_flat

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SURFACE = """
[surface]
genus = 2
decomposition = "theta"
lengths = [2.0, 2.5, 3.0]
twists = [0.3, -0.7, 1.1]

[multicurve]
weights = [1.0, 0.8, 1.2]
"""


def _write(tmp_path: Path, text: str, name: str = "c.toml") -> str:
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.mark.parametrize("cfg", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(cfg):
    assert main(["validate", str(cfg)]) == EXIT_OK


def test_run_writes_csv(tmp_path, capsys):
    cfg = _write(tmp_path, SURFACE + '[experiment]\nname = "cone-audit"\n')
    assert main(["--out-dir", str(tmp_path / "out"), "run", cfg]) == EXIT_OK
    rows = list(csv.reader((tmp_path / "out" / "cone-audit.csv").open()))
    assert rows[0] == ["singularity", "angleOverPi", "junctions"]
    assert [r[1] for r in rows[1:]] == ["3"] * 4
    assert "PASS cone-audit" in capsys.readouterr().out


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("GRAFTFLAT_OUT_DIR", str(tmp_path / "env"))
    cfg = _write(tmp_path, '[experiment]\nname = "spine"\ngridStep = 0.05\n[output]\npath = "s.csv"\n')
    main(["run", cfg])
    assert (tmp_path / "env" / "s.csv").exists()


def test_seed_flag_changes_sampling(tmp_path):
    cfg = _write(tmp_path, '[experiment]\nname = "hexagon-lemmas"\nseed = 0\n')
    main(["--out-dir", str(tmp_path / "a"), "run", cfg])
    main(["--out-dir", str(tmp_path / "b"), "--seed", "7", "run", cfg])
    main(["--out-dir", str(tmp_path / "c"), "run", cfg])
    a, b, c = ((tmp_path / d / "hexagon-lemmas.csv").read_bytes() for d in "abc")
    assert a == c and a != b


@pytest.mark.parametrize(
    "text",
    [
        '[experiment]\nname = "nope"\n',
        '[experiment]\nname = "area"\nnPairs = 0\n',
        '[experiment]\nname = "area"\nbogus = 1\n',
        "[experiment\n",
        '[surface]\ngenus = 2\ndecomposition = "theta"\nlengths = [1.0, 2.0]\ntwists = [0.0, 0.0]\n'
        '[experiment]\nname = "cone-audit"\n',
        '[multicurve]\nweights = [1.0]\n[experiment]\nname = "cone-audit"\n',
        SURFACE.replace("[2.0, 2.5, 3.0]", "[0.01, 2.5, 3.0]") + '[experiment]\nname = "cone-audit"\n',
    ],
)
def test_config_errors(tmp_path, text, capsys):
    assert main(["validate", _write(tmp_path, text)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.toml")]) == EXIT_CONFIG


def test_budget_exceeded_exit_code(tmp_path):
    cfg = _write(tmp_path, '[experiment]\nname = "deflate-lipschitz"\nnPairs = 2\nnetStep = 0.0001\n')
    assert main(["--out-dir", str(tmp_path), "run", cfg]) == EXIT_BUDGET


def test_failed_check_exit_code(tmp_path):
    # deflation needs a positive weight on every curve
    cfg = _write(tmp_path, SURFACE.replace("[1.0, 0.8, 1.2]", "[1.0, 0.0, 1.2]") + '[experiment]\nname = "cone-audit"\n')
    assert main(["--out-dir", str(tmp_path), "run", cfg]) == EXIT_CONTRACT


def test_export_flat(tmp_path):
    cfg = _write(tmp_path, SURFACE + '[experiment]\nname = "cone-audit"\n')
    out = tmp_path / "flat.txt"
    assert main(["export-flat", cfg, str(out)]) == EXIT_OK
    flat = import_flat(out.read_text())
    assert flat.genus == 2 and len(flat.arcs) == 12


def test_export_flat_needs_a_surface(tmp_path):
    cfg = _write(tmp_path, '[experiment]\nname = "cone-audit"\n')
    assert main(["export-flat", cfg, str(tmp_path / "x.txt")]) == EXIT_CONFIG
