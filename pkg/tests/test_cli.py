import json
import os

import yaml

from fuzzyfractal.cli import main
from fuzzyfractal.pgm import read_pgm

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _tiny_grid_doc():
    return {
        "space": {"kind": "grid", "origin": [0, 0], "spacing": 1.0,
                  "width": 17, "height": 17},
        "maps": [{"kind": "affine", "matrix": [[0.5, 0], [0, 0.5]],
                  "offset": [0, 0]},
                 {"kind": "affine", "matrix": [[0.5, 0], [0, 0.5]],
                  "offset": [8, 8]}],
        "greys": [{"kind": "identity"}, {"kind": "identity"}],
        "levels": 255,
        "seed": {"kind": "delta", "point": [16, 16]},
    }


def _funnel_doc():
    return {
        "space": {"kind": "finite",
                  "labels": ["L", "l", "r", "R"],
                  "distances": [[3.0], [5.0, 2.0], [10.0, 7.0, 5.0]]},
        "maps": [{"kind": "table",
                  "mapping": {"L": "L", "l": "L", "r": "R", "R": "R"}}],
        "greys": [{"kind": "identity"}],
        "levels": 8,
        "seed": {"kind": "indicator", "points": ["l", "r"]},
    }


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def test_render_writes_image_certificate_and_figure(tmp_path, capsys):
    cfg = _write(tmp_path, "run.yaml", _tiny_grid_doc())
    out = str(tmp_path / "limit.pgm")
    assert main(["render", "--config", cfg, "--out", out]) == 0
    pixels = read_pgm(out)
    assert pixels.shape == (17, 17)
    assert pixels.max() == 255
    assert os.path.exists(out + ".cert.tsv")
    assert os.path.exists(out + ".cert.tsv.png")
    head = (tmp_path / "limit.pgm.cert.tsv").read_text().splitlines()
    assert any(line.startswith("# label\t") for line in head)
    assert any(line.startswith("# terminal\t") for line in head)
    assert "wrote" in capsys.readouterr().out


def test_render_seed_override_restricts_the_start(tmp_path):
    cfg = _write(tmp_path, "run.yaml", _tiny_grid_doc())
    out = str(tmp_path / "a.pgm")
    assert main(["render", "--config", cfg, "--out", out,
                 "--seed", "0,0"]) == 0
    # both maps fix the origin's part, so the limit still covers the gasket
    assert read_pgm(out)[16, 0] == 255
    assert main(["render", "--config", cfg, "--out",
                 str(tmp_path / "b.pgm"), "--seed", "99,0"]) == 2


def test_render_rejects_finite_space_configs(tmp_path):
    cfg = _write(tmp_path, "funnel.yaml", _funnel_doc())
    assert main(["render", "--config", cfg,
                 "--out", str(tmp_path / "x.pgm")]) == 2


def test_broken_configs_are_usage_errors(tmp_path):
    missing = str(tmp_path / "nope.yaml")
    assert main(["render", "--config", missing,
                 "--out", str(tmp_path / "x.pgm")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("maps: [unbalanced")
    assert main(["render", "--config", str(bad),
                 "--out", str(tmp_path / "x.pgm")]) == 2


def test_render_budget_exhaustion_is_a_run_failure(tmp_path, capsys):
    cfg = _write(tmp_path, "run.yaml", _tiny_grid_doc())
    out = str(tmp_path / "x.pgm")
    assert main(["render", "--config", cfg, "--out", out,
                 "--eps", "1e-9", "--budget", "2"]) == 1
    assert "run failed" in capsys.readouterr().err
    assert not os.path.exists(out)


def test_verify_small_run_reports_all_passing(tmp_path, capsys):
    report = str(tmp_path / "report.tsv")
    code = main(["verify", "--seed", "11", "--count", "2",
                 "--grid-size", "17", "--out", report])
    assert code == 0
    lines = (tmp_path / "report.tsv").read_text().splitlines()
    rows = [l for l in lines
            if not l.startswith(("#", "status\t"))]
    assert rows and all(row.startswith("PASS\t") for row in rows)
    assert os.path.exists(report + ".png")
    assert "checks passed" in capsys.readouterr().out


def test_verify_only_filter(tmp_path):
    report = str(tmp_path / "report.tsv")
    assert main(["verify", "--seed", "11", "--count", "2",
                 "--grid-size", "0", "--only", "apriori",
                 "--out", report]) == 0
    rows = [l for l in (tmp_path / "report.tsv").read_text().splitlines()
            if not l.startswith(("#", "status\t"))]
    assert rows and all("apriori" in row for row in rows)
    assert main(["verify", "--seed", "11", "--count", "2",
                 "--grid-size", "0", "--only", "no-such-check",
                 "--out", report]) == 2


def test_verify_fixture_mode(tmp_path):
    fixture = os.path.join(FIXTURES, "weakly_picard_exhibit.json")
    report = str(tmp_path / "report.tsv")
    assert main(["verify", "--fixture", fixture, "--out", report]) == 0
    text = (tmp_path / "report.tsv").read_text()
    assert "fixture-distinct-limits" in text


def test_verify_corrupted_fixture_fails(tmp_path, capsys):
    with open(os.path.join(FIXTURES, "weakly_picard_exhibit.json")) as fh:
        doc = json.load(fh)
    doc["expected"]["distinct_delta_limits"] = 3
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(doc))
    report = str(tmp_path / "report.tsv")
    assert main(["verify", "--fixture", str(bad), "--out", report]) == 1
    assert "FAIL\tfixture-distinct-limits" in (tmp_path / "report.tsv").read_text()
    assert "FAIL" in capsys.readouterr().out


def test_decompose_grid_writes_part_images(tmp_path):
    cfg = _write(tmp_path, "run.yaml", _tiny_grid_doc())
    out = str(tmp_path / "dec")
    assert main(["decompose", "--config", cfg, "--out", out]) == 0
    whole = read_pgm(out + ".whole.pgm")
    envelope = read_pgm(out + ".envelope.pgm")
    assert (whole == envelope).all()
    assert os.path.exists(out + ".part0.pgm")
    assert os.path.exists(out + ".gaps.tsv")
    assert os.path.exists(out + ".gaps.tsv.png")


def test_decompose_finite_writes_part_table(tmp_path):
    cfg = _write(tmp_path, "funnel.yaml", _funnel_doc())
    out = str(tmp_path / "dec")
    assert main(["decompose", "--config", cfg, "--out", out]) == 0
    table = (tmp_path / "dec.parts.tsv").read_text().splitlines()
    header = table[0].split("\t")
    assert header[:3] == ["point", "whole", "envelope"]
    assert len(header) == 5  # two distinct parts for the two clusters
    gaps = (tmp_path / "dec.gaps.tsv").read_text()
    assert "envelope_gap\t0" in gaps


def test_decompose_rejects_seed_outside_the_natural_class(tmp_path, capsys):
    doc = _funnel_doc()
    doc["seed"] = {"kind": "ticks", "values": {"l": 8, "r": 4}}
    cfg = _write(tmp_path, "odd.yaml", doc)
    assert main(["decompose", "--config", cfg,
                 "--out", str(tmp_path / "dec")]) == 2
    assert "'r'" in capsys.readouterr().err
