import json

import pytest
from fastapi.testclient import TestClient

import deltans.cli as cli
from conftest import WORKED_XYZ
from deltans.color import XyzColor
from deltans.dataset import save_xyz_pairs
from deltans.service import create_app


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def xyz_file(tmp_path):
    path = tmp_path / "xyz.csv"
    save_xyz_pairs(
        [
            ("pair1", XyzColor(*WORKED_XYZ["S1"]), XyzColor(*WORKED_XYZ["P1"])),
            ("pair2", XyzColor(*WORKED_XYZ["S2"]), XyzColor(*WORKED_XYZ["P2"])),
        ],
        path,
    )
    return path


@pytest.fixture()
def generated(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["gray", "blue"], "noise_sigma": 0.0, "seed": 3}))
    pairs = tmp_path / "pairs.csv"
    assessments = tmp_path / "assess.csv"
    code, _, err = run_cli(
        ["gen", str(config), "--pairs-out", str(pairs), "--assessments-out", str(assessments)],
        capsys,
    )
    assert code == 0, err
    return pairs, assessments


def _csv_rows(text):
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


# ------------------------------------------------------------- compute

def test_compute_xyz_worked_example(xyz_file, capsys):
    code, out, _ = run_cli(["compute", str(xyz_file), "--formula", "ns", "--xyz"], capsys)
    assert code == 0
    rows = {row["pair_id"]: row for row in _csv_rows(out)}
    assert float(rows["pair1"]["de"]) == pytest.approx(1.25, abs=0.01)
    assert float(rows["pair1"]["d_l"]) == pytest.approx(0.35, abs=0.01)
    assert float(rows["pair1"]["de00"]) == pytest.approx(0.95, abs=0.01)
    assert float(rows["pair2"]["de"]) == pytest.approx(0.80, abs=0.01)
    assert float(rows["pair2"]["d_l"]) == pytest.approx(0.32, abs=0.01)


def test_compute_xyz_ciede2000(xyz_file, capsys):
    code, out, _ = run_cli(["compute", str(xyz_file), "--formula", "ciede2000", "--xyz"], capsys)
    assert code == 0
    rows = {row["pair_id"]: row for row in _csv_rows(out)}
    assert float(rows["pair1"]["de"]) == pytest.approx(0.95, abs=0.01)
    assert float(rows["pair2"]["de"]) == pytest.approx(0.61, abs=0.01)


def test_compute_custom_white(xyz_file, capsys):
    code, out, _ = run_cli(
        ["compute", str(xyz_file), "--xyz", "--white", "95.78,100.00,104.61"], capsys
    )
    assert code == 0
    baseline = run_cli(["compute", str(xyz_file), "--xyz"], capsys)[1]
    assert out == baseline
    code, _, err = run_cli(["compute", str(xyz_file), "--xyz", "--white", "95.78,100.00"], capsys)
    assert code == 2
    assert "--white" in err


def test_compute_pairs_formulas(generated, capsys):
    pairs, _ = generated
    for formula in ("cielab", "cie94", "cmc", "ciede2000", "ns"):
        code, out, _ = run_cli(["compute", str(pairs), "--formula", formula], capsys)
        assert code == 0, formula
        assert len(_csv_rows(out)) == 184


def test_compute_json_output(generated, capsys):
    pairs, _ = generated
    code, out, _ = run_cli(["compute", str(pairs), "--json"], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["formula"] == "CIEDE2000"
    assert len(body["rows"]) == 184


def test_compute_empty_file(tmp_path, capsys):
    from deltans.dataset import save_pairs

    empty = tmp_path / "empty.csv"
    save_pairs([], empty)
    code, out, _ = run_cli(["compute", str(empty)], capsys)
    assert code == 0
    assert _csv_rows(out) == []


def test_compute_ns_rejects_factors(generated, capsys):
    pairs, _ = generated
    code, _, err = run_cli(["compute", str(pairs), "--formula", "ns", "--kl", "2"], capsys)
    assert code == 2
    assert "ns" in err


def test_unknown_formula_is_usage_error(generated, capsys):
    pairs, _ = generated
    with pytest.raises(SystemExit) as info:
        cli.main(["compute", str(pairs), "--formula", "din99"])
    assert info.value.code == 2


def test_missing_file_is_data_error(capsys):
    code, _, err = run_cli(["compute", "/nonexistent/pairs.csv"], capsys)
    assert code == 3
    assert err


def test_malformed_row_is_data_error(tmp_path, capsys):
    bad = tmp_path / "pairs.csv"
    bad.write_text(
        "# schema=v1\n"
        "pair_id,center_id,plane,magnitude_label,ref_L,ref_a,ref_b,smp_L,smp_a,smp_b\n"
        "p1,gray,La,1,61.1,-3.2,3.2,62.1,oops,3.2\n"
    )
    code, _, err = run_cli(["compute", str(bad)], capsys)
    assert code == 3
    assert "line 3" in err


# ------------------------------------------------------ stress and ftest

def test_stress_pipeline(tmp_path, generated, capsys):
    pairs, assessments = generated
    predictions = tmp_path / "ns.csv"
    code, _, _ = run_cli(["compute", str(pairs), "--formula", "ns", "-o", str(predictions)], capsys)
    assert code == 0
    code, out, _ = run_cli(["stress", str(assessments), str(predictions)], capsys)
    assert code == 0
    (row,) = _csv_rows(out)
    assert float(row["stress"]) < 0.01  # noiseless ground truth
    assert int(row["n"]) == 184


def test_stress_id_mismatch(tmp_path, generated, capsys):
    _, assessments = generated
    predictions = tmp_path / "pred.csv"
    predictions.write_text("# schema=v1\npair_id,de\nnot-a-real-pair,1.0\n")
    code, _, err = run_cli(["stress", str(assessments), str(predictions)], capsys)
    assert code == 3
    assert "not-a-real-pair" in err or "gray-" in err


def test_ftest_table(capsys):
    code, out, _ = run_cli(["ftest", "30", "20", "--n1", "1012", "--n2", "1012"], capsys)
    assert code == 0
    (row,) = _csv_rows(out)
    assert float(row["f_value"]) == pytest.approx(2.25, abs=1e-9)
    assert float(row["lower_crit"]) == pytest.approx(0.883952, abs=1e-4)
    assert row["verdict"] == "significant"


def test_ftest_domain_error(capsys):
    code, _, err = run_cli(["ftest", "0", "20"], capsys)
    assert code == 4
    assert err


# ----------------------------------------------------------------- fit

def test_fit_dl(generated, capsys):
    pairs, assessments = generated
    code, out, _ = run_cli(
        ["fit", str(pairs), str(assessments), "--target", "dl"], capsys
    )
    assert code == 0
    body = json.loads(out)
    assert body["parameters"]["a"] == pytest.approx(0.08, abs=0.005)
    assert body["parameters"]["b"] == pytest.approx(0.27, abs=0.005)


def test_fit_ellipsoid_and_plot(tmp_path, generated, capsys):
    pairs, assessments = generated
    fits_path = tmp_path / "fits.json"
    code, _, _ = run_cli(
        ["fit", str(pairs), str(assessments), "--target", "ellipsoid", "--center", "gray",
         "-o", str(fits_path)],
        capsys,
    )
    assert code == 0
    body = json.loads(fits_path.read_text())
    assert body["fits"][0]["center_id"] == "gray"

    svg_path = tmp_path / "plot.svg"
    code, _, _ = run_cli(["plot", str(fits_path), "-o", str(svg_path)], capsys)
    assert code == 0
    svg = svg_path.read_text()
    assert svg.count("<path ") == 1
    assert ">a*</text>" in svg


def test_fit_requires_center_for_multicenter(generated, capsys):
    pairs, assessments = generated
    code, _, err = run_cli(["fit", str(pairs), str(assessments), "--target", "ellipsoid"], capsys)
    assert code == 2
    assert "center_id" in err


def test_fit_single_magnitude_fails_numerically(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["gray"], "magnitudes": [2.0], "seed": 1}))
    pairs = tmp_path / "p.csv"
    assessments = tmp_path / "a.csv"
    code, _, _ = run_cli(
        ["gen", str(config), "--pairs-out", str(pairs), "--assessments-out", str(assessments)],
        capsys,
    )
    assert code == 0
    code, _, err = run_cli(["fit", str(pairs), str(assessments), "--target", "dl"], capsys)
    assert code == 4
    assert "magnitude" in err


# ----------------------------------------------------------------- gen

def test_gen_invalid_json(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("{not json")
    code, _, err = run_cli(["gen", str(config), "--pairs-out", str(tmp_path / "p.csv")], capsys)
    assert code == 2
    assert "JSON" in err


def test_gen_unknown_field_named(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["gray"], "wavelength": 550}))
    code, _, err = run_cli(["gen", str(config), "--pairs-out", str(tmp_path / "p.csv")], capsys)
    assert code == 2
    assert "wavelength" in err


def test_gen_unknown_center(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["chartreuse"]}))
    code, _, err = run_cli(["gen", str(config), "--pairs-out", str(tmp_path / "p.csv")], capsys)
    assert code == 2
    assert "centers" in err


def test_gen_env_config(tmp_path, capsys, monkeypatch):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["gray"], "magnitudes": [1.0]}))
    out = tmp_path / "p.csv"
    monkeypatch.setenv("DELTANS_CONFIG", str(config))
    code, _, _ = run_cli(["gen", "--pairs-out", str(out)], capsys)
    assert code == 0
    assert out.exists()
    monkeypatch.delenv("DELTANS_CONFIG")
    code, _, err = run_cli(["gen", "--pairs-out", str(out)], capsys)
    assert code == 2
    assert "DELTANS_CONFIG" in err


def test_gen_canonical_counts(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("{}")
    pairs = tmp_path / "pairs.csv"
    code, _, _ = run_cli(["gen", str(config), "--pairs-out", str(pairs)], capsys)
    assert code == 0
    assert len(pairs.read_text().splitlines()) == 1012 + 2  # schema + header


# ---------------------------------------------------------- variability

def test_variability_table(generated, capsys):
    pairs, assessments = generated
    code, out, _ = run_cli(["variability", str(assessments), "--pairs", str(pairs)], capsys)
    assert code == 0
    rows = _csv_rows(out)
    tables = {row["table"] for row in rows}
    assert {"inter", "inter_mean", "by_center", "by_plane", "by_magnitude"} <= tables


# --------------------------------------------------------- coefficients

def test_coefficients_json(capsys):
    code, out, _ = run_cli(["coefficients"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows[1]["formula_id"] == "CIEDE2000"
    assert rows[1]["b"] == 0.27


# ---------------------------------------------------------- determinism

def test_byte_identical_reruns(tmp_path, xyz_file, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"centers": ["gray"], "noise_sigma": 0.25, "n_observers": 3, "seed": 11}))

    def one_round(tag):
        pairs = tmp_path / f"pairs-{tag}.csv"
        assessments = tmp_path / f"assess-{tag}.csv"
        run_cli(["gen", str(config), "--pairs-out", str(pairs), "--assessments-out", str(assessments)], capsys)
        compute = run_cli(["compute", str(pairs), "--formula", "ns"], capsys)[1]
        fit = run_cli(["fit", str(pairs), str(assessments), "--target", "ellipsoid", "--center", "gray"], capsys)[1]
        fits_path = tmp_path / f"fits-{tag}.json"
        fits_path.write_text(fit)
        plot = run_cli(["plot", str(fits_path)], capsys)[1]
        xyz = run_cli(["compute", str(xyz_file), "--xyz"], capsys)[1]
        table = run_cli(["variability", str(assessments), "--pairs", str(pairs)], capsys)[1]
        return (
            pairs.read_bytes(),
            assessments.read_bytes(),
            compute,
            fit,
            plot,
            xyz,
            table,
        )

    assert one_round("a") == one_round("b")


# ---------------------------------------------------------- remote mode

def test_remote_mode_matches_local(tmp_path, generated, monkeypatch, capsys):
    pairs, assessments = generated
    app = create_app()
    monkeypatch.setattr(cli, "_http_client_factory", lambda base_url: TestClient(app))

    local = run_cli(["compute", str(pairs), "--formula", "ns"], capsys)
    remote = run_cli(["compute", str(pairs), "--formula", "ns", "--server", "http://testserver"], capsys)
    assert remote[0] == 0
    assert remote[1] == local[1]

    local_fit = run_cli(["fit", str(pairs), str(assessments), "--target", "dl"], capsys)
    remote_fit = run_cli(
        ["fit", str(pairs), str(assessments), "--target", "dl", "--server", "http://testserver"], capsys
    )
    assert remote_fit[1] == local_fit[1]

    code, _, err = run_cli(
        ["compute", str(pairs), "--formula", "ns", "--kl", "3", "--server", "http://testserver"],
        capsys,
    )
    assert code == 2


def test_remote_error_mapping(tmp_path, generated, monkeypatch, capsys):
    pairs, assessments = generated
    app = create_app()
    monkeypatch.setattr(cli, "_http_client_factory", lambda base_url: TestClient(app))
    # numerical failure surfaces with the same exit code remotely
    code, _, err = run_cli(
        ["fit", str(pairs), str(assessments), "--target", "ellipsoid", "--server", "http://testserver"],
        capsys,
    )
    assert code == 2
    assert "center_id" in err
