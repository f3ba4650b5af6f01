import pytest
from fastapi.testclient import TestClient

from conftest import WORKED_XYZ
from deltans.dataset import generate_design, synthesize_assessments
from deltans.formulas import delta_e_ciede2000
from deltans.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def small_dataset():
    design = generate_design()
    pairs = [p for p in design.pairs if p.center_id in ("gray", "blue")]
    records = synthesize_assessments(design, ground_truth="NS", noise_sigma=0.0, seed=0)
    keep = {p.pair_id for p in pairs}
    records = [r for r in records if r.pair_id in keep]
    pair_payload = [
        {
            "pair_id": p.pair_id,
            "center_id": p.center_id,
            "plane": p.plane,
            "magnitude_label": p.magnitude_label,
            "reference": (p.reference.l, p.reference.a, p.reference.b),
            "sample": (p.sample.l, p.sample.a, p.sample.b),
        }
        for p in pairs
    ]
    assessment_payload = [
        {
            "pair_id": r.pair_id,
            "observer_id": r.observer_id,
            "session": r.session,
            "gs": r.gs,
            "dv": r.dv,
        }
        for r in records
    ]
    dv = {r.pair_id: r.dv for r in records}
    return pair_payload, assessment_payload, dv


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_compute_xyz_worked_example(client):
    response = client.post(
        "/compute",
        json={
            "formula": "ns",
            "xyz_pairs": [
                {"pair_id": "pair1", "reference": WORKED_XYZ["S1"], "sample": WORKED_XYZ["P1"]},
                {"pair_id": "pair2", "reference": WORKED_XYZ["S2"], "sample": WORKED_XYZ["P2"]},
            ],
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["columns"] == ["pair_id", "de", "de00", "d_l", "dl_prime", "dc_prime", "dh_prime", "rt_term"]
    rows = {row["pair_id"]: row for row in body["rows"]}
    assert rows["pair1"]["de"] == pytest.approx(1.25, abs=0.01)
    assert rows["pair1"]["de00"] == pytest.approx(0.95, abs=0.01)
    assert rows["pair1"]["d_l"] == pytest.approx(0.35, abs=0.01)
    assert rows["pair2"]["de"] == pytest.approx(0.80, abs=0.01)
    assert rows["pair2"]["de00"] == pytest.approx(0.61, abs=0.01)


def test_compute_lab_pairs_formulas(client, small_dataset):
    pairs, _, _ = small_dataset
    for formula in ("cielab", "cie94", "cmc", "ciede2000"):
        response = client.post("/compute", json={"formula": formula, "pairs": pairs[:5]})
        assert response.status_code == 200, formula
        body = response.json()
        assert len(body["rows"]) == 5
        assert all(row["de"] >= 0 for row in body["rows"])
    explicit = client.post("/compute", json={"formula": "ciede2000", "pairs": pairs[:1]}).json()
    assert explicit["columns"] == ["pair_id", "de", "dl_prime", "dc_prime", "dh_prime", "rt_term"]


def test_compute_rejections(client, small_dataset):
    pairs, _, _ = small_dataset
    assert client.post("/compute", json={"formula": "nope", "pairs": pairs[:1]}).status_code == 400
    body = client.post("/compute", json={"formula": "nope", "pairs": pairs[:1]}).json()
    assert body["error"] == "UnknownFormulaError"
    # ns has no free parametric factors
    bad = client.post(
        "/compute",
        json={"formula": "ns", "pairs": pairs[:1], "factors": {"kl": 2.0, "kc": 1.0, "kh": 1.0}},
    )
    assert bad.status_code == 400
    # request-shape violations are schema-level rejections
    assert client.post("/compute", json={"formula": "ns"}).status_code == 422
    assert client.post("/compute", json={"formula": "ns", "pairs": pairs[:1], "bogus": 1}).status_code == 422
    assert (
        client.post(
            "/compute", json={"formula": "ns", "pairs": pairs[:1], "white": [95.78, 100.0, 104.61]}
        ).status_code
        == 422
    )


def test_stress_raw_and_joined(client, small_dataset):
    raw = client.post("/stress", json={"a": [1.0, 2.0], "b": [1.0, 1.0]}).json()
    assert raw["stress"] == pytest.approx(31.62, abs=0.01)
    assert raw["f_scale"] == pytest.approx(5.0 / 3.0, abs=1e-9)
    assert raw["n"] == 2

    pairs, assessments, dv = small_dataset
    predictions = [{"pair_id": pid, "de": value} for pid, value in sorted(dv.items())]
    joined = client.post(
        "/stress", json={"assessments": assessments, "predictions": predictions}
    ).json()
    assert joined["stress"] == pytest.approx(0.0, abs=1e-6)


def test_stress_mismatch_names_offender(client, small_dataset):
    _, assessments, dv = small_dataset
    predictions = [{"pair_id": pid, "de": value} for pid, value in sorted(dv.items())]
    del predictions[0]
    missing = sorted(dv)[0]
    response = client.post("/stress", json={"assessments": assessments, "predictions": predictions})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "DataError"
    assert missing in body["detail"]


def test_ftest(client):
    body = client.post("/ftest", json={"stress1": 30.0, "stress2": 20.0, "n1": 1012, "n2": 1012}).json()
    assert body["f_value"] == pytest.approx(2.25, abs=1e-12)
    assert body["lower_crit"] == pytest.approx(0.883952, abs=1e-4)
    assert body["upper_crit"] == pytest.approx(1.131283, abs=1e-4)
    assert body["verdict"] == "significant"
    assert body["df1"] == 1011
    limit = client.post("/ftest", json={"stress1": 30.0, "stress2": 20.0}).json()
    assert limit["lower_crit"] == 1.0 and limit["upper_crit"] == 1.0


def test_fit_kl_and_dl(client, small_dataset):
    pairs, _, dv = small_dataset
    body = client.post(
        "/fit", json={"target": "dl", "base": "ciede2000", "pairs": pairs, "dv": dv}
    ).json()
    assert body["parameters"]["a"] == pytest.approx(0.08, abs=0.005)
    assert body["parameters"]["b"] == pytest.approx(0.27, abs=0.005)
    assert body["stress_after"] <= body["stress_before"]

    kl = client.post(
        "/fit", json={"target": "kl", "base": "ciede2000", "pairs": pairs, "dv": dv}
    ).json()
    assert 0.0 < kl["parameters"]["kl"] < 1.0


def test_fit_magpower_with_fixed_line(client, small_dataset):
    pairs, _, dv = small_dataset
    body = client.post(
        "/fit",
        json={
            "target": "magpower",
            "base": "ciede2000",
            "pairs": pairs,
            "dv": dv,
            "dl_a": 0.08,
            "dl_b": 0.27,
        },
    ).json()
    # dv is exactly the magnitude-corrected value, so d comes back ~1
    assert body["parameters"]["d"] == pytest.approx(1.0, abs=0.01)
    half = client.post(
        "/fit",
        json={"target": "magpower", "base": "ciede2000", "pairs": pairs, "dv": dv, "dl_a": 0.08},
    )
    assert half.status_code == 400
    assert half.json()["error"] == "ConfigError"


def test_fit_ellipsoid(client, small_dataset):
    pairs, _, dv = small_dataset
    multi = client.post(
        "/fit", json={"target": "ellipsoid", "pairs": pairs, "dv": dv}
    )
    assert multi.status_code == 400  # two centers, none chosen
    assert "center_id" in multi.json()["detail"]

    body = client.post(
        "/fit", json={"target": "ellipsoid", "pairs": pairs, "dv": dv, "center_id": "gray"}
    ).json()
    assert len(body["fits"]) == 1
    fit = body["fits"][0]
    assert fit["center_id"] == "gray"
    assert fit["n_pairs"] == 92
    assert fit["ellipse"]["semi_major"] >= fit["ellipse"]["semi_minor"] > 0

    per_mag = client.post(
        "/fit",
        json={"target": "ellipsoid", "pairs": pairs, "dv": dv, "center_id": "gray", "per_magnitude": True},
    ).json()
    assert [f["magnitude_label"] for f in per_mag["fits"]] == [1.0, 2.0, 4.0, 8.0]
    assert all(f["n_pairs"] == 23 for f in per_mag["fits"])


def test_fit_dv_mismatch(client, small_dataset):
    pairs, _, dv = small_dataset
    short = dict(list(sorted(dv.items()))[1:])
    response = client.post("/fit", json={"target": "kl", "pairs": pairs, "dv": short})
    assert response.status_code == 400
    assert response.json()["error"] == "DataError"


def test_generate_and_determinism(client):
    config = {"centers": ["gray"], "noise_sigma": 0.25, "n_observers": 2, "seed": 7}
    first = client.post("/generate", json=config).json()
    second = client.post("/generate", json=config).json()
    assert first == second
    assert len(first["pairs"]) == 92
    assert len(first["assessments"]) == 184
    bad = client.post("/generate", json={"centers": ["nonesuch"]})
    assert bad.status_code == 400
    assert "centers" in bad.json()["detail"]
    assert client.post("/generate", json={"frequency": 3}).status_code == 422


def test_generate_inline_center(client):
    config = {
        "centers": [{"id": "probe", "name": "Probe", "lab": [50.0, 0.0, 0.0]}],
        "magnitudes": [2.0],
    }
    body = client.post("/generate", json=config).json()
    assert len(body["pairs"]) == 23
    assert all(p["center_id"] == "probe" for p in body["pairs"])


def test_variability_endpoint(client, small_dataset):
    pairs, assessments, _ = small_dataset
    body = client.post("/variability", json={"assessments": assessments, "pairs": pairs}).json()
    assert body["inter_mean"] == pytest.approx(0.0, abs=1e-6)  # single observer equals panel
    assert set(body["by_plane"]) == {"La", "Lb", "ab"}


def test_plot_endpoint(client, small_dataset):
    pairs, _, dv = small_dataset
    fits = client.post(
        "/fit", json={"target": "ellipsoid", "pairs": pairs, "dv": dv, "center_id": "gray"}
    ).json()["fits"]
    response = client.post("/plot", json={"fits": fits})
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("image/svg+xml")
    assert response.text.count("<path ") == 1


def test_coefficients_endpoint(client):
    rows = client.get("/coefficients").json()["rows"]
    assert [r["formula_id"] for r in rows] == ["CIELAB", "CIEDE2000", "CIE94", "CAM02-UCS", "CAM16-UCS"]
    table = {r["formula_id"]: r for r in rows}
    assert table["CIEDE2000"]["a"] == 0.08
    assert table["CIEDE2000"]["d"] == 0.91


def test_compute_consistency_with_library(client, small_dataset):
    pairs, _, _ = small_dataset
    response = client.post("/compute", json={"formula": "ciede2000", "pairs": pairs[:10]}).json()
    for row, payload in zip(response["rows"], pairs[:10]):
        ref = payload["reference"]
        smp = payload["sample"]
        from deltans.color import LabColor

        expected = delta_e_ciede2000(LabColor(*ref), LabColor(*smp)).de00
        assert row["de"] == pytest.approx(expected, abs=1e-9)
