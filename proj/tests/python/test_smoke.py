import math
import os
from pathlib import Path

import numpy as np
import pytest

import anmvae

CONFIGS = Path(os.environ.get("ANMVAE_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))
SPRING = str(CONFIGS / "spring.cfg")
SMALL = [
    "scene.width=16",
    "scene.height=16",
    "scene.frames=40",
    "model.hidden=16",
    "model.batch=20",
    "model.steps=20",
    "prior.n_components=50",
]


def test_mechanism_value_and_derivative():
    f = anmvae.Mechanism("exp(-t/(2*pi))*cos(t)")
    t = 0.7
    assert f(t) == pytest.approx(math.exp(-t / (2 * math.pi)) * math.cos(t), abs=1e-12)
    expected = -math.exp(-t / (2 * math.pi)) * (math.cos(t) / (2 * math.pi) + math.sin(t))
    assert f.derivative(t) == pytest.approx(expected, abs=1e-12)
    assert anmvae.Mechanism(str(f)) == f
    assert anmvae.Mechanism.builtin("spring_prior")(0.0) == pytest.approx(1.0)


def test_parse_errors_are_config_errors():
    with pytest.raises(anmvae.ParseError):
        anmvae.Mechanism("cos(t")
    with pytest.raises(ValueError):
        anmvae.Mechanism("t +")


def test_prior_and_kl():
    prior = anmvae.build_prior(anmvae.Mechanism("cos(t)"), 0.0, 1.0, n_components=40, seed=3)
    assert len(prior) == 40
    assert prior.means.shape == (40, 2)
    assert prior.covariances.shape == (40, 2, 2)
    assert np.all((prior.means[:, 0] >= 0.0) & (prior.means[:, 0] <= 1.0))
    value, se = anmvae.kl_mc(prior, prior, samples_per_component=200)
    assert abs(value) < 1e-12 and se >= 0.0
    pts = prior.sample(50, seed=1)
    assert pts.shape == (50, 2)
    assert np.all(np.isfinite(prior.log_density(pts)))


def test_gmm_round_trip_and_bad_covariance():
    g = anmvae.Gmm(np.array([[0.0, 0.0]]), np.array([[[1.0, 0.0], [0.0, 1.0]]]))
    assert g.log_density(np.zeros((1, 2)))[0] == pytest.approx(-math.log(2 * math.pi))
    with pytest.raises(ArithmeticError):
        anmvae.Gmm(np.array([[0.0, 0.0]]), np.array([[[1.0, 0.0], [0.0, -1.0]]]))


def test_latent_mse():
    t = np.linspace(0.0, 1.0, 50)
    assert anmvae.latent_mse(list(3 * t + 1), list(t)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArithmeticError):
        anmvae.latent_mse([1.0] * 5, [1.0, 2.0, 3.0, 4.0, 5.0])


def test_dataset_train_evaluate_intervene(tmp_path):
    data = anmvae.generate_dataset(SPRING, SMALL)
    assert data["frames"].shape == (40, 16, 16, 3)
    assert data["frames"].dtype == np.float32
    assert len(data["times"]) == 40

    anmvae.write_dataset(data, tmp_path / "data")
    back = anmvae.read_dataset(tmp_path / "data")
    assert np.max(np.abs(back["frames"] - data["frames"])) <= 0.5 / 255 + 1e-6

    model = anmvae.train(SPRING, data, SMALL)
    assert model.mode == "anm" and model.step == 20
    assert model.image_shape == (16, 16, 3)

    mu, sigma = model.encode(data["frames"])
    assert mu.shape == (40, 1) and np.all(sigma > 0)
    recon = model.decode(mu)
    assert recon.shape == (40, 16, 16, 3)
    assert 0.0 <= anmvae.recon_accuracy(data["frames"], recon) <= 100.0

    report = anmvae.evaluate(model, data)
    assert report["mode"] == "anm"
    assert len(report["predicted"]) == 40

    iv = anmvae.intervene(model, anmvae.Mechanism.builtin("spring_int"), [0.0, 0.5, 1.0])
    assert iv["frames"].shape == (3, 16, 16, 3)
    assert np.all((iv["frames"] >= 0) & (iv["frames"] <= 1))

    model.save(tmp_path / "m.ckpt")
    again = anmvae.Model.load(tmp_path / "m.ckpt")
    assert np.array_equal(again.encode(data["frames"])[0], mu)

    standard = anmvae.train(SPRING, data, SMALL, mode="standard")
    assert standard.mode == "standard"
    with pytest.raises(ValueError):
        anmvae.intervene(standard, anmvae.Mechanism("t"), [0.0])


def test_load_errors(tmp_path):
    with pytest.raises(OSError):
        anmvae.Model.load(tmp_path / "missing.ckpt")
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"XXXX" + bytes(16))
    with pytest.raises(anmvae.VersionError):
        anmvae.Model.load(bad)


def test_run_cli():
    code, out, _ = anmvae.run_cli(["--help"])
    assert code == 0 and "train" in out
    code, _, err = anmvae.run_cli(["frobnicate"])
    assert code == 2
