"""Kendall tau-b, the sine identity, PSD repair, and normal scores."""

from __future__ import annotations

import numpy as np
import pytest

from helpers import kendall_tau_bruteforce
from latentbn.data import Column, MixedDataset
from latentbn.errors import DegenerateColumnError
from latentbn.latentcorr import (
    estimate_latent_sigma,
    kendall_tau,
    nearest_psd_correlation,
    normal_scores,
    tau_to_latent_corr,
)


def continuous_dataset(matrix: np.ndarray) -> MixedDataset:
    cols = tuple(Column("continuous", matrix[:, j]) for j in range(matrix.shape[1]))
    return MixedDataset(cols, tuple(f"X{j}" for j in range(matrix.shape[1])))


def test_kendall_tau_single_swap() -> None:
    # One discordant pair out of six: tau = (5 - 1) / 6.
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = np.array([1.0, 3.0, 2.0, 4.0])
    assert kendall_tau(x, y) == pytest.approx(4.0 / 6.0)
    assert kendall_tau(x, x) == pytest.approx(1.0)
    assert kendall_tau(x, -x) == pytest.approx(-1.0)


def test_kendall_tau_tie_correction() -> None:
    # x has one tied pair: n0 = 3, t_x = 1, C - D = 2, so tau = 2/sqrt(6).
    x = np.array([1.0, 1.0, 2.0])
    y = np.array([1.0, 2.0, 3.0])
    assert kendall_tau(x, y) == pytest.approx(2.0 / np.sqrt(6.0))


def test_kendall_tau_matches_bruteforce_oracle() -> None:
    rng = np.random.default_rng(42)
    for _ in range(25):
        n = int(rng.integers(5, 40))
        x = rng.integers(0, 5, size=n).astype(float)
        y = rng.normal(size=n)
        assert kendall_tau(x, y) == pytest.approx(kendall_tau_bruteforce(x, y), abs=1e-12)
        z = rng.integers(0, 3, size=n).astype(float)
        assert kendall_tau(x, z) == pytest.approx(kendall_tau_bruteforce(x, z), abs=1e-12)


def test_kendall_tau_rejects_degenerate_input() -> None:
    with pytest.raises(DegenerateColumnError):
        kendall_tau(np.ones(5), np.arange(5.0))
    with pytest.raises(ValueError):
        kendall_tau(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        kendall_tau(np.array([1.0]), np.array([2.0]))


def test_sine_identity_values() -> None:
    assert tau_to_latent_corr(0.0) == 0.0
    assert tau_to_latent_corr(1.0) == pytest.approx(1.0)
    assert tau_to_latent_corr(-1.0) == pytest.approx(-1.0)
    assert tau_to_latent_corr(2.0 / 3.0) == pytest.approx(np.sqrt(3.0) / 2.0)
    with pytest.raises(ValueError):
        tau_to_latent_corr(1.5)


def bivariate_latent(rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
    return np.column_stack([z1, z2])


def test_estimate_latent_sigma_recovers_continuous_correlation() -> None:
    rng = np.random.default_rng(2024)
    z = bivariate_latent(rng, 20000, 0.5)
    # Monotone margins must not matter: distort both columns.
    distorted = np.column_stack([np.exp(z[:, 0]), z[:, 1] ** 3])
    sigma = estimate_latent_sigma(continuous_dataset(distorted))
    assert sigma[0, 1] == pytest.approx(0.5, abs=0.03)
    assert sigma[0, 0] == 1.0 and sigma[1, 1] == 1.0


def test_estimate_latent_sigma_recovers_mixed_margins() -> None:
    from scipy.stats import norm

    rng = np.random.default_rng(77)
    z = bivariate_latent(rng, 40000, 0.5)
    u = norm.cdf(z[:, 1])
    ordinal = np.digitize(u, [0.2, 0.45, 0.7, 0.9]) + 1
    ds = MixedDataset(
        (
            Column("continuous", z[:, 0]),
            Column("ordinal", ordinal, levels=5),
            Column("binary", (z[:, 0] > 0.3).astype(int)),
        ),
        ("c", "o", "b"),
    )
    sigma = estimate_latent_sigma(ds)
    assert sigma[0, 1] == pytest.approx(0.5, abs=0.1)
    assert sigma[0, 2] > 0.8  # thresholded copy of the same latent
    assert np.allclose(sigma, sigma.T)
    assert np.linalg.eigvalsh(sigma)[0] >= -1e-8


def test_estimate_latent_sigma_flags_constant_column() -> None:
    ds = MixedDataset(
        (Column("binary", np.zeros(10, dtype=int)), Column("continuous", np.arange(10.0))),
        ("b", "c"),
    )
    with pytest.raises(DegenerateColumnError, match="'b'"):
        estimate_latent_sigma(ds)


def test_nearest_psd_correlation_repairs_indefinite_matrix() -> None:
    m = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    assert np.linalg.eigvalsh(m)[0] < -1e-8  # genuinely indefinite
    fixed = nearest_psd_correlation(m)
    assert np.linalg.eigvalsh(fixed)[0] >= -1e-10
    assert np.allclose(np.diag(fixed), 1.0)
    assert np.allclose(fixed, fixed.T)
    assert np.abs(fixed).max() <= 1.0


def test_nearest_psd_correlation_keeps_valid_matrix() -> None:
    m = np.array([[1.0, 0.3], [0.3, 1.0]])
    assert np.allclose(nearest_psd_correlation(m), m, atol=1e-12)


def test_normal_scores_three_point_closed_form() -> None:
    # Ranks 1, 2, 3 map to symmetric Phi^{-1} values; standardizing any
    # symmetric three-point column yields -sqrt(3/2), 0, +sqrt(3/2).
    ds = continuous_dataset(np.array([[5.0], [-2.0], [11.0]]))
    z = normal_scores(ds)
    expected = np.sqrt(1.5)
    assert z[:, 0] == pytest.approx([0.0, -expected, expected])


def test_normal_scores_standardization_and_ties() -> None:
    rng = np.random.default_rng(5)
    ds = MixedDataset(
        (
            Column("continuous", rng.normal(size=500)),
            Column("ordinal", rng.integers(1, 6, size=500), levels=5),
        ),
        ("c", "o"),
    )
    z = normal_scores(ds)
    assert z.shape == (500, 2)
    assert np.abs(z.mean(axis=0)).max() < 1e-12
    assert np.abs((z**2).mean(axis=0) - 1.0).max() < 1e-12
    # Tied ordinal values share the mid-rank, hence the same score.
    o = ds.columns[1].values
    for level in range(1, 6):
        vals = z[o == level, 1]
        assert np.ptp(vals) == 0.0


def test_normal_scores_invariant_to_monotone_transforms() -> None:
    rng = np.random.default_rng(6)
    x = rng.normal(size=200)
    a = normal_scores(continuous_dataset(x[:, None]))
    b = normal_scores(continuous_dataset(np.exp(x)[:, None]))
    assert np.allclose(a, b)


def test_normal_scores_reject_constant_column() -> None:
    ds = MixedDataset((Column("continuous", np.full(8, 2.5)),), ("c",))
    with pytest.raises(DegenerateColumnError):
        normal_scores(ds)
