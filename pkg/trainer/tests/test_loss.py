"""Contrastive-loss math against independent direct-summation oracles."""
import math

import pytest
import torch

from coltrain.loss import contrastive_loss

# Direct-summation value for z = [e1, e2, e1, e2], P = {(0,2),(1,3)},
# temperature 0.07, computed by a standalone script before this package
# was written.
N2_ORACLE = 1.249749120973656e-06


def direct_single_pair(z, i, j, t):
    def cos(a, b):
        num = sum(x * y for x, y in zip(a, b))
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(x * x for x in b))
        return num / (na * nb)

    num = math.exp(cos(z[i], z[j]) / t)
    den = sum(math.exp(cos(z[i], z[k]) / t) for k in range(len(z)) if k != i)
    return -math.log(num / den)


class TestGoldenValues:
    def test_identical_pair_loss_zero(self):
        v = torch.tensor([[0.3, -0.2, 0.9, 0.1]], dtype=torch.float64)
        z = torch.cat([v, v], dim=0)
        loss = contrastive_loss(z, [(0, 1)], temperature=0.07)
        assert float(loss) == pytest.approx(0.0, abs=1e-12)

    def test_n2_oracle_value(self):
        z = torch.eye(4, dtype=torch.float64)[[0, 1, 0, 1]]
        loss = contrastive_loss(z, [(0, 2), (1, 3)], temperature=0.07)
        assert float(loss) == pytest.approx(N2_ORACLE, abs=1e-6)
        # And the oracle formula itself, re-evaluated in place.
        rows = z.tolist()
        direct = sum(
            direct_single_pair(rows, i, j, 0.07) + direct_single_pair(rows, j, i, 0.07)
            for i, j in [(0, 2), (1, 3)]
        ) / 4
        assert float(loss) == pytest.approx(direct, abs=1e-9)

    def test_matches_direct_summation_on_random_batch(self):
        torch.manual_seed(3)
        z = torch.randn(6, 5, dtype=torch.float64)
        pairs = [(0, 3), (1, 4), (2, 5)]
        loss = contrastive_loss(z, pairs, temperature=0.07)
        rows = z.tolist()
        direct = sum(
            direct_single_pair(rows, i, j, 0.07) + direct_single_pair(rows, j, i, 0.07)
            for i, j in pairs
        ) / (2 * len(pairs))
        assert float(loss) == pytest.approx(direct, rel=1e-9)


class TestGradient:
    def test_gradient_vs_central_differences(self):
        torch.manual_seed(11)
        z0 = torch.randn(4, 6, dtype=torch.float64)
        pairs = [(0, 2), (1, 3)]

        z = z0.clone().requires_grad_(True)
        loss = contrastive_loss(z, pairs, temperature=0.07)
        loss.backward()
        analytic = z.grad.clone()

        h = 1e-6
        numeric = torch.zeros_like(z0)
        for r in range(z0.shape[0]):
            for c in range(z0.shape[1]):
                zp = z0.clone()
                zp[r, c] += h
                zm = z0.clone()
                zm[r, c] -= h
                fp = float(contrastive_loss(zp, pairs, temperature=0.07))
                fm = float(contrastive_loss(zm, pairs, temperature=0.07))
                numeric[r, c] = (fp - fm) / (2 * h)
        scale = analytic.abs().max()
        max_rel = float(((analytic - numeric).abs() / scale).max())
        assert max_rel < 1e-4


class TestInvariances:
    def test_positive_scaling_invariance(self):
        torch.manual_seed(5)
        z = torch.randn(8, 7, dtype=torch.float64)
        pairs = [(k, k + 4) for k in range(4)]
        base = float(contrastive_loss(z, pairs, temperature=0.07))
        for alpha in (0.01, 3.0, 250.0):
            scaled = float(contrastive_loss(alpha * z, pairs, temperature=0.07))
            assert scaled == pytest.approx(base, abs=1e-6)

    def test_batch_permutation_invariance(self):
        torch.manual_seed(7)
        z = torch.randn(8, 5, dtype=torch.float64)
        pairs = [(k, k + 4) for k in range(4)]
        base = float(contrastive_loss(z, pairs, temperature=0.07))
        perm = torch.randperm(8)
        inverse = {int(old): new for new, old in enumerate(perm.tolist())}
        remapped = [(inverse[i], inverse[j]) for i, j in pairs]
        permuted = float(contrastive_loss(z[perm], remapped, temperature=0.07))
        assert permuted == pytest.approx(base, abs=1e-9)

    def test_identity_alignment_equals_paired_form(self):
        # The dedicated paired average over (k, k+N) is the special case of
        # the general aligned-pair loss.
        torch.manual_seed(9)
        n = 5
        z = torch.randn(2 * n, 6, dtype=torch.float64)
        pairs = [(k, k + n) for k in range(n)]
        general = float(contrastive_loss(z, pairs, temperature=0.07))
        rows = z.tolist()
        paired = sum(
            direct_single_pair(rows, k, k + n, 0.07)
            + direct_single_pair(rows, k + n, k, 0.07)
            for k in range(n)
        ) / (2 * n)
        assert general == pytest.approx(paired, rel=1e-9)


class TestValidation:
    def test_empty_pairs_rejected(self):
        z = torch.randn(4, 3)
        with pytest.raises(ValueError):
            contrastive_loss(z, [], temperature=0.07)

    def test_bad_temperature_rejected(self):
        z = torch.randn(4, 3)
        with pytest.raises(ValueError):
            contrastive_loss(z, [(0, 1)], temperature=0.0)
