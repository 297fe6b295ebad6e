import numpy as np
import pytest

from rodeokde.synth import (
    EX2_MEANS,
    augment_noise,
    derived_rng,
    ex1_relevant_dims,
    export_csv,
    generate_ex1,
    generate_ex2,
    generate_ex3,
)


class TestDerivedRng:
    def test_deterministic(self):
        a = derived_rng(5, 1, 2).random(4)
        b = derived_rng(5, 1, 2).random(4)
        assert np.array_equal(a, b)

    def test_tag_sensitivity(self):
        assert derived_rng(5, 1).random() != derived_rng(5, 2).random()

    def test_tuple_seed(self):
        assert np.array_equal(derived_rng((5, 1), 2).random(3), derived_rng(5, 1, 2).random(3))


class TestEx1:
    def test_shapes_and_labels(self):
        train, X, y = generate_ex1(0, 20, 10)
        assert train.class_count == 10
        assert train.d == 30
        assert all(m.shape == (20, 30) for m in train.class_samples)
        assert X.shape == (100, 30)
        assert sorted(set(y)) == list(range(1, 11))

    def test_relevant_dims_structure(self):
        assert ex1_relevant_dims(1) == (0, 1, 2, 3, 4, 5)
        assert ex1_relevant_dims(10) == (9, 10, 11, 12, 13, 14)

    def test_moments(self):
        train, _, _ = generate_ex1(7, 10000, 0, pool_size=10000)
        g1 = train.class_samples[0]
        # column 1: N(0.5, 0.02^2)
        assert g1[:, 0].mean() == pytest.approx(0.5, abs=0.001)
        assert g1[:, 0].std(ddof=1) == pytest.approx(0.02, rel=0.05)
        # column 7: Uniform(0,1)
        assert g1[:, 6].mean() == pytest.approx(0.5, abs=0.01)
        assert g1[:, 6].var(ddof=1) == pytest.approx(1 / 12, abs=0.005)
        # every group's informative columns have shrinking spread pattern
        for yi in range(10):
            cols = ex1_relevant_dims(yi + 1)
            stds = train.class_samples[yi][:, cols].std(axis=0, ddof=1)
            assert np.all(np.diff(stds) > 0)

    def test_determinism(self):
        a = generate_ex1(3, 15, 5)
        b = generate_ex1(3, 15, 5)
        for ma, mb in zip(a[0].class_samples, b[0].class_samples):
            assert np.array_equal(ma, mb)
        assert np.array_equal(a[1], b[1])

    def test_size_errors(self):
        with pytest.raises(ValueError):
            generate_ex1(0, 900, 200)
        with pytest.raises(ValueError):
            generate_ex1(0, 0, 10)


class TestEx2:
    def test_moments(self):
        train, _, _, groups = generate_ex2(11, {4}, 10000, 0)
        assert groups == (4,)
        m = train.class_samples[0]
        assert m[:, 0].mean() == pytest.approx(-0.2180, abs=0.004)
        assert m[:, 1].mean() == pytest.approx(-0.3815, abs=0.008)
        assert m[:, 0].std(ddof=1) == pytest.approx(0.1, rel=0.05)
        assert m[:, 1].std(ddof=1) == pytest.approx(0.2, rel=0.05)
        assert abs(np.corrcoef(m[:, 0], m[:, 1])[0, 1]) < 0.03
        # dims 3-10 uniform
        assert np.all(m[:, 2:] >= 0) and np.all(m[:, 2:] <= 1)
        assert np.allclose(m[:, 2:].mean(axis=0), 0.5, atol=0.02)

    def test_all_group_means(self):
        for g, mu in EX2_MEANS.items():
            train, _, _, _ = generate_ex2(12, {g}, 10000, 0)
            m = train.class_samples[0]
            assert m[:, 0].mean() == pytest.approx(mu[0], abs=0.004)
            assert m[:, 1].mean() == pytest.approx(mu[1], abs=0.008)

    def test_label_reencoding(self):
        train, _, y, groups = generate_ex2(1, {3, 5}, 10, 5)
        assert groups == (3, 5)
        assert train.labels == (1, 2)
        assert sorted(set(y)) == [1, 2]

    def test_errors(self):
        with pytest.raises(ValueError):
            generate_ex2(0, set(), 10, 5)
        with pytest.raises(ValueError):
            generate_ex2(0, {0, 1}, 10, 5)


class TestEx3:
    def test_first_combinations(self):
        for k in (2, 3, 4, 5):
            _, _, _, groups = generate_ex3(0, 10, k, n_test=5)
            assert groups == tuple(range(1, k + 1))

    def test_groups_override(self):
        _, _, _, groups = generate_ex3(0, 10, 2, n_test=5, groups=(4, 5))
        assert groups == (4, 5)

    def test_determinism(self):
        a = generate_ex3(9, 30, 3)
        b = generate_ex3(9, 30, 3)
        for ma, mb in zip(a[0].class_samples, b[0].class_samples):
            assert np.array_equal(ma, mb)

    def test_bad_group_count(self):
        with pytest.raises(ValueError):
            generate_ex3(0, 10, 6)


class TestAugmentNoise:
    def test_identity_at_zero(self):
        X = np.arange(6.0).reshape(3, 2)
        out = augment_noise(X, 0, 1)
        assert np.array_equal(out, X)
        assert out is not X

    def test_moments_and_preservation(self):
        rng = np.random.default_rng(13)
        X = rng.random((10000, 2))
        out = augment_noise(X, 3, 5)
        assert out.shape == (10000, 5)
        assert np.array_equal(out[:, :2], X)
        assert np.allclose(out[:, 2:].mean(axis=0), 0.0, atol=0.03)
        assert np.allclose(out[:, 2:].var(axis=0, ddof=1), 1.0, atol=0.05)

    def test_negative_k(self):
        with pytest.raises(ValueError):
            augment_noise(np.zeros((2, 2)), -1, 0)


class TestExportCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(17)
        X = rng.random((5, 3))
        y = [1, 2, 1, 2, 1]
        path = tmp_path / "data.csv"
        export_csv(path, X, y)
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,x2,x3,label"
        parsed = np.array([[float(v) for v in ln.split(",")[:3]] for ln in lines[1:]])
        assert np.array_equal(parsed, X)
        assert [int(ln.split(",")[3]) for ln in lines[1:]] == y
