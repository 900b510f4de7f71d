import math

import numpy as np
import pytest

import olfalign as oa


def test_metrics_match_numpy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=50)
    y = 0.5 * x + rng.normal(size=50)
    r, p = oa.pearson(x.tolist(), y.tolist())
    assert r == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
    assert 0.0 <= p <= 1.0
    assert oa.roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)
    assert oa.nrmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_undefined_auc_raises():
    with pytest.raises(oa.UndefinedMetricError):
        oa.roc_auc([0.1, 0.2], [1, 1])


def test_pca_and_probes():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 6))
    model = oa.fit_pca(X, 3)
    Z = model.transform(X)
    assert Z.shape == (30, 3)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-10)
    w, b = oa.fit_lasso(X, X[:, 0] * 2.0 + 1.0, 0.0)
    np.testing.assert_allclose(w, [2, 0, 0, 0, 0, 0], atol=1e-6)
    assert b == pytest.approx(1.0, abs=1e-6)
    splits = oa.make_splits(10, repetitions=2, seed=3)
    assert [len(te) for _, te in splits] == [2, 2]


def test_rsa_identity():
    ids = [f"m{i}" for i in range(8)]
    rng = np.random.default_rng(2)
    E = rng.normal(size=(8, 4))
    table = oa.EmbeddingTable(ids, E, "toy")
    pairs, scores = [], []
    for i in range(8):
        for j in range(i + 1, 8):
            pairs.append((ids[i], ids[j]))
            scores.append(float(E[i] @ E[j] / np.linalg.norm(E[i]) / np.linalg.norm(E[j])))
    judged = oa.SimilarityJudgmentSet(pairs, scores, (-1.0, 1.0))
    result = oa.run_rsa(table, judged)
    assert result["r"] == 1.0
    assert result["n_pairs"] == 28


def test_regression_report(tmp_path):
    rng = np.random.default_rng(3)
    ids = [f"m{i}" for i in range(60)]
    E = rng.normal(size=(60, 5))
    table = oa.EmbeddingTable(ids, E, "toy")
    ratings = oa.RatingSet(ids, ["sweet"], np.tanh(E[:, :1]), (-1.0, 1.0))
    report = oa.run_rating_regression(table, ratings, seed=4, repetitions=3)
    csv = report.to_csv()
    assert csv.startswith("task,dataset,model,layer,descriptor,metric,mean,std,n,input_digest")
    assert any(row["metric"] == "cc" and row["mean"] > 0.9 for row in report.rows)
    report.write(str(tmp_path))
    assert (tmp_path / "report.csv").exists()


def test_cli_help():
    assert oa.run_cli(["--help"]) == 0
    assert oa.run_cli(["frobnicate"]) == 2
