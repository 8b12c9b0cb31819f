"""Regenerates the reference fixtures for the stats crate from scipy/statsmodels."""
import json
import pathlib

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.formula.api import ols
from statsmodels.stats.anova import anova_lm

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/stats/tests/fixtures"
rng = np.random.default_rng(20240611)


def paired():
    cases = []
    for _ in range(50):
        n = int(rng.integers(5, 41))
        x = rng.normal(rng.uniform(-2, 5), rng.uniform(0.5, 3), n)
        y = x + rng.normal(rng.uniform(-1, 1), rng.uniform(0.2, 2), n)
        r = stats.ttest_rel(x, y)
        cases.append({"x": x.tolist(), "y": y.tolist(), "t": r.statistic, "df": n - 1, "p": r.pvalue,
                      "mean_diff": float(np.mean(x - y))})
    return cases


def anova():
    cases = []
    for _ in range(50):
        na, nb = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        rows = []
        effa = rng.normal(0, 1, na)
        effb = rng.normal(0, 1, nb)
        inter = rng.normal(0, 0.7, (na, nb))
        for i in range(na):
            for j in range(nb):
                for _ in range(int(rng.integers(2, 9))):
                    rows.append((f"a{i}", f"b{j}", effa[i] + effb[j] + inter[i, j] + rng.normal(0, 1)))
        df = pd.DataFrame(rows, columns=["a", "b", "y"])
        t = anova_lm(ols("y ~ C(a) * C(b)", data=df).fit(), typ=2)
        ss_err = float(t.loc["Residual", "sum_sq"])
        effects = []
        for key, name in [("C(a)", "A"), ("C(b)", "B"), ("C(a):C(b)", "A:B")]:
            ss = float(t.loc[key, "sum_sq"])
            effects.append({"effect": name, "sum_sq": ss, "df": float(t.loc[key, "df"]), "f": float(t.loc[key, "F"]),
                            "p": float(t.loc[key, "PR(>F)"]), "partial_eta_sq": ss / (ss + ss_err)})
        cases.append({"y": df.y.tolist(), "a": df.a.tolist(), "b": df.b.tolist(), "ss_error": ss_err,
                      "df_error": float(t.loc["Residual", "df"]), "effects": effects})
    return cases


def tukey():
    cases = []
    for _ in range(50):
        k = int(rng.integers(2, 6))
        groups = [rng.normal(rng.uniform(-1, 1), 1, int(rng.integers(3, 16))) for _ in range(k)]
        r = stats.tukey_hsd(*groups)
        ci = r.confidence_interval(0.95)
        pairs = []
        for i in range(k):
            for j in range(i + 1, k):
                pairs.append({"i": i, "j": j, "diff": float(r.statistic[i, j]), "p": float(r.pvalue[i, j]),
                              "low": float(ci.low[i, j]), "high": float(ci.high[i, j])})
        cases.append({"groups": [g.tolist() for g in groups], "pairs": pairs})
    return cases


def cohens_d():
    cases = []
    for _ in range(50):
        x = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), int(rng.integers(3, 30)))
        y = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), int(rng.integers(3, 30)))
        nx, ny = len(x), len(y)
        pooled = np.sqrt(((nx - 1) * x.var(ddof=1) + (ny - 1) * y.var(ddof=1)) / (nx + ny - 2))
        cases.append({"x": x.tolist(), "y": y.tolist(), "d": float((x.mean() - y.mean()) / pooled)})
    return cases


for name, build in [("paired_t", paired), ("anova", anova), ("tukey", tukey), ("cohens_d", cohens_d)]:
    (OUT / f"{name}.json").write_text(json.dumps(build()))
