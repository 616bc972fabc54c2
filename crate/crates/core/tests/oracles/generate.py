"""Regenerates the frozen reference values under ../fixtures.

Run from this directory with mpmath, numpy, statsmodels and scikit-learn
installed:

    python3 generate.py

Every value is computed independently of the Rust code: distribution tails
and correlations with mpmath at 50 significant digits, least squares by
normal equations in the same precision, Granger F-tests with statsmodels and
TF-IDF weights with scikit-learn.
"""

import json
import pathlib

import mpmath as mp
import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from statsmodels.tsa.stattools import grangercausalitytests

mp.mp.dps = 50
OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def f(x):
    return float(x)


def t_cdf(t, df):
    t, df = mp.mpf(t), mp.mpf(df)
    tail = mp.betainc(df / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True) / 2
    return tail if t <= 0 else 1 - tail


def f_sf(x, d1, d2):
    x, d1, d2 = mp.mpf(x), mp.mpf(d1), mp.mpf(d2)
    return mp.betainc(d2 / 2, d1 / 2, 0, d2 / (d2 + d1 * x), regularized=True)


def distributions():
    t_points = [
        (-3.5, 1), (-1.0, 2), (0.25, 3), (1.0, 5), (1.96, 10),
        (2.5, 30), (-2.0, 64), (3.1, 126), (0.7, 127.5), (5.0, 128),
    ]
    f_points = [
        (0.5, 1, 10), (1.0, 2, 2), (2.7, 1, 126), (4.0, 2, 123), (0.1, 3, 120),
        (7.5, 3, 120), (1.5, 5, 7), (12.0, 1, 20), (0.95, 2, 60), (25.0, 3, 30),
    ]
    return {
        "t_cdf": [{"t": t, "df": df, "cdf": f(t_cdf(t, df))} for t, df in t_points],
        "f_sf": [
            {"f": x, "d1": d1, "d2": d2, "sf": f(f_sf(x, d1, d2))} for x, d1, d2 in f_points
        ],
    }


def average_ranks(v):
    order = sorted(range(len(v)), key=lambda i: v[i])
    ranks = [0] * len(v)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
            j += 1
        for k in order[i : j + 1]:
            ranks[k] = mp.mpf(i + j) / 2 + 1
        i = j + 1
    return ranks


def mp_pearson(x, y):
    x = [mp.mpf(v) for v in x]
    y = [mp.mpf(v) for v in y]
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    r = sxy / mp.sqrt(sxx * syy)
    df = n - 2
    t = r * mp.sqrt(df / (1 - r * r))
    p = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, df / (df + t * t), regularized=True)
    return r, p


def correlations(rng):
    cases = []
    for i in range(50):
        n = 130
        x = rng.normal(size=n)
        y = rng.uniform(-0.6, 0.6) * x + rng.normal(size=n)
        if i % 5 == 0:
            # coarse rounding creates ties for the rank correlation
            x = np.round(x, 1)
            y = np.round(y, 1)
        x, y = [float(v) for v in x], [float(v) for v in y]
        r, pr = mp_pearson(x, y)
        rho, ps = mp_pearson(average_ranks(x), average_ranks(y))
        cases.append(
            {
                "x": x,
                "y": y,
                "pearson": f(r),
                "pearson_p": f(pr),
                "spearman": f(rho),
                "spearman_p": f(ps),
            }
        )
    small = {"x": [1, 2, 3, 4, 5], "y": [2, 1, 4, 3, 6]}
    r, p = mp_pearson(small["x"], small["y"])
    small.update(pearson=f(r), pearson_p=f(p))
    tied = {"x": [1, 2, 2, 4], "y": [10, 20, 20, 5]}
    rho, p = mp_pearson(average_ranks(tied["x"]), average_ranks(tied["y"]))
    tied.update(spearman=f(rho), spearman_p=f(p))
    return {"random": cases, "small": small, "tied": tied}


def least_squares(rng):
    a = rng.normal(size=(20, 4))
    a[:, 0] = 1.0
    b = rng.normal(size=20)
    A = mp.matrix([[mp.mpf(float(v)) for v in row] for row in a])
    B = mp.matrix([mp.mpf(float(v)) for v in b])
    coef = mp.lu_solve(A.T * A, A.T * B)
    resid = B - A * coef
    rss = sum(r * r for r in resid)
    return {
        "design": [[float(v) for v in row] for row in a],
        "target": [float(v) for v in b],
        "coefficients": [f(c) for c in coef],
        "rss": f(rss),
    }


def granger(rng):
    cases = []
    for i in range(6):
        n = 130
        x = rng.normal(size=n)
        e = rng.normal(size=n)
        y = np.empty(n)
        y[0] = e[0]
        coupling = 0.0 if i % 2 == 0 else 0.3
        for t in range(1, n):
            y[t] = 0.4 * y[t - 1] + coupling * x[t - 1] + e[t]
        for lag in (1, 2, 3):
            res = grangercausalitytests(np.column_stack([y, x]), maxlag=[lag])
            fstat, p, df_den, df_num = res[lag][0]["ssr_ftest"]
            cases.append(
                {
                    "x": [float(v) for v in x],
                    "y": [float(v) for v in y],
                    "lag": lag,
                    "f": float(fstat),
                    "p": float(p),
                    "df_den": int(df_den),
                    "df_num": int(df_num),
                }
            )
    return cases


def tfidf():
    before = [
        "kobe beef dry aged",
        "dry aged steak looks delicious",
        "kobe beef looks delicious kobe beef",
    ]
    after = [
        "beef prices hot dog",
        "hot dog prices going up beef prices",
        "dry aged beef prices",
    ]
    docs = before + after
    vec = TfidfVectorizer(
        analyzer=lambda d: [" ".join(p) for p in zip(d.split(), d.split()[1:])],
        smooth_idf=True,
        norm="l2",
        sublinear_tf=False,
    )
    m = vec.fit_transform(docs).toarray()
    names = list(vec.get_feature_names_out())
    mean_before = m[:3].mean(axis=0)
    mean_after = m[3:].mean(axis=0)
    return {
        "before": before,
        "after": after,
        "vocabulary": names,
        "idf": [float(v) for v in vec.idf_],
        "weights": [[float(v) for v in row] for row in m],
        "mean_before": [float(v) for v in mean_before],
        "mean_after": [float(v) for v in mean_after],
    }


def main():
    rng = np.random.default_rng(20240611)
    OUT.mkdir(exist_ok=True)
    outputs = {
        "distributions.json": distributions(),
        "correlations.json": correlations(rng),
        "least_squares.json": least_squares(rng),
        "granger.json": granger(rng),
        "tfidf.json": tfidf(),
    }
    for name, value in outputs.items():
        (OUT / name).write_text(json.dumps(value, indent=1) + "\n")


if __name__ == "__main__":
    main()
