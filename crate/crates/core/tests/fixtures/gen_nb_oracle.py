"""Regenerates nb_oracle.json: random Gaussian naive Bayes instances with the
argmax class computed in 60-digit arithmetic.

Run from this directory: python3 gen_nb_oracle.py
"""
import json
import random

from mpmath import mp, mpf, log, pi

mp.dps = 60
VAR_FLOOR = mpf("1e-9")


def fit(rows, labels):
    classes = sorted(set(labels))
    n, d = len(rows), len(rows[0])
    floor = []
    for j in range(d):
        col = [mpf(r[j]) for r in rows]
        m = sum(col) / n
        floor.append(VAR_FLOOR * (sum((v - m) ** 2 for v in col) / n + mpf("1e-12")))
    model = []
    for c in classes:
        member = [r for r, l in zip(rows, labels) if l == c]
        cnt = len(member)
        means, variances = [], []
        for j in range(d):
            col = [mpf(r[j]) for r in member]
            m = sum(col) / cnt
            v = sum((x - m) ** 2 for x in col) / cnt
            means.append(m)
            variances.append(max(v, floor[j]))
        model.append((c, mpf(cnt) / n, means, variances))
    return model


def argmax(model, x):
    best, best_score = None, None
    for k, (c, prior, means, variances) in enumerate(model):
        s = log(prior)
        for xi, m, v in zip(x, means, variances):
            s += -(log(2 * pi * v) + (mpf(xi) - m) ** 2 / v) / 2
        if best_score is None or s > best_score:
            best, best_score = k, s
    return best


def main():
    rng = random.Random(20240611)
    instances = []
    for i in range(1000):
        k = rng.randint(2, 4)
        d = rng.randint(1, 5)
        scale = 10 ** rng.uniform(-3, 3)
        rows, labels = [], []
        for c in range(k):
            centre = [rng.gauss(0, 2) * scale for _ in range(d)]
            spread = [10 ** rng.uniform(-2, 0.5) * scale for _ in range(d)]
            for _ in range(rng.randint(2, 8)):
                rows.append([mu + rng.gauss(0, s) for mu, s in zip(centre, spread)])
                labels.append(f"class{c}")
        # Every fourth instance has a constant feature to exercise the variance floor.
        if i % 4 == 0:
            j = rng.randrange(d)
            for r in rows:
                r[j] = 1.5 * scale
        model = fit(rows, labels)
        queries = []
        for q in range(3):
            if q == 2:
                # Far-away query: per-feature densities underflow in linear space.
                x = [rng.gauss(0, 1) * scale * 1e3 for _ in range(d)]
            else:
                base = rows[rng.randrange(len(rows))]
                x = [v + rng.gauss(0, 0.5) * scale for v in base]
            queries.append({"x": x, "class": model[argmax(model, x)][0]})
        instances.append({"rows": rows, "labels": labels, "queries": queries})
    with open("nb_oracle.json", "w") as f:
        json.dump(instances, f, separators=(",", ":"))
        f.write("\n")


if __name__ == "__main__":
    main()
