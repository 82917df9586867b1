"""Independent reference computations used to freeze expected values.

Everything here is written from the textbook definitions with exact rational
arithmetic or naive loops, sharing no code with the package.
"""

from fractions import Fraction as F


def sample_acf(values, lag):
    x = [F(v) for v in values]
    mean = sum(x) / len(x)
    dev = [v - mean for v in x]
    num = sum(dev[t] * dev[t - lag] for t in range(lag, len(dev)))
    return num / sum(d * d for d in dev)


def simple_regression(x, y):
    """Solve the 2x2 normal equations for y = a + b x."""
    x = [F(v) for v in x]
    y = [F(v) for v in y]
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    det = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / det
    intercept = (sy * sxx - sx * sxy) / det
    return intercept, slope


def thams_prediction(beta, a, b):
    return F(beta) / (1 - F(a) * F(b))


def clearing_price(b0d, bd, b0s, bs, bw, w, lagsum=0):
    return (F(b0s) - F(b0d) + F(bw) * F(w) - F(lagsum)) / (F(bd) - F(bs))


def calibrated_intercept(target, mean_wind, slope, ar_sum, bs=4, bw=16, b0s=0):
    mu_p = (F(target) - F(bw) * F(mean_wind) - F(b0s)) / F(bs)
    return F(target) * (1 - F(ar_sum)) - F(slope) * mu_p


def naive_hac(X, e, bandwidth):
    """(X'X)^-1 S (X'X)^-1 with S built from the double sum over (t, s)."""
    n = len(e)
    k = len(X[0])
    xtx = [[sum(X[t][i] * X[t][j] for t in range(n)) for j in range(k)] for i in range(k)]
    meat = [[0.0] * k for _ in range(k)]
    for t in range(n):
        for s in range(n):
            lag = abs(t - s)
            if lag > bandwidth:
                continue
            w = 1.0 - lag / (bandwidth + 1.0)
            for i in range(k):
                for j in range(k):
                    meat[i][j] += w * X[t][i] * e[t] * X[s][j] * e[s]
    inv = _inverse(xtx)
    return _matmul(_matmul(inv, meat), inv)


def _matmul(a, b):
    return [[sum(a[i][m] * b[m][j] for m in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _inverse(a):
    n = len(a)
    aug = [list(map(float, row)) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(aug[r][c]))
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [v / p for v in aug[c]]
        for r in range(n):
            if r != c:
                f = aug[r][c]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]
