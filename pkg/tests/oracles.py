"""Hand-rolled reference implementations used to pin the numerical code.

Everything here is pure Python on purpose: no numpy, no scipy, so the
production results are checked against an independent arithmetic path.
"""

import math


def solve(A, b):
    """Gaussian elimination with partial pivoting for a small dense system."""
    n = len(A)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            for j in range(col, n + 1):
                M[r][j] -= f * M[col][j]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = M[i][n] - sum(M[i][j] * x[j] for j in range(i + 1, n))
        x[i] = s / M[i][i]
    return x


def invert(A):
    n = len(A)
    cols = [solve(A, [1.0 if i == j else 0.0 for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _betacf(a, b, x):
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter, eps, tiny = 300, 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def betainc_reg(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided(t, df):
    """Two-sided tail probability of a Student t statistic."""
    if math.isnan(t):
        return float("nan")
    return betainc_reg(df / 2.0, 0.5, df / (df + t * t))


def ols_reference(y, X):
    """Normal-equations least squares with classical inference.

    ``X`` rows already include any intercept column.  Returns
    (beta, std_errors, t_stats, p_values, r_squared) as plain lists,
    with the centred R-squared (an intercept is assumed present).
    """
    n = len(y)
    k = len(X[0])
    XtX = [[sum(X[i][a] * X[i][b] for i in range(n)) for b in range(k)] for a in range(k)]
    Xty = [sum(X[i][a] * y[i] for i in range(n)) for a in range(k)]
    beta = solve(XtX, Xty)
    resid = [y[i] - sum(X[i][a] * beta[a] for a in range(k)) for i in range(n)]
    rss = sum(e * e for e in resid)
    df = n - k
    sigma2 = rss / df
    inv = invert(XtX)
    se = [math.sqrt(inv[a][a] * sigma2) for a in range(k)]
    t = [beta[a] / se[a] for a in range(k)]
    p = [student_t_two_sided(t[a], df) for a in range(k)]
    ybar = sum(y) / n
    tss = sum((v - ybar) ** 2 for v in y)
    r2 = 1.0 - rss / tss
    return beta, se, t, p, r2


def line_fit_reference(x, y):
    """Closed-form simple regression: intercept, slope, centred R-squared."""
    n = len(x)
    sx = sum(x)
    sy = sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    ybar = sy / n
    tss = sum((v - ybar) ** 2 for v in y)
    rss = sum((yv - intercept - slope * xv) ** 2 for xv, yv in zip(x, y))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return intercept, slope, r2
