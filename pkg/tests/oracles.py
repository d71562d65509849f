"""Independent reference computations used by the tests."""

import itertools
import math

import numpy as np
from scipy import integrate
from scipy.special import erfc


def pam_mi(levels, sigma2: float) -> float:
    """MI (bits) of equiprobable real PAM levels in Gaussian noise, by adaptive quadrature."""
    levels = np.asarray(levels, dtype=float)
    L = levels.size
    s = math.sqrt(sigma2)

    def integrand(n, xi):
        d = xi - levels
        # log of sum_j exp(-((d_j + n)^2 - n^2) / (2 sigma2)), stabilized
        e = -(d * d + 2 * d * n) / (2 * sigma2)
        mx = e.max()
        lse = mx + math.log(np.exp(e - mx).sum())
        return math.exp(-n * n / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2) * lse / math.log(2)

    total = 0.0
    for xi in levels:
        val, _ = integrate.quad(integrand, -12 * s, 12 * s, args=(xi,), epsabs=1e-11, epsrel=1e-11, limit=400)
        total += val
    return math.log2(L) - total / L


def square_qam_mi(M: int, rho: float) -> float:
    """Unit-energy square M-QAM over complex AWGN with SNR rho: two independent PAMs."""
    side = int(round(math.sqrt(M)))
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    levels /= math.sqrt(2 * np.mean(levels**2))  # half the energy per dimension
    return 2 * pam_mi(levels, 1 / (2 * rho))


def qfunc(x: float) -> float:
    return 0.5 * erfc(x / math.sqrt(2))


def codebook(H: np.ndarray) -> np.ndarray:
    """All codewords of the binary code with parity-check matrix H (brute force)."""
    n = H.shape[1]
    words = np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)
    ok = ~((words @ H.T) % 2).any(axis=1)
    return words[ok]


def bitwise_map(words: np.ndarray, llrs: np.ndarray) -> np.ndarray:
    """Bit-wise MAP decisions (1 if P(c_i = 1 | y) >= 1/2) for L = log P1/P0 channel values."""
    metric = words @ llrs  # log-likelihood up to a constant
    w = np.exp(metric - metric.max())
    p1 = (w[:, None] * words).sum(axis=0) / w.sum()
    return (p1 >= 0.5).astype(np.uint8)


def rsc_walk(u, terminate=True):
    """(1, 11/15)_8 RSC by direct recursion: a_t = u_t + a_{t-1} + a_{t-3}, p_t = a_t + a_{t-3}."""
    a = [0, 0, 0]  # a_{t-1}, a_{t-2}, a_{t-3}
    par, tail_u, tail_p = [], [], []
    for x in u:
        at = x ^ a[0] ^ a[2]
        par.append(at ^ a[2])
        a = [at, a[0], a[1]]
    if terminate:
        for _ in range(3):
            x = a[0] ^ a[2]  # forces a_t = 0
            tail_u.append(x)
            tail_p.append(a[2])
            a = [0, a[0], a[1]]
    return par, tail_u, tail_p


def maxlog_rsc_posterior(ls, la, lp, ts, tp):
    """Max-log posterior of each info bit by enumerating every input block."""
    k = len(ls)
    best = np.full((k, 2), -np.inf)
    for u in itertools.product([0, 1], repeat=k):
        par, tu, tpar = rsc_walk(u)
        metric = (
            np.dot(u, np.add(ls, la)) + np.dot(par, lp) + np.dot(tu, ts) + np.dot(tpar, tp)
        )
        for i, b in enumerate(u):
            best[i, b] = max(best[i, b], metric)
    return best[:, 1] - best[:, 0]


def gray_pam_gmi(side: int, sigma2: float, scale: float) -> float:
    """Sum over bits of I(B_k; Y) for binary-reflected-Gray PAM levels scale*{-(side-1)..side-1}."""
    nb = int(round(math.log2(side)))
    levels = scale * np.arange(-(side - 1), side, 2, dtype=float)
    labels = np.array([i ^ (i >> 1) for i in range(side)])
    bits = (labels[:, None] >> np.arange(nb)[None, :]) & 1
    s = math.sqrt(sigma2)
    total = 0.0
    for k in range(nb):
        for b in (0, 1):
            own = levels[bits[:, k] == b]
            other = levels[bits[:, k] != b]

            def integrand(y, xi):
                lo = np.log(np.exp(-((y - own) ** 2) / (2 * sigma2)).sum() + 1e-300)
                lx = np.log(np.exp(-((y - other) ** 2) / (2 * sigma2)).sum() + 1e-300)
                w = math.exp(-((y - xi) ** 2) / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
                return w * np.logaddexp(0.0, lx - lo) / math.log(2)

            for xi in own:
                val, _ = integrate.quad(integrand, xi - 12 * s, xi + 12 * s, args=(xi,), epsabs=1e-10, epsrel=1e-10, limit=400)
                total += val / side
    # I(B_k; Y) = 1 - mean over b of E[log2(1 + p(y|not b) / p(y|b))]
    return nb - total


def square_qam_gmi(M: int, rho: float) -> float:
    """Bit-wise GMI (exact L-values, s = 1) of Gray square M-QAM: twice the per-axis PAM value."""
    side = int(round(math.sqrt(M)))
    lv = np.arange(-(side - 1), side, 2, dtype=float)
    scale = 1 / math.sqrt(2 * np.mean(lv**2))
    return 2 * gray_pam_gmi(side, 1 / (2 * rho), scale)
