"""Independent brute-force oracles.

Everything here is written from first principles (trial division, repeated
multiplication, exhaustive search, textbook statistics formulas, numerical
quadrature of the t density) and deliberately imports nothing from the
package under test.
"""

import math

from scipy.integrate import quad


def trial_division_prime(x: int) -> bool:
    if x < 2:
        return False
    i = 2
    while i * i <= x:
        if x % i == 0:
            return False
        i += 1
    return True


def naive_mod_pow(base: int, exp: int, modulus: int) -> int:
    result = 1 % modulus
    for _ in range(exp):
        result = result * base % modulus
    return result


def brute_force_inverse(a: int, m: int) -> int | None:
    for d in range(1, m):
        if a * d % m == 1:
            return d
    return None


# -- statistics ---------------------------------------------------------------

def oracle_mean(values):
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def oracle_sample_variance(values):
    m = oracle_mean(values)
    total = 0.0
    for v in values:
        total += (v - m) ** 2
    return total / (len(values) - 1)


def oracle_paired_t(pre, post):
    diffs = [b - a for a, b in zip(pre, post)]
    n = len(diffs)
    sd = math.sqrt(oracle_sample_variance(diffs))
    t = oracle_mean(diffs) / (sd / math.sqrt(n))
    return t, n - 1


def oracle_welch_t(a, b):
    na, nb = len(a), len(b)
    va, vb = oracle_sample_variance(a), oracle_sample_variance(b)
    se2 = va / na + vb / nb
    t = (oracle_mean(a) - oracle_mean(b)) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df


def oracle_pooled_t(a, b):
    na, nb = len(a), len(b)
    va, vb = oracle_sample_variance(a), oracle_sample_variance(b)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    t = (oracle_mean(a) - oracle_mean(b)) / math.sqrt(pooled * (1 / na + 1 / nb))
    return t, na + nb - 2


def oracle_d_paired(pre, post):
    diffs = [b - a for a, b in zip(pre, post)]
    return oracle_mean(diffs) / math.sqrt(oracle_sample_variance(diffs))


def oracle_d_independent(a, b):
    na, nb = len(a), len(b)
    pooled = ((na - 1) * oracle_sample_variance(a) + (nb - 1) * oracle_sample_variance(b)) / (
        na + nb - 2
    )
    return (oracle_mean(a) - oracle_mean(b)) / math.sqrt(pooled)


def _t_pdf(x: float, df: float) -> float:
    log_norm = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - (df + 1) / 2 * math.log1p(x * x / df))


def oracle_p_two_sided(t: float, df: float) -> float:
    """2 * P(T > |t|) by adaptive quadrature of the explicit density."""
    if t == 0.0:
        return 1.0
    tail, _ = quad(_t_pdf, abs(t), math.inf, args=(df,), epsabs=1e-13, epsrel=1e-13)
    return 2.0 * tail
