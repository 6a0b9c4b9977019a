"""First-kind Bessel functions evaluated by their ascending power series.

The dimensionless hopping arguments of this model are x = t/F << 1 (at most
O(1)), so the ascending series is both the simplest and the most accurate
route: for |x| <= 10 the alternating terms decay factorially after k ~ x/2
and the result carries at least 10 significant digits in double precision.
"""

import math

# Series term count: for |x| <= 10 the term ratio (x/2)^2 / (k(n+k)) drops
# below 1 once k(n+k) > 25 and then decays factorially; 60 terms is far past
# convergence for the whole supported domain.
_MAX_TERMS = 60


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer order n.

    Accurate to >= 10 significant digits for |x| <= 10; outside that range
    the series still converges but cancellation slowly erodes precision.
    Negative orders and arguments are folded back with
    J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x).
    """
    n = int(n)
    x = float(x)
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0.0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return sign if n == 0 else 0.0

    half = 0.5 * x
    if n <= 170:
        term = half**n / math.factorial(n)
    else:
        # avoid float overflow in x**n / n! for very large orders
        term = math.exp(n * math.log(half) - math.lgamma(n + 1.0))
    total = term
    peak = abs(term)
    for k in range(1, _MAX_TERMS):
        term *= -(half * half) / (k * (n + k))
        total += term
        peak = max(peak, abs(term))
        # stop once further terms cannot move the double-precision sum
        if abs(term) <= 1e-17 * peak:
            break
    return sign * total
