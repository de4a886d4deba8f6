"""Complex digamma function, dependency-free.

Evaluation scheme: reflect arguments with Re(z) < 1/2 using

    psi(z) = psi(1 - z) - pi * cot(pi * z),

push the argument up with the recurrence psi(z + 1) = psi(z) + 1/z until
|z| >= 10, then apply the asymptotic (de Moivre) expansion

    psi(z) ~ ln z - 1/(2z) - sum_n B_{2n} / (2n z^{2n})

with Bernoulli terms through B_14.  At |z| = 10 the first dropped term is
~ B_16/(16 |z|^16) ~ 4e-17, so the scheme is accurate to double precision
away from the poles at 0, -1, -2, ...
"""

import cmath

# B_{2n}/(2n) for n = 1..7:  B_2=1/6, B_4=-1/30, B_6=1/42, B_8=-1/30,
# B_10=5/66, B_12=-691/2730, B_14=7/6.
_ASYMP_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

_RECURRENCE_RADIUS = 10.0


def digamma(z) -> complex:
    """psi(z) for complex (or real) z; raises ValueError at the poles."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError(f"digamma pole at z = {z.real:g}")

    acc = 0.0 + 0.0j
    if z.real < 0.5:
        # reflection; cot(pi z) is finite here since z is not a nonpositive integer
        acc -= cmath.pi / cmath.tan(cmath.pi * z)
        z = 1.0 - z

    while abs(z) < _RECURRENCE_RADIUS:
        acc -= 1.0 / z
        z += 1.0

    u = 1.0 / (z * z)
    series = 0.0 + 0.0j
    for c in reversed(_ASYMP_COEFFS):
        series = u * (c + series)
    return acc + cmath.log(z) - 0.5 / z - series
