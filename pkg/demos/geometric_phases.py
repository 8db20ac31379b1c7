#!/usr/bin/env python3
"""Complex geometric phases of the built-in models.

The cycle phase gamma of each band is complex once gain and loss are on:
its real part stays quantized below the critical strength while its
imaginary part feeds the growth rate of the driven system.  This script
prints both parts, checks the closed form available for the constant
coupling, and verifies that the two bands cancel modulo 2*pi.
"""

import math

from ptcycle import berry_phase, builtin_example, critical_lambda


def closed_form_constant_coupling(lam: float) -> complex:
    # unit-winding constant coupling, below the critical strength
    return complex(-math.pi, math.pi * lam / math.sqrt(1.0 - lam * lam))


def main() -> None:
    print("constant coupling (model 1), closed form vs quadrature")
    for lam in (0.2, 0.5, 0.8):
        res = berry_phase(builtin_example(1, {"r0": 1.0}, lam=lam))
        want = closed_form_constant_coupling(lam)
        print(f"  lambda {lam:.1f}: gamma_plus = {res.gamma_plus:.6f}  "
              f"closed form {want:.6f}  |diff| = {abs(res.gamma_plus - want):.2e}")

    print("\nreal-part quantization below the critical strength")
    for which in (1, 2, 3):
        base = builtin_example(which)
        lam = 0.5 * critical_lambda(base)
        res = berry_phase(base.with_lambda(lam))
        folded = res.gamma_plus.real % (2.0 * math.pi)
        nearest = min((0.0, math.pi, 2.0 * math.pi), key=lambda t: abs(folded - t))
        print(f"  model {which}: Re gamma_plus mod 2pi = {folded:.9f}"
              f"  (nearest multiple of pi: {nearest:.9f})")

    print("\nband cancellation: gamma_plus + gamma_minus mod 2pi")
    for which in (1, 2, 3):
        base = builtin_example(which)
        res = berry_phase(base.with_lambda(0.5 * critical_lambda(base)))
        total = res.gamma_plus + res.gamma_minus
        wrapped = (total.real + math.pi) % (2.0 * math.pi) - math.pi
        print(f"  model {which}: {wrapped:+.2e} {total.imag:+.2e}j")


if __name__ == "__main__":
    main()
