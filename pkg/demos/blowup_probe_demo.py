"""Probe the critical exponent with the Moser-type concentration family.

The family m_k has unit energy and concentrates logarithmically as k
grows.  At the critical exponent 4 pi the invariant exponential integral
stays bounded along the family; doubling the exponent makes it blow up.
"""

import math

from moebiusdisk import blowup_probe

FOUR_PI = 4.0 * math.pi


def main():
    k_list = [2 ** j for j in range(1, 11)]

    print("exponent p = 4 pi (critical): values stay on a plateau")
    values = blowup_probe(FOUR_PI, k_list)
    for k, v, saturated in values:
        tag = "  (saturated)" if saturated else ""
        print(f"  k = {k:5d}: {v:12.6f}{tag}")
    vals = [v for _, v, _ in values]
    print(f"  spread max/min = {max(vals) / min(vals):.3f}")

    print("\nexponent p = 8 pi (supercritical): values explode")
    values = blowup_probe(2.0 * FOUR_PI, k_list)
    for k, v, saturated in values:
        tag = "  (saturated)" if saturated else ""
        print(f"  k = {k:5d}: {v:12.4e}{tag}")
    vals = [v for _, v, _ in values]
    print(f"  spread max/min = {max(vals) / min(vals):.3e}")


if __name__ == "__main__":
    main()
