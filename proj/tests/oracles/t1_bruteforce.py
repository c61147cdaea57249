"""Independent brute-force enumeration of the canonical test model `t1`.

Prints the exact values frozen into tests/unit/oracle_values.hpp. Written
without reference to the C++ enumeration code: loops over every noise
value and every auxiliary draw with explicit probability weights.
"""
import itertools

PW = [0.5, 0.5]
PA = [0.6, 0.4]
PZ = [0.9, 0.1]
PM = [0.7, 0.3]
PY = [0.5, 0.5]


def fw(u): return u
def fa(w, u): return u ^ w
def fz(a, w, u): return a ^ u
def fm(z, a, w, u): return (1 if z + a + w >= 2 else 0) ^ u
def fy(m, z, a, w, u): return a + 0.8 * z + 1.2 * m + 0.5 * w + 0.5 * z * m + u - 0.5


def p_a_given_w(a, w):
    return sum(PA[u] for u in range(2) if fa(w, u) == a)


def p_z_given_aw(z, a, w):
    return sum(PZ[u] for u in range(2) if fz(a, w, u) == z)


def joint():
    cells = {}
    for uw, ua, uz, um in itertools.product(range(2), repeat=4):
        p = PW[uw] * PA[ua] * PZ[uz] * PM[um]
        w = fw(uw); a = fa(w, ua); z = fz(a, w, uz); m = fm(z, a, w, um)
        cells[(w, a, z, m)] = cells.get((w, a, z, m), 0.0) + p
    return cells


TARGETS = ["00", "10", "11", "21", "22", "32", "30", "40"]


def influence_moments():
    ey = {t: 0.0 for t in TARGETS}
    eay = {t: 0.0 for t in TARGETS}
    ea = 0.0
    for uw, ua, uz, um, uy in itertools.product(range(2), repeat=5):
        pu = PW[uw] * PA[ua] * PZ[uz] * PM[um] * PY[uy]
        w = fw(uw); A = fa(w, ua)
        Z = lambda a: fz(a, w, uz)
        M = lambda a, z: fm(z, a, w, um)
        Y = lambda a, z, m: fy(m, z, a, w, uy)
        ea += pu * A
        for ab, za, zu in itertools.product(range(2), repeat=3):
            p = pu * p_a_given_w(ab, w) * p_z_given_aw(za, A, w) * p_z_given_aw(zu, ab, w)
            if p == 0.0:
                continue
            vals = {
                "00": Y(A, Z(A), M(A, Z(A))),
                "10": Y(ab, Z(A), M(A, Z(A))),
                "11": Y(ab, Z(A), M(A, za)),
                "21": Y(ab, Z(ab), M(A, za)),
                "22": Y(ab, zu, M(A, Z(A))),
                "32": Y(ab, zu, M(A, Z(ab))),
                "30": Y(ab, Z(ab), M(A, Z(ab))),
                "40": Y(ab, Z(ab), M(ab, Z(ab))),
            }
            for t, v in vals.items():
                ey[t] += p * v
                eay[t] += p * A * v
    return ea, ey, eay


def ate_means():
    names = ["S0", "S1", "S1p", "S2p", "S2pp", "S3pp", "S3", "S4"]
    out = {k: 0.0 for k in names}
    for uw, ua, uz, um, uy in itertools.product(range(2), repeat=5):
        pu = PW[uw] * PA[ua] * PZ[uz] * PM[um] * PY[uy]
        w = fw(uw)
        Z = lambda a: fz(a, w, uz)
        M = lambda a, z: fm(z, a, w, um)
        Y = lambda a, z, m: fy(m, z, a, w, uy)
        for z1, z0 in itertools.product(range(2), repeat=2):
            p = pu * p_z_given_aw(z1, 1, w) * p_z_given_aw(z0, 0, w)
            vals = {
                "S0": Y(1, Z(1), M(1, Z(1))),
                "S1": Y(0, Z(1), M(1, Z(1))),
                "S1p": Y(0, Z(1), M(1, z1)),
                "S2p": Y(0, Z(0), M(1, z1)),
                "S2pp": Y(0, z0, M(1, Z(1))),
                "S3pp": Y(0, z0, M(1, Z(0))),
                "S3": Y(0, Z(0), M(1, Z(0))),
                "S4": Y(0, Z(0), M(0, Z(0))),
            }
            for k, v in vals.items():
                out[k] += p * v
    return out


def main():
    cells = joint()
    print("joint pmf (w,a,z,m):")
    for key in sorted(cells):
        print("  ", key, repr(cells[key]))
    ea, ey, eay = influence_moments()
    print("E[A] =", repr(ea))
    for t in TARGETS:
        print(f"target {t}: E[Y]={ey[t]!r} E[AY]={eay[t]!r}")
    cov = {t: eay[t] - ea * ey[t] for t in TARGETS}
    theta = cov["00"] - cov["40"]
    comps = {
        "P1": cov["00"] - cov["10"],
        "P2": cov["11"] - cov["21"],
        "P3": cov["22"] - cov["32"],
        "P4": cov["30"] - cov["40"],
        "P2vP3": cov["10"] - cov["11"] + cov["21"] - cov["22"] + cov["32"] - cov["30"],
    }
    print("theta =", repr(theta))
    for k, v in comps.items():
        print(f"theta_{k} =", repr(v))
    print("tau_conf =", repr(cov["40"]))
    ate = ate_means()
    for k, v in ate.items():
        print(f"E[Y_{k}] =", repr(v))
    psi = {
        "psi": ate["S0"] - ate["S4"],
        "P1": ate["S0"] - ate["S1"],
        "P2": ate["S1p"] - ate["S2p"],
        "P3": ate["S2pp"] - ate["S3pp"],
        "P4": ate["S3"] - ate["S4"],
        "P2vP3": ate["S1"] - ate["S1p"] + ate["S2p"] - ate["S2pp"] + ate["S3pp"] - ate["S3"],
    }
    for k, v in psi.items():
        print(f"psi_{k} =", repr(v))


if __name__ == "__main__":
    main()
