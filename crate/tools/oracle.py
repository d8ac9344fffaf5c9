"""Extended-precision reference values frozen into crates/quasi-inner/tests/reference_values.rs.

Run: python3 tools/oracle.py
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 30
HALF = mp.mpf(1) / 2


def rho_inf(z):
    return mp.pi ** (HALF - z) * mp.gamma(z / 2) / mp.gamma((1 - z) / 2)


def rho_p(p, z):
    return (1 - mp.mpf(p) ** (z - 1)) / (1 - mp.mpf(p) ** (-z))


def gamma_p(p, z):
    return 1 / (1 - mp.mpf(p) ** (-z))


def theta_of_s(s):
    return 2 * mp.atan2(1, -s)


def integrand(f, k, s):
    return f(HALF + 1j * s) * mp.exp(1j * k * theta_of_s(s)) * 2 / (1 + s * s)


def refine(breaks, cap):
    """Panels no wider than max(1/4, |s|/8) and cap, so nearby poles stay resolved."""
    out = [breaks[0]]
    for b in breaks[1:]:
        a = out[-1]
        width = min(cap, max(mp.mpf(1) / 4, min(abs(a), abs(b)) / 8))
        n = int(mp.ceil((b - a) / width))
        out.extend(a + (b - a) * j / n for j in range(1, n + 1))
    return out


def gl_sum(f, ks, breaks, nodes, cap=mp.inf):
    """Σ over panels of a fixed Gauss-Legendre rule, all k at once."""
    breaks = refine(breaks, cap)
    xs, ws = (list(map(mp.mpf, a)) for a in np.polynomial.legendre.leggauss(nodes))
    totals = {k: mp.mpc(0) for k in ks}
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid, half = (a + b) / 2, (b - a) / 2
        for x, w in zip(xs, ws):
            s = mid + half * x
            fv = f(HALF + 1j * s) * 2 / (1 + s * s) * w * half
            th = theta_of_s(s)
            for k in ks:
                totals[k] += fv * mp.exp(1j * k * th)
    return totals


def oscillatory_tail(f, k, s):
    """∫_s^∞ g ≈ -g(s)/D(s), D the log-derivative of the integrand."""
    h = mp.mpf("1e-8")
    g = integrand(f, k, s)
    d = (integrand(f, k, s + h) - integrand(f, k, s - h)) / (2 * h) / g
    return -g / d


def coeffs_inf(ks, s_max, nodes):
    pts = [mp.mpf(0)]
    while pts[-1] < s_max:
        s = pts[-1]
        pts.append(s + 2 * mp.pi / max(mp.log(max(s, 1) / (2 * mp.pi)) + 1, 1))
    br = [-x for x in reversed(pts[1:])] + pts
    tot = gl_sum(rho_inf, ks, br, nodes)
    out = {}
    for k in ks:
        right = oscillatory_tail(rho_inf, k, br[-1])
        left = -oscillatory_tail(rho_inf, k, br[0])
        out[k] = (tot[k] + right + left) / (2 * mp.pi)
    return out


def coeffs_p(p, ks, n_per, nodes):
    per = 2 * mp.pi / mp.log(p)
    br = [per * (j - n_per) - per / 2 for j in range(2 * n_per + 2)]
    f = lambda w: rho_p(p, w)
    tot = gl_sum(f, ks, br, nodes, cap=mp.mpf(1) / 2)
    mean = 1 - mp.mpf(1) / p
    # the symbol averages to its mean over each period; e^{ikθ} ≈ 1 on the tails
    tail = 2 * (2 * (mp.pi / 2 - mp.atan(br[-1])))
    return {k: (tot[k] + mean * tail) / (2 * mp.pi) for k in ks}


def main():
    out = {}
    out["gamma3_half_07i"] = gamma_p(3, HALF + mp.mpf("0.7") * 1j)
    out["rho_inf_03_17i"] = rho_inf(mp.mpf("0.3") + mp.mpf("1.7") * 1j)
    r = lambda n: (-1) ** n * 2 * mp.pi ** (2 * n + HALF) / (mp.gamma(n + 1) * mp.gamma(n + HALF))
    out["pole_part_inf_minus_half"] = mp.fsum(r(n) / (-HALF + 2 * n) for n in range(80))
    out["abs2_rho_inf_2i"] = abs(rho_inf(2j)) ** 2
    h = lambda w: w * w * rho_inf(w) * rho_p(2, w)
    out["double_pole_c2_inf_p2"] = mp.limit(h, 0)

    mp.mp.dps = 20
    ks = [1, 2, 3]
    # remainder after n periods falls off like n^-3; one Richardson step
    lo, hi = coeffs_p(2, ks, 80, 12), coeffs_p(2, ks, 160, 12)
    for k in ks:
        out[f"a_minus{k}_p2"] = hi[k] + (hi[k] - lo[k]) / 7
        out[f"a_minus{k}_p2_spread"] = abs(hi[k] - lo[k]) / 7
    lo, hi = coeffs_inf(ks, 800, 12), coeffs_inf(ks, 1600, 12)
    for k in ks:
        out[f"a_minus{k}_inf"] = hi[k]
        out[f"a_minus{k}_inf_spread"] = abs(hi[k] - lo[k])
    for key, v in out.items():
        v = mp.mpc(v)
        print(f"{key}: {mp.nstr(v.real, 18)} {mp.nstr(v.imag, 18)}", flush=True)


if __name__ == "__main__":
    main()
