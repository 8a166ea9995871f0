"""Recompute the frozen reference values used in tests/ with mpmath.

Run ``python3 tools/derive_oracles.py`` and compare with the constants frozen in tests/.
Nothing here imports g0contrast, so the values are independent of the package.
"""
import mpmath as mp

mp.mp.dps = 40


def log_pdf(z, a, g, L):
    a, g, L = mp.mpf(a), mp.mpf(g), mp.mpf(L)
    return (L * mp.log(L / g) + mp.loggamma(L - a) - mp.loggamma(-a) - mp.loggamma(L)
            + (L - 1) * mp.log(z) + (a - L) * mp.log(1 + L * z / g))


def integral(f):
    return mp.quad(f, [0, mp.mpf("0.01"), mp.mpf("0.1"), 1, 10, 100, 10 ** 4, mp.inf])


def distances(p1, p2, beta=mp.mpf("0.95")):
    f1 = lambda x: mp.exp(log_pdf(x, *p1))
    f2 = lambda x: mp.exp(log_pdf(x, *p2))
    kl = integral(lambda x: (f1(x) - f2(x)) * (log_pdf(x, *p1) - log_pdf(x, *p2))) / 2
    r12 = mp.log(integral(lambda x: f1(x) ** beta * f2(x) ** (1 - beta))) / (beta - 1)
    r21 = mp.log(integral(lambda x: f2(x) ** beta * f1(x) ** (1 - beta))) / (beta - 1)
    bc = integral(lambda x: mp.sqrt(f1(x) * f2(x)))
    js = integral(lambda x: f1(x) * mp.log(2 * f1(x) / (f1(x) + f2(x)))
                  + f2(x) * mp.log(2 * f2(x) / (f1(x) + f2(x)))) / 2
    ag = integral(lambda x: (f1(x) + f2(x)) / 2 * (mp.log((f1(x) + f2(x)) / (2 * f1(x)))
                                                   + mp.log((f1(x) + f2(x)) / (2 * f2(x))))) / 2
    tri = integral(lambda x: (f1(x) - f2(x)) ** 2 / (f1(x) + f2(x)))
    hm = -mp.log(integral(lambda x: 2 * f1(x) * f2(x) / (f1(x) + f2(x))))
    return {"KL": kl, "R": (r12 + r21) / 2, "H": 1 - bc, "B": -mp.log(bc), "JS": js, "AG": ag,
            "T": tri, "HM": hm}


def main():
    print("digamma", {x: mp.nstr(mp.digamma(x), 20) for x in (1, 2, 0.3, 10, 123.4)})
    print("lgamma(0.5)", mp.nstr(mp.loggamma(0.5), 20))
    print("2F1", [mp.nstr(mp.hyp2f1(*args), 20) for args in
                  [(1, 1, 2, 0.5), (0.3, -1.7, 2.2, 0.6), (2.5, 1.5, 0.7, -0.8), (1.2, 3.4, -2.5, 0.3)]])
    print("3F2(1,1,1;2,2;0.25)", mp.nstr(mp.hyp3f2(1, 1, 1, 2, 2, 0.25), 20))
    print("3F2(0.5,1.5,2;2.5,3.1;1)", mp.nstr(mp.hyp3f2(0.5, 1.5, 2, 2.5, 3.1, 1), 20))
    print("Q(2.5,4)", mp.nstr(mp.gammainc(2.5, 4, mp.inf, regularized=True), 20))
    print("logpdf(0.7;-3,2,1)", mp.nstr(log_pdf(mp.mpf("0.7"), -3, 2, 1), 20))
    print("logpdf(2.5;-5.5,4.5,3.2)", mp.nstr(log_pdf(mp.mpf("2.5"), -5.5, 4.5, 3.2), 20))
    for p1, p2 in [((-3, 2, 1), (-5, 4, 1)),
                   ((-2.5, 1.3, 1.5), (-4, 3.5, 1.5)),
                   ((-1.5, 0.5, 1), (-1.5, 1, 1))]:
        d = distances(p1, p2)
        print(p1, p2, {k: mp.nstr(v, 17) for k, v in d.items()})


if __name__ == "__main__":
    main()
