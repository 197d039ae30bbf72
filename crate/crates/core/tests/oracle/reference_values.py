"""Arbitrary-precision reference values frozen into the kernel tests.

Every value is computed from the naive textbook expressions at 60 digits,
never from the factored forms used in the library. Derivatives use mpmath's
high-precision numerical differentiation. Run with `python3 reference_values.py`.
"""
import mpmath as mp

mp.mp.dps = 60


def q(lam, s):
    return mp.sqrt(lam + s * s)


def big_e(lam, s, y):
    return mp.exp(-y * q(lam, s)) - mp.exp(-y * s)


def m0(lam, alpha, s, y):
    # first (unsimplified) form of the fundamental solution
    return big_e(lam, s, y) / (lam + (lam + alpha) * (q(lam, s) - s))


def m3(lam, s, y):
    return mp.exp(-y * q(lam, s))


def m4(lam, alpha, s, y):
    return m3(lam, s, y) / (lam + alpha + q(lam, s))


def show(name, z):
    z = mp.mpc(z)
    print(f"{name}: ({mp.nstr(z.real, 20)}, {mp.nstr(z.imag, 20)})")


show("sqrt_shifted(-1+0.5i, 1)", q(mp.mpc(-1, 0.5), 1))
show("big_e(1, 1, 1)", big_e(mp.mpf(1), 1, 1))
show("big_e(1e-6(1+i), 1, 1)", big_e(mp.mpc(1e-6, 1e-6), 1, 1))
show("big_e(1e-10 e^{2i}, 10, 0.5)", big_e(mp.mpf("1e-10") * mp.expj(2), 10, mp.mpf("0.5")))
show("m0(1, 0, 1, 1)", m0(mp.mpf(1), 0, 1, 1))
lam = 10 * mp.expj(3 * mp.pi / 4)
show("m0(10e^{3pi i/4}, 1, 0.5, 2)", m0(lam, 1, mp.mpf("0.5"), 2))
show("m4(1, 0.5, 2, 0.3)", m4(mp.mpf(1), mp.mpf("0.5"), 2, mp.mpf("0.3")))
show("dy_m0(1, 0, 1, 1)", mp.diff(lambda t: m0(mp.mpf(1), 0, 1, t), 1))
lam = 3 * mp.expj(2.0)
show("dy_m0(3e^{2i}, 2, 0.7, 0.4)", mp.diff(lambda t: m0(lam, 2, mp.mpf("0.7"), t), mp.mpf("0.4")))
lam = 2 * mp.expj(mp.pi / 2)
show("ds_m3(2i, 1, 1)", mp.diff(lambda t: m3(lam, t, 1), 1))
show("ds_sE(2i, 1, 1)", mp.diff(lambda t: t * big_e(lam, t, 1), 1))

# pressure symbol for d = 2, xi > 0: -(lam + s^2 - d_y^2) d_y m0 * i / s
def pressure_direct(lam, alpha, s, y):
    f = lambda t: m0(lam, alpha, s, t)
    op = (lam + s * s) * mp.diff(f, y, 1) - mp.diff(f, y, 3)
    return -op * 1j / s


show("pressure(1, 0, xi=1, y=0)", pressure_direct(mp.mpf(1), 0, mp.mpf(1), mp.mpf(0)))
lam = 5 * mp.expj(2.2)
show("pressure(5e^{2.2i}, 0.5, xi=1.5, y=0.8)", pressure_direct(lam, mp.mpf("0.5"), mp.mpf("1.5"), mp.mpf("0.8")))
