# Copyright 2026 The cqed-thermometry Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Dense numpy reference values frozen into the C++ unit tests.

Independent of the C++ code path: operators are built with numpy kron in
the cavity-major order, Liouvillians are dense, steady states come from the
eigenvector of the eigenvalue closest to zero, and spectra are dense solves.
Run: python3 tests/oracle/fixtures.py
"""
import numpy as np
from scipy.optimize import brentq

TWO_PI = 2 * np.pi
H_PLANCK = 6.62607015e-34
K_B = 1.380649e-23


def ops(nc, nt, ratios=None):
    a_c = np.diag(np.sqrt(np.arange(1, nc)), 1)
    if ratios is None:
        ratios = [np.sqrt(l) for l in range(1, nt)]
    s = np.zeros((nt, nt))
    for l in range(1, nt):
        s[l - 1, l] = ratios[l - 1]
    a = np.kron(a_c, np.eye(nt))
    sig = np.kron(np.eye(nc), s)
    nt_op = np.kron(np.eye(nc), np.diag(np.arange(nt)))
    return a, sig, nt_op


def transmon_levels(ec, ej, n):
    w = np.sqrt(8 * ec * ej)
    return np.array([w * m - ec * (m * m + m) / 2 for m in range(n)])


def hamiltonian(nc, nt, nu_r, levels, g, frame):
    a, sig, _ = ops(nc, nt)
    hq = np.kron(np.eye(nc), np.diag(levels))
    h = nu_r * a.T @ a + hq + g * (a.T @ sig + a @ sig.T)
    n_exc = a.T @ a + np.kron(np.eye(nc), np.diag(np.arange(nt)))
    return TWO_PI * (h - frame * n_exc)


def dissipator(c):
    d = c.shape[0]
    i = np.eye(d)
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * (np.kron(i, cdc) + np.kron(cdc.T, i))


def liouvillian(h, channels):
    d = h.shape[0]
    i = np.eye(d)
    L = -1j * (np.kron(i, h) - np.kron(h.T, i))
    for c, rate in channels:
        if rate > 0:
            L = L + rate * dissipator(c)
    return L


def steady(L):
    w, v = np.linalg.eig(L)
    k = np.argmin(np.abs(w))
    d = int(round(np.sqrt(L.shape[0])))
    rho = v[:, k].reshape(d, d, order="F")
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def paper_channels(nc, nt, n_th, kappa_mhz=3.2, gamma_mhz=0.6):
    a, sig, _ = ops(nc, nt)
    k = TWO_PI * kappa_mhz * 1e-3
    g = TWO_PI * gamma_mhz * 1e-3
    return [(a, (n_th + 1) * k), (a.T, n_th * k), (sig, g)]


def main():
    print("# ej_of_flux oracle")
    ec, ejmax, nu_r = 0.502, 14.4, 6.44
    ej = brentq(lambda e: np.sqrt(8 * ec * e) - ec - nu_r, 1.0, 14.4, xtol=1e-14)
    flux = np.arccos(ej / ejmax) / np.pi
    print(f"E_J resonant {ej:.15g}  flux {flux:.15g}  ej_of_flux(0.1864) {ejmax*abs(np.cos(np.pi*0.1864)):.15g}")

    print("# transmon (0.502, 14.4, 3)")
    print(transmon_levels(ec, ejmax, 3))

    print("# D[a]|2><2| at dim 3")
    a3 = np.diag(np.sqrt([1.0, 2.0]), 1)
    rho = np.zeros((3, 3)); rho[2, 2] = 1
    out = (dissipator(a3) @ rho.reshape(-1, order="F")).reshape(3, 3, order="F")
    print(np.real(out))

    print("# steady-state P_e at n_th = 1, 15 x 2, resonant, paper rates")
    nc, nt = 15, 2
    lv = transmon_levels(ec, ej, nt)  # lv[1] = nu_r
    h = hamiltonian(nc, nt, nu_r, lv, 0.054, nu_r)
    rho = steady(liouvillian(h, paper_channels(nc, nt, 1.0)))
    pe = np.real(np.trace(rho @ np.kron(np.eye(nc), np.diag([0, 1]))))
    n_mean = np.real(np.trace(rho @ ops(nc, nt)[0].T @ ops(nc, nt)[0]))
    print(f"P_e {pe:.15g}  <n> {n_mean:.15g}")

    print("# transmission amplitude, 4 x 3, n_th = 0.3, paper params, lab-frame GHz")
    nc, nt = 4, 3
    lv = transmon_levels(ec, ej, nt)
    h = hamiltonian(nc, nt, nu_r, lv, 0.054, nu_r)
    L = liouvillian(h, paper_channels(nc, nt, 0.3))
    rho = steady(L)
    a = ops(nc, nt)[0]
    d = nc * nt
    src = (a.T @ rho - rho @ a.T).reshape(-1, order="F")
    kappa = TWO_PI * 3.2e-3
    for f in [6.386, 6.40, 6.44, 6.494, 6.5]:
        w = TWO_PI * (f - nu_r)
        x = np.linalg.solve(-1j * w * np.eye(d * d) - L, src)
        amp = 0.5 * kappa * np.trace(a @ x.reshape(d, d, order="F"))
        print(f"f {f}: A = {amp.real:.15g} {amp.imag:+.15g}j  |A|^2 = {abs(amp)**2:.15g}")

    print("# dispersive shift, two-level, qubit at nu_r + 0.5 GHz")
    nc, nt = 3, 2
    lv = np.array([0.0, nu_r + 0.5])
    h = hamiltonian(nc, nt, nu_r, lv, 0.054, 0.0) / TWO_PI
    # n = 1 block: |g,1> (index 2) and |e,0> (index 1)
    blk = h[np.ix_([1, 2], [1, 2])]
    print("block-1 eigenvalues GHz", np.linalg.eigvalsh(blk), " g^2/Delta", 0.054**2 / 0.5)

    print("# thermometry")
    for T in [0.095, 115.0]:
        x = H_PLANCK * 6.44e9 / (K_B * T)
        print(f"T {T}: n_th {1/np.expm1(x):.15g}")
    for n in [0.04, 370.0]:
        print(f"n {n}: T {H_PLANCK*6.44e9/K_B/np.log1p(1/n):.15g}")
    for s in [-214.0, -221.5]:
        w = 10 ** ((s - 30) / 10)
        print(f"S {s}: n {w/(H_PLANCK*6.44e9):.15g}")


if __name__ == "__main__":
    main()
