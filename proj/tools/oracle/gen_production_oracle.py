"""Reference values at t = 0 for the production-planning preset.

Scalar limit system (P, K, Pi, M, phi, psi) integrated backward twice: scipy
DOP853 at tight tolerance and a plain RK4 with 1e5 steps. Both must agree to
1e-10 before the fixture is written.

    python tools/oracle/gen_production_oracle.py tests/fixtures/production_oracle.json
"""

import json
import sys

import numpy as np
from scipy.integrate import solve_ivp

PARAMS = dict(r=0.1, c=0.5, m=0.3, d=2.0, b_tilde=0.1, g=0.5, a_tilde=0.1, g_tilde=0.5,
              Q=1.0, R=10.0, eta2=6.0, G=1.0, target=2.5, T=1.0)


def coefficients(p):
    return dict(
        A=-(p["r"] + p["m"]), B=p["c"], E=p["m"], f=-p["d"],
        C=0.0, D=p["b_tilde"], F=0.0, g=p["g_tilde"],
        C0=p["a_tilde"], D0=0.0, F0=0.0, g0=p["g"],
        Q=p["Q"], R=p["R"], G1=1.0, eta1=0.0, eta2=p["eta2"],
        G=p["G"], G0=0.0, eta0=p["target"],
    )


def rhs(y, k):
    """dy/dt of the scalar limit system."""
    P, K, Pi, M, phi, psi = y
    A, B, E, C, D, F = k["A"], k["B"], k["E"], k["C"], k["D"], k["F"]
    C0, D0, F0 = k["C0"], k["D0"], k["F0"]
    Q, R, G1 = k["Q"], k["R"], k["G1"]

    cR = R + D * P * D + D0 * P * D0
    Pt = B * P + D * P * C + D0 * P * C0
    Kt = B * K + D * P * F + D0 * P * F0 + D0 * K * (C0 + F0)
    cRh = cR + D0 * K * D0
    a = Pt / cR
    b = (Pt + Kt) / cRh

    dP = -(2 * A * P + C * C * P + C0 * C0 * P - Pt * a + Q)
    dK = -(K * (A + E) + P * E + A * K + C * P * F + C0 * (P + K) * F0 + C0 * K * C0
           + Pt * a - (Pt + K * B + C0 * K * D0) * b - Q * G1)
    PPi = P + Pi
    dPi = -(2 * A * Pi + C0 * Pi * C0 + E * PPi + F * P * C + F0 * PPi * C0
            - (Pi * B + C0 * Pi * D0 + F * P * D + F0 * PPi * D0) * a - G1 * Q)
    lhs = Pi * B + F * P * D + C0 * Pi * D0 + F0 * PPi * D0
    dM = -(A * M + M * (A + E) + C0 * Pi * F0 + C0 * M * (C0 + F0) + Pi * E + E * (K + M) + F * P * F
           + F0 * PPi * F0 + F0 * (K + M) * (C0 + F0) + lhs * a
           - (Pi * B + M * B + C0 * (Pi + M) * D0 + F * P * D + F0 * (PPi + K + M) * D0) * b + G1 * Q * G1)

    PK = P + K
    PiM = Pi + M
    Phi = B * phi + D * P * k["g"] + D0 * PK * k["g0"] - R * k["eta2"]
    u0 = Phi / cRh
    dphi = -(A * phi + PK * k["f"] + C * P * k["g"] + C0 * PK * k["g0"]
             - (PK * B + C * P * D + C0 * PK * D0) * u0 - Q * k["eta1"])
    fc, gc, g0c = k["f"] - B * u0, k["g"] - D * u0, k["g0"] - D0 * u0
    dpsi = -((A + E) * psi + E * phi + PiM * fc + F * P * gc + (C0 * PiM + F0 * (PK + PiM)) * g0c
             + G1 * Q * k["eta1"])
    return np.array([dP, dK, dPi, dM, dphi, dpsi])


def terminal(k):
    G, G0, eta0 = k["G"], k["G0"], k["eta0"]
    return np.array([G, -G * G0, -G0 * G, G0 * G * G0, -G * eta0, G0 * G * eta0])


def dop853(k, T):
    sol = solve_ivp(lambda t, y: rhs(y, k), (T, 0.0), terminal(k), method="DOP853", rtol=1e-13, atol=1e-15)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[:, -1]


def rk4(k, T, steps):
    h = -T / steps
    y = terminal(k)
    for _ in range(steps):
        k1 = rhs(y, k)
        k2 = rhs(y + 0.5 * h * k1, k)
        k3 = rhs(y + 0.5 * h * k2, k)
        k4 = rhs(y + h * k3, k)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "production_oracle.json"
    k = coefficients(PARAMS)
    a = dop853(k, PARAMS["T"])
    b = rk4(k, PARAMS["T"], 100_000)
    diff = float(np.max(np.abs(a - b)))
    if diff > 1e-10:
        raise SystemExit(f"oracle methods disagree by {diff}")
    names = ["P", "K", "Pi", "M", "phi", "psi"]
    doc = {
        "preset": "production",
        "params": PARAMS,
        "t": 0.0,
        "values": {n: float(v) for n, v in zip(names, a)},
        "rk4_1e5": {n: float(v) for n, v in zip(names, b)},
        "method_disagreement": diff,
    }
    with open(out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(json.dumps(doc["values"], indent=2), f"\nmax |DOP853 - RK4| = {diff:.3e}")


if __name__ == "__main__":
    main()
