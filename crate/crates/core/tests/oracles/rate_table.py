"""Independent evaluation of the comparison-table rows at fixed parameter sets.

Prints Rust array literals consumed by tests/rates.rs. Uses mpmath at 50 digits
so that the frozen values are exact to double precision.
"""
from mpmath import mp, mpf, sqrt, exp, log, cbrt

mp.dps = 50

SETS = {
    "ones": dict(H=1, B=1, Delta=1, lam=1, sigma=1, ss=1, zs=1, zb=1, M=1, K=1, R=1),
    "set_a": dict(H="3.7", B="1.9", Delta="2.3", lam="0.41", sigma="1.3", ss="0.8",
                  zs="2.2", zb="2.9", M=16, K=7, R=45),
    "set_b": dict(H=52, B="0.35", Delta="0.6", lam="0.05", sigma="6.5", ss="4.1",
                  zs="0.3", zb="0.7", M=3, K=120, R=9),
}


def rows(p):
    H, B, D, l = p["H"], p["B"], p["Delta"], p["lam"]
    s, ss, zs, zb = p["sigma"], p["ss"], p["zs"], p["zb"]
    M, K, R = p["M"], p["K"], p["R"]
    t23 = R ** (mpf(2) / 3)
    return [
        ("mbsgd_convex", H * B**2 / R + ss * B / sqrt(M * K * R)),
        ("accel_mbsgd_convex", H * B**2 / R**2 + s * B / sqrt(M * K * R)),
        ("koloskova_convex", H * B**2 / R + ss * B / sqrt(M * K * R)
         + cbrt(H * zs**2 * B**4) / t23 + cbrt(H * ss**2 * B**4) / (cbrt(K) * t23)),
        ("khaled_convex", H * B**2 / R + B * sqrt(ss**2 + zs**2) / sqrt(M * K * R)
         + cbrt(H * (ss**2 + zs**2) * B**4) / t23),
        ("scaffold_convex", H * B**2 / R + s * B / sqrt(M * K * R) + zs**2 / (H * R)
         + s * zs / (H * sqrt(M * K * R))),
        ("local_ub_convex", H * B**2 / (K * R) + ss * B / sqrt(M * K * R)
         + cbrt(H * zb**2 * B**4) / t23 + cbrt(H * s**2 * B**4) / (cbrt(K) * t23)),
        ("local_lb_convex", min(H * B**2 / R, cbrt(H * zs**2 * B**4) / t23)
         + s * B / sqrt(M * K * R) + cbrt(H * s**2 * B**4) / (K ** (mpf(2) / 3) * t23)),
        ("dzr_lb_convex", min(H * B**2 / R**2, zs**2 / (H * R**2)) + s * B / sqrt(M * K * R)),
        ("mbsgd_sc", H * D / l * exp(-l * R / H) + ss**2 / (l * M * K * R)),
        ("accel_mbsgd_sc", D * exp(-sqrt(l) * R / sqrt(H)) + s**2 / (l * M * K * R)),
        ("koloskova_sc", ss**2 / (l * M * K * R) + H * zs**2 / (l**2 * R**2)
         + H * ss**2 / (l**2 * K * R**2)),
        ("scaffold_sc", (H * D + l * zs**2 / H**2) * exp(-l * R / H) + s**2 / (l * M * K * R)),
        ("local_ub_sc", H**2 * B**2 / (H * K * R + l * K**2 * R**2)
         + (H * zb**2 / (l**2 * R**2) + H * s**2 / (l**2 * K * R**2)) * log(H / l + K * R)
         + ss**2 / (l * M * K * R)),
        ("local_lb_sc", min(D * exp(-l * R / H), H * zs**2 / (l**2 * R**2))
         + s**2 / (l * M * K * R) + min(D, H * s**2 / (l**2 * K**2 * R**2))),
        ("dzr_lb_sc", min(D * sqrt(l) / sqrt(H), l * zs**2 / H**2) * exp(-sqrt(l) * R / sqrt(H))
         + s**2 / (l * M * K * R)),
    ]


for name, raw in SETS.items():
    p = {k: mpf(v) for k, v in raw.items()}
    print(f"const {name.upper()}: [(&str, f64); 15] = [")
    for row, v in rows(p):
        print(f'    ("{row}", {mp.nstr(v, 20)}),')
    print("];")
