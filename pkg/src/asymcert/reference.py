"""Published reference values used by the ``table1`` regression command.

Biases are quoted to three decimals and witness values to five, so the
comparison tolerances are 5e-4 for biases and 1e-4 for everything else.
"""

OMEGA_TOL = 5e-4
VALUE_TOL = 1e-4

TABLE1 = [
    {
        "angles": (130.0, 130.0, 100.0),
        "omegas": (0.318, 0.318, 0.456),
        "q_mirror_123": 5.52185,
        "q_mirror_213": 5.49684,
        "q_mirror_312": 5.49684,
        "q_max": 5.52185,
        "q_mirror": 5.52185,
        "delta": 0.00000,
    },
    {
        "angles": (58.4, 121.6, 180.0),
        "omegas": (0.641, 0.358, 0.000),
        "q_mirror_123": 5.82843,
        "q_mirror_213": 5.46650,
        "q_mirror_312": 5.82843,
        "q_max": 5.93950,
        "q_mirror": 5.82843,
        "delta": 0.11107,
    },
    {
        "angles": (54.0, 112.0, 194.0),
        "omegas": (0.662, 0.403, 0.109),
        "q_mirror_123": 5.80372,
        "q_mirror_213": 5.51644,
        "q_mirror_312": 5.80866,
        "q_max": 5.89696,
        "q_mirror": 5.80866,
        "delta": 0.08831,
    },
    # only bounds are published for this configuration, to four decimals
    {
        "angles": (60.0, 200.0, 100.0),
        "q_max": 5.8503,
        "q_mirror": 5.8065,
        "delta": 5.8503 - 5.8065,
    },
]

# Hardware runs: (angles, Q_mirror, Q_max, per-pair I3, Q_exp, sigma)
TABLE2 = [
    {"angles": (60.0, 200.0, 100.0), "q_mirror": 5.8065, "q_max": 5.8503,
     "i3": (2.0672, 1.8622, 1.8582), "q_exp": 5.7877, "sigma": 0.0113},
    {"angles": (58.4, 121.6, 180.0), "q_mirror": 5.8284, "q_max": 5.9395,
     "i3": (2.0938, 1.8220, 1.9736), "q_exp": 5.8894, "sigma": 0.0145},
    {"angles": (54.0, 112.0, 194.0), "q_mirror": 5.8086, "q_max": 5.8970,
     "i3": (2.1195, 1.8205, 1.8947), "q_exp": 5.8347, "sigma": 0.0106},
]
