"""Pinned reference models with documented regimes.

Theorems about resolvent growth quantify over all admissible potentials;
fixing a small zoo with known trapping/nontrapping character makes every
sweep reproducible.  Amplitudes and declared decay rates are tuned so the
normalized long-range bounds hold with constant one (check_long_range
passes), which some of the sweep preconditions require.

M1  free scalar                        nontrapping, escape certificate 2E
M2  scalar long-range rational tail    nontrapping
M3  scalar wall + barrier dip          trapping: shape resonance behind the
                                       gaussian barrier, widths ~ e^{-W/h}
M4  two diagonal levels + coupling     nontrapping at E above both levels
M5  avoided crossing (tanh)            nontrapping away from the crossing
"""

from .model import make_potential

MODEL_ZOO = {
    "M1": {
        "potential": {"family": "free", "params": {"dim": 1}},
        "regime": "nontrapping",
        "E": 1.0,
        "r_max": 30.0, "n": 1499, "r0": 6.0,
        "theta": 0.2, "A": 18.0,
        "h_list": "default",
        "notes": "free scalar half line; escape margin exactly 2E",
    },
    "M2": {
        "potential": {"family": "rational_tail",
                      "params": {"levels": [0.0], "amps": [0.3],
                                 "rho": 2.0, "rho0": 1.0}},
        "regime": "nontrapping",
        "E": 1.0,
        "r_max": 30.0, "n": 1499, "r0": 6.0,
        "theta": 0.2, "A": 18.0,
        "h_list": "default",
        "notes": "repulsive (1+r^2)^{-1} tail, genuinely long range",
    },
    "M3": {
        "potential": {"family": "gaussian_mix",
                      "params": {"levels": [0.0],
                                 "terms": [[0, 0, 0.5, 0.0, 1.2],
                                           [0, 0, 0.18, 3.0, 0.7]],
                                 "rho0": 0.1}},
        "regime": "trapping",
        "e_window": (0.06, 0.18),
        "r_max": 14.0, "n": 349, "r0": 6.0,
        "theta": 0.25, "A": 6.0,
        "h_list": [0.14, 0.1148, 0.0942, 0.0773, 0.0634, 0.052, 0.0427, 0.035],
        "notes": "positive-energy dip behind a gaussian barrier; one smooth "
                 "quasi-bound level tracked across the sweep",
    },
    "M4": {
        "potential": {"family": "gaussian_mix",
                      "params": {"levels": [0.0, 1.0],
                                 "terms": [[0, 1, 0.08, 2.0, 1.0],
                                           [0, 0, 0.05, 2.5, 1.0]],
                                 "rho0": 1.0}},
        "regime": "nontrapping",
        "E": 3.0,
        "r_max": 30.0, "n": 3299, "r0": 6.0,
        "theta": 0.2, "A": 18.0,
        "h_list": "default",
        "notes": "two open channels with gaussian coupling; certificate "
                 "passes at E = 3 with s = 1",
    },
    "M5": {
        "potential": {"family": "avoided_crossing",
                      "params": {"alpha": 0.12, "center": 4.0,
                                 "delta": 0.25, "rho0": 0.25}},
        "regime": "nontrapping",
        "E": 1.0,
        "r_max": 30.0, "n": 1499, "r0": 8.0,
        "theta": 0.2, "A": 18.0,
        "h_list": "default",
        "notes": "tanh avoided crossing rotated so V_inf is diagonal",
    },
}


def zoo_potential(name):
    entry = MODEL_ZOO[name]
    return make_potential(entry["potential"]["family"],
                          **entry["potential"]["params"])


def zoo_entry(name):
    if name not in MODEL_ZOO:
        raise KeyError(f"unknown zoo model {name!r} (known: {sorted(MODEL_ZOO)})")
    return MODEL_ZOO[name]


__all__ = ["MODEL_ZOO", "zoo_potential", "zoo_entry"]
