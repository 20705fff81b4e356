"""Baked-in parameter sets reproducing the published figures and estimates.

Caption couplings quoted as multiples of J are read as multiples of |J|.
Each preset is a plain nested dict in the same layout as the config file.
"""
from __future__ import annotations

import copy
import math

__all__ = ["PRESETS", "get_preset", "preset_names"]

_PI = math.pi


def _bands(delta2, G1, g2, **extra):
    out = {
        "run": {"command": "bands", "units": "natural"},
        "model": {"omega0": 100.0, "J": -1.0, "ell": 1.0, "G1": G1, "n_atoms": 1.0,
                  "g2": g2, "delta1": 0.0, "delta2": delta2},
        "grid": {"n_modes": 201, "k_min": 0.0, "k_max": _PI},
    }
    out["run"].update(extra)
    return out


def _sus_delta(g2, delta2):
    return {
        "run": {"command": "susceptibility", "units": "natural"},
        "model": {"omega0": 20.0, "J": 0.2, "ell": 1.0, "G1": 1.0, "n_atoms": 1.0, "g2": g2,
                  "delta1": 0.0, "delta2": delta2, "gamma_a": 1.0, "gamma_c": 1e-3},
        "scan": {"variable": "delta", "k": _PI / 4, "min": -4.0, "max": 4.0, "n_points": 2001},
    }


def _sus_J(g2, delta2, delta, k):
    return {
        "run": {"command": "susceptibility", "units": "natural"},
        "model": {"omega0": 100.0, "J": 0.0, "ell": 1.0, "G1": 1.0, "n_atoms": 1.0, "g2": g2,
                  "delta1": delta2 - delta, "delta2": delta2, "gamma_a": 1.0, "gamma_c": 1e-3},
        "scan": {"variable": "J", "k": k, "min": -2.0, "max": 2.0, "n_points": 2001},
    }


def _store(t_ramp, hold_value=0.1, gamma_c=0.0):
    return {
        "run": {"command": "store", "units": "natural"},
        "model": {"omega0": 100.0, "J": -1.0, "ell": 1.0, "G1": 1.0, "n_atoms": 1.0, "g2": 10.0,
                  "delta1": 0.0, "delta2": 0.0, "gamma": 0.0, "gamma_a": 0.0, "gamma_c": gamma_c},
        "grid": {"n_modes": 64},
        "schedule": {"control": "g2", "start_value": 10.0, "hold_value": hold_value,
                     "end_value": 10.0, "t_ramp_down": t_ramp, "t_hold": 50.0,
                     "t_ramp_up": t_ramp},
        "pulse": {"center_k": _PI / 2, "width_k": 0.1, "branch": 2, "sample_dt": 5.0},
    }


PRESETS: dict[str, dict] = {
    "fig3a": _bands(3.0, 0.1, 1.0),
    "fig3b": _bands(-3.0, 0.1, 1.0),
    "fig3c": _bands(0.0, 0.1, 3.0),
    "fig3d": _bands(0.0, 1.0, 0.1),
    # panels (a),(c),(e) show branches 1,2,3 for G1 = |J|, g2 = 0.1|J|; (b),(d),(f) for G1 = 0.1|J|, g2 = 3|J|
    "fig4a": _bands(0.0, 1.0, 0.1, branch=1),
    "fig4b": _bands(0.0, 0.1, 3.0, branch=1),
    "fig4c": _bands(0.0, 1.0, 0.1, branch=2),
    "fig4d": _bands(0.0, 0.1, 3.0, branch=2),
    "fig4e": _bands(0.0, 1.0, 0.1, branch=3),
    "fig4f": _bands(0.0, 0.1, 3.0, branch=3),
    "fig5a": _sus_delta(0.5, 0.0),
    "fig5b": _sus_delta(2.0, 0.0),
    "fig5c": _sus_delta(0.5, 1.0),
    "fig5d": _sus_delta(0.5, -1.0),
    "fig5e": _sus_delta(0.5, 2.0),
    "fig5f": _sus_delta(0.5, -2.0),
    "fig6a": _sus_J(0.5, 0.0, 1.0, _PI / 4),
    "fig6b": _sus_J(2.0, 0.0, -1.0, _PI / 4),
    "fig6c": _sus_J(0.5, 1.0, 1.0, _PI / 4),
    "fig6d": _sus_J(0.5, -1.0, -1.0, _PI / 4),
    "fig6e": _sus_J(0.5, 2.0, 1.0, _PI / 4),
    "fig6f": _sus_J(0.5, 0.0, 1.0, _PI / 2),
    "store": _store(200.0),
    "store-sudden": _store(0.0),
    "store-decay": _store(200.0, hold_value=0.0, gamma_c=1e-3),
    "estimate": {
        "run": {"command": "estimate", "units": "SI"},
        # omega0 does not enter the group velocity; optical carrier order of magnitude
        "model": {"omega0": 2.4e15, "J": 1.1e7, "ell": 15.69e-6, "g1": 2.5e9,
                  "n_atoms": 10000.0, "g2": 7.9e10, "delta1": 0.0, "delta2": 0.0},
    },
}


def preset_names(command: str | None = None) -> list[str]:
    return [name for name, cfg in PRESETS.items()
            if command is None or cfg["run"]["command"] == command]


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
