"""Machine-readable output: stable JSON reports and fixed-header CSV.

Reports must be byte-identical across runs and thread counts for the same
configuration: keys are sorted, floats are printed with 17 significant
digits (enough to round-trip a double), and row order follows the sweep
grid, never completion order.
"""
from __future__ import annotations

import json

CSV_COLUMNS = [
    "gamma_A", "gamma_B", "gamma_AB", "g_R_BB", "chi_bar_B", "M",
    "eps2", "Sigma2", "visibility", "D_B_threshold", "D_B_phi",
    "slack", "n_created",
]


def fmt17(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalise -0.0
    return format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item) and not isinstance(obj, (str, bytes)):
        try:
            return obj.item()
        except Exception:
            pass
    return obj


def stable_json(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2,
                      allow_nan=True) + "\n"


def sweep_header(axes) -> list:
    return [ax.parameter for ax in axes] + CSV_COLUMNS


def sweep_row(axis_values, infl, eps2, sigma2, rep) -> str:
    cells = [fmt17(v) for v in axis_values]
    cells += [fmt17(infl.gamma_A), fmt17(infl.gamma_B), fmt17(infl.gamma_AB),
              fmt17(infl.g_R_BB), fmt17(infl.chi_bar_B), fmt17(infl.m_decoh),
              fmt17(eps2)]
    if rep is None:
        cells += [fmt17(sigma2)] + [""] * 5
    else:
        cells += [fmt17(sigma2), fmt17(rep.visibility),
                  fmt17(rep.d_b_threshold), fmt17(rep.d_b_phi),
                  fmt17(rep.slack), fmt17(rep.n_created)]
    return ",".join(cells)


def influence_block(infl):
    return {
        "values": infl.as_dict(),
        "error_estimates": dict(infl.error_estimates),
        "diagnostics": _jsonable(infl.diagnostics),
    }


def duality_block(rep):
    return {
        "visibility": rep.visibility,
        "d_b_threshold": rep.d_b_threshold,
        "d_b_phi": rep.d_b_phi,
        "slack": rep.slack,
        "n_created": rep.n_created,
        "sigma_x": rep.sigma_x,
        "sigma_y": rep.sigma_y,
    }
