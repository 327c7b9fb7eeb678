"""Spectral flow of twisted Dirac operators on flat tori.

Thin pythonic wrapper over the compiled core. Forms and connections travel as
JSON documents matching the CLI schema.
"""

import json

try:
    from ._specflow import *  # noqa: F401,F403  (installed wheel layout)
    from . import _specflow as _core
except ImportError:  # build-tree layout: extension next to the package
    from _specflow import *  # noqa: F401,F403
    import _specflow as _core

__all__ = [
    "connection",
    "contact_form",
    "form",
    "exact_flow",
    "estimator_flow",
    "eigenvalues",
    "prediction",
    "heat_trace",
    "count_eigs",
    "mollifier_phi",
    "choose_params",
    "run_experiment",
]


def connection(n, hol, osc=None, fiber=1):
    """Build a connection document from a holonomy vector and optional osc form."""
    doc = {"n": n, "fiber": fiber, "hol": list(hol), "osc": osc}
    return json.dumps(doc)


def form(n, degree, terms, fiber=1):
    """Build a form document; terms are (momentum, axes_1based, complex) triples."""
    out = {"n": n, "degree": degree, "fiber": fiber, "terms": []}
    for momentum, axes, value in terms:
        value = complex(value)
        out["terms"].append(
            {
                "k": list(momentum),
                "I": list(axes),
                "re": [[value.real]],
                "im": [[value.imag]],
            }
        )
    return json.dumps(out)


def contact_form(amplitude=1.0):
    return _core.contact_one_form_json(amplitude)


def prediction(conn0, conn1):
    return _core.prediction_json(conn0, conn1)


def eigenvalues(conn, K):
    return _core.eigenvalues_json(conn, K)


def exact_flow(conn, hol_increment, osc_increment="", K=8, samples=64):
    return _core.exact_flow_json(conn, list(hol_increment), osc_increment, K, samples)


def estimator_flow(conn, hol_increment, osc_increment="", K=8, samples=48, rmax=-1.0):
    return _core.estimator_flow_json(conn, list(hol_increment), osc_increment, K, samples, rmax)


def heat_trace(conn, K, t):
    return _core.heat_trace_json(conn, K, t)


def count_eigs(conn, K, lam):
    return _core.count_eigs_json(conn, K, lam)


def run_experiment(name, config=None):
    return _core.run_experiment(name, json.dumps(config or {}))
