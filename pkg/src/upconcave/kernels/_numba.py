"""Jitted copies of the loop kernels.

Each function is rebuilt against a shared namespace in which every sibling
helper is itself jitted, so nested calls resolve to compiled code.
"""
import types

from numba import njit

from . import _loops

_NAMES = (
    "capped_simplex_project",
    "coverage_lovasz",
    "_greedy_vertex",
    "_affine_minimizer",
    "_minor_cycles",
    "_mnp",
    "base_projection",
    "_scenario_bounds",
    "coverage_inner",
    "multilinear_value",
    "multilinear_grad",
    "coverage_marginals",
    "_best_on_line",
    "grid_max_quadratic",
)

_ns = dict(vars(_loops))
for _name in _NAMES:
    _f = getattr(_loops, _name)
    _g = types.FunctionType(_f.__code__, _ns, _f.__name__, _f.__defaults__, _f.__closure__)
    _g.__doc__ = _f.__doc__
    _ns[_name] = njit(cache=True)(_g)

capped_simplex_project = _ns["capped_simplex_project"]
coverage_lovasz = _ns["coverage_lovasz"]
base_projection = _ns["base_projection"]
coverage_inner = _ns["coverage_inner"]
multilinear_value = _ns["multilinear_value"]
multilinear_grad = _ns["multilinear_grad"]
coverage_marginals = _ns["coverage_marginals"]
grid_max_quadratic = _ns["grid_max_quadratic"]
