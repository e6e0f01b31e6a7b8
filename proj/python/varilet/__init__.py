"""Topological total variation and varilet transforms of PL fields on graphs."""

import json

from ._core import (
    Basis,
    CoefficientError,
    ConsistencyError,
    DegenerateFieldError,
    Field,
    LensError,
    ParseError,
    VariletError,
    basis_svg,
    classic_tv_1d,
    count_contours,
    field_svg,
    filter,
    ttv,
)
from . import _core

__all__ = [
    "Basis",
    "CoefficientError",
    "ConsistencyError",
    "DegenerateFieldError",
    "Field",
    "LensError",
    "ParseError",
    "VariletError",
    "basis_svg",
    "build_lens",
    "classic_tv_1d",
    "count_contours",
    "field_svg",
    "filter",
    "fuzz",
    "middle_space",
    "transform",
    "ttv",
    "verify",
]


def middle_space(field):
    """Middle space (Reeb graph) of a field as a dict."""
    return json.loads(_core.middle_space_json(field))


def build_lens(field, cuts=(), branch=False, min_amplitude=0.0):
    """Lens document for threshold cuts (level, "up"|"down", vertex id) or the branch lens."""
    return json.loads(_core.lens_json(field, list(cuts), branch, min_amplitude))


def _lens_text(lens):
    if lens is None or isinstance(lens, str):
        return lens
    return json.dumps(lens)


def verify(field, lens=None, trials=20, seed=1, fault=None):
    """Run the lemma and basis checks; returns the report as a dict."""
    return json.loads(_core.verify(field, _lens_text(lens), trials, seed, fault))


def fuzz(seed=1, fields=10, lenses_per_field=3, max_vertices=100, trials=10):
    """Checks on random fields and lenses; returns the aggregated report."""
    return json.loads(_core.fuzz(seed, fields, lenses_per_field, max_vertices, trials))


def transform(field, lens=None, cuts=(), branch=False, min_amplitude=0.0, threads=1):
    """Varilet basis of `field`. `lens` may be a lens document (dict or JSON text)."""
    return _core.transform(field, _lens_text(lens), list(cuts), branch, min_amplitude, threads)
