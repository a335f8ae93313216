"""Numerical tolerances used across the package.

Every default lives in :class:`Tolerances`.  Use :func:`override_tolerances`
to change them for a block of code; the override is stored in a context
variable so concurrent threads do not see each other's settings.
"""

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    # matrix_core
    singular_pivot: float = 1e-12
    stability_margin: float = 1e-10
    max_dimension: int = 16
    # filter_design
    riccati_residual: float = 1e-10
    riccati_max_iter: int = 100
    certify_margin: float = 1e-9
    distinct_gap: float = 1e-8
    # risk_model
    degenerate_gain: float = 1e-12
    # gain_optimizer
    grid_points: int = 64
    bracket_rtol: float = 1e-9
    golden_max_iter: int = 200


_current = contextvars.ContextVar("smoothtrack_tolerances", default=Tolerances())


def get_tolerances():
    return _current.get()


@contextlib.contextmanager
def override_tolerances(**changes):
    """Temporarily replace selected tolerance values.

    >>> with override_tolerances(riccati_residual=1e-8):
    ...     get_tolerances().riccati_residual
    1e-08
    """
    token = _current.set(dataclasses.replace(_current.get(), **changes))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
