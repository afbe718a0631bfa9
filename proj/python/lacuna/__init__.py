"""Lacunary trigonometric sums built block by block, with certified bounds.

The compiled core lives in ``lacuna._lacuna``; this package re-exports it.
Errors raise :class:`Error`, whose ``args`` are ``(code, detail, index)``.
"""

from ._lacuna import (  # noqa: F401
    ArcSet,
    Error,
    Plan,
    Profile,
    Run,
    TrigPoly,
    __version__,
    fejer,
    init,
    kernel_sum_envelope,
    load_run,
    modulate,
    plan_from_json,
    preset,
    reduce_widths,
    run,
    save_run,
    series_identity,
    superlevel_arcs,
    survivors,
    theorem_rhs,
    validate,
    verify,
)

Error.code = property(lambda self: self.args[0])
Error.detail = property(lambda self: self.args[1])
Error.index = property(lambda self: self.args[2])


def stress_profile() -> Profile:
    """Constants small enough that the bad sets are nonempty at desk scale."""
    return Profile(beta=0.5, a_offset=2.0, a_slope=3.0)
