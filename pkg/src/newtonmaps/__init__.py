"""Newton maps of entire functions: evaluation, fixed points, basins and winding-number calculus."""

from .dynamics import (BasinRaster, ChannelReport, Fate, OrbitOutcome, compute_basin_raster,
                       detect_channels, iterate_orbit, iterate_orbits,
                       verify_linearization_at_infinity, verify_root_between_channels)
from .fixedpoints import (FixedPointKind, FixedPointRecord, PathSpec, classify_fixed_point,
                          find_roots, head_polynomial, reconstruct_entire_function,
                          residue_at_fixed_point, verify_newton_criterion)
from .functions import (Builtin, EvalResult, EvalStatus, FunctionSpec, PolyExpPoly, Polynomial,
                        SpecError, Window, eval_f, eval_newton, eval_newton_derivative,
                        newton_map, poles_of_newton)
from .lefschetz import (RationalMap, SampledCurve, WindingReport, degree_on_curve,
                        herman_ring_obstruction, lefschetz_index, sum_indices_inside,
                        trace_preimage_curves, verify_fixed_point_count, winding_number)
from .rng import SplitMix64, generate_random_polynomial

__all__ = [
    "BasinRaster", "Builtin", "ChannelReport", "EvalResult", "EvalStatus", "Fate",
    "FixedPointKind", "FixedPointRecord", "FunctionSpec", "OrbitOutcome", "PathSpec",
    "PolyExpPoly", "Polynomial", "RationalMap", "SampledCurve", "SpecError", "SplitMix64",
    "Window", "WindingReport", "classify_fixed_point", "compute_basin_raster",
    "degree_on_curve", "detect_channels", "eval_f", "eval_newton", "eval_newton_derivative",
    "find_roots", "generate_random_polynomial", "head_polynomial", "herman_ring_obstruction",
    "iterate_orbit", "iterate_orbits", "lefschetz_index", "newton_map", "poles_of_newton",
    "reconstruct_entire_function", "residue_at_fixed_point", "sum_indices_inside",
    "trace_preimage_curves", "verify_fixed_point_count", "verify_linearization_at_infinity",
    "verify_newton_criterion", "verify_root_between_channels", "winding_number",
]
