"""Mixing scales, rearrangement energies and energy lower bounds on the 2-torus."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, IntegrationError, PrecisionError, TorusmixError
from .geometry import (Ball, IndicatorField, ScalarField, TorusPoint, ball_fraction, integrate,
                       torus_dist, wrap)
from .kernels import BACKEND
from .maps import MapDescriptor, apply, inverse, jacobian, jacobian_numeric, membership_in_image
from .flow import (FlowSpec, check_near_incompressible, flow_membership_in_image,
                   gronwall_check, integrate_flow, time1_map)
from .mixing import MixingParams, build_image_indicator, mixes_at_scale, mixing_scale_scan
from .bounds import (bound_constant, conjecture_diagnostic, corollary_rhs, corollary_verdict,
                     energy_density, min_separator_length, proof_trace, slice_length,
                     theorem_verdict, total_energy)

__all__ = [
    "BACKEND", "Ball", "ConfigError", "DomainError", "FlowSpec", "IndicatorField",
    "IntegrationError", "MapDescriptor", "MixingParams", "PrecisionError", "ScalarField",
    "TorusPoint", "TorusmixError", "apply", "ball_fraction", "bound_constant",
    "build_image_indicator", "check_near_incompressible", "conjecture_diagnostic",
    "corollary_rhs", "corollary_verdict", "energy_density", "flow_membership_in_image",
    "gronwall_check", "integrate", "integrate_flow", "inverse", "jacobian", "jacobian_numeric",
    "membership_in_image", "min_separator_length", "mixes_at_scale", "mixing_scale_scan",
    "proof_trace", "slice_length", "theorem_verdict", "time1_map", "torus_dist", "total_energy",
    "wrap",
]
