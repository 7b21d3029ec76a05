"""Dynamic rays, parameter rays and escape regions of the exponential family exp(z) + kappa."""

from .address import (EventuallyPeriodic, FastGenerator, PotentialBound, SpeedClass,
                      classify_speed, entry, format_address, growth_F, growth_F_inv,
                      growth_F_iter, parse_address, potential_bound, shift)
from .dynamics import (Bounded, Escaping, Indeterminate, OrbitRecord, escape_orbit,
                       eval_map, orbit_address, orbit_potential)
from .errors import (AddressSyntaxError, BoundaryStrip, ContinuationStuck, DomainError,
                     ExpRayError, NoConvergence, NotEscaping, NotFastAddress, OverflowDepth,
                     RoundtripFailure, SingularHit)
from .params import (ClassificationResult, ParamRaySample, classify_parameter, land_endpoint,
                     solve_parameter, trace_parameter_ray)
from .rays import (Complete, PrematureEnd, RaySample, RayTrace, dynamic_ray, pullback_point,
                   ray_derivative_check, trace_ray)
from .render import (EscapeImage, GridSpec, overlay_rays, render_dynamic_plane,
                     render_parameter_plane)

__version__ = "0.1.0"
