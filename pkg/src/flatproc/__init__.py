"""flatproc: simulation and exact verification of Poisson and non-Poisson
flat processes, their intersection and proximity processes, associated
zonotopes, and measure-metric stability diagnostics."""

__version__ = "0.1.0"

from .flat_geometry import (DegeneratePairError, Flat, ProximitySegment, Subspace,
                            closest_pair, complement, grassmann_distance,
                            haar_sample, orthonormalize, subspace_determinant)
from .measures import (DirectionSet, GrassmannMeasure, SphereMeasure, integrate,
                       lower_bound_check, symmetrize_hyperplane_measure,
                       symmetrize_line_measure, t_lift)
from .zonoid_engine import Zonotope, area_measure, from_measure, intrinsic_volume, mu_Q_r, support
from .simulator import (FactorialDistribution, FlatProcessSpec, FlatSample,
                        SrConstruction, build_factorial_distribution,
                        sample_cube_process, sample_poisson, sample_q0,
                        sample_sr_flats)
from .derived_processes import (IntersectionSample, SegmentProcessSample, f_alpha,
                                intersections, order_statistics, proximity)
from .closed_form import (WindowDescriptor, asymptotic_covariance, c_constant,
                          hyperplane_intersection, intersection_density,
                          isoperimetric_bound, mean_F_alpha, proximity_directional,
                          proximity_intensity, proximity_intensity_two, weibull_beta,
                          weibull_cdf)
from .measure_metrics import (MetricSample, bl_distance, prohorov_distance,
                              stability_harness)
from .stats_harness import (ReplicationPlan, clt_diagnostics, factorial_moment_check,
                            ks_statistic, replicate)
