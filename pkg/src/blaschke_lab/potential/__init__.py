"""Green's functions, averages, Riesz charges and integration against measures."""

from ..domains import DomainSpec, disk, moebius_image, unit_disk, whole_plane
from .green import GreenKernel, green_domain, green_field, green_unit_disk
from .means import circular_mean, disk_mean, real_function, recover_value
from .measures import (
    ChargeSplit,
    MeasureEstimate,
    RegionFilter,
    annulus_filter,
    atomic_charge,
    hahn_jordan_split,
    in_dom,
    integrate_measure,
    log_cell_mean,
    log_potential_at,
    riesz_charge,
    riesz_measure_grid,
)

__all__ = [
    "ChargeSplit", "DomainSpec", "GreenKernel", "MeasureEstimate", "RegionFilter", "annulus_filter",
    "atomic_charge", "circular_mean", "disk", "disk_mean", "green_domain", "green_field",
    "green_unit_disk", "hahn_jordan_split", "in_dom", "integrate_measure", "log_cell_mean",
    "log_potential_at", "moebius_image", "real_function", "recover_value", "riesz_charge",
    "riesz_measure_grid", "unit_disk", "whole_plane",
]
