"""Path statistics that check sample-path laws of bi-fBm."""
from ._common import EstimatorRow, ScalingFit, fit_scaling, mean_se, write_rows
from .crossings import CrossingComparison, crossing_count_localtime, level_crossings, smoothed_path
from .dimension import (
    box_count,
    polyline_box_count,
    dyadic_scales,
    graph_dimension_reference,
    graph_image_dimension,
    image_dimension_reference,
    level_set_dimension,
    level_set_dimension_reference,
    sheet_level_set_candidates,
)
from .extremes import chung_statistic, small_ball_mc
from .localtime import (
    LocalTimeEstimate,
    expected_local_time,
    local_time_at,
    local_time_holder,
    local_time_tail,
    occupation_local_time,
    renormalization_functional,
)
from .variations import (
    expected_quadratic_variation,
    holder_norm,
    holder_small_ball_mc,
    oscillation_moments,
    quadratic_variation,
)
