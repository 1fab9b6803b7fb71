from src.geometry.orderings import (
    balanced_greedy_order,
    balanced_order_odd,
    cyclic_difference,
    extreme_points_2m,
    in_L_image,
    odd_sums_within,
    partial_sums_within,
)
from src.geometry.polytope import (
    BalancedVector,
    PolytopeModel,
    build_simplex_model,
    contains,
    coordinates,
    embed,
)

__all__ = [
    "BalancedVector",
    "PolytopeModel",
    "balanced_greedy_order",
    "balanced_order_odd",
    "build_simplex_model",
    "contains",
    "coordinates",
    "cyclic_difference",
    "embed",
    "extreme_points_2m",
    "in_L_image",
    "odd_sums_within",
    "partial_sums_within",
]
