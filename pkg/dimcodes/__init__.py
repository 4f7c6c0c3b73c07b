"""Covering codes, entropy bounds and dimension-changing sequence constructions."""

from .settings import TOOL_VERSION as __version__
from .entropy import (
    bound_envelope, critical_profile, entropy, entropy_inv, f_envelope, ternary_residual,
    worst_distance,
)
from .hamming import BitBlock, ball_volume, density, enumerate_ball, hamming_distance
from .covercode import (
    CoveringCode, ball_cover, build_random_code, canonical_code, min_cover_size_exact,
    nearest_center, target_size, verify_covering_radius, verify_well_distributed,
)
from .streams import (
    PrefixSource, b_bit, bernoulli_source, chunk_bounds, distance_profile, hoeffding_tolerance,
    mix, thin_by,
)
from .codeword import CodewordSpec, codeword_radius, codeword_source, density_code_length, description_ledger
from .transforms import (
    certify_lowering, interpolate_family, lower_bernoulli, lower_bound_check, lowering_schedule,
    raise_dimension, worst_case_lower,
)
