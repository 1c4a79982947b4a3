"""Polar-staircase codes: construction, systematic SCAN decoding, sliding-window
staircase decoding over AWGN and Gilbert-Elliott channels, and a Monte Carlo
harness."""

from .channels import (AwgnParams, GilbertElliottParams, awgn_transmit, ge_states,
                       ge_transmit)
from .codec import (SoftState, decide, init_state, polar_transform, scan_decode_systematic,
                    systematic_encode, update_bit_map, update_llr_map)
from .construct import (CodeConfig, build_code, dimension_for_rate, error_prob, ga_evolve,
                        reliability_profile, select_info_set)
from .llr import LLR_MAX
from .simkit import SimConfig, SimResult, complexity_estimate, run_point, run_sweep
from .staircase import (Frame, OverlapSchedule, StaircaseConfig, StaircaseDecoder,
                        burst_patch, combine_extrinsic, decode_frame, encode_frame,
                        make_schedule)

__version__ = "0.1.0"
