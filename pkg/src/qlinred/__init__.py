"""Worst-case to average-case reduction for matrix-vector multiplication over F_p.

Submodules
----------
fflinalg   finite-field vectors, matrices and row reduction
fourier    characters, Fourier transform and convolution counts
additive   correction bases, Bohr sets and decompositions
qsim       register-level statevector simulator with query counting
qsvt       polynomial transforms of block encodings, fixed-point search
qsub       verification, indicator oracles, sampling, Fourier sampling
avgcase    planted average-case algorithms and threshold draws
reduction  the worst-case solver and its two-sided variants
harness    experiment runner and command-line interface
"""
from .fflinalg import FieldElement, FpMatrix, FpVector, field_arith, inner_product, matvec, rref_with_pivots
from .fourier import CharacterSet, Spectrum, fourier_transform, inverse_fourier_transform, spec_threshold
from .additive import bogolyubov_subspace, correction_basis, decompose, verify_robust_bogolyubov
from .avgcase import PlantedAlg, SuccessProfile, generate_instance, make_planted_alg, random_threshold
from .qsub import alg_verified, indicator_oracle, learn_heavy_characters, q_sample, q_verify
from .qsvt import apply_svt, fixed_point_amplify, threshold_polynomial
from .reduction import ReductionConfig, alg_boost, large_field_reduce, matrix_shift_reduce, run_reduction

__version__ = "0.1.0"
