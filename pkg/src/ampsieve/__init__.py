"""Amplification proofs of large sieve inequalities, checked against brute force."""

from .arith import friable_up_to, mobius_and_radical, primes_up_to, squarefree_up_to
from .harmonic import dls_ratio, gram_extreme, hls_ratio
from .modform import (
    Ensemble,
    WeylCoefficients,
    cor1_check,
    cor2_bound,
    expect,
    load_ensemble,
    sign_change_experiment,
    synthetic_ensemble,
    weyl_ratio,
)
from .residue_sieve import (
    OmegaSystem,
    crt_amplifier,
    fourier_coeffs,
    optimal_weights,
    prime_amplifier,
    ramanujan_sum,
    sieve_bounds,
    sift_bruteforce,
    verify_sieve,
)
from .sato_tate import MinorantPoly, cheby_eval, hecke_extend, lambda_big, st_integral, verify_minorant

__version__ = "0.1.0"
