"""Uniform permutations with bounded decreasing subsequences, their lattice-path
encodings, and the traceless Dyson bridge they converge to."""

from .permcore import Permutation, enumerate_avoiders, layer_decompose, perm_from_words, words_from_perm
from .rng import SeededRng, run_replicas
from .sampler import sample_avoider
from .words import LayeredWords
from .wordpath import build_p_sigma, build_s_hat, path_from_words, sup_distance

__all__ = [
    "LayeredWords",
    "Permutation",
    "SeededRng",
    "build_p_sigma",
    "build_s_hat",
    "enumerate_avoiders",
    "layer_decompose",
    "path_from_words",
    "perm_from_words",
    "run_replicas",
    "sample_avoider",
    "sup_distance",
    "words_from_perm",
]
