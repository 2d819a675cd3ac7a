"""Amoebot structures with reconfigurable circuits: a round-level simulator,
distributed algorithms on it and full-knowledge reference implementations."""

from .engine import (AmoebotWorld, DisconnectedStructure, DuplicateNode, EngineError, InvalidPinConfiguration,
                     InvalidPinCount, RoundBudgetExhausted, StateBudgetExceeded, load_structure, run_until, step)
from .grid import D_M, D_P, Axis, Direction, GridCoord, neighbor, neighbors, opposite, proj, rotate
from .pasc import ChainRef, block_primitive, pasc_replay, pasc_run
from .primitives import chain_sum_mod_k, classify_boundary, detect_boundaries, leader_election
from .shapes import ParseError, format_structure, parse_structure
from .skeleton import canonical_skeleton, skeleton_path, spanning_tree
from .spatial import global_maxima, stripe_algorithm, stripe_identifiers
from .symmetry import detect_symmetries, encode_skeleton_path, evaluate_polynomial, generate_prime, string_equality

__all__ = [
    "AmoebotWorld", "Axis", "ChainRef", "D_M", "D_P", "Direction", "DisconnectedStructure", "DuplicateNode",
    "EngineError", "GridCoord", "InvalidPinConfiguration", "InvalidPinCount", "ParseError", "RoundBudgetExhausted",
    "StateBudgetExceeded", "block_primitive", "canonical_skeleton", "chain_sum_mod_k", "classify_boundary",
    "detect_boundaries", "detect_symmetries", "encode_skeleton_path", "evaluate_polynomial", "format_structure",
    "generate_prime", "global_maxima", "leader_election", "load_structure", "neighbor", "neighbors", "opposite",
    "parse_structure", "pasc_replay", "pasc_run", "proj", "rotate", "run_until", "skeleton_path", "spanning_tree",
    "step", "stripe_algorithm", "stripe_identifiers", "string_equality",
]
